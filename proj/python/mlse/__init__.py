"""Level set estimation on hierarchical partitions."""

from ._mlse import (
    RESULTS_HEADER,
    Config,
    ConfigError,
    GaussianProcess,
    Kernel,
    NumericalError,
    __version__,
    info_constant_c4,
    load_config,
    mutual_information,
    parse_config,
    quantile,
    run,
    verify,
)

__all__ = [
    "RESULTS_HEADER",
    "Config",
    "ConfigError",
    "GaussianProcess",
    "Kernel",
    "NumericalError",
    "__version__",
    "info_constant_c4",
    "load_config",
    "mutual_information",
    "parse_config",
    "quantile",
    "run",
    "verify",
]
