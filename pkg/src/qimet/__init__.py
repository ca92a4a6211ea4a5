"""qimet: error metrics for quantum channels and subsystem-measurement
instruments.

Closed-form fidelity and diamond-norm expressions for stochastic noise
models, rigorous two-sided diamond-norm bounds for general instrument
implementations, and a certified semidefinite-programming oracle to check
them against.
"""

__version__ = "0.1.0"

from . import (channels, config, errors, instruments, linalg, metrics,
               oracle, verify)

__all__ = ["channels", "config", "errors", "instruments", "linalg",
           "metrics", "oracle", "verify", "__version__"]
