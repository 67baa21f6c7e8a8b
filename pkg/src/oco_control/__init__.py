"""Online convex optimization for adaptive linear control.

Public surface: the simulator and stability certificates (`system`),
disturbance-action policies (`dap`), regularized estimation (`estimation`),
OCO engines (`oco_engines`), the optimistic controller (`controller`), the
hidden-linear-transform learner (`oco_hlt`), cost oracles (`costs`), and the
benchmark harness (`harness`).
"""

from . import controller, costs, dap, estimation, harness, oco_engines, oco_hlt, system
from .errors import (
    CertificationError,
    ConfigError,
    DimensionError,
    NumericError,
    UncertifiableError,
    UnstableSystemError,
)

__all__ = [
    "controller",
    "costs",
    "dap",
    "estimation",
    "harness",
    "oco_engines",
    "oco_hlt",
    "system",
    "CertificationError",
    "ConfigError",
    "DimensionError",
    "NumericError",
    "UncertifiableError",
    "UnstableSystemError",
]
