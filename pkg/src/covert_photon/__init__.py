"""Covert communication over lossy bosonic channels: bounds, oracles and Monte Carlo."""
from .errors import (CovertPhotonError, CutoffMismatch, CutoffTooSmall, DegenerateMask,
                     DomainError, InvalidState, RejectionBudgetExceeded, SupportViolation)
from .fock import ChannelParams, DensityOperator, FockVector

__version__ = "0.1.0"
