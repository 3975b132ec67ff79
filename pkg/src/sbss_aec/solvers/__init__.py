"""Per-bin extraction-filter solvers."""

from .eiss import eiss_apply, eiss_coeff, eiss_sweep, eiss_update
from .ip import ip_update, ip_update_regularized, normalize

__all__ = [
    "eiss_apply",
    "eiss_coeff",
    "eiss_sweep",
    "eiss_update",
    "ip_update",
    "ip_update_regularized",
    "normalize",
]
