"""Exact Schrodinger solutions from free Hamilton-Jacobi actions with Bohm-potential cancellation."""

__version__ = "0.1.0"

from .core import Grid1D, Units, make_grid  # noqa: E402
from .actions import FreeAction  # noqa: E402
from .potentials import FAMILY_TAGS, PotentialFamily, catalog, family  # noqa: E402
from .amplitudes import assemble_state, make_profile  # noqa: E402

__all__ = [
    "__version__", "Grid1D", "Units", "make_grid", "FreeAction", "FAMILY_TAGS",
    "PotentialFamily", "catalog", "family", "assemble_state", "make_profile",
]
