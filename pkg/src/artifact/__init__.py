"""Rank-one p-adic differential equations over Lubin-Tate towers.

The package is split by layer:

* ``padic_core``: finite-precision arithmetic in Z_p and in the totally
  ramified rings Z_p[pi_s] of a Lubin-Tate torsion tower;
* ``witt``: p-typical Witt vectors, ghost maps and co-monomial blocks;
* ``lubin_tate``: formal group laws, endomorphism brackets and torsion;
* ``padic_series``: Artin-Hasse and pi-exponentials with growth fits;
* ``solvability``: the solvability test, irregularity and class keys;
* ``cli``: the JSON command line front end.
"""

from .errors import ArtifactError, NotIntegral, ValidationError
from .laurent import LaurentSeries
from .padic_core import ExtElement, PrecisionBudget, base_ring, make_tower, pi_at
from .witt import WittVector, decompose, ghost, unghost
from .solvability import RankOneOperator, analyse, classify, irregularity

__all__ = [
    "ArtifactError",
    "ExtElement",
    "LaurentSeries",
    "NotIntegral",
    "PrecisionBudget",
    "RankOneOperator",
    "ValidationError",
    "WittVector",
    "analyse",
    "base_ring",
    "classify",
    "decompose",
    "ghost",
    "irregularity",
    "make_tower",
    "pi_at",
    "unghost",
]

__version__ = "0.1.0"
