"""syzlab: exact Koszul cohomology and syzygy projection on rational surfaces.

Computes graded Betti numbers dim K_{p,q} of truncated section-ring
modules over GF(p), decides the Green-Lazarsfeld vanishing property
(M_k), and implements projection of syzygies from a point, with a CLI
scenario runner for the desk-scale case studies.
"""

__version__ = "0.1.0"

from .ff_linalg import (Prime, PrimeFieldMatrix, VectorSpaceBasis, in_span,
                        kernel_basis, random_prime, rank)
from .multilinear import (DivisorClass, SurfaceModel, monomial_basis,
                          wedge_insert, wedge_rank, wedge_unrank)
from .graded_modules import (BranchExpansion, CurveModel, GradedModule,
                             PointOnCurve, build_ambient_module,
                             build_blowup_module, build_point_truncated_module,
                             build_restriction_module, evaluation_split,
                             find_rational_points, local_branch_expansion,
                             truncate_at_points)
from .koszul import (BettiTable, KoszulCell, MkVerdict, assemble_differential,
                     betti_table, check_Mk, duality_instance_check, euler_check,
                     koszul_dimension)

__all__ = [name for name in dir() if not name.startswith("_")]
