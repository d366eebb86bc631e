"""Cauchy-integral solution operators for the d-bar equation on product domains.

The (0,1) solution on D1 x D2 is u = T1 f1 + T2 S1 f2, built from boundary
Cauchy integrals S_j and solid Cauchy transforms T_j acting in one variable
at a time.  The package also measures sampled Hoelder norms and reproduces
two counterexamples about the regularity of these operators.
"""

__version__ = "0.1.0"

from .cauchy import (DEFAULT_CONFIG, NearBoundaryError, QuadratureConfig, apply_chain,
                     boundary_cauchy, boundary_operator, compose_TS, solid_cauchy,
                     solid_operator, t_one)
from .experiments import (KerzmanDatum, TrendReport, TumanovDatum, kerzman_form, kerzman_scan,
                          mcshane_extend, norm_ratio_study, tumanov_blowup_scan, tumanov_h_tilde)
from .fields import FieldFunction, coordinate, constant, dbar, dz, multi_index, wirtinger
from .geometry import (BoundaryCurve, EmptyGridError, GeometryError, PlanarDomain, ProductDomain,
                       annulus, arclength_reparametrize, circle, contains, curve_from_function,
                       curve_from_nodes, disc, ellipse, interior_grid, polydisc, product_grid,
                       smoothed_square, winding_number)
from .holder import (HolderReport, PairSet, ck_alpha_norm, default_pairs, directional_seminorm,
                     dyadic_pairs, grid_pairs, holder_seminorm)
from .quadtree import QuadratureBudgetError
from .solver import (FORMS, ClosednessError, Form01, Form01Tri, Form02, check_closed, get_form,
                     solution_01, solution_01_tridisc, solution_02, solve_01, solve_01_tridisc,
                     solve_02, solve_pq)
from .verify import (IdentityReport, dbar_residual, holomorphy_check, pompeiu_check,
                     prop31_identity)
