"""Linearizers (Poincaré functions) of polynomials, their order of growth,
area-property sums and pushforwards of quadratic differentials."""
from .core import Polynomial, PowerSeries, poly_eval, poly_roots, roots_batch
from .dynamics import critical_orbit_analysis, fixed_points, poincare_series, preimage_tree
from .errors import LineaError
from .linearizer import (PoincareMap, injectivity_radius, koenigs_coeffs, lin_eval, order_empirical,
                         order_exact, preimages_in_annuli, schwarzian_order)
from .parsing import parse_poly

__version__ = "0.1.0"
