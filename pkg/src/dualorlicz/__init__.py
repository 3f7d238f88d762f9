"""Dual Orlicz-Brunn-Minkowski toolkit for star bodies.

Star bodies are radial oracles on the unit sphere; integrals are weighted
node sums on spherical quadrature rules.  The submodules cover geometry
(:mod:`.geometry`), Orlicz functions and sums (:mod:`.orlicz`), quadrature and
mixed volumes (:mod:`.integrate`), inequality checks (:mod:`.inequalities`),
radial M-addition (:mod:`.madd`) and the command line (:mod:`.cli`).
"""

from .exceptions import (
    ConstructionError,
    DimensionError,
    DivergenceError,
    DomainError,
    DualOrliczError,
    HypothesisError,
)
from .geometry import (
    ConvexBodySupport,
    LinearMap,
    StarBody,
    ball_support,
    ellipsoid,
    ellipsoid_support,
    linear_image,
    make_ball,
    make_fourier_star,
    polar_star_body,
    pth_radial_combination,
    radial_metric,
    restrict_to_coordinate_subspace,
    scale,
)
from .inequalities import (
    IneqReport,
    VariationReport,
    check_dual_log_bm,
    check_dual_log_minkowski,
    check_dual_orlicz_bm,
    check_dual_orlicz_minkowski,
    check_polar_log,
    dilatate_test,
    first_variation_volume,
)
from .integrate import (
    SphericalRule,
    build_rule,
    dual_cone_integral,
    dual_orlicz_mixed_volume,
    dual_p_mixed_volume,
    intersection_body_radial,
    parse_rule,
    volume,
)
from .madd import MSet, check_sublinearity_counterexample, lp_curve_mset, m_set_from_phi, radial_m_sum, support_conv
from .orlicz import (
    DiscreteStarMeasure,
    OrliczFunction,
    check_associativity,
    log_combination,
    orlicz_combination_measure,
    orlicz_linear_combination,
    orlicz_sum,
    parse_phi,
    solve_level,
)

__version__ = "0.1.0"
