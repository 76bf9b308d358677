"""Solvers and certifiers for optimal transport and Wasserstein barycenters
on finite (extended) metric measure spaces, with numerical checks of
Jensen-type entropy inequalities, barycentric curvature-dimension bounds,
and the geometric inequalities they imply.
"""

from .barycenter import (BarycenterSolution, MultiCoupling,
                         barycenter_from_mmot, barycenter_lp, mixture_variance,
                         mmot_cost, solve_mmot, superposition_check,
                         uniqueness_gap)
from .curvature import (CurvatureParams, bcd_certify, best_k,
                        cd_twopoint_certify, dimensional_jensen_certify,
                        wji_certify)
from .distortion import s_c_t, sigma, tau
from .errors import BarycdError
from .inequalities import (PointSet, barycenter_set, bm_check, bs_check,
                           bs_complete, bs_hypothesis_defect, log_bm_check)
from .measures import (DiscreteMeasure, Mixture, pushforward, relative_entropy,
                       renyi_entropy, u_n, variance)
from .reports import CertificationReport
from .sampling import SamplerConfig
from .space import (MetricMeasureSpace, WeightedPointSet, circle,
                    eps_approximation_defect, generate_space, graph_space,
                    grid1d, grid2d, midpoint_search, point_barycenter,
                    validate_space)
from .transport import Coupling, extract_monge, w2_entropic, w2_exact

__version__ = "0.1.0"

__all__ = [
    "BarycdError", "BarycenterSolution", "CertificationReport", "Coupling",
    "CurvatureParams", "DiscreteMeasure", "MetricMeasureSpace", "Mixture",
    "MultiCoupling", "PointSet", "SamplerConfig", "WeightedPointSet",
    "barycenter_from_mmot", "barycenter_lp", "barycenter_set", "bcd_certify",
    "best_k", "bm_check", "bs_check", "bs_complete", "bs_hypothesis_defect",
    "cd_twopoint_certify", "circle", "dimensional_jensen_certify",
    "eps_approximation_defect", "extract_monge", "generate_space",
    "graph_space", "grid1d", "grid2d", "log_bm_check", "midpoint_search",
    "mixture_variance", "mmot_cost", "point_barycenter", "pushforward",
    "relative_entropy", "renyi_entropy", "s_c_t", "sigma", "solve_mmot",
    "superposition_check", "tau", "u_n", "uniqueness_gap", "validate_space",
    "variance", "w2_entropic", "w2_exact", "wji_certify",
]
