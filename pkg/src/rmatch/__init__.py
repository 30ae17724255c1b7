"""Rainbow and perfect matchings in uniform hypergraph families."""

from .constructions import (Family, ParameterRangeWarning, ThresholdSpec, complete_partite,
                            extremal_family, lift_family, make_Hk, make_Hk_star, main_threshold,
                            project, sample_threshold_family, script_H, script_H_star)
from .core import (ClosenessParams, Hypergraph, InputError, Matching, MatchStatus, PartiteGraph,
                   bad_vertices, check_matching, closeness_search, degree, induced, is_eps_close,
                   is_matching, is_stable, link, min_degree, remove_vertices)
from .exact import (SolveResult, Status, has_perfect_matching, max_matching, nu,
                    rainbow_equiv_check, rainbow_matching)
from .lp import (LPOutcome, WeightVector, augment_by_cover, check_augmented_stable,
                 duality_check, fractional_cover, fractional_matching, fractional_pm_exists)
from .pipeline import PipelineConfig, solve, solve_close, solve_far

__version__ = "0.1.0"
