"""Self-avoiding walk statistics on finite graphs.

Exact enumeration, Monte-Carlo estimation through non-backtracking walks,
closed forms on the complete graph and large-girth predictions.
"""

__version__ = "0.1.0"

from .exact import (Method, SawCensus, SawMeasureEval, critical_scan, enumerate_census,  # noqa: E402
                    evaluate, intersection_prob_bruteforce, monotonicity_scan,
                    verify_intersection_identity)
from .graph import (Graph, build_graph, complete, cycle, generate, girth, hypercube,  # noqa: E402
                    is_vertex_transitive, path, petersen, random_regular, torus)
from .io import load_graph, save_graph  # noqa: E402
from .meanfield import (critical_constant, evaluate_complete, gamma_mf_prediction,  # noqa: E402
                        poisson_tail_bound, saw_count_complete, supercritical_envelope)
from .nbrw import (TSampleStats, estimate_measure, estimate_survival,  # noqa: E402
                   exact_T_distribution, mixing_time, transition_distribution)
from .predictions import (BoundReport, critical_L_bounds, gamma_prediction_large_girth,  # noqa: E402
                          subcritical_L_bounds, supercritical_L_floor, survival_floor)

__all__ = [
    "Graph", "build_graph", "complete", "cycle", "generate", "girth", "hypercube",
    "is_vertex_transitive", "path", "petersen", "random_regular", "torus",
    "load_graph", "save_graph",
    "Method", "SawCensus", "SawMeasureEval", "critical_scan", "enumerate_census", "evaluate",
    "intersection_prob_bruteforce", "monotonicity_scan", "verify_intersection_identity",
    "TSampleStats", "estimate_measure", "estimate_survival", "exact_T_distribution",
    "mixing_time", "transition_distribution",
    "critical_constant", "evaluate_complete", "gamma_mf_prediction", "poisson_tail_bound",
    "saw_count_complete", "supercritical_envelope",
    "BoundReport", "critical_L_bounds", "gamma_prediction_large_girth", "subcritical_L_bounds",
    "supercritical_L_floor", "survival_floor",
    "ExactSAW", "NBRWSAW",
]


def __getattr__(name):
    # the scikit-learn wrappers import sklearn lazily
    if name in ("ExactSAW", "NBRWSAW"):
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(name)
