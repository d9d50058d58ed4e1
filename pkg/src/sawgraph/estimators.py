"""scikit-learn style wrappers: fit on a graph, transform x values into
``[log Z, L, I, gamma]`` rows."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph, check_x_values
from .exact import enumerate_census, evaluate, intersection_prob_bruteforce, pair_census
from .exceptions import BudgetExceeded
from .graph import is_vertex_transitive
from .nbrw import estimate_measure_from_stats, estimate_survival, estimate_survival_splitting

FEATURES = np.array(["log_Z", "L", "I", "gamma"], dtype=object)


def _row(ev):
    nan = math.nan
    return [ev.log_Z, ev.L, nan if ev.I is None else ev.I, nan if ev.gamma is None else ev.gamma]


class ExactSAW(TransformerMixin, BaseEstimator):
    """Exact walk census of a graph; ``transform`` evaluates it at each x.

    ``intersection`` picks how I is obtained: ``"auto"`` uses the identity
    ``I = (L+1)/Z`` on transitive graphs and brute-force pair counting
    otherwise, ``"pairs"`` always counts pairs, ``"none"`` leaves it NaN.
    """

    def __init__(self, root=None, k_max=None, budget=10**9, workers=1,
                 assume_transitive=False, intersection="auto"):
        self.root = root
        self.k_max = k_max
        self.budget = budget
        self.workers = workers
        self.assume_transitive = assume_transitive
        self.intersection = intersection

    def fit(self, X, y=None):
        g = check_graph(X)
        self.graph_ = g
        self.census_ = enumerate_census(g, root=self.root, k_max=self.k_max,
                                        budget=self.budget, workers=self.workers)
        self.transitive_ = bool(self.assume_transitive or is_vertex_transitive(g))
        self.pairs_ = None
        if self.intersection == "pairs" or (self.intersection == "auto" and not self.transitive_):
            try:
                self.pairs_ = pair_census(g, root=self.root, budget=self.budget)
            except BudgetExceeded:
                self.pairs_ = None
        return self

    def transform(self, X):
        check_is_fitted(self, "census_")
        out = []
        for x in check_x_values(X):
            I = None
            if self.pairs_ is not None:
                I = intersection_prob_bruteforce(self.graph_, x, root=self.root,
                                                 census=self.census_, pairs=self.pairs_)
            transitive = self.transitive_ and self.intersection == "auto"
            out.append(_row(evaluate(self.census_, x, transitive=transitive, I=I)))
        return np.array(out, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return FEATURES.copy()


class NBRWSAW(TransformerMixin, BaseEstimator):
    """Monte-Carlo estimates from sampled self-intersection times.

    ``method="direct"`` samples ``n_samples`` walks; ``"splitting"`` runs
    ``replicates`` populations of ``n_samples // replicates`` walks, which
    reaches the deep tail needed above criticality.
    """

    def __init__(self, n_samples=100_000, seed=1, convention="exact", workers=1,
                 assume_transitive=False, method="direct", replicates=8, root=None):
        self.n_samples = n_samples
        self.seed = seed
        self.convention = convention
        self.workers = workers
        self.assume_transitive = assume_transitive
        self.method = method
        self.replicates = replicates
        self.root = root

    def fit(self, X, y=None):
        g = check_graph(X)
        self.graph_ = g
        if self.method == "splitting":
            self.stats_ = estimate_survival_splitting(
                g, max(2, self.n_samples // self.replicates), self.seed, root=self.root,
                replicates=self.replicates)
        else:
            self.stats_ = estimate_survival(g, self.n_samples, self.seed, root=self.root,
                                            workers=self.workers)
        return self

    def transform(self, X):
        check_is_fitted(self, "stats_")
        return np.array([
            _row(estimate_measure_from_stats(self.stats_, x, self.convention, self.assume_transitive))
            for x in check_x_values(X)], dtype=float)

    def evaluate(self, x):
        """Full :class:`MonteCarloEval` (with errors) at a single x."""
        check_is_fitted(self, "stats_")
        return estimate_measure_from_stats(self.stats_, float(x), self.convention,
                                           self.assume_transitive)

    def get_feature_names_out(self, input_features=None):
        return FEATURES.copy()
