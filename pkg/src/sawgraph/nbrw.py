"""Non-backtracking random walks and their link to self-avoiding walk counts.

On a d-regular graph every non-backtracking path of length k >= 1 from the
root has probability ``1 / (d (d-1)^(k-1))``, so the number of self-avoiding
walks of length k equals ``d (d-1)^(k-1) P[T > k]`` where T is the first
time the walk revisits a vertex. This module samples T, computes its law
exactly on small graphs, turns survival curves back into walk counts and
plug-in estimates of Z, L and I, and evolves the walk's exact distribution
on directed edges to measure mixing.

Random streams are keyed by ``(seed, block)`` through Philox; blocks have a
fixed size, so results do not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ._series import series_stats
from .exact import Method, SawMeasureEval, _check_x, gamma_exponent
from .exceptions import (
    BudgetExceeded,
    DegreeTooSmall,
    EmptyStats,
    EndpointOutOfRange,
    NotRegular,
    PreconditionViolated,
)
from .graph import Graph, girth, regular_degree

BLOCK_SIZE = 4096
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class DirectedEdge:
    tail: int
    head: int


def _require_regular(g: Graph):
    d = regular_degree(g)
    if d is None:
        raise NotRegular(f"{g.name or 'graph'} is not regular")
    if d < 3:
        raise DegreeTooSmall(f"non-backtracking walk needs degree >= 3, got {d}")
    return d


def _walk_arrays(g: Graph):
    """``nbr[v, i]`` is the i-th neighbour of v; ``back[v, i]`` is the slot of
    v in that neighbour's list, i.e. the reversal of directed edge (v, i)."""
    nbr = np.asarray(g.adjacency, dtype=np.int64)
    slot = {}
    for v, row in enumerate(g.adjacency):
        for i, w in enumerate(row):
            slot[v, w] = i
    back = np.array([[slot[w, v] for w in row] for v, row in enumerate(g.adjacency)],
                    dtype=np.int64)
    return nbr, back


def _root(g, root):
    root = g.root if root is None else root
    if not 0 <= root < g.n:
        raise EndpointOutOfRange(f"root {root} not in [0, {g.n})")
    return root


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of samples."""
    return np.random.Generator(np.random.Philox(key=(block << 64) | (seed & _MASK64)))


# ------------------------------------------------------------------ sampling


def sample_T(g: Graph, root: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> int:
    """Run one non-backtracking walk from ``root`` until it revisits a vertex."""
    _require_regular(g)
    root = _root(g, root)
    rng = np.random.default_rng() if rng is None else rng
    adj = g.adjacency
    seen = {root}
    prev, cur = -1, root
    k = 0
    while True:
        options = adj[cur] if prev < 0 else [w for w in adj[cur] if w != prev]
        nxt = options[int(rng.integers(len(options)))]
        k += 1
        if nxt in seen:
            return k
        seen.add(nxt)
        prev, cur = cur, nxt
        assert k <= g.n, "self-avoiding prefix longer than the vertex set"


def _simulate_block(nbr, back, root, n, size, seed, block):
    """Self-intersection times for ``size`` independent walks, vectorised."""
    rng = block_rng(seed, block)
    d = nbr.shape[1]
    T = np.zeros(size, dtype=np.int64)
    visited = np.zeros((size, n), dtype=bool)
    visited[:, root] = True
    idx = np.arange(size)
    cur = np.full(size, root, dtype=np.int64)
    r = rng.integers(0, d, size=size)
    k = 1
    while True:
        nxt = nbr[cur, r]
        came_from = back[cur, r]
        hit = visited[idx, nxt]
        T[idx[hit]] = k
        keep = ~hit
        idx, nxt, came_from = idx[keep], nxt[keep], came_from[keep]
        if idx.size == 0:
            return T
        visited[idx, nxt] = True
        cur = nxt
        k += 1
        # uniform over the d-1 slots other than the one leading back
        r = rng.integers(0, d - 1, size=idx.size)
        r += r >= came_from


def _block_task(args):
    nbr, back, root, n, size, seed, block = args
    T = _simulate_block(nbr, back, root, n, size, seed, block)
    return np.bincount(T, minlength=n + 1)


@dataclass(frozen=True)
class TSampleStats:
    """Monte-Carlo summary of the self-intersection time T.

    ``survival[k]`` estimates ``P[T > k]`` for ``k = 0..k_cap``. For direct
    sampling ``t_counts[t]`` is the number of samples with ``T = t``; the
    splitting estimator has no individual samples and instead keeps one
    survival curve per independent replicate.
    """

    graph_name: str
    n: int
    degree: int
    girth: float
    root: int
    seed: int
    num_samples: int
    survival: tuple
    stderr: tuple
    t_counts: Optional[tuple] = None
    method: str = "direct"
    replicate_survival: Optional[tuple] = None

    @property
    def k_cap(self) -> int:
        return len(self.survival) - 1

    @property
    def samples(self) -> np.ndarray:
        if self.t_counts is None:
            raise EmptyStats("splitting estimates carry no individual samples")
        return np.repeat(np.arange(len(self.t_counts)), self.t_counts)

    def mean_T(self) -> float:
        return float(sum(self.survival))  # E[T] = sum_k P[T > k]

    def rows(self):
        return [{"k": k, "survival": s, "stderr": e, "n_samples": self.num_samples,
                 "seed": self.seed} for k, (s, e) in enumerate(zip(self.survival, self.stderr))]


SURVIVAL_COLUMNS = ["k", "survival", "stderr", "n_samples", "seed"]


def estimate_survival(g: Graph, n_samples: int, seed: int, root: Optional[int] = None,
                      k_cap: Optional[int] = None, workers: int = 1) -> TSampleStats:
    """Sample T ``n_samples`` times and tabulate the empirical survival curve.

    Samples are drawn in blocks of :data:`BLOCK_SIZE` with per-block Philox
    streams, so the result is a function of ``(graph, root, n_samples,
    seed)`` alone.
    """
    d = _require_regular(g)
    root = _root(g, root)
    if n_samples < 1:
        raise EmptyStats("n_samples must be >= 1")
    n = g.n
    k_cap = n if k_cap is None else min(k_cap, n)
    nbr, back = _walk_arrays(g)
    tasks = []
    remaining, block = n_samples, 0
    while remaining > 0:
        size = min(BLOCK_SIZE, remaining)
        tasks.append((nbr, back, root, n, size, seed, block))
        remaining -= size
        block += 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            hists = list(pool.map(_block_task, tasks))
    else:
        hists = [_block_task(t) for t in tasks]
    counts = np.sum(hists, axis=0)
    g0 = girth(g)
    # T >= girth always: the revisit closes a cycle no longer than T
    assert counts[: min(int(g0), n + 1)].sum() == 0, "sampled T below the girth"
    greater = n_samples - np.cumsum(counts)  # number with T > k
    surv = greater[: k_cap + 1] / n_samples
    err = np.sqrt(surv * (1.0 - surv) / n_samples)
    return TSampleStats(g.name, n, d, g0, root, seed, n_samples,
                        tuple(surv.tolist()), tuple(err.tolist()),
                        tuple(int(c) for c in counts))


def estimate_survival_splitting(g: Graph, population: int, seed: int, root: Optional[int] = None,
                                replicates: int = 8) -> TSampleStats:
    """Estimate ``P[T > k]`` deep into the tail by population splitting.

    A population of walks advances one step at a time; walks that revisit a
    vertex are removed and replaced by copies of uniformly chosen survivors.
    The product of per-step survival fractions is an unbiased estimate of
    ``P[T > k]`` even where direct sampling would see no survivors. Errors
    come from the spread over independent replicates.
    """
    d = _require_regular(g)
    root = _root(g, root)
    if population < 2 or replicates < 2:
        raise EmptyStats("need population >= 2 and replicates >= 2")
    n = g.n
    nbr, back = _walk_arrays(g)
    curves = []
    for rep in range(replicates):
        rng = block_rng(seed, 1 << 40 | rep)
        log_surv = np.full(n + 1, -np.inf)
        log_surv[0] = 0.0
        visited = np.zeros((population, n), dtype=bool)
        visited[:, root] = True
        cur = np.full(population, root, dtype=np.int64)
        came = np.full(population, -1, dtype=np.int64)
        rows = np.arange(population)
        level = 0.0
        for k in range(1, n + 1):
            if k == 1:
                r = rng.integers(0, d, size=population)
            else:
                r = rng.integers(0, d - 1, size=population)
                r += r >= came
            nxt = nbr[cur, r]
            came = back[cur, r]
            alive = ~visited[rows, nxt]
            n_alive = int(alive.sum())
            if n_alive == 0:
                break
            level += math.log(n_alive / population)
            log_surv[k] = level
            cur = nxt
            visited[rows[alive], nxt[alive]] = True
            dead = np.flatnonzero(~alive)
            if dead.size:
                donors = rng.choice(np.flatnonzero(alive), size=dead.size)
                visited[dead] = visited[donors]
                cur[dead] = cur[donors]
                came[dead] = came[donors]
        curves.append(np.exp(log_surv))
    curves = np.array(curves)
    surv = curves.mean(axis=0)
    err = curves.std(axis=0, ddof=1) / math.sqrt(replicates)
    return TSampleStats(g.name, n, d, girth(g), root, seed, population * replicates,
                        tuple(surv.tolist()), tuple(err.tolist()), None, "splitting",
                        tuple(tuple(c.tolist()) for c in curves))


# ------------------------------------------------------------- exact law of T


@dataclass(frozen=True)
class ExactTDistribution:
    """Exact ``P[T > k]`` for ``k = 0..n`` as fractions."""

    degree: int
    survival: tuple
    hits: tuple  # hits[k] = number of NB paths of length k whose first revisit is at step k

    def mean_T(self) -> Fraction:
        return sum(self.survival, Fraction(0))

    def moment(self, f) -> Fraction:
        """``E[f(T)]`` from the point masses ``P[T = k]``."""
        out = Fraction(0)
        for k in range(1, len(self.survival)):
            p = self.survival[k - 1] - self.survival[k]
            if p:
                out += p * f(k)
        return out


def exact_T_distribution(g: Graph, root: Optional[int] = None,
                         budget: int = 10**8) -> ExactTDistribution:
    """Law of T by enumerating every non-backtracking path until it closes.

    Counts only first-revisit events; walk counts never enter, so the result
    is an independent check of the walk-count/survival relation.
    """
    d = _require_regular(g)
    root = _root(g, root)
    adj = g.adjacency
    n = g.n
    hits = [0] * (n + 2)
    stack = [(root, -1, 1 << root, 0)]
    nodes = 0
    while stack:
        v, prev, mask, k = stack.pop()
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"NB path enumeration exceeded budget of {budget}", nodes=nodes)
        for w in adj[v]:
            if w == prev:
                continue
            if (mask >> w) & 1:
                hits[k + 1] += 1
            else:
                stack.append((w, v, mask | (1 << w), k + 1))
    surv = [Fraction(1)]
    acc = Fraction(0)
    for k in range(1, n + 1):
        acc += Fraction(hits[k], d * (d - 1) ** (k - 1))
        surv.append(1 - acc)
    return ExactTDistribution(d, tuple(surv), tuple(hits[: n + 1]))


# -------------------------------------------------- survival -> walk counts


@dataclass(frozen=True)
class EstimatedCensus:
    """Walk-count estimates in log-space with a normal-approximation band."""

    log_counts: tuple
    log_lo: tuple
    log_hi: tuple
    convention: str = "exact"

    @property
    def counts(self):
        return [math.exp(c) for c in self.log_counts]


def census_from_survival(stats, d: Optional[int] = None, convention: str = "exact",
                         z: float = 1.96) -> EstimatedCensus:
    """``c_k = d (d-1)^(k-1) P[T > k]`` for ``k >= 1``.

    ``c_0`` is 1 under ``convention="exact"``; ``"paper"`` applies the same
    formula at ``k = 0`` as well, giving ``d / (d - 1)``.
    """
    d = stats.degree if d is None else d
    surv = np.asarray(stats.survival, dtype=float)
    err = np.asarray(getattr(stats, "stderr", np.zeros_like(surv)), dtype=float)
    k = np.arange(surv.size, dtype=float)
    with np.errstate(divide="ignore"):
        base = math.log(d) + (k - 1) * math.log(d - 1)
        lc = base + np.log(surv)
        lo = base + np.log(np.clip(surv - z * err, 0.0, None))
        hi = base + np.log(np.clip(surv + z * err, 0.0, None))
    if convention == "exact":
        lc[0] = lo[0] = hi[0] = 0.0
    elif convention != "paper":
        raise PreconditionViolated(f"unknown convention {convention!r}")
    return EstimatedCensus(tuple(lc.tolist()), tuple(lo.tolist()), tuple(hi.tolist()), convention)


# ------------------------------------------------------- plug-in estimators


@dataclass(frozen=True)
class MonteCarloEval(SawMeasureEval):
    convention: str = "exact"
    logZ_stderr: Optional[float] = None
    L_ci: Optional[tuple] = None
    logZ_ci: Optional[tuple] = None

    def as_row(self):
        row = super().as_row()
        row.update(convention=self.convention, logZ_stderr=self.logZ_stderr,
                   L_ci_lo=self.L_ci[0] if self.L_ci else None,
                   L_ci_hi=self.L_ci[1] if self.L_ci else None)
        return row


MC_EVAL_COLUMNS = ["x", "Z_log", "L", "I", "gamma", "method", "convention",
                   "Z_stderr", "logZ_stderr", "L_stderr", "L_ci_lo", "L_ci_hi"]


def _partial_sums(y, t_max):
    """``logA[t] = log sum_{k<t} y^k`` and ``logB[t] = log sum_{k<t} k y^k``."""
    k = np.arange(t_max + 1, dtype=float)
    ly = math.log(y)
    with np.errstate(divide="ignore"):
        la = np.concatenate(([-np.inf], np.logaddexp.accumulate(k[:-1] * ly)))
        lb = np.concatenate(([-np.inf], np.logaddexp.accumulate(np.log(k[:-1]) + k[:-1] * ly)))
    return la, lb


def _plugin(t_vals, weights, y, d, convention):
    """Z, L and delta-method errors from a weighted multiset of T values.

    Per sample ``a(T) = sum_{k<T} y^k`` (``(y^T - 1)/(y - 1)``, or ``T`` at
    ``y = 1``) and ``b(T) = sum_{k<T} k y^k``; then ``Z = d/(d-1) E[a(T)]``
    and ``L = d/(d-1) E[b(T)] / Z``. The exact convention drops the ``k = 0``
    term ``d/(d-1)`` and adds back the empty walk's weight 1.
    """
    c = d / (d - 1)
    la, lb = _partial_sums(y, int(t_vals.max()))
    log_a, log_b = la[t_vals], lb[t_vals]
    if convention == "exact":
        log_a = _log_minus_one(log_a)
    elif convention != "paper":
        raise PreconditionViolated(f"unknown convention {convention!r}")
    top = max(float(log_a.max()), 0.0)
    a = np.exp(log_a - top)
    b = np.exp(log_b - top)
    w = weights / weights.sum()
    N = weights.sum()
    empty = math.exp(-top) if convention == "exact" else 0.0
    Zs = empty + c * float(np.dot(w, a))
    L = c * float(np.dot(w, b)) / Zs
    log_Z = top + math.log(Zs)

    def _se(vals):
        mean = float(np.dot(w, vals))
        var = float(np.dot(w, (vals - mean) ** 2)) * N / max(N - 1, 1)
        return math.sqrt(var / N)

    logZ_se = c * _se(a) / Zs
    L_se = _se(c * (b - L * a) / Zs)
    return log_Z, L, logZ_se, L_se


def _log_minus_one(log_a):
    """``log(exp(log_a) - 1)`` elementwise, for ``log_a >= 0``."""
    out = np.full_like(log_a, -np.inf)
    pos = log_a > 0
    la = log_a[pos]
    out[pos] = la + np.log(-np.expm1(-la))
    return out


def estimate_measure_from_stats(stats: TSampleStats, x: float, convention: str = "exact",
                                transitive: bool = False, n_boot: int = 0,
                                boot_seed: int = 0) -> MonteCarloEval:
    """Plug-in estimates of Z, L (and I on transitive graphs) at ``x``.

    ``convention="exact"`` targets the definitions with the empty walk
    counted once; ``"paper"`` reproduces the closed forms with the
    ``d/(d-1)`` weight at ``k = 0``. ``n_boot > 0`` adds percentile
    bootstrap intervals from resampled T-multisets.
    """
    x = _check_x(x)
    d = stats.degree
    y = (d - 1) * x
    if stats.method == "direct":
        counts = np.asarray(stats.t_counts, dtype=float)
        t_vals = np.flatnonzero(counts)
        weights = counts[t_vals]
        log_Z, L, logZ_se, L_se = _plugin(t_vals, weights, y, d, convention)
        L_ci = logZ_ci = None
        if n_boot:
            rng = np.random.default_rng(boot_seed)
            p = weights / weights.sum()
            boots = []
            for resampled in rng.multinomial(int(weights.sum()), p, size=n_boot):
                keep = resampled > 0
                boots.append(_plugin(t_vals[keep], resampled[keep].astype(float), y, d,
                                     convention)[:2])
            boots = np.array(boots)
            logZ_ci = tuple(np.quantile(boots[:, 0], [0.025, 0.975]).tolist())
            L_ci = tuple(np.quantile(boots[:, 1], [0.025, 0.975]).tolist())
        else:
            L_ci = (L - 1.96 * L_se, L + 1.96 * L_se)
            logZ_ci = (log_Z - 1.96 * logZ_se, log_Z + 1.96 * logZ_se)
    else:
        per_rep = []
        for curve in stats.replicate_survival:
            est = census_from_survival(_Curve(curve, d), d, convention)
            per_rep.append(series_stats(est.log_counts, x))
        log_Z, L = series_stats(census_from_survival(stats, d, convention).log_counts, x)
        per_rep = np.array(per_rep)
        R = len(per_rep)
        logZ_se = float(per_rep[:, 0].std(ddof=1)) / math.sqrt(R)
        L_se = float(per_rep[:, 1].std(ddof=1)) / math.sqrt(R)
        L_ci = (L - 1.96 * L_se, L + 1.96 * L_se)
        logZ_ci = (log_Z - 1.96 * logZ_se, log_Z + 1.96 * logZ_se)
    Z_se = math.exp(log_Z) * logZ_se if log_Z < 700 else math.inf
    I = math.exp(math.log1p(L) - log_Z) if transitive else None
    return MonteCarloEval(x, log_Z, L, I, gamma_exponent(log_Z, L), Method.MONTE_CARLO,
                          Z_se, L_se, convention, logZ_se, L_ci, logZ_ci)


@dataclass(frozen=True)
class _Curve:
    survival: tuple
    degree: int


def estimate_measure(g: Graph, x: float, n_samples: int, seed: int, root: Optional[int] = None,
                     convention: str = "exact", assume_transitive: bool = False,
                     workers: int = 1, n_boot: int = 0) -> MonteCarloEval:
    stats = estimate_survival(g, n_samples, seed, root=root, workers=workers)
    return estimate_measure_from_stats(stats, x, convention, assume_transitive, n_boot, seed)


# -------------------------------------------------------- chain evolution


def directed_edges(g: Graph):
    """Directed edges ``(v -> adjacency[v][i])`` indexed ``v * d + i``."""
    return [DirectedEdge(v, w) for v, row in enumerate(g.adjacency) for w in row]


def nbrw_operator(g: Graph) -> sp.csr_matrix:
    """Row-stochastic transition matrix of the walk on directed edges."""
    d = _require_regular(g)
    nbr, back = _walk_arrays(g)
    n = g.n
    rows, cols = [], []
    for v in range(n):
        for i in range(d):
            w = nbr[v, i]
            e = v * d + i
            skip = back[v, i]
            for j in range(d):
                if j != skip:
                    rows.append(e)
                    cols.append(w * d + j)
    data = np.full(len(rows), 1.0 / (d - 1))
    return sp.csr_matrix((data, (rows, cols)), shape=(n * d, n * d))


def _head_matrix(g: Graph, d: int) -> sp.csr_matrix:
    heads = np.asarray(g.adjacency, dtype=np.int64).ravel()
    m = heads.size
    return sp.csr_matrix((np.ones(m), (np.arange(m), heads)), shape=(m, g.n))


@dataclass(frozen=True)
class ChainDistribution:
    t: int
    probs: np.ndarray  # over directed edges, index v * d + i
    start: int
    marginal: np.ndarray  # over vertices: mass on edges whose head is v


def _initial(g, d, starts):
    """Distribution after the first step: uniform over each start's out-edges."""
    D = np.zeros((len(starts), g.n * d))
    for r, s in enumerate(starts):
        D[r, s * d:(s + 1) * d] = 1.0 / d
    return D


def transition_distribution(g: Graph, start: int, t: int) -> ChainDistribution:
    """Exact law of the walk at time ``t >= 1`` started from vertex ``start``."""
    d = _require_regular(g)
    if t < 1:
        raise PreconditionViolated("t must be >= 1")
    if not 0 <= start < g.n:
        raise EndpointOutOfRange(f"start {start} not in [0, {g.n})")
    MT = nbrw_operator(g).T.tocsr()
    p = _initial(g, d, [start])[0]
    for _ in range(t - 1):
        p = MT @ p
    marg = _head_matrix(g, d).T @ p
    return ChainDistribution(t, p, start, marg)


@dataclass(frozen=True)
class MixingReport:
    tau: Optional[int]  # None: criterion not met within the horizon
    max_dev: tuple  # max_dev[t-1] for t = 1..(tau or horizon)
    horizon: int

    def rows(self):
        return [{"t": t, "max_dev": dev} for t, dev in enumerate(self.max_dev, start=1)]


def mixing_time(g: Graph, horizon: int, starts=None) -> MixingReport:
    """Smallest ``t <= horizon`` with ``max_{u,v} |P_u[NB(t) = v] - 1/n| <= 1/(2n)``.

    ``starts`` restricts the maximum over u (e.g. to the root alone on a
    vertex-transitive graph); by default every vertex is a start.
    """
    d = _require_regular(g)
    n = g.n
    starts = list(range(n)) if starts is None else list(starts)
    if horizon < 1:
        return MixingReport(None, (), horizon)
    MT = nbrw_operator(g).T.tocsr()
    H = _head_matrix(g, d).T.tocsr()
    D = _initial(g, d, starts).T  # columns are distributions
    devs = []
    threshold = 1.0 / (2 * n)
    for t in range(1, horizon + 1):
        if t > 1:
            D = MT @ D
        dev = float(np.abs(H @ D - 1.0 / n).max())
        devs.append(dev)
        if dev <= threshold:
            return MixingReport(t, tuple(devs), horizon)
    return MixingReport(None, tuple(devs), horizon)


def large_girth_ratio(tau: int, g: int, d: int) -> float:
    """``tau / (d-1)^(g/4)``; small values support the large-girth hypothesis."""
    return tau / (d - 1) ** (g / 4)


def ratios_decreasing(ratios) -> bool:
    """True when a sequence of large-girth ratios decreases strictly with size."""
    ratios = list(ratios)
    return len(ratios) >= 2 and all(b < a for a, b in zip(ratios, ratios[1:]))
