"""Exact self-avoiding-walk census and the Gibbs-measure quantities Z, L, I, gamma.

Walk counts are exact Python integers gathered by depth-first search with a
bitmask visited set. Evaluation at a fugacity ``x`` happens in log-space.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from ._series import log_int, series_stats
from .exceptions import (
    BudgetExceeded,
    EndpointOutOfRange,
    InvalidCensus,
    NotTransitive,
    PreconditionViolated,
)
from .graph import Graph, generate, is_vertex_transitive
from .io import format_table, parse_table

DEFAULT_BUDGET = 10**9


class Method(str, enum.Enum):
    EXACT = "exact"
    TRANSITIVE_IDENTITY = "transitive-identity"
    MONTE_CARLO = "monte-carlo"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SawCensus:
    """Counts ``counts[k] = |SAW_k(root, G)|`` for ``k = 0..k_max``."""

    graph_name: str
    root: int
    counts: tuple
    k_max: int
    valid: bool = True
    nodes: int = field(default=0, compare=False)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def log_counts(self):
        return [log_int(c) for c in self.counts]

    def check(self):
        """Raise :class:`InvalidCensus` if a structural invariant fails."""
        if not self.valid:
            raise InvalidCensus("census was aborted before completion")
        if len(self.counts) != self.k_max + 1:
            raise InvalidCensus("counts length does not match k_max")
        if self.counts[0] != 1:
            raise InvalidCensus("c_0 must be 1")
        seen_zero = False
        for c in self.counts:
            if c < 0:
                raise InvalidCensus("negative count")
            if seen_zero and c:
                raise InvalidCensus("count resumes after a zero")
            seen_zero = seen_zero or c == 0


@dataclass(frozen=True)
class SawMeasureEval:
    """Z, L, I and gamma at one fugacity ``x``.

    ``I`` is ``None`` when it was not computed (non-transitive graph without a
    pair enumeration); ``gamma`` is ``None`` when ``L == 0``.
    """

    x: float
    log_Z: float
    L: float
    I: Optional[float]
    gamma: Optional[float]
    method: Method = Method.EXACT
    Z_stderr: Optional[float] = None
    L_stderr: Optional[float] = None

    @property
    def Z(self) -> float:
        return math.exp(self.log_Z) if self.log_Z < 709 else math.inf

    def as_row(self) -> dict:
        row = {"x": self.x, "Z_log": self.log_Z, "L": self.L, "I": self.I,
               "gamma": self.gamma, "method": str(self.method)}
        if self.Z_stderr is not None:
            row["Z_stderr"] = self.Z_stderr
            row["L_stderr"] = self.L_stderr
        return row


EVAL_COLUMNS = ["x", "Z_log", "L", "I", "gamma", "method"]


def gamma_exponent(log_Z: float, L: float) -> Optional[float]:
    """Finite-graph exponent ``log Z / log(L + 1)``; ``None`` when ``L == 0``."""
    denom = math.log1p(L)
    if denom <= 0.0:
        return None
    return log_Z / denom


# ------------------------------------------------------------------ census


def _dfs_counts(adj, start, mask, depth, k_max, budget):
    """Count self-avoiding extensions of a walk ending at ``start``.

    Returns ``(counts, nodes, complete)``; counts are indexed by absolute
    length. Neighbours are expanded in ascending order.
    """
    counts = [0] * (k_max + 1)
    stack = [(start, mask, depth)]
    nodes = 0
    while stack:
        v, m, k = stack.pop()
        nodes += 1
        if nodes > budget:
            return counts, nodes - 1, False
        counts[k] += 1
        if k < k_max:
            for w in reversed(adj[v]):
                if not (m >> w) & 1:
                    stack.append((w, m | (1 << w), k + 1))
    return counts, nodes, True


def _subtree_task(args):
    return _dfs_counts(*args)


def enumerate_census(g: Graph, root: Optional[int] = None, k_max: Optional[int] = None,
                     budget: int = DEFAULT_BUDGET, workers: int = 1) -> SawCensus:
    """Exact census of self-avoiding walks from ``root`` up to length ``k_max``.

    With ``workers > 1`` the subtrees below the root's neighbours run in
    separate processes; their counts are summed, so the result does not
    depend on scheduling. Raises :class:`BudgetExceeded` (carrying the
    partial census) once more than ``budget`` walks have been visited.
    """
    root = g.root if root is None else root
    if not 0 <= root < g.n:
        raise EndpointOutOfRange(f"root {root} not in [0, {g.n})")
    k_max = g.n - 1 if k_max is None else k_max
    if not 0 <= k_max <= g.n - 1:
        raise PreconditionViolated(f"k_max must lie in [0, {g.n - 1}]")
    adj = g.adjacency

    if workers > 1 and k_max >= 1 and len(adj[root]) > 1:
        tasks = [(adj, w, (1 << root) | (1 << w), 1, k_max, budget) for w in adj[root]]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_subtree_task, tasks))
        counts = [0] * (k_max + 1)
        counts[0] = 1
        nodes = 1
        complete = True
        for part, used, ok in parts:
            nodes += used
            complete = complete and ok
            for k, c in enumerate(part):
                counts[k] += c
        complete = complete and nodes <= budget
    else:
        counts, nodes, complete = _dfs_counts(adj, root, 1 << root, 0, k_max, budget)

    census = SawCensus(g.name, root, tuple(counts), k_max, complete, nodes)
    if not complete:
        raise BudgetExceeded(f"census exceeded budget of {budget} DFS nodes",
                             partial=census, nodes=nodes)
    return census


def _check_x(x):
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise PreconditionViolated(f"fugacity must be positive and finite, got {x}")
    return x


def evaluate(census: SawCensus, x: float, transitive: bool = False,
             I: Optional[float] = None) -> SawMeasureEval:
    """Evaluate Z, L and gamma at ``x`` from an exact census.

    With ``transitive=True`` the trivial-intersection probability is filled
    in as ``(L + 1) / Z``; that identity holds only on vertex-transitive
    graphs, so callers must establish transitivity themselves. An ``I``
    computed some other way can be passed through instead.
    """
    census.check()
    x = _check_x(x)
    log_Z, L = series_stats(census.log_counts(), x)
    method = Method.EXACT
    if I is None and transitive:
        I = math.exp(math.log1p(L) - log_Z)
        method = Method.TRANSITIVE_IDENTITY
    return SawMeasureEval(x, log_Z, L, I, gamma_exponent(log_Z, L), method)


# ------------------------------------------------------ pair enumeration


def pair_census(g: Graph, root: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> list:
    """Counts of pairs of walks from ``root`` that meet only at ``root``.

    Entry ``m`` is the number of ordered pairs ``(w, w')`` with
    ``|w| + |w'| = m`` and ``w ∩ w' = {root}``. For every first walk the
    second is enumerated by a DFS that treats the first walk's vertices as
    already visited; results are memoised on that vertex set.
    """
    root = g.root if root is None else root
    if not 0 <= root < g.n:
        raise EndpointOutOfRange(f"root {root} not in [0, {g.n})")
    adj = g.adjacency
    kmax = g.n - 1
    memo = {}
    pairs = [0] * (2 * kmax + 1)
    spent = 0

    def avoiding(mask):
        nonlocal spent
        poly = memo.get(mask)
        if poly is None:
            counts, used, ok = _dfs_counts(adj, root, mask, 0, kmax, budget - spent)
            spent += used
            if not ok:
                raise BudgetExceeded(f"pair enumeration exceeded budget of {budget}", nodes=spent)
            while counts and counts[-1] == 0:
                counts.pop()
            poly = memo[mask] = counts
        return poly

    stack = [(root, 1 << root, 0)]
    while stack:
        v, m, k = stack.pop()
        spent += 1
        if spent > budget:
            raise BudgetExceeded(f"pair enumeration exceeded budget of {budget}", nodes=spent)
        for j, c in enumerate(avoiding(m)):
            pairs[k + j] += c
        for w in reversed(adj[v]):
            if not (m >> w) & 1:
                stack.append((w, m | (1 << w), k + 1))
    while pairs and pairs[-1] == 0:
        pairs.pop()
    return pairs


def intersection_prob_bruteforce(g: Graph, x: float, root: Optional[int] = None,
                                 budget: int = DEFAULT_BUDGET, census: Optional[SawCensus] = None,
                                 pairs: Optional[list] = None) -> float:
    """Trivial-intersection probability I(x) by exhaustive pair enumeration.

    Does not use any identity; valid on every graph.
    """
    x = _check_x(x)
    root = g.root if root is None else root
    if census is None:
        census = enumerate_census(g, root, budget=budget)
    if pairs is None:
        pairs = pair_census(g, root, budget)
    log_Z, _ = series_stats(census.log_counts(), x)
    log_P, _ = series_stats([log_int(c) for c in pairs], x)
    return min(1.0, math.exp(log_P - 2.0 * log_Z))


@dataclass(frozen=True)
class IdentityCheck:
    x: float
    lhs: float  # L + 1
    rhs: float  # I * Z
    residual: float


def verify_intersection_identity(g: Graph, x_grid: Sequence[float], root: Optional[int] = None,
                                 assume_transitive: bool = False,
                                 budget: int = DEFAULT_BUDGET) -> list:
    """Check ``L + 1 = I * Z`` with I from pair enumeration, one entry per x.

    The residual is ``|(L + 1) - I Z| / (L + 1)``. Refuses (raises
    :class:`NotTransitive`) unless the graph is verified or asserted to be
    vertex-transitive.
    """
    if not assume_transitive:
        verdict = is_vertex_transitive(g)
        if verdict is not True:
            why = "is not" if verdict is False else "could not be verified to be"
            raise NotTransitive(f"{g.name or 'graph'} {why} vertex-transitive; "
                                "pass assume_transitive=True to override")
    root = g.root if root is None else root
    census = enumerate_census(g, root, budget=budget)
    pairs = pair_census(g, root, budget)
    out = []
    for x in x_grid:
        x = _check_x(x)
        log_Z, L = series_stats(census.log_counts(), x)
        log_P, _ = series_stats([log_int(c) for c in pairs], x)
        lhs = L + 1.0
        rhs = math.exp(log_P - log_Z)  # I * Z = P / Z
        out.append(IdentityCheck(x, lhs, rhs, abs(lhs - rhs) / lhs))
    return out


def monotonicity_scan(census: SawCensus, x_grid: Sequence[float], rtol: float = 1e-12):
    """Check that L(x) is non-decreasing along ``x_grid``.

    Returns ``(ok, violation)`` where ``violation`` is ``None`` or the first
    ``(x_i, x_{i+1}, L_i, L_{i+1})`` with ``L_i > L_{i+1}`` beyond tolerance.
    """
    xs = [_check_x(x) for x in x_grid]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise PreconditionViolated("x_grid must be strictly increasing")
    census.check()
    lc = census.log_counts()
    prev = None
    for x in xs:
        L = series_stats(lc, x)[1]
        if prev is not None and prev[1] > L + rtol * max(abs(L), 1.0):
            return False, (prev[0], x, prev[1], L)
        prev = (x, L)
    return True, None


# ------------------------------------------------------------ critical scan


def family_builder(family: Union[str, Callable[[int], Graph]]) -> Callable[[int], Graph]:
    """Map a family name to ``size -> Graph``.

    Names: ``complete``, ``cycle``, ``hypercube``, ``torus:<dim>``,
    ``random-regular:<d>,<seed>``. A callable passes through unchanged.
    """
    if callable(family):
        return family
    name, _, args = family.partition(":")
    name = name.strip().lower()
    if name in ("complete", "cycle", "hypercube", "path"):
        return lambda size: generate(f"{name}:{size}")
    if name == "torus":
        dim = args or "2"
        return lambda size: generate(f"torus:{size},{dim}")
    if name in ("random-regular", "rrg"):
        d, _, seed = args.partition(",")
        return lambda size: generate(f"random-regular:{size},{d},{seed or 0}")
    raise PreconditionViolated(f"unknown scan family {family!r}")


@dataclass
class ScanTable:
    rows: list
    crossings: dict  # level -> {size: x_hat or None}

    COLUMNS = ("size", "x", "Z_log", "L", "method")


def _crossing(xs, log_zs, level):
    target = math.log(level)
    prev = None
    for x, lz in zip(xs, log_zs):
        if lz is None:
            prev = None
            continue
        if lz >= target:
            if prev is None:
                return None
            x0, z0 = prev
            return x0 + (target - z0) * (x - x0) / (lz - z0)
        prev = (x, lz)
    return None


def critical_scan(family, sizes: Sequence[int], x_grid: Sequence[float],
                  levels: Sequence[float] = (2.0, 10.0, 100.0), method: str = "auto",
                  budget: int = 2_000_000, n_samples: int = 20_000, seed: int = 1) -> ScanTable:
    """Tabulate Z(x) across graph sizes and locate where Z crosses each level.

    ``method``: ``exact`` (census only), ``mc`` (non-backtracking walk
    estimator, regular graphs only) or ``auto`` (exact, falling back to
    Monte Carlo when the census budget runs out). Cells that cannot be
    computed are recorded with ``Z_log = None``.
    """
    from .nbrw import estimate_measure_from_stats, estimate_survival

    build = family_builder(family)
    xs = [_check_x(x) for x in x_grid]
    rows = []
    crossings = {lvl: {} for lvl in levels}
    for size in sizes:
        g = build(size)
        census = stats = None
        used = None
        if method in ("exact", "auto"):
            try:
                census = enumerate_census(g, budget=budget)
                used = Method.EXACT
            except BudgetExceeded:
                census = None
        if census is None and method in ("mc", "auto"):
            try:
                stats = estimate_survival(g, n_samples=n_samples, seed=seed)
                used = Method.MONTE_CARLO
            except Exception:  # noqa: BLE001 - recorded as a missing cell
                stats = None
        log_zs = []
        for x in xs:
            if census is not None:
                lz, L = series_stats(census.log_counts(), x)
            elif stats is not None:
                ev = estimate_measure_from_stats(stats, x)
                lz, L = ev.log_Z, ev.L
            else:
                lz = L = None
            log_zs.append(lz)
            rows.append({"size": size, "x": x, "Z_log": lz, "L": L,
                         "method": str(used) if used else None})
        for lvl in levels:
            crossings[lvl][size] = _crossing(xs, log_zs, lvl)
    return ScanTable(rows, crossings)


# ----------------------------------------------------------- serialization


def census_to_csv(census: SawCensus, meta: Optional[dict] = None) -> str:
    header = {"graph": census.graph_name, "root": census.root, "k_max": census.k_max,
              "valid": census.valid}
    header.update(meta or {})
    rows = [{"k": k, "count": str(c)} for k, c in enumerate(census.counts)]
    return format_table(["k", "count"], rows, header)


def census_from_csv(text: str) -> SawCensus:
    _, rows, meta = parse_table(text)
    counts = tuple(int(r["count"]) for r in rows)
    return SawCensus(str(meta.get("graph", "")), int(meta.get("root", 0)), counts,
                     int(meta.get("k_max", len(counts) - 1)), bool(meta.get("valid", True)))
