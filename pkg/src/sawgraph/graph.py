"""Finite simple graphs: construction, standard families, girth and transitivity.

A :class:`Graph` is immutable once built. Adjacency lists are stored sorted
ascending so every traversal in the package visits neighbours in a fixed
order, which is what makes budget-limited searches reproducible.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Optional

import numpy as np

from .exceptions import (
    EndpointOutOfRange,
    InfeasibleParameters,
    ResampleLimitExceeded,
    SelfLoop,
)

ACYCLIC = math.inf
"""Girth reported for forests."""

DEFAULT_TRANSITIVITY_BUDGET = 1_000_000


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1`` with a designated root."""

    n: int
    adjacency: tuple
    root: int = 0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError(f"adjacency has {len(self.adjacency)} rows, expected {self.n}")
        if not 0 <= self.root < max(self.n, 1):
            raise EndpointOutOfRange(f"root {self.root} not in [0, {self.n})")
        for v, nbrs in enumerate(self.adjacency):
            if any(a >= b for a, b in zip(nbrs, nbrs[1:])):
                raise ValueError(f"adjacency of {v} is not strictly increasing")
            for w in nbrs:
                if w == v:
                    raise SelfLoop(f"self-loop at {v}")
                if not 0 <= w < self.n:
                    raise EndpointOutOfRange(f"neighbour {w} of {v} out of range")
        for v, nbrs in enumerate(self.adjacency):
            for w in nbrs:
                if v not in self._adjsets[w]:
                    raise ValueError(f"adjacency not symmetric at ({v}, {w})")

    @cached_property
    def _adjsets(self):
        return tuple(frozenset(nbrs) for nbrs in self.adjacency)

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjsets[u]

    def edges(self) -> Iterator[tuple]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def with_root(self, root: int) -> "Graph":
        return replace(self, root=root)

    @cached_property
    def meta(self) -> "GraphMeta":
        return graph_meta(self)

    def to_networkx(self):
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges())
        return G

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"Graph({label}n={self.n}, m={self.num_edges}, root={self.root})"


@dataclass(frozen=True)
class GraphMeta:
    is_regular: bool
    degree: Optional[int]
    girth: float
    # None when the automorphism search ran out of budget
    is_vertex_transitive: Optional[bool]


def build_graph(n: int, edges: Iterable, root: int = 0, name: str = "") -> Graph:
    """Build a canonical graph from an edge list; duplicate edges collapse."""
    if n < 0:
        raise ValueError("n must be non-negative")
    adj = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise EndpointOutOfRange(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        adj[u].add(v)
        adj[v].add(u)
    if not 0 <= root < max(n, 1):
        raise EndpointOutOfRange(f"root {root} not in [0, {n})")
    return Graph(n, tuple(tuple(sorted(s)) for s in adj), root, name)


# ---------------------------------------------------------------- families


def complete(n: int) -> Graph:
    if n < 2:
        raise InfeasibleParameters("complete graph needs n >= 2")
    return build_graph(n, itertools.combinations(range(n), 2), name=f"complete:{n}")


def cycle(n: int) -> Graph:
    if n < 3:
        raise InfeasibleParameters("cycle needs n >= 3")
    return build_graph(n, ((i, (i + 1) % n) for i in range(n)), name=f"cycle:{n}")


def path(n: int) -> Graph:
    if n < 1:
        raise InfeasibleParameters("path needs n >= 1")
    return build_graph(n, ((i, i + 1) for i in range(n - 1)), name=f"path:{n}")


def torus(n: int, dim: int = 2) -> Graph:
    """The grid torus (Z/nZ)^dim, vertices numbered in mixed radix."""
    if n < 3 or dim < 1:
        raise InfeasibleParameters("torus needs n >= 3 and dim >= 1")
    N = n**dim
    edges = []
    for v in range(N):
        stride = 1
        for _ in range(dim):
            coord = (v // stride) % n
            w = v - coord * stride + ((coord + 1) % n) * stride
            edges.append((v, w))
            stride *= n
    return build_graph(N, edges, name=f"torus:{n},{dim}")


def hypercube(dim: int) -> Graph:
    if dim < 1:
        raise InfeasibleParameters("hypercube needs dim >= 1")
    N = 1 << dim
    edges = [(v, v ^ (1 << b)) for v in range(N) for b in range(dim)]
    return build_graph(N, edges, name=f"hypercube:{dim}")


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(10, outer + spokes + inner, name="petersen")


def random_regular(n: int, d: int, seed: int, max_tries: int = 100_000) -> Graph:
    """Uniform simple d-regular graph via the pairing model with rejection.

    Stubs are shuffled and paired consecutively; pairings with a loop or a
    repeated edge are discarded and redrawn. The output depends only on
    ``(n, d, seed)``.
    """
    if (n * d) % 2 or d < 3 or d >= n:
        raise InfeasibleParameters(f"no simple {d}-regular graph on {n} vertices "
                                   "(need n*d even, 3 <= d < n)")
    rng = np.random.Generator(np.random.PCG64(seed))
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        lo = pairs.min(axis=1)
        hi = pairs.max(axis=1)
        if np.any(lo == hi):
            continue
        keys = lo.astype(np.int64) * n + hi
        if np.unique(keys).size != keys.size:
            continue
        return build_graph(n, zip(lo.tolist(), hi.tolist()),
                           name=f"random-regular:{n},{d},{seed}")
    raise ResampleLimitExceeded(f"no simple pairing after {max_tries} attempts")


_FAMILIES = {
    "complete": complete,
    "cycle": cycle,
    "path": path,
    "torus": torus,
    "hypercube": hypercube,
    "petersen": petersen,
    "random-regular": random_regular,
}


def generate(spec: str) -> Graph:
    """Build a graph from a family string such as ``"torus:3,2"`` or ``"petersen"``.

    ``random-regular`` takes ``n,d,seed``.
    """
    family, _, args = spec.strip().lower().partition(":")
    family = family.replace("_", "-")
    if family == "random-regular" or family == "rrg":
        family = "random-regular"
    try:
        ctor = _FAMILIES[family]
    except KeyError:
        raise InfeasibleParameters(f"unknown graph family {family!r}") from None
    params = [int(a) for a in args.split(",") if a.strip()] if args else []
    try:
        return ctor(*params)
    except TypeError as exc:
        raise InfeasibleParameters(f"bad parameters for {family}: {args!r}") from exc


# ----------------------------------------------------------------- analysis


def bfs_distances(g: Graph, source: int) -> list:
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.adjacency[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def girth(g: Graph) -> float:
    """Length of a shortest cycle, or ``ACYCLIC`` (``inf``) for a forest.

    BFS from every vertex; a non-tree edge ``(u, w)`` met from source ``s``
    closes a closed walk of length ``dist[u] + dist[w] + 1`` through ``s``, and
    the minimum over all sources is the girth.
    """
    best = ACYCLIC
    for s in range(g.n):
        dist = [-1] * g.n
        parent = [-1] * g.n
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in g.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif w != parent[u]:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def is_regular(g: Graph) -> bool:
    return len({len(a) for a in g.adjacency}) <= 1


def regular_degree(g: Graph) -> Optional[int]:
    if g.n == 0 or not is_regular(g):
        return None
    return len(g.adjacency[0])


def _distance_profile(g: Graph, v: int) -> tuple:
    dist = bfs_distances(g, v)
    return tuple(sorted((d, len(g.adjacency[w])) for w, d in enumerate(dist)))


def _find_automorphism(g: Graph, order, src_dist, target, tgt_dist, budget):
    """Backtracking search for an automorphism sending ``order[0]`` to ``target``.

    Returns ``(mapping or None, nodes_used)``; ``mapping`` is ``None`` if none
    exists, and the search raises ``_OutOfBudget`` when it runs out.
    """
    n = g.n
    image = [-1] * n
    used = [False] * n
    pos = {v: i for i, v in enumerate(order)}
    # earlier-ordered neighbours of each vertex; adjacency to these is checked
    earlier = [[w for w in g.adjacency[v] if pos[w] < pos[v]] for v in order]
    nodes = 0

    def candidates(i):
        v = order[i]
        if earlier[i]:
            pool = g.adjacency[image[earlier[i][0]]]
        else:
            pool = range(n)
        deg = len(g.adjacency[v])
        for c in pool:
            if not used[c] and len(g.adjacency[c]) == deg and tgt_dist[c] == src_dist[v]:
                yield c

    def consistent(i, c):
        # every mapped vertex adjacent to v must map into N(c), and non-adjacent
        # mapped vertices must not; earlier[] handles the first half
        for w in earlier[i]:
            if not g.has_edge(c, image[w]):
                return False
        n_earlier_nbrs = sum(1 for w in g.adjacency[c] if used[w])
        return n_earlier_nbrs == len(earlier[i])

    image[order[0]] = target
    used[target] = True
    stack = [candidates(1)] if n > 1 else []
    i = 1
    while 0 < i < n:
        nodes += 1
        if nodes > budget:
            raise _OutOfBudget(nodes)
        v = order[i]
        it = stack[-1]
        if image[v] >= 0:
            used[image[v]] = False
            image[v] = -1
        for c in it:
            if consistent(i, c):
                image[v] = c
                used[c] = True
                break
        if image[v] < 0:
            stack.pop()
            i -= 1
            continue
        i += 1
        if i < n:
            stack.append(candidates(i))
    if i >= n or n == 1:
        return image, nodes
    return None, nodes


class _OutOfBudget(Exception):
    def __init__(self, nodes):
        self.nodes = nodes


def is_vertex_transitive(g: Graph, budget: int = DEFAULT_TRANSITIVITY_BUDGET) -> Optional[bool]:
    """Decide vertex-transitivity by searching for automorphisms.

    Returns ``True``/``False``, or ``None`` when the search exceeds ``budget``
    backtracking nodes. Cheap invariants (degree, BFS distance profile) reject
    most non-transitive graphs before any search.
    """
    n = g.n
    if n <= 1:
        return True
    if not is_regular(g):
        return False
    profile0 = _distance_profile(g, 0)
    for v in range(1, n):
        if _distance_profile(g, v) != profile0:
            return False

    # BFS order from vertex 0, covering every component
    order, seen = [], [False] * n
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    src_dist = bfs_distances(g, 0)

    # orbit of vertex 0 under the automorphisms found so far (union-find)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    spent = 0
    for target in range(1, n):
        if find(target) == find(0):
            continue
        try:
            image, used = _find_automorphism(
                g, order, src_dist, target, bfs_distances(g, target), budget - spent)
        except _OutOfBudget:
            return None
        spent += used
        if image is None:
            return False
        for w in range(n):
            a, b = find(w), find(image[w])
            if a != b:
                parent[a] = b
    return True


def graph_meta(g: Graph, budget: int = DEFAULT_TRANSITIVITY_BUDGET) -> GraphMeta:
    reg = is_regular(g)
    return GraphMeta(
        is_regular=reg,
        degree=regular_degree(g),
        girth=girth(g),
        is_vertex_transitive=is_vertex_transitive(g, budget),
    )
