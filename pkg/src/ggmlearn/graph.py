"""Undirected graphs on {0, ..., p-1} and distance-local vertex separation.

Graphs are immutable once constructed.  Edges are stored as sorted ``(u, v)``
pairs with ``u < v``.  The separation utilities operate on the subgraph that
keeps all ``p`` vertices but only the edges inside the radius-``gamma`` ball
around a vertex, so a separator returned for a pair certifies that every
short path between the two endpoints is cut.

Randomized generators take an explicit integer seed and use the Philox
counter-based generator, so outputs are reproducible across platforms.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationFailed, InvalidParameter

REGULAR_RETRY_BUDGET = 1000


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


class Graph:
    """Immutable simple undirected graph on vertices 0..p-1.

    :param p: number of vertices, at least 1.
    :param edges: iterable of (u, v) pairs; order within a pair is ignored.
        Self loops and duplicate edges are rejected.
    """

    __slots__ = ("p", "edges", "adjacency", "_edge_set")

    def __init__(self, p: int, edges=()):
        if not isinstance(p, (int, np.integer)) or p < 1:
            raise InvalidParameter(f"p must be a positive integer, got {p!r}")
        normalized = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidParameter(f"self loop at vertex {u}")
            if not (0 <= u < p and 0 <= v < p):
                raise InvalidParameter(f"edge ({u}, {v}) outside vertex range 0..{p - 1}")
            normalized.append((u, v) if u < v else (v, u))
        edge_set = set(normalized)
        if len(edge_set) != len(normalized):
            raise InvalidParameter("duplicate edges")
        self.p = int(p)
        self.edges = tuple(sorted(edge_set))
        self._edge_set = frozenset(edge_set)
        adj = [[] for _ in range(self.p)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        self.adjacency = tuple(tuple(sorted(a)) for a in adj)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self._edge_set

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.p, self.p), dtype=float)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        return a

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.p == other.p and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.p, self.edges))

    def __repr__(self) -> str:
        return f"Graph(p={self.p}, n_edges={self.n_edges})"


def chain_graph(p: int) -> Graph:
    """Path 0-1-...-(p-1)."""
    return Graph(p, [(i, i + 1) for i in range(p - 1)])


def cycle_graph(p: int) -> Graph:
    if p < 3:
        raise InvalidParameter("a cycle needs at least 3 vertices")
    return Graph(p, [(i, (i + 1) % p) for i in range(p)])


def torus_grid(m: int, d: int) -> Graph:
    """d-dimensional toroidal grid with side m; p = m**d vertices.

    Vertex labels are mixed-radix: coordinate k contributes digit
    ``(label // m**k) % m``.  Each vertex connects to its +1 neighbor
    (mod m) along every dimension; for m = 2 the wrap duplicates collapse.
    """
    if m < 2 or d < 1:
        raise InvalidParameter("torus needs side m >= 2 and dimension d >= 1")
    p = m**d
    edges = set()
    for v in range(p):
        for k in range(d):
            digit = (v // m**k) % m
            w = v + ((digit + 1) % m - digit) * m**k
            if v != w:
                edges.add((v, w) if v < w else (w, v))
    return Graph(p, edges)


def generate_er(p: int, c: float, seed: int) -> Graph:
    """Erdos-Renyi graph where each pair is an edge with probability c/p."""
    if p < 1:
        raise InvalidParameter("p must be positive")
    if not 0 <= c <= p:
        raise InvalidParameter(f"need 0 <= c <= p so that c/p is a probability, got c={c}")
    rng = _rng(seed)
    prob = c / p
    edges = []
    for u in range(p - 1):
        hits = np.nonzero(rng.random(p - 1 - u) < prob)[0]
        edges.extend((u, u + 1 + int(off)) for off in hits)
    return Graph(p, edges)


def generate_regular(p: int, delta: int, seed: int) -> Graph:
    """Random delta-regular graph via the pairing (configuration) model.

    Stubs are shuffled and paired; an attempt producing a self loop or a
    duplicate edge is discarded and redrawn.  Gives up after
    ``REGULAR_RETRY_BUDGET`` attempts.
    """
    if not 0 <= delta < p:
        raise InvalidParameter(f"need 0 <= delta < p, got delta={delta}, p={p}")
    if (p * delta) % 2 != 0:
        raise InvalidParameter(f"p * delta must be even, got p={p}, delta={delta}")
    if delta == 0:
        return Graph(p, [])
    rng = _rng(seed)
    stubs = np.repeat(np.arange(p), delta)
    for _ in range(REGULAR_RETRY_BUDGET):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        us = np.minimum(pairs[:, 0], pairs[:, 1])
        vs = np.maximum(pairs[:, 0], pairs[:, 1])
        if np.any(us == vs):
            continue
        keys = us.astype(np.int64) * p + vs.astype(np.int64)
        if len(np.unique(keys)) != len(keys):
            continue
        return Graph(p, zip(us.tolist(), vs.tolist()))
    raise GenerationFailed(
        f"no simple {delta}-regular graph on {p} vertices after {REGULAR_RETRY_BUDGET} attempts"
    )


def generate_smallworld(p: int, d: int, c: float, seed: int) -> Graph:
    """Union of a d-dimensional toroidal grid on p = m**d vertices and an
    ER(p, c/p) overlay drawn with the same seed."""
    if d < 1:
        raise InvalidParameter("dimension d must be at least 1")
    m = round(p ** (1.0 / d))
    if m < 2 or m**d != p:
        for cand in (m - 1, m + 1):
            if cand >= 2 and cand**d == p:
                m = cand
                break
        else:
            raise InvalidParameter(f"p={p} is not a perfect d-th power with side >= 2 for d={d}")
    grid = torus_grid(m, d)
    overlay = generate_er(p, c, seed)
    return Graph(p, set(grid.edges) | set(overlay.edges))


def girth(g: Graph) -> float:
    """Length of a shortest cycle, or math.inf for a forest.

    BFS from every vertex; a non-tree edge (u, v) seen at depths
    dist[u], dist[v] witnesses a closed walk of length dist[u]+dist[v]+1
    through the root, which is never shorter than the girth, and BFS from a
    vertex on a shortest cycle attains it.
    """
    best = math.inf
    adj = g.adjacency
    for s in range(g.p):
        dist = [-1] * g.p
        parent = [-1] * g.p
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] >= best - 1:
                break
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    parent[v] = u
                    queue.append(v)
                elif parent[u] != v and parent[v] != u:
                    cand = dist[u] + dist[v] + 1
                    if cand < best:
                        best = cand
    return best


def ball(g: Graph, i: int, gamma: int) -> tuple[int, ...]:
    """Sorted vertices within BFS distance gamma of i (including i)."""
    if not 0 <= i < g.p:
        raise InvalidParameter(f"vertex {i} out of range")
    if gamma < 0:
        raise InvalidParameter("gamma must be nonnegative")
    dist = {i: 0}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        if dist[u] == gamma:
            continue
        for v in g.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return tuple(sorted(dist))


def gamma_subgraph(g: Graph, i: int, gamma: int) -> Graph:
    """Subgraph keeping all p vertices but only edges inside the
    radius-gamma ball around i."""
    inside = set(ball(g, i, gamma))
    return Graph(g.p, [e for e in g.edges if e[0] in inside and e[1] in inside])


def is_locally_treelike(g: Graph, i: int, gamma: int) -> bool:
    """True when the radius-gamma ball around i induces no cycle."""
    return girth(gamma_subgraph(g, i, gamma)) == math.inf


def _component_of(adj: dict[int, list[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _min_vertex_cut_size(adj: dict[int, list[int]], s: int, t: int, removed: frozenset | set) -> int:
    """Minimum number of vertices (excluding s, t) whose removal disconnects
    s from t, with vertices in ``removed`` already deleted.

    Node-splitting max-flow with unit vertex capacities: vertex v becomes
    arc v_in -> v_out of capacity 1, undirected edges become infinite arcs
    between the split copies.  s and t are never counted in the cut.
    """
    cap: dict[int, dict[int, int]] = {}

    def add_arc(u, v, c):
        cap.setdefault(u, {})[v] = c
        cap.setdefault(v, {}).setdefault(u, 0)

    big = len(adj) + 2
    alive = [v for v in adj if v not in removed]
    for v in alive:
        if v != s and v != t:
            add_arc(2 * v, 2 * v + 1, 1)
    for u in alive:
        for v in adj[u]:
            if v in removed or v <= u:
                continue
            add_arc(2 * u + 1, 2 * v, big)
            add_arc(2 * v + 1, 2 * u, big)
    src, dst = 2 * s + 1, 2 * t
    flow = 0
    while True:
        parent = {src: None}
        queue = deque([src])
        while queue and dst not in parent:
            x = queue.popleft()
            for y, c in cap.get(x, {}).items():
                if c > 0 and y not in parent:
                    parent[y] = x
                    queue.append(y)
        if dst not in parent:
            return flow
        path = []
        y = dst
        while y != src:
            path.append((parent[y], y))
            y = parent[y]
        aug = min(cap[u][v] for u, v in path)
        for u, v in path:
            cap[u][v] -= aug
            cap[v][u] += aug
        flow += aug
        if flow >= big:
            raise InvalidParameter("no vertex cut separates adjacent vertices")


def _lex_min_separator(adj: dict[int, list[int]], i: int, j: int) -> tuple[int, ...]:
    """Lexicographically smallest minimum vertex separator of i and j.

    ``adj`` must already be restricted to the working subgraph.  Greedy on
    ascending vertex labels: v joins the prefix exactly when some minimum
    separator extends the prefix with v, which is equivalent to the residual
    min cut dropping by one.
    """
    comp = _component_of(adj, i)
    if j not in comp:
        return ()
    local = {v: [w for w in adj[v] if w in comp] for v in comp}
    k = _min_vertex_cut_size(local, i, j, frozenset())
    if k == 0:
        return ()
    chosen: list[int] = []
    removed: set[int] = set()
    for v in sorted(comp - {i, j}):
        if len(chosen) == k:
            break
        if _min_vertex_cut_size(local, i, j, removed | {v}) == k - len(chosen) - 1:
            chosen.append(v)
            removed.add(v)
    if len(chosen) != k:
        raise AssertionError("greedy separator construction failed to reach the cut size")
    return tuple(chosen)


def local_separator(g: Graph, i: int, j: int, gamma: int) -> tuple[int, ...]:
    """Minimum vertex separator of the non-adjacent pair (i, j) with respect
    to the subgraph of edges inside the radius-gamma ball around i.

    Returns a sorted tuple of vertices.  If j is unreachable from i in that
    subgraph (including the whole gamma = 0 case) the separator is empty.
    Ties between minimum separators go to the lexicographically smallest
    vertex set.
    """
    if i == j or not (0 <= i < g.p and 0 <= j < g.p):
        raise InvalidParameter(f"need distinct vertices in range, got ({i}, {j})")
    if g.has_edge(i, j):
        raise InvalidParameter(f"({i}, {j}) is an edge; separators are defined for non-adjacent pairs")
    if gamma < 0:
        raise InvalidParameter("gamma must be nonnegative")
    if gamma == 0:
        return ()
    h = gamma_subgraph(g, i, gamma)
    adj = {v: list(h.adjacency[v]) for v in range(h.p)}
    return _lex_min_separator(adj, i, j)


@dataclass(frozen=True)
class SeparationProfile:
    """Separators for every non-adjacent pair at a fixed locality radius.

    ``eta`` is the largest separator size over all pairs; ``separators``
    maps each non-adjacent pair (i, j) with i < j to its separator computed
    in the ball around i.
    """

    gamma: int
    eta: int
    separators: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)


def separation_profile(g: Graph, gamma: int) -> SeparationProfile:
    """Compute local separators for all non-adjacent pairs; eta is the max size."""
    if gamma < 0:
        raise InvalidParameter("gamma must be nonnegative")
    separators: dict[tuple[int, int], tuple[int, ...]] = {}
    eta = 0
    for i in range(g.p):
        pending = [j for j in range(i + 1, g.p) if not g.has_edge(i, j)]
        if not pending:
            continue
        if gamma == 0:
            for j in pending:
                separators[(i, j)] = ()
            continue
        h = gamma_subgraph(g, i, gamma)
        adj = {v: list(h.adjacency[v]) for v in range(h.p)}
        for j in pending:
            sep = _lex_min_separator(adj, i, j)
            separators[(i, j)] = sep
            if len(sep) > eta:
                eta = len(sep)
    return SeparationProfile(gamma=gamma, eta=eta, separators=separators)


def edit_distance(g: Graph, h: Graph) -> int:
    """Number of edges in the symmetric difference of the two edge sets."""
    if g.p != h.p:
        raise InvalidParameter(f"graphs have different orders: {g.p} vs {h.p}")
    return len(set(g.edges) ^ set(h.edges))


@dataclass(frozen=True)
class EnsembleConfig:
    """Declarative description of a graph source for experiment configs.

    Kinds: ``er`` (p, c), ``regular`` (p, delta), ``smallworld`` (p, d, c),
    ``chain`` (p), ``cycle`` (p), ``torus`` (m, d), ``explicit`` (p, edges).
    Randomized kinds consume the seed passed to :meth:`build`; deterministic
    kinds ignore it.
    """

    kind: str
    p: int | None = None
    c: float | None = None
    delta: int | None = None
    d: int | None = None
    m: int | None = None
    edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        needed = {
            "er": ("p", "c"),
            "regular": ("p", "delta"),
            "smallworld": ("p", "d", "c"),
            "chain": ("p",),
            "cycle": ("p",),
            "torus": ("m", "d"),
            "explicit": ("p", "edges"),
        }
        if self.kind not in needed:
            raise InvalidParameter(f"unknown ensemble kind {self.kind!r}")
        for name in needed[self.kind]:
            if getattr(self, name) is None:
                raise InvalidParameter(f"ensemble kind {self.kind!r} requires field {name!r}")

    @property
    def order(self) -> int:
        if self.kind == "torus":
            return self.m**self.d
        return self.p

    @property
    def density_param(self) -> float:
        """The c-or-delta column reported by sweeps; 0 for fixed graphs."""
        if self.kind in ("er", "smallworld"):
            return float(self.c)
        if self.kind == "regular":
            return float(self.delta)
        return 0.0

    @property
    def nominal_degree(self) -> float:
        """Mean degree used when translating this ensemble into a sample
        complexity bound: the ER rate where one exists, otherwise the exact
        mean degree of the deterministic graph."""
        if self.kind in ("er", "smallworld"):
            base = float(self.c)
            if self.kind == "smallworld":
                base += 2.0 * self.d
            return base
        if self.kind == "regular":
            return float(self.delta)
        if self.kind == "chain":
            return 2.0 * (self.p - 1) / self.p
        if self.kind == "cycle":
            return 2.0
        if self.kind == "torus":
            return 2.0 * self.d if self.m > 2 else float(self.d)
        g = Graph(self.p, self.edges)
        return 2.0 * g.n_edges / g.p

    def build(self, seed: int) -> Graph:
        if self.kind == "er":
            return generate_er(self.p, self.c, seed)
        if self.kind == "regular":
            return generate_regular(self.p, self.delta, seed)
        if self.kind == "smallworld":
            return generate_smallworld(self.p, self.d, self.c, seed)
        if self.kind == "chain":
            return chain_graph(self.p)
        if self.kind == "cycle":
            return cycle_graph(self.p)
        if self.kind == "torus":
            return torus_grid(self.m, self.d)
        return Graph(self.p, self.edges)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for name in ("p", "c", "delta", "d", "m"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.edges is not None:
            out["edges"] = [list(e) for e in self.edges]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleConfig":
        kwargs = dict(data)
        if "edges" in kwargs and kwargs["edges"] is not None:
            kwargs["edges"] = tuple(tuple(e) for e in kwargs["edges"])
        return cls(**kwargs)
