"""Independent oracles used to cross-check package implementations.

Everything here deliberately avoids the code paths under test: separators
are found by exhaustive subset enumeration, spectral norms by dense
eigensolvers, conditional covariances by inverting marginal precision
matrices, and scalar bound formulas by high-precision arithmetic.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ggmlearn import Graph, GaussianModel, ball, generate_er, synthesize_model


def bitmask_adjacency(g: Graph, edges=None) -> list[int]:
    adj = [0] * g.p
    for u, v in (g.edges if edges is None else edges):
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return adj


def separates(adj: list[int], i: int, j: int, blocked: int) -> bool:
    """True when removing the blocked vertex set leaves no i-j path."""
    seen = 1 << i
    frontier = seen
    while frontier:
        nxt = 0
        rest = frontier
        while rest:
            low = rest & -rest
            nxt |= adj[low.bit_length() - 1]
            rest ^= low
        nxt &= ~blocked & ~seen
        if (nxt >> j) & 1:
            return False
        seen |= nxt
        frontier = nxt
    return True


def brute_force_local_separator(g: Graph, i: int, j: int, gamma: int) -> tuple[int, ...]:
    """First separating subset in (size, lexicographic) order, enumerated
    exhaustively over the ball-restricted edge set."""
    if gamma == 0:
        return ()
    inside = set(ball(g, i, gamma))
    adj = bitmask_adjacency(g, [e for e in g.edges if e[0] in inside and e[1] in inside])
    others = [v for v in range(g.p) if v != i and v != j]
    for size in range(len(others) + 1):
        for subset in combinations(others, size):
            blocked = 0
            for v in subset:
                blocked |= 1 << v
            if separates(adj, i, j, blocked):
                return subset
    raise AssertionError("every pair is separated by removing all other vertices")


def dense_alpha(j: np.ndarray) -> float:
    """Spectral norm of |R| by a dense symmetric eigensolver."""
    d = np.sqrt(np.diag(j))
    r = -j / np.outer(d, d)
    np.fill_diagonal(r, 0.0)
    return float(np.max(np.abs(np.linalg.eigvalsh(np.abs(r)))))


def marginal_precision_conditional_cov(j: np.ndarray, i: int, jj: int, cond) -> float:
    """Sigma(i, j | S) as an entry of the inverse of J with the rows and
    columns of S deleted."""
    p = j.shape[0]
    keep = [v for v in range(p) if v not in set(cond)]
    inv = np.linalg.inv(j[np.ix_(keep, keep)])
    return float(inv[keep.index(i), keep.index(jj)])


def random_sparse_model(
    p: int,
    seed: int,
    target_alpha: float,
    density: float = 0.35,
    diagonal_range: tuple[float, float] = (1.0, 1.0),
) -> GaussianModel:
    """A walk-summable model with varied edge magnitudes and signs.

    Draws a symmetric R with uniform entries on a random support, rescales
    it so the spectral norm of |R| is exactly the target, then applies a
    random diagonal: J = D^{1/2} (I - R) D^{1/2}.
    """
    rng = np.random.default_rng(seed)
    while True:
        r = np.zeros((p, p))
        edges = []
        for u in range(p):
            for v in range(u + 1, p):
                if rng.random() < density:
                    r[u, v] = r[v, u] = rng.uniform(-1.0, 1.0)
                    edges.append((u, v))
        if edges:
            break
    scale = target_alpha / float(np.max(np.abs(np.linalg.eigvalsh(np.abs(r)))))
    r *= scale
    d = rng.uniform(*diagonal_range, size=p)
    j = np.sqrt(np.outer(d, d)) * (np.eye(p) - r)
    # the construction can round a tiny support entry to zero only if the
    # uniform draw was exactly zero, which has probability zero
    return GaussianModel(Graph(p, edges), j)


def random_er_model(p: int, seed: int, target_alpha: float, c: float = 2.5,
                    sign: str = "random") -> GaussianModel:
    """Uniform-magnitude model on an ER draw, retrying empty graphs."""
    for attempt in range(100):
        g = generate_er(p, c, seed + 1000 * attempt)
        if g.n_edges:
            return synthesize_model(g, target_alpha, sign_pattern=sign, seed=seed)
    raise AssertionError("could not draw a non-empty graph")
