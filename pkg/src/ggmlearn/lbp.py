"""Loopy Gaussian belief propagation in information form.

Messages live on directed edges.  With cavity quantities

    Jhat[i\\j] = J[i, i] + sum over k in N(i) minus j of dJ[k -> i]
    hhat[i\\j] = h[i]   + sum over k in N(i) minus j of dh[k -> i]

a synchronous sweep updates every directed edge from the previous sweep:

    dJ[i -> j] = -J[i, j]^2 / Jhat[i\\j]
    dh[i -> j] = -J[i, j] * hhat[i\\j] / Jhat[i\\j]

Beliefs then combine all incoming messages: the belief precision at i is
J[i, i] plus the sum of dJ[k -> i], the variance estimate its reciprocal,
and the mean estimate hhat over the belief precision.  On trees this is
exact; on walk-summable loopy models it converges and the means are exact
while variances carry a locality-controlled error.

Unnormalized models are rescaled to unit diagonal first and the beliefs
are mapped back afterwards, which changes nothing mathematically but keeps
the message sweep in the normalized regime the convergence analysis is
stated for.  A nonpositive cavity precision is reported as a breakdown
rather than raised, since it is a diagnostic outcome of interest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .model import GaussianModel

LBP_TOL = 1e-10
LBP_MAX_ITERS = 10000


@dataclass
class LbpResult:
    """Belief estimates plus convergence diagnostics.

    ``message_precisions`` and ``message_potentials`` hold the final
    normalized-model messages with entry [i, j] carrying the i -> j value;
    off-edge entries are zero.
    """

    variances: np.ndarray
    means: np.ndarray
    converged: bool
    iterations: int
    final_change: float
    breakdown: bool
    message_precisions: np.ndarray
    message_potentials: np.ndarray


def lbp_run(
    model: GaussianModel,
    h=None,
    tol: float = LBP_TOL,
    max_iters: int = LBP_MAX_ITERS,
) -> LbpResult:
    """Run synchronous belief propagation from zero-initialized messages.

    ``h`` is the potential vector of the information form (defaults to
    zero, giving zero means).  Convergence is declared when the largest
    message change over all directed edges falls to ``tol`` or below.
    """
    if tol <= 0 or max_iters < 1:
        raise InvalidParameter("need tol > 0 and max_iters >= 1")
    p = model.p
    h = np.zeros(p) if h is None else np.asarray(h, dtype=float)
    if h.shape != (p,):
        raise InvalidParameter(f"h must have shape ({p},), got {h.shape}")

    scale = np.sqrt(np.diag(model.precision))
    r = model.partial_correlations()
    h_norm = h / scale
    mask = model.graph.adjacency_matrix() > 0.0

    d_j = np.zeros((p, p))
    d_h = np.zeros((p, p))
    converged = False
    breakdown = False
    iterations = 0
    change = np.inf
    r_sq = r * r
    for iterations in range(1, max_iters + 1):
        cavity_j = (1.0 + d_j.sum(axis=0))[:, None] - d_j.T
        cavity_h = (h_norm + d_h.sum(axis=0))[:, None] - d_h.T
        if np.any(cavity_j[mask] <= 0.0):
            breakdown = True
            break
        new_j = np.where(mask, -r_sq / np.where(mask, cavity_j, 1.0), 0.0)
        new_h = np.where(mask, r * cavity_h / np.where(mask, cavity_j, 1.0), 0.0)
        change = max(
            float(np.max(np.abs(new_j - d_j), initial=0.0)),
            float(np.max(np.abs(new_h - d_h), initial=0.0)),
        )
        d_j, d_h = new_j, new_h
        if change <= tol:
            converged = True
            break

    belief_j = 1.0 + d_j.sum(axis=0)
    belief_h = h_norm + d_h.sum(axis=0)
    if np.any(belief_j <= 0.0):
        breakdown = True
        safe = np.where(belief_j > 0.0, belief_j, np.nan)
    else:
        safe = belief_j
    variances = (1.0 / safe) / (scale * scale)
    means = (belief_h / safe) / scale
    return LbpResult(
        variances=variances,
        means=means,
        converged=converged and not breakdown,
        iterations=iterations,
        final_change=change,
        breakdown=breakdown,
        message_precisions=d_j,
        message_potentials=d_h,
    )


def lbp_variance_error(model: GaussianModel, result: LbpResult) -> tuple[np.ndarray, float]:
    """Per-vertex |exact variance - belief variance| and its maximum."""
    exact = np.diag(model.sigma())
    per_node = np.abs(exact - result.variances)
    return per_node, float(np.max(per_node, initial=0.0))
