"""Structure estimation by thresholding conditional statistics.

For every vertex pair (i, j) the estimator minimizes a conditional
statistic over all conditioning sets S of size at most eta (excluding i and
j) and declares an edge exactly when the minimized statistic strictly
exceeds the threshold xi.  Statistics:

* ``covariance``: |Sigma(i, j | S)|, the absolute conditional covariance,
* ``mutual_information``: -0.5 * ln(1 - rho(i, j | S)^2) in nats, compared
  against xi squared.

Subsets are scanned in canonical order (sizes ascending, lexicographic
within a size) and ties in the minimum go to the first subset in that
order, so results are deterministic.  A conditioning block that is singular
or has condition number above ``cond_limit`` is skipped; in sample mode
subsets with |S| >= n are skipped outright since the empirical block cannot
be trusted.  A pair whose subsets all fail is reported as failed and
treated as a non-edge.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .errors import ConditioningFailure, InvalidParameter, NumericFailure
from .graph import Graph, local_separator
from .model import GaussianModel, conditional_covariance_exact
from .sampler import SampleSet, empirical_covariance

DEFAULT_KAPPA = 2.0
DEFAULT_COND_LIMIT = 1e12

STATISTICS = ("covariance", "mutual_information")


def default_threshold(n: int, p: int, kappa: float = DEFAULT_KAPPA) -> float:
    """xi = kappa * sqrt(ln(p) / n)."""
    if n < 1 or p < 2:
        raise InvalidParameter(f"need n >= 1 and p >= 2, got n={n}, p={p}")
    if kappa <= 0:
        raise InvalidParameter("kappa must be positive")
    return kappa * math.sqrt(math.log(p) / n)


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs for the conditional-statistic test.

    ``xi=None`` selects the default threshold rule in sample mode; exact
    mode has no sample size to plug into the rule, so it requires an
    explicit threshold.  ``early_exit`` stops scanning a pair as soon as
    one statistic falls to the threshold or below, trading the exact
    minimum for speed; reported values are then upper bounds for non-edges.
    """

    eta: int = 1
    xi: float | None = None
    kappa: float = DEFAULT_KAPPA
    statistic: str = "covariance"
    exact_mode: bool = False
    early_exit: bool = False
    cond_limit: float = DEFAULT_COND_LIMIT
    threads: int = 1

    def __post_init__(self):
        if self.eta < 0:
            raise InvalidParameter("eta must be nonnegative")
        if self.statistic not in STATISTICS:
            raise InvalidParameter(f"statistic must be one of {STATISTICS}")
        if self.threads < 1:
            raise InvalidParameter("threads must be at least 1")
        if self.xi is not None and self.xi < 0:
            raise InvalidParameter("threshold must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "xi": self.xi,
            "kappa": self.kappa,
            "statistic": self.statistic,
            "exact_mode": self.exact_mode,
            "early_exit": self.early_exit,
            "cond_limit": self.cond_limit,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EstimatorConfig":
        return cls(**data)


@dataclass(frozen=True)
class PairDecision:
    """Outcome of the subset scan for one pair."""

    value: float
    subset: tuple[int, ...] | None
    status: str  # "ok", "failed", or "early_exit"


@dataclass
class EstimationResult:
    p: int
    edges: tuple[tuple[int, int], ...]
    threshold: float
    statistic: str
    eta: int
    pairs: dict[tuple[int, int], PairDecision]
    n: int | None
    elapsed_s: float
    config: EstimatorConfig

    @property
    def graph(self) -> Graph:
        return Graph(self.p, self.edges)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "edges": [list(e) for e in self.edges],
            "threshold": self.threshold,
            "statistic": self.statistic,
            "eta": self.eta,
            "n": self.n,
            "elapsed_s": self.elapsed_s,
            "config": self.config.to_dict(),
            "pairs": {
                f"{u},{v}": {
                    "value": None if math.isinf(d.value) else d.value,
                    "subset": None if d.subset is None else list(d.subset),
                    "status": d.status,
                }
                for (u, v), d in sorted(self.pairs.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EstimationResult":
        pairs = {}
        for key, rec in data["pairs"].items():
            u, v = (int(x) for x in key.split(","))
            value = math.inf if rec["value"] is None else float(rec["value"])
            subset = None if rec["subset"] is None else tuple(rec["subset"])
            pairs[(u, v)] = PairDecision(value=value, subset=subset, status=rec["status"])
        return cls(
            p=data["p"],
            edges=tuple(tuple(e) for e in data["edges"]),
            threshold=data["threshold"],
            statistic=data["statistic"],
            eta=data["eta"],
            pairs=pairs,
            n=data["n"],
            elapsed_s=data["elapsed_s"],
            config=EstimatorConfig.from_dict(data["config"]),
        )


def _check_pair(sigma: np.ndarray, i: int, j: int, cond_set) -> list[int]:
    p = sigma.shape[0]
    cond = [int(s) for s in cond_set]
    if not (0 <= i < p and 0 <= j < p):
        raise InvalidParameter(f"indices ({i}, {j}) out of range for p={p}")
    if i in cond or j in cond:
        raise InvalidParameter("conditioning set must exclude i and j")
    if len(set(cond)) != len(cond):
        raise InvalidParameter("conditioning set has repeated vertices")
    if any(not 0 <= s < p for s in cond):
        raise InvalidParameter(f"conditioning set {cond} out of range")
    return cond


def conditional_covariance(sigma, i: int, j: int, cond_set=(), cond_limit: float = DEFAULT_COND_LIMIT) -> float:
    """Schur-complement conditional covariance with a conditioning guard.

    Unlike the exact-model variant, this treats an ill-conditioned block
    (condition number above ``cond_limit``, or singular) as a failure,
    since it is meant for empirical covariance input.
    """
    sigma = np.asarray(sigma, dtype=float)
    cond = _check_pair(sigma, i, j, cond_set)
    if not cond:
        return float(sigma[i, j])
    block = sigma[np.ix_(cond, cond)]
    svals = np.linalg.svd(block, compute_uv=False)
    smin, smax = float(svals[-1]), float(svals[0])
    if smin <= 0.0 or smax > cond_limit * smin:
        raise ConditioningFailure(
            f"conditioning block for S={cond} has condition number above {cond_limit:.1e}"
        )
    solved = np.linalg.solve(block, sigma[cond, j])
    return float(sigma[i, j] - sigma[i, cond] @ solved)


def conditional_correlation(sigma, i: int, j: int, cond_set=(), cond_limit: float = DEFAULT_COND_LIMIT) -> float:
    """rho(i, j | S) = Sigma(i, j | S) / sqrt(Sigma(i, i | S) Sigma(j, j | S))."""
    cov = conditional_covariance(sigma, i, j, cond_set, cond_limit)
    var_i = conditional_covariance(sigma, i, i, cond_set, cond_limit)
    var_j = conditional_covariance(sigma, j, j, cond_set, cond_limit)
    if var_i <= 0.0 or var_j <= 0.0:
        raise NumericFailure(f"nonpositive conditional variance for S={tuple(cond_set)}")
    return cov / math.sqrt(var_i * var_j)


def conditional_mutual_information(sigma, i: int, j: int, cond_set=(), cond_limit: float = DEFAULT_COND_LIMIT) -> float:
    """Gaussian conditional mutual information in nats."""
    rho = conditional_correlation(sigma, i, j, cond_set, cond_limit)
    if abs(rho) >= 1.0:
        raise NumericFailure(f"conditional correlation magnitude {abs(rho):.3f} not below 1")
    return -0.5 * math.log1p(-rho * rho)


class _ScanContext:
    """Quantities shared by every pair scan over one covariance matrix.

    Flattened upper-triangle vectors index all size-2 conditioning sets in
    lexicographic order; validity accounts for the conditioning guard via
    the closed-form 2x2 eigenvalues.
    """

    def __init__(self, sigma: np.ndarray, cond_limit: float):
        self.sigma = sigma
        self.p = sigma.shape[0]
        self.d = np.diag(sigma).copy()
        self.valid1 = self.d > 0.0
        self.iu_k, self.iu_l = np.triu_indices(self.p, 1)
        dk, dl = self.d[self.iu_k], self.d[self.iu_l]
        skl = sigma[self.iu_k, self.iu_l]
        self.skl = skl
        self.det2 = dk * dl - skl * skl
        tr = dk + dl
        disc = np.sqrt((dk - dl) ** 2 + 4.0 * skl * skl)
        lam_min = (tr - disc) / 2.0
        lam_max = (tr + disc) / 2.0
        self.valid2 = (lam_min > 0.0) & (lam_max <= cond_limit * lam_min)
        self.dk, self.dl = dk, dl

    def correction2(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Sigma(i, S) Sigma(S, S)^{-1} Sigma(S, j) over all |S| = 2 via the
        closed-form 2x2 inverse; a = Sigma[i, :], b = Sigma[j, :]."""
        ak, al = a[self.iu_k], a[self.iu_l]
        bk, bl = b[self.iu_k], b[self.iu_l]
        num = ak * bk * self.dl + al * bl * self.dk - self.skl * (ak * bl + al * bk)
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / self.det2


def _decode_subset(idx: int, p: int, iu_k, iu_l) -> tuple[int, ...]:
    if idx == 0:
        return ()
    if idx <= p:
        return (idx - 1,)
    t = idx - 1 - p
    return (int(iu_k[t]), int(iu_l[t]))


def _scan_pair(
    ctx: _ScanContext,
    i: int,
    j: int,
    eta: int,
    statistic: str,
    n: int | None,
    xi: float | None,
    early_exit: bool,
) -> PairDecision:
    """Minimize the statistic for one pair over subsets of size <= eta.

    ``xi`` is only consulted when ``early_exit`` is set: scanning stops at
    the first size class containing a statistic <= xi.
    """
    sig, d, p = ctx.sigma, ctx.d, ctx.p
    max_size = eta if n is None else min(eta, n - 1)

    def finish(values_parts):
        flat = np.concatenate(values_parts) if values_parts else np.array([math.inf])
        best = int(np.argmin(flat))
        if math.isinf(flat[best]):
            return PairDecision(value=math.inf, subset=None, status="failed")
        return PairDecision(
            value=float(flat[best]),
            subset=_decode_subset(best, p, ctx.iu_k, ctx.iu_l),
            status="ok",
        )

    a = sig[i]
    b = sig[j]
    if statistic == "covariance":
        v0 = np.array([abs(sig[i, j])])
    else:
        den = d[i] * d[j]
        if den <= 0.0:
            v0 = np.array([math.inf])
        else:
            rho2 = sig[i, j] ** 2 / den
            v0 = np.array([math.inf if rho2 >= 1.0 else -0.5 * math.log1p(-rho2)])
    parts = [v0]
    if early_exit and v0[0] <= xi:
        return PairDecision(value=float(v0[0]), subset=(), status="early_exit")

    if max_size >= 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            cov1 = sig[i, j] - a * b / d
            if statistic == "covariance":
                vals1 = np.abs(cov1)
            else:
                var_i1 = d[i] - a * a / d
                var_j1 = d[j] - b * b / d
                den1 = var_i1 * var_j1
                rho21 = np.where(den1 > 0.0, cov1 * cov1 / np.where(den1 > 0.0, den1, 1.0), np.inf)
                vals1 = np.where(rho21 < 1.0, -0.5 * np.log1p(-np.minimum(rho21, 1.0 - 1e-300)), np.inf)
                vals1 = np.where(den1 > 0.0, vals1, np.inf)
        vals1 = np.where(ctx.valid1, vals1, np.inf)
        vals1[i] = np.inf
        vals1[j] = np.inf
        vals1 = np.nan_to_num(vals1, nan=np.inf)
        parts.append(vals1)
        if early_exit and np.min(vals1) <= xi:
            flat = np.concatenate(parts)
            best = int(np.argmin(flat))
            return PairDecision(
                value=float(flat[best]),
                subset=_decode_subset(best, p, ctx.iu_k, ctx.iu_l),
                status="early_exit",
            )

    if max_size >= 2:
        cov2 = sig[i, j] - ctx.correction2(a, b)
        if statistic == "covariance":
            vals2 = np.abs(cov2)
        else:
            var_i2 = d[i] - ctx.correction2(a, a)
            var_j2 = d[j] - ctx.correction2(b, b)
            den2 = var_i2 * var_j2
            with np.errstate(divide="ignore", invalid="ignore"):
                rho22 = np.where(den2 > 0.0, cov2 * cov2 / np.where(den2 > 0.0, den2, 1.0), np.inf)
                vals2 = np.where(rho22 < 1.0, -0.5 * np.log1p(-np.minimum(rho22, 1.0 - 1e-300)), np.inf)
            vals2 = np.where(den2 > 0.0, vals2, np.inf)
        touch = (ctx.iu_k == i) | (ctx.iu_k == j) | (ctx.iu_l == i) | (ctx.iu_l == j)
        vals2 = np.where(ctx.valid2 & ~touch, vals2, np.inf)
        vals2 = np.nan_to_num(vals2, nan=np.inf)
        parts.append(vals2)
        if early_exit and np.min(vals2) <= xi:
            flat = np.concatenate(parts)
            best = int(np.argmin(flat))
            return PairDecision(
                value=float(flat[best]),
                subset=_decode_subset(best, p, ctx.iu_k, ctx.iu_l),
                status="early_exit",
            )

    if max_size >= 3:
        # generic path for deep conditioning; quadratic scan no longer applies
        decision = finish(parts)
        best_val = decision.value
        best_subset = decision.subset
        others = [v for v in range(p) if v != i and v != j]
        for size in range(3, max_size + 1):
            for cond in combinations(others, size):
                try:
                    if statistic == "covariance":
                        val = abs(conditional_covariance(sig, i, j, cond))
                    else:
                        val = conditional_mutual_information(sig, i, j, cond)
                except NumericFailure:
                    continue
                if val < best_val:
                    best_val = val
                    best_subset = cond
                if early_exit and val <= xi:
                    return PairDecision(value=val, subset=cond, status="early_exit")
        if best_subset is None:
            return PairDecision(value=math.inf, subset=None, status="failed")
        return PairDecision(value=best_val, subset=best_subset, status="ok")

    return finish(parts)


def min_conditional_statistic(
    sigma,
    i: int,
    j: int,
    eta: int,
    statistic: str = "covariance",
    n: int | None = None,
    cond_limit: float = DEFAULT_COND_LIMIT,
) -> PairDecision:
    """Exact minimum of the conditional statistic for one pair.

    Returns the minimizing value, the argmin subset (lexicographically
    smallest among ties, smaller sizes first), and a status flag.
    """
    sigma = np.asarray(sigma, dtype=float)
    _check_pair(sigma, i, j, ())
    if i == j:
        raise InvalidParameter("pair statistics need distinct vertices")
    if statistic not in STATISTICS:
        raise InvalidParameter(f"statistic must be one of {STATISTICS}")
    if eta < 0:
        raise InvalidParameter("eta must be nonnegative")
    ctx = _ScanContext(sigma, cond_limit)
    return _scan_pair(ctx, i, j, eta, statistic, n, None, False)


def _resolve_source(source, config: EstimatorConfig):
    if config.exact_mode:
        if isinstance(source, GaussianModel):
            return source.sigma(), None
        arr = np.asarray(source, dtype=float)
        if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
            return arr, None
        raise InvalidParameter("exact mode needs a GaussianModel or a square covariance matrix")
    if isinstance(source, SampleSet):
        return source.empirical_covariance(), source.n
    arr = np.asarray(source, dtype=float)
    if arr.ndim == 2:
        return empirical_covariance(arr), arr.shape[0]
    raise InvalidParameter("sample mode needs a SampleSet or an (n, p) data matrix")


def _resolve_threshold(config: EstimatorConfig, n: int | None, p: int) -> float:
    if config.xi is not None:
        return config.xi
    if n is None:
        raise InvalidParameter("exact mode requires an explicit threshold xi")
    return default_threshold(n, p, config.kappa)


def cmit(source, config: EstimatorConfig) -> EstimationResult:
    """Run the conditional-statistic test over all pairs.

    ``source`` is a SampleSet or (n, p) data matrix in sample mode, and a
    GaussianModel or exact covariance matrix when ``config.exact_mode``.
    An edge is declared when the pair's minimized statistic strictly
    exceeds the threshold (xi for covariance, xi squared for mutual
    information).
    """
    start = time.perf_counter()
    sigma, n = _resolve_source(source, config)
    p = sigma.shape[0]
    if p < 2:
        raise InvalidParameter("need at least two variables")
    xi = _resolve_threshold(config, n, p)
    threshold = xi * xi if config.statistic == "mutual_information" else xi
    ctx = _ScanContext(sigma, config.cond_limit)
    all_pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]

    def work(pair):
        i, j = pair
        return pair, _scan_pair(
            ctx, i, j, config.eta, config.statistic, n,
            threshold if config.early_exit else None, config.early_exit,
        )

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            decisions = dict(pool.map(work, all_pairs))
    else:
        decisions = dict(map(work, all_pairs))

    edges = tuple(
        pair
        for pair in all_pairs
        if decisions[pair].status != "failed" and decisions[pair].value > threshold
    )
    return EstimationResult(
        p=p,
        edges=edges,
        threshold=threshold,
        statistic=config.statistic,
        eta=config.eta,
        pairs=decisions,
        n=n,
        elapsed_s=time.perf_counter() - start,
        config=config,
    )


def cmit_mi(source, config: EstimatorConfig) -> EstimationResult:
    """Mutual-information variant; same scan with the squared threshold."""
    return cmit(source, replace(config, statistic="mutual_information"))


@dataclass(frozen=True)
class OracleGap:
    """Exact-model margin between edges and non-edges.

    ``c_min`` is the smallest minimized |conditional covariance| over true
    edges; ``c_max`` the largest |conditional covariance| over non-edges at
    their locality-limited separators.  Recovery with a threshold inside
    (c_max, c_min) is guaranteed when separable.
    """

    c_min: float
    c_max: float
    separable: bool
    eta: int
    gamma: int
    c_min_pair: tuple[int, int] | None
    c_max_pair: tuple[int, int] | None

    @property
    def threshold_midpoint(self) -> float:
        return (self.c_min + self.c_max) / 2.0

    @property
    def threshold_geometric(self) -> float:
        return math.sqrt(self.c_min * self.c_max)


def oracle_gap(model: GaussianModel, eta: int, gamma: int) -> OracleGap:
    """Compute the recovery margin of a model at locality (eta, gamma).

    Edge statistics minimize over every subset of size <= eta; non-edge
    statistics are evaluated at the gamma-local separator of each pair.
    """
    sigma = model.sigma()
    g = model.graph
    c_min = math.inf
    c_min_pair = None
    for u, v in g.edges:
        dec = min_conditional_statistic(sigma, u, v, eta)
        if dec.value < c_min:
            c_min = dec.value
            c_min_pair = (u, v)
    c_max = 0.0
    c_max_pair = None
    for u in range(g.p):
        for v in range(u + 1, g.p):
            if g.has_edge(u, v):
                continue
            sep = local_separator(g, u, v, gamma)
            val = abs(conditional_covariance_exact(sigma, u, v, sep))
            if val > c_max:
                c_max = val
                c_max_pair = (u, v)
    return OracleGap(
        c_min=c_min,
        c_max=c_max,
        separable=c_min > c_max,
        eta=eta,
        gamma=gamma,
        c_min_pair=c_min_pair,
        c_max_pair=c_max_pair,
    )
