"""Scores for fitted simplices.

Minimum-matching distance between vertex sets (bottleneck headline form
plus the stacked Frobenius form), average held-out projection distance,
kernel likelihood scores, and simplex volume.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import Dataset, affine_rank_deficient
from .vlad import simplex_least_squares

_BRUTE_FORCE_MAX_K = 7
_LOG_FLOOR = 1e-12


class MinMatch(NamedTuple):
    """Both matching forms; ``permutation`` realizes the headline max form.

    ``permutation[k]`` is the column of the first argument matched to
    column k of the second.
    """

    distance: float     # min over permutations of the max column distance
    permutation: np.ndarray
    frobenius: float    # min over permutations of the stacked Frobenius norm


def _pairwise_column_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    diff = A.T[:, None, :] - B.T[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def _bottleneck_assignment(M: np.ndarray) -> tuple[float, np.ndarray]:
    """Threshold search: smallest max edge admitting a perfect matching."""
    K = M.shape[0]
    values = np.unique(M)
    lo, hi = 0, values.size - 1
    big = float((M**2).max()) * K + 1.0

    def feasible(t: float) -> bool:
        mask = np.where(M <= t, 0.0, 1.0)
        rows, cols = linear_sum_assignment(mask)
        return float(mask[rows, cols].sum()) == 0.0

    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(float(values[mid])):
            hi = mid
        else:
            lo = mid + 1
    t = float(values[lo])
    cost = np.where(M <= t, M**2, big)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(K, dtype=int)
    perm[cols] = rows
    return t, perm


def min_matching(A: np.ndarray, B: np.ndarray, method: str = "auto") -> MinMatch:
    """Permutation-minimized distance between two vertex sets (columns).

    The headline distance is min over permutations of the worst matched
    pair; the Frobenius field is the stacked-matrix form min over
    permutations of ||A_pi - B||_F (its optimal permutation may differ).
    ``method`` forces "brute" (K! enumeration) or "hungarian" (assignment +
    bottleneck threshold search); "auto" enumerates up to K = 7.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2:
        raise ValueError(f"vertex sets must share one (D, K) shape, got {A.shape} vs {B.shape}")
    K = A.shape[1]
    M = _pairwise_column_distances(A, B)

    rows, cols = linear_sum_assignment(M**2)
    frobenius = float(np.sqrt((M[rows, cols] ** 2).sum()))

    if method not in ("auto", "brute", "hungarian"):
        raise ValueError(f"unknown method {method!r}")
    use_brute = method == "brute" or (method == "auto" and K <= _BRUTE_FORCE_MAX_K)
    if use_brute:
        best_val = np.inf
        best_perm: tuple[int, ...] | None = None
        for p in itertools.permutations(range(K)):
            val = max(M[p[j], j] for j in range(K))
            if val < best_val:
                best_val = val
                best_perm = p
        distance = float(best_val)
        perm = np.asarray(best_perm, dtype=int)
    else:
        distance, perm = _bottleneck_assignment(M)
    return MinMatch(distance=distance, permutation=perm, frobenius=frobenius)


def _vertices_of(fit) -> np.ndarray:
    if hasattr(fit, "vertices"):
        return np.asarray(fit.vertices, dtype=float)
    return np.asarray(fit, dtype=float)


def heldout_frobenius(fit_vertices, X_test: np.ndarray) -> float:
    """Mean Euclidean distance from test rows to the fitted simplex."""
    B = _vertices_of(fit_vertices)
    if affine_rank_deficient(B):
        raise ValueError("degenerate simplex")
    X = np.atleast_2d(np.asarray(X_test, dtype=float))
    theta = simplex_least_squares(B, X)
    residual = X - theta @ B.T
    return float(np.linalg.norm(residual, axis=1).mean())


def simplex_volume(vertices) -> float:
    """(K-1)-dimensional volume sqrt(det(G^T G)) / (K-1)!.

    G stacks the edge vectors from the first vertex; degenerate vertex sets
    return 0.
    """
    V = _vertices_of(vertices)
    K = V.shape[1]
    if K < 2:
        raise ValueError("K must be >= 2")
    G = V[:, 1:] - V[:, :1]
    gram = G.T @ G
    det = float(np.linalg.det(gram))
    return math.sqrt(max(det, 0.0)) / math.factorial(K - 1)


@dataclass(frozen=True)
class LikelihoodReport:
    kind: str      # "frobenius" | "nll" | "perplexity"
    value: float
    floored: int   # log arguments clipped up to the floor


def heldout_likelihood(fit, test: Dataset, normalize: bool | None = None) -> LikelihoodReport:
    """Kernel-appropriate held-out score under the fitted simplex.

    Weights come from projecting each test row onto the fitted simplex;
    the implied mean is mu = B theta. Gaussian and noiseless data score the
    mean squared residual, Poisson data the mean of sum(mu - x log mu)
    (log-factorial constant omitted), multinomial data the perplexity
    exp(-sum(x log mu) / total count). Non-positive entries hitting log are
    floored at 1e-12 and counted, never silently dropped.
    """
    B = _vertices_of(fit)
    X = test.fitting_matrix(normalize)
    theta = simplex_least_squares(B, X)
    mu = theta @ B.T
    kern = test.kernel

    if kern.name in ("gaussian", "noiseless"):
        value = float(((X - mu) ** 2).sum(axis=1).mean())
        return LikelihoodReport("frobenius", value, 0)

    floored = int(np.count_nonzero(mu < _LOG_FLOOR))
    mu_safe = np.maximum(mu, _LOG_FLOOR)
    if kern.name == "poisson":
        counts = test.observations
        nll = float((mu_safe - counts * np.log(mu_safe)).sum(axis=1).mean())
        return LikelihoodReport("nll", nll, floored)
    if kern.name == "multinomial":
        counts = test.observations
        total = float(counts.sum())
        log_lik = float((counts * np.log(mu_safe)).sum())
        return LikelihoodReport("perplexity", math.exp(-log_lik / total), floored)
    raise ValueError(f"unknown kernel {kern.name!r}")


@dataclass
class EvalReport:
    """One row of scores for a fitted vertex set."""

    mm_distance: float | None = None
    mm_permutation: list[int] | None = None
    mm_frobenius: float | None = None
    frobenius_heldout: float | None = None
    nll: float | None = None
    perplexity: float | None = None
    volume: float | None = None
    wall_time_s: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mm_distance": self.mm_distance,
            "mm_permutation": self.mm_permutation,
            "mm_frobenius": self.mm_frobenius,
            "frobenius_heldout": self.frobenius_heldout,
            "nll": self.nll,
            "perplexity": self.perplexity,
            "volume": self.volume,
            "wall_time_s": self.wall_time_s,
            "diagnostics": self.diagnostics,
        }


METRIC_NAMES = ("mm", "heldout", "volume", "likelihood")


def evaluate_fit(
    fit,
    dataset: Dataset | None = None,
    heldout: Dataset | None = None,
    metrics: tuple[str, ...] = ("mm", "volume"),
    wall_time_s: float | None = None,
    normalize: bool | None = None,
) -> EvalReport:
    """Compute the requested metrics for one fitted vertex set.

    "mm" needs ``dataset`` with a truth block; "heldout" and "likelihood"
    need ``heldout`` observations. Only evaluation touches ground truth.
    """
    report = EvalReport(wall_time_s=wall_time_s)
    vertices = _vertices_of(fit)
    for name in metrics:
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")
    if "mm" in metrics:
        if dataset is None or dataset.truth is None:
            raise ValueError("the mm metric needs a dataset with ground truth")
        match = min_matching(vertices, dataset.truth.simplex.vertices)
        report.mm_distance = match.distance
        report.mm_permutation = [int(i) for i in match.permutation]
        report.mm_frobenius = match.frobenius
    if "volume" in metrics:
        report.volume = simplex_volume(vertices)
    if "heldout" in metrics:
        if heldout is None:
            raise ValueError("the heldout metric needs held-out observations")
        report.frobenius_heldout = heldout_frobenius(vertices, heldout.fitting_matrix(normalize))
    if "likelihood" in metrics:
        if heldout is None:
            raise ValueError("the likelihood metric needs held-out observations")
        like = heldout_likelihood(fit, heldout, normalize=normalize)
        if like.kind == "perplexity":
            report.perplexity = like.value
        else:
            report.nll = like.value
        if like.floored:
            report.diagnostics["log_floored_entries"] = like.floored
    return report
