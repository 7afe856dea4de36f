"""Concentration-parameter estimation by moment matching.

The model-implied covariance of the latent means is B S(alpha) B^T with
S(alpha) the symmetric-Dirichlet covariance. Each kernel contributes extra
observation noise, so the sample covariance is first corrected to a
consistent estimate of B S(alpha) B^T; alpha is then the scalar minimizer
of the Frobenius mismatch between the corrected target and the covariance
implied by re-extending the fitted centroids with gamma(alpha).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .extension import GammaTable
from .model import Dataset, Kernel, dirichlet_covariance
from .numerics import sample_covariance

if TYPE_CHECKING:  # pragma: no cover
    from .vlad import VladFit

GRID_SCAN_POINTS = 64
GOLDEN_REL_TOL = 1e-4


@dataclass(frozen=True)
class MomentTarget:
    """Noise-corrected covariance target; a consistent estimate of B S B^T."""

    sigma_tilde: np.ndarray
    kernel: Kernel
    correction_meta: dict


def corrected_covariance(
    data: Dataset,
    K: int,
    kernel: Kernel | None = None,
    normalize: bool | None = None,
) -> MomentTarget:
    """Kernel-specific correction of the sample covariance.

    - noiseless: the sample covariance itself.
    - gaussian: subtract sigma2_hat * I, with sigma2_hat the mean of the
      D - (K-1) trailing eigenvalues (the model puts all signal in the top
      K-1 directions, so trailing eigenvalues estimate the noise floor).
    - poisson: subtract Diag of the column means.
    - multinomial: invert (1 - 1/N) B S B^T + (1/N) Diag(m) - (1/N) m m^T
      for B S B^T on observations normalized by the trial count N.

    Negative eigenvalues introduced by the subtraction are left in place;
    the scalar moment objective tolerates them and projecting them out
    would bias the match.
    """
    if data.n < 2:
        raise ValueError("need at least 2 observations")
    kern = data.kernel if kernel is None else kernel
    if kern.name == "multinomial" and normalize is False:
        raise ValueError("the multinomial correction is defined on normalized observations")
    X = data.fitting_matrix(normalize)
    sigma_hat = sample_covariance(X)
    D = X.shape[1]

    if kern.name == "noiseless":
        return MomentTarget(sigma_hat, kern, {})
    if kern.name == "gaussian":
        if D <= K - 1:
            raise ValueError("need D > K - 1 to estimate the noise variance from trailing eigenvalues")
        eigs = np.linalg.eigvalsh(sigma_hat)
        sigma2 = float(eigs[: D - (K - 1)].mean())
        target = sigma_hat - sigma2 * np.eye(D)
        return MomentTarget(target, kern, {"sigma2_hat": sigma2})
    if kern.name == "poisson":
        col_means = X.mean(axis=0)
        target = sigma_hat - np.diag(col_means)
        return MomentTarget(target, kern, {"column_means": col_means})
    if kern.name == "multinomial":
        N = int(kern.trials)
        if N <= 1:
            raise ValueError("multinomial correction requires N > 1 trials")
        m = X.mean(axis=0)
        target = (sigma_hat - np.diag(m) / N + np.outer(m, m) / N) / (1.0 - 1.0 / N)
        return MomentTarget(target, kern, {"N": N})
    raise ValueError(f"unknown kernel {kern.name!r}")


def _implied_covariance(centroids: np.ndarray, center: np.ndarray, gamma: float, alpha: float) -> np.ndarray:
    """Covariance implied by re-extending the centroids with gamma at alpha."""
    K = centroids.shape[1]
    B_hat = center[:, None] + gamma * (centroids - center[:, None])
    S = dirichlet_covariance(K, alpha)
    return B_hat @ S @ B_hat.T


def gmm_objective(fit: "VladFit", target: MomentTarget, table: GammaTable, alphas) -> np.ndarray:
    """Frobenius moment mismatch at each alpha; no refitting involved."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    gammas = np.interp(alphas, table.alphas, table.gammas)
    out = np.empty(alphas.shape)
    for i, (a, g) in enumerate(zip(alphas, gammas)):
        M = _implied_covariance(fit.cvt_centroids, fit.center, float(g), float(a))
        out[i] = np.linalg.norm(M - target.sigma_tilde, "fro")
    return out


def estimate_alpha(
    fit: "VladFit",
    target: MomentTarget,
    table: GammaTable,
    search: tuple[float, float] = (0.02, 10.0),
) -> float:
    """Scalar moment-matching estimate of the concentration parameter.

    A 64-point log-spaced scan over the search interval brackets the
    minimum (guarding against local dips), then golden-section search over
    log(alpha) refines it to relative tolerance 1e-4. Evaluations reuse the
    centroids and center of the single fit that was already run.
    """
    lo, hi = float(search[0]), float(search[1])
    if not (0.0 < lo < hi):
        raise ValueError("search interval must satisfy 0 < lo < hi")
    if table.K != fit.n_vertices:
        raise ValueError(f"gamma table K = {table.K} does not match fit K = {fit.n_vertices}")
    if not table.covers(lo, hi):
        raise ValueError(
            f"search interval [{lo}, {hi}] is outside the tabulated range "
            f"[{table.alpha_min}, {table.alpha_max}]"
        )

    grid = np.geomspace(lo, hi, GRID_SCAN_POINTS)
    values = gmm_objective(fit, target, table, grid)
    best = int(np.argmin(values))
    a = np.log(grid[max(best - 1, 0)])
    b = np.log(grid[min(best + 1, grid.size - 1)])

    def f(log_alpha: float) -> float:
        return float(gmm_objective(fit, target, table, np.exp(log_alpha))[0])

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > GOLDEN_REL_TOL:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return float(np.exp((a + b) / 2.0))
