"""Shared fixtures. The K=10 extension-parameter curve is expensive to
build, so it is computed once per session and reused by the identifiability
and concentration-recovery tests."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pytest

from simplexnest.extension import GammaTable, estimate_gamma

PHI_CURVE_SEED = 991
PHI_CURVE_M = 20_000


@dataclass(frozen=True)
class PhiCurve:
    alphas: np.ndarray
    gammas: np.ndarray
    stderrs: np.ndarray
    build_seconds: float

    def table(self) -> GammaTable:
        return GammaTable(K=10, alphas=self.alphas, gammas=self.gammas,
                          m=PHI_CURVE_M, seed=PHI_CURVE_SEED)


@pytest.fixture(scope="session")
def phi_curve_k10() -> PhiCurve:
    """gamma(alpha) with MC standard errors for K=10 over [0.1, 5]."""
    alphas = np.geomspace(0.1, 5.0, 40)
    children = np.random.SeedSequence(PHI_CURVE_SEED).spawn(alphas.size)

    def one(i: int):
        rng = np.random.default_rng(children[i])
        return estimate_gamma(10, float(alphas[i]), PHI_CURVE_M, rng, return_stderr=True)

    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=2) as pool:
        out = list(pool.map(one, range(alphas.size)))
    elapsed = time.perf_counter() - start
    gammas = np.asarray([g for g, _ in out])
    stderrs = np.asarray([s for _, s in out])
    return PhiCurve(alphas=alphas, gammas=gammas, stderrs=stderrs, build_seconds=elapsed)
