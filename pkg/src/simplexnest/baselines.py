"""Comparison estimators sharing the Dataset/fit-directory contracts.

GDM clusters the raw observations with plain Euclidean K-means and extends
rays from the data center through the centroids; it is accurate only for
near-equilateral simplices or tiny concentration. SPA greedily picks
maximal-norm rows and deflates, which requires near-separable data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._matrix_io import read_matrix_csv, write_matrix_csv
from .model import Dataset
from .numerics import kmeans
from .vlad import _lexsorted_columns, extend_rays


@dataclass(frozen=True)
class BaselineFit:
    vertices: np.ndarray  # (D, K)
    method_tag: str
    meta: dict


def gdm(
    data: Dataset,
    K: int,
    gamma: float,
    restarts: int = 8,
    rng: np.random.Generator | None = None,
    normalize: bool | None = None,
    method_tag: str = "gdm",
) -> BaselineFit:
    """Raw-space K-means centroids extended from the data center.

    Uses the identical extension arithmetic as the reduced-space estimator;
    the two differ only in clustering geometry. Pass a Monte-Carlo gamma
    estimate for the -MC variant and set ``method_tag`` accordingly.
    """
    if K < 2:
        raise ValueError("K must be >= 2")
    if data.n <= K:
        raise ValueError(f"need n > K observations, got n = {data.n}")
    X = data.fitting_matrix(normalize)
    if not np.all(np.isfinite(X)):
        raise ValueError("observations must be finite")
    km = kmeans(X, K, restarts=restarts, rng=rng)
    c0 = X.mean(axis=0)
    vertices = extend_rays(c0, km.centroids.T, gamma)
    order = _lexsorted_columns(vertices)
    return BaselineFit(
        vertices=vertices[:, order],
        method_tag=method_tag,
        meta={"gamma": float(gamma), "kmeans_cost": km.cost},
    )


def spa(data: Dataset, K: int, normalize: bool | None = None) -> BaselineFit:
    """Successive projection: greedy maximal-norm row selection.

    Repeatedly picks the row of largest Euclidean norm, records it as a
    vertex, and projects all rows onto the orthogonal complement of the
    picked row. Deterministic; raises when the data cannot supply K
    independent directions.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if data.n < K:
        raise ValueError(f"need n >= K observations, got n = {data.n}")
    X = data.fitting_matrix(normalize)
    R = np.array(X, dtype=float)
    scale = float(np.linalg.norm(R, axis=1).max())
    if scale == 0.0:
        raise ValueError("all-zero data has no extreme rows")
    chosen: list[int] = []
    for _ in range(K):
        norms = np.linalg.norm(R, axis=1)
        idx = int(np.argmax(norms))
        if norms[idx] <= 1e-12 * scale:
            raise ValueError(
                f"rank deficiency: only {len(chosen)} independent directions found, needed {K}"
            )
        chosen.append(idx)
        u = R[idx] / norms[idx]
        R = R - np.outer(R @ u, u)
    vertices = X[chosen].T
    order = _lexsorted_columns(vertices)
    return BaselineFit(
        vertices=vertices[:, order],
        method_tag="spa",
        meta={"rows": [chosen[i] for i in order]},
    )


def save_baseline(fit: BaselineFit, directory: str | Path, seed: int | None = None) -> Path:
    """Write vertices.csv + meta.json using the shared fit-directory layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(directory / "vertices.csv", fit.vertices)
    meta = {"method": fit.method_tag, "K": fit.vertices.shape[1], "seed": seed}
    meta.update({k: v for k, v in fit.meta.items() if isinstance(v, (bool, int, float, str, list))})
    with open(directory / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return directory


def load_vertices(path: str | Path) -> np.ndarray:
    """Read a vertices.csv (either a fit directory or the file itself)."""
    path = Path(path)
    if path.is_dir():
        path = path / "vertices.csv"
    return read_matrix_csv(path)
