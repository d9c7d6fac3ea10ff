"""Deterministic PCA over 40-D mouth-shape vectors.

The basis is the eigendecomposition of the sample covariance (divisor
N-1), rows ordered by descending variance. Component signs are pinned by
a convention: the largest-magnitude entry of each row is made positive,
ties broken toward the lowest index. This keeps checkpoints reproducible
across runs even though eigenvector signs are mathematically arbitrary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadRank, DegenerateData

DIM = 40


@dataclass(frozen=True)
class PcaBasis:
    mean: np.ndarray          # (40,)
    components: np.ndarray    # (k, 40), orthonormal rows
    variances: np.ndarray     # (k,), non-increasing
    total_variance: float

    @property
    def k(self) -> int:
        return self.components.shape[0]

    def explained_ratios(self) -> np.ndarray:
        return self.variances / self.total_variance

    def save(self, path) -> None:
        payload = {
            "k": self.k,
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "variances": self.variances.tolist(),
            "total_variance": self.total_variance,
        }
        with open(path, "w", encoding="ascii") as f:
            json.dump(payload, f, sort_keys=True)

    @classmethod
    def load(cls, path) -> "PcaBasis":
        with open(path, "r", encoding="ascii") as f:
            payload = json.load(f)
        return cls(
            mean=np.asarray(payload["mean"], dtype=np.float64),
            components=np.asarray(payload["components"], dtype=np.float64),
            variances=np.asarray(payload["variances"], dtype=np.float64),
            total_variance=float(payload["total_variance"]),
        )


def _fix_signs(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for row in out:
        j = int(np.argmax(np.abs(row)))  # first occurrence wins ties
        if row[j] < 0:
            row *= -1.0
    return out


def fit_pca(samples: np.ndarray, k: int) -> PcaBasis:
    """Fit a k-component basis to an N x 40 sample matrix.

    Raises BadRank for k outside 1..40 and DegenerateData when fewer than
    two samples are given or total variance vanishes.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != DIM:
        raise ValueError(f"expected N x {DIM} samples, got shape {x.shape}")
    if not (1 <= k <= DIM):
        raise BadRank(f"k must be in 1..{DIM}, got {k}")
    n = x.shape[0]
    if n < 2:
        raise DegenerateData(f"need at least 2 samples, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    total = float(np.trace(cov))
    if total <= 1e-12:
        raise DegenerateData(f"total variance {total:.3e} is below 1e-12")
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(-eigvals, kind="stable")[:k]  # ties keep lowest index first
    variances = np.maximum(eigvals[order], 0.0)
    components = _fix_signs(eigvecs[:, order].T)
    return PcaBasis(mean=mean, components=components, variances=variances, total_variance=total)


def project(basis: PcaBasis, shape: np.ndarray) -> np.ndarray:
    """Coefficients of one 40-D shape: components @ (shape - mean)."""
    vec = np.asarray(shape, dtype=np.float64)
    if vec.shape != (DIM,):
        raise ValueError(f"expected 40-D shape, got {vec.shape}")
    return basis.components @ (vec - basis.mean)


def project_many(basis: PcaBasis, shapes: np.ndarray) -> np.ndarray:
    """Row-wise projection of an N x 40 matrix to N x k coefficients."""
    mat = np.asarray(shapes, dtype=np.float64)
    return (mat - basis.mean) @ basis.components.T


def reconstruct(basis: PcaBasis, coeffs: np.ndarray) -> np.ndarray:
    """Shape from coefficients: mean + components^T @ values."""
    values = np.asarray(coeffs, dtype=np.float64)
    if values.shape != (basis.k,):
        raise ValueError(f"expected {basis.k} coefficients, got shape {values.shape}")
    return basis.mean + basis.components.T @ values
