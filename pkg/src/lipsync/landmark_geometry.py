"""Similarity-frame normalization of 68-point face landmarks.

Landmarks follow the standard 68-point scheme. Indices in comments and
docstrings are the conventional 1-based ones (mouth = 49-68, outer lip
49-60, inner lip 61-68); arrays are stored 0-based, so the mouth occupies
rows 48-67.

The per-frame similarity frame is:

  center  mean of the 20 mouth points,
  theta   angle of the outer mouth-corner axis, point 49 -> point 55,
  scale   Frobenius norm of all 68 center-subtracted points
          (rotation-independent, so theta and scale commute).

``normalize`` maps points p to dimensionless vectors
v = R(-theta) @ (p - center) / scale, which is exactly invariant under any
similarity transform with positive scale. ``denormalize`` is the inverse
map applied to the 20 mouth points only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFace

MOUTH_SLICE = slice(48, 68)  # 1-based 49..68
OUTER_CORNER_LEFT = 48   # 1-based 49
OUTER_CORNER_RIGHT = 54  # 1-based 55

_EPS = 1e-12


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(theta, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.float64)


def as_landmarks(points) -> np.ndarray:
    """Validate and return a 68x2 float64 landmark array."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape != (68, 2):
        raise ValueError(f"expected 68x2 landmarks, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("landmarks contain non-finite values")
    return pts


@dataclass(frozen=True)
class NormalizationParams:
    """Per-frame similarity frame: mouth center, in-plane angle, scale."""

    center: np.ndarray  # (2,) pixels
    theta: float        # radians in (-pi, pi]
    scale: float        # pixels, > 0

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "theta": self.theta, "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationParams":
        return cls(
            center=np.asarray(d["center"], dtype=np.float64),
            theta=float(d["theta"]),
            scale=float(d["scale"]),
        )


@dataclass(frozen=True)
class NormalizedFace:
    """All 68 landmarks as dimensionless vectors plus the removed frame."""

    vectors: np.ndarray  # (68, 2)
    params: NormalizationParams


def estimate_frame(landmarks) -> NormalizationParams:
    """Estimate the similarity frame of one face.

    Raises DegenerateFace when the outer mouth corners coincide (theta
    undefined) or the point cloud collapses to its center (scale ~ 0).
    """
    pts = as_landmarks(landmarks)
    mouth = pts[MOUTH_SLICE]
    center = mouth.mean(axis=0)
    corner_vec = pts[OUTER_CORNER_RIGHT] - pts[OUTER_CORNER_LEFT]
    if math.hypot(corner_vec[0], corner_vec[1]) < _EPS:
        raise DegenerateFace("mouth corners coincide; rotation angle undefined")
    theta = wrap_angle(math.atan2(corner_vec[1], corner_vec[0]))
    scale = float(np.linalg.norm(pts - center))
    if scale < _EPS:
        raise DegenerateFace(f"landmark scale {scale:.3e} below {_EPS:.0e}")
    return NormalizationParams(center=center, theta=theta, scale=scale)


def normalize(landmarks) -> NormalizedFace:
    """Remove location, rotation, and size: v = R(-theta) (p - center) / scale."""
    pts = as_landmarks(landmarks)
    params = estimate_frame(pts)
    rot = rotation_matrix(-params.theta)
    vectors = (pts - params.center) @ rot.T / params.scale
    return NormalizedFace(vectors=vectors, params=params)


def mouth_shape(norm: NormalizedFace) -> np.ndarray:
    """Flatten the 20 normalized mouth points to the 40-D shape vector.

    Order is [x49, y49, ..., x68, y68] in 1-based landmark index order.
    """
    return norm.vectors[MOUTH_SLICE].reshape(40).copy()


def denormalize(shape, params: NormalizationParams) -> np.ndarray:
    """Map a 40-D mouth shape back to 20 pixel points in the given frame.

    p_i = scale * R(theta) @ v_i + center
    """
    vec = np.asarray(shape, dtype=np.float64)
    if vec.shape != (40,):
        raise ValueError(f"expected 40-D mouth shape, got shape {vec.shape}")
    if params.scale <= 0:
        raise ValueError("params.scale must be positive")
    v = vec.reshape(20, 2)
    rot = rotation_matrix(params.theta)
    return params.scale * (v @ rot.T) + params.center
