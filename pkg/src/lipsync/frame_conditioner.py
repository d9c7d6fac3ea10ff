"""Conditioning inputs for the mouth in-painting network.

A conditioned input is the face image with the mouth bounding box blanked
to black and the mouth outline drawn in white: two closed polylines, the
outer lip through points 49..60 and the inner lip through 61..68 (1-based
indices), rasterized 1 px wide by integer Bresenham stepping.

Boxes are half-open integer rectangles [x0, x1) x [y0, y1). Endpoints of
outline segments are the landmark coordinates rounded half-up to pixel
centers; drawn pixels are clipped to the blanked box so the input equals
the target exactly outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBox
from .landmark_geometry import MOUTH_SLICE, as_landmarks

BLANK_VALUE = 0.0
OUTLINE_VALUE = 1.0

# 0-based vertex orders of the two closed mouth polylines.
OUTER_LIP_LOOP = list(range(48, 60))
INNER_LIP_LOOP = list(range(60, 68))


@dataclass(frozen=True)
class MouthBBox:
    x0: int
    y0: int
    x1: int
    y1: int

    def contains_pixel(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "x1": self.x1, "y1": self.y1}


@dataclass(frozen=True)
class ConditionedPair:
    input_image: np.ndarray   # H x W x 3, mouth blanked + outline drawn
    target_image: np.ndarray  # original H x W x 3
    bbox: MouthBBox


def bbox_from_mouth_points(points: np.ndarray, expand: float, image_size) -> MouthBBox:
    """Half-open integer box around 20 mouth points, expanded per side.

    Each side grows by expand * (side length) before floor/ceil and
    clamping to the image. Raises EmptyBox if clamping collapses the box.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape != (20, 2):
        raise ValueError(f"expected 20 mouth points, got shape {pts.shape}")
    if expand < 0:
        raise ValueError("expand must be >= 0")
    w, h = image_size
    x_min, y_min = pts.min(axis=0)
    x_max, y_max = pts.max(axis=0)
    dx = expand * (x_max - x_min)
    dy = expand * (y_max - y_min)
    x0 = max(0, int(math.floor(x_min - dx)))
    y0 = max(0, int(math.floor(y_min - dy)))
    x1 = min(int(w), int(math.ceil(x_max + dx)))
    y1 = min(int(h), int(math.ceil(y_max + dy)))
    if x0 >= x1 or y0 >= y1:
        raise EmptyBox(f"box [{x0},{x1})x[{y0},{y1}) is empty after clamping to {w}x{h}")
    return MouthBBox(x0=x0, y0=y0, x1=x1, y1=y1)


def mouth_bbox(landmarks, expand: float = 0.3, image_size=(64, 64)) -> MouthBBox:
    """Bounding box around the 20 mouth landmarks of a 68-point face."""
    pts = as_landmarks(landmarks)
    return bbox_from_mouth_points(pts[MOUTH_SLICE], expand, image_size)


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def bresenham_segment(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Integer line pixels from (x0,y0) to (x1,y1), endpoints included.

    Classic error-accumulation form; on exact half-step ties the minor
    coordinate advances (ties round toward the direction of travel).
    """
    pixels = []
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x1 >= x0 else -1
    sy = 1 if y1 >= y0 else -1
    x, y = x0, y0
    if dx >= dy:
        err = 2 * dy - dx
        for _ in range(dx + 1):
            pixels.append((x, y))
            if err >= 0:
                y += sy
                err -= 2 * dx
            err += 2 * dy
            x += sx
    else:
        err = 2 * dx - dy
        for _ in range(dy + 1):
            pixels.append((x, y))
            if err >= 0:
                x += sx
                err -= 2 * dy
            err += 2 * dx
            y += sy
    return pixels


def _closed_loop_pixels(points_px: list[tuple[int, int]]) -> set[tuple[int, int]]:
    pixels: set[tuple[int, int]] = set()
    n = len(points_px)
    for i in range(n):
        x0, y0 = points_px[i]
        x1, y1 = points_px[(i + 1) % n]
        pixels.update(bresenham_segment(x0, y0, x1, y1))
    return pixels


def outline_pixels(mouth_points: np.ndarray, clip: MouthBBox | None = None) -> set[tuple[int, int]]:
    """Pixel set of both closed lip polylines for 20 mouth points."""
    pts = np.asarray(mouth_points, dtype=np.float64)
    if pts.shape != (20, 2):
        raise ValueError(f"expected 20 mouth points, got shape {pts.shape}")
    rounded = [(_round_half_up(x), _round_half_up(y)) for x, y in pts]
    pixels = _closed_loop_pixels([rounded[i - 48] for i in OUTER_LIP_LOOP])
    pixels |= _closed_loop_pixels([rounded[i - 48] for i in INNER_LIP_LOOP])
    if clip is not None:
        pixels = {(x, y) for x, y in pixels if clip.contains_pixel(x, y)}
    return pixels


def draw_mouth_outline(canvas: np.ndarray, landmarks, clip: MouthBBox | None = None) -> np.ndarray:
    """Draw both lip loops in white on the canvas (in place); idempotent."""
    pts = as_landmarks(landmarks)
    h, w = canvas.shape[:2]
    mouth = pts[MOUTH_SLICE]
    if mouth[:, 0].min() < 0 or mouth[:, 0].max() >= w or mouth[:, 1].min() < 0 or mouth[:, 1].max() >= h:
        raise ValueError("mouth points outside canvas")
    for x, y in outline_pixels(mouth, clip):
        if 0 <= x < w and 0 <= y < h:
            canvas[y, x] = OUTLINE_VALUE
    return canvas


def conditioned_input_from_points(image: np.ndarray, mouth_points: np.ndarray,
                                  expand: float = 0.3) -> tuple[np.ndarray, MouthBBox]:
    """Blank the mouth box of a copy of `image` and draw the outline inside it."""
    h, w = image.shape[:2]
    bbox = bbox_from_mouth_points(mouth_points, expand, (w, h))
    out = image.copy()
    out[bbox.y0 : bbox.y1, bbox.x0 : bbox.x1] = BLANK_VALUE
    for x, y in outline_pixels(mouth_points, clip=bbox):
        out[y, x] = OUTLINE_VALUE
    return out, bbox


def make_conditioned_pair(image: np.ndarray, landmarks, expand: float = 0.3) -> ConditionedPair:
    """Build one training pair: blanked-and-outlined input vs original image."""
    pts = as_landmarks(landmarks)
    inp, bbox = conditioned_input_from_points(image, pts[MOUTH_SLICE], expand)
    return ConditionedPair(input_image=inp, target_image=image.copy(), bbox=bbox)
