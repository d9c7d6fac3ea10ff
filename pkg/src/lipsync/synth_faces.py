"""Parametric cartoon-face generator with exact ground-truth landmarks.

Every face is defined by a closed-form 68-point layout in a canonical
frame (origin at face center, y down, unit = face half-height), then
mapped to pixels by the similarity p = center + scale * R(rotation) @ b.
Images are flat-shaded polygons rasterized by an even-odd scanline fill
with no anti-aliasing, so renders are bit-exact across runs.

Canonical layout (1-based landmark indices):

  jaw 1-17        ellipse arc (-FACE_RX cos t, b_jaw sin t), t = pi*(i-1)/16,
                  b_jaw = 0.92 + 0.16*jaw
  brows 18-27     five points per brow, x linspace +-[0.20, 0.60],
                  y = BROW_Y - arch[j], arch = (0, .05, .07, .05, 0)
  nose 28-31      bridge at x = 0, y linspace(-0.42, 0.02, 4)
  nose 32-36      base row y = 0.12, x = (-.12, -.06, 0, .06, .12)
  eyes 37-48      six points per eye on an ellipse (EYE_RX, EYE_RY) around
                  (-+0.36, -0.38), angles pi + j*pi/3
  mouth 49-68     arcs around (0, MOUTH_Y); with half-width
                  w = 0.22 + 0.16*mouth_wide, corner lift
                  c(u) = cL*(1-u)/2 + cR*(1+u)/2 where
                  cL = -0.07*smile + 0.05*asymmetry,
                  cR = -0.07*smile - 0.05*asymmetry,
                  blend(u) = 1 - u^2 (outer), 1 - (u/0.78)^2 (inner),
                  inner half-gap g/2 with g = 0.02 + 0.20*mouth_open:
    outer top    49-55 at u = -1..1 step 1/3:   (w u, c(u) - (0.075 + g/2) blend)
    outer bottom 56-60 at u = 2/3..-2/3:        (w u, c(u) + (0.095 + g/2 + 0.08*jaw) blend)
    inner top    61-65 at u = -0.78..0.78:      (w u, c(u) - (g/2) blend_in)
    inner bottom 66-68 at u = 0.39, 0, -0.39:   (w u, c(u) + (g/2 + 0.08*jaw) blend_in)

The inner-lip vertical gap (point 67 minus point 63) is therefore exactly
gap(params) = (0.02 + 0.20*mouth_open + 0.08*jaw) * scale pixels, which
tests use as the layout oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfFrame
from .landmark_geometry import rotation_matrix

FACE_RX = 0.78
FOREHEAD_RY = 0.95
BROW_Y = -0.52
EYE_CX, EYE_CY = 0.36, -0.38
EYE_RX, EYE_RY = 0.14, 0.07
MOUTH_Y = 0.52
LIP_TOP = 0.075
LIP_BOT = 0.095
GAP_MIN, GAP_RANGE = 0.02, 0.20
JAW_DROP = 0.08
SMILE_AMP, ASYM_AMP = 0.07, 0.05
INNER_FRAC = 0.78

BG_COLOR = (0.86, 0.88, 0.90)
SKIN_COLOR = (0.94, 0.80, 0.66)
BROW_COLOR = (0.25, 0.18, 0.12)
SCLERA_COLOR = (0.98, 0.98, 0.98)
PUPIL_COLOR = (0.10, 0.10, 0.12)
NOSE_COLOR = (0.82, 0.66, 0.52)
LIP_COLOR = (0.75, 0.30, 0.30)
MOUTH_DARK = (0.25, 0.08, 0.10)

# (a, b) pairs of 1-based indices swapped by mirroring about the face midline.
MIRROR_PAIRS = (
    [(i, 18 - i) for i in range(1, 9)]
    + [(18, 27), (19, 26), (20, 25), (21, 24), (22, 23)]
    + [(32, 36), (33, 35)]
    + [(37, 46), (38, 45), (39, 44), (40, 43), (41, 48), (42, 47)]
    + [(49, 55), (50, 54), (51, 53), (60, 56), (59, 57)]
    + [(61, 65), (62, 64), (68, 66)]
)
MIRROR_SELF = (9, 28, 29, 30, 31, 34, 52, 58, 63, 67)


@dataclass(frozen=True)
class FaceParams:
    """Latent + pose parameters of one synthetic face."""

    mouth_open: float = 0.3   # [0, 1]
    mouth_wide: float = 0.5   # [0, 1]
    smile: float = 0.0        # [-1, 1]
    jaw: float = 0.3          # [0, 1]
    asymmetry: float = 0.0    # [-1, 1]
    center: tuple[float, float] = (32.0, 32.0)  # pixels
    rotation: float = 0.0     # radians
    scale: float = 21.0       # pixels, face half-height
    image_size: tuple[int, int] = (64, 64)      # (W, H)

    def validate(self) -> None:
        w, h = self.image_size
        if w < 32 or h < 32:
            raise ValueError(f"image_size must be >= 32x32, got {self.image_size}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not (0 <= self.center[0] < w and 0 <= self.center[1] < h):
            raise ValueError(f"center {self.center} outside image {self.image_size}")
        for name, lo, hi in (
            ("mouth_open", 0, 1), ("mouth_wide", 0, 1), ("jaw", 0, 1),
            ("smile", -1, 1), ("asymmetry", -1, 1),
        ):
            v = getattr(self, name)
            if not (lo <= v <= hi):
                raise ValueError(f"{name}={v} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class SyntheticSample:
    image: np.ndarray       # H x W x 3 in [0, 1]
    landmarks: np.ndarray   # 68 x 2 pixels
    params: FaceParams


def inner_lip_gap(params: FaceParams) -> float:
    """Vertical inner-lip gap (point 67 minus 63) in pixels, closed form."""
    return (GAP_MIN + GAP_RANGE * params.mouth_open + JAW_DROP * params.jaw) * params.scale


def _canonical_layout(p: FaceParams) -> np.ndarray:
    pts = np.zeros((68, 2), dtype=np.float64)
    b_jaw = 0.92 + 0.16 * p.jaw
    t = np.pi * np.arange(17) / 16.0
    pts[0:17, 0] = -FACE_RX * np.cos(t)
    pts[0:17, 1] = b_jaw * np.sin(t)

    arch = np.array([0.0, 0.05, 0.07, 0.05, 0.0])
    pts[17:22, 0] = np.linspace(-0.60, -0.20, 5)
    pts[22:27, 0] = np.linspace(0.20, 0.60, 5)
    pts[17:22, 1] = BROW_Y - arch
    pts[22:27, 1] = BROW_Y - arch

    pts[27:31, 0] = 0.0
    pts[27:31, 1] = np.linspace(-0.42, 0.02, 4)
    pts[31:36, 0] = np.array([-0.12, -0.06, 0.0, 0.06, 0.12])
    pts[31:36, 1] = 0.12

    ang = np.pi + np.arange(6) * np.pi / 3.0
    eye = np.stack([EYE_RX * np.cos(ang), EYE_RY * np.sin(ang)], axis=1)
    pts[36:42] = eye + np.array([-EYE_CX, EYE_CY])
    pts[42:48] = eye + np.array([EYE_CX, EYE_CY])

    w = 0.22 + 0.16 * p.mouth_wide
    g = GAP_MIN + GAP_RANGE * p.mouth_open
    c_l = -SMILE_AMP * p.smile + ASYM_AMP * p.asymmetry
    c_r = -SMILE_AMP * p.smile - ASYM_AMP * p.asymmetry

    def corner(u):
        return c_l * (1.0 - u) / 2.0 + c_r * (1.0 + u) / 2.0

    u_top = np.linspace(-1.0, 1.0, 7)
    blend = 1.0 - u_top**2
    pts[48:55, 0] = w * u_top
    pts[48:55, 1] = corner(u_top) - (LIP_TOP + g / 2.0) * blend

    u_bot = np.array([2 / 3, 1 / 3, 0.0, -1 / 3, -2 / 3])
    blend = 1.0 - u_bot**2
    pts[55:60, 0] = w * u_bot
    pts[55:60, 1] = corner(u_bot) + (LIP_BOT + g / 2.0 + JAW_DROP * p.jaw) * blend

    u_in = INNER_FRAC * np.linspace(-1.0, 1.0, 5)
    blend = 1.0 - (u_in / INNER_FRAC) ** 2
    pts[60:65, 0] = w * u_in
    pts[60:65, 1] = corner(u_in) - (g / 2.0) * blend

    u_inb = INNER_FRAC * np.array([0.5, 0.0, -0.5])
    blend = 1.0 - (u_inb / INNER_FRAC) ** 2
    pts[65:68, 0] = w * u_inb
    pts[65:68, 1] = corner(u_inb) + (g / 2.0 + JAW_DROP * p.jaw) * blend

    pts[48:68, 1] += MOUTH_Y
    return pts


def face_landmarks(params: FaceParams) -> np.ndarray:
    """Closed-form 68x2 pixel landmarks for the given parameters."""
    params.validate()
    base = _canonical_layout(params)
    rot = rotation_matrix(params.rotation)
    return params.scale * (base @ rot.T) + np.asarray(params.center, dtype=np.float64)


def _fill_polygon(img: np.ndarray, poly: np.ndarray, color) -> None:
    """Even-odd scanline fill at pixel centers; no anti-aliasing."""
    h, w = img.shape[:2]
    ys = poly[:, 1]
    y_lo = max(0, int(math.floor(ys.min() - 0.5)))
    y_hi = min(h - 1, int(math.ceil(ys.max() + 0.5)))
    n = len(poly)
    col = np.asarray(color, dtype=np.float64)
    for y in range(y_lo, y_hi + 1):
        yc = y + 0.5
        xs = []
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            if (y1 <= yc < y2) or (y2 <= yc < y1):
                xs.append(x1 + (yc - y1) * (x2 - x1) / (y2 - y1))
        xs.sort()
        for j in range(0, len(xs) - 1, 2):
            # pixel centers x+0.5 in [xs[j], xs[j+1])
            x_start = max(0, int(math.ceil(xs[j] - 0.5)))
            x_end = min(w, int(math.ceil(xs[j + 1] - 0.5)))
            if x_end > x_start:
                img[y, x_start:x_end] = col


def _band(points: np.ndarray, half_width: float) -> np.ndarray:
    """Closed band polygon around a polyline: offset +-half_width in y."""
    up = points + np.array([0.0, -half_width])
    dn = points + np.array([0.0, half_width])
    return np.vstack([up, dn[::-1]])


def _ellipse_poly(cx: float, cy: float, rx: float, ry: float, n: int = 32) -> np.ndarray:
    a = 2.0 * np.pi * np.arange(n) / n
    return np.stack([cx + rx * np.cos(a), cy + ry * np.sin(a)], axis=1)


def render_face(params: FaceParams) -> SyntheticSample:
    """Rasterize one face; deterministic, anti-aliasing off.

    Raises OutOfFrame if any of the 68 landmarks leaves the image.
    """
    params.validate()
    w, h = params.image_size
    landmarks = face_landmarks(params)
    if (
        landmarks[:, 0].min() < 0 or landmarks[:, 0].max() >= w
        or landmarks[:, 1].min() < 0 or landmarks[:, 1].max() >= h
    ):
        raise OutOfFrame(
            f"landmarks span x [{landmarks[:, 0].min():.1f}, {landmarks[:, 0].max():.1f}] "
            f"y [{landmarks[:, 1].min():.1f}, {landmarks[:, 1].max():.1f}] "
            f"outside {w}x{h} image"
        )

    def to_px(canon: np.ndarray) -> np.ndarray:
        rot = rotation_matrix(params.rotation)
        return params.scale * (canon @ rot.T) + np.asarray(params.center)

    img = np.empty((h, w, 3), dtype=np.float64)
    img[:] = BG_COLOR

    b_jaw = 0.92 + 0.16 * params.jaw
    a = 2.0 * np.pi * np.arange(64) / 64.0
    ry = np.where(np.sin(a) > 0, b_jaw, FOREHEAD_RY)
    head = np.stack([-FACE_RX * np.cos(a), ry * np.sin(a)], axis=1)
    _fill_polygon(img, to_px(head), SKIN_COLOR)

    base = _canonical_layout(params)
    _fill_polygon(img, to_px(_band(base[17:22], 0.025)), BROW_COLOR)
    _fill_polygon(img, to_px(_band(base[22:27], 0.025)), BROW_COLOR)

    _fill_polygon(img, to_px(base[36:42]), SCLERA_COLOR)
    _fill_polygon(img, to_px(base[42:48]), SCLERA_COLOR)
    _fill_polygon(img, to_px(_ellipse_poly(-EYE_CX, EYE_CY, 0.04, 0.04, 16)), PUPIL_COLOR)
    _fill_polygon(img, to_px(_ellipse_poly(EYE_CX, EYE_CY, 0.04, 0.04, 16)), PUPIL_COLOR)

    bridge = np.array([[-0.025, -0.42], [0.025, -0.42], [0.025, 0.02], [-0.025, 0.02]])
    _fill_polygon(img, to_px(bridge), NOSE_COLOR)
    _fill_polygon(img, to_px(_band(base[31:36], 0.02)), NOSE_COLOR)

    _fill_polygon(img, to_px(base[48:60]), LIP_COLOR)
    _fill_polygon(img, to_px(base[60:68]), MOUTH_DARK)

    return SyntheticSample(image=img, landmarks=landmarks, params=params)


NEUTRAL = FaceParams()

# Latent order used by sample_corpus: which parameter each latent dim drives.
LATENT_NAMES = ("mouth_open", "mouth_wide", "smile", "asymmetry", "jaw")
LATENT_RANGES = {
    "mouth_open": (0.05, 0.95),
    "mouth_wide": (0.15, 0.85),
    "smile": (-0.7, 0.7),
    "asymmetry": (-0.6, 0.6),
    "jaw": (0.05, 0.95),
}


def sample_params(
    rng: np.random.Generator,
    latent_dims: int = 5,
    image_size: tuple[int, int] = (64, 64),
    vary_pose: bool = True,
) -> FaceParams:
    """Draw one FaceParams: first `latent_dims` latents vary, rest neutral."""
    values = {}
    for name in LATENT_NAMES[:latent_dims]:
        lo, hi = LATENT_RANGES[name]
        values[name] = float(rng.uniform(lo, hi))
    w, h = image_size
    base_scale = 0.33 * min(w, h)
    if vary_pose:
        pose = {
            "center": (
                w / 2.0 + float(rng.uniform(-0.08, 0.08)) * min(w, h),
                h / 2.0 + float(rng.uniform(-0.08, 0.08)) * min(w, h),
            ),
            "rotation": float(rng.uniform(-0.25, 0.25)),
            "scale": base_scale * float(rng.uniform(0.88, 1.06)),
        }
    else:
        pose = {"center": (w / 2.0, h / 2.0), "rotation": 0.0, "scale": base_scale}
    return FaceParams(image_size=image_size, **values, **pose)


def sample_corpus(
    seed: int,
    n: int,
    latent_dims: int = 5,
    image_size: tuple[int, int] = (64, 64),
    vary_pose: bool = True,
    render: bool = True,
) -> list[SyntheticSample]:
    """Deterministically sample n faces with `latent_dims` varying mouth latents.

    With render=False the images are skipped (landmarks-only workloads);
    the returned samples then carry image=None.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (1 <= latent_dims <= 5):
        raise ValueError(f"latent_dims must be in 1..5, got {latent_dims}")
    rng = np.random.Generator(np.random.PCG64(seed))
    samples = []
    for _ in range(n):
        params = sample_params(rng, latent_dims, image_size, vary_pose)
        if render:
            samples.append(render_face(params))
        else:
            samples.append(SyntheticSample(image=None, landmarks=face_landmarks(params), params=params))
    return samples
