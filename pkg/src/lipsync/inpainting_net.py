"""Mouth in-painting network: encoder-decoder with skip connections.

Desk-scale U-Net trained with L1 pixel loss only (no adversarial term).
Encoder level i is a 3x3 stride-2 convolution + ReLU with base * 2^i
output channels; a stride-1 bottleneck convolution sits at the lowest
resolution. Each decoder level nearest-upsamples by 2, concatenates the
mirrored encoder activation (the raw input image at full resolution),
and applies a 3x3 stride-1 convolution + ReLU. A final 3x3 convolution
with sigmoid produces the RGB output in [0, 1].

Each output frame is a pure function of (model, input) with no temporal
state, so sequences may be rendered frame-parallel with bit-identical
results. Everything is float64; gradients are hand-derived and checked
against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import EmptyDataset, SizeMismatch
from .io_formats import load_checkpoint, save_checkpoint


@dataclass(frozen=True)
class InpainterConfig:
    image_size: int = 64     # square images, must be divisible by 2^depth
    depth: int = 4
    base_channels: int = 32
    learning_rate: float = 0.003
    epochs: int = 30
    batch_size: int = 16
    seed: int = 0

    def validate(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.image_size % (1 << self.depth) != 0:
            raise ValueError(
                f"image_size {self.image_size} not divisible by 2^depth = {1 << self.depth}"
            )
        if self.base_channels < 1:
            raise ValueError("base_channels must be >= 1")


def _channels(config: InpainterConfig) -> list[int]:
    return [config.base_channels << i for i in range(config.depth)]


def init_tensors(config: InpainterConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    ch = _channels(config)

    def conv_init(c_out, c_in):
        r = np.sqrt(6.0 / (c_in * 9))
        return rng.uniform(-r, r, size=(c_out, c_in, 3, 3))

    tensors = {}
    for i in range(config.depth):
        c_in = 3 if i == 0 else ch[i - 1]
        tensors[f"enc{i}_w"] = conv_init(ch[i], c_in)
        tensors[f"enc{i}_b"] = np.zeros(ch[i])
    tensors["mid_w"] = conv_init(ch[-1], ch[-1])
    tensors["mid_b"] = np.zeros(ch[-1])
    for j in range(config.depth - 1, -1, -1):
        skip_ch = 3 if j == 0 else ch[j - 1]
        c_out = ch[0] if j == 0 else ch[j - 1]
        tensors[f"dec{j}_w"] = conv_init(c_out, ch[j] + skip_ch)
        tensors[f"dec{j}_b"] = np.zeros(c_out)
    tensors["out_w"] = conv_init(3, ch[0])
    tensors["out_b"] = np.zeros(3)
    return tensors


def _im2col(x: np.ndarray, stride: int) -> np.ndarray:
    """Padded N x C x H x W -> N x (C*9) x L columns for a 3x3 kernel."""
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    ho = (h + 2 - 3) // stride + 1
    wo = (w + 2 - 3) // stride + 1
    cols = np.empty((n, c, 3, 3, ho, wo), dtype=x.dtype)
    for ky in range(3):
        for kx in range(3):
            cols[:, :, ky, kx] = xp[
                :, :, ky : ky + (ho - 1) * stride + 1 : stride,
                kx : kx + (wo - 1) * stride + 1 : stride,
            ]
    return cols.reshape(n, c * 9, ho * wo)


def _col2im(dcols: np.ndarray, x_shape: tuple, stride: int) -> np.ndarray:
    """Adjoint of _im2col: scatter-add columns back to N x C x H x W."""
    n, c, h, w = x_shape
    ho = (h + 2 - 3) // stride + 1
    wo = (w + 2 - 3) // stride + 1
    dxp = np.zeros((n, c, h + 2, w + 2), dtype=dcols.dtype)
    dcols = dcols.reshape(n, c, 3, 3, ho, wo)
    for ky in range(3):
        for kx in range(3):
            dxp[
                :, :, ky : ky + (ho - 1) * stride + 1 : stride,
                kx : kx + (wo - 1) * stride + 1 : stride,
            ] += dcols[:, :, ky, kx]
    return dxp[:, :, 1:-1, 1:-1]


def _conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int):
    n, _, h, wd = x.shape
    c_out = w.shape[0]
    cols = _im2col(x, stride)
    w_mat = w.reshape(c_out, -1)
    y = np.matmul(w_mat, cols) + b[None, :, None]
    ho = (h + 2 - 3) // stride + 1
    wo = (wd + 2 - 3) // stride + 1
    return y.reshape(n, c_out, ho, wo), (cols, x.shape)


def _conv_backward(dy: np.ndarray, w: np.ndarray, cache, stride: int):
    cols, x_shape = cache
    n = dy.shape[0]
    c_out = w.shape[0]
    dy_mat = dy.reshape(n, c_out, -1)
    dw = np.einsum("ncl,nkl->ck", dy_mat, cols).reshape(w.shape)
    db = dy_mat.sum(axis=(0, 2))
    dcols = np.matmul(w.reshape(c_out, -1).T, dy_mat)
    dx = _col2im(dcols, x_shape, stride)
    return dx, dw, db


def _upsample2(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3)


def _downsum2(dy: np.ndarray) -> np.ndarray:
    n, c, h, w = dy.shape
    return dy.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


def forward(tensors: dict, config: InpainterConfig, x: np.ndarray, want_cache: bool = False):
    """Forward pass on N x 3 x H x W input; returns (output, cache)."""
    cache = {"convs": {}, "relus": {}}
    act = x
    enc_outs = []
    for i in range(config.depth):
        y, conv_cache = _conv_forward(act, tensors[f"enc{i}_w"], tensors[f"enc{i}_b"], stride=2)
        mask = y > 0
        act = y * mask
        if want_cache:
            cache["convs"][f"enc{i}"] = conv_cache
            cache["relus"][f"enc{i}"] = mask
        enc_outs.append(act)
    y, conv_cache = _conv_forward(act, tensors["mid_w"], tensors["mid_b"], stride=1)
    mask = y > 0
    act = y * mask
    if want_cache:
        cache["convs"]["mid"] = conv_cache
        cache["relus"]["mid"] = mask
    for j in range(config.depth - 1, -1, -1):
        up = _upsample2(act)
        skip = x if j == 0 else enc_outs[j - 1]
        cat = np.concatenate([up, skip], axis=1)
        y, conv_cache = _conv_forward(cat, tensors[f"dec{j}_w"], tensors[f"dec{j}_b"], stride=1)
        mask = y > 0
        act = y * mask
        if want_cache:
            cache["convs"][f"dec{j}"] = conv_cache
            cache["relus"][f"dec{j}"] = mask
    y, conv_cache = _conv_forward(act, tensors["out_w"], tensors["out_b"], stride=1)
    out = 1.0 / (1.0 + np.exp(-y))
    if want_cache:
        cache["convs"]["out"] = conv_cache
        cache["out"] = out
    return out, cache


def l1_loss_and_grads(tensors: dict, config: InpainterConfig, x: np.ndarray, target: np.ndarray):
    """Mean absolute pixel error and gradients for one batch."""
    out, cache = forward(tensors, config, x, want_cache=True)
    count = out.size
    diff = out - target
    loss = float(np.abs(diff).sum()) / count
    d_out = np.sign(diff) / count
    grads = {name: np.zeros_like(t) for name, t in tensors.items()}

    d_act = d_out * out * (1.0 - out)
    d_act, grads["out_w"], grads["out_b"] = _conv_backward(
        d_act, tensors["out_w"], cache["convs"]["out"], stride=1
    )
    d_enc = {}  # gradients flowing into encoder activations via skips
    d_input_skip = np.zeros_like(x)
    for j in range(config.depth):  # decoder levels in reverse build order: dec0 first
        d_act = d_act * cache["relus"][f"dec{j}"]
        d_cat, grads[f"dec{j}_w"], grads[f"dec{j}_b"] = _conv_backward(
            d_act, tensors[f"dec{j}_w"], cache["convs"][f"dec{j}"], stride=1
        )
        up_ch = tensors[f"dec{j}_w"].shape[1] - (3 if j == 0 else tensors[f"enc{j-1}_w"].shape[0])
        d_up, d_skip = d_cat[:, :up_ch], d_cat[:, up_ch:]
        if j == 0:
            d_input_skip += d_skip
        else:
            d_enc[j - 1] = d_enc.get(j - 1, 0.0) + d_skip
        d_act = _downsum2(d_up)
    d_act = d_act * cache["relus"]["mid"]
    d_act, grads["mid_w"], grads["mid_b"] = _conv_backward(
        d_act, tensors["mid_w"], cache["convs"]["mid"], stride=1
    )
    for i in range(config.depth - 1, -1, -1):
        if i in d_enc:
            d_act = d_act + d_enc[i]
        d_act = d_act * cache["relus"][f"enc{i}"]
        d_act, grads[f"enc{i}_w"], grads[f"enc{i}_b"] = _conv_backward(
            d_act, tensors[f"enc{i}_w"], cache["convs"][f"enc{i}"], stride=2
        )
    return loss, grads


class InpainterModel:
    """Immutable trained in-painter."""

    def __init__(self, config: InpainterConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        self.tensors = {name: np.asarray(t, dtype=np.float64) for name, t in tensors.items()}

    def save(self, path) -> None:
        save_checkpoint(path, config=asdict(self.config), tensors=self.tensors)

    @classmethod
    def load(cls, path) -> "InpainterModel":
        config, tensors, _ = load_checkpoint(path)
        return cls(InpainterConfig(**config), tensors)


class _Adam:
    def __init__(self, tensors: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.v = {k: np.zeros_like(v) for k, v in tensors.items()}
        self.t = 0

    def step(self, tensors: dict, grads: dict) -> None:
        self.t += 1
        for k in tensors:
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * grads[k]
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * grads[k] ** 2
            m_hat = self.m[k] / (1 - self.beta1**self.t)
            v_hat = self.v[k] / (1 - self.beta2**self.t)
            tensors[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _to_nchw(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.transpose(image, (2, 0, 1)))


def _to_hwc(arr: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.transpose(arr, (1, 2, 0)))


def train_inpainter(pairs, config: InpainterConfig):
    """Train with L1 pixel loss only; returns (model, loss_history).

    Minibatch Adam over a seeded shuffle each epoch; loss_history holds
    the sample-weighted mean batch L1 per epoch. Deterministic per seed.
    """
    config.validate()
    if not pairs:
        raise EmptyDataset("no training pairs")
    size = config.image_size
    for p in pairs:
        if p.input_image.shape != (size, size, 3) or p.target_image.shape != (size, size, 3):
            raise SizeMismatch(
                f"pair images must be {size}x{size}x3, got {p.input_image.shape}"
            )
    x = np.stack([_to_nchw(p.input_image) for p in pairs])
    y = np.stack([_to_nchw(p.target_image) for p in pairs])
    n = len(pairs)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    tensors = init_tensors(config, rng)
    optimizer = _Adam(tensors, lr=config.learning_rate)
    history = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads = l1_loss_and_grads(tensors, config, x[batch], y[batch])
            optimizer.step(tensors, grads)
            epoch_loss += loss * len(batch)
        history.append(epoch_loss / n)
    return InpainterModel(config, tensors), history


def infer_frame(model: InpainterModel, input_image: np.ndarray) -> np.ndarray:
    """In-paint one frame; pure function of (model, input), clamped to [0, 1]."""
    size = model.config.image_size
    img = np.asarray(input_image, dtype=np.float64)
    if img.shape != (size, size, 3):
        raise SizeMismatch(f"expected {size}x{size}x3 input, got {img.shape}")
    out, _ = forward(model.tensors, model.config, _to_nchw(img)[None])
    return np.clip(_to_hwc(out[0]), 0.0, 1.0)


def eval_l1(model: InpainterModel, pairs) -> float:
    """Mean absolute error of the model over a list of pairs."""
    total = 0.0
    for p in pairs:
        out = infer_frame(model, p.input_image)
        total += float(np.abs(out - p.target_image).mean())
    return total / len(pairs)
