"""Time-delayed recurrent regression from audio features to mouth coefficients.

A single-layer LSTM (gate order i, f, g, o) plus a linear head maps a
T x F feature sequence to T x k coefficient frames. Training targets are
delayed: the network output at step t is compared with the coefficient
frame from d steps earlier, so the recurrence sees d frames of audio
lookahead. At inference the raw output sequence is shifted back by d and
the final d frames repeat the last emitted value, keeping output length
equal to input length.

Inputs and targets are standardized to zero mean / unit variance using
training-set statistics stored with the model. All math is float64 and
the whole run is deterministic for a fixed seed; gradients are
hand-derived and validated against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import DelayTooLarge, EmptyDataset, ShapeMismatch
from .io_formats import load_checkpoint, save_checkpoint

_STD_FLOOR = 1e-12  # constant dimensions standardize to zero via std := 1


@dataclass(frozen=True)
class PredictorConfig:
    input_dim: int = 26
    output_dim: int = 5
    hidden_size: int = 60
    layers: int = 1
    delay_frames: int = 20
    learning_rate: float = 0.01
    epochs: int = 100
    seed: int = 0

    def validate(self) -> None:
        if self.delay_frames < 0:
            raise ValueError("delay_frames must be >= 0")
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")
        if self.layers != 1:
            raise ValueError("only single-layer recurrence is supported")
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be >= 1")


@dataclass(frozen=True)
class SequencePair:
    features: np.ndarray  # T x F
    targets: np.ndarray   # T x k

    def validate(self, delay: int) -> None:
        if self.features.ndim != 2 or self.targets.ndim != 2:
            raise ShapeMismatch("features and targets must be 2-D")
        if self.features.shape[0] != self.targets.shape[0]:
            raise ShapeMismatch(
                f"length mismatch: {self.features.shape[0]} vs {self.targets.shape[0]}"
            )
        if self.features.shape[0] <= delay:
            raise DelayTooLarge(
                f"sequence length {self.features.shape[0]} must exceed delay {delay}"
            )


@dataclass(frozen=True)
class AlignedPair:
    """Training view of a pair: target row t is the source target row t - d."""

    features: np.ndarray   # T x F
    targets: np.ndarray    # T x k; rows < loss_start are zero and carry no loss
    loss_start: int        # first step (0-based) that contributes loss


def apply_time_delay(pair: SequencePair, delay: int) -> AlignedPair:
    """Shift targets forward by `delay` steps; steps before it emit no loss."""
    t_len = pair.features.shape[0]
    if delay >= t_len:
        raise DelayTooLarge(f"delay {delay} >= sequence length {t_len}")
    pair.validate(delay)
    shifted = np.zeros_like(np.asarray(pair.targets, dtype=np.float64))
    if delay == 0:
        shifted[:] = pair.targets
    else:
        shifted[delay:] = pair.targets[:-delay]
    return AlignedPair(
        features=np.asarray(pair.features, dtype=np.float64),
        targets=shifted,
        loss_start=delay,
    )


def realign_predictions(raw: np.ndarray, delay: int) -> np.ndarray:
    """Undo the training delay: shift back by d, repeat the last value at the tail."""
    if delay == 0:
        return raw.copy()
    out = np.empty_like(raw)
    out[: len(raw) - delay] = raw[delay:]
    out[len(raw) - delay :] = raw[-1]
    return out


def _init_tensors(config: PredictorConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    h, f, k = config.hidden_size, config.input_dim, config.output_dim
    r = 1.0 / np.sqrt(h)
    tensors = {
        "w_x": rng.uniform(-r, r, size=(4 * h, f)),
        "w_h": rng.uniform(-r, r, size=(4 * h, h)),
        "b": np.zeros(4 * h),
        "w_out": rng.uniform(-r, r, size=(k, h)),
        "b_out": np.zeros(k),
    }
    tensors["b"][h : 2 * h] = 1.0  # forget-gate bias starts open
    return tensors


class PredictorModel:
    """Immutable trained predictor: parameter tensors + standardization stats."""

    def __init__(self, config: PredictorConfig, tensors: dict[str, np.ndarray], stats: dict):
        self.config = config
        self.tensors = {name: np.asarray(t, dtype=np.float64) for name, t in tensors.items()}
        self.stats = {name: np.asarray(v, dtype=np.float64) for name, v in stats.items()}

    def save(self, path) -> None:
        save_checkpoint(
            path,
            config=asdict(self.config),
            tensors=self.tensors,
            stats={name: v.tolist() for name, v in self.stats.items()},
        )

    @classmethod
    def load(cls, path) -> "PredictorModel":
        config, tensors, stats = load_checkpoint(path)
        return cls(PredictorConfig(**config), tensors, stats)


def _forward(tensors: dict, x: np.ndarray):
    """LSTM + head over x (T x B x F); returns outputs and the BPTT cache."""
    w_x, w_h, b = tensors["w_x"], tensors["w_h"], tensors["b"]
    w_out, b_out = tensors["w_out"], tensors["b_out"]
    hid = w_h.shape[1]
    t_len, batch = x.shape[0], x.shape[1]
    h_prev = np.zeros((batch, hid))
    c_prev = np.zeros((batch, hid))
    cache = {"x": x, "i": [], "f": [], "g": [], "o": [], "c": [], "hc": [], "h": []}
    outputs = np.empty((t_len, batch, w_out.shape[0]))
    for t in range(t_len):
        z = x[t] @ w_x.T + h_prev @ w_h.T + b
        zi, zf, zg, zo = np.split(z, 4, axis=1)
        i = 1.0 / (1.0 + np.exp(-zi))
        f = 1.0 / (1.0 + np.exp(-zf))
        g = np.tanh(zg)
        o = 1.0 / (1.0 + np.exp(-zo))
        c = f * c_prev + i * g
        hc = np.tanh(c)
        h = o * hc
        outputs[t] = h @ w_out.T + b_out
        for name, val in (("i", i), ("f", f), ("g", g), ("o", o), ("c", c), ("hc", hc), ("h", h)):
            cache[name].append(val)
        h_prev, c_prev = h, c
    return outputs, cache


def _backward(tensors: dict, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss given d loss / d outputs (T x B x k)."""
    w_h, w_out = tensors["w_h"], tensors["w_out"]
    x = cache["x"]
    t_len, batch = x.shape[0], x.shape[1]
    hid = w_h.shape[1]
    grads = {name: np.zeros_like(t) for name, t in tensors.items()}
    dh_next = np.zeros((batch, hid))
    dc_next = np.zeros((batch, hid))
    for t in range(t_len - 1, -1, -1):
        i, f, g, o = cache["i"][t], cache["f"][t], cache["g"][t], cache["o"][t]
        hc = cache["hc"][t]
        c_prev = cache["c"][t - 1] if t > 0 else np.zeros((batch, hid))
        h_prev = cache["h"][t - 1] if t > 0 else np.zeros((batch, hid))
        dy = d_out[t]
        grads["w_out"] += dy.T @ cache["h"][t]
        grads["b_out"] += dy.sum(axis=0)
        dh = dy @ w_out + dh_next
        do = dh * hc
        dc = dc_next + dh * o * (1.0 - hc**2)
        df = dc * c_prev
        di = dc * g
        dg = dc * i
        dc_next = dc * f
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g**2), do * o * (1 - o)], axis=1
        )
        grads["w_x"] += dz.T @ x[t]
        grads["w_h"] += dz.T @ h_prev
        grads["b"] += dz.sum(axis=0)
        dh_next = dz @ w_h
    return grads


def _standardize_stats(arrays: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    stacked = np.concatenate(arrays, axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std = np.where(std > _STD_FLOOR, std, 1.0)
    return mean, std


def sequence_loss_and_grads(tensors: dict, aligned: list[AlignedPair]):
    """Mean squared error over all loss steps, plus parameter gradients.

    Equal-length pairs are batched through one recurrence; the loss is the
    global mean over counted (step, dim) entries, so grouping does not
    change the result.
    """
    groups: dict[int, list[int]] = {}
    for idx, pair in enumerate(aligned):
        groups.setdefault(pair.features.shape[0], []).append(idx)
    total_entries = sum(
        (p.features.shape[0] - p.loss_start) * p.targets.shape[1] for p in aligned
    )
    loss = 0.0
    grads_total = {name: np.zeros_like(t) for name, t in tensors.items()}
    for t_len in groups:
        members = [aligned[i] for i in groups[t_len]]
        x = np.stack([p.features for p in members], axis=1)  # T x B x F
        y = np.stack([p.targets for p in members], axis=1)
        outputs, cache = _forward(tensors, x)
        mask = np.zeros((t_len, len(members), 1))
        for b, p in enumerate(members):
            mask[p.loss_start :, b] = 1.0
        diff = (outputs - y) * mask
        loss += float(np.sum(diff**2))
        d_out = 2.0 * diff / total_entries
        grads = _backward(tensors, cache, d_out)
        for name in grads_total:
            grads_total[name] += grads[name]
    return loss / total_entries, grads_total


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


def train_predictor(pairs: list[SequencePair], config: PredictorConfig):
    """Train on delayed, standardized pairs; returns (model, loss_history).

    Full-batch Adam on the global MSE over loss steps. loss_history holds
    one standardized-space MSE per epoch.
    """
    config.validate()
    if not pairs:
        raise EmptyDataset("no training sequences")
    d = config.delay_frames
    for pair in pairs:
        pair.validate(d)
        if pair.features.shape[1] != config.input_dim:
            raise ShapeMismatch(
                f"feature dim {pair.features.shape[1]} != config input_dim {config.input_dim}"
            )
        if pair.targets.shape[1] != config.output_dim:
            raise ShapeMismatch(
                f"target dim {pair.targets.shape[1]} != config output_dim {config.output_dim}"
            )

    x_mean, x_std = _standardize_stats([np.asarray(p.features, dtype=np.float64) for p in pairs])
    y_mean, y_std = _standardize_stats([np.asarray(p.targets, dtype=np.float64) for p in pairs])
    stats = {"x_mean": x_mean, "x_std": x_std, "y_mean": y_mean, "y_std": y_std}

    aligned = [
        apply_time_delay(
            SequencePair(
                features=(np.asarray(p.features, dtype=np.float64) - x_mean) / x_std,
                targets=(np.asarray(p.targets, dtype=np.float64) - y_mean) / y_std,
            ),
            d,
        )
        for p in pairs
    ]

    rng = np.random.Generator(np.random.PCG64(config.seed))
    tensors = _init_tensors(config, rng)
    optimizer = _Adam(tensors, lr=config.learning_rate)
    history = []
    for _ in range(config.epochs):
        loss, grads = sequence_loss_and_grads(tensors, aligned)
        optimizer.step(tensors, grads)
        history.append(loss)
    return PredictorModel(config, tensors, stats), history


def predict_coeffs(model: PredictorModel, features: np.ndarray) -> np.ndarray:
    """T x k coefficients for T x F features, in original coefficient units."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.config.input_dim:
        raise ShapeMismatch(
            f"expected T x {model.config.input_dim} features, got shape {x.shape}"
        )
    xs = (x - model.stats["x_mean"]) / model.stats["x_std"]
    raw, _ = _forward(model.tensors, xs[:, None, :])
    raw = raw[:, 0, :]
    d = min(model.config.delay_frames, len(raw) - 1)
    realigned = realign_predictions(raw, d)
    return realigned * model.stats["y_std"] + model.stats["y_mean"]
