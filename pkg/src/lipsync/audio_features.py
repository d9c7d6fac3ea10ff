"""16 kHz audio to per-video-frame log-mel feature vectors.

The hop is locked to one video frame (1/fps seconds) so feature frame t
lines up with video frame t. Per frame, over samples [t*hop, t*hop+win):
periodic Hann window -> magnitude rFFT (size = next power of two >= win)
-> 26 triangular mel filters spanning 0-8 kHz (HTK mel scale,
mel = 2595 log10(1 + f/700)) -> log(energy + floor_eps).

Resampling to 16 kHz uses a linear-phase polyphase FIR
(scipy.signal.resample_poly); the output is trimmed by at most one
trailing sample so the length is exactly round(N * 16000 / rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import resample_poly

from .errors import TooShort, UnsupportedRate

TARGET_RATE = 16000


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray  # mono, values in [-1, 1]
    sample_rate: int

    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FeatureConfig:
    fps: float = 25.0
    window_ms: float = 25.0
    mel_bands: int = 26
    floor_eps: float = 1e-10
    fmin: float = 0.0
    fmax: float = 8000.0

    @property
    def window_samples(self) -> int:
        return int(round(TARGET_RATE * self.window_ms / 1000.0))

    @property
    def hop_samples(self) -> int:
        return int(round(TARGET_RATE / self.fps))

    @property
    def fft_size(self) -> int:
        return 1 << max(0, (self.window_samples - 1).bit_length())

    def validate(self) -> None:
        if self.mel_bands < 1:
            raise ValueError("mel_bands must be >= 1")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.window_samples > 4 * self.hop_samples:
            raise ValueError(
                f"window ({self.window_samples}) must be <= 4x hop ({self.hop_samples})"
            )


@dataclass(frozen=True)
class AudioFeatureSequence:
    frames: np.ndarray  # T x F
    fps: float
    config: FeatureConfig


def resample_to_16k(wave: Waveform) -> Waveform:
    """Resample to 16 kHz; identity when the input is already 16 kHz."""
    if not (8000 <= wave.sample_rate <= 192000):
        raise UnsupportedRate(f"sample rate {wave.sample_rate} outside 8000..192000")
    x = np.asarray(wave.samples, dtype=np.float64)
    if wave.sample_rate == TARGET_RATE:
        return Waveform(samples=x.copy(), sample_rate=TARGET_RATE)
    g = math.gcd(TARGET_RATE, wave.sample_rate)
    up, down = TARGET_RATE // g, wave.sample_rate // g
    out = resample_poly(x, up, down)
    target_len = int(round(len(x) * TARGET_RATE / wave.sample_rate))
    if len(out) > target_len:  # polyphase yields ceil(); contract is round()
        out = out[:target_len]
    elif len(out) < target_len:
        out = np.pad(out, (0, target_len - len(out)), mode="edge")
    return Waveform(samples=out, sample_rate=TARGET_RATE)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(config: FeatureConfig) -> np.ndarray:
    """F x (fft_size/2 + 1) triangular filters over the rFFT bin frequencies."""
    n_bins = config.fft_size // 2 + 1
    bin_freqs = np.arange(n_bins) * (TARGET_RATE / config.fft_size)
    edges_hz = mel_to_hz(
        np.linspace(hz_to_mel(config.fmin), hz_to_mel(config.fmax), config.mel_bands + 2)
    )
    bank = np.zeros((config.mel_bands, n_bins), dtype=np.float64)
    for m in range(config.mel_bands):
        lo, mid, hi = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (bin_freqs - lo) / (mid - lo)
        falling = (hi - bin_freqs) / (hi - mid)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    return bank


def extract_features(wave: Waveform, config: FeatureConfig | None = None) -> AudioFeatureSequence:
    """Log-mel features at the video frame rate; requires 16 kHz input."""
    config = config if config is not None else FeatureConfig()
    config.validate()
    if wave.sample_rate != TARGET_RATE:
        raise UnsupportedRate(f"extract_features requires 16 kHz input, got {wave.sample_rate}")
    x = np.asarray(wave.samples, dtype=np.float64)
    win = config.window_samples
    hop = config.hop_samples
    n = len(x)
    if n < win:
        raise TooShort(f"waveform of {n} samples shorter than one {win}-sample window")
    t_frames = (n - win) // hop + 1
    idx = np.arange(win)[None, :] + hop * np.arange(t_frames)[:, None]
    segments = x[idx]
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(win) / win)  # periodic Hann
    spectra = np.abs(np.fft.rfft(segments * window, n=config.fft_size, axis=1))
    energies = spectra @ mel_filterbank(config).T
    frames = np.log(energies + config.floor_eps)
    return AudioFeatureSequence(frames=frames, fps=config.fps, config=config)


def features_for_fps(wave: Waveform, fps: float, config: FeatureConfig | None = None) -> AudioFeatureSequence:
    """Extract features with the hop re-locked to the given frame rate."""
    base = config if config is not None else FeatureConfig()
    return extract_features(wave, replace(base, fps=fps))
