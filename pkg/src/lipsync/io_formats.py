"""On-disk formats shared by the pipeline stages.

Frames are binary PPM (P6, 8-bit) so golden tests can compare bytes.
Landmarks travel as JSONL, one record per frame:

    {"frame": <int>, "points": [[x, y], ... 68 entries ...]}

with points in the 1-based 68-point order (index 49-68 = mouth) stored
0-based in arrays. Audio is RIFF PCM WAV, 16-bit; stereo input is averaged
to mono. Model checkpoints are JSON with full-precision decimal floats.
"""

from __future__ import annotations

import json
import wave
from pathlib import Path

import numpy as np

from .errors import MissingFile


def write_ppm(path, image: np.ndarray) -> None:
    """Write an H x W x 3 float image in [0,1] as binary PPM (P6, 8-bit)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected HxWx3 image, got shape {img.shape}")
    h, w = img.shape[:2]
    data = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a binary PPM (P6, maxval 255) into an H x W x 3 float array in [0,1]."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise MissingFile(f"cannot read PPM {path}: {exc}") from exc
    if not raw.startswith(b"P6"):
        raise MissingFile(f"{path}: not a P6 PPM")
    # Header: magic, width, height, maxval, each followed by whitespace.
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":  # comment line
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        w, h, maxval = (int(x) for x in fields)
    except ValueError as exc:
        raise MissingFile(f"{path}: bad PPM header") from exc
    if maxval != 255:
        raise MissingFile(f"{path}: unsupported maxval {maxval}")
    body = raw[pos : pos + w * h * 3]
    if len(body) != w * h * 3:
        raise MissingFile(f"{path}: truncated pixel data")
    img = np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
    return img.astype(np.float64) / 255.0


def write_wav(path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float samples in [-1,1] as 16-bit PCM WAV."""
    x = np.asarray(samples, dtype=np.float64)
    pcm = np.floor(np.clip(x, -1.0, 1.0) * 32767.0 + 0.5).astype(np.int16)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(sample_rate))
        wf.writeframes(pcm.tobytes())


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM WAV; stereo is averaged to mono. Returns (samples, rate)."""
    try:
        with wave.open(str(path), "rb") as wf:
            nch = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            n = wf.getnframes()
            raw = wf.readframes(n)
    except (OSError, wave.Error) as exc:
        raise MissingFile(f"cannot read WAV {path}: {exc}") from exc
    if width != 2:
        raise MissingFile(f"{path}: only 16-bit PCM supported, got {8 * width}-bit")
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0
    if nch > 1:
        data = data.reshape(-1, nch).mean(axis=1)
    return data, rate


def write_landmarks_jsonl(path, frames) -> None:
    """Write per-frame 68x2 landmark arrays as JSONL records."""
    with open(path, "w", encoding="ascii") as f:
        for i, pts in enumerate(frames):
            arr = np.asarray(pts, dtype=np.float64)
            if arr.shape != (68, 2):
                raise ValueError(f"frame {i}: expected 68x2 points, got {arr.shape}")
            rec = {"frame": i, "points": arr.tolist()}
            f.write(json.dumps(rec) + "\n")


def read_landmarks_jsonl(path) -> list[np.ndarray]:
    """Read landmark JSONL; returns 68x2 float arrays ordered by frame index."""
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise MissingFile(f"cannot read landmarks {path}: {exc}") from exc
    records = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            idx = int(rec["frame"])
            pts = np.asarray(rec["points"], dtype=np.float64)
        except (ValueError, KeyError, TypeError) as exc:
            raise MissingFile(f"{path}:{lineno}: bad landmark record: {exc}") from exc
        if pts.shape != (68, 2) or not np.all(np.isfinite(pts)):
            raise MissingFile(f"{path}:{lineno}: expected 68 finite (x,y) points")
        records[idx] = pts
    if not records:
        raise MissingFile(f"{path}: no landmark records")
    if sorted(records) != list(range(len(records))):
        raise MissingFile(f"{path}: frame indices not contiguous from 0")
    return [records[i] for i in range(len(records))]


def save_checkpoint(path, config: dict, tensors: dict, stats: dict | None = None) -> None:
    """Serialize a model as JSON with 64-bit decimal floats (exact round trip)."""
    payload = {
        "config": config,
        "stats": stats if stats is not None else {},
        "tensors": {
            name: {"shape": list(t.shape), "data": np.asarray(t, dtype=np.float64).ravel().tolist()}
            for name, t in tensors.items()
        },
    }
    with open(path, "w", encoding="ascii") as f:
        json.dump(payload, f, sort_keys=True)


def load_checkpoint(path) -> tuple[dict, dict, dict]:
    """Load a checkpoint; returns (config, tensors, stats)."""
    try:
        with open(path, "r", encoding="ascii") as f:
            payload = json.load(f)
    except (OSError, ValueError) as exc:
        raise MissingFile(f"cannot read checkpoint {path}: {exc}") from exc
    tensors = {
        name: np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
        for name, entry in payload["tensors"].items()
    }
    return payload["config"], tensors, payload.get("stats", {})
