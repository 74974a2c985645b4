"""Waveform I/O on the stdlib wave module.

The model consumes 16 kHz mono 16-bit PCM only; anything else is
rejected rather than resampled.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .errors import BridgeError

SAMPLE_RATE = 16_000
_SCALE = 32768.0


def read_wave(path: str | Path) -> np.ndarray:
    """Load a waveform as float32 samples in [-1, 1)."""
    try:
        with wave.open(str(path), "rb") as fh:
            rate = fh.getframerate()
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            frames = fh.getnframes()
            raw = fh.readframes(frames)
    except (wave.Error, EOFError) as exc:
        # wave signals truncated chunk headers with a bare EOFError
        raise BridgeError(f"{path}: not a readable wave file ({exc})") from exc
    if rate != SAMPLE_RATE:
        raise BridgeError(f"{path}: sample rate {rate}, need {SAMPLE_RATE}")
    if channels != 1:
        raise BridgeError(f"{path}: {channels} channels, need mono")
    if width != 2:
        raise BridgeError(f"{path}: {8 * width}-bit samples, need 16-bit PCM")
    if frames == 0:
        raise BridgeError(f"{path}: empty audio")
    return np.frombuffer(raw, dtype="<i2").astype(np.float32) / _SCALE


def write_wave(samples: np.ndarray, path: str | Path) -> None:
    """Store float samples as 16 kHz mono PCM16, clipping to [-1, 1)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise BridgeError(f"waveform must be a non-empty 1-D array, got shape {arr.shape}")
    pcm = np.clip(arr * _SCALE, -_SCALE, _SCALE - 1).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(pcm.tobytes())
