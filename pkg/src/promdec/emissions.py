"""Emission matrices: binary file format, validation, tagged-to-base
marginalization and a synthetic generator.

An emission matrix holds per-frame natural-log probabilities over a CTC
alphabet, one row per frame.  The on-disk representation is the PROMEM1
binary layout (little-endian): magic bytes "PROMEM1\\0", u32 frame count T,
u32 alphabet size V, then T*V float32 values row-major.  The alphabet
itself travels in a text sidecar next to the matrix file.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmissionFormatError
from .vocab import TokenSet, strip_tag

MAGIC = b"PROMEM1\0"
_HEADER = struct.Struct("<II")

# Row sums live in float32 on disk; 1e-4 absorbs that rounding.
ROW_NORM_TOL = 1e-4


def _row_logsumexp(values: np.ndarray) -> np.ndarray:
    m = values.max(axis=1)
    return m + np.log(np.exp(values - m[:, None]).sum(axis=1))


@dataclass(frozen=True)
class EmissionMatrix:
    """T x V natural-log probabilities; every row sums to one.

    Values are held as float64 so downstream scoring keeps full precision;
    quantization to float32 happens only at the file boundary.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2:
            raise EmissionFormatError(f"emission matrix must be 2-D, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise EmissionFormatError(f"degenerate emission shape {v.shape}")
        if not np.isfinite(v).all():
            raise EmissionFormatError("emission matrix contains NaN or Inf")
        lse = _row_logsumexp(v.astype(np.float64))
        bad = np.nonzero(np.abs(lse) > ROW_NORM_TOL)[0]
        if bad.size:
            row = int(bad[0])
            raise EmissionFormatError(
                f"row {row} is not a normalized distribution "
                f"(logsumexp {lse[row]:+.6e})"
            )
        object.__setattr__(self, "values", v.astype(np.float64))

    @property
    def frames(self) -> int:
        return int(self.values.shape[0])

    @property
    def vocab_size(self) -> int:
        return int(self.values.shape[1])


def write_emissions(matrix: EmissionMatrix, path: str | Path) -> None:
    payload = np.ascontiguousarray(matrix.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(matrix.frames, matrix.vocab_size))
        fh.write(payload.tobytes())


def read_emissions(path: str | Path) -> EmissionMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise EmissionFormatError(f"{path}: bad magic, not a PROMEM1 file")
    header_end = len(MAGIC) + _HEADER.size
    if len(data) < header_end:
        raise EmissionFormatError(f"{path}: truncated header")
    frames, vocab = _HEADER.unpack(data[len(MAGIC) : header_end])
    expected = header_end + frames * vocab * 4
    if len(data) < expected:
        raise EmissionFormatError(
            f"{path}: truncated payload, expected {expected} bytes found {len(data)}"
        )
    if len(data) > expected:
        raise EmissionFormatError(f"{path}: {len(data) - expected} trailing bytes")
    raw = np.frombuffer(data, dtype="<f4", offset=header_end)
    values = raw.reshape(frames, vocab)
    try:
        return EmissionMatrix(values)
    except EmissionFormatError as exc:
        raise EmissionFormatError(f"{path}: {exc}") from exc


def synth_emissions(
    reference_ids: Sequence[int],
    frames_per_token: int,
    noise: float,
    seed: int,
    vocab_size: int,
) -> EmissionMatrix:
    """Deterministic stand-in for an acoustic model.

    Each reference token occupies frames_per_token frames: the first
    frames_per_token - 1 concentrate probability on the token itself and
    the last one on blank, so noise-free matrices greedy-decode back to
    the reference even across repeated tokens.  noise blends each clean
    row with a random distribution drawn from the seeded generator.
    """
    if not reference_ids:
        raise EmissionFormatError("synthetic emissions need a non-empty reference")
    if frames_per_token < 2:
        raise EmissionFormatError(f"frames_per_token must be >= 2, got {frames_per_token}")
    if not 0.0 <= noise < 1.0:
        raise EmissionFormatError(f"noise must lie in [0, 1), got {noise}")
    if vocab_size < 2:
        raise EmissionFormatError(f"vocab size must be >= 2, got {vocab_size}")
    for tid in reference_ids:
        if not 0 < tid < vocab_size:
            raise EmissionFormatError(f"reference id {tid} outside 1..{vocab_size - 1}")

    peak = 0.95
    spread = (1.0 - peak) / (vocab_size - 1)
    frames = len(reference_ids) * frames_per_token
    clean = np.full((frames, vocab_size), spread, dtype=np.float64)
    for pos, tid in enumerate(reference_ids):
        start = pos * frames_per_token
        clean[start : start + frames_per_token - 1, tid] = peak
        clean[start + frames_per_token - 1, 0] = peak

    if noise > 0.0:
        rng = np.random.default_rng(seed)
        rand = rng.random((frames, vocab_size))
        rand /= rand.sum(axis=1, keepdims=True)
        probs = (1.0 - noise) * clean + noise * rand
    else:
        probs = clean
    return EmissionMatrix(np.log(probs))


def marginalize_tags(
    matrix: EmissionMatrix, tagged: TokenSet, base: TokenSet
) -> EmissionMatrix:
    """Sum the probability of every tagged variant onto its base character.

    Blank and Boundary columns transfer unchanged; an untagged alphabet
    passes through as the identity.
    """
    if matrix.vocab_size != len(tagged):
        raise EmissionFormatError(
            f"matrix has {matrix.vocab_size} columns, alphabet has {len(tagged)}"
        )
    targets = []
    for tok in tagged:
        stripped = strip_tag(tok)
        if stripped not in base:
            raise EmissionFormatError(
                f"base alphabet is missing {stripped.text!r} "
                f"(strip of {tok.text!r})"
            )
        targets.append(base.id_of(stripped))
    covered = set(targets)
    if covered != set(range(len(base))):
        missing = sorted(set(range(len(base))) - covered)
        names = ", ".join(base.token(i).text for i in missing)
        raise EmissionFormatError(f"base alphabet has unreachable tokens: {names}")

    src = matrix.values.astype(np.float64)
    out = np.full((matrix.frames, len(base)), -np.inf, dtype=np.float64)
    for j, i in enumerate(targets):
        out[:, i] = np.logaddexp(out[:, i], src[:, j])
    return EmissionMatrix(out)
