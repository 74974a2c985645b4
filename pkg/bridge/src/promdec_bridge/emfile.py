"""Writers for the emission file contract.

PROMEM1 layout (little-endian): magic bytes "PROMEM1\\0", u32 frame
count T, u32 alphabet size V, then T*V float32 natural-log
probabilities row-major.  The alphabet travels in a text sidecar, one
token per line, in model output order.  This module owns its own
writers; the consumer's implementation is never imported, the bytes are
the contract.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BridgeError

MAGIC = b"PROMEM1\0"
_HEADER = struct.Struct("<II")

# The consumer validates row sums at this tolerance on the float32 payload.
ROW_NORM_TOL = 1e-4


def write_promem1(values: np.ndarray, path: str | Path) -> None:
    """Write a T x V log-probability matrix, refusing unnormalized rows."""
    payload = np.ascontiguousarray(values, dtype="<f4")
    if payload.ndim != 2 or payload.shape[0] < 1 or payload.shape[1] < 1:
        raise BridgeError(f"emission matrix must be non-degenerate 2-D, got shape {payload.shape}")
    if not np.isfinite(payload).all():
        raise BridgeError("emission matrix contains NaN or Inf")
    rows = payload.astype(np.float64)
    m = rows.max(axis=1)
    lse = m + np.log(np.exp(rows - m[:, None]).sum(axis=1))
    bad = np.nonzero(np.abs(lse) > ROW_NORM_TOL)[0]
    if bad.size:
        raise BridgeError(
            f"row {int(bad[0])} is not a normalized distribution (logsumexp {lse[int(bad[0])]:+.6e})"
        )
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(payload.shape[0], payload.shape[1]))
        fh.write(payload.tobytes())


def write_sidecar(tokens: Sequence[str], path: str | Path) -> None:
    for tok in tokens:
        if not tok or "\n" in tok:
            raise BridgeError(f"sidecar token must be a non-empty single line: {tok!r}")
    with open(path, "w", encoding="utf-8") as fh:
        for tok in tokens:
            fh.write(tok + "\n")


def greedy_labels(values: np.ndarray) -> list[int]:
    """Best-path decode: per-frame argmax (ties to the lowest id),
    collapse repeats, drop blank id 0."""
    ids = np.asarray(values).argmax(axis=1)
    out: list[int] = []
    prev = -1
    for i in ids:
        if i != prev and i != 0:
            out.append(int(i))
        prev = i
    return out
