"""Batch export of emission files from a checkpoint.

The bridge owns the log-softmax: files carry normalized
log-probabilities, never raw scores.  All inputs are validated before
the first byte is written, so a failing export leaves no partial batch.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .audio import read_wave
from .emfile import write_promem1, write_sidecar
from .errors import BridgeError
from .manifest import ExportManifest
from .model import TinyCTC, load_checkpoint

EMISSION_SUFFIX = ".promem1"
SIDECAR_SUFFIX = ".promem1.vocab"


def utterance_log_probs(model: TinyCTC, samples: np.ndarray) -> np.ndarray:
    """Run one waveform through the model: (frames, vocab) float32
    log-probabilities.  Deterministic: eval mode, no grad."""
    model.frame_count(len(samples))
    model.eval()
    with torch.no_grad():
        scores = model(torch.from_numpy(np.ascontiguousarray(samples, dtype=np.float32))[None])
        return torch.log_softmax(scores, dim=-1)[0].numpy()


def export_emissions(manifest: ExportManifest) -> list[Path]:
    """One PROMEM1 file plus sidecar per utterance; returns matrix paths."""
    model, config, _ = load_checkpoint(manifest.checkpoint)
    if config.vocab_size != len(manifest.tokens):
        raise BridgeError(
            f"checkpoint head is {config.vocab_size}-way but the manifest lists "
            f"{len(manifest.tokens)} tokens"
        )

    waves = []
    for utt_id, audio_path in manifest.utterances:
        samples = read_wave(audio_path)
        model.frame_count(len(samples))
        waves.append((utt_id, samples))

    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for utt_id, samples in waves:
        values = utterance_log_probs(model, samples)
        target = manifest.out_dir / f"{utt_id}{EMISSION_SUFFIX}"
        write_promem1(values, target)
        write_sidecar(manifest.tokens, manifest.out_dir / f"{utt_id}{SIDECAR_SUFFIX}")
        written.append(target)
    return written
