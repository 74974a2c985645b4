"""Deterministic audio fixtures: one sine tone per reference unit, so a
tiny model can actually learn the mapping."""

from pathlib import Path

import numpy as np

from promdec_bridge.audio import SAMPLE_RATE, write_wave
from promdec_bridge.finetune import reference_units, tokens_from_references

# Three frames per unit at the default 160-sample frontend stride.
SAMPLES_PER_UNIT = 480


def unit_frequencies(rows):
    tones = tokens_from_references(rows)[1:]  # blank never sounds
    return {unit: 350.0 + 170.0 * i for i, unit in enumerate(tones)}


def render_utterance(units, freqs, rng):
    t = np.arange(SAMPLES_PER_UNIT) / SAMPLE_RATE
    chunks = [0.6 * np.sin(2.0 * np.pi * freqs[u] * t) for u in units]
    wave = np.concatenate(chunks)
    return wave + 0.01 * rng.standard_normal(wave.size)


def write_fixture(dirpath, rows, seed=0):
    """Write refs.tsv plus one wav per utterance; returns (refs, audio dir)."""
    dirpath = Path(dirpath)
    audio_dir = dirpath / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    freqs = unit_frequencies(rows)
    rng = np.random.default_rng(seed)
    refs_path = dirpath / "refs.tsv"
    with open(refs_path, "w", encoding="utf-8") as fh:
        for utt_id, ref in rows:
            fh.write(f"{utt_id}\t{ref}\n")
            wave = render_utterance(reference_units(ref), freqs, rng)
            write_wave(wave, audio_dir / f"{utt_id}.wav")
    return refs_path, audio_dir
