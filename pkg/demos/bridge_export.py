"""Cross the model boundary: train the desk-scale acoustic model, export
its log-probabilities, and decode the files with the consumer toolkit.

Audio is synthesized as one tone per reference unit so the tiny model
can genuinely learn the mapping.  Requires promdec-bridge (torch).
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from promdec.corpus import TaggingMode
from promdec.decoder import greedy_decode
from promdec.emissions import read_emissions
from promdec.prominence import extract_sequence
from promdec.vocab import read_vocab

from promdec_bridge import (
    SAMPLE_RATE,
    FinetuneConfig,
    export_emissions,
    finetune_stub,
    load_manifest,
    reference_units,
    write_wave,
)

ROWS = [
    ("utt_00", "|0 |2 |"),
    ("utt_01", "|2 |0 |"),
    ("utt_02", "|0 |0 |2 |"),
    ("utt_03", "|2 |"),
    ("utt_04", "|0 |2 |0 |"),
    ("utt_05", "|2 |2 |0 |"),
]
SAMPLES_PER_UNIT = 480


def tone(units, freqs, rng):
    t = np.arange(SAMPLES_PER_UNIT) / SAMPLE_RATE
    wave = np.concatenate([0.6 * np.sin(2 * np.pi * freqs[u] * t) for u in units])
    return wave + 0.01 * rng.standard_normal(wave.size)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        audio = work / "audio"
        audio.mkdir()
        freqs = {u: 350.0 + 170.0 * i for i, u in enumerate(["|", "0", "2"])}
        rng = np.random.default_rng(5)
        with open(work / "refs.tsv", "w", encoding="utf-8") as fh:
            for utt_id, ref in ROWS:
                fh.write(f"{utt_id}\t{ref}\n")
                write_wave(tone(reference_units(ref), freqs, rng), audio / f"{utt_id}.wav")

        result = finetune_stub(
            work / "refs.tsv", audio, work / "model.pt",
            config=FinetuneConfig(steps=60, seed=1),
        )
        print(f"trained 60 steps: loss {result.losses[0]:.3f} -> {result.losses[-1]:.3f}")

        manifest = work / "manifest.json"
        manifest.write_text(json.dumps({
            "checkpoint": "model.pt",
            "tokens": list(result.tokens),
            "utterances": [
                {"id": utt_id, "audio": f"audio/{utt_id}.wav"} for utt_id, _ in ROWS
            ],
            "out_dir": "emissions",
        }), encoding="utf-8")
        written = export_emissions(load_manifest(manifest))
        print(f"exported {len(written)} emission files\n")

        for path, (utt_id, ref) in zip(written, ROWS):
            matrix = read_emissions(path)
            tokenset = read_vocab(str(path) + ".vocab")
            hyp = greedy_decode(matrix)
            tokens = [tokenset.token(i) for i in hyp.token_ids]
            levels = extract_sequence(tokens)
            shown = " ".join("?" if l is None else str(l.value) for l in levels)
            print(f"  {utt_id}  ref={ref:<12} decoded levels: {shown}")


if __name__ == "__main__":
    main()
