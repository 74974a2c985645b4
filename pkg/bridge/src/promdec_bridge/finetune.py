"""Minimal CTC fine-tuning skeleton over reference-string alphabets.

Documents the intended training loop at desk scale; the hyperparameters
are exposed placeholders, chosen for a ten-utterance overfit run rather
than tuned against any corpus.  References arrive as the consumer's TSV
format (utterance id, TAB, reference string); audio as
<audio_dir>/<id>.wav.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .audio import read_wave
from .errors import BridgeError
from .manifest import BLANK_SYMBOL
from .model import ModelConfig, TinyCTC, save_checkpoint

BOUNDARY_SYMBOL = "|"


def read_references(path: str | Path) -> list[tuple[str, str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise BridgeError(f"{path}:{lineno}: expected id<TAB>reference")
            utt_id, ref = line.split("\t", 1)
            if not utt_id:
                raise BridgeError(f"{path}:{lineno}: empty utterance id")
            rows.append((utt_id, ref))
    return rows


def reference_units(reference: str) -> list[str]:
    """Split a reference string into CTC label units.

    Fields are whitespace-separated; leading boundary markers peel off
    as standalone units, the remainder of the field is one unit."""
    units = []
    for field in reference.split():
        while field.startswith(BOUNDARY_SYMBOL):
            units.append(BOUNDARY_SYMBOL)
            field = field[len(BOUNDARY_SYMBOL) :]
        if field:
            units.append(field)
    return units


def tokens_from_references(rows: list[tuple[str, str]]) -> list[str]:
    """Blank, boundary, then every unit the references use, sorted."""
    units: set[str] = set()
    for _utt_id, ref in rows:
        units.update(reference_units(ref))
    units.discard(BOUNDARY_SYMBOL)
    return [BLANK_SYMBOL, BOUNDARY_SYMBOL, *sorted(units)]


def read_sidecar_tokens(path: str | Path) -> list[str]:
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                raise BridgeError(f"{path}:{lineno}: empty vocab line")
            tokens.append(line)
    if not tokens or tokens[0] != BLANK_SYMBOL:
        raise BridgeError(f"{path}: token id 0 must be {BLANK_SYMBOL!r}")
    return tokens


@dataclass(frozen=True)
class FinetuneConfig:
    steps: int = 50
    lr: float = 3e-3
    hidden: int = 48
    heads: int = 2
    layers: int = 1
    kernel: int = 200
    stride: int = 160
    seed: int = 0

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise BridgeError(f"steps must be >= 1, got {self.steps}")
        if self.lr <= 0.0:
            raise BridgeError(f"learning rate must be positive, got {self.lr}")


@dataclass(frozen=True)
class FinetuneResult:
    checkpoint: Path
    tokens: tuple[str, ...]
    losses: tuple[float, ...]


def finetune_stub(
    refs_path: str | Path,
    audio_dir: str | Path,
    out_path: str | Path,
    vocab_path: str | Path | None = None,
    config: FinetuneConfig = FinetuneConfig(),
) -> FinetuneResult:
    """Full-batch CTC training of a fresh model on a reference file.

    The alphabet comes from the vocab sidecar when given (its order is
    authoritative), otherwise from the references themselves.  Every
    reference unit must be coverable, and every waveform must yield at
    least as many frames as its CTC target needs."""
    rows = read_references(refs_path)
    if not rows:
        raise BridgeError(f"{refs_path}: no references to train on")
    tokens = read_sidecar_tokens(vocab_path) if vocab_path else tokens_from_references(rows)
    index = {tok: i for i, tok in enumerate(tokens)}

    torch.manual_seed(config.seed)
    model = TinyCTC(
        ModelConfig(
            vocab_size=len(tokens),
            hidden=config.hidden,
            heads=config.heads,
            layers=config.layers,
            kernel=config.kernel,
            stride=config.stride,
        )
    )

    batch = []
    for utt_id, ref in rows:
        target = []
        for unit in reference_units(ref):
            if unit not in index:
                raise BridgeError(f"reference unit {unit!r} of {utt_id!r} is not in the vocab")
            target.append(index[unit])
        samples = read_wave(Path(audio_dir) / f"{utt_id}.wav")
        frames = model.frame_count(len(samples))
        # CTC needs a blank frame between equal neighbours.
        needed = len(target) + sum(a == b for a, b in zip(target, target[1:]))
        if frames < needed:
            raise BridgeError(
                f"{utt_id!r}: {frames} frames cannot carry a {needed}-state CTC target"
            )
        batch.append(
            (
                torch.from_numpy(samples)[None],
                torch.tensor(target, dtype=torch.long)[None],
                frames,
            )
        )

    criterion = nn.CTCLoss(blank=0, zero_infinity=True)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    model.train()
    losses = []
    for _step in range(config.steps):
        optimizer.zero_grad()
        total = torch.zeros(())
        for wave, target, frames in batch:
            log_probs = torch.log_softmax(model(wave), dim=-1)
            total = total + criterion(
                log_probs.transpose(0, 1),
                target,
                torch.tensor([frames]),
                torch.tensor([target.shape[1]]),
            )
        loss = total / len(batch)
        loss.backward()
        optimizer.step()
        losses.append(float(loss.detach()))

    model.eval()
    save_checkpoint(model, tokens, out_path)
    return FinetuneResult(
        checkpoint=Path(out_path), tokens=tuple(tokens), losses=tuple(losses)
    )
