"""Desk-scale CTC acoustic model.

A stand-in with the same output contract as the full-scale acoustic
models this bridge was built for: waveform in, one row of scores per
frame over a CTC alphabet out.  Conv frontend for downsampling, a small
transformer encoder, a linear head.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from .errors import BridgeError


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    hidden: int = 48
    heads: int = 2
    layers: int = 1
    kernel: int = 200
    stride: int = 160

    def __post_init__(self) -> None:
        if self.vocab_size < 2:
            raise BridgeError(f"vocab size must be >= 2, got {self.vocab_size}")
        if self.hidden % self.heads:
            raise BridgeError(f"hidden {self.hidden} not divisible by {self.heads} heads")
        if self.kernel < 1 or self.stride < 1:
            raise BridgeError(f"bad frontend geometry kernel={self.kernel} stride={self.stride}")


class TinyCTC(nn.Module):
    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        self.frontend = nn.Conv1d(1, config.hidden, config.kernel, stride=config.stride)
        layer = nn.TransformerEncoderLayer(
            d_model=config.hidden,
            nhead=config.heads,
            dim_feedforward=2 * config.hidden,
            dropout=0.0,
            activation="gelu",
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, config.layers, enable_nested_tensor=False)
        self.head = nn.Linear(config.hidden, config.vocab_size)

    def frame_count(self, samples: int) -> int:
        if samples < self.config.kernel:
            raise BridgeError(
                f"waveform of {samples} samples shorter than the {self.config.kernel}-sample frontend kernel"
            )
        return (samples - self.config.kernel) // self.config.stride + 1

    def forward(self, waveform: torch.Tensor) -> torch.Tensor:
        """(batch, samples) float waveform -> (batch, frames, vocab) raw scores."""
        x = self.frontend(waveform.unsqueeze(1))
        x = torch.nn.functional.gelu(x).transpose(1, 2)
        x = self.encoder(x)
        return self.head(x)


def save_checkpoint(model: TinyCTC, tokens: list[str], path: str | Path) -> None:
    torch.save(
        {"config": asdict(model.config), "tokens": list(tokens), "state": model.state_dict()},
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[TinyCTC, ModelConfig, list[str]]:
    """Rebuild the model in eval mode; returns its training-time token list."""
    try:
        blob = torch.load(path, map_location="cpu", weights_only=True)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise BridgeError(f"{path}: unreadable checkpoint ({exc})") from exc
    for key in ("config", "tokens", "state"):
        if key not in blob:
            raise BridgeError(f"{path}: checkpoint is missing {key!r}")
    config = ModelConfig(**blob["config"])
    tokens = [str(t) for t in blob["tokens"]]
    if len(tokens) != config.vocab_size:
        raise BridgeError(
            f"{path}: checkpoint lists {len(tokens)} tokens for a {config.vocab_size}-way head"
        )
    model = TinyCTC(config)
    model.load_state_dict(blob["state"])
    model.eval()
    return model, config, tokens
