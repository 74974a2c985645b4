"""Export manifests: which checkpoint, which alphabet, which utterances.

JSON layout:

    {
      "checkpoint": "model.pt",
      "tokens": ["<blank>", "|", "0", "2"],
      "utterances": [{"id": "conv_0001", "audio": "conv_0001.wav"}],
      "out_dir": "emissions"
    }

Relative paths resolve against the manifest's own directory.  The token
list is authoritative for the exported sidecars and must match the
checkpoint head dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import BridgeError

BLANK_SYMBOL = "<blank>"


@dataclass(frozen=True)
class ExportManifest:
    checkpoint: Path
    tokens: tuple[str, ...]
    utterances: tuple[tuple[str, Path], ...]
    out_dir: Path

    def __post_init__(self) -> None:
        if not self.tokens:
            raise BridgeError("manifest token list is empty")
        if self.tokens[0] != BLANK_SYMBOL:
            raise BridgeError(f"token id 0 must be {BLANK_SYMBOL!r}, got {self.tokens[0]!r}")
        if len(set(self.tokens)) != len(self.tokens):
            raise BridgeError("duplicate tokens in manifest")
        seen: set[str] = set()
        for utt_id, _audio in self.utterances:
            if not utt_id:
                raise BridgeError("empty utterance id in manifest")
            if utt_id in seen:
                raise BridgeError(f"duplicate utterance id {utt_id!r}")
            seen.add(utt_id)


def _require_keys(obj: dict, required: set[str], where: str) -> None:
    missing = required - obj.keys()
    if missing:
        raise BridgeError(f"{where}: missing {sorted(missing)}")
    unknown = obj.keys() - required
    if unknown:
        raise BridgeError(f"{where}: unknown keys {sorted(unknown)}")


def load_manifest(path: str | Path) -> ExportManifest:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BridgeError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise BridgeError(f"{path}: manifest must be a JSON object")
    _require_keys(obj, {"checkpoint", "tokens", "utterances", "out_dir"}, str(path))
    if not isinstance(obj["tokens"], list) or not all(isinstance(t, str) for t in obj["tokens"]):
        raise BridgeError(f"{path}: tokens must be a list of strings")
    if not isinstance(obj["utterances"], list):
        raise BridgeError(f"{path}: utterances must be a list")

    base = path.resolve().parent
    utterances = []
    for i, entry in enumerate(obj["utterances"]):
        if not isinstance(entry, dict):
            raise BridgeError(f"{path}: utterance {i} must be an object")
        _require_keys(entry, {"id", "audio"}, f"{path}: utterance {i}")
        utterances.append((str(entry["id"]), base / str(entry["audio"])))
    return ExportManifest(
        checkpoint=base / str(obj["checkpoint"]),
        tokens=tuple(obj["tokens"]),
        utterances=tuple(utterances),
        out_dir=base / str(obj["out_dir"]),
    )
