"""Bridge between a CTC acoustic model and the decoding toolkit.

Exports frame-level log-probabilities from a desk-scale transformer CTC
model into PROMEM1 emission files with vocab sidecars, and carries a
minimal fine-tuning skeleton for detector and tagged-character reference
formats.  The consumer side never sees this package: the contract is the
file formats alone.
"""

from .audio import SAMPLE_RATE, read_wave, write_wave
from .emfile import greedy_labels, write_promem1, write_sidecar
from .errors import BridgeError
from .export import export_emissions, utterance_log_probs
from .finetune import (
    FinetuneConfig,
    FinetuneResult,
    finetune_stub,
    read_references,
    reference_units,
    tokens_from_references,
)
from .manifest import BLANK_SYMBOL, ExportManifest, load_manifest
from .model import ModelConfig, TinyCTC, load_checkpoint, save_checkpoint

__all__ = [
    "BLANK_SYMBOL",
    "BridgeError",
    "ExportManifest",
    "FinetuneConfig",
    "FinetuneResult",
    "ModelConfig",
    "SAMPLE_RATE",
    "TinyCTC",
    "export_emissions",
    "finetune_stub",
    "greedy_labels",
    "load_checkpoint",
    "load_manifest",
    "read_references",
    "read_wave",
    "reference_units",
    "save_checkpoint",
    "tokens_from_references",
    "utterance_log_probs",
    "write_promem1",
    "write_sidecar",
    "write_wave",
]
