"""Command line entry points: export and finetune.

Exit codes follow the consumer's convention: 0 success, 1 for missing
or unreadable files, 2 for contract violations and usage errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .errors import BridgeError
from .export import export_emissions
from .finetune import FinetuneConfig, finetune_stub
from .manifest import load_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="promdec-bridge",
        description="export CTC log-probabilities as PROMEM1 files; fine-tune the desk-scale model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="run a checkpoint over a manifest of utterances")
    p.add_argument("--manifest", required=True, help="JSON export manifest")

    p = sub.add_parser("finetune", help="train a fresh CTC model on a reference file")
    p.add_argument("--refs", required=True, help="id<TAB>reference TSV")
    p.add_argument("--audio-dir", required=True, help="directory of <id>.wav files")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--vocab", default=None, help="sidecar fixing the token order")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--lr", type=float, default=3e-3)
    p.add_argument("--hidden", type=int, default=48)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_export(args) -> int:
    manifest = load_manifest(args.manifest)
    written = export_emissions(manifest)
    print(f"exported {len(written)} utterances to {manifest.out_dir}")
    return 0


def _cmd_finetune(args) -> int:
    config = FinetuneConfig(
        steps=args.steps,
        lr=args.lr,
        hidden=args.hidden,
        layers=args.layers,
        seed=args.seed,
    )
    result = finetune_stub(
        args.refs, args.audio_dir, args.out, vocab_path=args.vocab, config=config
    )
    print(
        f"trained {len(result.losses)} steps over {len(result.tokens)} tokens: "
        f"loss {result.losses[0]:.4f} -> {result.losses[-1]:.4f}"
    )
    print(f"wrote {result.checkpoint}")
    return 0


_COMMANDS = {"export": _cmd_export, "finetune": _cmd_finetune}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 1
    except BridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
