"""Command-line interface.

Subcommands cover the full pipeline: text normalization, reference and
vocabulary generation, lexicon and LM training, synthetic data
generation, decoding, prominence extraction, scoring, and
cross-validation.  Exit codes: 0 success, 1 missing or unreadable
files, 2 usage and data errors.
A flat key=value config file (--config) supplies flag defaults; explicit
flags win.  The seed defaults to the PROMDEC_SEED environment variable.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import corpus as corpus_mod
from .corpus import (
    Corpus,
    TaggingMode,
    asr_reference,
    detector_reference,
    filter_corpus,
    load_corpus,
    normalize_text,
    read_references,
    save_corpus,
    write_references,
)
from .decoder import DecodeConfig, DecodeMode, beam_decode, greedy_decode
from .emissions import marginalize_tags, read_emissions, synth_emissions, write_emissions
from .errors import PromdecError
from .harness import (
    EMISSION_SUFFIX,
    RunConfig,
    check_tokenset_mode,
    crossval,
    make_folds,
    read_config,
    recompute_detector_metrics,
)
from .lm import read_arpa, train_lm, write_arpa
from .metrics import EvalReport, format_pct, render_table, wer
from .prominence import (
    extract_sequence,
    read_prominence,
    render_levels,
    segment_words,
    write_prominence,
)
from .synth import corrupt_utterance, make_corpus, restrict_levels, utterance_seed
from .vocab import (
    build_lexicon,
    build_trie,
    build_vocab,
    parse_reference,
    read_lexicon,
    read_vocab,
    render_tokens,
    strip_tag_image,
    write_lexicon,
    write_vocab,
)

_MODES = {m.value: m for m in TaggingMode}

# Config-file keys and the type each one coerces to before becoming a
# parser default.  Every key corresponds to a CLI flag dest.
_CONFIG_TYPES = {
    "seed": int,
    "k": int,
    "order": int,
    "beam_width": int,
    "workers": int,
    "conversations": int,
    "utterances": int,
    "frames_per_token": int,
    "min_words": int,
    "max_words": int,
    "lm_weight": float,
    "word_bonus": float,
    "noise": float,
    "flip_rate": float,
    "length_error_rate": float,
    "fixed_discount": float,
    "mode": str,
    "task": str,
    "holdout": str,
    "hyp_format": str,
}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_seed() -> int:
    env = os.environ.get("PROMDEC_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise PromdecError(f"PROMDEC_SEED must be an integer, got {env!r}")


def _mode(name: str) -> TaggingMode:
    try:
        return _MODES[name]
    except KeyError:
        raise PromdecError(
            f"unknown tagging mode {name!r}; choose from {', '.join(sorted(_MODES))}"
        )


def _build_parser() -> _Parser:
    parser = _Parser(prog="promdec", description=__doc__)
    parser.add_argument("--config", help="flat key=value file with flag defaults")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("normalize", parents=[], help="normalize raw text lines")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("make-refs", help="render training reference strings")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-flagged", action="store_true",
                   help="keep utterances carrying exclusion flags")

    p = sub.add_parser("build-vocab", help="collect the CTC alphabet of a reference file")
    p.add_argument("--refs", required=True)
    p.add_argument("--mode", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-lexicon", help="word-to-characters lexicon from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-flagged", action="store_true")

    p = sub.add_parser("train-lm", help="train a modified Kneser-Ney n-gram model")
    p.add_argument("--text", required=True, help="one sentence per line")
    p.add_argument("--out", required=True, help="ARPA output path")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--fixed-discount", type=float, default=None,
                   help="absolute-discounting fallback for degenerate counts")
    p.add_argument("--closed-vocab", action="store_true")

    p = sub.add_parser("gen-synth", help="generate a synthetic corpus plus emissions")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--mode", required=True)
    p.add_argument("--conversations", type=int, default=12)
    p.add_argument("--utterances", type=int, default=6, help="per conversation")
    p.add_argument("--min-words", type=int, default=1)
    p.add_argument("--max-words", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--flip-rate", type=float, default=0.0)
    p.add_argument("--length-error-rate", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--frames-per-token", type=int, default=3)

    p = sub.add_parser("decode", help="decode every emission file in a directory")
    p.add_argument("--mode", required=True, choices=[m.value for m in DecodeMode])
    p.add_argument("--emissions", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--lm")
    p.add_argument("--beam-width", type=int, default=100)
    p.add_argument("--lm-weight", type=float, default=0.8)
    p.add_argument("--word-bonus", type=float, default=1.0)

    p = sub.add_parser("extract-prom", help="majority-vote levels from hypotheses")
    p.add_argument("--hyp", required=True, help="hypothesis TSV from lexfree decode")
    p.add_argument("--mode", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("score", help="score hypotheses against references")
    p.add_argument("--task", required=True, choices=["detector", "asr"])
    p.add_argument("--mode", required=True)
    p.add_argument("--ref", required=True, help="reference strings TSV")
    p.add_argument("--hyp", required=True)
    p.add_argument("--json", dest="json_out")
    p.add_argument("--table", dest="table_out")
    p.add_argument("--hyp-format", choices=["levels", "words", "tokens"], default=None)

    p = sub.add_parser("crossval", help="k-fold cross-validation pipeline")
    p.add_argument("--task", required=True, choices=["detector", "asr"])
    p.add_argument("--corpus", required=True)
    p.add_argument("--emissions", required=True)
    p.add_argument("--mode", required=True)
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--holdout", action="append", default=[],
                   help="conversation id to hold out (repeatable)")
    p.add_argument("--lm", action="store_true", help="add the LM-weighted beam regime")
    p.add_argument("--order", type=int, default=3, dest="order")
    p.add_argument("--beam-width", type=int, default=100)
    p.add_argument("--lm-weight", type=float, default=0.8)
    p.add_argument("--word-bonus", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> list[str]:
    """Pull --config out of argv and install its values as defaults on
    every subparser that has a matching destination."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    values = read_config(known.config)
    coerced: dict[str, object] = {}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        if dest not in _CONFIG_TYPES:
            raise PromdecError(f"unknown config key {key!r} in {known.config}")
        try:
            coerced[dest] = _CONFIG_TYPES[dest](raw)
        except ValueError:
            raise PromdecError(f"config key {key!r} has invalid value {raw!r}")
    for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
        for sp in action.choices.values():
            for flag in sp._actions:
                if flag.dest in coerced:
                    sp.set_defaults(**{flag.dest: coerced[flag.dest]})
                    flag.required = False
    return argv


def _load_filtered(path: str, keep_flagged: bool) -> Corpus:
    corpus = load_corpus(path)
    return corpus if keep_flagged else filter_corpus(corpus)


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------


def _cmd_normalize(args) -> int:
    with open(args.infile, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    with open(args.out, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(normalize_text(line) + "\n")
    return 0


def _cmd_make_refs(args) -> int:
    mode = _mode(args.mode)
    corpus = _load_filtered(args.corpus, args.keep_flagged)
    render = detector_reference if mode.is_detector else asr_reference
    write_references(((u.id, render(u, mode)) for u in corpus), args.out)
    return 0


def _cmd_build_vocab(args) -> int:
    mode = _mode(args.mode)
    refs = [ref for _, ref in read_references(args.refs)]
    write_vocab(build_vocab(refs, mode), args.out)
    return 0


def _cmd_build_lexicon(args) -> int:
    corpus = _load_filtered(args.corpus, args.keep_flagged)
    write_lexicon(build_lexicon(corpus), args.out)
    return 0


def _cmd_train_lm(args) -> int:
    with open(args.text, encoding="utf-8") as fh:
        sentences = [line.split() for line in fh.read().splitlines()]
    model = train_lm(
        sentences,
        order=args.order,
        fixed_discount=args.fixed_discount,
        closed_vocab=args.closed_vocab,
    )
    write_arpa(model, args.out)
    return 0


def _cmd_gen_synth(args) -> int:
    mode = _mode(args.mode)
    seed = args.seed if args.seed is not None else _default_seed()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emissions_dir = out / "emissions"
    emissions_dir.mkdir(exist_ok=True)

    corpus = restrict_levels(
        make_corpus(
            args.conversations,
            args.utterances,
            seed,
            min_words=args.min_words,
            max_words=args.max_words,
        ),
        mode,
    )
    save_corpus(corpus, out / "corpus.jsonl")

    render = detector_reference if mode.is_detector else asr_reference
    clean_refs = {u.id: render(u, mode) for u in corpus}
    write_references(sorted(clean_refs.items()), out / "refs.tsv")
    with open(out / "sentences.txt", "w", encoding="utf-8") as fh:
        for u in corpus:
            fh.write(u.orthography + "\n")

    spoken_refs = {}
    for u in corpus:
        rng = random.Random(utterance_seed(seed, "corrupt:" + u.id))
        spoken = corrupt_utterance(u, mode, args.flip_rate, args.length_error_rate, rng)
        spoken_refs[u.id] = render(spoken, mode)

    tokenset = build_vocab(
        list(clean_refs.values()) + list(spoken_refs.values()), mode
    )
    write_vocab(tokenset, out / "vocab.txt")
    for utt_id in sorted(spoken_refs):
        ids = tokenset.ids(parse_reference(spoken_refs[utt_id], mode))
        matrix = synth_emissions(
            ids,
            frames_per_token=args.frames_per_token,
            noise=args.noise,
            seed=utterance_seed(seed, "emit:" + utt_id),
            vocab_size=len(tokenset),
        )
        path = emissions_dir / f"{utt_id}{EMISSION_SUFFIX}"
        write_emissions(matrix, path)
        write_vocab(tokenset, Path(str(path) + ".vocab"))
    return 0


def _cmd_decode(args) -> int:
    tokenset = read_vocab(args.vocab)
    mode = DecodeMode(args.mode)
    config = DecodeConfig(
        beam_width=args.beam_width,
        lm_weight=args.lm_weight,
        word_bonus=args.word_bonus,
        mode=mode,
    )
    trie = None
    lm = None
    if mode is not DecodeMode.LEXFREE:
        if not args.lexicon:
            raise PromdecError(f"decode mode {mode.value} needs --lexicon")
        trie = build_trie(read_lexicon(args.lexicon))
    if mode is DecodeMode.LMBEAM:
        if not args.lm:
            raise PromdecError("decode mode lmbeam needs --lm")
        lm = read_arpa(args.lm)

    files = sorted(Path(args.emissions).glob(f"*{EMISSION_SUFFIX}"))
    if not files:
        raise PromdecError(f"no {EMISSION_SUFFIX} files in {args.emissions}")
    rows = []
    for path in files:
        utt_id = path.name[: -len(EMISSION_SUFFIX)]
        matrix = read_emissions(path)
        if matrix.vocab_size != len(tokenset):
            raise PromdecError(
                f"{path}: emission width {matrix.vocab_size} does not match "
                f"alphabet size {len(tokenset)}"
            )
        if mode is DecodeMode.LEXFREE:
            hyp = greedy_decode(matrix)
            text = render_tokens(tokenset.token(i) for i in hyp.token_ids)
        else:
            base = strip_tag_image(tokenset)
            base_matrix = marginalize_tags(matrix, tokenset, base)
            hyp = beam_decode(
                base_matrix, base, trie, lm if mode is DecodeMode.LMBEAM else None, config
            )
            text = " ".join(hyp.words or ())
        rows.append((utt_id, text))
    with open(args.out, "w", encoding="utf-8") as fh:
        for utt_id, text in rows:
            fh.write(f"{utt_id}\t{text}\n")
    return 0


def _cmd_extract_prom(args) -> int:
    mode = _mode(args.mode)
    rows = []
    for utt_id, text in read_references(args.hyp):
        levels = extract_sequence(parse_reference(text, mode))
        rows.append((utt_id, levels))
    write_prominence(rows, args.out)
    return 0


def _read_hyp_tsv(path: str) -> dict[str, str]:
    out = {}
    for utt_id, text in read_references(path):
        out[utt_id] = text
    return out


def _cmd_score(args) -> int:
    mode = _mode(args.mode)
    refs = read_references(args.ref)
    if args.task == "detector":
        hyp_format = args.hyp_format or "levels"
        if hyp_format != "levels":
            raise PromdecError("score --task detector expects --hyp-format levels")
        hyps = dict(read_prominence(args.hyp))
        records = []
        for utt_id, ref_string in refs:
            if utt_id not in hyps:
                raise PromdecError(f"hypothesis file lacks utterance {utt_id!r}")
            ref_levels = extract_sequence(parse_reference(ref_string, mode))
            if any(lv is None for lv in ref_levels):
                raise PromdecError(f"utterance {utt_id!r}: reference has untagged words")
            hyp_levels = hyps[utt_id]
            records.append(
                {
                    "id": utt_id,
                    "ref": render_levels(ref_levels),
                    "hyp": render_levels(hyp_levels),
                    "aligned": len(ref_levels) == len(hyp_levels),
                }
            )
        report = EvalReport(
            records=tuple(records), metrics=recompute_detector_metrics(records)
        )
        table = render_table(
            [
                {
                    "type": mode.value,
                    "test_set": Path(args.hyp).stem,
                    "per": report.metrics["per"],
                    "percent_aligned": report.metrics["percent_aligned"],
                    "accuracy": report.metrics["accuracy"],
                }
            ]
        )
    else:
        hyp_format = args.hyp_format or "words"
        if hyp_format == "levels":
            raise PromdecError("score --task asr expects word or token hypotheses")
        hyps = _read_hyp_tsv(args.hyp)
        records = []
        ref_word_lists = []
        hyp_word_lists = []
        for utt_id, ref_string in refs:
            if utt_id not in hyps:
                raise PromdecError(f"hypothesis file lacks utterance {utt_id!r}")
            ref_tokens = parse_reference(ref_string, mode)
            ref_words = [
                "".join(t.base for t in seg.tokens)
                for seg in segment_words(ref_tokens)
            ]
            if hyp_format == "tokens":
                hyp_tokens = parse_reference(hyps[utt_id], mode)
                hyp_words = [
                    "".join(t.base for t in seg.tokens)
                    for seg in segment_words(hyp_tokens)
                ]
            else:
                hyp_words = hyps[utt_id].split()
            ref_word_lists.append(ref_words)
            hyp_word_lists.append(hyp_words)
            records.append(
                {
                    "id": utt_id,
                    "ref_words": " ".join(ref_words),
                    "hyp_words": " ".join(hyp_words),
                }
            )
        word_error = wer(ref_word_lists, hyp_word_lists)
        metrics = {"utterances": len(records), "wer": word_error}
        report = EvalReport(records=tuple(records), metrics=metrics)
        table = f"Type: {mode.value}  Test set: {Path(args.hyp).stem}  WER: {format_pct(word_error)}\n"
    if args.json_out:
        report.save(args.json_out)
    if args.table_out:
        with open(args.table_out, "w", encoding="utf-8") as fh:
            fh.write(table)
    sys.stdout.write(table)
    return 0


def _cmd_crossval(args) -> int:
    mode = _mode(args.mode)
    seed = args.seed if args.seed is not None else _default_seed()
    corpus = filter_corpus(load_corpus(args.corpus))
    plan = make_folds(corpus, k=args.k, seed=seed, holdout=args.holdout)
    cfg = RunConfig(
        task=args.task,
        mode=mode,
        decode=DecodeConfig(
            beam_width=args.beam_width,
            lm_weight=args.lm_weight,
            word_bonus=args.word_bonus,
            mode=DecodeMode.LMBEAM if args.lm else DecodeMode.LEX,
        ),
        use_lm=args.lm,
        lm_order=args.order,
        workers=args.workers,
    )
    reports = crossval(corpus, plan, args.emissions, cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(reports):
        reports[name].save(out / f"{name}.json")

    rows = []
    for name in [f"fold_{f:02d}" for f in range(plan.k)] + ["aggregate"] + (
        ["holdout"] if "holdout" in reports else []
    ):
        metrics = reports[name].metrics
        rows.append(
            {
                "type": f"{args.task}:{mode.value}",
                "test_set": name,
                "per": metrics.get("per"),
                "percent_aligned": metrics.get("percent_aligned"),
                "accuracy": metrics.get("accuracy"),
            }
        )
    table = render_table(rows)
    with open(out / "table.txt", "w", encoding="utf-8") as fh:
        fh.write(table)
    sys.stdout.write(table)
    return 0


_COMMANDS = {
    "normalize": _cmd_normalize,
    "make-refs": _cmd_make_refs,
    "build-vocab": _cmd_build_vocab,
    "build-lexicon": _cmd_build_lexicon,
    "train-lm": _cmd_train_lm,
    "gen-synth": _cmd_gen_synth,
    "decode": _cmd_decode,
    "extract-prom": _cmd_extract_prom,
    "score": _cmd_score,
    "crossval": _cmd_crossval,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(argv) if argv is not None else sys.argv[1:]
    parser = _build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 1
    except PromdecError as exc:
        print(f"promdec: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"promdec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
