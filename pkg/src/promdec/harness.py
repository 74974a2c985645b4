"""Experiment orchestration: cross-validation fold plans, end-to-end
detector and ASR evaluation runs, and report assembly.

Everything here is deterministic: folds are a pure function of (corpus,
k, seed, holdout set), utterances are processed in sorted-id order (a
worker pool may compute records concurrently, but results merge in id
order), and reports serialize with sorted keys, so identical inputs
produce byte-identical outputs.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .corpus import Corpus, ProminenceLevel, TaggingMode, Utterance, asr_reference
from .decoder import DecodeConfig, beam_decode, decode_lexfree_tagged
from .emissions import EmissionMatrix, marginalize_tags, read_emissions
from .errors import DegenerateCountsError, HarnessError
from .lm import NGramModel, estimate_mkn, count_ngrams
from .metrics import (
    EvalReport,
    aggregate_folds,
    aligned_accuracy,
    per,
    percent_aligned,
    wer,
)
from .prominence import parse_levels, render_levels, segment_words, extract_sequence
from .vocab import (
    Lexicon,
    LexiconTrie,
    TokenKind,
    TokenSet,
    build_lexicon,
    build_trie,
    read_vocab,
    strip_tag_image,
)

EMISSION_SUFFIX = ".promem1"


# ---------------------------------------------------------------------------
# Fold plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    """Conversation-granular k-fold assignment of utterances."""

    k: int
    assignment: dict[str, int]
    holdout_conversations: frozenset[str]
    seed: int

    def test_ids(self, fold: int) -> list[str]:
        if not 0 <= fold < self.k:
            raise HarnessError(f"fold index {fold} outside 0..{self.k - 1}")
        return sorted(u for u, f in self.assignment.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        if not 0 <= fold < self.k:
            raise HarnessError(f"fold index {fold} outside 0..{self.k - 1}")
        return sorted(u for u, f in self.assignment.items() if f != fold)


def make_folds(
    corpus: Corpus, k: int = 10, seed: int = 0, holdout: Iterable[str] = ()
) -> FoldPlan:
    """Shuffle conversations with the seed, deal them round-robin into k
    folds, and assign each conversation's utterances as a block.  Holdout
    conversations appear in no fold."""
    if k < 2:
        raise HarnessError(f"need k >= 2 folds, got {k}")
    holdout_set = frozenset(holdout)
    conversations = [c for c in corpus.conversation_ids() if c not in holdout_set]
    if len(conversations) < k:
        raise HarnessError(
            f"{len(conversations)} non-holdout conversations cannot fill {k} folds"
        )
    shuffled = sorted(conversations)
    random.Random(seed).shuffle(shuffled)
    fold_of_conv = {conv: i % k for i, conv in enumerate(shuffled)}
    assignment = {
        utt.id: fold_of_conv[utt.conversation_id]
        for utt in corpus
        if utt.conversation_id not in holdout_set
    }
    return FoldPlan(
        k=k, assignment=assignment, holdout_conversations=holdout_set, seed=seed
    )


# ---------------------------------------------------------------------------
# Emission loading
# ---------------------------------------------------------------------------


def emission_path(emissions_dir: str | Path, utt_id: str) -> Path:
    return Path(emissions_dir) / f"{utt_id}{EMISSION_SUFFIX}"


def load_utterance_emissions(
    emissions_dir: str | Path, utt_id: str
) -> tuple[EmissionMatrix, TokenSet]:
    path = emission_path(emissions_dir, utt_id)
    if not path.exists():
        raise HarnessError(f"missing emission file for utterance {utt_id!r}: {path}")
    sidecar = Path(str(path) + ".vocab")
    if not sidecar.exists():
        raise HarnessError(f"missing vocab sidecar for utterance {utt_id!r}: {sidecar}")
    matrix = read_emissions(path)
    tokenset = read_vocab(sidecar)
    if matrix.vocab_size != len(tokenset):
        raise HarnessError(
            f"utterance {utt_id!r}: emission width {matrix.vocab_size} does not "
            f"match sidecar alphabet size {len(tokenset)}"
        )
    return matrix, tokenset


def check_tokenset_mode(tokenset: TokenSet, mode: TaggingMode) -> None:
    """Reject alphabets that cannot have come from this tagging mode."""
    for tok in tokenset:
        if tok.kind is not TokenKind.CHAR:
            continue
        if mode.is_detector:
            if tok.tag is not None or tok.base not in ("0", "1", "2"):
                raise HarnessError(
                    f"token {tok.text!r} is not a detector symbol (mode {mode.value})"
                )
            level = ProminenceLevel(int(tok.base))
            if level not in mode.level_inventory:
                raise HarnessError(
                    f"level digit {tok.base!r} not allowed under mode {mode.value}"
                )
        elif tok.tag is not None and tok.tag not in mode.tagged_levels:
            raise HarnessError(
                f"tagged token {tok.text!r} not allowed under mode {mode.value}"
            )


# ---------------------------------------------------------------------------
# Detector evaluation
# ---------------------------------------------------------------------------


def _map_records(
    utts: list[Utterance], worker: Callable[[Utterance], dict], workers: int
) -> list[dict]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            by_id = dict(zip((u.id for u in utts), pool.map(worker, utts)))
        return [by_id[u.id] for u in utts]
    return [worker(u) for u in utts]


def _select(corpus: Corpus, utt_ids: Optional[Iterable[str]]) -> list[Utterance]:
    if utt_ids is None:
        utts = list(corpus)
    else:
        utts = [corpus.by_id(u) for u in utt_ids]
    return sorted(utts, key=lambda u: u.id)


def run_detector_eval(
    corpus: Corpus,
    emissions_dir: str | Path,
    mode: TaggingMode,
    utt_ids: Optional[Iterable[str]] = None,
    workers: int = 1,
) -> EvalReport:
    """Greedy-decode detector emissions, vote out levels, and score
    PER / %Aligned / alignment-gated accuracy against the corpus."""
    if not mode.is_detector:
        raise HarnessError(f"detector evaluation needs a Det mode, got {mode.value}")
    utts = _select(corpus, utt_ids)

    def one(utt: Utterance) -> dict:
        matrix, tokenset = load_utterance_emissions(emissions_dir, utt.id)
        check_tokenset_mode(tokenset, mode)
        hyp = decode_lexfree_tagged(matrix, tokenset)
        tokens = [tokenset.token(i) for i in hyp.token_ids]
        hyp_levels = extract_sequence(tokens)
        ref_levels = utt.word_levels
        if any(lv is None for lv in ref_levels):
            raise HarnessError(f"utterance {utt.id!r} has unannotated prosodic words")
        return {
            "id": utt.id,
            "conversation": utt.conversation_id,
            "ref": render_levels(ref_levels),
            "hyp": render_levels(hyp_levels),
            "aligned": len(ref_levels) == len(hyp_levels),
        }

    records = _map_records(utts, one, workers)
    return EvalReport(
        records=tuple(records), metrics=recompute_detector_metrics(records)
    )


def recompute_detector_metrics(records: Sequence[dict]) -> dict:
    refs = [parse_levels(r["ref"]) for r in records]
    hyps = [parse_levels(r["hyp"]) for r in records]
    gated = [r["aligned"] for r in records]
    for r, rf, hf in zip(records, refs, hyps):
        if r["aligned"] != (len(rf) == len(hf)):
            raise HarnessError(f"record {r['id']!r}: aligned flag contradicts lengths")
    g_refs = [r for r, g in zip(refs, gated) if g]
    g_hyps = [h for h, g in zip(hyps, gated) if g]
    acc = aligned_accuracy(g_refs, g_hyps)
    return {
        "utterances": len(records),
        "gated": sum(1 for g in gated if g),
        "per": per(refs, hyps),
        "percent_aligned": percent_aligned(gated),
        "accuracy": acc.accuracy,
        "recall": acc.recall,
        "f1": acc.f1,
        "confusion": [list(row) for row in acc.confusion.counts],
        "confusion_unassigned": list(acc.confusion.unassigned),
    }


# ---------------------------------------------------------------------------
# ASR evaluation
# ---------------------------------------------------------------------------


def run_asr_eval(
    corpus: Corpus,
    emissions_dir: str | Path,
    mode: TaggingMode,
    trie: LexiconTrie,
    lm: Optional[NGramModel] = None,
    decode: DecodeConfig = DecodeConfig(),
    utt_ids: Optional[Iterable[str]] = None,
    workers: int = 1,
) -> EvalReport:
    """Decode character-mode emissions in three regimes and score them.

    Word error rates come from the greedy tagged pass (tags stripped),
    the lexicon-constrained beam, and, when an LM is supplied, the
    LM-weighted beam.  Prominence metrics always derive from the greedy
    tagged pass, the only regime whose output carries tags."""
    if mode.is_detector:
        raise HarnessError(f"ASR evaluation needs a character mode, got {mode.value}")
    utts = _select(corpus, utt_ids)

    def one(utt: Utterance) -> dict:
        matrix, tokenset = load_utterance_emissions(emissions_dir, utt.id)
        check_tokenset_mode(tokenset, mode)
        greedy = decode_lexfree_tagged(matrix, tokenset)
        tokens = [tokenset.token(i) for i in greedy.token_ids]
        segments = segment_words(tokens)
        lexfree_words = ["".join(t.base for t in seg.tokens) for seg in segments]
        hyp_levels = extract_sequence(tokens)

        base = strip_tag_image(tokenset)
        base_matrix = marginalize_tags(matrix, tokenset, base)
        lex_hyp = beam_decode(base_matrix, base, trie, None, decode)
        record = {
            "id": utt.id,
            "conversation": utt.conversation_id,
            "ref_words": utt.orthography,
            "ref_levels": render_levels(utt.token_levels),
            "lexfree_words": " ".join(lexfree_words),
            "lex_words": " ".join(lex_hyp.words or ()),
            "hyp_levels": render_levels(hyp_levels),
            "aligned": len(utt.orthographic_tokens) == len(lexfree_words),
        }
        if lm is not None:
            lm_hyp = beam_decode(base_matrix, base, trie, lm, decode)
            record["lm_words"] = " ".join(lm_hyp.words or ())
        return record

    records = _map_records(utts, one, workers)
    return EvalReport(records=tuple(records), metrics=recompute_asr_metrics(records))


def recompute_asr_metrics(records: Sequence[dict]) -> dict:
    ref_words = [r["ref_words"].split() for r in records]
    refs = [parse_levels(r["ref_levels"]) for r in records]
    hyps = [parse_levels(r["hyp_levels"]) for r in records]
    gated = [r["aligned"] for r in records]
    g_refs = [r for r, g in zip(refs, gated) if g]
    g_hyps = [h for h, g in zip(hyps, gated) if g]
    acc = aligned_accuracy(g_refs, g_hyps)
    metrics = {
        "utterances": len(records),
        "gated": sum(1 for g in gated if g),
        "wer_lexfree": wer(ref_words, [r["lexfree_words"].split() for r in records]),
        "wer_lex": wer(ref_words, [r["lex_words"].split() for r in records]),
        "per": per(refs, hyps),
        "percent_aligned": percent_aligned(gated),
        "accuracy": acc.accuracy,
        "recall": acc.recall,
        "f1": acc.f1,
        "confusion": [list(row) for row in acc.confusion.counts],
        "confusion_unassigned": list(acc.confusion.unassigned),
    }
    if all("lm_words" in r for r in records) and records:
        metrics["wer_lm"] = wer(ref_words, [r["lm_words"].split() for r in records])
    return metrics


# ---------------------------------------------------------------------------
# Cross-validation orchestration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    task: str  # "detector" or "asr"
    mode: TaggingMode
    decode: DecodeConfig = DecodeConfig()
    use_lm: bool = False
    lm_order: int = 3
    workers: int = 1

    def __post_init__(self) -> None:
        if self.task not in ("detector", "asr"):
            raise HarnessError(f"unknown task {self.task!r}")
        if self.task == "detector" and not self.mode.is_detector:
            raise HarnessError(f"task detector needs a Det mode, got {self.mode.value}")
        if self.task == "asr" and self.mode.is_detector:
            raise HarnessError(f"task asr needs a character mode, got {self.mode.value}")


def train_fold_lm(train_utts: Sequence[Utterance], order: int = 3) -> tuple[NGramModel, str]:
    """Train the fold's LM; degenerate count-of-counts fall back to the
    documented fixed 0.5 discount, and the choice is reported."""
    sentences = [u.orthographic_tokens for u in train_utts]
    counts = count_ngrams(sentences, order)
    try:
        return estimate_mkn(counts), "mkn"
    except DegenerateCountsError:
        return estimate_mkn(counts, fixed_discount=0.5), "fixed-0.5"


def crossval(
    corpus: Corpus, plan: FoldPlan, emissions_dir: str | Path, cfg: RunConfig
) -> dict[str, EvalReport]:
    """Run every fold (plus the holdout conversations, when present) and
    aggregate.  The lexicon spans the whole corpus; LMs train per fold on
    that fold's training split only."""
    reports: dict[str, EvalReport] = {}
    trie = None
    if cfg.task == "asr":
        trie = build_trie(build_lexicon(corpus))

    def evaluate(test_ids: list[str], train_ids: list[str]) -> EvalReport:
        if cfg.task == "detector":
            return run_detector_eval(
                corpus, emissions_dir, cfg.mode, test_ids, workers=cfg.workers
            )
        lm = None
        discount = None
        if cfg.use_lm:
            train_utts = [corpus.by_id(u) for u in train_ids]
            lm, discount = train_fold_lm(train_utts, cfg.lm_order)
        report = run_asr_eval(
            corpus, emissions_dir, cfg.mode, trie, lm,
            decode=cfg.decode, utt_ids=test_ids, workers=cfg.workers,
        )
        if discount is not None:
            metrics = dict(report.metrics)
            metrics["lm_discount"] = discount
            report = EvalReport(records=report.records, metrics=metrics)
        return report

    for fold in range(plan.k):
        reports[f"fold_{fold:02d}"] = evaluate(plan.test_ids(fold), plan.train_ids(fold))

    fold_reports = [reports[f"fold_{f:02d}"] for f in range(plan.k)]
    reports["aggregate"] = aggregate_folds(fold_reports)

    if plan.holdout_conversations:
        holdout_ids = sorted(
            u.id for u in corpus if u.conversation_id in plan.holdout_conversations
        )
        train_ids = sorted(plan.assignment)
        reports["holdout"] = evaluate(holdout_ids, train_ids)
    return reports


# ---------------------------------------------------------------------------
# Flat key=value config files
# ---------------------------------------------------------------------------


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat key=value file; blank lines and #-comments allowed."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise HarnessError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out
