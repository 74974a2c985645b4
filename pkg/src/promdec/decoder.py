"""CTC decoding: greedy best-path, forward scoring, an exhaustive oracle,
and lexicon-trie-constrained prefix beam search with optional n-gram LM.

All scores are natural-log probabilities.  Language-model scores arrive in
log10 and convert at this boundary via ln(10).  Every decoding routine is
deterministic: score ties break toward the lowest token id or the
lexicographically smallest word sequence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .emissions import EmissionMatrix
from .errors import DecodeError
from .lm import BOS, EOS, NGramModel, score as lm_score
from .vocab import LexiconTrie, TokenKind, TokenSet, TrieNode

LN10 = math.log(10.0)
NEG_INF = float("-inf")


def _ladd(a: float, b: float) -> float:
    """log(exp(a) + exp(b)) for scalars, tolerating -inf."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class DecodeMode(Enum):
    LEXFREE = "lexfree"
    LEX = "lex"
    LMBEAM = "lmbeam"


@dataclass(frozen=True)
class DecodeConfig:
    beam_width: int = 100
    lm_weight: float = 0.8
    word_bonus: float = 1.0
    mode: DecodeMode = DecodeMode.LEXFREE

    def __post_init__(self) -> None:
        if self.beam_width < 1:
            raise DecodeError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.lm_weight < 0:
            raise DecodeError(f"lm_weight must be >= 0, got {self.lm_weight}")


@dataclass(frozen=True)
class Hypothesis:
    """Decoder output: a token-id sequence (greedy) or a word sequence
    (beam search), its log score, and per-word frame spans."""

    score: float
    token_ids: Optional[tuple[int, ...]] = None
    words: Optional[tuple[str, ...]] = None
    segments: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.token_ids is not None and 0 in self.token_ids:
            raise DecodeError("hypothesis token sequence contains the blank")


def ctc_collapse(path: Sequence[int], blank_id: int = 0) -> list[int]:
    """Merge adjacent repeats, then delete blanks."""
    out: list[int] = []
    prev: Optional[int] = None
    for tid in path:
        if tid != prev:
            out.append(tid)
        prev = tid
    return [t for t in out if t != blank_id]


def greedy_decode(matrix: EmissionMatrix) -> Hypothesis:
    """Frame-wise argmax (ties to the lowest token id) followed by CTC
    collapse; the score is the chosen path's log-probability."""
    values = matrix.values.astype(np.float64)
    path = values.argmax(axis=1)
    score = float(values[np.arange(matrix.frames), path].sum())
    ids = ctc_collapse(path.tolist())
    segments = _word_spans(path.tolist())
    return Hypothesis(score=score, token_ids=tuple(ids), segments=segments)


def _word_spans(
    path: list[int], blank_id: int = 0, boundary_id: int = 1
) -> tuple[tuple[int, int], ...]:
    """Frame spans of the character runs between boundary emissions."""
    occurrences: list[tuple[int, int, int]] = []  # (token, start, end)
    prev = None
    for t, tid in enumerate(path):
        if tid != blank_id:
            if tid == prev:
                tok, start, _ = occurrences[-1]
                occurrences[-1] = (tok, start, t)
            else:
                occurrences.append((tid, t, t))
        prev = tid
    spans: list[tuple[int, int]] = []
    current: Optional[tuple[int, int]] = None
    for tok, start, end in occurrences:
        if tok == boundary_id:
            if current is not None:
                spans.append(current)
                current = None
        else:
            current = (current[0], end) if current is not None else (start, end)
    if current is not None:
        spans.append(current)
    return tuple(spans)


def decode_lexfree_tagged(matrix: EmissionMatrix, tokenset: TokenSet) -> Hypothesis:
    """Greedy decoding over a tagged alphabet; tags pass through intact."""
    if matrix.vocab_size != len(tokenset):
        raise DecodeError(
            f"matrix has {matrix.vocab_size} columns, alphabet has {len(tokenset)}"
        )
    return greedy_decode(matrix)


def ctc_score(matrix: EmissionMatrix, token_ids: Sequence[int]) -> float:
    """Total log-probability of all frame paths collapsing to token_ids,
    via the forward recursion over the blank-interleaved state sequence.
    Infeasible lengths yield -inf."""
    values = matrix.values.astype(np.float64)
    frames, vocab = values.shape
    labels = list(token_ids)
    for tid in labels:
        if not 0 < tid < vocab:
            raise DecodeError(f"label id {tid} outside 1..{vocab - 1}")
    if not labels:
        return float(values[:, 0].sum())

    n_states = 2 * len(labels) + 1  # blank, l1, blank, l2, ..., blank
    state_tok = [0] * n_states
    for i, tid in enumerate(labels):
        state_tok[2 * i + 1] = tid

    alpha = np.full(n_states, NEG_INF)
    alpha[0] = values[0, 0]
    alpha[1] = values[0, state_tok[1]]
    for t in range(1, frames):
        prev = alpha
        alpha = np.full(n_states, NEG_INF)
        for s in range(n_states):
            acc = prev[s]
            if s >= 1:
                acc = np.logaddexp(acc, prev[s - 1])
            if s >= 2 and s % 2 == 1 and state_tok[s] != state_tok[s - 2]:
                acc = np.logaddexp(acc, prev[s - 2])
            if acc != NEG_INF:
                alpha[s] = acc + values[t, state_tok[s]]
    return float(np.logaddexp(alpha[-1], alpha[-2]))


def exhaustive_decode(
    matrix: EmissionMatrix, max_len: int, search_limit: int = 2_000_000
) -> Hypothesis:
    """Argmax of ctc_score over every token sequence up to max_len.

    Enumeration runs in lexicographic order (shorter sequences first), so
    score ties keep the lexicographically first maximizer.  Guarded
    against instances whose sequence count exceeds search_limit.
    """
    symbols = matrix.vocab_size - 1
    total = sum(symbols**length for length in range(max_len + 1))
    if total > search_limit:
        raise DecodeError(
            f"exhaustive search over {total} sequences exceeds limit {search_limit}"
        )
    best_seq: tuple[int, ...] = ()
    best = ctc_score(matrix, ())
    for length in range(1, max_len + 1):
        for seq in itertools.product(range(1, matrix.vocab_size), repeat=length):
            s = ctc_score(matrix, seq)
            if s > best:
                best, best_seq = s, seq
    return Hypothesis(score=best, token_ids=best_seq)


# ---------------------------------------------------------------------------
# Lexicon-constrained prefix beam search
# ---------------------------------------------------------------------------


class _Beam:
    __slots__ = ("words", "partial", "node", "p_b", "p_nb", "lm10", "commits")

    def __init__(
        self,
        words: tuple[str, ...],
        partial: str,
        node: TrieNode,
        lm10: float,
        commits: tuple[int, ...],
    ) -> None:
        self.words = words
        self.partial = partial
        self.node = node
        self.lm10 = lm10
        self.commits = commits
        self.p_b = NEG_INF
        self.p_nb = NEG_INF

    def total(self) -> float:
        return _ladd(self.p_b, self.p_nb)


def _lm_context(words: tuple[str, ...], order: int) -> tuple[str, ...]:
    return ((BOS,) + words)[-(order - 1):] if order > 1 else ()


def beam_decode(
    matrix: EmissionMatrix,
    tokenset: TokenSet,
    trie: LexiconTrie,
    lm: Optional[NGramModel] = None,
    config: DecodeConfig = DecodeConfig(),
) -> Hypothesis:
    """CTC prefix beam search restricted to lexicon words.

    Prefixes carry (blank, non-blank) log-probability pairs and extend
    only along trie children.  A word commits when a Boundary token is
    emitted at a trie node that completes it, or at end of utterance.
    The final score is log P_ctc plus, with an LM, lm_weight * ln(10)
    times the log10 sentence score (end marker included), plus
    word_bonus per word in every mode.
    """
    if matrix.vocab_size != len(tokenset):
        raise DecodeError(
            f"matrix has {matrix.vocab_size} columns, alphabet has {len(tokenset)}"
        )
    if not trie.root.children:
        raise DecodeError("lexicon trie is empty")
    char_cols: list[tuple[str, int]] = []
    for i, tok in enumerate(tokenset):
        if tok.kind is TokenKind.CHAR:
            if tok.tag is not None:
                raise DecodeError(
                    f"beam search needs an untagged alphabet; found {tok.text!r} "
                    "(marginalize tagged emissions first)"
                )
            assert tok.base is not None
            char_cols.append((tok.base, i))
    boundary_col = tokenset.boundary_id
    values = matrix.values.astype(np.float64)
    alpha = config.lm_weight * LN10
    order = lm.order if lm is not None else 0

    def rank(entry: _Beam) -> float:
        r = entry.total() + config.word_bonus * len(entry.words)
        if lm is not None:
            r += alpha * entry.lm10
        return r

    start = _Beam((), "", trie.root, 0.0, ())
    start.p_b = 0.0
    beams: dict[tuple[tuple[str, ...], str], _Beam] = {((), ""): start}

    for t in range(matrix.frames):
        row = values[t]
        e_blank = float(row[0])
        e_bound = float(row[boundary_col])
        nxt: dict[tuple[tuple[str, ...], str], _Beam] = {}

        def bump(
            key: tuple[tuple[str, ...], str],
            node: TrieNode,
            lm10: float,
            commits: tuple[int, ...],
            p_b: float = NEG_INF,
            p_nb: float = NEG_INF,
        ) -> None:
            entry = nxt.get(key)
            if entry is None:
                entry = _Beam(key[0], key[1], node, lm10, commits)
                nxt[key] = entry
            entry.p_b = _ladd(entry.p_b, p_b)
            entry.p_nb = _ladd(entry.p_nb, p_nb)

        for (words, partial), entry in beams.items():
            tot = entry.total()
            if tot == NEG_INF:
                continue
            # Blank keeps the prefix and parks all mass in p_b.
            bump(
                (words, partial), entry.node, entry.lm10, entry.commits,
                p_b=tot + e_blank,
            )
            # Boundary: commits a complete partial word, or is a no-op
            # between words; mid-word boundaries die (not a lexicon word).
            if partial:
                if entry.node.words:
                    for w in sorted(entry.node.words):
                        lm10 = entry.lm10
                        if lm is not None:
                            lm10 += lm_score(lm, _lm_context(words, order), w)
                        bump(
                            (words + (w,), ""), trie.root, lm10,
                            entry.commits + (t,), p_nb=tot + e_bound,
                        )
            else:
                bump(
                    (words, ""), trie.root, entry.lm10, entry.commits,
                    p_nb=tot + e_bound,
                )
            # Characters, restricted to trie children of the partial word.
            for base, col in char_cols:
                e_char = float(row[col])
                child = entry.node.children.get(base)
                if partial and partial[-1] == base:
                    # Repeated emission continues the same occurrence.
                    if entry.p_nb != NEG_INF:
                        bump(
                            (words, partial), entry.node, entry.lm10,
                            entry.commits, p_nb=entry.p_nb + e_char,
                        )
                    # A fresh occurrence needs a blank in between.
                    if child is not None and entry.p_b != NEG_INF:
                        bump(
                            (words, partial + base), child, entry.lm10,
                            entry.commits, p_nb=entry.p_b + e_char,
                        )
                elif child is not None:
                    bump(
                        (words, partial + base), child, entry.lm10,
                        entry.commits, p_nb=tot + e_char,
                    )

        if not nxt:
            return Hypothesis(score=NEG_INF, words=())
        pruned = sorted(
            nxt.values(), key=lambda b: (-rank(b), b.words, b.partial)
        )[: config.beam_width]
        beams = {(b.words, b.partial): b for b in pruned}

    # End of utterance: open partials commit if they complete a word.
    finals: dict[tuple[str, ...], tuple[float, float, tuple[int, ...]]] = {}

    def finish(
        words: tuple[str, ...], ctc: float, lm10: float, commits: tuple[int, ...]
    ) -> None:
        if words in finals:
            prev_ctc, _, prev_commits = finals[words]
            finals[words] = (_ladd(prev_ctc, ctc), lm10, prev_commits)
        else:
            finals[words] = (ctc, lm10, commits)

    last_frame = matrix.frames - 1
    for (words, partial), entry in beams.items():
        tot = entry.total()
        if tot == NEG_INF:
            continue
        if not partial:
            finish(words, tot, entry.lm10, entry.commits)
        elif entry.node.words:
            for w in sorted(entry.node.words):
                lm10 = entry.lm10
                if lm is not None:
                    lm10 += lm_score(lm, _lm_context(words, order), w)
                finish(words + (w,), tot, lm10, entry.commits + (last_frame,))

    if not finals:
        return Hypothesis(score=NEG_INF, words=())
    best_words: Optional[tuple[str, ...]] = None
    best_score = NEG_INF
    best_commits: tuple[int, ...] = ()
    for words in sorted(finals):
        ctc, lm10, commits = finals[words]
        total = ctc + config.word_bonus * len(words)
        if lm is not None:
            lm10 += lm_score(lm, _lm_context(words, order), EOS)
            total += alpha * lm10
        if best_words is None or total > best_score:
            best_words, best_score, best_commits = words, total, commits
    assert best_words is not None

    segments = []
    prev_end = -1
    for cf in best_commits:
        segments.append((prev_end + 1, cf))
        prev_end = cf
    return Hypothesis(
        score=best_score, words=best_words, segments=tuple(segments)
    )
