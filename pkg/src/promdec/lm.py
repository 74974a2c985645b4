"""Backoff n-gram language models with modified Kneser-Ney smoothing.

Models are trained from whitespace-tokenized sentences, stored and
serialized in log10 (the ARPA convention), and queried through the
standard backoff chain.  Scores convert to natural log only at the
decoder boundary.

Estimation follows the interpolated modified Kneser-Ney recursion with
three count-dependent discounts per order.  Lower orders are estimated
from continuation counts (number of distinct left extensions), except
that n-grams starting with <s> keep their raw counts since nothing can
precede the sentence start.  The unknown word <unk> receives the unigram
interpolation residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import ArpaParseError, DegenerateCountsError, LMError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# ARPA placeholder for the never-predicted sentence-start unigram.
BOS_LOG10 = -99.0

NGram = tuple[str, ...]


@dataclass(frozen=True)
class CountTable:
    """Per-order n-gram counts as used by the estimator.

    For the highest order these are raw occurrence counts; for lower
    orders continuation counts (with the <s>-initial exception).  The
    sentence-start unigram is omitted: it is never predicted.
    """

    order: int
    counts: dict[int, dict[NGram, int]]
    count_of_counts: dict[int, tuple[int, int, int, int]]

    def total(self, k: int) -> int:
        return sum(self.counts[k].values())


def count_ngrams(sentences: Iterable[Sequence[str]], order: int = 3) -> CountTable:
    """Count padded n-grams and derive continuation counts per order."""
    if order not in (1, 2, 3):
        raise LMError(f"order must be 1, 2 or 3, got {order}")
    raw: dict[int, dict[NGram, int]] = {k: {} for k in range(1, order + 1)}
    seen_any = False
    for sent in sentences:
        words = list(sent)
        if not words:
            continue
        for w in words:
            if not w or any(ch.isspace() for ch in w):
                raise LMError(f"invalid training token: {w!r}")
            if w in (BOS, EOS, UNK):
                raise LMError(f"reserved token {w!r} in training text")
        seen_any = True
        padded = [BOS] + words + [EOS]
        for k in range(1, order + 1):
            table = raw[k]
            for i in range(len(padded) - k + 1):
                gram = tuple(padded[i : i + k])
                table[gram] = table.get(gram, 0) + 1
    if not seen_any:
        raise LMError("training corpus contains no non-empty sentences")

    counts: dict[int, dict[NGram, int]] = {order: dict(raw[order])}
    for k in range(order - 1, 0, -1):
        left_types: dict[NGram, int] = {}
        for gram in raw[k + 1]:
            left_types[gram[1:]] = left_types.get(gram[1:], 0) + 1
        table = {}
        for gram, c in raw[k].items():
            if gram == (BOS,):
                continue
            if gram[0] == BOS:
                table[gram] = c
            else:
                table[gram] = left_types.get(gram, 0)
        counts[k] = table
    if order == 1:
        counts[1] = {g: c for g, c in counts[1].items() if g != (BOS,)}

    coc = {}
    for k in range(1, order + 1):
        n = [0, 0, 0, 0]
        for c in counts[k].values():
            if 1 <= c <= 4:
                n[c - 1] += 1
        coc[k] = tuple(n)
    return CountTable(order=order, counts=counts, count_of_counts=coc)


def _discounts(coc: tuple[int, int, int, int], k: int) -> tuple[float, float, float]:
    n1, n2, n3, n4 = coc
    if n1 == 0 or n2 == 0 or n3 == 0 or n4 == 0:
        raise DegenerateCountsError(
            f"order {k}: count-of-counts {coc} has zeros; estimate with "
            "fixed_discount=0.5 (absolute discounting) instead"
        )
    y = n1 / (n1 + 2.0 * n2)
    d1 = 1.0 - 2.0 * y * n2 / n1
    d2 = 2.0 - 3.0 * y * n3 / n2
    d3 = 3.0 - 4.0 * y * n4 / n3
    for i, d in enumerate((d1, d2, d3), start=1):
        if not 0.0 < d <= float(i):
            raise DegenerateCountsError(
                f"order {k}: discount D{i}={d:.6f} out of range; estimate with "
                "fixed_discount=0.5 (absolute discounting) instead"
            )
    return d1, d2, d3


@dataclass(frozen=True)
class NGramModel:
    """log10 probabilities and backoff weights per order."""

    order: int
    probs: dict[int, dict[NGram, float]]
    backoffs: dict[int, dict[NGram, float]]
    vocab: frozenset[str]

    @property
    def has_unk(self) -> bool:
        return UNK in self.vocab

    def predictable_vocab(self) -> list[str]:
        """Every scorable word: the vocabulary minus the start marker."""
        return sorted(w for w in self.vocab if w != BOS)


def estimate_mkn(
    counts: CountTable,
    fixed_discount: Optional[float] = None,
    closed_vocab: bool = False,
) -> NGramModel:
    """Interpolated modified Kneser-Ney estimation, no pruning.

    fixed_discount replaces the three per-order discounts with a single
    absolute discount (the documented fallback for corpora whose
    count-of-counts are degenerate).  closed_vocab omits <unk>; the
    unigram residual then spreads over seen words only.
    """
    if fixed_discount is not None and not 0.0 < fixed_discount < 1.0:
        raise LMError(f"fixed_discount must lie in (0, 1), got {fixed_discount}")

    per_order_d: dict[int, tuple[float, float, float]] = {}
    for k in range(1, counts.order + 1):
        if fixed_discount is not None:
            per_order_d[k] = (fixed_discount, fixed_discount, fixed_discount)
        else:
            per_order_d[k] = _discounts(counts.count_of_counts[k], k)

    unigrams = counts.counts[1]
    if not unigrams:
        raise LMError("no unigrams to estimate")
    predicted = sorted(unigrams)
    vocab_size = len(predicted) + (0 if closed_vocab else 1)

    probs: dict[int, dict[NGram, float]] = {k: {} for k in range(1, counts.order + 1)}
    backoffs: dict[int, dict[NGram, float]] = {
        k: {} for k in range(1, counts.order)
    }
    # Raw interpolated probabilities per order, consumed by the next order up.
    p_interp: dict[NGram, float] = {}

    for k in range(1, counts.order + 1):
        d1, d2, d3 = per_order_d[k]

        by_context: dict[NGram, list[tuple[str, int]]] = {}
        for gram, c in counts.counts[k].items():
            by_context.setdefault(gram[:-1], []).append((gram[-1], c))

        next_interp: dict[NGram, float] = {}
        for context, items in sorted(by_context.items()):
            denom = sum(c for _, c in items)
            n_by_d = [0, 0, 0]
            for _, c in items:
                n_by_d[min(c, 3) - 1] += 1
            gamma = (d1 * n_by_d[0] + d2 * n_by_d[1] + d3 * n_by_d[2]) / denom
            if k > 1:
                backoffs[k - 1][context] = math.log10(gamma)
            for w, c in items:
                discount = (d1, d2, d3)[min(c, 3) - 1]
                lower = p_interp[context[1:] + (w,)] if k > 1 else 1.0 / vocab_size
                p = (c - discount) / denom + gamma * lower
                gram = context + (w,)
                next_interp[gram] = p
                probs[k][gram] = math.log10(p)
            if k == 1 and not closed_vocab:
                p_unk = gamma / vocab_size
                next_interp[(UNK,)] = p_unk
                probs[1][(UNK,)] = math.log10(p_unk)
        p_interp = next_interp

    if counts.order > 1:
        probs[1][(BOS,)] = BOS_LOG10
    vocab = {gram[0] for gram in predicted} | {BOS}
    if not closed_vocab:
        vocab.add(UNK)
    return NGramModel(
        order=counts.order,
        probs=probs,
        backoffs=backoffs,
        vocab=frozenset(vocab),
    )


def train_lm(
    sentences: Iterable[Sequence[str]],
    order: int = 3,
    fixed_discount: Optional[float] = None,
    closed_vocab: bool = False,
) -> NGramModel:
    return estimate_mkn(
        count_ngrams(sentences, order),
        fixed_discount=fixed_discount,
        closed_vocab=closed_vocab,
    )


def score(model: NGramModel, context: Sequence[str], word: str) -> float:
    """log10 p(word | context) through the full backoff chain.

    Out-of-vocabulary words map to <unk>; context is truncated to the
    model order.
    """

    def canon(w: str) -> str:
        if w in model.vocab:
            return w
        if not model.has_unk:
            raise LMError(f"out-of-vocabulary word {w!r} in a closed-vocabulary model")
        return UNK

    target = canon(word)
    ctx = tuple(canon(w) for w in context)[-(model.order - 1):] if model.order > 1 else ()

    total = 0.0
    while True:
        gram = ctx + (target,)
        k = len(gram)
        p = model.probs.get(k, {}).get(gram)
        if p is not None:
            return total + p
        if not ctx:
            raise LMError(f"word {target!r} missing from unigram table")
        bow = model.backoffs.get(len(ctx), {}).get(ctx)
        if bow is not None:
            total += bow
        ctx = ctx[1:]


def sentence_logprob(model: NGramModel, words: Sequence[str]) -> float:
    """Sum of per-word scores with <s> padding and a final </s>."""
    history: list[str] = [BOS]
    total = 0.0
    for w in list(words) + [EOS]:
        total += score(model, history, w)
        history.append(w)
    return total


# ---------------------------------------------------------------------------
# ARPA serialization
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_arpa(model: NGramModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\data\\\n")
        for k in range(1, model.order + 1):
            fh.write(f"ngram {k}={len(model.probs[k])}\n")
        fh.write("\n")
        for k in range(1, model.order + 1):
            fh.write(f"\\{k}-grams:\n")
            bows = model.backoffs.get(k, {})
            for gram in sorted(model.probs[k]):
                line = f"{_fmt(model.probs[k][gram])}\t{' '.join(gram)}"
                bow = bows.get(gram)
                if bow is not None and bow != 0.0:
                    line += f"\t{_fmt(bow)}"
                fh.write(line + "\n")
            fh.write("\n")
        fh.write("\\end\\\n")


def read_arpa(path: str | Path) -> NGramModel:
    declared: dict[int, int] = {}
    probs: dict[int, dict[NGram, float]] = {}
    backoffs: dict[int, dict[NGram, float]] = {}
    section = 0  # 0 = preamble, -1 = \data\, k > 0 = k-gram body, -2 = done
    with open(path, encoding="utf-8") as fh:
        for lineno, rawline in enumerate(fh, 1):
            line = rawline.strip()
            if not line:
                continue
            if line == "\\data\\":
                section = -1
                continue
            if line == "\\end\\":
                section = -2
                continue
            if line.startswith("\\") and line.endswith("-grams:"):
                try:
                    k = int(line[1:-7])
                except ValueError:
                    raise ArpaParseError(f"{path}:{lineno}: bad section header {line!r}")
                if k not in declared:
                    raise ArpaParseError(
                        f"{path}:{lineno}: section {line!r} not declared in \\data\\"
                    )
                section = k
                probs.setdefault(k, {})
                continue
            if section == -1:
                if not line.startswith("ngram "):
                    raise ArpaParseError(f"{path}:{lineno}: expected 'ngram k=n', got {line!r}")
                body = line[len("ngram "):]
                if "=" not in body:
                    raise ArpaParseError(f"{path}:{lineno}: expected 'ngram k=n', got {line!r}")
                k_s, n_s = body.split("=", 1)
                try:
                    declared[int(k_s)] = int(n_s)
                except ValueError:
                    raise ArpaParseError(f"{path}:{lineno}: bad ngram count line {line!r}")
                continue
            if section > 0:
                parts = line.split("\t")
                if len(parts) == 1:
                    parts = line.split()
                    if len(parts) < section + 1:
                        raise ArpaParseError(f"{path}:{lineno}: malformed entry {line!r}")
                    parts = [parts[0], " ".join(parts[1 : section + 1]), *parts[section + 1 :]]
                if len(parts) not in (2, 3):
                    raise ArpaParseError(f"{path}:{lineno}: malformed entry {line!r}")
                try:
                    logp = float(parts[0])
                except ValueError:
                    raise ArpaParseError(f"{path}:{lineno}: bad probability {parts[0]!r}")
                gram = tuple(parts[1].split())
                if len(gram) != section:
                    raise ArpaParseError(
                        f"{path}:{lineno}: {len(gram)}-gram in \\{section}-grams: section"
                    )
                probs[section][gram] = logp
                if len(parts) == 3:
                    try:
                        bow = float(parts[2])
                    except ValueError:
                        raise ArpaParseError(f"{path}:{lineno}: bad backoff {parts[2]!r}")
                    backoffs.setdefault(section, {})[gram] = bow
                continue
            if section == 0:
                raise ArpaParseError(f"{path}:{lineno}: content before \\data\\: {line!r}")
            raise ArpaParseError(f"{path}:{lineno}: content after \\end\\: {line!r}")

    if section != -2:
        raise ArpaParseError(f"{path}: missing \\end\\ marker")
    if not declared:
        raise ArpaParseError(f"{path}: missing \\data\\ section")
    order = max(declared)
    if sorted(declared) != list(range(1, order + 1)):
        raise ArpaParseError(f"{path}: non-contiguous ngram orders {sorted(declared)}")
    for k, n in declared.items():
        have = len(probs.get(k, {}))
        if have != n:
            raise ArpaParseError(
                f"{path}: \\data\\ declares ngram {k}={n} but body has {have} entries"
            )
    vocab = frozenset(g[0] for g in probs[1])
    return NGramModel(order=order, probs=probs, backoffs=backoffs, vocab=vocab)
