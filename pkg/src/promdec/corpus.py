"""Corpus data model, text normalization and reference-string generation.

A corpus is a list of utterances; each utterance groups orthographic word
tokens into prosodic words that optionally carry a word-level prominence
annotation (PL0 = not prominent, PL1 = weakly prominent, PL2 = strongly
prominent; the raw annotation value 3 is folded into PL2 at parse time).

Two families of training references are generated from an utterance:

* detector references -- prominence digits plus word boundary markers,
  one digit per prosodic word, e.g. ``"|0 |2 |"``;
* character references -- space-separated characters with boundary
  markers between orthographic words, where characters of annotated words
  may carry the level digit as a suffix, e.g. ``"|d0 i0 e0 |a2 l2 l2 e2 |"``.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .errors import CorpusError

EXCLUSION_FLAGS = frozenset(
    {"laughter", "singing", "onomatopoeia", "unintelligible", "artefact"}
)


class ProminenceLevel(IntEnum):
    """Word-level prominence after collapsing the strongest two raw levels."""

    PL0 = 0
    PL1 = 1
    PL2 = 2

    @property
    def digit(self) -> str:
        return str(int(self))


def collapse_level(raw: int) -> ProminenceLevel:
    """Map a raw annotation value 0..3 onto the three collapsed levels.

    Raw values 2 and 3 both yield PL2; anything outside 0..3 is rejected.
    """
    if not isinstance(raw, int) or isinstance(raw, bool) or raw not in (0, 1, 2, 3):
        raise CorpusError(f"prominence annotation out of range 0..3: {raw!r}")
    return ProminenceLevel.PL2 if raw >= 2 else ProminenceLevel(raw)


class TaggingMode(Enum):
    """Reference flavours: character references (Baseline/Tag*) or
    prominence-digit references (Det*)."""

    BASELINE = "baseline"
    TAG0 = "tag0"
    TAG2 = "tag2"
    TAG02 = "tag02"
    TAG012 = "tag012"
    DET02 = "det02"
    DET012 = "det012"

    @property
    def is_detector(self) -> bool:
        return self in (TaggingMode.DET02, TaggingMode.DET012)

    @property
    def tagged_levels(self) -> frozenset[ProminenceLevel]:
        """Levels whose characters receive a digit suffix in ASR references."""
        return _TAGGED_LEVELS[self]

    @property
    def level_inventory(self) -> frozenset[ProminenceLevel]:
        """Levels a detector of this mode may see (Det modes only)."""
        if self is TaggingMode.DET02:
            return frozenset({ProminenceLevel.PL0, ProminenceLevel.PL2})
        if self is TaggingMode.DET012:
            return frozenset(ProminenceLevel)
        raise CorpusError(f"{self.value} is not a detector mode")


_TAGGED_LEVELS = {
    TaggingMode.BASELINE: frozenset(),
    TaggingMode.TAG0: frozenset({ProminenceLevel.PL0}),
    TaggingMode.TAG2: frozenset({ProminenceLevel.PL2}),
    TaggingMode.TAG02: frozenset({ProminenceLevel.PL0, ProminenceLevel.PL2}),
    TaggingMode.TAG012: frozenset(ProminenceLevel),
    TaggingMode.DET02: frozenset(),
    TaggingMode.DET012: frozenset(),
}


@dataclass(frozen=True)
class ProsodicWord:
    """One or more orthographic tokens sharing a single prominence annotation."""

    tokens: tuple[str, ...]
    level: Optional[ProminenceLevel] = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise CorpusError("prosodic word must contain at least one token")
        for tok in self.tokens:
            if not tok:
                raise CorpusError("empty orthographic token")
            if any(ch.isspace() for ch in tok):
                raise CorpusError(f"token contains whitespace: {tok!r}")
            if "|" in tok:
                raise CorpusError(f"token contains reserved delimiter '|': {tok!r}")


@dataclass(frozen=True)
class Utterance:
    """One speaker turn with its prosodic grouping and exclusion flags."""

    id: str
    conversation_id: str
    speaker_id: str
    prosodic_words: tuple[ProsodicWord, ...]
    exclusion_flags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        unknown = set(self.exclusion_flags) - EXCLUSION_FLAGS
        if unknown:
            raise CorpusError(f"unknown exclusion flags: {sorted(unknown)}")

    @property
    def orthographic_tokens(self) -> list[str]:
        return [tok for word in self.prosodic_words for tok in word.tokens]

    @property
    def orthography(self) -> str:
        return " ".join(self.orthographic_tokens)

    @property
    def token_levels(self) -> list[Optional[ProminenceLevel]]:
        """Per orthographic token: the level of its prosodic word."""
        return [w.level for w in self.prosodic_words for _ in w.tokens]

    @property
    def word_levels(self) -> list[Optional[ProminenceLevel]]:
        """Per prosodic word."""
        return [w.level for w in self.prosodic_words]


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for utt in self.utterances:
            if utt.id in seen:
                raise CorpusError(f"duplicate utterance id: {utt.id!r}")
            seen.add(utt.id)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def by_id(self, utt_id: str) -> Utterance:
        for utt in self.utterances:
            if utt.id == utt_id:
                return utt
        raise CorpusError(f"no utterance with id {utt_id!r}")

    def conversation_ids(self) -> list[str]:
        """Distinct conversation ids in first-seen order."""
        out: list[str] = []
        for utt in self.utterances:
            if utt.conversation_id not in out:
                out.append(utt.conversation_id)
        return out


# ---------------------------------------------------------------------------
# Text normalization
# ---------------------------------------------------------------------------

# Single-token backchannel variants; "uh huh" is the only two-token one.
_BACKCHANNELS = frozenset({"mh", "hm", "mmh", "hhm"})
_BACKCHANNEL_CANON = "mhm"


def _is_punctuation(ch: str) -> bool:
    # Unicode punctuation and symbols; "|" stays, it is the reserved
    # boundary delimiter and never part of raw orthography anyway.
    return ch != "|" and unicodedata.category(ch)[0] in ("P", "S")


def normalize_text(raw: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace, canonicalize
    backchannels.

    Backchannel replacement runs on the whitespace-tokenized result so that
    "uh huh" matches across exactly one space; stray punctuation around the
    variants ("Uh huh,") has been stripped by then.  Idempotent.
    """
    lowered = raw.lower()
    stripped = "".join(ch for ch in lowered if not _is_punctuation(ch))
    tokens = stripped.split()
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if tokens[i] == "uh" and i + 1 < len(tokens) and tokens[i + 1] == "huh":
            out.append(_BACKCHANNEL_CANON)
            i += 2
        elif tokens[i] in _BACKCHANNELS:
            out.append(_BACKCHANNEL_CANON)
            i += 1
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


def filter_corpus(corpus: Corpus) -> Corpus:
    """Drop every utterance carrying at least one exclusion flag."""
    return Corpus(tuple(u for u in corpus if not u.exclusion_flags))


# ---------------------------------------------------------------------------
# Reference generation
# ---------------------------------------------------------------------------


def detector_reference(utt: Utterance, mode: TaggingMode) -> str:
    """Render the prominence-digit reference, e.g. ``"|0 |2 |"``.

    Every prosodic word must be annotated; under det02 only PL0/PL2 are
    legal.
    """
    if not mode.is_detector:
        raise CorpusError(f"detector_reference requires a Det mode, got {mode.value}")
    allowed = mode.level_inventory
    parts = ["|"]
    for word in utt.prosodic_words:
        if word.level is None:
            raise CorpusError(
                f"utterance {utt.id!r}: prosodic word {' '.join(word.tokens)!r} "
                "lacks a prominence annotation"
            )
        if word.level not in allowed:
            raise CorpusError(
                f"utterance {utt.id!r}: level {word.level.name} not allowed "
                f"under mode {mode.value}"
            )
        parts.append(f"{word.level.digit} |")
    return "".join(parts)


def asr_reference(utt: Utterance, mode: TaggingMode) -> str:
    """Render the character reference, e.g. ``"|d i e |w a r e n |a l l e |"``.

    Characters of a word whose level is tagged under *mode* carry the level
    digit as a suffix; unannotated words stay bare in every mode.
    """
    if mode.is_detector:
        raise CorpusError(f"asr_reference requires a character mode, got {mode.value}")
    tagged = mode.tagged_levels
    parts = ["|"]
    for word in utt.prosodic_words:
        suffix = ""
        if word.level is not None and word.level in tagged:
            suffix = word.level.digit
        for tok in word.tokens:
            rendered = " ".join(ch + suffix for ch in tok)
            parts.append(f"{rendered} |")
    return "".join(parts)


def project_annotations(
    detector_hyp: Sequence[Optional[ProminenceLevel]], forced_word_count: int
) -> Optional[list[ProminenceLevel]]:
    """Project detector output onto forced-alignment word boundaries.

    Succeeds only when the hypothesis has exactly the forced word count and
    every word received a level; otherwise the utterance stays unannotated
    and ``None`` is returned.
    """
    if forced_word_count < 0:
        raise CorpusError(f"negative forced word count: {forced_word_count}")
    if len(detector_hyp) != forced_word_count:
        return None
    if any(level is None for level in detector_hyp):
        return None
    return [level for level in detector_hyp if level is not None]


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def utterance_to_json(utt: Utterance) -> dict:
    return {
        "id": utt.id,
        "conversation": utt.conversation_id,
        "speaker": utt.speaker_id,
        "words": [
            {
                "tokens": list(w.tokens),
                "level": None if w.level is None else int(w.level),
            }
            for w in utt.prosodic_words
        ],
        "flags": sorted(utt.exclusion_flags),
    }


def utterance_from_json(obj: dict) -> Utterance:
    try:
        words = tuple(
            ProsodicWord(
                tokens=tuple(w["tokens"]),
                level=None if w["level"] is None else collapse_level(w["level"]),
            )
            for w in obj["words"]
        )
        return Utterance(
            id=obj["id"],
            conversation_id=obj["conversation"],
            speaker_id=obj["speaker"],
            prosodic_words=words,
            exclusion_flags=frozenset(obj.get("flags", [])),
        )
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed utterance record: {exc}") from exc


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSON-Lines corpus file (one utterance object per line)."""
    utterances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            utterances.append(utterance_from_json(obj))
    return Corpus(tuple(utterances))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for utt in corpus:
            fh.write(json.dumps(utterance_to_json(utt), ensure_ascii=False))
            fh.write("\n")


def write_references(pairs: Iterable[tuple[str, str]], path: str | Path) -> None:
    """Write ``utterance-id TAB reference`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for utt_id, ref in pairs:
            fh.write(f"{utt_id}\t{ref}\n")


def read_references(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise CorpusError(f"{path}:{lineno}: expected 'id<TAB>reference'")
            utt_id, ref = line.split("\t", 1)
            pairs.append((utt_id, ref))
    return pairs
