"""Word-level prominence extraction from tagged decoder output.

A tagged hypothesis splits at word boundary tokens into segments; each
segment's prominence digits (character tag suffixes, or the digit tokens a
dedicated detector emits) vote on the word's level.  A strict majority
assigns the level; an empty vote or a tie leaves the word Unassigned,
represented as None in code and "?" in files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import ProminenceLevel
from .errors import MetricError
from .vocab import Token, TokenKind

_LEVEL_DIGITS = ("0", "1", "2")


@dataclass(frozen=True)
class WordSegment:
    """Char tokens between consecutive boundaries plus their vote string."""

    tokens: tuple[Token, ...]
    tag_string: str

    def __post_init__(self) -> None:
        for tok in self.tokens:
            if tok.kind is not TokenKind.CHAR:
                raise MetricError(f"segment may only hold characters, got {tok.text!r}")
        if len(self.tag_string) > len(self.tokens):
            raise MetricError("more votes than characters in segment")


def _vote_digit(token: Token) -> Optional[str]:
    if token.tag is not None:
        return token.tag.digit
    if token.base in _LEVEL_DIGITS:
        return token.base
    return None


def segment_words(tokens: Sequence[Token]) -> list[WordSegment]:
    """Split a blank-free token sequence at boundaries, dropping empty
    segments before, between and after boundary tokens."""
    segments: list[WordSegment] = []
    current: list[Token] = []

    def flush() -> None:
        if current:
            digits = "".join(d for tok in current if (d := _vote_digit(tok)))
            segments.append(WordSegment(tuple(current), digits))
            current.clear()

    for tok in tokens:
        if tok.kind is TokenKind.BLANK:
            raise MetricError("segment_words expects a collapsed, blank-free sequence")
        if tok.kind is TokenKind.BOUNDARY:
            flush()
        else:
            current.append(tok)
    flush()
    return segments


def extract_level(segment: WordSegment) -> Optional[ProminenceLevel]:
    """Strict-majority vote over the segment's digits; ties and empty
    vote strings yield Unassigned (None)."""
    if not segment.tag_string:
        return None
    counts = {d: segment.tag_string.count(d) for d in set(segment.tag_string)}
    top = max(counts.values())
    winners = [d for d, c in counts.items() if c == top]
    if len(winners) != 1:
        return None
    return ProminenceLevel(int(winners[0]))


def extract_sequence(tokens: Sequence[Token]) -> list[Optional[ProminenceLevel]]:
    """Per-word prominence levels of a tagged hypothesis, in order."""
    return [extract_level(seg) for seg in segment_words(tokens)]


# ---------------------------------------------------------------------------
# Prominence hypothesis files: id TAB space-separated levels, "?" unassigned
# ---------------------------------------------------------------------------


def render_levels(levels: Sequence[Optional[ProminenceLevel]]) -> str:
    return " ".join("?" if lv is None else lv.digit for lv in levels)


def parse_levels(text: str) -> list[Optional[ProminenceLevel]]:
    out: list[Optional[ProminenceLevel]] = []
    for fieldtext in text.split():
        if fieldtext == "?":
            out.append(None)
        elif fieldtext in _LEVEL_DIGITS:
            out.append(ProminenceLevel(int(fieldtext)))
        else:
            raise MetricError(f"bad prominence level field {fieldtext!r}")
    return out


def write_prominence(
    rows: Iterable[tuple[str, Sequence[Optional[ProminenceLevel]]]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for utt_id, levels in rows:
            fh.write(f"{utt_id}\t{render_levels(levels)}\n")


def read_prominence(path: str | Path) -> list[tuple[str, list[Optional[ProminenceLevel]]]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            utt_id, _, rest = line.partition("\t")
            rows.append((utt_id, parse_levels(rest)))
    return rows
