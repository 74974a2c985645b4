"""CTC token alphabets, reference-string tokenization, decoding lexicon
and lexicon prefix trie.

The boundary marker "|" is a first-class CTC token; the space character is
only a serialization separator and never appears in an alphabet.  Token ids
are stable across runs: id 0 is always the blank, id 1 the boundary, and
character tokens follow sorted by (base character, tag with untagged first).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .corpus import Corpus, ProminenceLevel, TaggingMode
from .errors import VocabError

BLANK_TEXT = "<blank>"
BOUNDARY_TEXT = "|"


class TokenKind(Enum):
    BLANK = "blank"
    BOUNDARY = "boundary"
    CHAR = "char"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    base: Optional[str] = None
    tag: Optional[ProminenceLevel] = None

    def __post_init__(self) -> None:
        if self.kind is TokenKind.CHAR:
            if not self.base or len(self.base) != 1:
                raise VocabError(f"char token needs a single base character: {self.base!r}")
        elif self.base is not None or self.tag is not None:
            raise VocabError(f"{self.kind.value} token carries no base/tag")

    @property
    def text(self) -> str:
        if self.kind is TokenKind.BLANK:
            return BLANK_TEXT
        if self.kind is TokenKind.BOUNDARY:
            return BOUNDARY_TEXT
        assert self.base is not None
        return self.base if self.tag is None else self.base + self.tag.digit


BLANK = Token(TokenKind.BLANK)
BOUNDARY = Token(TokenKind.BOUNDARY)


def char_token(base: str, tag: Optional[ProminenceLevel] = None) -> Token:
    return Token(TokenKind.CHAR, base=base, tag=tag)


def strip_tag(token: Token) -> Token:
    """Drop the prominence tag from a Char token; identity otherwise."""
    if token.kind is TokenKind.CHAR and token.tag is not None:
        return Token(TokenKind.CHAR, base=token.base)
    return token


def parse_field(text: str, mode: TaggingMode) -> Token:
    """Parse one whitespace-separated reference field into a token.

    Detector references consist of bare prominence digits, which become
    ordinary untagged characters of the detector alphabet.  Character
    references contain single characters optionally suffixed by a level
    digit.
    """
    if text == BOUNDARY_TEXT:
        return BOUNDARY
    if not text:
        raise VocabError("empty reference field")
    if BOUNDARY_TEXT in text:
        raise VocabError(f"stray boundary marker inside field {text!r}")
    if mode.is_detector:
        if len(text) == 1 and text.isdigit():
            return char_token(text)
        raise VocabError(f"detector reference field must be a single digit: {text!r}")
    if len(text) == 1:
        if text.isdigit():
            raise VocabError(f"tag digit without preceding character: {text!r}")
        return char_token(text)
    if len(text) == 2:
        base, digit = text[0], text[1]
        if not digit.isdigit():
            raise VocabError(f"malformed reference field: {text!r}")
        if digit not in ("0", "1", "2"):
            raise VocabError(f"unknown tag digit {digit!r} in field {text!r}")
        return char_token(base, ProminenceLevel(int(digit)))
    raise VocabError(f"malformed reference field: {text!r}")


def parse_reference(reference: str, mode: TaggingMode) -> list[Token]:
    """Tokenize a reference or hypothesis string.

    Fields split on whitespace; the boundary marker "|" fuses onto the
    following unit in rendered references ("|d0 i0 e0 |"), so leading
    markers peel off as Boundary tokens before the unit itself parses.
    """
    tokens: list[Token] = []
    for fieldtext in reference.split():
        while fieldtext.startswith(BOUNDARY_TEXT):
            tokens.append(BOUNDARY)
            fieldtext = fieldtext[len(BOUNDARY_TEXT):]
        if fieldtext:
            tokens.append(parse_field(fieldtext, mode))
    return tokens


def render_tokens(tokens: Iterable[Token]) -> str:
    """Space-join token texts, the serialization inverse of parse_reference."""
    return " ".join(tok.text for tok in tokens)


def _char_sort_key(token: Token) -> tuple[str, int]:
    assert token.base is not None
    return (token.base, -1 if token.tag is None else int(token.tag))


@dataclass(frozen=True)
class TokenSet:
    """Ordered CTC alphabet with a token<->id bijection."""

    tokens: tuple[Token, ...]
    _index: dict[Token, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if not self.tokens or self.tokens[0] != BLANK:
            raise VocabError("token id 0 must be the blank")
        index: dict[Token, int] = {}
        boundary_count = 0
        for i, tok in enumerate(self.tokens):
            if tok in index:
                raise VocabError(f"duplicate token {tok.text!r}")
            index[tok] = i
            if tok.kind is TokenKind.BOUNDARY:
                boundary_count += 1
            if i > 0 and tok.kind is TokenKind.BLANK:
                raise VocabError("blank must appear only at id 0")
        if boundary_count != 1:
            raise VocabError("boundary must appear exactly once")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __contains__(self, token: Token) -> bool:
        return token in self._index

    def id_of(self, token: Token) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise VocabError(f"token not in alphabet: {token.text!r}") from None

    def token(self, token_id: int) -> Token:
        if not 0 <= token_id < len(self.tokens):
            raise VocabError(f"token id out of range: {token_id}")
        return self.tokens[token_id]

    @property
    def blank_id(self) -> int:
        return 0

    @property
    def boundary_id(self) -> int:
        return self._index[BOUNDARY]

    def ids(self, tokens: Iterable[Token]) -> list[int]:
        return [self.id_of(t) for t in tokens]

    @staticmethod
    def from_chars(chars: Iterable[Token]) -> "TokenSet":
        """Assemble the canonical ordering from a collection of Char tokens."""
        uniq = {t for t in chars if t.kind is TokenKind.CHAR}
        ordered = (BLANK, BOUNDARY, *sorted(uniq, key=_char_sort_key))
        return TokenSet(ordered)


def build_vocab(references: list[str], mode: TaggingMode) -> TokenSet:
    """Collect the alphabet of every symbol occurring in the references."""
    chars: set[Token] = set()
    for ref in references:
        for tok in parse_reference(ref, mode):
            if tok.kind is TokenKind.CHAR:
                chars.add(tok)
    return TokenSet.from_chars(chars)


def strip_tag_image(tagged: TokenSet) -> TokenSet:
    """The untagged alphabet a tagged alphabet collapses onto."""
    return TokenSet.from_chars(strip_tag(t) for t in tagged if t.kind is TokenKind.CHAR)


# ---------------------------------------------------------------------------
# Vocab file format: one token per line in index order
# ---------------------------------------------------------------------------


def _token_from_line(text: str) -> Token:
    if text == BLANK_TEXT:
        return BLANK
    if text == BOUNDARY_TEXT:
        return BOUNDARY
    if len(text) == 1:
        return char_token(text)
    if len(text) == 2 and text[1] in ("0", "1", "2"):
        return char_token(text[0], ProminenceLevel(int(text[1])))
    raise VocabError(f"malformed vocab line: {text!r}")


def write_vocab(tokenset: TokenSet, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok in tokenset:
            fh.write(tok.text + "\n")


def read_vocab(path: str | Path) -> TokenSet:
    tokens: list[Token] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                raise VocabError(f"{path}:{lineno}: empty vocab line")
            tokens.append(_token_from_line(line))
    try:
        return TokenSet(tuple(tokens))
    except VocabError as exc:
        raise VocabError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Lexicon and prefix trie
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lexicon:
    """Map from orthographic word to its untagged character sequence."""

    entries: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        for word, chars in self.entries.items():
            if not chars:
                raise VocabError(f"lexicon entry for {word!r} is empty")
            for ch in chars:
                if len(ch) != 1:
                    raise VocabError(f"entry for {word!r} has non-character unit {ch!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def words(self) -> list[str]:
        return sorted(self.entries)


def build_lexicon(corpus: Corpus) -> Lexicon:
    """One entry per distinct orthographic token; always untagged."""
    entries = {
        tok: tuple(tok) for utt in corpus for tok in utt.orthographic_tokens
    }
    return Lexicon(entries)


class TrieNode:
    __slots__ = ("children", "words")

    def __init__(self) -> None:
        self.children: dict[str, TrieNode] = {}
        self.words: set[str] = set()


@dataclass(frozen=True)
class LexiconTrie:
    root: TrieNode

    def step(self, node: TrieNode, ch: str) -> Optional[TrieNode]:
        return node.children.get(ch)

    def has_word(self, word: str) -> bool:
        node = self.root
        for ch in word:
            nxt = node.children.get(ch)
            if nxt is None:
                return False
            node = nxt
        return word in node.words

    def all_words(self) -> set[str]:
        out: set[str] = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            out |= node.words
            stack.extend(node.children.values())
        return out


def build_trie(lexicon: Lexicon) -> LexiconTrie:
    root = TrieNode()
    for word, chars in lexicon.entries.items():
        node = root
        for ch in chars:
            node = node.children.setdefault(ch, TrieNode())
        node.words.add(word)
    return LexiconTrie(root)


def write_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    """word TAB space-separated characters, one entry per line, sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for word in lexicon.words():
            fh.write(f"{word}\t{' '.join(lexicon.entries[word])}\n")


def read_lexicon(path: str | Path) -> Lexicon:
    entries: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise VocabError(f"{path}:{lineno}: expected 'word<TAB>chars'")
            word, chars = line.split("\t", 1)
            entries[word] = tuple(chars.split())
    return Lexicon(entries)
