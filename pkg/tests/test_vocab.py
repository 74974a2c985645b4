import pytest

from promdec.corpus import Corpus, ProminenceLevel, ProsodicWord, TaggingMode, Utterance
from promdec.errors import VocabError
from promdec.vocab import (
    BLANK,
    BOUNDARY,
    Lexicon,
    TokenKind,
    TokenSet,
    build_lexicon,
    build_trie,
    build_vocab,
    char_token,
    parse_field,
    parse_reference,
    read_lexicon,
    read_vocab,
    render_tokens,
    strip_tag,
    strip_tag_image,
    write_lexicon,
    write_vocab,
)

PL0 = ProminenceLevel.PL0
PL1 = ProminenceLevel.PL1
PL2 = ProminenceLevel.PL2


class TestToken:
    def test_texts(self):
        assert BLANK.text == "<blank>"
        assert BOUNDARY.text == "|"
        assert char_token("a").text == "a"
        assert char_token("a", PL2).text == "a2"

    def test_char_needs_single_base(self):
        with pytest.raises(VocabError):
            char_token("ab")
        with pytest.raises(VocabError):
            char_token("")

    def test_strip_tag(self):
        assert strip_tag(char_token("a", PL2)) == char_token("a")
        assert strip_tag(char_token("a")) == char_token("a")
        assert strip_tag(BOUNDARY) is BOUNDARY


class TestParseField:
    def test_boundary(self):
        assert parse_field("|", TaggingMode.TAG02) is BOUNDARY

    def test_detector_digit(self):
        tok = parse_field("2", TaggingMode.DET02)
        assert tok == char_token("2")

    def test_detector_rejects_letters(self):
        with pytest.raises(VocabError):
            parse_field("a", TaggingMode.DET02)
        with pytest.raises(VocabError):
            parse_field("22", TaggingMode.DET02)

    def test_char_untagged(self):
        assert parse_field("a", TaggingMode.TAG02) == char_token("a")

    def test_char_tagged(self):
        assert parse_field("a2", TaggingMode.TAG02) == char_token("a", PL2)
        assert parse_field("ß1", TaggingMode.TAG012) == char_token("ß", PL1)

    def test_bare_digit_rejected_in_char_mode(self):
        with pytest.raises(VocabError, match="tag digit without preceding character"):
            parse_field("2", TaggingMode.TAG02)

    def test_unknown_tag_digit(self):
        with pytest.raises(VocabError, match="unknown tag digit"):
            parse_field("a3", TaggingMode.TAG02)

    def test_stray_boundary_inside_field(self):
        with pytest.raises(VocabError):
            parse_field("a|", TaggingMode.TAG02)

    def test_overlong_field(self):
        with pytest.raises(VocabError):
            parse_field("ab2", TaggingMode.TAG02)


class TestParseReference:
    def test_detector_reference(self):
        toks = parse_reference("|0 |2 |", TaggingMode.DET02)
        assert toks == [BOUNDARY, char_token("0"), BOUNDARY, char_token("2"), BOUNDARY]

    def test_char_reference(self):
        toks = parse_reference("|d0 i0 e0 |", TaggingMode.TAG02)
        assert toks == [
            BOUNDARY,
            char_token("d", PL0),
            char_token("i", PL0),
            char_token("e", PL0),
            BOUNDARY,
        ]

    def test_spacing_insensitive(self):
        fused = parse_reference("|0 |2 |", TaggingMode.DET02)
        spaced = parse_reference("| 0 | 2 |", TaggingMode.DET02)
        assert fused == spaced

    def test_empty_reference(self):
        assert parse_reference("", TaggingMode.TAG02) == []
        assert parse_reference("|", TaggingMode.TAG02) == [BOUNDARY]

    def test_render_parse_inverse(self):
        toks = [BOUNDARY, char_token("a", PL2), char_token("b"), BOUNDARY]
        assert parse_reference(render_tokens(toks), TaggingMode.TAG02) == toks


class TestTokenSet:
    def test_canonical_order(self):
        ts = build_vocab(["|b2 a0 |a |a2 |"], TaggingMode.TAG02)
        assert [t.text for t in ts] == ["<blank>", "|", "a", "a0", "a2", "b2"]

    def test_ids_and_lookup(self):
        ts = build_vocab(["|a b |"], TaggingMode.BASELINE)
        assert ts.blank_id == 0
        assert ts.boundary_id == 1
        assert ts.id_of(char_token("a")) == 2
        assert ts.token(3) == char_token("b")
        assert ts.ids([BOUNDARY, char_token("b")]) == [1, 3]
        assert char_token("a") in ts
        assert char_token("z") not in ts
        with pytest.raises(VocabError):
            ts.id_of(char_token("z"))
        with pytest.raises(VocabError):
            ts.token(99)

    def test_blank_must_lead(self):
        with pytest.raises(VocabError):
            TokenSet((BOUNDARY, BLANK))
        with pytest.raises(VocabError):
            TokenSet((BLANK, BOUNDARY, BLANK))

    def test_boundary_exactly_once(self):
        with pytest.raises(VocabError):
            TokenSet((BLANK, char_token("a")))
        with pytest.raises(VocabError):
            TokenSet((BLANK, BOUNDARY, BOUNDARY))

    def test_duplicates_rejected(self):
        with pytest.raises(VocabError):
            TokenSet((BLANK, BOUNDARY, char_token("a"), char_token("a")))

    def test_strip_tag_image(self):
        tagged = build_vocab(["|d0 i0 e |a2 |"], TaggingMode.TAG02)
        base = strip_tag_image(tagged)
        assert [t.text for t in base] == ["<blank>", "|", "a", "d", "e", "i"]

    def test_detector_vocab(self):
        ts = build_vocab(["|0 |2 |", "|1 |"], TaggingMode.DET012)
        assert [t.text for t in ts] == ["<blank>", "|", "0", "1", "2"]
        assert all(
            t.tag is None for t in ts if t.kind is TokenKind.CHAR
        )


class TestVocabFile:
    def test_round_trip(self, tmp_path):
        ts = build_vocab(["|d0 i1 e2 |a |"], TaggingMode.TAG012)
        path = tmp_path / "vocab.txt"
        write_vocab(ts, path)
        assert read_vocab(path) == ts
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "<blank>"
        assert lines[1] == "|"

    def test_rejects_empty_line(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("<blank>\n\n|\n")
        with pytest.raises(VocabError, match="vocab.txt:2"):
            read_vocab(path)

    def test_rejects_malformed_line(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("<blank>\n|\nab2\n")
        with pytest.raises(VocabError, match="malformed vocab line"):
            read_vocab(path)

    def test_rejects_wrong_leader(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("|\n<blank>\n")
        with pytest.raises(VocabError, match="vocab.txt"):
            read_vocab(path)


def mini_corpus():
    words = [("die", PL0), ("waren", PL0), ("alle", PL2), ("da", PL2)]
    utts = tuple(
        Utterance(
            id=f"001M002F_{i:04d}",
            conversation_id="001M002F",
            speaker_id="001M",
            prosodic_words=(ProsodicWord(tokens=(w,), level=lv),),
        )
        for i, (w, lv) in enumerate(words)
    )
    return Corpus(utts)


class TestLexicon:
    def test_build_from_corpus(self):
        lex = build_lexicon(mini_corpus())
        assert lex.words() == ["alle", "da", "die", "waren"]
        assert lex.entries["die"] == ("d", "i", "e")

    def test_invariants(self):
        with pytest.raises(VocabError):
            Lexicon({"x": ()})
        with pytest.raises(VocabError):
            Lexicon({"x": ("ab",)})

    def test_trie(self):
        trie = build_trie(build_lexicon(mini_corpus()))
        assert trie.has_word("die")
        assert trie.has_word("da")
        assert not trie.has_word("d")
        assert not trie.has_word("diese")
        assert trie.all_words() == {"alle", "da", "die", "waren"}
        node = trie.step(trie.root, "d")
        assert node is not None
        assert set(node.children) == {"i", "a"}
        assert trie.step(node, "z") is None

    def test_prefix_word_completes_at_inner_node(self):
        lex = Lexicon({"da": ("d", "a"), "das": ("d", "a", "s")})
        trie = build_trie(lex)
        inner = trie.step(trie.step(trie.root, "d"), "a")
        assert inner.words == {"da"}
        assert trie.has_word("da") and trie.has_word("das")

    def test_file_round_trip(self, tmp_path):
        lex = build_lexicon(mini_corpus())
        path = tmp_path / "lexicon.tsv"
        write_lexicon(lex, path)
        assert read_lexicon(path).entries == lex.entries
        first = path.read_text(encoding="utf-8").splitlines()[0]
        assert first == "alle\ta l l e"

    def test_read_requires_tab(self, tmp_path):
        path = tmp_path / "lexicon.tsv"
        path.write_text("die d i e\n")
        with pytest.raises(VocabError, match="lexicon.tsv:1"):
            read_lexicon(path)
