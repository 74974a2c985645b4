import pytest

from promdec.corpus import (
    Corpus,
    CorpusError,
    ProminenceLevel,
    ProsodicWord,
    TaggingMode,
    Utterance,
    asr_reference,
    collapse_level,
    detector_reference,
    filter_corpus,
    load_corpus,
    normalize_text,
    project_annotations,
    read_references,
    save_corpus,
    utterance_from_json,
    utterance_to_json,
    write_references,
)

PL0 = ProminenceLevel.PL0
PL1 = ProminenceLevel.PL1
PL2 = ProminenceLevel.PL2


def utt(words, utt_id="001M002F_0000", conv="001M002F", flags=()):
    return Utterance(
        id=utt_id,
        conversation_id=conv,
        speaker_id=conv[:4],
        prosodic_words=tuple(ProsodicWord(tokens=tuple(t.split()), level=lv) for t, lv in words),
        exclusion_flags=frozenset(flags),
    )


class TestLevels:
    def test_collapse(self):
        assert collapse_level(0) is PL0
        assert collapse_level(1) is PL1
        assert collapse_level(2) is PL2
        assert collapse_level(3) is PL2

    @pytest.mark.parametrize("raw", [-1, 4, 2.0, "2", None, True])
    def test_collapse_rejects(self, raw):
        with pytest.raises(CorpusError):
            collapse_level(raw)

    def test_digits(self):
        assert [lv.digit for lv in ProminenceLevel] == ["0", "1", "2"]


class TestTaggingMode:
    def test_detector_flags(self):
        assert TaggingMode.DET02.is_detector
        assert TaggingMode.DET012.is_detector
        assert not TaggingMode.TAG02.is_detector
        assert not TaggingMode.BASELINE.is_detector

    def test_tagged_levels(self):
        assert TaggingMode.BASELINE.tagged_levels == frozenset()
        assert TaggingMode.TAG0.tagged_levels == {PL0}
        assert TaggingMode.TAG2.tagged_levels == {PL2}
        assert TaggingMode.TAG02.tagged_levels == {PL0, PL2}
        assert TaggingMode.TAG012.tagged_levels == {PL0, PL1, PL2}

    def test_level_inventory(self):
        assert TaggingMode.DET02.level_inventory == {PL0, PL2}
        assert TaggingMode.DET012.level_inventory == {PL0, PL1, PL2}
        with pytest.raises(CorpusError):
            TaggingMode.TAG02.level_inventory


class TestDataModel:
    def test_prosodic_word_invariants(self):
        with pytest.raises(CorpusError):
            ProsodicWord(tokens=())
        with pytest.raises(CorpusError):
            ProsodicWord(tokens=("",))
        with pytest.raises(CorpusError):
            ProsodicWord(tokens=("a b",))
        with pytest.raises(CorpusError):
            ProsodicWord(tokens=("a|b",))

    def test_utterance_views(self):
        u = utt([("sie hat", PL0), ("erzählt", PL2)])
        assert u.orthographic_tokens == ["sie", "hat", "erzählt"]
        assert u.orthography == "sie hat erzählt"
        assert u.token_levels == [PL0, PL0, PL2]
        assert u.word_levels == [PL0, PL2]

    def test_unknown_flag_rejected(self):
        with pytest.raises(CorpusError):
            utt([("ja", PL0)], flags=("coughing",))

    def test_duplicate_ids_rejected(self):
        a = utt([("ja", PL0)], utt_id="x")
        with pytest.raises(CorpusError):
            Corpus((a, a))

    def test_by_id_and_conversations(self):
        a = utt([("ja", PL0)], utt_id="b_1", conv="003M004F")
        b = utt([("nein", PL2)], utt_id="a_1", conv="001M002F")
        c = Corpus((a, b))
        assert c.by_id("a_1") is b
        assert c.conversation_ids() == ["003M004F", "001M002F"]
        with pytest.raises(CorpusError):
            c.by_id("missing")


class TestNormalize:
    def test_backchannel_with_punctuation(self):
        assert normalize_text("Uh huh, ja.") == "mhm ja"

    @pytest.mark.parametrize("variant", ["mh", "hm", "mmh", "hhm", "mhm"])
    def test_backchannel_variants(self, variant):
        assert normalize_text(f"{variant} gut") == "mhm gut"

    def test_uh_alone_is_kept(self):
        assert normalize_text("uh ja") == "uh ja"

    def test_lowercase_and_punctuation(self):
        assert normalize_text('Das  "WAR" super!') == "das war super"

    def test_umlauts_survive(self):
        assert normalize_text("Schön erzählt.") == "schön erzählt"

    def test_idempotent(self):
        samples = [
            "Uh huh, ja.",
            "Das, äh... war's!",
            "HM?!",
            "  viele   Leerzeichen  ",
            "a|b bleibt",
        ]
        for s in samples:
            once = normalize_text(s)
            assert normalize_text(once) == once


class TestDetectorReference:
    def test_two_level_reference(self):
        u = utt([("sie hat", PL0), ("erzählt", PL2)])
        assert detector_reference(u, TaggingMode.DET02) == "|0 |2 |"

    def test_three_level_reference(self):
        u = utt([("sie hat", PL0), ("erzählt", PL2), ("ja", PL1)])
        assert detector_reference(u, TaggingMode.DET012) == "|0 |2 |1 |"

    def test_empty_utterance(self):
        u = utt([])
        assert detector_reference(u, TaggingMode.DET02) == "|"

    def test_rejects_char_mode(self):
        with pytest.raises(CorpusError):
            detector_reference(utt([("ja", PL0)]), TaggingMode.TAG02)

    def test_rejects_unannotated(self):
        with pytest.raises(CorpusError):
            detector_reference(utt([("ja", None)]), TaggingMode.DET02)

    def test_rejects_level_outside_inventory(self):
        with pytest.raises(CorpusError):
            detector_reference(utt([("ja", PL1)]), TaggingMode.DET02)
        assert detector_reference(utt([("ja", PL1)]), TaggingMode.DET012) == "|1 |"


class TestAsrReference:
    def setup_method(self):
        self.u = utt([("die", PL0), ("waren", PL0), ("alle", PL2)])

    def test_tag02(self):
        assert (
            asr_reference(self.u, TaggingMode.TAG02)
            == "|d0 i0 e0 |w0 a0 r0 e0 n0 |a2 l2 l2 e2 |"
        )

    def test_tag0(self):
        assert (
            asr_reference(self.u, TaggingMode.TAG0)
            == "|d0 i0 e0 |w0 a0 r0 e0 n0 |a l l e |"
        )

    def test_tag2(self):
        assert (
            asr_reference(self.u, TaggingMode.TAG2)
            == "|d i e |w a r e n |a2 l2 l2 e2 |"
        )

    def test_baseline(self):
        assert (
            asr_reference(self.u, TaggingMode.BASELINE)
            == "|d i e |w a r e n |a l l e |"
        )

    def test_tag012_keeps_middle_level(self):
        u = utt([("ja", PL1)])
        assert asr_reference(u, TaggingMode.TAG012) == "|j1 a1 |"

    def test_multi_token_word_shares_suffix(self):
        u = utt([("sie hat", PL2)])
        assert asr_reference(u, TaggingMode.TAG2) == "|s2 i2 e2 |h2 a2 t2 |"

    def test_unannotated_word_stays_bare(self):
        u = utt([("ja", None)])
        assert asr_reference(u, TaggingMode.TAG012) == "|j a |"

    def test_empty_utterance(self):
        assert asr_reference(utt([]), TaggingMode.TAG02) == "|"

    def test_rejects_detector_mode(self):
        with pytest.raises(CorpusError):
            asr_reference(self.u, TaggingMode.DET02)


class TestProjection:
    def test_exact_match_projects(self):
        assert project_annotations([PL0, PL2], 2) == [PL0, PL2]

    def test_count_mismatch_is_unannotated(self):
        assert project_annotations([PL0, PL2], 3) is None
        assert project_annotations([PL0, PL2], 1) is None

    def test_unassigned_word_blocks_projection(self):
        assert project_annotations([PL0, None], 2) is None

    def test_empty(self):
        assert project_annotations([], 0) == []

    def test_negative_count_rejected(self):
        with pytest.raises(CorpusError):
            project_annotations([], -1)


class TestFilter:
    def test_flagged_utterances_drop(self):
        keep = utt([("ja", PL0)], utt_id="a")
        drop = utt([("haha", PL0)], utt_id="b", flags=("laughter",))
        filtered = filter_corpus(Corpus((keep, drop)))
        assert [u.id for u in filtered] == ["a"]


class TestSerialization:
    def test_utterance_json_round_trip(self):
        u = utt([("sie hat", PL0), ("erzählt", None)], flags=("singing",))
        obj = utterance_to_json(u)
        assert obj["words"][0] == {"tokens": ["sie", "hat"], "level": 0}
        assert obj["words"][1]["level"] is None
        assert obj["flags"] == ["singing"]
        assert utterance_from_json(obj) == u

    def test_raw_level_three_collapses_on_load(self):
        obj = utterance_to_json(utt([("ja", PL2)]))
        obj["words"][0]["level"] = 3
        assert utterance_from_json(obj).prosodic_words[0].level is PL2

    def test_malformed_record(self):
        with pytest.raises(CorpusError):
            utterance_from_json({"id": "x"})

    def test_corpus_file_round_trip(self, tmp_path):
        corpus = Corpus(
            (
                utt([("sie hat", PL0), ("erzählt", PL2)], utt_id="a"),
                utt([("ja", None)], utt_id="b", flags=("artefact",)),
                utt([], utt_id="c"),
            )
        )
        path = tmp_path / "corpus.jsonl"
        save_corpus(corpus, path)
        assert load_corpus(path) == corpus

    def test_load_rejects_bad_json(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("{not json\n")
        with pytest.raises(CorpusError, match="bad.jsonl:1"):
            load_corpus(path)

    def test_reference_file_round_trip(self, tmp_path):
        pairs = [("a", "|0 |2 |"), ("b", "|d0 i0 e0 |")]
        path = tmp_path / "refs.tsv"
        write_references(pairs, path)
        assert read_references(path) == pairs

    def test_reference_file_requires_tab(self, tmp_path):
        path = tmp_path / "refs.tsv"
        path.write_text("a |0 |\n")
        with pytest.raises(CorpusError, match="refs.tsv:1"):
            read_references(path)
