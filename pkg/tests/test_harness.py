"""Fold plans, emission loading, end-to-end evaluation runs and the
cross-validation driver, exercised on small synthetic corpora."""

from pathlib import Path

import pytest

from promdec.corpus import (
    Corpus,
    ProminenceLevel,
    ProsodicWord,
    TaggingMode,
    Utterance,
    asr_reference,
    detector_reference,
)
from promdec.errors import HarnessError
from promdec.harness import (
    FoldPlan,
    RunConfig,
    check_tokenset_mode,
    crossval,
    load_utterance_emissions,
    make_folds,
    read_config,
    recompute_detector_metrics,
    run_asr_eval,
    run_detector_eval,
    train_fold_lm,
)
from promdec.emissions import synth_emissions, write_emissions
from promdec.lm import score as lm_score
from promdec.synth import make_corpus, restrict_levels, utterance_seed
from promdec.vocab import (
    build_lexicon,
    build_trie,
    build_vocab,
    parse_reference,
    write_vocab,
)

PL0 = ProminenceLevel.PL0
PL2 = ProminenceLevel.PL2


def write_corpus_emissions(corpus, mode, dirpath, frames_per_token=3, noise=0.0, seed=0):
    """Synthesize noise-controlled emissions for every utterance; returns
    the shared alphabet."""
    render = detector_reference if mode.is_detector else asr_reference
    refs = {u.id: render(u, mode) for u in corpus}
    tokenset = build_vocab(list(refs.values()), mode)
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    for utt_id in sorted(refs):
        ids = tokenset.ids(parse_reference(refs[utt_id], mode))
        matrix = synth_emissions(
            ids, frames_per_token, noise, utterance_seed(seed, "emit:" + utt_id),
            len(tokenset),
        )
        path = dirpath / f"{utt_id}.promem1"
        write_emissions(matrix, path)
        write_vocab(tokenset, Path(str(path) + ".vocab"))
    return tokenset


def mini_corpus(conversations=4, utterances=2, seed=11, mode=TaggingMode.DET02):
    return restrict_levels(
        make_corpus(conversations, utterances, seed, min_words=1, max_words=3), mode
    )


class TestMakeFolds:
    def corpus(self, conversations=20):
        return make_corpus(conversations, 2, seed=5)

    def test_partition(self):
        corpus = self.corpus()
        plan = make_folds(corpus, k=10, seed=3)
        seen = [u for f in range(10) for u in plan.test_ids(f)]
        assert sorted(seen) == sorted(u.id for u in corpus)
        assert len(seen) == len(set(seen))

    def test_twenty_conversations_two_per_fold(self):
        plan = make_folds(self.corpus(20), k=10, seed=0)
        for f in range(10):
            convs = {u.rsplit("_", 1)[0] for u in plan.test_ids(f)}
            assert len(convs) == 2

    def test_conversation_granularity(self):
        plan = make_folds(self.corpus(), k=10, seed=9)
        fold_of = {}
        for utt_id, fold in plan.assignment.items():
            conv = utt_id.rsplit("_", 1)[0]
            assert fold_of.setdefault(conv, fold) == fold

    def test_deterministic_in_seed(self):
        a = make_folds(self.corpus(), k=10, seed=4)
        b = make_folds(self.corpus(), k=10, seed=4)
        assert a == b

    def test_seed_changes_plan(self):
        a = make_folds(self.corpus(), k=10, seed=0)
        b = make_folds(self.corpus(), k=10, seed=1)
        assert a.assignment != b.assignment

    def test_holdout_excluded(self):
        corpus = self.corpus()
        holdout = corpus.conversation_ids()[0]
        plan = make_folds(corpus, k=10, seed=0, holdout=[holdout])
        assert all(not u.startswith(holdout) for u in plan.assignment)
        assert plan.holdout_conversations == frozenset([holdout])

    def test_train_test_disjoint(self):
        plan = make_folds(self.corpus(), k=5, seed=2)
        for f in range(5):
            assert not set(plan.test_ids(f)) & set(plan.train_ids(f))

    def test_k_too_small(self):
        with pytest.raises(HarnessError, match="k >= 2"):
            make_folds(self.corpus(), k=1)

    def test_too_few_conversations(self):
        with pytest.raises(HarnessError, match="cannot fill"):
            make_folds(self.corpus(conversations=3), k=4)

    def test_fold_index_range(self):
        plan = make_folds(self.corpus(), k=4, seed=0)
        with pytest.raises(HarnessError, match="outside"):
            plan.test_ids(4)
        with pytest.raises(HarnessError, match="outside"):
            plan.train_ids(-1)


class TestReadConfig:
    def test_parses_flat_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\n\nseed = 7\nmode=tag02\n", encoding="utf-8")
        assert read_config(path) == {"seed": "7", "mode": "tag02"}

    def test_bad_line_reports_number(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed=1\nnot a pair\n", encoding="utf-8")
        with pytest.raises(HarnessError, match=":2:"):
            read_config(path)


class TestCheckTokensetMode:
    def test_detector_vocab_passes(self):
        ts = build_vocab(["|0 |2 |"], TaggingMode.DET02)
        check_tokenset_mode(ts, TaggingMode.DET02)

    def test_detector_rejects_tagged_char(self):
        ts = build_vocab(["|a0 b2 |"], TaggingMode.TAG02)
        with pytest.raises(HarnessError, match="not a detector symbol"):
            check_tokenset_mode(ts, TaggingMode.DET02)

    def test_det02_rejects_middle_level(self):
        ts = build_vocab(["|0 |1 |2 |"], TaggingMode.DET012)
        with pytest.raises(HarnessError, match="not allowed"):
            check_tokenset_mode(ts, TaggingMode.DET02)

    def test_tag02_rejects_pl1_tag(self):
        ts = build_vocab(["|a1 |"], TaggingMode.TAG012)
        with pytest.raises(HarnessError, match="not allowed"):
            check_tokenset_mode(ts, TaggingMode.TAG02)

    def test_baseline_accepts_plain_chars(self):
        ts = build_vocab(["|a b |"], TaggingMode.BASELINE)
        check_tokenset_mode(ts, TaggingMode.BASELINE)


class TestLoadUtteranceEmissions:
    def test_missing_file_names_utterance(self, tmp_path):
        with pytest.raises(HarnessError, match="missing emission file for utterance 'u1'"):
            load_utterance_emissions(tmp_path, "u1")

    def test_missing_sidecar(self, tmp_path):
        corpus = mini_corpus(conversations=1, utterances=1)
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        utt_id = next(iter(corpus)).id
        Path(str(tmp_path / f"{utt_id}.promem1") + ".vocab").unlink()
        with pytest.raises(HarnessError, match="missing vocab sidecar"):
            load_utterance_emissions(tmp_path, utt_id)

    def test_width_mismatch(self, tmp_path):
        corpus = mini_corpus(conversations=1, utterances=1)
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        utt_id = next(iter(corpus)).id
        bigger = build_vocab(["|0 |1 |2 |"], TaggingMode.DET012)
        write_vocab(bigger, Path(str(tmp_path / f"{utt_id}.promem1") + ".vocab"))
        with pytest.raises(HarnessError, match="does not match sidecar"):
            load_utterance_emissions(tmp_path, utt_id)

    def test_loads_matching_pair(self, tmp_path):
        corpus = mini_corpus(conversations=1, utterances=1)
        ts = write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        utt_id = next(iter(corpus)).id
        matrix, tokenset = load_utterance_emissions(tmp_path, utt_id)
        assert matrix.vocab_size == len(ts)
        assert tokenset == ts


class TestDetectorEval:
    def test_noise_free_is_perfect(self, tmp_path):
        corpus = mini_corpus()
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        report = run_detector_eval(corpus, tmp_path, TaggingMode.DET02)
        assert report.metrics["per"] == 0.0
        assert report.metrics["percent_aligned"] == 100.0
        assert report.metrics["accuracy"] == 100.0
        assert report.metrics["utterances"] == len(corpus)

    def test_workers_do_not_change_output(self, tmp_path):
        corpus = mini_corpus()
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        serial = run_detector_eval(corpus, tmp_path, TaggingMode.DET02, workers=1)
        pooled = run_detector_eval(corpus, tmp_path, TaggingMode.DET02, workers=4)
        assert serial == pooled

    def test_subset_selection(self, tmp_path):
        corpus = mini_corpus()
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        ids = sorted(u.id for u in corpus)[:3]
        report = run_detector_eval(corpus, tmp_path, TaggingMode.DET02, utt_ids=ids)
        assert [r["id"] for r in report.records] == ids

    def test_rejects_character_mode(self, tmp_path):
        with pytest.raises(HarnessError, match="Det mode"):
            run_detector_eval(mini_corpus(), tmp_path, TaggingMode.TAG02)

    def test_unannotated_word_rejected(self, tmp_path):
        utt = Utterance(
            id="001M002F_0000",
            conversation_id="001M002F",
            speaker_id="001M",
            prosodic_words=(ProsodicWord(tokens=("mal",), level=None),),
        )
        corpus = Corpus((utt,))
        write_corpus_emissions(mini_corpus(conversations=1, utterances=1), TaggingMode.DET02, tmp_path)
        with pytest.raises(HarnessError):
            run_detector_eval(corpus, tmp_path, TaggingMode.DET02)


class TestRecomputeDetectorMetrics:
    def test_zero_gated_fold_reports_null_accuracy(self):
        records = [
            {"id": "u1", "ref": "0 2", "hyp": "0", "aligned": False},
            {"id": "u2", "ref": "2", "hyp": "2 0", "aligned": False},
        ]
        metrics = recompute_detector_metrics(records)
        assert metrics["accuracy"] is None
        assert metrics["percent_aligned"] == 0.0
        assert metrics["per"] is not None

    def test_tampered_aligned_flag_rejected(self):
        records = [{"id": "u1", "ref": "0 2", "hyp": "0", "aligned": True}]
        with pytest.raises(HarnessError, match="contradicts"):
            recompute_detector_metrics(records)


class TestAsrEval:
    def test_noise_free_is_perfect(self, tmp_path):
        corpus = mini_corpus(mode=TaggingMode.TAG02)
        write_corpus_emissions(corpus, TaggingMode.TAG02, tmp_path)
        trie = build_trie(build_lexicon(corpus))
        report = run_asr_eval(corpus, tmp_path, TaggingMode.TAG02, trie)
        assert report.metrics["wer_lexfree"] == 0.0
        assert report.metrics["wer_lex"] == 0.0
        assert report.metrics["per"] == 0.0
        assert report.metrics["percent_aligned"] == 100.0
        assert report.metrics["accuracy"] == 100.0
        assert "wer_lm" not in report.metrics

    def test_lm_regime_added_when_model_given(self, tmp_path):
        corpus = mini_corpus(mode=TaggingMode.TAG02)
        write_corpus_emissions(corpus, TaggingMode.TAG02, tmp_path)
        trie = build_trie(build_lexicon(corpus))
        lm, _ = train_fold_lm(list(corpus), order=2)
        report = run_asr_eval(corpus, tmp_path, TaggingMode.TAG02, trie, lm=lm)
        assert report.metrics["wer_lm"] == 0.0

    def test_rejects_detector_mode(self, tmp_path):
        corpus = mini_corpus()
        with pytest.raises(HarnessError, match="character mode"):
            run_asr_eval(corpus, tmp_path, TaggingMode.DET02, trie=None)

    def test_out_of_lexicon_emissions_favour_lex_decode(self, tmp_path):
        # Emissions spell "a b" as two words, but the lexicon only has
        # "ab"; constrained decoding cannot do worse than the free pass.
        utt = Utterance(
            id="001M002F_0000",
            conversation_id="001M002F",
            speaker_id="001M",
            prosodic_words=(ProsodicWord(tokens=("ab",), level=PL0),),
        )
        corpus = Corpus((utt,))
        ts = build_vocab(["|a |b |"], TaggingMode.BASELINE)
        ids = ts.ids(parse_reference("|a |b |", TaggingMode.BASELINE))
        matrix = synth_emissions(ids, 3, 0.0, 0, len(ts))
        path = tmp_path / f"{utt.id}.promem1"
        write_emissions(matrix, path)
        write_vocab(ts, Path(str(path) + ".vocab"))

        trie = build_trie(build_lexicon(corpus))
        report = run_asr_eval(corpus, tmp_path, TaggingMode.BASELINE, trie)
        assert report.metrics["wer_lexfree"] == 200.0
        assert report.metrics["wer_lex"] <= report.metrics["wer_lexfree"]
        assert report.metrics["percent_aligned"] == 0.0
        assert report.metrics["accuracy"] is None


class TestTrainFoldLm:
    def test_falls_back_on_degenerate_counts(self):
        corpus = mini_corpus(conversations=1, utterances=2)
        lm, discount = train_fold_lm(list(corpus), order=2)
        assert discount == "fixed-0.5"
        sentence = next(iter(corpus)).orthographic_tokens
        assert lm_score(lm, tuple(), sentence[0]) < 0.0


class TestRunConfig:
    def test_task_mode_consistency(self):
        with pytest.raises(HarnessError, match="Det mode"):
            RunConfig(task="detector", mode=TaggingMode.TAG02)
        with pytest.raises(HarnessError, match="character mode"):
            RunConfig(task="asr", mode=TaggingMode.DET012)
        with pytest.raises(HarnessError, match="unknown task"):
            RunConfig(task="both", mode=TaggingMode.TAG02)


class TestCrossval:
    def test_detector_folds_and_aggregate(self, tmp_path):
        corpus = mini_corpus(conversations=4, utterances=2)
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        plan = make_folds(corpus, k=2, seed=0)
        cfg = RunConfig(task="detector", mode=TaggingMode.DET02)
        reports = crossval(corpus, plan, tmp_path, cfg)
        assert sorted(reports) == ["aggregate", "fold_00", "fold_01"]
        agg = reports["aggregate"].metrics
        assert agg["per"] == {"mean": 0.0, "std": 0.0, "folds": 2}
        assert agg["accuracy"]["mean"] == 100.0
        total_records = sum(len(reports[f"fold_{f:02d}"].records) for f in range(2))
        assert len(reports["aggregate"].records) == total_records == len(corpus)

    def test_holdout_report(self, tmp_path):
        corpus = mini_corpus(conversations=5, utterances=2)
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        held = corpus.conversation_ids()[0]
        plan = make_folds(corpus, k=2, seed=0, holdout=[held])
        cfg = RunConfig(task="detector", mode=TaggingMode.DET02)
        reports = crossval(corpus, plan, tmp_path, cfg)
        assert "holdout" in reports
        held_ids = {u.id for u in corpus if u.conversation_id == held}
        assert {r["id"] for r in reports["holdout"].records} == held_ids
        for f in range(2):
            assert not held_ids & set(reports[f"fold_{f:02d}"].records[0] for _ in ())

    def test_asr_with_lm_records_discount_choice(self, tmp_path):
        corpus = mini_corpus(conversations=4, utterances=2, mode=TaggingMode.TAG02)
        write_corpus_emissions(corpus, TaggingMode.TAG02, tmp_path)
        plan = make_folds(corpus, k=2, seed=1)
        cfg = RunConfig(task="asr", mode=TaggingMode.TAG02, use_lm=True, lm_order=2)
        reports = crossval(corpus, plan, tmp_path, cfg)
        for f in range(2):
            metrics = reports[f"fold_{f:02d}"].metrics
            assert metrics["lm_discount"] in ("mkn", "fixed-0.5")
            assert metrics["wer_lm"] == 0.0

    def test_deterministic(self, tmp_path):
        corpus = mini_corpus(conversations=4, utterances=2)
        write_corpus_emissions(corpus, TaggingMode.DET02, tmp_path)
        plan = make_folds(corpus, k=2, seed=0)
        cfg = RunConfig(task="detector", mode=TaggingMode.DET02)
        first = crossval(corpus, plan, tmp_path, cfg)
        second = crossval(corpus, plan, tmp_path, cfg)
        assert {k: v.to_json() for k, v in first.items()} == {
            k: v.to_json() for k, v in second.items()
        }
