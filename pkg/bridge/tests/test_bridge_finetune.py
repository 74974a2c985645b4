import pytest

from promdec_bridge.errors import BridgeError
from promdec_bridge.finetune import (
    FinetuneConfig,
    finetune_stub,
    read_references,
    reference_units,
    tokens_from_references,
)
from promdec_bridge.model import load_checkpoint

from helpers import write_fixture

DET_ROWS = [
    ("u00", "|0 |2 |"),
    ("u01", "|2 |0 |"),
    ("u02", "|0 |0 |2 |"),
    ("u03", "|2 |"),
    ("u04", "|0 |"),
    ("u05", "|0 |2 |2 |"),
    ("u06", "|2 |2 |"),
    ("u07", "|0 |0 |"),
    ("u08", "|2 |0 |0 |"),
    ("u09", "|0 |2 |0 |"),
]


class TestReferenceUnits:
    def test_detector_reference(self):
        assert reference_units("|0 |2 |") == ["|", "0", "|", "2", "|"]

    def test_tagged_characters(self):
        assert reference_units("|d0 i0 e0 |") == ["|", "d0", "i0", "e0", "|"]

    def test_fused_boundaries(self):
        assert reference_units("||0 |") == ["|", "|", "0", "|"]

    def test_empty_reference(self):
        assert reference_units("") == []


class TestTokensFromReferences:
    def test_blank_and_boundary_lead(self):
        tokens = tokens_from_references(DET_ROWS)
        assert tokens == ["<blank>", "|", "0", "2"]

    def test_tagged_units_sorted(self):
        tokens = tokens_from_references([("u", "|b2 a0 |")])
        assert tokens == ["<blank>", "|", "a0", "b2"]


class TestReadReferences:
    def test_reads_rows(self, tmp_path):
        refs, _ = write_fixture(tmp_path, DET_ROWS[:2])
        assert read_references(refs) == DET_ROWS[:2]

    def test_rejects_untabbed_line(self, tmp_path):
        path = tmp_path / "refs.tsv"
        path.write_text("u1 no tab here\n", encoding="utf-8")
        with pytest.raises(BridgeError, match="id<TAB>reference"):
            read_references(path)


class TestFinetuneStub:
    def test_overfit_loss_decreases_on_average(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS)
        result = finetune_stub(refs, audio, tmp_path / "model.pt")
        assert len(result.losses) == 50
        assert all(l == l and l != float("inf") for l in result.losses)
        diffs = [b - a for a, b in zip(result.losses, result.losses[1:])]
        assert sum(diffs) / len(diffs) < 0.0
        assert result.losses[-1] < result.losses[0]

    def test_head_size_matches_detector_alphabet(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS[:4])
        result = finetune_stub(
            refs, audio, tmp_path / "model.pt", config=FinetuneConfig(steps=2)
        )
        # blank, boundary and both prominence digits
        assert result.tokens == ("<blank>", "|", "0", "2")
        _model, config, tokens = load_checkpoint(result.checkpoint)
        assert config.vocab_size == 4
        assert tuple(tokens) == result.tokens

    def test_sidecar_order_is_authoritative(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS[:4])
        vocab = tmp_path / "given.vocab"
        vocab.write_text("<blank>\n2\n|\n0\n", encoding="utf-8")
        result = finetune_stub(
            refs, audio, tmp_path / "model.pt", vocab_path=vocab,
            config=FinetuneConfig(steps=2),
        )
        assert result.tokens == ("<blank>", "2", "|", "0")

    def test_vocab_missing_unit_errors(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS[:4])
        vocab = tmp_path / "given.vocab"
        vocab.write_text("<blank>\n|\n0\n", encoding="utf-8")
        with pytest.raises(BridgeError, match="unit '2'.*not in the vocab"):
            finetune_stub(refs, audio, tmp_path / "model.pt", vocab_path=vocab)

    def test_vocab_without_leading_blank_errors(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS[:2])
        vocab = tmp_path / "given.vocab"
        vocab.write_text("|\n0\n2\n", encoding="utf-8")
        with pytest.raises(BridgeError, match="token id 0"):
            finetune_stub(refs, audio, tmp_path / "model.pt", vocab_path=vocab)

    def test_empty_refs_error(self, tmp_path):
        path = tmp_path / "refs.tsv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(BridgeError, match="no references"):
            finetune_stub(path, tmp_path, tmp_path / "model.pt")

    def test_audio_too_short_for_target(self, tmp_path):
        refs, audio = write_fixture(tmp_path, [("u00", "|0 |2 |0 |2 |0 |2 |")])
        # keep only the first unit's worth of samples: 2 frames < 13 labels
        from promdec_bridge.audio import read_wave, write_wave

        wave = read_wave(audio / "u00.wav")
        write_wave(wave[:480], audio / "u00.wav")
        with pytest.raises(BridgeError, match="cannot carry"):
            finetune_stub(refs, audio, tmp_path / "model.pt")

    def test_missing_audio_is_oserror(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS[:2])
        (audio / "u00.wav").unlink()
        with pytest.raises(OSError):
            finetune_stub(refs, audio, tmp_path / "model.pt")

    def test_same_seed_same_losses(self, tmp_path):
        refs, audio = write_fixture(tmp_path, DET_ROWS[:3])
        cfg = FinetuneConfig(steps=4)
        a = finetune_stub(refs, audio, tmp_path / "a.pt", config=cfg)
        b = finetune_stub(refs, audio, tmp_path / "b.pt", config=cfg)
        assert a.losses == b.losses

    def test_config_validation(self):
        with pytest.raises(BridgeError, match="steps"):
            FinetuneConfig(steps=0)
        with pytest.raises(BridgeError, match="learning rate"):
            FinetuneConfig(lr=0.0)
