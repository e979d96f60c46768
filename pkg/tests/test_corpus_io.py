"""Interchange formats: parse files, embedding tables, checkpoints, reports."""

import io
import json

import numpy as np
import pytest

from triadground import corpus_io as cio
from triadground.model import ModelConfig, ModelParams


BLACK_CAT = """1\tblack\t_\tJJ\t_\t_\t2\tamod\t_\t_
2\tcat\t_\tNN\t_\t_\t0\troot\t_\t_
"""


class TestReadParses:
    def test_minimal_two_token_tree(self):
        parses = cio.read_parses(io.StringIO(BLACK_CAT))
        assert len(parses) == 1
        p = parses[0]
        assert [t.surface for t in p.tokens] == ["black", "cat"]
        assert p.root.index == 2

    def test_self_head_is_structure_error(self):
        text = "1\tcat\t_\tNN\t_\t_\t1\troot\t_\t_\n"
        with pytest.raises(cio.ParseStructureError):
            cio.read_parses(io.StringIO(text))

    def test_blank_line_separates_blocks(self):
        text = BLACK_CAT + "\n" + BLACK_CAT
        assert len(cio.read_parses(io.StringIO(text))) == 2

    def test_wrong_column_count_names_line(self):
        text = BLACK_CAT + "\n1\tcat\tNN\n"
        with pytest.raises(cio.ParseFormatError, match="line 4"):
            cio.read_parses(io.StringIO(text))

    def test_multiple_roots_rejected(self):
        text = "1\tblack\t_\tJJ\t_\t_\t0\troot\t_\t_\n2\tcat\t_\tNN\t_\t_\t0\troot\t_\t_\n"
        with pytest.raises(cio.ParseStructureError, match="root"):
            cio.read_parses(io.StringIO(text))

    def test_head_cycle_rejected(self):
        text = (
            "1\ta\t_\tNN\t_\t_\t2\tdep\t_\t_\n"
            "2\tb\t_\tNN\t_\t_\t1\tdep\t_\t_\n"
            "3\tc\t_\tNN\t_\t_\t0\troot\t_\t_\n"
        )
        with pytest.raises(cio.ParseStructureError, match="cycle"):
            cio.read_parses(io.StringIO(text))

    def test_surfaces_lowercased(self):
        text = "1\tBlack\t_\tJJ\t_\t_\t2\tamod\t_\t_\n2\tCAT\t_\tNN\t_\t_\t0\troot\t_\t_\n"
        p = cio.read_parses(io.StringIO(text))[0]
        assert p.words() == ["black", "cat"]

    def test_sent_id_comment_carried(self):
        text = "# sent_id = q42\n" + BLACK_CAT
        assert cio.read_parses(io.StringIO(text))[0].sentence_id == "q42"

    def test_write_read_identity(self):
        parses = cio.read_parses(io.StringIO("# sent_id = a\n" + BLACK_CAT + "\n" + BLACK_CAT))
        buf = io.StringIO()
        cio.write_parses(parses, buf)
        again = cio.read_parses(io.StringIO(buf.getvalue()))
        assert again == parses


class TestEmbeddings:
    def test_small_file_with_specials(self):
        text = "cat 0.1 0.2 0.3 0.4\ndog 0 0 0 1\nred 1 0 0 0\n"
        table = cio.load_embeddings(io.StringIO(text), dimension=4)
        assert len(table.words()) == 6  # 3 file words + SELF/UKN/OOV
        for w in table.words():
            assert table.lookup(w).shape == (4,)

    def test_wrong_arity_names_line(self):
        with pytest.raises(cio.EmbeddingFormatError, match="line 1"):
            cio.load_embeddings(io.StringIO("cat 0.1 0.2\n"), dimension=4)

    def test_unknown_word_falls_back_to_oov(self):
        table = cio.load_embeddings(io.StringIO("cat 1 2 3 4\n"), dimension=4)
        np.testing.assert_array_equal(table.lookup("zyzzyva"), table.lookup("OOV"))

    def test_duplicate_word_last_wins_with_warning(self):
        text = "cat 1 1 1 1\ncat 2 2 2 2\n"
        with pytest.warns(UserWarning, match="duplicate"):
            table = cio.load_embeddings(io.StringIO(text), dimension=4)
        np.testing.assert_array_equal(table.lookup("cat"), [2, 2, 2, 2])

    def test_special_rows_seeded_and_reproducible(self):
        t1 = cio.load_embeddings(io.StringIO("cat 1 2 3 4\n"), dimension=4, seed=5)
        t2 = cio.load_embeddings(io.StringIO("cat 1 2 3 4\n"), dimension=4, seed=5)
        np.testing.assert_array_equal(t1.lookup("SELF"), t2.lookup("SELF"))
        assert np.all(np.abs(t1.lookup("SELF")) <= 0.1)

    def test_file_specials_respected(self):
        text = "SELF 9 9 9 9\ncat 1 2 3 4\n"
        table = cio.load_embeddings(io.StringIO(text), dimension=4)
        np.testing.assert_array_equal(table.lookup("SELF"), [9, 9, 9, 9])

    def test_write_round_trip(self):
        table = cio.random_embeddings(["cat", "dog"], 8, seed=3)
        buf = io.StringIO()
        cio.write_embeddings(table, buf)
        again = cio.load_embeddings(io.StringIO(buf.getvalue()), dimension=8)
        for w in table.words():
            np.testing.assert_array_equal(again.lookup(w), table.lookup(w))


@pytest.fixture
def params():
    table = cio.random_embeddings(["cat", "dog", "red"], 6, seed=2)
    return ModelParams.init(ModelConfig(d_v=5, d_l=6, hidden_attn=7, hidden_recon=4), table, seed=9)


class TestCheckpoints:
    def test_round_trip_bit_exact(self, params, tmp_path):
        path = tmp_path / "model.ckpt"
        cio.save_checkpoint(params, path)
        loaded = cio.load_checkpoint(path)
        assert loaded.config == params.config
        assert set(loaded.tensors) == set(params.tensors)
        for name, t in params.tensors.items():
            np.testing.assert_array_equal(loaded.tensors[name].data, t.data)

    def test_version_flip_rejected(self, params, tmp_path):
        path = tmp_path / "model.ckpt"
        cio.save_checkpoint(params, path)
        blob = bytearray(path.read_bytes())
        blob[4] ^= 0xFF  # corrupt the version field
        path.write_bytes(bytes(blob))
        with pytest.raises(cio.CheckpointVersionError):
            cio.load_checkpoint(path)

    def test_truncated_file_rejected_cleanly(self, params, tmp_path):
        path = tmp_path / "model.ckpt"
        cio.save_checkpoint(params, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 100])
        with pytest.raises(cio.CheckpointError, match="truncated"):
            cio.load_checkpoint(path)

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"definitely not a checkpoint")
        with pytest.raises(cio.CheckpointError):
            cio.load_checkpoint(path)


class TestReports:
    def test_json_lines_round_trip(self, tmp_path):
        rows = [{"query_id": "q1", "iou": 1.0, "correct": True}, {"query_id": "q2", "iou": 0.0}]
        buf = io.StringIO()
        cio.write_report(rows, buf)
        lines = buf.getvalue().strip().split("\n")
        assert len(lines) == 2
        assert json.loads(lines[0])["query_id"] == "q1"
        assert cio.read_report(io.StringIO(buf.getvalue())) == rows
