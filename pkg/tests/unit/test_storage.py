"""Tests for dataset files and the run store."""

import numpy as np
import pytest

from worstclass_boost.models.errors import LabelError, ParseError
from worstclass_boost.models.schemas import LabeledDataset
from worstclass_boost.storage import RunStore, load_dataset, run_key, save_dataset, write_json_atomic
from worstclass_boost.storage.dataset_files import load_csv, load_jsonl


@pytest.fixture
def random_data():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((25, 3)) * 1e3
    labels = np.concatenate([[1, 2, 3, 4], rng.integers(1, 5, size=21)])
    return LabeledDataset.from_labels(X, labels, 4)


class TestCsv:
    def test_round_trip_is_exact(self, tmp_path, random_data):
        path = save_dataset(random_data, tmp_path / "data.csv")
        assert path.read_text().splitlines()[0] == "label,f1,f2,f3"
        loaded = load_dataset(path)
        assert loaded.equals(random_data)

    def test_num_classes_inferred_from_max_label(self, tmp_path):
        path = tmp_path / "small.csv"
        path.write_text("label,f1\n1,0.5\n3,1.5\n")
        data = load_csv(path)
        assert data.num_classes == 3
        assert data.external_labels.tolist() == [1, 3]

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,f1\n1,0.5\n")
        with pytest.raises(ParseError) as info:
            load_csv(path)
        assert info.value.line == 1

    def test_non_numeric_field_reports_file_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,f1,f2\n1,0.5,1\n2,0.1,2\n1,abc,3\n")
        with pytest.raises(ParseError) as info:
            load_csv(path)
        assert info.value.line == 4

    def test_extra_field_reports_file_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,f1\n1,0.5\n2,0.5,9\n")
        with pytest.raises(ParseError, match="line 3") as info:
            load_csv(path)
        assert info.value.line == 3

    def test_extra_field_in_first_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,f1\n1,0.5,9\n2,0.5\n")
        with pytest.raises(ParseError) as info:
            load_csv(path)
        assert info.value.line == 2

    def test_fractional_label(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,f1\n1.5,0.5\n")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_label_out_of_range(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,f1\n1,0.5\n0,0.1\n")
        with pytest.raises(LabelError) as info:
            load_csv(path)
        assert info.value.line == 3
        assert info.value.label == 0

    def test_label_above_declared_classes(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,f1\n1,0.5\n4,0.1\n")
        with pytest.raises(LabelError):
            load_csv(path, num_classes=3)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            load_csv(path)


class TestJsonl:
    def test_round_trip_is_exact(self, tmp_path, random_data):
        path = save_dataset(random_data, tmp_path / "data.jsonl")
        assert load_dataset(path).equals(random_data)

    def test_blank_lines_skipped_and_lines_counted(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text('{"label": 1, "features": [0.0]}\n\n{"label": 7, "features": [1.0]}\n')
        with pytest.raises(LabelError) as info:
            load_jsonl(path, num_classes=2)
        assert info.value.line == 3

    @pytest.mark.parametrize(
        "body",
        [
            '{"label": 1, "features": [0.0]}\n{"label": 2\n',
            '{"label": 1, "features": [0.0]}\n{"features": [1.0]}\n',
            '{"label": 1, "features": [0.0]}\n{"label": 2, "features": [1.0, 2.0]}\n',
            '{"label": 1, "features": [0.0]}\n{"label": "2", "features": [1.0]}\n',
        ],
    )
    def test_malformed_records(self, tmp_path, body):
        path = tmp_path / "bad.jsonl"
        path.write_text(body)
        with pytest.raises(ParseError) as info:
            load_jsonl(path)
        assert info.value.line == 2

    def test_no_records(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("\n")
        with pytest.raises(ParseError):
            load_jsonl(path)


class TestRunStore:
    def test_key_is_stable_and_short(self):
        first = run_key({"a": 1, "b": [1, 2]}, {"seed": 0, "theta": 0.5})
        second = run_key({"b": [1, 2], "a": 1}, {"theta": 0.5, "seed": 0})
        assert first == second
        assert len(first) == 20
        assert run_key({"a": 1, "b": [1, 2]}, {"seed": 1, "theta": 0.5}) != first

    def test_save_load_iterate(self, tmp_path):
        store = RunStore(tmp_path / "out")
        assert store.load("abc") is None
        store.save("abc", {"status": "ok", "seed": 1})
        store.save("def", {"status": "error", "seed": 2})
        assert store.load("abc") == {"status": "ok", "seed": 1}
        assert sorted(doc["seed"] for doc in store) == [1, 2]

    def test_atomic_write_leaves_no_temporaries(self, tmp_path):
        target = write_json_atomic(tmp_path / "nested" / "doc.json", {"x": 1})
        write_json_atomic(target, {"x": 2})
        assert [p.name for p in target.parent.iterdir()] == ["doc.json"]
        assert target.read_text().strip().startswith("{")
