import numpy as np
import pytest

from core.errors import DataError, InvalidTargetError, ParseError, ShapeError
from ingestion.dataset import Dataset
from ingestion.loader import (
    load_dataset,
    load_dense_csv,
    load_sparse,
    write_dataset,
    write_sparse,
)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write


class TestDataset:
    def test_arrays_are_read_only(self):
        data = Dataset(features=[[1.0, 2.0]], targets=[1.0])
        with pytest.raises(ValueError):
            data.features[0, 0] = 5.0

    def test_validation(self):
        with pytest.raises(ShapeError):
            Dataset(features=[[1.0], [2.0]], targets=[1.0])
        with pytest.raises(DataError):
            Dataset(features=[[np.nan]], targets=[1.0])
        with pytest.raises(InvalidTargetError):
            Dataset(features=[[1.0]], targets=[0.5])
        assert Dataset(features=[[1.0]], targets=[0.5], task="regression").n == 1

    def test_subset_and_counts(self):
        data = Dataset(features=np.arange(8.0).reshape(4, 2), targets=[1, -1, 1, 1])
        part = data.subset([0, 2])
        assert part.n == 2 and part.d == 2
        assert data.class_counts() == {"+1": 3, "-1": 1}


class TestDenseCsv:
    def test_documented_row(self, write):
        data = load_dense_csv(write("d.csv", "0.1,0.2,-1\n"))
        np.testing.assert_array_equal(data.features, [[0.1, 0.2]])
        np.testing.assert_array_equal(data.targets, [-1.0])
        assert data.task == "classification"

    def test_real_targets_are_regression(self, write):
        data = load_dense_csv(write("r.csv", "1,0.25\n2,0.75\n"))
        assert data.task == "regression"

    def test_unparsable_value_reports_line(self, write):
        with pytest.raises(ParseError) as info:
            load_dense_csv(write("bad.csv", "1,2,1\n3,abc,-1\n"))
        assert info.value.line_number == 2

    def test_short_row(self, write):
        with pytest.raises(ParseError) as info:
            load_dense_csv(write("short.csv", "1,2,1\n3,-1\n"))
        assert info.value.line_number == 2

    def test_long_row(self, write):
        with pytest.raises(ParseError):
            load_dense_csv(write("long.csv", "1,2,1\n3,4,5,-1\n"))

    def test_empty_and_missing(self, write, tmp_path):
        with pytest.raises(DataError):
            load_dense_csv(write("empty.csv", "\n"))
        with pytest.raises(DataError):
            load_dense_csv(tmp_path / "missing.csv")


class TestSparse:
    def test_documented_line(self, write):
        data = load_sparse(write("s.svm", "+1 1:0.5 3:2.0\n"))
        np.testing.assert_array_equal(data.features, [[0.5, 0.0, 2.0]])
        np.testing.assert_array_equal(data.targets, [1.0])

    def test_malformed_value(self, write):
        with pytest.raises(ParseError) as info:
            load_sparse(write("bad.svm", "1 1:abc\n"))
        assert info.value.line_number == 1

    def test_index_rules(self, write):
        with pytest.raises(ParseError):
            load_sparse(write("zero.svm", "1 0:1.0\n"))
        with pytest.raises(ParseError) as info:
            load_sparse(write("order.svm", "1 1:1.0\n-1 3:1.0 2:1.0\n"))
        assert info.value.line_number == 2

    def test_comments_and_missing_features(self, write):
        data = load_sparse(write("c.svm", "# header\n-1 2:1.5\n+1\n"))
        np.testing.assert_array_equal(data.features, [[0.0, 1.5], [0.0, 0.0]])

    def test_empty(self, write):
        with pytest.raises(DataError):
            load_sparse(write("e.svm", "# nothing\n"))

    def test_write_read_round_trip(self, tmp_path, rng):
        X = rng.normal(size=(25, 6))
        X[rng.random((25, 6)) < 0.4] = 0.0
        X[:, -1] = rng.normal(size=25)  # keep the full width
        data = Dataset(features=X, targets=rng.choice([-1.0, 1.0], 25))
        again = load_sparse(write_sparse(data, tmp_path / "rt.svm"))
        np.testing.assert_array_equal(again.features, data.features)
        np.testing.assert_array_equal(again.targets, data.targets)


class TestDispatch:
    def test_extension_picks_format(self, tmp_path, rng):
        data = Dataset(features=rng.normal(size=(5, 2)), targets=rng.normal(size=5), task="regression")
        for name in ("x.csv", "x.svm"):
            again = load_dataset(write_dataset(data, tmp_path / name), task="regression")
            np.testing.assert_array_equal(again.features, data.features)
            np.testing.assert_array_equal(again.targets, data.targets)
