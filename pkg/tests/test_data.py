import numpy as np
import pytest

from mdmlc.core.errors import DatasetError, MdmlIOError
from mdmlc.ml.data import (
    Dataset,
    Standardizer,
    chronological_split,
    fit_standardizer,
    read_csv,
    standardizer_path,
    write_csv,
)
from mdmlc.ml.metrics import Averaging, confusion_matrix, metrics_from_confusion
from mdmlc.ml.synth import FEATURE_COUNT, synth_hydraulic_dataset


def _rows(n, d=3):
    features = np.arange(n * d, dtype=np.float64).reshape(n, d)
    return Dataset.from_arrays(features, np.arange(n) % 2)


def test_csv_round_trip(tmp_path):
    data = Dataset.from_arrays([[0.5, -1.25], [3.0, 1e-3]], [1, 0], feature_names=("a", "b"))
    path = tmp_path / "d.csv"
    write_csv(data, path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "a,b,label"
    again = read_csv(path)
    assert again.feature_names == ("a", "b")
    np.testing.assert_allclose(again.features, data.features)
    assert again.labels.tolist() == [1, 0]


def test_csv_keeps_every_digit(tmp_path):
    values = np.random.default_rng(4).normal(size=(5, 3)) * 1e3
    data = Dataset.from_arrays(values, [0, 1, 0, 1, 1])
    path = tmp_path / "d.csv"
    write_csv(data, path)
    assert np.array_equal(read_csv(path).features, values)


def test_single_row_csv(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("f0,label\n2.5,1\n", encoding="utf-8")
    data = read_csv(path)
    assert (data.n, data.d) == (1, 1)


@pytest.mark.parametrize("text, fragment", [
    ("", "empty dataset file"),
    ("f0,f1,target\n1,2,0\n", "expected header"),
    ("f0,label\n", "no rows"),
    ("f0,f1,label\n1,2\n", "columns"),
    ("f0,label\n1,2\n", "row 2: label must be 0 or 1"),
    ("f0,label\nabc,1\n", ""),
    ("f0,label\nnan,1\n", "non-finite"),
])
def test_bad_csv(tmp_path, text, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(DatasetError) as info:
        read_csv(path)
    assert fragment in str(info.value)


def test_missing_csv_is_an_io_error(tmp_path):
    with pytest.raises(MdmlIOError):
        read_csv(tmp_path / "nope.csv")


def test_dataset_validation():
    with pytest.raises(DatasetError):
        Dataset.from_arrays([1.0, 2.0], [0, 1])
    with pytest.raises(DatasetError):
        Dataset.from_arrays([[1.0], [2.0]], [0])
    with pytest.raises(DatasetError):
        Dataset.from_arrays([[1.0], [2.0]], [0, 2])
    assert _rows(4).feature_names == ("f0", "f1", "f2")
    assert _rows(2).one_hot().tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_standardizer_uses_training_rows_only():
    train = Dataset.from_arrays([[1.0, 5.0], [3.0, 5.0]], [0, 1])
    scaler = fit_standardizer(train)
    assert scaler.mean.tolist() == [2.0, 5.0]
    # 零方差列的 std 置为 1
    assert scaler.std.tolist() == [1.0, 1.0]
    assert scaler.transform([[3.0, 7.0]]).tolist() == [[1.0, 2.0]]
    np.testing.assert_allclose(scaler.inverse_transform(scaler.transform(train.features)), train.features)
    with pytest.raises(DatasetError):
        scaler.transform([[1.0, 2.0, 3.0]])


def test_standardizer_needs_two_rows():
    with pytest.raises(DatasetError):
        fit_standardizer(_rows(1))


def test_standardizer_file(tmp_path):
    scaler = fit_standardizer(_rows(10))
    path = standardizer_path(tmp_path / "model.mlq")
    assert path.name == "model.scaler.json"
    scaler.save(path)
    loaded = Standardizer.load(path)
    assert loaded.count == 10
    np.testing.assert_array_equal(loaded.mean, scaler.mean)
    np.testing.assert_array_equal(loaded.std, scaler.std)
    path.write_text("{\"mean\": [1]}", encoding="utf-8")
    with pytest.raises(MdmlIOError):
        Standardizer.load(path)


def test_chronological_split_keeps_order():
    train, test = chronological_split(_rows(2205, 1))
    assert (train.n, test.n) == (1764, 441)
    assert train.features[-1, 0] == 1763.0
    assert test.features[0, 0] == 1764.0


@pytest.mark.parametrize("n, fraction, sizes", [(2, 0.8, (1, 1)), (10, 0.05, (1, 9)), (10, 0.99, (9, 1))])
def test_split_keeps_both_sides_non_empty(n, fraction, sizes):
    train, test = chronological_split(_rows(n), fraction)
    assert (train.n, test.n) == sizes


def test_split_rejects_bad_input():
    with pytest.raises(ValueError):
        chronological_split(_rows(10), 1.0)
    with pytest.raises(DatasetError):
        chronological_split(_rows(1))


def test_synth_counts_and_shape():
    data = synth_hydraulic_dataset(seed=3, n=50)
    assert data.d == FEATURE_COUNT == 6120
    assert int((data.labels == 0).sum()) == round(50 * 0.5537)
    assert data.feature_names == tuple(f"f{i}" for i in range(6120))


def test_synth_is_deterministic():
    a = synth_hydraulic_dataset(seed=1, n=20)
    b = synth_hydraulic_dataset(seed=1, n=20)
    c = synth_hydraulic_dataset(seed=2, n=20)
    np.testing.assert_array_equal(a.features, b.features)
    assert not np.array_equal(a.features, c.features)


def test_synth_classes_are_shifted():
    data = synth_hydraulic_dataset(seed=0, n=200)
    se = data.features[:, -60:].mean(axis=1)
    # 泄漏循环效率更低
    assert se[data.labels == 1].mean() < se[data.labels == 0].mean() - 3.0


@pytest.mark.parametrize("kwargs", [{"n": 0}, {"negative_share": 1.5}, {"negative_share": -0.1}])
def test_synth_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        synth_hydraulic_dataset(**kwargs)


def test_metrics_from_confusion():
    matrix = confusion_matrix([0, 0, 0, 1], [0, 0, 1, 1])
    assert matrix.tolist() == [[2, 1], [0, 1]]
    weighted = metrics_from_confusion(matrix)
    assert weighted.accuracy == 0.75
    assert weighted.precision == pytest.approx(0.875)
    assert weighted.recall == pytest.approx(0.75)
    positive = metrics_from_confusion(matrix, Averaging.POSITIVE)
    assert (positive.precision, positive.recall) == (0.5, 1.0)
    macro = metrics_from_confusion(matrix, "macro")
    assert macro.precision == pytest.approx(0.75)
    assert macro.recall == pytest.approx((2 / 3 + 1) / 2)
    assert weighted.support == [3, 1]


def test_metrics_with_empty_class_are_zero():
    metrics = metrics_from_confusion(confusion_matrix([0, 1], [0, 0]), Averaging.POSITIVE)
    assert (metrics.precision, metrics.recall) == (0.0, 0.0)
    assert metrics.accuracy == 0.5
