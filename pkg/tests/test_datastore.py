import struct

import numpy as np
import pytest

from sparsewarn.datastore import (
    FeatureDataset, balance_oversample, load_features, save_features, stratified_kfold,
)
from sparsewarn.errors import (
    HeaderError, LabelError, NonFiniteError, RowLengthError, StratificationError,
)


def _labels_dataset(counts, d=2, seed=0):
    labels = np.repeat(np.arange(len(counts)), counts)
    X = np.random.default_rng(seed).standard_normal((labels.size, d))
    return FeatureDataset(X, labels, tuple(f"c{i}" for i in range(len(counts))))


# ---------------------------------------------------------------------------
# load_features / save_features


def test_minimal_csv(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("# fvec v1 n=2 d=3 c=2\n0,1,2,3\n1,4.5,-1e-3,0\n")
    ds = load_features(p)
    assert (ds.n, ds.d, ds.n_classes) == (2, 3, 2)
    assert ds.labels.tolist() == [0, 1]
    np.testing.assert_array_equal(ds.samples[1], [4.5, -1e-3, 0.0])


def test_table_sized_file_counts(tmp_path):
    labels = np.r_[np.ones(1065, int), np.zeros(12544, int)]
    ds = FeatureDataset(np.zeros((labels.size, 2)), labels, ("control", "case"))
    p = tmp_path / "big.bin"
    save_features(ds, p)
    back = load_features(p)
    assert back.n == 13609
    assert back.class_counts().tolist() == [12544, 1065]


def test_binary_round_trip_bit_for_bit(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.standard_normal((10, 16)).astype(np.float32).astype(np.float64)
    ds = FeatureDataset(X, rng.integers(0, 3, 10), ("a", "b", "c"))
    p = tmp_path / "r.bin"
    save_features(ds, p)
    back = load_features(p)
    assert back.samples.tobytes() == ds.samples.tobytes()
    np.testing.assert_array_equal(back.labels, ds.labels)


def test_binary_layout(tmp_path):
    ds = FeatureDataset(np.array([[1.0, 2.0]]), [1], ("a", "b"))
    p = tmp_path / "x.bin"
    save_features(ds, p)
    blob = p.read_bytes()
    assert blob[:5] == b"FVEC1"
    assert struct.unpack_from("<III", blob, 5) == (1, 2, 2)
    assert struct.unpack_from("<Iff", blob, 17) == (1, 1.0, 2.0)
    assert len(blob) == 17 + 12


def test_csv_round_trip_exact(tmp_path):
    rng = np.random.default_rng(4)
    ds = FeatureDataset(rng.standard_normal((7, 5)), rng.integers(0, 2, 7), ("a", "b"))
    p = tmp_path / "r.csv"
    save_features(ds, p)
    np.testing.assert_array_equal(load_features(p).samples, ds.samples)


@pytest.mark.parametrize(
    "text, error, where",
    [
        ("# fvec v2 n=1 d=1 c=1\n0,1\n", HeaderError, "line 1"),
        ("# fvec v1 n=2 d=2 c=2\n0,1,2\n1,1\n", RowLengthError, "line 3"),
        ("# fvec v1 n=1 d=2 c=2\n0,1,nan\n", NonFiniteError, "line 2"),
        ("# fvec v1 n=2 d=1 c=2\n0,1\n2,1\n", LabelError, "line 3"),
        ("# fvec v1 n=3 d=1 c=2\n0,1\n1,1\n", RowLengthError, "end of file"),
    ],
)
def test_csv_errors_name_location(tmp_path, text, error, where):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(error, match=where):
        load_features(p)


def test_binary_errors_name_offset(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"FVEC0" + bytes(12))
    with pytest.raises(HeaderError, match="offset 0"):
        load_features(p)
    good = FeatureDataset(np.ones((2, 2)), [0, 1], ("a", "b"))
    save_features(good, p)
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(RowLengthError, match="offset 29"):
        load_features(p)
    blob = bytearray(p.read_bytes() + bytes(3))
    struct.pack_into("<I", blob, 29, 5)
    p.write_bytes(bytes(blob))
    with pytest.raises(LabelError, match="offset 29"):
        load_features(p)
    struct.pack_into("<If", blob, 29, 1, float("inf"))
    p.write_bytes(bytes(blob))
    with pytest.raises(NonFiniteError, match="offset 29"):
        load_features(p)


def test_dataset_invariants():
    with pytest.raises(ValueError):
        FeatureDataset(np.array([[np.inf]]), [0])
    with pytest.raises(ValueError):
        FeatureDataset(np.zeros((2, 1)), [0, 2], ("a", "b"))
    with pytest.raises(ValueError):
        FeatureDataset(np.zeros((0, 3)), np.zeros(0))


# ---------------------------------------------------------------------------
# stratified_kfold


@pytest.mark.parametrize("counts, expected", [((1065, 12544), (213, 2509)), ((175, 1579), (35, 316))])
def test_fold_sizes_match_table(counts, expected):
    ds = _labels_dataset(counts)
    plan = stratified_kfold(ds, 5, seed=1)
    for f in range(5):
        test = ds.labels[plan.test_index(f)]
        for c, n in enumerate(expected):
            assert abs(int(np.sum(test == c)) - n) <= 1
    # remainder samples land in the lowest-numbered folds
    per_fold = [int(np.sum(ds.labels[plan.test_index(f)] == 1)) for f in range(5)]
    assert per_fold == sorted(per_fold, reverse=True)


def test_single_class_exact_division():
    plan = stratified_kfold(_labels_dataset((10,)), 5, 0)
    assert [plan.test_index(f).size for f in range(5)] == [2] * 5


def test_partition_and_determinism():
    ds = _labels_dataset((23, 41, 9))
    plan = stratified_kfold(ds, 4, 99)
    tests = [plan.test_index(f) for f in range(4)]
    assert np.array_equal(np.sort(np.concatenate(tests)), np.arange(ds.n))
    for f in range(4):
        assert np.intersect1d(plan.train_index(f), plan.test_index(f)).size == 0
    # function of labels, k and seed only
    other = ds.with_samples(ds.samples * 7 + 3)
    assert np.array_equal(stratified_kfold(other, 4, 99).assignments, plan.assignments)
    assert not np.array_equal(stratified_kfold(ds, 4, 100).assignments, plan.assignments)
    assert plan.fold_seed(2) == 101


def test_stratification_errors():
    with pytest.raises(StratificationError):
        stratified_kfold(_labels_dataset((3, 10)), 5, 0)
    with pytest.raises(StratificationError):
        stratified_kfold(_labels_dataset((10, 10)), 1, 0)


# ---------------------------------------------------------------------------
# balance_oversample


@pytest.mark.parametrize("counts, total", [((10035, 852), 20070), ((1263, 140), 2526)])
def test_balance_paper_totals(counts, total):
    out = balance_oversample(_labels_dataset(counts), int(max(counts)), 0.01, seed=0)
    assert out.n == total
    assert out.class_counts().tolist() == [max(counts)] * 2


def test_balanced_input_unchanged():
    ds = _labels_dataset((5, 5))
    out = balance_oversample(ds, 5, jitter_sigma=3.0, seed=1)
    np.testing.assert_array_equal(out.samples, ds.samples)


def test_originals_kept_and_copies_exact_without_jitter():
    ds = _labels_dataset((12, 4), d=3)
    out = balance_oversample(ds, 15, jitter_sigma=0.0, seed=2)
    assert out.class_counts().tolist() == [15, 15]
    np.testing.assert_array_equal(out.samples[:ds.n], ds.samples)
    rows = {tuple(r) for r in ds.samples}
    assert all(tuple(r) in rows for r in out.samples)
    for r, c in zip(out.samples[ds.n:], out.labels[ds.n:]):
        src = [i for i in range(ds.n) if np.array_equal(ds.samples[i], r)]
        assert ds.labels[src[0]] == c


def test_jitter_scale():
    ds = _labels_dataset((2000, 1), d=2)
    ds = ds.with_samples(ds.samples * np.array([1.0, 10.0]))
    out = balance_oversample(ds, 2000, jitter_sigma=0.1, seed=0)
    noise = out.samples[ds.n:] - ds.samples[-1]
    np.testing.assert_allclose(noise.std(axis=0), 0.1 * ds.samples.std(axis=0), rtol=0.1)
    assert abs(noise.mean(axis=0)[1]) < 0.1


def test_balance_target_below_majority():
    with pytest.raises(ValueError):
        balance_oversample(_labels_dataset((10, 3)), 9)
