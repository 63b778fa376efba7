import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedvqc.data import (CsvSchema, Dataset, IngestionReport, base_fractions, generate_dna, load_breast_cancer,
                         load_csv, load_iris, select_and_scale, split_and_partition, stratified_test_counts,
                         top_variance_columns, write_dna_csv)
from fedvqc.errors import ConfigurationError, DatasetError, IngestionError


def test_iris_shape():
    ds = load_iris()
    assert ds.features.shape == (150, 4)
    assert ds.num_classes == 3 and ds.class_counts().tolist() == [50, 50, 50]


def test_breast_cancer_shape():
    report = IngestionReport()
    ds = load_breast_cancer(report)
    assert report.rows_read == 286
    assert len(ds) == 286 - report.rows_dropped == 277
    assert ds.features.shape[1] == 9 and ds.num_classes == 2
    assert ds.class_counts().tolist() == [196, 81]
    assert np.all(np.isfinite(ds.features))


def test_malformed_csv_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,class\n1,oops,x\n2,3,y\n")
    with pytest.raises(IngestionError) as exc:
        load_csv(p)
    assert exc.value.line == 2 and "2" in str(exc.value)
    p.write_text("a,b,class\n1,2,x\n1,2\n")
    with pytest.raises(IngestionError) as exc:
        load_csv(p)
    assert exc.value.line == 3


def test_csv_missing_rows_and_nominal_coding(tmp_path):
    p = tmp_path / "ok.csv"
    p.write_text("size,color,class\n1,red,b\n?,blue,a\n3,blue,a\n4,green,b\n")
    report = IngestionReport()
    ds = load_csv(p, CsvSchema("class", nominal_columns=("color",)), report=report)
    assert report.rows_dropped == 1 and report.dropped_lines == [3]
    assert ds.features[:, 1].tolist() == [2, 0, 1]  # blue < green < red
    assert ds.labels.tolist() == [1, 0, 1] and ds.class_names == ("a", "b")


def test_csv_errors(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(DatasetError):
        load_csv(p)
    p.write_text("a,b\n1,2\n")
    with pytest.raises(IngestionError):
        load_csv(p)
    p.write_text("a,class\n?,x\n")
    with pytest.raises(DatasetError):
        load_csv(p)


def test_dna_determinism_and_balance(tmp_path):
    a, b = generate_dna(200, seed=42), generate_dna(200, seed=42)
    assert np.array_equal(a.features, b.features) and a.sequences == b.sequences
    assert a.class_counts().tolist() == [100, 100]
    assert all(len(s) == 57 and set(s) <= set("ACGT") for s in a.sequences)
    assert not np.array_equal(a.features, generate_dna(200, seed=43).features)
    write_dna_csv(a, tmp_path / "x.csv")
    write_dna_csv(b, tmp_path / "y.csv")
    assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()


def test_dna_background_hook():
    ds = generate_dna(20, seed=1, mutation_prob=0.0, background="G", features="global")
    for seq, y in zip(ds.sequences, ds.labels):
        if y == 1:
            assert seq == "G" * 30 + "TATAAT" + "G" * 21
        else:
            assert seq == "G" * 57
    promoter = ds.features[ds.labels == 1][0]
    np.testing.assert_allclose(promoter, [3 / 57, 0, 51 / 57, 3 / 57])


def test_dna_motif_window_features():
    ds = generate_dna(10, seed=2, mutation_prob=0.0)
    for x, seq, y in zip(ds.features, ds.sequences, ds.labels):
        np.testing.assert_allclose(x, base_fractions(seq, 30, 36))
        if y == 1:
            np.testing.assert_allclose(x, [0.5, 0, 0, 0.5])


def test_dna_rejects_odd_counts():
    with pytest.raises(ValueError):
        generate_dna(201)
    with pytest.raises(ValueError):
        generate_dna(10, features="kmer")


def test_top_variance_columns_ties_and_order():
    X = np.array([[0, 5, 0, 1], [2, 5, 2, 3], [4, 5, 4, 1.0]])
    assert top_variance_columns(X, 2) == (0, 2)
    assert top_variance_columns(X, 3) == (0, 2, 3)


def test_select_and_scale_example():
    ds = Dataset(np.array([[1.0, 10.0], [3.0, 10.0], [2.0, 10.0]]), np.array([0, 1, 0]), "toy", 2)
    out, scaling = select_and_scale(ds, 1)
    np.testing.assert_allclose(out.features[:, 0], [0, np.pi, np.pi / 2])
    with pytest.warns(UserWarning, match="constant"):
        out, _ = select_and_scale(ds, 2)
    np.testing.assert_allclose(out.features[:, 1], np.pi / 2)


def test_select_and_scale_against_independent_oracle(rng):
    X = rng.normal(size=(40, 7)) * rng.uniform(0.1, 5, 7)
    ds = Dataset(X, rng.integers(0, 2, 40), "r", 2)
    out, scaling = select_and_scale(ds, 4)
    var = [sum((v - sum(col) / len(col)) ** 2 for v in col) / len(col) for col in X.T.tolist()]
    cols = sorted(sorted(range(7), key=lambda j: -var[j])[:4])
    assert list(scaling.columns) == cols
    for k, j in enumerate(cols):
        lo, hi = min(X[:, j]), max(X[:, j])
        np.testing.assert_allclose(out.features[:, k], [(v - lo) / (hi - lo) * np.pi for v in X[:, j]], atol=1e-12)


def test_select_and_scale_uses_training_rows_only():
    X = np.array([[0.0], [1.0], [5.0]])
    out, _ = select_and_scale(Dataset(X, np.array([0, 1, 0]), "t", 2), 1, train_idx=[0, 1])
    np.testing.assert_allclose(out.features[:, 0], [0, np.pi, np.pi])


def test_select_and_scale_bounds():
    ds = load_iris()
    with pytest.raises(ConfigurationError):
        select_and_scale(ds, 5)
    with pytest.raises(ConfigurationError):
        select_and_scale(ds, 0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 4))
def test_scaled_features_in_range(seed, k):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(20, 6)) * 100
    out, _ = select_and_scale(Dataset(X, rng.integers(0, 2, 20), "r", 2), k, train_idx=np.arange(10))
    assert out.features.shape == (20, k)
    assert out.features.min() >= 0 and out.features.max() <= np.pi


def test_stratified_counts():
    assert stratified_test_counts([50, 50, 50], 0.2).tolist() == [10, 10, 10]
    assert stratified_test_counts([196, 81], 0.2).tolist() == [39, 16]
    assert sum(stratified_test_counts([7, 5, 3], 0.3)) == 5  # round(4.5) rounds half up


def test_iris_split_sizes():
    split = split_and_partition(load_iris(), 0.2, 5, seed=0)
    assert split.test_idx.size == 30
    assert [s.size for s in split.client_shards] == [24] * 5
    all_train = np.concatenate(split.client_shards)
    assert np.array_equal(np.sort(all_train), split.train_idx)
    assert not set(all_train) & set(split.test_idx)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.integers(1, 7), frac=st.floats(0.1, 0.5))
def test_split_properties(seed, K, frac):
    ds = load_iris()
    split = split_and_partition(ds, frac, K, seed)
    sizes = [s.size for s in split.client_shards]
    assert max(sizes) - min(sizes) <= 1
    assert split.train_idx.size + split.test_idx.size == 150
    assert np.bincount(ds.labels[split.test_idx], minlength=3).min() >= 1
    again = split_and_partition(ds, frac, K, seed)
    assert all(np.array_equal(a, b) for a, b in zip(split.client_shards, again.client_shards))


def test_split_errors():
    ds = load_iris()
    with pytest.raises(ConfigurationError):
        split_and_partition(ds, 0.2, 0)
    with pytest.raises(ConfigurationError):
        split_and_partition(ds, 1.0, 2)
    with pytest.raises(ConfigurationError):
        split_and_partition(ds, 0.2, 200)
