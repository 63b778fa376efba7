"""Dataset ingestion, synthetic DNA generation, scaling, and client partitioning."""

import csv
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigurationError, DatasetError, IngestionError

MISSING = ("", "?", "NA", "nan")
BASES = "ACGT"
DNA_LENGTH = 57
MOTIF = "TATAAT"
MOTIF_POS = 30


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str
    num_classes: int
    feature_names: tuple = ()
    class_names: tuple = ()
    sequences: tuple = None

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DatasetError(f"{self.name}: features {self.features.shape} vs labels {self.labels.shape}")
        if not np.all(np.isfinite(self.features)):
            raise DatasetError(f"{self.name}: non-finite feature values")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DatasetError(f"{self.name}: labels outside [0, {self.num_classes})")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def num_features(self):
        return self.features.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        seqs = None if self.sequences is None else tuple(self.sequences[i] for i in idx)
        return Dataset(self.features[idx], self.labels[idx], self.name, self.num_classes,
                       self.feature_names, self.class_names, seqs)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.num_classes)

    def check_stratifiable(self):
        counts = self.class_counts()
        if counts.min() < 2:
            raise DatasetError(f"{self.name}: every class needs >= 2 samples, counts {counts.tolist()}")


@dataclass(frozen=True)
class CsvSchema:
    label_column: str = "class"
    nominal_columns: tuple = ()
    ignore_columns: tuple = ()


@dataclass
class IngestionReport:
    rows_read: int = 0
    rows_dropped: int = 0
    dropped_lines: list = field(default_factory=list)


def load_csv(path, schema=None, name=None, report=None):
    """Parse a headered, comma-separated file into a :class:`Dataset`.

    Numeric columns become float64. Columns listed in ``schema.nominal_columns``
    and the label column are integer-coded by sorted category string. Rows with
    a missing value are dropped and recorded in ``report``.
    """
    schema = schema or CsvSchema()
    report = report if report is not None else IngestionReport()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        if schema.label_column not in header:
            raise IngestionError(f"label column {schema.label_column!r} not in header", line=1)
        for col in schema.nominal_columns:
            if col not in header:
                raise IngestionError(f"nominal column {col!r} not in header", line=1)
        feature_cols = [c for c in header if c != schema.label_column and c not in schema.ignore_columns]
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not v.strip() for v in row):
                continue
            report.rows_read += 1
            if len(row) != len(header):
                raise IngestionError(f"expected {len(header)} fields, got {len(row)}", line=line)
            rec = dict(zip(header, (v.strip() for v in row)))
            if any(rec[c] in MISSING for c in feature_cols + [schema.label_column]):
                report.rows_dropped += 1
                report.dropped_lines.append(line)
                continue
            for c in feature_cols:
                if c not in schema.nominal_columns:
                    try:
                        v = float(rec[c])
                    except ValueError:
                        raise IngestionError(f"column {c!r}: {rec[c]!r} is not numeric", line=line) from None
                    if not math.isfinite(v):
                        raise IngestionError(f"column {c!r}: non-finite value", line=line)
            rows.append(rec)
    if not rows:
        raise DatasetError(f"{path}: no usable rows")

    columns = []
    for c in feature_cols:
        if c in schema.nominal_columns:
            cats = sorted({r[c] for r in rows})
            code = {k: i for i, k in enumerate(cats)}
            columns.append([code[r[c]] for r in rows])
        else:
            columns.append([float(r[c]) for r in rows])
    class_names = tuple(sorted({r[schema.label_column] for r in rows}))
    code = {k: i for i, k in enumerate(class_names)}
    labels = np.array([code[r[schema.label_column]] for r in rows], dtype=int)
    features = np.array(columns, dtype=float).T
    return Dataset(features, labels, name or str(path), len(class_names), tuple(feature_cols), class_names)


IRIS_SCHEMA = CsvSchema("class")
BREAST_CANCER_SCHEMA = CsvSchema(
    "class",
    nominal_columns=("age", "menopause", "tumor-size", "inv-nodes", "node-caps",
                     "deg-malig", "breast", "breast-quad", "irradiat"),
)
DNA_SCHEMA = CsvSchema("class", ignore_columns=("sequence",))


def bundled_path(filename):
    return resources.files("fedvqc.datasets").joinpath(filename)


def load_iris():
    with resources.as_file(bundled_path("iris.csv")) as p:
        return load_csv(p, IRIS_SCHEMA, name="iris")


def load_breast_cancer(report=None):
    with resources.as_file(bundled_path("breast_cancer.csv")) as p:
        return load_csv(p, BREAST_CANCER_SCHEMA, name="breast_cancer", report=report)


# -- synthetic DNA ------------------------------------------------------------

DNA_FEATURE_MODES = ("motif_window", "global")


def base_fractions(seq, start=0, stop=None):
    window = seq[start:stop]
    return [window.count(b) / len(window) for b in BASES]


def generate_dna(num_samples=200, seed=42, mutation_prob=0.15, background=None,
                 features="motif_window"):
    """Balanced promoter / non-promoter sequences of length 57.

    Promoters (label 1) carry ``TATAAT`` at position 30 on a uniform random
    background, each motif base replaced by a different uniformly chosen base
    with probability ``mutation_prob``. Non-promoters (label 0) are uniform.
    ``background`` (a single base) replaces the random background, as a test
    hook.

    ``features`` selects the 4 real features (fractions of A, C, G, T):
    ``"motif_window"`` counts over positions 30-35, ``"global"`` over the
    whole sequence.
    """
    if num_samples < 2 or num_samples % 2:
        raise ValueError(f"num_samples must be a positive even number, got {num_samples}")
    if features not in DNA_FEATURE_MODES:
        raise ValueError(f"features must be one of {DNA_FEATURE_MODES}")
    rng = np.random.default_rng(seed)
    labels = np.repeat([1, 0], num_samples // 2)
    labels = labels[rng.permutation(num_samples)]
    letters = np.array(list(BASES))
    seqs = []
    for label in labels:
        if background is None:
            seq = letters[rng.integers(0, 4, DNA_LENGTH)]
        else:
            seq = np.full(DNA_LENGTH, background)
        if label == 1:
            for k, base in enumerate(MOTIF):
                if rng.random() < mutation_prob:
                    others = [b for b in BASES if b != base]
                    base = others[rng.integers(0, 3)]
                seq[MOTIF_POS + k] = base
        seqs.append("".join(seq))
    if features == "motif_window":
        window = (MOTIF_POS, MOTIF_POS + len(MOTIF))
    else:
        window = (0, None)
    X = np.array([base_fractions(s, *window) for s in seqs])
    return Dataset(X, labels.astype(int), "dna", 2, tuple(f"frac_{b}" for b in BASES),
                   ("non-promoter", "promoter"), tuple(seqs))


def write_dna_csv(ds, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.feature_names) + ["sequence", "class"])
        for x, seq, y in zip(ds.features, ds.sequences, ds.labels):
            w.writerow([repr(float(v)) for v in x] + [seq, ds.class_names[y]])


# -- preprocessing ------------------------------------------------------------


@dataclass(frozen=True)
class Scaling:
    columns: tuple
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, features):
        X = np.asarray(features, dtype=float)[:, list(self.columns)]
        span = self.hi - self.lo
        const = span == 0
        out = np.empty_like(X)
        out[:, ~const] = (X[:, ~const] - self.lo[~const]) / span[~const] * np.pi
        out[:, const] = np.pi / 2
        return np.clip(out, 0.0, np.pi)


def top_variance_columns(features, k):
    """Indices of the ``k`` highest-variance columns, ties to the lower index."""
    var = np.var(features, axis=0)
    order = sorted(range(features.shape[1]), key=lambda j: (-var[j], j))
    return tuple(sorted(order[:k]))


def select_and_scale(ds, num_features_to_use, train_idx=None, num_qubits=4):
    """Keep the highest-variance columns and min-max scale them into [0, pi].

    Variances and extrema come from ``train_idx`` rows only (all rows when
    omitted); other rows are clipped into range. Returns ``(dataset, scaling)``.
    """
    if not 1 <= num_features_to_use <= min(ds.num_features, num_qubits):
        raise ConfigurationError(
            f"num_features_to_use must be in [1, {min(ds.num_features, num_qubits)}], got {num_features_to_use}")
    train = ds.features if train_idx is None else ds.features[np.asarray(train_idx, dtype=int)]
    cols = top_variance_columns(train, num_features_to_use)
    lo = train[:, list(cols)].min(axis=0)
    hi = train[:, list(cols)].max(axis=0)
    const = [ds.feature_names[c] if ds.feature_names else c for c, a, b in zip(cols, lo, hi) if a == b]
    if const:
        warnings.warn(f"{ds.name}: constant feature(s) {const} mapped to pi/2", stacklevel=2)
    scaling = Scaling(cols, lo, hi)
    names = tuple(ds.feature_names[c] for c in cols) if ds.feature_names else ()
    scaled = Dataset(scaling.transform(ds.features), ds.labels, ds.name, ds.num_classes,
                     names, ds.class_names, ds.sequences)
    return scaled, scaling


@dataclass(frozen=True)
class DatasetSplit:
    train_idx: np.ndarray
    test_idx: np.ndarray
    client_shards: tuple

    @property
    def num_clients(self):
        return len(self.client_shards)


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def stratified_test_counts(counts, test_fraction):
    """Per-class test counts summing to round(test_fraction * N) (largest remainder)."""
    counts = np.asarray(counts)
    total = _round_half_up(test_fraction * counts.sum())
    exact = counts * total / counts.sum()
    base = np.floor(exact).astype(int)
    remainder = total - base.sum()
    order = sorted(range(len(counts)), key=lambda c: (-(exact[c] - base[c]), c))
    for c in order[:remainder]:
        base[c] += 1
    return np.minimum(base, counts - 1)


def split_and_partition(ds, test_fraction=0.2, num_clients=1, seed=0):
    """Stratified train/test split, then round-robin IID shards over shuffled train indices."""
    if num_clients < 1:
        raise ConfigurationError(f"num_clients must be >= 1, got {num_clients}")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigurationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    ds.check_stratifiable()
    rng = np.random.default_rng(seed)
    per_class = stratified_test_counts(ds.class_counts(), test_fraction)
    test, train = [], []
    for c in range(ds.num_classes):
        idx = np.flatnonzero(ds.labels == c)
        idx = idx[rng.permutation(idx.size)]
        test.extend(idx[:per_class[c]])
        train.extend(idx[per_class[c]:])
    test = np.sort(np.array(test, dtype=int))
    train = np.array(train, dtype=int)
    train = train[rng.permutation(train.size)]
    if train.size < num_clients:
        raise ConfigurationError(f"{train.size} training samples cannot fill {num_clients} client shards")
    shards = tuple(train[k::num_clients] for k in range(num_clients))
    return DatasetSplit(np.sort(train), test, shards)
