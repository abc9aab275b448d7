"""Datasets: CSV / libsvm loading, preprocessing, synthetic problems."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, InvalidInputError
from .seeding import derive_rng

log = logging.getLogger(__name__)

TASKS = ("regression", "classification_onehot")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense features ``X`` (n x p) and targets ``Y`` (n x c).

    For ``task="classification_onehot"`` the rows of ``Y`` are one-hot and
    ``classes`` lists the original label of each column.
    """

    X: np.ndarray
    Y: np.ndarray
    task: str = "regression"
    feature_names: tuple = ()
    target_names: tuple = ()
    classes: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        Y = np.asarray(self.Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or Y.ndim != 2:
            raise InvalidInputError(f"X and Y must be 2-D, got {X.shape} and {Y.shape}")
        if X.shape[0] != Y.shape[0]:
            raise InvalidInputError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DataError("dataset contains NaN or infinite values")
        if self.task not in TASKS:
            raise InvalidInputError(f"unknown task {self.task!r}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "target_names", tuple(self.target_names))
        object.__setattr__(self, "classes", tuple(self.classes))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def y(self) -> np.ndarray:
        """Targets as a vector when there is a single target column."""
        return self.Y[:, 0] if self.Y.shape[1] == 1 else self.Y

    def take(self, idx) -> "Dataset":
        return replace(self, X=self.X[idx], Y=self.Y[idx])


def _parse_float(text, path, line):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"cannot parse {text!r} as a number", path, line) from None
    if not np.isfinite(value):
        raise DataError(f"non-finite value {text!r}", path, line)
    return value


def _resolve_columns(spec, header, ncols, path):
    cols = []
    for c in spec:
        if isinstance(c, str) and not c.lstrip("-").isdigit():
            if header is None or c not in header:
                raise DataError(f"unknown target column {c!r}", path)
            cols.append(header.index(c))
            continue
        i = int(c)
        if not -ncols <= i < ncols:
            raise DataError(f"target column {i} out of range for {ncols} columns", path)
        cols.append(i % ncols)
    if len(set(cols)) != len(cols):
        raise DataError("duplicate target columns", path)
    return cols


def load_csv(path, target_columns=(-1,), has_header: bool = False, delimiter: str = ",",
             task: str = "regression") -> Dataset:
    """Load a numeric delimited file.

    ``target_columns`` holds indices (negative counts from the end) or header
    names.  With ``task="classification_onehot"`` the single target column is
    treated as class labels and one-hot encoded (classes sorted).
    """
    if isinstance(target_columns, (int, str)):
        target_columns = (target_columns,)
    rows, header = [], None
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for line_no, rec in enumerate(reader, start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            if has_header and header is None:
                header = [f.strip() for f in rec]
                continue
            rows.append((line_no, rec))
    if not rows:
        raise DataError("no data rows", path)
    ncols = len(rows[0][1])
    data = np.empty((len(rows), ncols))
    for r, (line_no, rec) in enumerate(rows):
        if len(rec) != ncols:
            raise DataError(f"expected {ncols} fields, found {len(rec)}", path, line_no)
        data[r] = [_parse_float(f.strip(), path, line_no) for f in rec]
    if header is not None and len(header) != ncols:
        raise DataError(f"header has {len(header)} fields, data has {ncols}", path, 1)
    tcols = _resolve_columns(target_columns, header, ncols, path)
    fcols = [c for c in range(ncols) if c not in tcols]
    names = header or [f"x{c}" for c in range(ncols)]
    ds = Dataset(data[:, fcols], data[:, tcols],
                 feature_names=[names[c] for c in fcols],
                 target_names=[names[c] for c in tcols],
                 metadata={"source": str(path)})
    if task == "classification_onehot":
        ds = to_classification(ds)
    elif task != "regression":
        raise InvalidInputError(f"unknown task {task!r}")
    return ds


def write_csv(ds: Dataset, path, header: bool = True, delimiter: str = ",", labels: bool = True):
    """Write features followed by targets; floats use shortest round-trip repr.

    Classification datasets are written with a single label column when
    ``labels`` is true, so :func:`load_csv` with the same task reproduces them.
    """
    if ds.task == "classification_onehot" and labels:
        idx = np.argmax(ds.Y, axis=1)
        T = np.asarray(ds.classes, dtype=np.float64)[idx][:, None]
        tnames = list(ds.target_names[:1]) or ["label"]
    else:
        T = ds.Y
        tnames = list(ds.target_names) or [f"y{j}" for j in range(T.shape[1])]
    fnames = list(ds.feature_names) or [f"x{j}" for j in range(ds.p)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if header:
            w.writerow(fnames + tnames)
        for xr, tr in zip(ds.X.tolist(), T.tolist()):
            w.writerow([repr(v) for v in xr] + [repr(v) for v in tr])


def load_libsvm(path, n_features: int | None = None, zero_based: bool = False,
                task: str = "regression") -> Dataset:
    """Load ``label idx:value ...`` lines; indices are 1-based unless ``zero_based``."""
    labels, entries = [], []
    max_idx = -1
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            labels.append(_parse_float(parts[0], path, line_no))
            row = {}
            for tok in parts[1:]:
                key, sep, val = tok.partition(":")
                if not sep:
                    raise DataError(f"malformed feature {tok!r}", path, line_no)
                if key == "qid":
                    continue
                try:
                    j = int(key) - (0 if zero_based else 1)
                except ValueError:
                    raise DataError(f"bad feature index {key!r}", path, line_no) from None
                if j < 0:
                    raise DataError(f"feature index {key} out of range", path, line_no)
                row[j] = _parse_float(val, path, line_no)
                max_idx = max(max_idx, j)
            entries.append(row)
    if not labels:
        raise DataError("no data rows", path)
    p = max_idx + 1 if n_features is None else int(n_features)
    if max_idx >= p:
        raise DataError(f"feature index {max_idx} exceeds n_features={p}", path)
    X = np.zeros((len(labels), p))
    for i, row in enumerate(entries):
        for j, v in row.items():
            X[i, j] = v
    ds = Dataset(X, np.asarray(labels), metadata={"source": str(path)})
    return to_classification(ds) if task == "classification_onehot" else ds


def one_hot(labels, c: int) -> np.ndarray:
    """Integer labels in ``[0, c)`` to one-hot rows (a vector for a scalar label)."""
    lab = np.asarray(labels)
    if c < 1:
        raise InvalidInputError(f"need c >= 1, got {c}")
    if not np.all(np.equal(np.mod(lab, 1), 0)) or np.any(lab < 0) or np.any(lab >= c):
        raise InvalidInputError(f"labels must be integers in [0, {c})")
    return np.eye(c)[lab.astype(np.int64)]


def encode_labels(labels, classes=None):
    """Map arbitrary label values to indices into sorted ``classes``."""
    lab = np.asarray(labels, dtype=np.float64).reshape(-1)
    if classes is None:
        classes = np.unique(lab)
    classes = np.asarray(classes, dtype=np.float64)
    idx = np.searchsorted(classes, lab)
    idx = np.minimum(idx, len(classes) - 1)
    if np.any(classes[idx] != lab):
        raise DataError("labels contain values not among the known classes")
    return idx, tuple(classes.tolist())


def to_classification(ds: Dataset, classes=None) -> Dataset:
    """One-hot encode the single target column of ``ds``."""
    if ds.task == "classification_onehot":
        return ds
    if ds.Y.shape[1] != 1:
        raise InvalidInputError("classification needs exactly one label column")
    idx, classes = encode_labels(ds.Y[:, 0], classes)
    return replace(ds, Y=one_hot(idx, len(classes)), task="classification_onehot",
                   classes=classes)


def zscore_params(X):
    """Per-feature population mean and std, and the mask of non-constant features."""
    X = np.asarray(X, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    keep = std > 0
    return mean, std, keep


def zscore(ds: Dataset) -> Dataset:
    """Standardize each feature to mean 0, population std 1.

    Constant features cannot be standardized and are dropped with a warning.
    """
    mean, std, keep = zscore_params(ds.X)
    if not np.all(keep):
        dropped = [ds.feature_names[j] if ds.feature_names else str(j)
                   for j in np.flatnonzero(~keep)]
        log.warning("zscore: dropping constant features %s", ", ".join(dropped))
    X = (ds.X[:, keep] - mean[keep]) / std[keep]
    names = tuple(np.asarray(ds.feature_names, dtype=object)[keep]) if ds.feature_names else ()
    return replace(ds, X=X, feature_names=names)


def rescale_unit(ds: Dataset) -> Dataset:
    """Affinely map each feature onto [0, 1]; constant features become 0."""
    lo = ds.X.min(axis=0)
    span = ds.X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    X = np.where(span > 0, (ds.X - lo) / safe, 0.0)
    return replace(ds, X=X)


def subsample(ds: Dataset, M: int, seed=0) -> Dataset:
    """``M`` distinct rows (original order kept), reproducible per seed."""
    if not 1 <= M <= ds.n:
        raise InvalidInputError(f"subsample size M={M} must be in [1, n={ds.n}]")
    idx = np.sort(derive_rng(seed, "subsample").choice(ds.n, size=M, replace=False))
    return ds.take(idx)


def synth_spectrum(n: int, d: int, eigenvalues, noise_std: float = 0.0, seed=0):
    """Regression problem whose covariance ``X^T X / n`` has a given spectrum.

    ``X = U diag(sqrt(n * lambda)) V^T`` with random orthonormal ``U`` (n x d)
    and ``V`` (d x d), so the spectrum is exact up to round-off.  Returns the
    dataset and the true weights ``alpha_star`` (``y = X alpha_star + noise``).
    """
    lam = np.asarray(eigenvalues, dtype=np.float64).reshape(-1)
    if lam.shape[0] != d:
        raise InvalidInputError(f"need {d} eigenvalues, got {lam.shape[0]}")
    if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise InvalidInputError("eigenvalues must be positive and finite")
    if n < d:
        raise InvalidInputError(f"need n >= d, got n={n}, d={d}")
    if noise_std < 0:
        raise InvalidInputError("noise_std must be >= 0")
    rng = derive_rng(seed, "synthetic")
    U, _ = np.linalg.qr(rng.standard_normal((n, d)))
    V, _ = np.linalg.qr(rng.standard_normal((d, d)))
    X = (U * np.sqrt(n * lam)) @ V.T
    alpha = rng.standard_normal(d)
    y = X @ alpha
    if noise_std > 0:
        y = y + noise_std * rng.standard_normal(n)
    ds = Dataset(X, y, metadata={"generator": "synth_spectrum", "seed": seed})
    return ds, alpha
