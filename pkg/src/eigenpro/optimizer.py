"""Training loops.

* :func:`richardson_gd` - full-gradient (optionally preconditioned) iteration
  ``alpha <- alpha - eta * P (H alpha - b)`` with ``H = X^T X / n``.
* :func:`linear_sgd` - mini-batch SGD with square loss on explicit features,
  optionally preconditioned; the plain baseline when ``P`` is None.
* :func:`kernel_sgd` - mini-batch SGD on kernel coefficients with the
  split update ``alpha_m -= eta g``, ``alpha += eta D K_m^T g``.
* :func:`eigenpro_linear_sgd` / :func:`eigenpro_kernel_sgd` - build the
  eigensystem, preconditioner and step size from a :class:`TrainConfig`,
  then run the matching loop.

Gradients use the ``1/n`` and ``1/m`` normalizations (no factor 2).  Every
epoch is a seeded shuffle followed by ``ceil(n / m)`` sequential mini-batches.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .eigensolver import EigenSystem, exact_eigensystem, kernel_eigensystem, nsvd, rsvd
from .errors import DivergenceError, InvalidInputError
from .features import RbfMap, RffMap
from .kernels import KernelSpec, kernel_matrix
from .preconditioner import (
    DEFAULT_TAU_FEATURES,
    DEFAULT_TAU_PRIMAL,
    KernelPreconditioner,
    LinearPreconditioner,
)
from .seeding import derive_rng
from .stepsize import DEFAULT_DELTA, auto_step_size

log = logging.getLogger(__name__)

MODES = ("primal_kernel", "rff", "rbf", "linear")
SOLVERS = ("rsvd", "nsvd", "exact")
DIVERGENCE_FACTOR = 1e3
CACHE_BYTES = 256 * 2**20
BLOCK_ROWS = 2048

REPORT_COLUMNS = ("epoch", "train_loss", "eval_loss", "metric", "alpha_norm", "seconds")


# ---------------------------------------------------------------- models

@dataclass(frozen=True, eq=False)
class LinearModel:
    """Weights on raw inputs (``feature_map`` None) or on mapped features."""

    alpha: np.ndarray
    feature_map: RffMap | RbfMap | None = None

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        if a.ndim not in (1, 2):
            raise InvalidInputError(f"alpha must be a vector or matrix, got shape {a.shape}")
        if self.feature_map is not None and a.shape[0] != self.feature_map.d:
            raise InvalidInputError(
                f"alpha has {a.shape[0]} rows but the feature map produces {self.feature_map.d}"
            )
        object.__setattr__(self, "alpha", a)

    @property
    def input_dim(self) -> int:
        return self.alpha.shape[0] if self.feature_map is None else self.feature_map.p

    def features(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise InvalidInputError(f"expected inputs with {self.input_dim} columns, got {X.shape}")
        return X if self.feature_map is None else self.feature_map.apply(X)


@dataclass(frozen=True, eq=False)
class KernelModel:
    """``f(x) = sum_i alpha_i k(x_i, x)`` over the training points."""

    alpha: np.ndarray
    training_points: np.ndarray
    spec: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        X = np.asarray(self.training_points, dtype=np.float64)
        if X.ndim != 2 or a.ndim not in (1, 2) or a.shape[0] != X.shape[0]:
            raise InvalidInputError(
                f"alpha {a.shape} must have one row per training point {X.shape}"
            )
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "training_points", X)


def predict(model, X_eval) -> np.ndarray:
    X_eval = np.asarray(X_eval, dtype=np.float64)
    single = X_eval.ndim == 1
    if single:
        X_eval = X_eval[None, :]
    if isinstance(model, KernelModel):
        Xt = model.training_points
        if X_eval.ndim != 2 or X_eval.shape[1] != Xt.shape[1]:
            raise InvalidInputError(f"expected inputs with {Xt.shape[1]} columns, got {X_eval.shape}")
        out = _kernel_times(model.spec, X_eval, Xt, model.alpha)
    elif isinstance(model, LinearModel):
        out = model.features(X_eval) @ model.alpha
    else:
        raise InvalidInputError(f"cannot predict with {type(model).__name__}")
    return out[0] if single else out


def _pair(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise InvalidInputError(f"shape mismatch: predictions {pred.shape}, targets {target.shape}")
    if pred.size == 0:
        raise InvalidInputError("empty predictions")
    return pred, target


def c_error(pred_onehot, labels) -> float:
    """Fraction of rows whose argmax differs between predictions and labels."""
    pred, lab = _pair(pred_onehot, labels)
    if pred.ndim != 2:
        raise InvalidInputError("c_error needs n x c matrices")
    return float(np.mean(np.argmax(pred, axis=1) != np.argmax(lab, axis=1)))


def mse(pred, targets) -> float:
    pred, t = _pair(pred, targets)
    return float(np.mean((pred - t) ** 2))


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    eval_loss: float | None
    metric: float | None
    alpha_norm: float
    seconds: float


@dataclass
class TrainReport:
    records: list = field(default_factory=list)
    hyperparameters: dict = field(default_factory=dict)
    initial_loss: float = float("nan")

    def __len__(self):
        return len(self.records)

    @property
    def train_losses(self) -> np.ndarray:
        return np.array([r.train_loss for r in self.records])

    @property
    def final_loss(self) -> float:
        return self.records[-1].train_loss if self.records else self.initial_loss

    def epochs_to_target(self, target: float):
        """First epoch whose train loss is <= target (0 if the start already is), else None."""
        if self.initial_loss <= target:
            return 0
        for r in self.records:
            if r.train_loss <= target:
                return r.epoch
        return None

    def seconds_to(self, epoch) -> float:
        return float(sum(r.seconds for r in self.records[:epoch]))

    def to_csv(self, path=None, timing: bool = False) -> str:
        """One row per epoch.  ``seconds`` is left blank unless ``timing``, so
        that reruns with the same seed produce byte-identical files."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.records:
            w.writerow([
                r.epoch,
                repr(r.train_loss),
                "" if r.eval_loss is None else repr(r.eval_loss),
                "" if r.metric is None else repr(r.metric),
                repr(r.alpha_norm),
                f"{r.seconds:.6f}" if timing else "",
            ])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


class _Monitor:
    """Per-epoch bookkeeping shared by all loops."""

    def __init__(self, loss0, eta, hyper, eval_fn=None, target_loss=None):
        self.report = TrainReport(hyperparameters=hyper, initial_loss=float(loss0))
        self.base = max(float(loss0), np.finfo(float).tiny)
        self.eta = eta
        self.eval_fn = eval_fn
        self.target = target_loss
        self.t0 = time.perf_counter()

    def record(self, epoch, loss, alpha) -> bool:
        """Append a record; returns True when the loss target is met."""
        loss = float(loss)
        if not np.isfinite(loss) or loss > DIVERGENCE_FACTOR * self.base:
            raise DivergenceError(self.eta, epoch, loss, self.report.initial_loss)
        ev, metric = (None, None) if self.eval_fn is None else self.eval_fn(alpha)
        now = time.perf_counter()
        self.report.records.append(
            EpochRecord(epoch, loss, ev, metric, float(np.linalg.norm(alpha)), now - self.t0)
        )
        self.t0 = now
        return self.target is not None and loss <= self.target


def _as_targets(y, n):
    y = np.asarray(y, dtype=np.float64)
    if y.ndim not in (1, 2) or y.shape[0] != n:
        raise InvalidInputError(f"targets {y.shape} do not match {n} rows")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("targets contain NaN or infinite values")
    return y


def _as_data(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InvalidInputError(f"X must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("X contains NaN or infinite values")
    return X


def _sqloss(R, n) -> float:
    return float(np.sum(R * R) / n)


def _eval_metric(pred, Y, task):
    if task == "classification_onehot":
        return c_error(pred, Y)
    return mse(pred, Y)


def _check_eta(eta):
    eta = float(eta)
    if not np.isfinite(eta) or eta <= 0:
        raise InvalidInputError(f"step size must be finite and > 0, got {eta}")
    return eta


# ---------------------------------------------------------------- full gradient

def richardson_gd(X, y, eta: float, steps: int, P: LinearPreconditioner | None = None,
                  *, lambda_max: float | None = None):
    """Full-gradient iteration from ``alpha = 0``; one report record per step.

    Convergence needs ``eta < 2 / lambda_1(P H)``.  That is checked against
    ``lambda_max`` when given, computed exactly when ``d <= 1000`` and only
    logged as unchecked otherwise.
    """
    X = _as_data(X)
    n, d = X.shape
    y = _as_targets(y, n)
    eta = _check_eta(eta)
    if steps < 0:
        raise InvalidInputError(f"steps must be >= 0, got {steps}")
    if P is not None and P.dim != d:
        raise InvalidInputError(f"preconditioner dimension {P.dim} != {d}")
    H = X.T @ X / n
    b = X.T @ y / n
    if lambda_max is None and d <= 1000:
        S = H if P is None else P.apply_sqrt(P.apply_sqrt(H).T).T
        lambda_max = float(np.linalg.eigvalsh(0.5 * (S + S.T))[-1])
    if lambda_max is None:
        log.warning("richardson_gd: eta=%g not checked against 2/lambda_1", eta)
    elif lambda_max > 0 and eta >= 2.0 / lambda_max:
        raise InvalidInputError(
            f"eta={eta:.6g} >= 2/lambda_1={2.0 / lambda_max:.6g}; the iteration cannot converge"
        )
    alpha = np.zeros((d,) + y.shape[1:])
    mon = _Monitor(_sqloss(y, n), eta, {"method": "richardson_gd", "eta": eta, "steps": steps})
    for t in range(1, steps + 1):
        g = H @ alpha - b
        if P is not None and P.k:
            g = P.apply(g)
        alpha = alpha - eta * g
        mon.record(t, _sqloss(X @ alpha - y, n), alpha)
    return LinearModel(alpha), mon.report


# ---------------------------------------------------------------- linear SGD

def _feature_source(X, feature_map, cache):
    """Return ``rows(idx) -> features`` and the full feature matrix if cached."""
    if feature_map is None:
        return (lambda idx: X[idx]), X
    n = X.shape[0]
    if cache == "always" or (cache == "auto" and n * feature_map.d * 8 <= CACHE_BYTES):
        F = feature_map.apply(X)
        return (lambda idx: F[idx]), F
    if cache not in ("auto", "never"):
        raise InvalidInputError(f"cache must be auto, always or never, got {cache!r}")
    return (lambda idx: feature_map.apply(X[idx])), None


def _blocked_residual_loss(rows, alpha, Y, n):
    total = 0.0
    for s in range(0, n, BLOCK_ROWS):
        idx = np.arange(s, min(s + BLOCK_ROWS, n))
        R = rows(idx) @ alpha - Y[idx]
        total += float(np.sum(R * R))
    return total / n


def _epoch_batches(rng, n, m):
    perm = rng.permutation(n)
    return [perm[s:s + m] for s in range(0, n, m)]


def linear_sgd(X, y, eta: float, m: int, epochs: int, P: LinearPreconditioner | None = None,
               seed=0, *, feature_map=None, eval_set=None, task: str = "regression",
               target_loss: float | None = None, cache: str = "auto", hyperparameters=None):
    """Mini-batch SGD on the square loss over (optionally mapped) features.

    Per step: ``g = (F_m^T (F_m alpha) - F_m^T y_m) / m`` and
    ``alpha <- alpha - eta * P g``.  With ``P`` None (or rank 0) this is the
    plain baseline, and the two produce bit-identical trajectories.
    """
    X = _as_data(X)
    n = X.shape[0]
    y = _as_targets(y, n)
    eta = _check_eta(eta)
    if not 1 <= m <= n:
        raise InvalidInputError(f"mini-batch size m={m} must be in [1, n={n}]")
    if epochs < 0:
        raise InvalidInputError(f"epochs must be >= 0, got {epochs}")
    d = X.shape[1] if feature_map is None else feature_map.d
    if feature_map is not None and feature_map.p != X.shape[1]:
        raise InvalidInputError(f"feature map expects {feature_map.p} inputs, X has {X.shape[1]}")
    if P is not None and P.dim != d:
        raise InvalidInputError(f"preconditioner dimension {P.dim} != feature dimension {d}")
    use_P = P is not None and P.k > 0
    rows, F = _feature_source(X, feature_map, cache)
    alpha = np.zeros((d,) + y.shape[1:])

    eval_fn = None
    if eval_set is not None:
        Xe = _as_data(eval_set[0])
        Ye = _as_targets(eval_set[1], Xe.shape[0])
        Fe = Xe if feature_map is None else feature_map.apply(Xe)

        def eval_fn(a):
            pred = Fe @ a
            return _sqloss(pred - Ye, Xe.shape[0]), _eval_metric(pred, Ye, task)

    hyper = {"method": "linear_sgd", "eta": eta, "m": m, "epochs": epochs,
             "preconditioned": use_P, **(hyperparameters or {})}
    mon = _Monitor(_sqloss(y, n), eta, hyper, eval_fn, target_loss)
    rng = derive_rng(seed, "batches")
    for epoch in range(1, epochs + 1):
        for idx in _epoch_batches(rng, n, m):
            Fm = rows(idx)
            g = Fm.T @ (Fm @ alpha - y[idx]) / idx.shape[0]
            if use_P:
                g = P.apply(g)
            alpha -= eta * g
        loss = _sqloss(F @ alpha - y, n) if F is not None else _blocked_residual_loss(rows, alpha, y, n)
        if mon.record(epoch, loss, alpha):
            break
    return LinearModel(alpha, feature_map), mon.report


# ---------------------------------------------------------------- kernel SGD

def _kernel_times(spec, A, B, alpha):
    """``K(A, B) @ alpha`` in row blocks of A."""
    out = np.empty((A.shape[0],) + alpha.shape[1:])
    for s in range(0, A.shape[0], BLOCK_ROWS):
        out[s:s + BLOCK_ROWS] = kernel_matrix(spec, A[s:s + BLOCK_ROWS], B) @ alpha
    return out


def kernel_sgd(spec: KernelSpec, X, y, eta: float, m: int, epochs: int,
               D: KernelPreconditioner | None = None, seed=0, *, eval_set=None,
               task: str = "regression", target_loss: float | None = None,
               cache: str = "auto", hyperparameters=None):
    """Mini-batch SGD on ``f = sum_i alpha_i k(x_i, .)`` with square loss.

    Per step, with kernel rows ``K_m = K(X_m, X)``: ``g = (K_m alpha - y_m) / m``,
    ``alpha_m <- alpha_m - eta g`` and, when ``D`` is given,
    ``alpha <- alpha + eta D K_m^T g``.  ``D`` None (or rank 0) gives the
    plain kernel SGD baseline.
    """
    X = _as_data(X)
    n = X.shape[0]
    y = _as_targets(y, n)
    eta = _check_eta(eta)
    if not 1 <= m <= n:
        raise InvalidInputError(f"mini-batch size m={m} must be in [1, n={n}]")
    if epochs < 0:
        raise InvalidInputError(f"epochs must be >= 0, got {epochs}")
    if D is not None and D.dim != n:
        raise InvalidInputError(f"preconditioner dimension {D.dim} != n={n}")
    use_D = D is not None and D.k > 0
    if cache not in ("auto", "always", "never"):
        raise InvalidInputError(f"cache must be auto, always or never, got {cache!r}")
    K = None
    if cache == "always" or (cache == "auto" and n * n * 8 <= CACHE_BYTES):
        K = kernel_matrix(spec, X)
    if use_D:
        E, dw = D.eigensystem.vectors, D.d_weights
    alpha = np.zeros((n,) + y.shape[1:])

    eval_fn = None
    if eval_set is not None:
        Xe = _as_data(eval_set[0])
        Ye = _as_targets(eval_set[1], Xe.shape[0])
        Ke = kernel_matrix(spec, Xe, X) if Xe.shape[0] * n * 8 <= CACHE_BYTES else None

        def eval_fn(a):
            pred = Ke @ a if Ke is not None else _kernel_times(spec, Xe, X, a)
            return _sqloss(pred - Ye, Xe.shape[0]), _eval_metric(pred, Ye, task)

    hyper = {"method": "kernel_sgd", "eta": eta, "m": m, "epochs": epochs,
             "preconditioned": use_D, **(hyperparameters or {})}
    mon = _Monitor(_sqloss(y, n), eta, hyper, eval_fn, target_loss)
    rng = derive_rng(seed, "batches")
    for epoch in range(1, epochs + 1):
        for idx in _epoch_batches(rng, n, m):
            Km = K[idx] if K is not None else kernel_matrix(spec, X[idx], X)
            g = (Km @ alpha - y[idx]) / idx.shape[0]
            alpha[idx] -= eta * g
            if use_D:
                c = E.T @ (Km.T @ g)
                c *= dw.reshape((-1,) + (1,) * (c.ndim - 1))
                alpha += eta * (E @ c)
        pred = K @ alpha if K is not None else _kernel_times(spec, X, X, alpha)
        if mon.record(epoch, _sqloss(pred - y, n), alpha):
            break
    return KernelModel(alpha, X, spec), mon.report


# ---------------------------------------------------------------- configured runs

@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of a configured training run.

    ``eta`` is ``"auto_bound"``, ``"auto_heuristic"`` or a positive number.
    ``tau`` None picks 0.25 for feature modes and 1.0 for ``primal_kernel``.
    ``M`` and ``m`` larger than the number of training points are clamped.
    """

    mode: str = "primal_kernel"
    kernel: KernelSpec = field(default_factory=KernelSpec)
    k: int = 160
    M: int = 4800
    m: int = 256
    tau: float | None = None
    eta: object = "auto_bound"
    epochs: int = 10
    d: int = 1000
    seed: int = 0
    delta: float = DEFAULT_DELTA
    solver: str = "rsvd"
    target_loss: float | None = None
    cache: str = "auto"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not isinstance(self.kernel, KernelSpec):
            raise InvalidInputError("kernel must be a KernelSpec")
        for name in ("M", "m", "d"):
            if int(getattr(self, name)) < 1:
                raise InvalidInputError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.k < 0 or self.epochs < 0:
            raise InvalidInputError("k and epochs must be >= 0")
        if self.k + 1 > self.M:
            raise InvalidInputError(f"need k+1 <= M, got k={self.k}, M={self.M}")
        if self.tau is not None and not 0 < float(self.tau) <= 1:
            raise InvalidInputError(f"tau must be in (0, 1], got {self.tau}")
        if isinstance(self.eta, str):
            if self.eta not in ("auto_bound", "auto_heuristic"):
                raise InvalidInputError(f"eta must be auto_bound, auto_heuristic or a number, got {self.eta!r}")
        else:
            _check_eta(self.eta)
        if not 0 < self.delta < 1:
            raise InvalidInputError(f"delta must be in (0, 1), got {self.delta}")
        if self.solver not in SOLVERS:
            raise InvalidInputError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        if self.cache not in ("auto", "always", "never"):
            raise InvalidInputError(f"cache must be auto, always or never, got {self.cache!r}")
        if self.mode == "rff" and self.kernel.family != "gaussian":
            raise InvalidInputError("random Fourier features are implemented for the gaussian kernel only")

    @property
    def damping(self) -> float:
        if self.tau is not None:
            return float(self.tau)
        return DEFAULT_TAU_PRIMAL if self.mode == "primal_kernel" else DEFAULT_TAU_FEATURES

    def as_dict(self) -> dict:
        out = asdict(self)
        out["kernel"] = f"{self.kernel.family}:{self.kernel.bandwidth!r}"
        out["tau"] = self.damping
        return out


def _step_size(config, es, m, kappa, *, kernel=False, dim_term=None):
    if not isinstance(config.eta, str):
        return float(config.eta)
    mode = "bound" if config.eta == "auto_bound" else "heuristic"
    return auto_step_size(es, m, kappa, config.delta, mode, dim_term=dim_term, kernel=kernel)


def build_feature_map(X, config: TrainConfig):
    X = np.asarray(X, dtype=np.float64)
    if config.mode == "linear":
        return None
    if config.mode == "rff":
        return RffMap.sample(X.shape[1], config.d, config.kernel.bandwidth, config.seed)
    if config.mode == "rbf":
        return RbfMap.from_data(X, config.d, config.kernel, config.seed)
    raise InvalidInputError(f"mode {config.mode!r} has no feature map")


def linear_setup(X, config: TrainConfig, feature_map=None):
    """Eigensystem, preconditioner and step size for a feature-space run.

    The eigensystem comes from ``M`` rows drawn with the ``"subsample"``
    stream; ``kappa`` is the largest preconditioned squared feature norm over
    those rows.
    """
    X = _as_data(X)
    n = X.shape[0]
    M, m = min(config.M, n), min(config.m, n)
    idx = np.arange(n) if M == n else np.sort(
        derive_rng(config.seed, "subsample").choice(n, size=M, replace=False))
    FM = X[idx] if feature_map is None else feature_map.apply(X[idx])
    d = FM.shape[1]
    if config.k + 1 > min(M, d):
        raise InvalidInputError(f"need k+1 <= min(M, d), got k={config.k}, M={M}, d={d}")
    if config.solver == "exact":
        es = exact_eigensystem(FM.T @ FM / M, config.k, M)
    else:
        solver = rsvd if config.solver == "rsvd" else nsvd
        es = solver(FM, config.k, M, config.seed)
    P = LinearPreconditioner(es, config.damping)
    kappa = float(np.max(P.transformed_sqnorms(FM)))
    eta = _step_size(config, es, m, kappa)
    return es, P, eta, kappa


def eigenpro_linear_sgd(X, y, config: TrainConfig, eval_set=None, task: str = "regression"):
    """EigenPro SGD in a feature space (modes ``linear``, ``rff``, ``rbf``)."""
    if config.mode == "primal_kernel":
        raise InvalidInputError("use eigenpro_kernel_sgd for mode primal_kernel")
    X = _as_data(X)
    fmap = build_feature_map(X, config)
    es, P, eta, kappa = linear_setup(X, config, fmap)
    hyper = {**config.as_dict(), "eta_value": eta, "kappa": kappa,
             "lambda_k1": es.tail, "M_used": min(config.M, X.shape[0]),
             "m_used": min(config.m, X.shape[0])}
    return linear_sgd(X, y, eta, min(config.m, X.shape[0]), config.epochs, P, config.seed,
                      feature_map=fmap, eval_set=eval_set, task=task,
                      target_loss=config.target_loss, cache=config.cache, hyperparameters=hyper)


def kernel_kappa(spec: KernelSpec, X, es: EigenSystem, tau: float) -> float:
    """``max_j k_EP(x_j, x_j) = k(x_j, x_j) - n sum_i (lambda_i - tau lambda_{k+1}) e_i[j]^2``."""
    n = es.dim
    diag = kernel_matrix(spec, X[:1])[0, 0]  # all supported kernels have constant diagonal
    if es.k == 0:
        return float(diag)
    shrink = es.values - tau * es.tail
    kd = diag - n * (es.vectors ** 2) @ shrink
    return float(max(np.max(kd), np.finfo(float).eps * diag))


def kernel_setup(spec: KernelSpec, X, config: TrainConfig):
    """Eigensystem of ``K / n``, the ``D`` factor and the step size."""
    X = _as_data(X)
    n = X.shape[0]
    M, m = min(config.M, n), min(config.m, n)
    if config.k + 1 > M:
        raise InvalidInputError(f"need k+1 <= M={M}, got k={config.k}")
    es = kernel_eigensystem(spec, X, config.k, M, config.seed)
    tau = config.damping
    D = KernelPreconditioner(es, tau)
    kappa = kernel_kappa(spec, X, es, tau)
    if es.tail <= 0:
        raise InvalidInputError("kernel subsample has a zero spectrum beyond k; use a smaller k")
    # intrinsic dimension of the preconditioned operator: trace / norm
    diag = float(kernel_matrix(spec, X[:1])[0, 0])
    trace = diag - float(np.sum(es.values - tau * es.tail))
    dim_term = max(trace / es.tail, 1.0)
    eta = _step_size(config, es, m, kappa, kernel=True, dim_term=dim_term)
    return es, D, eta, kappa


def eigenpro_kernel_sgd(spec: KernelSpec, X, y, config: TrainConfig, eval_set=None,
                        task: str = "regression"):
    """EigenPro SGD on kernel coefficients (mode ``primal_kernel``)."""
    X = _as_data(X)
    es, D, eta, kappa = kernel_setup(spec, X, config)
    hyper = {**config.as_dict(), "eta_value": eta, "kappa": kappa,
             "lambda_k1": es.tail, "M_used": min(config.M, X.shape[0]),
             "m_used": min(config.m, X.shape[0])}
    return kernel_sgd(spec, X, y, eta, min(config.m, X.shape[0]), config.epochs, D, config.seed,
                      eval_set=eval_set, task=task, target_loss=config.target_loss,
                      cache=config.cache, hyperparameters=hyper)


def train(X, y, config: TrainConfig, eval_set=None, task: str = "regression"):
    """Dispatch on ``config.mode``."""
    if config.mode == "primal_kernel":
        return eigenpro_kernel_sgd(config.kernel, X, y, config, eval_set, task)
    return eigenpro_linear_sgd(X, y, config, eval_set, task)


__all__ = [
    "LinearModel", "KernelModel", "EpochRecord", "TrainReport", "TrainConfig",
    "richardson_gd", "linear_sgd", "kernel_sgd", "eigenpro_linear_sgd",
    "eigenpro_kernel_sgd", "train", "predict", "c_error", "mse",
    "linear_setup", "kernel_setup", "kernel_kappa", "build_feature_map",
]
