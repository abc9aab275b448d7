"""Step sizes from Bernstein-type bounds on mini-batch covariance norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenSystem
from .errors import InvalidInputError
from .preconditioner import LinearPreconditioner
from .seeding import derive_rng

DEFAULT_DELTA = 0.01
HEURISTIC_C = 1.0


@dataclass(frozen=True)
class StepSizeBoundInputs:
    lambda_top: float
    kappa: float
    m: int
    dim_term: float
    delta: float = DEFAULT_DELTA
    kernel: bool = False

    def __post_init__(self):
        for name in ("lambda_top", "kappa", "m", "dim_term"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidInputError(f"{name} must be finite and > 0, got {value}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputError(f"delta must be in (0, 1), got {self.delta}")
        if self.kernel and self.dim_term < 1:
            raise InvalidInputError("intrinsic dimension is at least 1")

    @property
    def log_term(self) -> float:
        factor = 8.0 if self.kernel else 2.0
        return float(np.log(factor * self.dim_term / self.delta))


def bernstein_bound(inputs: StepSizeBoundInputs) -> float:
    """High-probability upper bound on the preconditioned mini-batch norm.

    ``lam + 2 (lam + kappa) / (3 m) * L + sqrt(2 lam kappa / m * L)`` where
    ``L = ln(2 d / delta)`` for matrices and ``ln(8 d_int / delta)`` for
    kernel operators with intrinsic dimension ``d_int``.
    """
    lam, kappa, m = float(inputs.lambda_top), float(inputs.kappa), float(inputs.m)
    L = inputs.log_term
    return lam + 2.0 * (lam + kappa) / (3.0 * m) * L + np.sqrt(2.0 * lam * kappa / m * L)


def effective_rank(values) -> float:
    """``trace / top eigenvalue``, a computable stand-in for intrinsic dimension."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0 or values.max() <= 0:
        raise InvalidInputError("effective rank needs a positive spectrum")
    return float(values.sum() / values.max())


def auto_step_size(es: EigenSystem, m: int, kappa: float, delta: float = DEFAULT_DELTA,
                   mode: str = "bound", *, dim_term: float | None = None,
                   kernel: bool = False, c: float = HEURISTIC_C) -> float:
    """Step size for mini-batch size ``m`` given the eigensystem's tail.

    ``mode="bound"`` returns ``1 / bernstein_bound`` evaluated at
    ``lambda_{k+1}``; ``mode="heuristic"`` returns ``c * sqrt(m / (lambda_{k+1} * kappa))``.
    ``dim_term`` defaults to the ambient dimension ``es.dim``.
    """
    lam = es.tail
    if mode == "bound":
        dim = es.dim if dim_term is None else dim_term
        return 1.0 / bernstein_bound(StepSizeBoundInputs(lam, kappa, m, dim, delta, kernel))
    if mode == "heuristic":
        if lam <= 0 or kappa <= 0 or m <= 0 or c <= 0:
            raise InvalidInputError("heuristic step size needs positive lambda, kappa, m, c")
        return float(c * np.sqrt(m / (lam * kappa)))
    raise InvalidInputError(f"unknown step size mode {mode!r}")


@dataclass(frozen=True)
class NormCheck:
    fraction: float
    bound: float
    norms: np.ndarray

    @property
    def exceedance(self) -> float:
        return 1.0 - self.fraction


def empirical_norm_check(X, P: LinearPreconditioner | None, m: int, trials: int,
                         seed=0, delta: float = DEFAULT_DELTA,
                         kappa: float | None = None) -> NormCheck:
    """Monte-Carlo check of the bound on ``|P H_m|``.

    Each trial draws ``m`` rows without replacement, materializes
    ``P H_m`` (d x d) and takes its largest singular value.  ``lambda_{k+1}``
    comes from ``P``'s eigensystem (``lambda_1`` of the full covariance when
    ``P`` is None) and ``kappa`` defaults to ``max |x|^2``.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if not 1 <= m <= n:
        raise InvalidInputError(f"mini-batch size m={m} must be in [1, n={n}]")
    if trials < 1:
        raise InvalidInputError("need at least one trial")
    if kappa is None:
        kappa = float(np.max(np.einsum("ij,ij->i", X, X)))
    if P is None:
        lam = float(np.linalg.eigvalsh(X.T @ X / n)[-1])
    else:
        lam = P.eigensystem.tail if P.k else float(np.linalg.eigvalsh(X.T @ X / n)[-1])
    bound = bernstein_bound(StepSizeBoundInputs(lam, kappa, m, d, delta))
    rng = derive_rng(seed, "trials")
    norms = np.empty(trials)
    for t in range(trials):
        Xm = X[rng.choice(n, size=m, replace=False)]
        Hm = Xm.T @ Xm / m
        PHm = Hm if P is None else P.apply(Hm)
        norms[t] = np.linalg.norm(PHm, 2)
    return NormCheck(float(np.mean(norms <= bound)), float(bound), norms)
