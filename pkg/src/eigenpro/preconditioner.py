"""EigenPro preconditioners, stored in factored (E, weights) form.

Linear form::

    P = I - sum_i w_i e_i e_i^T,   w_i = 1 - tau * lambda_{k+1} / lambda_i

Kernel form (used by the split update of the kernel iteration)::

    D = sum_i d_i e_i e_i^T,   d_i = (1 / lambda_i(K)) * (1 - tau * lambda_{k+1} / lambda_i)

so that ``I - D K`` flattens the top-k spectrum of the kernel matrix ``K``
to ``tau * lambda_{k+1}(K)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigensolver import EigenSystem
from .errors import DegenerateInputError, InvalidInputError
from .kernels import KernelSpec, kernel_eval, kernel_matrix

DEFAULT_TAU_FEATURES = 0.25
DEFAULT_TAU_PRIMAL = 1.0


def _check_tau(tau):
    tau = float(tau)
    if not 0.0 < tau <= 1.0:
        raise InvalidInputError(f"damping factor tau must be in (0, 1], got {tau}")
    return tau


def _check_dim(v, d):
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != d:
        raise InvalidInputError(f"dimension mismatch: vector has {v.shape[0]} rows, preconditioner {d}")
    return v


@dataclass(frozen=True, eq=False)
class LinearPreconditioner:
    eigensystem: EigenSystem
    tau: float = DEFAULT_TAU_FEATURES
    diag_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = _check_tau(self.tau)
        es = self.eigensystem
        if es.k and es.tail <= 0:
            raise DegenerateInputError(
                "tail eigenvalue is 0, so the preconditioner would annihilate the "
                "top directions; use a smaller k"
            )
        w = 1.0 - tau * es.tail / es.values
        if np.any(w < 0) or np.any(w >= 1):
            raise DegenerateInputError(f"preconditioner weights out of [0, 1): {w}")
        assert np.all(np.diff(w) <= 0), "weights must be non-increasing"
        w.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "diag_weights", w)

    @property
    def k(self):
        return self.eigensystem.k

    @property
    def dim(self):
        return self.eigensystem.dim

    def apply(self, v):
        """``P v = v - E diag(w) E^T v``; v may be a vector or a d x c matrix."""
        v = _check_dim(v, self.dim)
        if self.k == 0:
            return v.copy()
        E = self.eigensystem.vectors
        c = E.T @ v
        c *= self.diag_weights.reshape((-1,) + (1,) * (v.ndim - 1))
        return v - E @ c

    def apply_sqrt(self, v):
        """``P^{1/2} v``; the linear feature map under which preconditioned
        Richardson iteration becomes plain Richardson iteration."""
        v = _check_dim(v, self.dim)
        if self.k == 0:
            return v.copy()
        E = self.eigensystem.vectors
        s = 1.0 - np.sqrt(1.0 - self.diag_weights)
        c = E.T @ v
        c *= s.reshape((-1,) + (1,) * (v.ndim - 1))
        return v - E @ c

    def transformed_sqnorms(self, X):
        """Row norms ``|P^{1/2} x|^2 = |x|^2 - sum_i w_i (e_i^T x)^2``."""
        X = np.asarray(X, dtype=np.float64)
        sq = np.einsum("ij,ij->i", X, X)
        if self.k == 0:
            return sq
        proj = X @ self.eigensystem.vectors
        return np.maximum(sq - (proj * proj) @ self.diag_weights, 0.0)


def identity_preconditioner(d: int, tail: float = 1.0) -> LinearPreconditioner:
    return LinearPreconditioner(EigenSystem(np.zeros((d, 0)), np.zeros(0), tail, 0), 1.0)


def build_linear(es: EigenSystem, tau: float = DEFAULT_TAU_FEATURES) -> LinearPreconditioner:
    return LinearPreconditioner(es, tau)


def apply_linear(P: LinearPreconditioner, v):
    return P.apply(v)


@dataclass(frozen=True, eq=False)
class KernelPreconditioner:
    """Factored ``D`` of the kernel iteration.

    ``scale`` converts the eigensystem's values to eigenvalues of the raw
    kernel matrix.  Kernel eigensystems are on the ``K / n`` scale, so the
    default is ``n = eigensystem.dim``.
    """

    eigensystem: EigenSystem
    tau: float = DEFAULT_TAU_PRIMAL
    scale: float | None = None
    d_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = _check_tau(self.tau)
        es = self.eigensystem
        scale = float(es.dim if self.scale is None else self.scale)
        if scale <= 0:
            raise InvalidInputError(f"scale must be > 0, got {scale}")
        if np.any(es.values <= 0):
            raise DegenerateInputError("kernel preconditioner needs positive eigenvalues")
        lam = es.values
        dw = (1.0 - tau * es.tail / lam) / (scale * lam)
        if not np.all(np.isfinite(dw)):
            raise DegenerateInputError("non-finite preconditioner weights")
        dw.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "d_weights", dw)

    @property
    def k(self):
        return self.eigensystem.k

    @property
    def dim(self):
        return self.eigensystem.dim

    @property
    def factor(self):
        """Columns ``e_i * d_i``, so that ``D = factor @ E^T``."""
        return self.eigensystem.vectors * self.d_weights

    def apply_D(self, v):
        v = _check_dim(v, self.dim)
        if self.k == 0:
            return np.zeros_like(v)
        E = self.eigensystem.vectors
        c = E.T @ v
        c *= self.d_weights.reshape((-1,) + (1,) * (v.ndim - 1))
        return E @ c


def build_kernel(es: EigenSystem, tau: float = DEFAULT_TAU_PRIMAL,
                 scale: float | None = None) -> KernelPreconditioner:
    return KernelPreconditioner(es, tau, scale)


def _nystrom_features(es, spec, X, A):
    """Eigenfunctions at the rows of A, normalized to unit mean square on X."""
    n = X.shape[0]
    KA = kernel_matrix(spec, A, X)
    return (KA @ es.vectors) / (np.sqrt(n) * es.values)


def eigenpro_kernel_matrix(es: EigenSystem, spec: KernelSpec, X, A, B, tau: float = 1.0):
    """``k_EP`` between the rows of A and B (finite-sample Nystrom version).

    ``k_EP(x, z) = k(x, z) - sum_i (lambda_i - tau * lambda_{k+1}) phi_i(x) phi_i(z)``
    with ``phi_i`` the Nystrom extensions of the eigenvectors of ``K / n``.
    """
    X = np.asarray(X, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if es.dim != X.shape[0]:
        raise InvalidInputError("eigensystem was not built on X")
    K = kernel_matrix(spec, A, B)
    if es.k == 0:
        return K
    shrink = es.values - tau * es.tail
    return K - (_nystrom_features(es, spec, X, A) * shrink) @ _nystrom_features(es, spec, X, B).T


def eigenpro_kernel_eval(es: EigenSystem, spec: KernelSpec, X, x, z, tau: float = 1.0) -> float:
    X = np.asarray(X, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != (X.shape[1],) or z.shape != (X.shape[1],):
        raise InvalidInputError(f"points must have {X.shape[1]} coordinates")
    base = kernel_eval(spec, x, z)
    if es.k == 0:
        return base
    if es.dim != X.shape[0]:
        raise InvalidInputError("eigensystem was not built on X")
    fx = _nystrom_features(es, spec, X, x[None, :])[0]
    fz = _nystrom_features(es, spec, X, z[None, :])[0]
    shrink = es.values - tau * es.tail
    return base - float(np.sum(shrink * (fx * fz)))
