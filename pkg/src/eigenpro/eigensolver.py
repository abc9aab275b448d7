"""Top-k eigensystems of subsample covariance and kernel matrices.

All solvers report eigenvalues on the covariance scale: for a data matrix the
eigenvalues of ``H_M = X_M^T X_M / M``, for a kernel the eigenvalues of
``K_M / M``.  Downstream code only needs ratios of these values plus the
covariance scale assumed by the step-size bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .kernels import KernelSpec, kernel_matrix
from .seeding import derive_rng

ORTHO_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Top-k eigenpairs plus the (k+1)-th eigenvalue.

    Attributes
    ----------
    vectors : (d, k) array with orthonormal columns.
    values : (k,) array, sorted non-increasing, strictly positive.
    tail : the (k+1)-th eigenvalue, ``0 <= tail <= values[-1]``.
    subsample_size : number of rows the system was estimated from.
    """

    vectors: np.ndarray
    values: np.ndarray
    tail: float
    subsample_size: int
    scaling_convention: str = "covariance"

    def __post_init__(self):
        E = np.asarray(self.vectors, dtype=np.float64)
        lam = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if E.ndim != 2 or E.shape[1] != lam.shape[0]:
            raise InvalidInputError(
                f"vectors {E.shape} and values {lam.shape} disagree on k"
            )
        tail = float(self.tail)
        if lam.size:
            if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
                raise DegenerateInputError(
                    f"eigenvalues must be finite and > 0, got min {lam.min():.3g}; "
                    "reduce k or check the data for rank deficiency"
                )
            if np.any(np.diff(lam) > 0):
                raise InvalidInputError("eigenvalues must be sorted non-increasing")
            if tail > lam[-1]:
                raise InvalidInputError(f"tail {tail:.6g} exceeds smallest value {lam[-1]:.6g}")
            gram = E.T @ E
            err = np.max(np.abs(gram - np.eye(lam.size)))
            if err > ORTHO_TOL:
                raise InvalidInputError(f"eigenvectors not orthonormal (max error {err:.3g})")
        if not np.isfinite(tail) or tail < 0:
            raise InvalidInputError(f"tail eigenvalue must be finite and >= 0, got {tail}")
        if self.scaling_convention != "covariance":
            raise InvalidInputError(f"unsupported scaling convention {self.scaling_convention!r}")
        E.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "vectors", E)
        object.__setattr__(self, "values", lam)
        object.__setattr__(self, "tail", tail)
        object.__setattr__(self, "subsample_size", int(self.subsample_size))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def top(self) -> float:
        """Largest eigenvalue known to the system (``tail`` when k = 0)."""
        return float(self.values[0]) if self.k else self.tail

    def truncate(self, k: int) -> "EigenSystem":
        """Keep the top ``k`` pairs; the (k+1)-th value becomes the tail."""
        if not 0 <= k <= self.k:
            raise InvalidInputError(f"cannot truncate a rank-{self.k} system to k={k}")
        if k == self.k:
            return self
        return EigenSystem(self.vectors[:, :k], self.values[:k], self.values[k],
                           self.subsample_size)


def _fix_signs(V):
    """Flip columns so the entry of largest magnitude is positive."""
    if V.size == 0:
        return V
    rows = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[rows, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _check_sizes(n, d, k, M):
    if k < 0:
        raise InvalidInputError(f"k must be >= 0, got {k}")
    if not 1 <= M <= n:
        raise InvalidInputError(f"subsample size M={M} must satisfy 1 <= M <= n={n}")
    if k + 1 > min(M, d):
        raise InvalidInputError(
            f"need k+1 <= min(M, d), got k={k}, M={M}, d={d}"
        )


def _subsample(n, M, rng):
    if M == n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=M, replace=False))


def _finish(values, vectors, k, M):
    values = np.maximum(values, 0.0)
    if k and values[k - 1] <= 0:
        raise DegenerateInputError(
            f"subsample covariance has fewer than k={k} positive eigenvalues"
        )
    return EigenSystem(_fix_signs(vectors[:, :k]), values[:k], values[k], M)


def exact_eigensystem(H, k: int, subsample_size: int | None = None) -> EigenSystem:
    """Top-k eigensystem of a dense symmetric PSD matrix via a full eigensolve."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidInputError(f"H must be square, got {H.shape}")
    if not 0 <= k < H.shape[0]:
        raise InvalidInputError(f"need 0 <= k < {H.shape[0]}, got {k}")
    w, V = np.linalg.eigh(0.5 * (H + H.T))
    w, V = w[::-1], V[:, ::-1]
    return _finish(w[: k + 1].copy(), V, k, subsample_size or H.shape[0])


def _orthonormal(A):
    Q, _ = np.linalg.qr(A)
    return Q


def rsvd(X, k: int, M: int, seed=0, *, oversample: int = 10, n_iter: int = 2,
         tol: float = 1e-12, max_iter: int = 200) -> EigenSystem:
    """Randomized SVD of a row subsample (Halko et al. range finder).

    ``M`` rows are drawn without replacement, an orthonormal basis for the
    range of ``X_M`` is built from ``k + 1 + oversample`` Gaussian probes, and
    ``n_iter`` subspace (power) iterations are applied.  Iteration then
    continues while the top ``k + 1`` singular values still move by more than
    ``tol`` (relative), up to ``max_iter`` iterations, so that clustered
    spectra converge too.

    Returns eigenpairs of ``H_M = X_M^T X_M / M``, i.e. ``sigma_i(X_M)^2 / M``
    with the right singular vectors.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    _check_sizes(n, d, k, M)
    rng = derive_rng(seed, "eigensolver")
    XM = X[_subsample(n, M, rng)]
    if not np.any(XM):
        raise DegenerateInputError("subsample covariance is identically zero")

    r = k + 1
    ell = min(r + oversample, M, d)
    Q = _orthonormal(XM @ rng.standard_normal((d, ell)))

    def ritz(Q):
        _, s, Vt = np.linalg.svd(Q.T @ XM, full_matrices=False)
        return s, Vt

    for _ in range(n_iter):
        Q = _orthonormal(XM @ _orthonormal(XM.T @ Q))
    s, Vt = ritz(Q)
    if ell < min(M, d):
        for _ in range(max_iter):
            Q = _orthonormal(XM @ _orthonormal(XM.T @ Q))
            s_new, Vt = ritz(Q)
            change = np.max(np.abs(s_new[:r] - s[:r]) / np.maximum(s_new[:r], np.finfo(float).tiny))
            s = s_new
            if change <= tol:
                break
    return _finish(s[:r] ** 2 / M, Vt.T, k, M)


def nsvd(X, k: int, M: int, seed=0) -> EigenSystem:
    """Nystrom SVD: eigendecompose the M x M Gram matrix of the subsample.

    Eigenvectors of ``W = X_M X_M^T / M`` are back-projected through
    ``X_M^T``, orthonormalized by Gram-Schmidt (QR) and re-sorted by their
    Rayleigh quotients on ``H_M``.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    _check_sizes(n, d, k, M)
    rng = derive_rng(seed, "eigensolver")
    XM = X[_subsample(n, M, rng)]
    if not np.any(XM):
        raise DegenerateInputError("subsample covariance is identically zero")
    W = XM @ XM.T / M
    w, V = np.linalg.eigh(0.5 * (W + W.T))
    w, V = w[::-1][: k + 1].copy(), V[:, ::-1][:, :k]
    w = np.maximum(w, 0.0)
    if k and w[k - 1] <= 0:
        raise DegenerateInputError(f"subsample covariance has fewer than k={k} positive eigenvalues")
    E = _orthonormal(XM.T @ V)
    rayleigh = np.einsum("ij,ij->j", XM @ E, XM @ E) / M
    E = E[:, np.argsort(-rayleigh, kind="stable")]
    return EigenSystem(_fix_signs(E), w[:k], w[k], M)


def kernel_eigensystem(spec: KernelSpec, X, k: int, M: int, seed=0,
                       block_size: int = 2048) -> EigenSystem:
    """Eigensystem of the normalized kernel matrix ``K / n`` from a subsample.

    Only the ``M x M`` subsample block is eigendecomposed.  Its eigenvectors
    are extended to all n training points with the Nystrom formula
    ``e_i(x_j) ~ sum_m k(x_j, x_m) v_i[m]`` (computed in row blocks), then
    re-orthonormalized.  Values are eigenvalues of ``K_M / M``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    _check_sizes(n, n, k, M)
    rng = derive_rng(seed, "eigensolver")
    idx = _subsample(n, M, rng)
    XM = X[idx]
    KM = kernel_matrix(spec, XM)
    w, V = np.linalg.eigh(KM / M)
    w, V = w[::-1][: k + 1].copy(), V[:, ::-1][:, :k]
    w = np.maximum(w, 0.0)
    if k and w[k - 1] <= 0:
        raise DegenerateInputError(f"kernel subsample has fewer than k={k} positive eigenvalues")
    if M == n:
        E = np.empty((n, k))
        E[idx] = V
    else:
        E = np.empty((n, k))
        for start in range(0, n, block_size):
            stop = min(start + block_size, n)
            E[start:stop] = kernel_matrix(spec, X[start:stop], XM) @ V
        E = _orthonormal(E)
    return EigenSystem(_fix_signs(E), w[:k], w[k], M)
