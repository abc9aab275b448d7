"""Gaussian, Laplace and Cauchy kernels.

Bandwidth conventions::

    gaussian  exp(-|x - y|^2 / (2 * bandwidth))      bandwidth = sigma^2
    laplace   exp(-|x - y| / bandwidth)              bandwidth = sigma
    cauchy    1 / (1 + |x - y|^2 / bandwidth)        bandwidth = sigma^2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

FAMILIES = ("gaussian", "laplace", "cauchy")


@dataclass(frozen=True)
class KernelSpec:
    family: str = "gaussian"
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(
                f"unknown kernel family {self.family!r}; expected one of {FAMILIES}"
            )
        bw = float(self.bandwidth)
        if not np.isfinite(bw) or bw <= 0:
            raise InvalidInputError(f"kernel bandwidth must be > 0, got {self.bandwidth!r}")
        object.__setattr__(self, "bandwidth", bw)

    def from_sqdist(self, sqdist):
        """Map squared distances to kernel values, elementwise."""
        sqdist = np.asarray(sqdist, dtype=np.float64)
        if self.family == "gaussian":
            return np.exp(-sqdist / (2.0 * self.bandwidth))
        if self.family == "laplace":
            return np.exp(-np.sqrt(sqdist) / self.bandwidth)
        return 1.0 / (1.0 + sqdist / self.bandwidth)


def _as_vector(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError(f"{name} must be a vector, got shape {x.shape}")
    return x


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for a single pair of points.

    Uses direct subtraction rather than the norm expansion used by
    :func:`kernel_matrix`, so it doubles as an accuracy reference.
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.shape != y.shape:
        raise InvalidInputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    diff = x - y
    return float(spec.from_sqdist(diff @ diff))


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def squared_distances(A, B=None):
    """Pairwise squared Euclidean distances, clamped at zero.

    With ``B=None`` the result is exactly symmetric with a zero diagonal.
    """
    A = _as_matrix(A, "A")
    same = B is None
    B = A if same else _as_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise InvalidInputError(
            f"dimension mismatch: A has {A.shape[1]} columns, B has {B.shape[1]}"
        )
    a2 = np.einsum("ij,ij->i", A, A)
    b2 = a2 if same else np.einsum("ij,ij->i", B, B)
    d2 = a2[:, None] + b2[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    if same:
        d2 = 0.5 * (d2 + d2.T)
        np.fill_diagonal(d2, 0.0)
    return d2


def kernel_matrix(spec: KernelSpec, A, B=None) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(A[i], B[j])``.

    Passing ``B=None`` (or the very same array object as ``A``) assembles the
    symmetric Gram matrix, which is exactly symmetric with unit diagonal.
    """
    if B is A:
        B = None
    return spec.from_sqdist(squared_distances(A, B))
