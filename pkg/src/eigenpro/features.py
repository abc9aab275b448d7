"""Explicit feature maps: random Fourier features and RBF-network features."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .kernels import KernelSpec, kernel_matrix
from .seeding import derive_rng


def _rows(x, p, name="x"):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != p:
        raise InvalidInputError(
            f"dimension mismatch: {name} has shape {x.shape}, map expects {p} inputs"
        )
    return X, single


@dataclass(frozen=True, eq=False)
class RffMap:
    """Random Fourier features approximating a Gaussian kernel.

    ``phi(x) = sqrt(2/d) * cos(omega @ x + b)`` with rows of ``omega`` drawn
    from N(0, I / bandwidth) (the spectral measure of
    ``exp(-|x-y|^2 / (2 * bandwidth))``) and ``b`` uniform on [0, 2*pi).
    """

    omega: np.ndarray
    b: np.ndarray
    source_bandwidth: float
    seed: int | None = None

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if omega.ndim != 2 or b.shape != (omega.shape[0],):
            raise InvalidInputError("omega must be d x p and b a length-d vector")
        omega.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "b", b)

    @classmethod
    def sample(cls, p: int, d: int, bandwidth: float, seed=0) -> "RffMap":
        """Draw a d-feature map for p-dimensional inputs.

        Frequencies are drawn first (d*p normals, row-major), then phases
        (d uniforms), from the ``"features"`` stream of ``seed``.
        """
        if p < 1 or d < 1:
            raise InvalidInputError(f"need p >= 1 and d >= 1, got p={p}, d={d}")
        KernelSpec("gaussian", bandwidth)  # validates bandwidth
        rng = derive_rng(seed, "features")
        omega = rng.standard_normal((d, p)) / np.sqrt(bandwidth)
        b = rng.uniform(0.0, 2.0 * np.pi, size=d)
        return cls(omega, b, float(bandwidth), None if isinstance(seed, np.random.Generator) else int(seed))

    @property
    def d(self) -> int:
        return self.omega.shape[0]

    @property
    def p(self) -> int:
        return self.omega.shape[1]

    def apply(self, x) -> np.ndarray:
        X, single = _rows(x, self.p)
        Z = X @ self.omega.T
        Z += self.b
        np.cos(Z, out=Z)
        Z *= np.sqrt(2.0 / self.d)
        return Z[0] if single else Z


@dataclass(frozen=True, eq=False)
class RbfMap:
    """Features ``(k(x, z_1), ..., k(x, z_d))`` against a fixed set of centers."""

    centers: np.ndarray
    spec: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise InvalidInputError("centers must be a non-empty d x p matrix")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    @classmethod
    def from_data(cls, X, d: int, spec: KernelSpec, seed=0) -> "RbfMap":
        """Pick ``d`` centers from the rows of ``X`` without replacement."""
        X = np.asarray(X, dtype=np.float64)
        if not 1 <= d <= X.shape[0]:
            raise InvalidInputError(f"need 1 <= d <= n={X.shape[0]} centers, got {d}")
        idx = derive_rng(seed, "centers").choice(X.shape[0], size=d, replace=False)
        return cls(X[np.sort(idx)], spec)

    @property
    def d(self) -> int:
        return self.centers.shape[0]

    @property
    def p(self) -> int:
        return self.centers.shape[1]

    def apply(self, x) -> np.ndarray:
        X, single = _rows(x, self.p)
        F = kernel_matrix(self.spec, X, self.centers)
        return F[0] if single else F


def rff_apply(fmap: RffMap, x) -> np.ndarray:
    return fmap.apply(x)


def rbf_apply(fmap: RbfMap, x) -> np.ndarray:
    return fmap.apply(x)
