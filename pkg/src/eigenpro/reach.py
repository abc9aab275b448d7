"""Computational-reach diagnostics for gradient descent on linear systems.

For ``H = sum_i lambda_i e_i e_i^T`` and a target ``v = sum_i a_i e_i``,
``t`` steps of Richardson iteration with step ``eta`` leave the residual
``sum_i (1 - eta lambda_i)^t a_i e_i``.  Everything here is evaluated in that
eigenbasis, so it is exact and cheap even for millions of iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolver import EigenSystem
from .errors import InvalidInputError


@dataclass(frozen=True)
class SpectralProfile:
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    eta: float

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        a = np.asarray(self.coefficients, dtype=np.float64)
        if lam.ndim != 1 or lam.shape != a.shape or lam.size == 0:
            raise InvalidInputError("eigenvalues and coefficients must be equal-length vectors")
        if np.any(lam <= 0) or np.any(np.diff(lam) > 0):
            raise InvalidInputError("eigenvalues must be positive and sorted non-increasing")
        eta = float(self.eta)
        if not 0.0 < eta * lam[0] < 2.0:
            raise InvalidInputError(f"need 0 < eta * lambda_1 < 2, got {eta * lam[0]:.6g}")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "coefficients", a)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_matrix(cls, H, v, eta) -> "SpectralProfile":
        """Profile of target ``v`` in the eigenbasis of symmetric ``H``."""
        w, V = np.linalg.eigh(np.asarray(H, dtype=np.float64))
        w, V = w[::-1], V[:, ::-1]
        return cls(w, V.T @ np.asarray(v, dtype=np.float64), eta)


@dataclass(frozen=True)
class ReachResult:
    exact: bool
    necessary: bool
    residual_ratio: float
    tail_mass_ratio: float


def decay_factors(eigenvalues, eta, t):
    """``(1 - eta * lambda_i)^t`` for integer ``t``, stable for huge ``t``."""
    x = eta * np.asarray(eigenvalues, dtype=np.float64)
    t = int(t)
    if t == 0:
        return np.ones_like(x)
    below = x < 1.0
    out = np.empty_like(x)
    with np.errstate(divide="ignore", under="ignore"):
        out[below] = np.exp(t * np.log1p(-x[below]))
        out[~below] = np.exp(t * np.log(x[~below] - 1.0))
    if t % 2:
        out[~below] *= -1.0
    return out


def reach_membership(p: SpectralProfile, t: int, eps: float) -> ReachResult:
    """Test ``v`` against the reach set and its spectral superset.

    ``exact``: ``sum (1 - eta lam_i)^{2t} a_i^2 < eps^2 sum a_i^2``.
    ``necessary``: ``sum_{lam_i < lam_1 / 2t} a_i^2 < eps^2 |v|^2``.
    """
    if t < 1:
        raise InvalidInputError(f"t must be >= 1, got {t}")
    if eps <= 0:
        raise InvalidInputError(f"eps must be > 0, got {eps}")
    lam, a = p.eigenvalues, p.coefficients
    total = float(a @ a)
    resid = float(np.sum(decay_factors(lam, p.eta, t) ** 2 * a * a))
    small = lam < lam[0] / (2.0 * t)
    tail = float(np.sum(a[small] ** 2))
    bound = eps * eps * total
    return ReachResult(resid < bound, tail < bound,
                       resid / total if total else 0.0,
                       tail / total if total else 0.0)


def min_iterations(lambda1: float, lambda_i: float, coeff_ratio: float, eps: float) -> float:
    """Lower bound ``(lambda_1 / 2 lambda_i) * log(coeff_ratio / eps)`` on
    the number of steps needed to bring component ``i`` below ``eps |v|``.

    ``coeff_ratio`` is ``|<e_i, v>| / |v|``.  Valid for ``lambda_i < lambda_1 / 2``
    and step sizes ``eta <= 1 / lambda_1``.
    """
    if not 0 < lambda_i < lambda1 / 2.0:
        raise InvalidInputError(
            f"need 0 < lambda_i < lambda_1 / 2, got lambda_i={lambda_i}, lambda_1={lambda1}"
        )
    if coeff_ratio <= 0 or eps <= 0:
        raise InvalidInputError("coeff_ratio and eps must be > 0")
    return lambda1 / (2.0 * lambda_i) * float(np.log(coeff_ratio / eps))


def heat_kernel_frequencies(J: int) -> np.ndarray:
    """Fourier frequency of the j-th eigenfunction: 0, 1, 1, 2, 2, 3, 3, ..."""
    j = np.arange(J)
    return (j + 1) // 2


def heat_kernel_spectrum(s: float, J: int) -> np.ndarray:
    """First ``J`` eigenvalues of the heat kernel on the circle,
    ``1, e^-s, e^-s, e^-4s, e^-4s, ...`` (constant mode first)."""
    if s <= 0:
        raise InvalidInputError(f"s must be > 0, got {s}")
    if J < 1:
        raise InvalidInputError(f"J must be >= 1, got {J}")
    freq = heat_kernel_frequencies(J).astype(np.float64)
    with np.errstate(under="ignore"):
        return np.exp(-(freq ** 2) * s)


@dataclass(frozen=True)
class HeavisideResult:
    s: float
    J: int
    t_steps: tuple
    gd_errors: np.ndarray
    truncation_error: float


def _odd_inverse_square_tail(J):
    """``sum_{j odd, j > J} 1/j^2`` via ``pi^2 / 8`` minus the head."""
    j = np.arange(1, J + 1, 2, dtype=np.float64)
    head = np.sum(1.0 / j[::-1] ** 2)
    return max(np.pi ** 2 / 8.0 - head, 0.0)


def heaviside_demo(s: float, t_steps, J: int) -> HeavisideResult:
    """Reconstruct the +-1 step function on the circle by gradient descent.

    The step function is ``(4/pi) sum_{j odd} sin(jx) / j``.  Harmonics with
    frequency ``1..J`` are evolved in the heat-kernel eigenbasis with
    ``eta = 1 / lambda_1 = 1``; after ``t`` steps harmonic ``j`` retains the
    fraction ``(1 - e^{-j^2 s})^t`` of its coefficient.  Errors are relative
    squared L2 errors ``|f - f_t|^2 / |f|^2``; frequencies above ``J`` count as
    never recovered.  ``truncation_error`` is the error of the exact
    J-harmonic Fourier partial sum.
    """
    if s <= 0:
        raise InvalidInputError(f"s must be > 0, got {s}")
    if J < 1:
        raise InvalidInputError(f"J must be >= 1, got {J}")
    t_steps = tuple(t_steps)
    if any(t < 0 for t in t_steps):
        raise InvalidInputError("iteration counts must be >= 0")
    j = np.arange(1, J + 1, 2, dtype=np.float64)
    coef_sq = 16.0 / (np.pi ** 2 * j ** 2)
    total = 2.0  # (16 / pi^2) * (pi^2 / 8)
    tail = 16.0 / np.pi ** 2 * _odd_inverse_square_tail(J)
    with np.errstate(under="ignore"):
        lam = np.exp(-(j ** 2) * s)
    errors = np.empty(len(t_steps))
    for i, t in enumerate(t_steps):
        keep = decay_factors(lam, 1.0, t) ** 2
        errors[i] = (np.sum(keep * coef_sq) + tail) / total
    return HeavisideResult(float(s), int(J), t_steps, errors, float(tail / total))


@dataclass(frozen=True)
class SpectrumRow:
    k: int
    index: int
    eigenvalue: float
    ratio: float


def spectrum_report(es: EigenSystem, k_list) -> list[SpectrumRow]:
    """``lambda_1 / lambda_{k+1}`` for each requested k.

    Requires ``k < es.k`` or ``k == es.k`` (the tail is ``lambda_{k+1}``).
    """
    spectrum = np.append(es.values, es.tail)
    if spectrum[0] <= 0:
        raise InvalidInputError("spectrum report needs a positive top eigenvalue")
    rows = []
    for k in k_list:
        k = int(k)
        if not 0 <= k <= es.k:
            raise InvalidInputError(f"k={k} outside the eigensystem's range 0..{es.k}")
        lam = float(spectrum[k])
        ratio = float(spectrum[0] / lam) if lam > 0 else float("inf")
        rows.append(SpectrumRow(k, k + 1, lam, ratio))
    return rows
