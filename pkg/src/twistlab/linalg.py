"""Dense complex matrix kernels and antilinear-operator support.

Everything downstream works with plain ``numpy`` arrays of dtype complex128;
this module owns the comparison policy, the Kronecker product and the
antilinear operators that realize real structures.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_EPS = 1e-10


@dataclass(frozen=True)
class Tolerance:
    """Relative Frobenius threshold: X ~ Y iff ||X-Y||_F <= abs_eps * max(1, ||X||_F, ||Y||_F)."""

    abs_eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        if not self.abs_eps > 0:
            raise ValueError("tolerance must be positive")


DEFAULT_TOL = Tolerance()


def cmatrix(data) -> np.ndarray:
    """Validate and coerce to a finite complex128 2-D array."""
    arr = np.asarray(data, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError("matrix entries must be finite")
    return arr


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a.T)


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, entry (i*br+k, j*bc+l) = a[i,j]*b[k,l]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def rel_defect(x: np.ndarray, y: np.ndarray) -> float:
    """||x-y||_F scaled by max(1, ||x||_F, ||y||_F)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    scale = max(1.0, frobenius(x), frobenius(y))
    return frobenius(x - y) / scale


def approx_eq(x: np.ndarray, y: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return rel_defect(x, y) <= tol.abs_eps


def is_zero(x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return frobenius(np.asarray(x)) <= tol.abs_eps


@dataclass(frozen=True)
class AntilinearOp:
    """Antilinear operator psi -> mat @ conj(psi).

    Real structures J enter every formula either applied to vectors or through
    the conjugation T -> J T J^{-1}; storing the (matrix, implicit conjugation)
    pair keeps both one-liners.
    """

    mat: np.ndarray

    def __post_init__(self) -> None:
        m = cmatrix(self.mat)
        if m.shape[0] != m.shape[1]:
            raise ValueError("antilinear operator matrix must be square")
        object.__setattr__(self, "mat", m)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return self.mat @ np.conj(psi)

    @property
    def inv_mat(self) -> np.ndarray:
        cached = getattr(self, "_inv_mat", None)
        if cached is None:
            try:
                cached = np.linalg.inv(self.mat)
            except np.linalg.LinAlgError as exc:
                raise ValueError("real structure not invertible") from exc
            object.__setattr__(self, "_inv_mat", cached)
        return cached

    def conjugate(self, t: np.ndarray) -> np.ndarray:
        """J T J^{-1} as a linear matrix: mat @ conj(t) @ mat^{-1}."""
        t = np.asarray(t, dtype=complex)
        if t.shape != self.mat.shape:
            raise ValueError(f"shape mismatch: {t.shape} vs {self.mat.shape}")
        return self.mat @ np.conj(t) @ self.inv_mat

    def isometry_defect(self) -> float:
        return rel_defect(dagger(self.mat) @ self.mat, np.eye(self.mat.shape[0]))

    def squared(self) -> np.ndarray:
        """J^2 as a linear matrix (mat @ conj(mat))."""
        return self.mat @ np.conj(self.mat)


def conjugate_by(j: AntilinearOp, t: np.ndarray) -> np.ndarray:
    """Conjugation of a linear operator by an antilinear one, J T J^{-1}."""
    return j.conjugate(t)


def detect_sign(transformed: np.ndarray, original: np.ndarray, tol: Tolerance = DEFAULT_TOL):
    """Return (sign, defect) with sign in {+1,-1,None} minimizing ||transformed - sign*original||."""
    d_plus = rel_defect(transformed, original)
    d_minus = rel_defect(transformed, -original)
    if d_plus <= d_minus:
        sign, defect = 1, d_plus
    else:
        sign, defect = -1, d_minus
    if defect > tol.abs_eps:
        return None, defect
    return sign, defect
