"""Finite multi-matrix *-algebras A = M_{n_1}(C) + ... + M_{n_B}(C).

Elements are block lists; automorphisms are (block permutation) composed with
an inner automorphism, which exhausts Aut(A) for these algebras.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .linalg import DEFAULT_TOL, Tolerance, cmatrix, frobenius


@dataclass(frozen=True)
class AlgebraShape:
    block_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise ValueError("algebra must have at least one block")
        if any(n < 1 for n in dims):
            raise ValueError("block dimensions must be >= 1")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    def unit(self) -> AlgebraElement:
        return AlgebraElement(self, tuple(np.eye(n, dtype=complex) for n in self.block_dims))

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, tuple(np.zeros((n, n), dtype=complex) for n in self.block_dims))

    def matrix_unit(self, k: int, i: int, j: int) -> AlgebraElement:
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[k][i, j] = 1.0
        return AlgebraElement(self, tuple(blocks))

    def basis(self) -> Iterator[tuple[tuple[int, int, int], AlgebraElement]]:
        """All matrix units E^(k)_ij with their labels; they span the algebra."""
        for k, n in enumerate(self.block_dims):
            for i in range(n):
                for j in range(n):
                    yield (k, i, j), self.matrix_unit(k, i, j)

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
        blocks = tuple(
            scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            for n in self.block_dims
        )
        return AlgebraElement(self, blocks)

    def random_unitary(self, rng: np.random.Generator) -> Unitary:
        blocks = []
        for n in self.block_dims:
            x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            q, r = np.linalg.qr(x)
            q = q @ np.diag(np.exp(1j * np.angle(np.diag(r))))
            blocks.append(q)
        return Unitary(AlgebraElement(self, tuple(blocks)))


@dataclass(frozen=True)
class AlgebraElement:
    shape: AlgebraShape
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) != self.shape.num_blocks:
            raise ValueError("block count does not match algebra shape")
        coerced = []
        for n, blk in zip(self.shape.block_dims, self.blocks):
            b = cmatrix(np.atleast_2d(blk))
            if b.shape != (n, n):
                raise ValueError(f"block of shape {b.shape} where ({n},{n}) expected")
            coerced.append(b)
        object.__setattr__(self, "blocks", tuple(coerced))

    def _binary(self, other: AlgebraElement, op) -> AlgebraElement:
        if self.shape != other.shape:
            raise ValueError("algebra shape mismatch")
        return AlgebraElement(self.shape, tuple(op(a, b) for a, b in zip(self.blocks, other.blocks)))

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return self._binary(other, lambda a, b: a - b)

    def __mul__(self, other: AlgebraElement) -> AlgebraElement:
        return self._binary(other, lambda a, b: a @ b)

    def __rmul__(self, scalar) -> AlgebraElement:
        z = complex(scalar)
        return AlgebraElement(self.shape, tuple(z * b for b in self.blocks))

    def __neg__(self) -> AlgebraElement:
        return (-1.0) * self

    def star(self) -> AlgebraElement:
        """Blockwise conjugate transpose (the algebra involution)."""
        return AlgebraElement(self.shape, tuple(np.conj(b.T) for b in self.blocks))

    def norm(self) -> float:
        return float(np.sqrt(sum(frobenius(b) ** 2 for b in self.blocks)))

    def defect(self, other: AlgebraElement) -> float:
        diff = self - other
        scale = max(1.0, self.norm(), other.norm())
        return diff.norm() / scale

    def approx_eq(self, other: AlgebraElement, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.defect(other) <= tol.abs_eps


@dataclass(frozen=True)
class Automorphism:
    """sigma(a)_{perm(k)} = S_k a_k S_k^{-1}: block permutation composed with inner."""

    shape: AlgebraShape
    perm: tuple[int, ...]
    conjugators: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        dims = self.shape.block_dims
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(dims))):
            raise ValueError("perm must be a permutation of the block indices")
        if any(dims[perm[k]] != dims[k] for k in range(len(dims))):
            raise ValueError("perm must preserve block dimensions")
        conj = []
        conj_inv = []
        for k, n in enumerate(dims):
            s = cmatrix(np.atleast_2d(self.conjugators[k]))
            if s.shape != (n, n):
                raise ValueError(f"conjugator {k} has shape {s.shape}, expected ({n},{n})")
            try:
                conj_inv.append(np.linalg.inv(s))
            except np.linalg.LinAlgError as exc:
                raise ValueError(f"conjugator {k} is singular") from exc
            conj.append(s)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "conjugators", tuple(conj))
        object.__setattr__(self, "_conjugator_invs", tuple(conj_inv))

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        if a.shape != self.shape:
            raise ValueError("algebra shape mismatch")
        out = [None] * self.shape.num_blocks
        for k, s in enumerate(self.conjugators):
            out[self.perm[k]] = s @ a.blocks[k] @ self._conjugator_invs[k]
        return AlgebraElement(self.shape, tuple(out))

    def inverse(self) -> Automorphism:
        cached = getattr(self, "_inverse", None)
        if cached is None:
            nb = self.shape.num_blocks
            inv_perm = [0] * nb
            for k, p in enumerate(self.perm):
                inv_perm[p] = k
            conj = [self._conjugator_invs[inv_perm[j]] for j in range(nb)]
            cached = Automorphism(self.shape, tuple(inv_perm), tuple(conj))
            object.__setattr__(self, "_inverse", cached)
        return cached

    def is_identity(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        if self.perm != tuple(range(self.shape.num_blocks)):
            return False
        return all(self(a).approx_eq(a, tol) for _, a in self.shape.basis())


def identity_automorphism(shape: AlgebraShape) -> Automorphism:
    return Automorphism(
        shape,
        tuple(range(shape.num_blocks)),
        tuple(np.eye(n, dtype=complex) for n in shape.block_dims),
    )


def compose(outer: Automorphism, inner: Automorphism) -> Automorphism:
    """Pointwise composition outer(inner(.)), re-expressed in perm/conjugator form."""
    if outer.shape != inner.shape:
        raise ValueError("algebra shape mismatch")
    nb = outer.shape.num_blocks
    perm = tuple(outer.perm[inner.perm[k]] for k in range(nb))
    conj = tuple(outer.conjugators[inner.perm[k]] @ inner.conjugators[k] for k in range(nb))
    return Automorphism(outer.shape, perm, conj)


@dataclass(frozen=True)
class RegularityReport:
    max_defect: float
    tol: Tolerance = DEFAULT_TOL

    @property
    def passes(self) -> bool:
        return self.max_defect <= self.tol.abs_eps


def check_regularity(
    sigma: Automorphism,
    samples: int = 20,
    rng: np.random.Generator | None = None,
    tol: Tolerance = DEFAULT_TOL,
) -> RegularityReport:
    """Max defect of sigma(a*) = (sigma^{-1}(a))* over the matrix units plus random samples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    inv = sigma.inverse()
    worst = 0.0
    elements = [a for _, a in sigma.shape.basis()]
    elements += [sigma.shape.random_element(rng) for _ in range(samples)]
    for a in elements:
        worst = max(worst, sigma(a.star()).defect(inv(a).star()))
    return RegularityReport(worst, tol)


@dataclass(frozen=True)
class Unitary:
    element: AlgebraElement

    def __post_init__(self) -> None:
        e = self.element.shape.unit()
        u = self.element
        if u.defect(e) == 0.0:
            return
        if (u * u.star()).defect(e) > DEFAULT_TOL.abs_eps or (u.star() * u).defect(e) > DEFAULT_TOL.abs_eps:
            raise ValueError("element is not unitary: u u* = u* u = e fails")
