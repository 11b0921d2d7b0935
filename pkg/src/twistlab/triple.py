"""Real twisted spectral triples (A, H, D), sigma, J, Gamma in finite dimension.

The algebra acts through a representation given on matrix units; the real
structure is an antilinear isometry J inducing the right action
pi_opp(a) = J pi(a)* J^{-1}, and the twist enters through the twisted
commutator [D, pi(a)]_sigma = D pi(a) - pi(sigma(a)) D.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, Automorphism, check_regularity
from .linalg import (
    DEFAULT_TOL,
    AntilinearOp,
    Tolerance,
    cmatrix,
    dagger,
    detect_sign,
    rel_defect,
)

# KO-dimension mod 8 from the sign triple (eps, eps', eps''); graded cases carry eps''.
_KO_GRADED = {(1, 1, 1): 0, (-1, 1, -1): 2, (-1, 1, 1): 4, (1, 1, -1): 6}
_KO_ODD = {(1, -1): 1, (-1, 1): 3, (-1, -1): 5, (1, 1): 7}


@dataclass(frozen=True)
class Representation:
    """Linear extension of (k,i,j) -> pi(E^(k)_ij); unit_images[k] has shape (n_k, n_k, d, d)."""

    shape: AlgebraShape
    dim: int
    unit_images: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.unit_images) != self.shape.num_blocks:
            raise ValueError("unit_images must have one entry per block")
        coerced = []
        for n, u in zip(self.shape.block_dims, self.unit_images):
            arr = np.asarray(u, dtype=complex)
            if arr.shape != (n, n, self.dim, self.dim):
                raise ValueError(
                    f"unit images of shape {arr.shape} where ({n},{n},{self.dim},{self.dim}) expected"
                )
            if not np.all(np.isfinite(arr.view(float))):
                raise ValueError("unit images must be finite")
            coerced.append(arr)
        object.__setattr__(self, "unit_images", tuple(coerced))

    def __call__(self, a: AlgebraElement) -> np.ndarray:
        if a.shape != self.shape:
            raise ValueError("algebra shape mismatch")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for blk, units in zip(a.blocks, self.unit_images):
            out += np.einsum("ij,ijpq->pq", blk, units)
        return out

    def homomorphism_defect(self) -> float:
        """Max defect of pi(E^(k)_ij) pi(E^(l)_pq) = delta_kl delta_jp pi(E^(k)_iq)."""
        worst = 0.0
        units = list(self.shape.basis())
        for (k, i, j), ea in units:
            pa = self(ea)
            for (l, p, q), eb in units:
                expected = self(self.shape.matrix_unit(k, i, q)) if (k == l and j == p) \
                    else np.zeros((self.dim, self.dim), dtype=complex)
                worst = max(worst, rel_defect(pa @ self(eb), expected))
        return worst

    def involution_defect(self) -> float:
        worst = 0.0
        for (k, i, j), ea in self.shape.basis():
            worst = max(worst, rel_defect(dagger(self(ea)), self(self.shape.matrix_unit(k, j, i))))
        return worst

    def unital_defect(self) -> float:
        return rel_defect(self(self.shape.unit()), np.eye(self.dim))

    def unit_is_projection(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        p = self(self.shape.unit())
        return rel_defect(p @ p, p) <= tol.abs_eps and rel_defect(dagger(p), p) <= tol.abs_eps

    def is_faithful(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """pi is injective iff the images of the matrix units are linearly independent."""
        rows = [self(a).reshape(-1) for _, a in self.shape.basis()]
        mat = np.array(rows)
        rank = np.linalg.matrix_rank(mat, tol=tol.abs_eps * max(1.0, float(np.abs(mat).max(initial=0.0))))
        return bool(rank == len(rows))


@dataclass(frozen=True)
class RealStructure:
    """Antilinear isometry J with KO signs; None marks a sign not yet detected."""

    j: AntilinearOp
    epsilon: int | None = None
    epsilon_prime: int | None = None
    epsilon_double_prime: int | None = None


@dataclass(frozen=True)
class TwistedTriple:
    shape: AlgebraShape
    rep: Representation
    dirac: np.ndarray
    sigma: Automorphism
    grading: np.ndarray | None = None
    real: RealStructure | None = None

    def __post_init__(self) -> None:
        d = cmatrix(self.dirac)
        if d.shape != (self.rep.dim, self.rep.dim):
            raise ValueError("dirac matrix does not match the Hilbert dimension")
        object.__setattr__(self, "dirac", d)
        if self.grading is not None:
            g = cmatrix(self.grading)
            if g.shape != d.shape:
                raise ValueError("grading does not match the Hilbert dimension")
            object.__setattr__(self, "grading", g)
        if self.real is not None and self.real.j.mat.shape != d.shape:
            raise ValueError("real structure does not match the Hilbert dimension")
        if self.rep.shape != self.shape or self.sigma.shape != self.shape:
            raise ValueError("representation/automorphism shape mismatch")

    # -- actions ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.rep.dim

    def pi(self, a: AlgebraElement) -> np.ndarray:
        return self.rep(a)

    def require_real(self) -> RealStructure:
        if self.real is None:
            raise ValueError("real structure required")
        return self.real

    def hat(self, a: AlgebraElement) -> np.ndarray:
        """J pi(a) J^{-1}, the operator of the hat element a^hat = (a*)^opp."""
        return self.require_real().j.conjugate(self.pi(a))

    def pi_opp(self, a: AlgebraElement) -> np.ndarray:
        """Right-action operator pi_opp(a^opp) = J pi(a)* J^{-1}."""
        return self.require_real().j.conjugate(dagger(self.pi(a)))

    def epsilon_prime(self) -> int:
        real = self.require_real()
        if real.epsilon_prime is not None:
            return real.epsilon_prime
        sign, _ = detect_sign(real.j.conjugate(self.dirac), self.dirac)
        if sign is None:
            raise ValueError("JD = eps' DJ holds for neither sign")
        return sign

    # -- twisted commutators ----------------------------------------------

    def bracket_sigma(self, t: np.ndarray, a: AlgebraElement) -> np.ndarray:
        """[T, pi(a)]_sigma = T pi(a) - pi(sigma(a)) T."""
        return t @ self.pi(a) - self.pi(self.sigma(a)) @ t

    def bracket_sigma_opp(self, t: np.ndarray, a: AlgebraElement) -> np.ndarray:
        """[T, pi_opp(a)]_{sigma_opp} = T pi_opp(a) - pi_opp(sigma^{-1}(a)) T."""
        return t @ self.pi_opp(a) - self.pi_opp(self.sigma.inverse()(a)) @ t

    def bracket_hat(self, t: np.ndarray, a: AlgebraElement) -> np.ndarray:
        """[T, a^hat]_{sigma_opp} = T hat(a) - hat(sigma(a)) T."""
        return t @ self.hat(a) - self.hat(self.sigma(a)) @ t

    def twisted_commutator(self, a: AlgebraElement) -> np.ndarray:
        """delta(a) = D pi(a) - pi(sigma(a)) D."""
        return self.bracket_sigma(self.dirac, a)

    def twisted_commutator_opp(self, a: AlgebraElement) -> np.ndarray:
        """delta_opp(a) = D pi_opp(a) - pi_opp(sigma^{-1}(a)) D."""
        return self.bracket_sigma_opp(self.dirac, a)

    def first_order_defect(self, a: AlgebraElement, b: AlgebraElement) -> float:
        """Relative norm of [[D, pi(a)]_sigma, pi_opp(b)]_{sigma_opp}."""
        inner = self.twisted_commutator(a)
        outer = self.bracket_sigma_opp(inner, b)
        scale = max(1.0, float(np.linalg.norm(inner)), float(np.linalg.norm(self.pi_opp(b))))
        return float(np.linalg.norm(outer)) / scale


@dataclass(frozen=True)
class AxiomReport:
    """Per-axiom max defects; analytic axioms that are vacuous in finite dimension
    (boundedness, compact resolvent) are recorded as trivially satisfied."""

    dirac_selfadjoint: float
    regularity: float
    rep_homomorphism: float
    rep_involution: float
    rep_unital: float
    rep_unit_is_projection: bool
    faithful: bool
    grading_hermitian: float | None = None
    grading_squares: float | None = None
    grading_commutes_algebra: float | None = None
    grading_anticommutes_dirac: float | None = None
    j_isometry: float | None = None
    epsilon: int | None = None
    epsilon_defect: float | None = None
    epsilon_prime: int | None = None
    epsilon_prime_defect: float | None = None
    epsilon_double_prime: int | None = None
    epsilon_double_prime_defect: float | None = None
    ko_dimension: int | None = None
    order_zero: float | None = None
    first_order: float | None = None
    first_order_witness: tuple | None = None
    bounded: bool = True
    compact_resolvent: bool = True
    warnings: tuple[str, ...] = ()
    tol: Tolerance = field(default=DEFAULT_TOL)

    def failures(self, require_first_order: bool = False) -> list[str]:
        """Names of the mandatory axioms whose defect exceeds the tolerance."""
        eps = self.tol.abs_eps
        out = []
        checks = {
            "dirac_selfadjoint": self.dirac_selfadjoint,
            "regularity": self.regularity,
            "rep_homomorphism": self.rep_homomorphism,
            "rep_involution": self.rep_involution,
            "grading_hermitian": self.grading_hermitian,
            "grading_squares": self.grading_squares,
            "grading_commutes_algebra": self.grading_commutes_algebra,
            "grading_anticommutes_dirac": self.grading_anticommutes_dirac,
            "j_isometry": self.j_isometry,
            "epsilon": self.epsilon_defect,
            "epsilon_prime": self.epsilon_prime_defect,
            "epsilon_double_prime": self.epsilon_double_prime_defect,
            "order_zero": self.order_zero,
        }
        for name, defect in checks.items():
            if defect is not None and defect > eps:
                out.append(name)
        if self.rep_unital > eps and not self.rep_unit_is_projection:
            out.append("rep_unital")
        if require_first_order and self.first_order is not None and self.first_order > eps:
            out.append("first_order")
        return out

    def passes(self, require_first_order: bool = False) -> bool:
        return not self.failures(require_first_order)


def check_axioms(
    t: TwistedTriple,
    samples: int = 20,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
) -> AxiomReport:
    """Evaluate every axiom on all matrix units plus seeded random elements.

    Matrix units span the algebra, so unit-level passes imply algebra-level
    passes by linearity; the random samples guard the linear extension itself.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    d = t.dirac
    eye = np.eye(t.dim)
    warnings: list[str] = []

    basis = [a for _, a in t.shape.basis()]
    labels = [lab for lab, _ in t.shape.basis()]
    randoms = [t.shape.random_element(rng) for _ in range(samples)]

    dirac_sa = rel_defect(d, dagger(d))
    regularity = check_regularity(t.sigma, samples=samples, rng=rng, tol=tol).max_defect

    rep_hom = t.rep.homomorphism_defect()
    rep_inv = t.rep.involution_defect()
    rep_unital = t.rep.unital_defect()
    unit_proj = t.rep.unit_is_projection(tol)
    faithful = t.rep.is_faithful(tol)
    if not faithful:
        warnings.append("representation is not faithful")
    if rep_unital > tol.abs_eps and unit_proj:
        warnings.append("pi(unit) is a proper projection, not the identity")

    g_herm = g_sq = g_comm = g_anti = None
    if t.grading is not None:
        g = t.grading
        g_herm = rel_defect(g, dagger(g))
        g_sq = rel_defect(g @ g, eye)
        g_comm = max(rel_defect(g @ t.pi(a), t.pi(a) @ g) for a in basis + randoms)
        g_anti = rel_defect(g @ d, -d @ g)

    j_iso = eps = eps_def = epsp = epsp_def = epspp = epspp_def = ko = None
    order_zero = first_order = None
    fo_witness = None
    if t.real is not None:
        j = t.real.j
        j_iso = j.isometry_defect()
        eps, eps_def = detect_sign(j.squared(), eye, tol)
        epsp, epsp_def = detect_sign(j.conjugate(d), d, tol)
        if t.grading is not None:
            epspp, epspp_def = detect_sign(j.conjugate(t.grading), t.grading, tol)
        declared = (t.real.epsilon, t.real.epsilon_prime, t.real.epsilon_double_prime)
        if any(s is not None and det is not None and s != det
               for s, det in zip(declared, (eps, epsp, epspp))):
            warnings.append("declared KO signs disagree with detected ones")
        if eps is not None and epsp is not None:
            if t.grading is not None and epspp is not None:
                ko = _KO_GRADED.get((eps, epsp, epspp))
            elif t.grading is None:
                ko = _KO_ODD.get((eps, epsp))
            if ko is None:
                warnings.append("sign triple matches no KO-dimension")

        order_zero = 0.0
        first_order = 0.0
        pairs = [(la, a, lb, b) for la, a in zip(labels, basis) for lb, b in zip(labels, basis)]
        pairs += [(("rand", i), a, ("rand", k), b)
                  for i, a in enumerate(randoms) for k, b in enumerate(randoms)][: 4 * samples]
        for la, a, lb, b in pairs:
            oz = rel_defect(t.pi(a) @ t.pi_opp(b), t.pi_opp(b) @ t.pi(a))
            order_zero = max(order_zero, oz)
            fo = t.first_order_defect(a, b)
            if fo > first_order:
                first_order = fo
                fo_witness = (la, lb)

    return AxiomReport(
        dirac_selfadjoint=dirac_sa,
        regularity=regularity,
        rep_homomorphism=rep_hom,
        rep_involution=rep_inv,
        rep_unital=rep_unital,
        rep_unit_is_projection=unit_proj,
        faithful=faithful,
        grading_hermitian=g_herm,
        grading_squares=g_sq,
        grading_commutes_algebra=g_comm,
        grading_anticommutes_dirac=g_anti,
        j_isometry=j_iso,
        epsilon=eps,
        epsilon_defect=eps_def,
        epsilon_prime=epsp,
        epsilon_prime_defect=epsp_def,
        epsilon_double_prime=epspp,
        epsilon_double_prime_defect=epspp_def,
        ko_dimension=ko,
        order_zero=order_zero,
        first_order=first_order,
        first_order_witness=fo_witness,
        warnings=tuple(warnings),
        tol=tol,
    )
