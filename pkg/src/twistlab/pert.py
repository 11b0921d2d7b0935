"""Twisted one-forms, perturbation semi-groups, and inner fluctuations.

A perturbation is a formal sum of pairs a_j (x) b_j in the enveloping algebra;
it is the semi-group element, and the non-linear fluctuation term depends on
this decomposition, not on the represented one-form alone.  Twisted
normalisation means sum_j a_j sigma(b_j) = e.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, Unitary
from .linalg import DEFAULT_TOL, Tolerance, dagger, rel_defect
from .triple import TwistedTriple

Pairs = tuple[tuple[AlgebraElement, AlgebraElement], ...]


def _coerce_pairs(shape: AlgebraShape, pairs) -> Pairs:
    out = []
    for a, b in pairs:
        if a.shape != shape or b.shape != shape:
            raise ValueError("pair element with mismatched algebra shape")
        out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class Perturbation:
    """Formal sum sum_j a_j (x) b_j^opp acting from both sides of an operator."""

    shape: AlgebraShape
    pairs: Pairs

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", _coerce_pairs(self.shape, self.pairs))

    def normalization_defect(self, sigma) -> float:
        acc = self.shape.zero()
        for a, b in self.pairs:
            acc = acc + a * sigma(b)
        return acc.defect(self.shape.unit())

    def is_normalized(self, sigma, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.normalization_defect(sigma) <= tol.abs_eps

    def elements(self) -> list[AlgebraElement]:
        return [x for pair in self.pairs for x in pair]


@dataclass(frozen=True)
class OppPerturbation:
    """Formal sum sum_j a_j^opp (x) b_j; normalised iff sum_j b_j sigma(a_j) = e."""

    shape: AlgebraShape
    pairs: Pairs

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", _coerce_pairs(self.shape, self.pairs))

    def normalization_defect(self, sigma) -> float:
        acc = self.shape.zero()
        for a, b in self.pairs:
            acc = acc + b * sigma(a)
        return acc.defect(self.shape.unit())

    def is_normalized(self, sigma, tol: Tolerance = DEFAULT_TOL) -> bool:
        return self.normalization_defect(sigma) <= tol.abs_eps


@dataclass(frozen=True)
class TwistedOneForm:
    op: np.ndarray
    source: Perturbation


def pert_unit(shape: AlgebraShape) -> Perturbation:
    e = shape.unit()
    return Perturbation(shape, ((e, e),))


def pert_mul(p: Perturbation, q: Perturbation) -> Perturbation:
    """Product in the enveloping algebra: (a (x) b^opp)(a' (x) b'^opp) = aa' (x) (b'b)^opp."""
    if p.shape != q.shape:
        raise ValueError("algebra shape mismatch")
    pairs = tuple((a * ap, bp * b) for a, b in p.pairs for ap, bp in q.pairs)
    return Perturbation(p.shape, pairs)


def opp_mul(p: OppPerturbation, q: OppPerturbation) -> OppPerturbation:
    """(a^opp (x) b)(a'^opp (x) b') = (a'a)^opp (x) bb'."""
    if p.shape != q.shape:
        raise ValueError("algebra shape mismatch")
    pairs = tuple((ap * a, b * bp) for a, b in p.pairs for ap, bp in q.pairs)
    return OppPerturbation(p.shape, pairs)


def normalize(t: TwistedTriple, p: Perturbation) -> Perturbation:
    """Append the pair (e - sum_j a_j sigma(b_j), e); eta is unchanged since delta(e) = 0."""
    e = p.shape.unit()
    acc = p.shape.zero()
    for a, b in p.pairs:
        acc = acc + a * t.sigma(b)
    return Perturbation(p.shape, p.pairs + ((e - acc, e),))


def eta(t: TwistedTriple, p: Perturbation) -> TwistedOneForm:
    """Represented twisted one-form sum_j pi(a_j) (D pi(b_j) - pi(sigma(b_j)) D)."""
    op = np.zeros((t.dim, t.dim), dtype=complex)
    for a, b in p.pairs:
        op += t.pi(a) @ t.twisted_commutator(b)
    return TwistedOneForm(op, p)


def eta_adjoint_pairs(t: TwistedTriple, p: Perturbation, tol: Tolerance = DEFAULT_TOL) -> Perturbation:
    """Pairs (b_j*, a_j*), realizing eta(p)^dagger; requires a twisted-normalised input."""
    if not p.is_normalized(t.sigma, tol):
        raise ValueError("adjoint pairs require a twisted-normalised perturbation")
    return Perturbation(p.shape, tuple((b.star(), a.star()) for a, b in p.pairs))


def eta_opp(t: TwistedTriple, p: OppPerturbation) -> np.ndarray:
    """sum_j pi_opp(a_j) [D, pi_opp(b_j)]_{sigma_opp}."""
    op = np.zeros((t.dim, t.dim), dtype=complex)
    for a, b in p.pairs:
        op += t.pi_opp(a) @ t.twisted_commutator_opp(b)
    return op


def opp_adjoint_pairs(t: TwistedTriple, p: OppPerturbation, tol: Tolerance = DEFAULT_TOL) -> OppPerturbation:
    if not p.is_normalized(t.sigma, tol):
        raise ValueError("adjoint pairs require a twisted-normalised perturbation")
    return OppPerturbation(p.shape, tuple((b.star(), a.star()) for a, b in p.pairs))


def hat_pert(t: TwistedTriple, p: Perturbation, tol: Tolerance = DEFAULT_TOL) -> OppPerturbation:
    """Image of p under the hat homomorphism: pairs (a_j*, b_j*) read in the opposite algebra."""
    t.require_real()
    if not p.is_normalized(t.sigma, tol):
        raise ValueError("hat requires a twisted-normalised perturbation")
    return OppPerturbation(p.shape, tuple((a.star(), b.star()) for a, b in p.pairs))


def p_of_u(t: TwistedTriple, u: Unitary) -> Perturbation:
    """Unitary embedding u -> sigma(u) (x) (u*)^opp."""
    return Perturbation(u.element.shape, ((t.sigma(u.element), u.element.star()),))


def p_opp_of_u(t: TwistedTriple, u: Unitary) -> OppPerturbation:
    """Opposite-side unitary embedding, pairs (sigma(u)*, u)."""
    return OppPerturbation(u.element.shape, ((t.sigma(u.element).star(), u.element),))


@dataclass(frozen=True)
class FluctuationReport:
    """Fluctuated operator D_omega = D + omega1 + omega1_hat + omega2 with diagnostics.

    first_order_defect is the max twisted-first-order defect over ordered pairs
    of the perturbation's second legs (the one-form generators); omega2
    vanishes when it does.
    """

    pert: Perturbation
    omega1: np.ndarray
    omega1_hat: np.ndarray
    omega2: np.ndarray
    d_omega: np.ndarray
    selfadjoint_omega1: bool
    selfadjoint_d_omega: bool
    j_compat_defect: float
    omega2_gate_defect: float
    first_order_defect: float


def fluctuate(t: TwistedTriple, p: Perturbation, tol: Tolerance = DEFAULT_TOL) -> FluctuationReport:
    """Twisted inner fluctuation including the non-linear term.

    omega2 is computed by two independent formulas, as a hat-twisted bracket of
    omega1 and as a plain-twisted bracket of omega1_hat; their agreement rests
    on the order-zero condition, so divergence signals a broken input.
    """
    real = t.require_real()
    if not p.is_normalized(t.sigma, tol):
        p = normalize(t, p)
    ep = t.epsilon_prime()

    omega1 = eta(t, p).op
    omega1_hat = ep * real.j.conjugate(omega1)
    omega2_a = np.zeros_like(omega1)
    omega2_b = np.zeros_like(omega1)
    for a, b in p.pairs:
        omega2_a += t.hat(a) @ t.bracket_hat(omega1, b)
        omega2_b += t.pi(a) @ (omega1_hat @ t.pi(b) - t.pi(t.sigma(b)) @ omega1_hat)
    gate = rel_defect(omega2_a, omega2_b)
    if gate > tol.abs_eps:
        raise ValueError(
            f"omega2 formulas diverge (defect {gate:.3e}); order-zero condition is likely broken"
        )
    d_omega = t.dirac + omega1 + omega1_hat + omega2_a

    sinv = t.sigma.inverse()
    legs = [b for _, b in p.pairs]
    deltas = [t.twisted_commutator(b) for b in legs]
    opps = [(t.pi_opp(b), t.pi_opp(sinv(b))) for b in legs]
    fo = 0.0
    for inner in deltas:
        n_inner = float(np.linalg.norm(inner))
        for op, op_twisted in opps:
            outer = inner @ op - op_twisted @ inner
            scale = max(1.0, n_inner, float(np.linalg.norm(op)))
            fo = max(fo, float(np.linalg.norm(outer)) / scale)
    return FluctuationReport(
        pert=p,
        omega1=omega1,
        omega1_hat=omega1_hat,
        omega2=omega2_a,
        d_omega=d_omega,
        selfadjoint_omega1=rel_defect(omega1, dagger(omega1)) <= tol.abs_eps,
        selfadjoint_d_omega=rel_defect(d_omega, dagger(d_omega)) <= tol.abs_eps,
        j_compat_defect=rel_defect(real.j.conjugate(d_omega), ep * d_omega),
        omega2_gate_defect=gate,
        first_order_defect=fo,
    )


def act_mu(t: TwistedTriple, p: Perturbation, target: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Action of p (x) hat(p) on an operator: sum_{j,i} a_j hat(a_i) T hat(b_i) b_j.

    For target = D this is the twisted fluctuation D_omega.
    """
    t.require_real()
    if not p.is_normalized(t.sigma, tol):
        raise ValueError("the combined action requires a twisted-normalised perturbation")
    target = np.asarray(target, dtype=complex)
    inner = np.zeros_like(target)
    for a, b in p.pairs:
        inner += t.hat(a) @ target @ t.hat(b)
    out = np.zeros_like(target)
    for a, b in p.pairs:
        out += t.pi(a) @ inner @ t.pi(b)
    return out
