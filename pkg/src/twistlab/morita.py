"""Export of twisted triples through finite projective modules.

The right module is e A^n (columns), the left module A^n e (rows), and the
real construction lives on e M_n(H) e.  Everything is realized inside concrete
matrix spaces as ranges of explicit projections, so every claimed identity is
testable as a matrix equation.

Module laws used throughout: for a one-form w, a.w = sigma(a) w and w.a = w a;
for an opposite one-form, a.w = w a^opp and w.a = sigma_opp(a^opp) w.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, AlgebraShape
from .linalg import DEFAULT_TOL, AntilinearOp, Tolerance, dagger, rel_defect
from .pert import OppPerturbation, eta_opp
from .triple import TwistedTriple


# ---------------------------------------------------------------------------
# matrices over the algebra and module vectors
# ---------------------------------------------------------------------------

AEntries = tuple[tuple[AlgebraElement, ...], ...]


@dataclass(frozen=True)
class AlgebraMatrix:
    """n x n matrix with entries in the algebra (houses idempotents and B = eM_n(A)e)."""

    shape: AlgebraShape
    entries: AEntries

    def __post_init__(self) -> None:
        n = len(self.entries)
        rows = []
        for row in self.entries:
            if len(row) != n:
                raise ValueError("algebra matrix must be square")
            for x in row:
                if x.shape != self.shape:
                    raise ValueError("entry with mismatched algebra shape")
            rows.append(tuple(row))
        object.__setattr__(self, "entries", tuple(rows))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __add__(self, other: AlgebraMatrix) -> AlgebraMatrix:
        self._compat(other)
        return AlgebraMatrix(self.shape, tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries)
        ))

    def __sub__(self, other: AlgebraMatrix) -> AlgebraMatrix:
        self._compat(other)
        return AlgebraMatrix(self.shape, tuple(
            tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries)
        ))

    def __mul__(self, other: AlgebraMatrix) -> AlgebraMatrix:
        self._compat(other)
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = self.shape.zero()
                for k in range(n):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(tuple(row))
        return AlgebraMatrix(self.shape, tuple(out))

    def _compat(self, other: AlgebraMatrix) -> None:
        if self.shape != other.shape or self.n != other.n:
            raise ValueError("algebra matrix mismatch")

    def star(self) -> AlgebraMatrix:
        """Transpose composed with the entrywise involution."""
        n = self.n
        return AlgebraMatrix(self.shape, tuple(
            tuple(self.entries[j][i].star() for j in range(n)) for i in range(n)
        ))

    def map(self, f) -> AlgebraMatrix:
        return AlgebraMatrix(self.shape, tuple(tuple(f(x) for x in row) for row in self.entries))

    def norm(self) -> float:
        return float(np.sqrt(sum(x.norm() ** 2 for row in self.entries for x in row)))

    def defect(self, other: AlgebraMatrix) -> float:
        scale = max(1.0, self.norm(), other.norm())
        return (self - other).norm() / scale


def amat_unit(shape: AlgebraShape, n: int) -> AlgebraMatrix:
    e, z = shape.unit(), shape.zero()
    return AlgebraMatrix(shape, tuple(
        tuple(e if i == j else z for j in range(n)) for i in range(n)
    ))


def amat_random(shape: AlgebraShape, n: int, rng: np.random.Generator, scale: float = 1.0) -> AlgebraMatrix:
    return AlgebraMatrix(shape, tuple(
        tuple(shape.random_element(rng, scale) for _ in range(n)) for _ in range(n)
    ))


ModuleVector = tuple[AlgebraElement, ...]


def apply_matrix(m: AlgebraMatrix, xi: ModuleVector) -> ModuleVector:
    n = m.n
    return tuple(
        sum((m.entries[i][k] * xi[k] for k in range(1, n)), m.entries[i][0] * xi[0])
        for i in range(n)
    )


def apply_matrix_right(xi: ModuleVector, m: AlgebraMatrix) -> ModuleVector:
    """Row vector times matrix: (xi m)^i = sum_k xi^k m_k^i."""
    n = m.n
    return tuple(
        sum((xi[k] * m.entries[k][i] for k in range(1, n)), xi[0] * m.entries[0][i])
        for i in range(n)
    )


def random_module_vector(e: AlgebraMatrix, rng: np.random.Generator, scale: float = 1.0) -> ModuleVector:
    raw = tuple(e.shape.random_element(rng, scale) for _ in range(e.n))
    return apply_matrix(e, raw)


def random_row_vector(e: AlgebraMatrix, rng: np.random.Generator, scale: float = 1.0) -> ModuleVector:
    raw = tuple(e.shape.random_element(rng, scale) for _ in range(e.n))
    return apply_matrix_right(raw, e)


def inner_product(xp: ModuleVector, x: ModuleVector) -> AlgebraElement:
    """(xi', xi) = sum_i xi'_i* xi_i."""
    acc = xp[0].star() * x[0]
    for a, b in zip(xp[1:], x[1:]):
        acc = acc + a.star() * b
    return acc


# ---------------------------------------------------------------------------
# idempotent checks and lifts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdempotentData:
    matrix: AlgebraMatrix

    @property
    def n(self) -> int:
        return self.matrix.n


@dataclass(frozen=True)
class IdempotentReport:
    idempotent_defect: float
    selfadjoint_defect: float
    lift_defect: float            # || e sigma(e) e - e ||
    lift_inverse_defect: float    # || e sigma^{-1}(e) e - e ||
    twist_invariance_defect: float
    twist_commutation_defect: float
    tol: Tolerance = DEFAULT_TOL

    @property
    def twist_invariant(self) -> bool:
        return self.twist_invariance_defect <= self.tol.abs_eps

    @property
    def twist_commuting(self) -> bool:
        return self.twist_commutation_defect <= self.tol.abs_eps

    @property
    def lift_invertible(self) -> bool:
        return max(self.lift_defect, self.lift_inverse_defect) <= self.tol.abs_eps

    @property
    def passes(self) -> bool:
        eps = self.tol.abs_eps
        return (
            max(self.idempotent_defect, self.selfadjoint_defect) <= eps
            and self.lift_invertible
            and (self.twist_invariant or self.twist_commuting)
        )


def check_idempotent(t: TwistedTriple, e: IdempotentData, tol: Tolerance = DEFAULT_TOL) -> IdempotentReport:
    m = e.matrix
    sig = m.map(t.sigma)
    sig_inv = m.map(t.sigma.inverse())
    tc = max(
        (float(np.linalg.norm(t.twisted_commutator(x))) for row in m.entries for x in row),
        default=0.0,
    )
    return IdempotentReport(
        idempotent_defect=(m * m).defect(m),
        selfadjoint_defect=m.star().defect(m),
        lift_defect=(m * sig * m).defect(m),
        lift_inverse_defect=(m * sig_inv * m).defect(m),
        twist_invariance_defect=sig.defect(m),
        twist_commutation_defect=tc / max(1.0, m.norm()),
        tol=tol,
    )


@dataclass(frozen=True)
class ModuleLift:
    """Lift of the twist to e A^n and to B = e M_n(A) e."""

    triple: TwistedTriple
    idempotent: IdempotentData
    report: IdempotentReport

    def _proj(self, xi: ModuleVector) -> ModuleVector:
        return apply_matrix(self.idempotent.matrix, xi)

    def sigma_lift(self, xi: ModuleVector) -> ModuleVector:
        return self._proj(tuple(self.triple.sigma(x) for x in xi))

    def sigma_lift_inv(self, xi: ModuleVector) -> ModuleVector:
        inv = self.triple.sigma.inverse()
        return self._proj(tuple(inv(x) for x in xi))

    def sigma_prime(self, b: AlgebraMatrix) -> AlgebraMatrix:
        e = self.idempotent.matrix
        return e * b.map(self.triple.sigma) * e

    def sigma_prime_inv(self, b: AlgebraMatrix) -> AlgebraMatrix:
        e = self.idempotent.matrix
        return e * b.map(self.triple.sigma.inverse()) * e


def lift_maps(
    t: TwistedTriple, e: IdempotentData, tol: Tolerance = DEFAULT_TOL, samples: int = 5
) -> ModuleLift:
    report = check_idempotent(t, e, tol)
    if max(report.idempotent_defect, report.selfadjoint_defect) > tol.abs_eps:
        raise ValueError("not a selfadjoint idempotent: e*e = e = e^dagger fails")
    if not report.lift_invertible:
        raise ValueError("lift of the twist is not invertible: e sigma(e) e = e fails")
    if not (report.twist_invariant or report.twist_commuting):
        raise ValueError(
            "idempotent is neither twist-invariant (sigma(e)=e) nor twist-commuting (delta(e)=0)"
        )
    lift = ModuleLift(t, e, report)
    # spot-check the lift laws on random data; guaranteed by the preconditions
    rng = np.random.default_rng(0)
    em = e.matrix
    eps = tol.abs_eps
    for _ in range(samples):
        xi = random_module_vector(em, rng)
        a = t.shape.random_element(rng)
        moved = lift.sigma_lift(tuple(x * a for x in xi))
        expected = tuple(s * t.sigma(a) for s in lift.sigma_lift(xi))
        if any(m.defect(x) > eps for m, x in zip(moved, expected)):
            raise ValueError("lift does not intertwine the module action with the twist")
        back = lift.sigma_lift_inv(lift.sigma_lift(xi))
        if any(b.defect(x) > eps for b, x in zip(back, xi)):
            raise ValueError("lift roundtrip is not the identity on the module")
        b, c = _random_b(em, rng), _random_b(em, rng)
        if lift.sigma_prime(b * c).defect(lift.sigma_prime(b) * lift.sigma_prime(c)) > eps:
            raise ValueError("lifted twist is not multiplicative on the endomorphism algebra")
        if lift.sigma_prime_inv(lift.sigma_prime(b)).defect(b) > eps:
            raise ValueError("lifted twist roundtrip fails on the endomorphism algebra")
        if check_regularity_holds(t, tol) and \
                lift.sigma_prime(b.star()).defect(lift.sigma_prime_inv(b).star()) > eps:
            raise ValueError("lifted twist loses the regularity property")
    return lift


def check_regularity_holds(t: TwistedTriple, tol: Tolerance = DEFAULT_TOL) -> bool:
    from .algebra import check_regularity

    return check_regularity(t.sigma, samples=3, tol=tol).passes


# ---------------------------------------------------------------------------
# connections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Connection:
    """Grassmann connection plus a matrix of represented one-form operators.

    side "right": entries m_i^j are twisted one-forms on e A^n; side "left":
    entries are opposite one-forms on A^n e.  Hermiticity is a checked
    property (see check_hermitian), demanded by the triple builders.
    """

    side: str
    idempotent: IdempotentData
    one_forms: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self) -> None:
        if self.side not in ("right", "left"):
            raise ValueError("side must be 'right' or 'left'")
        n = self.idempotent.n
        if len(self.one_forms) != n or any(len(r) != n for r in self.one_forms):
            raise ValueError("one-form matrix must be n x n")
        object.__setattr__(self, "one_forms", tuple(
            tuple(np.asarray(x, dtype=complex) for x in row) for row in self.one_forms
        ))

    @property
    def n(self) -> int:
        return self.idempotent.n

    def is_grassmann(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return all(float(np.linalg.norm(x)) <= tol.abs_eps for row in self.one_forms for x in row)


def grassmann(t: TwistedTriple, e: IdempotentData, side: str = "right") -> Connection:
    zero = np.zeros((t.dim, t.dim), dtype=complex)
    n = e.n
    return Connection(side, e, tuple(tuple(zero for _ in range(n)) for _ in range(n)))


def connection_with(t: TwistedTriple, e: IdempotentData, one_forms, side: str = "right") -> Connection:
    return Connection(side, e, tuple(tuple(np.asarray(x, complex) for x in row) for row in one_forms))


def apply_connection(
    t: TwistedTriple, conn: Connection, xi: ModuleVector
) -> list[tuple[ModuleVector, np.ndarray]]:
    """Snyder decomposition of nabla(xi): list of (module vector, one-form operator).

    Right side only; the Grassmann part contributes (e-columns, delta(xi_j)) and
    the one-form matrix part (e-columns, sum_k m_j^k pi(xi_k)).
    """
    if conn.side != "right":
        raise ValueError("apply_connection handles right connections")
    e = conn.idempotent.matrix
    n = conn.n
    out = []
    for j in range(n):
        col = tuple(e.entries[i][j] for i in range(n))
        op = t.twisted_commutator(xi[j])
        for k in range(n):
            op = op + conn.one_forms[j][k] @ t.pi(xi[k])
        out.append((col, op))
    return out


def apply_connection_left(
    t: TwistedTriple, conn: Connection, zeta: ModuleVector
) -> list[tuple[np.ndarray, ModuleVector]]:
    """Snyder decomposition of nabla_opp(zeta) on A^n e: list of (opposite one-form op, row vector)."""
    if conn.side != "left":
        raise ValueError("apply_connection_left handles left connections")
    e = conn.idempotent.matrix
    n = conn.n
    out = []
    for j in range(n):
        row = tuple(e.entries[j][i] for i in range(n))
        op = t.twisted_commutator_opp(zeta[j])
        for k in range(n):
            op = op + conn.one_forms[k][j] @ t.pi_opp(zeta[k])
        out.append((op, row))
    return out


@dataclass(frozen=True)
class HermiticityReport:
    identity_defect: float
    selfadjoint_defect: float     # one-form matrix vs its Omega-involution transpose
    sandwich_defect: float        # e . M . e = M under the twisted module law
    tol: Tolerance = DEFAULT_TOL

    @property
    def passes(self) -> bool:
        eps = self.tol.abs_eps
        return max(self.identity_defect, self.selfadjoint_defect, self.sandwich_defect) <= eps


def _sandwich_right(t: TwistedTriple, e: AlgebraMatrix, m) -> list[list[np.ndarray]]:
    """e . M . e with a.w = sigma(a) w on the left and w.a = w a on the right."""
    n = e.n
    left = [[sum(t.pi(t.sigma(e.entries[i][k])) @ m[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)]
    return [[sum(left[i][k] @ t.pi(e.entries[k][j]) for k in range(n)) for j in range(n)]
            for i in range(n)]


def _sandwich_left(t: TwistedTriple, e: AlgebraMatrix, m) -> list[list[np.ndarray]]:
    """e . N . e for opposite one-forms: a.w = w pi_opp(a), w.a = pi_opp(sigma^{-1}(a)) w."""
    n = e.n
    sinv = t.sigma.inverse()
    right = [[sum(t.pi_opp(sinv(e.entries[k][j])) @ m[i][k] for k in range(n)) for j in range(n)]
             for i in range(n)]
    return [[sum(right[k][j] @ t.pi_opp(e.entries[i][k]) for k in range(n)) for j in range(n)]
            for i in range(n)]


def check_hermitian(
    t: TwistedTriple,
    conn: Connection,
    samples: int = 10,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
) -> HermiticityReport:
    """Hermiticity identity over sampled module vectors plus the structure of the one-form matrix."""
    rng = np.random.default_rng(seed)
    e = conn.idempotent.matrix
    n = conn.n
    m = conn.one_forms

    sa = max(rel_defect(dagger(m[i][j]), m[j][i]) for i in range(n) for j in range(n))
    sandwich = _sandwich_right(t, e, m) if conn.side == "right" else _sandwich_left(t, e, m)
    sw = max(rel_defect(sandwich[i][j], m[i][j]) for i in range(n) for j in range(n))

    worst = 0.0
    sinv = t.sigma.inverse()
    for _ in range(samples):
        if conn.side == "right":
            xi = random_module_vector(e, rng)
            xip = random_module_vector(e, rng)
            # (xi', nabla xi) - (nabla(Sigma^{-1} xi'), xi) = delta((xi', xi))
            lhs = np.zeros((t.dim, t.dim), complex)
            for x0, om in apply_connection(t, conn, xi):
                lhs += t.pi(t.sigma(inner_product(xip, x0))) @ om
            sxi = apply_matrix(e, tuple(sinv(x) for x in xip))
            for x0, om in apply_connection(t, conn, sxi):
                lhs -= dagger(om) @ t.pi(inner_product(x0, xi))
            rhs = t.twisted_commutator(inner_product(xip, xi))
            worst = max(worst, rel_defect(lhs, rhs))
        else:
            zeta = random_row_vector(e, rng)     # rows of A^n e: zeta e = zeta
            zetap = random_row_vector(e, rng)
            # -{zeta', nabla(Sigma_opp zeta)} + {nabla zeta', zeta} = delta_opp({zeta', zeta})
            pairing = lambda zp, z: sum(
                (zp[i] * z[i].star() for i in range(1, n)), zp[0] * z[0].star()
            )
            szeta = apply_matrix_right(tuple(t.sigma(z) for z in zeta), e)
            lhs = np.zeros((t.dim, t.dim), complex)
            for om, z0 in apply_connection_left(t, conn, szeta):
                lhs -= dagger(om) @ t.pi_opp(pairing(zetap, z0))
            for om, z0 in apply_connection_left(t, conn, zetap):
                lhs += t.pi_opp(sinv(pairing(z0, zeta))) @ om
            rhs = t.twisted_commutator_opp(pairing(zetap, zeta))
            worst = max(worst, rel_defect(lhs, rhs))
    return HermiticityReport(worst, sa, sw, tol)


def conjugate_connection(t: TwistedTriple, conn: Connection, tol: Tolerance = DEFAULT_TOL) -> Connection:
    """Conjugate of a right connection on the conjugate module: entries eps' J m_k^r J^{-1} transposed."""
    if conn.side != "right":
        raise ValueError("conjugation starts from a right connection")
    real = t.require_real()
    if _triple_first_order_defect(t) > tol.abs_eps:
        raise ValueError("conjugation requires first order")
    ep = t.epsilon_prime()
    n = conn.n
    entries = tuple(
        tuple(ep * real.j.conjugate(conn.one_forms[k][r]) for k in range(n)) for r in range(n)
    )
    return Connection("left", conn.idempotent, entries)


def _triple_first_order_defect(t: TwistedTriple) -> float:
    worst = 0.0
    for _, a in t.shape.basis():
        for _, b in t.shape.basis():
            worst = max(worst, t.first_order_defect(a, b))
    return worst


# ---------------------------------------------------------------------------
# block operators on H^n and M_n(H)
# ---------------------------------------------------------------------------


def _blk_pi(t: TwistedTriple, m: AlgebraMatrix) -> np.ndarray:
    n, d = m.n, t.dim
    out = np.zeros((n * d, n * d), complex)
    for i in range(n):
        for j in range(n):
            out[i * d:(i + 1) * d, j * d:(j + 1) * d] = t.pi(m.entries[i][j])
    return out


def _blk_ops(ops, d: int) -> np.ndarray:
    n = len(ops)
    out = np.zeros((n * d, n * d), complex)
    for i in range(n):
        for j in range(n):
            out[i * d:(i + 1) * d, j * d:(j + 1) * d] = ops[i][j]
    return out


def _blk_right(t: TwistedTriple, m: AlgebraMatrix) -> np.ndarray:
    """Right multiplication on row vectors: (Phi m)^j = sum_l pi_opp(m_l^j) psi^l."""
    n, d = m.n, t.dim
    out = np.zeros((n * d, n * d), complex)
    for j in range(n):
        for l in range(n):
            out[j * d:(j + 1) * d, l * d:(l + 1) * d] = t.pi_opp(m.entries[l][j])
    return out


# ---------------------------------------------------------------------------
# right and left Morita triples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RightTriple:
    """(B, H_R, D_R), sigma' with H_R = e H^n realized as the range of a projection."""

    triple: TwistedTriple
    lift: ModuleLift
    connection: Connection
    projection: np.ndarray
    d_r: np.ndarray
    report: "MoritaTripleReport | None" = None

    def pi_r(self, b: AlgebraMatrix) -> np.ndarray:
        return _blk_pi(self.triple, b) @ self.projection

    def bracket(self, b: AlgebraMatrix) -> np.ndarray:
        """[D_R, pi_R(b)]_{sigma'} as an ambient matrix."""
        return self.d_r @ self.pi_r(b) - self.pi_r(self.lift.sigma_prime(b)) @ self.d_r


@dataclass(frozen=True)
class LeftTriple:
    """(B, H_L, D_L), sigma'^{-1} with H_L = H^n e (rows) in the same ambient space."""

    triple: TwistedTriple
    lift: ModuleLift
    connection: Connection
    projection: np.ndarray
    d_l: np.ndarray
    report: "MoritaTripleReport | None" = None

    def pi_l(self, b: AlgebraMatrix) -> np.ndarray:
        return _blk_right(self.triple, b) @ self.projection

    def bracket(self, b: AlgebraMatrix) -> np.ndarray:
        return self.d_l @ self.pi_l(b) - self.pi_l(self.lift.sigma_prime_inv(b)) @ self.d_l


def _require_hermitian(t: TwistedTriple, conn: Connection, tol: Tolerance) -> None:
    report = check_hermitian(t, conn, tol=tol)
    if not report.passes:
        raise ValueError(
            "connection is not hermitian "
            f"(identity {report.identity_defect:.2e}, selfadjoint {report.selfadjoint_defect:.2e})"
        )


def build_right_triple(
    t: TwistedTriple, e: IdempotentData, conn: Connection, tol: Tolerance = DEFAULT_TOL
) -> RightTriple:
    lift = lift_maps(t, e, tol)
    if conn.side != "right":
        raise ValueError("right triple needs a right connection")
    _require_hermitian(t, conn, tol)
    em = e.matrix
    d = t.dim
    proj = _blk_pi(t, em)
    amp_d = np.kron(np.eye(e.n), t.dirac)
    m_blk = _blk_ops(conn.one_forms, d)
    d_r = _blk_pi(t, em * em.map(t.sigma)) @ (amp_d + m_blk) @ proj
    rt = RightTriple(t, lift, conn, proj, d_r)
    report = check_morita_triple(rt, samples=4, tol=tol)
    if not report.passes:
        raise ValueError(f"exported right triple fails verification: {report}")
    object.__setattr__(rt, "report", report)
    return rt


def build_left_triple(
    t: TwistedTriple, e: IdempotentData, conn: Connection, tol: Tolerance = DEFAULT_TOL
) -> LeftTriple:
    lift = lift_maps(t, e, tol)
    if conn.side != "left":
        raise ValueError("left triple needs a left connection")
    _require_hermitian(t, conn, tol)
    em = e.matrix
    n, d = e.n, t.dim
    proj = _blk_right(t, em)
    amp_d = np.kron(np.eye(n), t.dirac)
    # (Phi N)^l = sum_j N_j^l psi^j: block (l, j) carries the (j, l) one-form
    n_blk = np.zeros((n * d, n * d), complex)
    for l in range(n):
        for j in range(n):
            n_blk[l * d:(l + 1) * d, j * d:(j + 1) * d] = conn.one_forms[j][l]
    d_l = _blk_right(t, em.map(t.sigma.inverse()) * em) @ (amp_d + n_blk) @ proj
    lt = LeftTriple(t, lift, conn, proj, d_l)
    report = check_morita_triple(lt, samples=4, tol=tol)
    if not report.passes:
        raise ValueError(f"exported left triple fails verification: {report}")
    object.__setattr__(lt, "report", report)
    return lt


@dataclass(frozen=True)
class MoritaTripleReport:
    selfadjoint_defect: float
    bracket_identity_defect: float | None   # right side only
    sigma_prime_multiplicative: float
    sigma_prime_regularity: float
    rep_homomorphism: float
    rep_involution: float
    tol: Tolerance = DEFAULT_TOL

    @property
    def passes(self) -> bool:
        eps = self.tol.abs_eps
        vals = [self.selfadjoint_defect, self.sigma_prime_multiplicative,
                self.sigma_prime_regularity, self.rep_homomorphism, self.rep_involution]
        if self.bracket_identity_defect is not None:
            vals.append(self.bracket_identity_defect)
        return max(vals) <= eps


def _random_b(e: AlgebraMatrix, rng: np.random.Generator) -> AlgebraMatrix:
    return e * amat_random(e.shape, e.n, rng, 0.7) * e


def check_morita_triple(
    rt: RightTriple | LeftTriple,
    samples: int = 10,
    seed: int = 0,
    tol: Tolerance = DEFAULT_TOL,
) -> MoritaTripleReport:
    """Twisted-triple axiom suite for an exported triple, at the representation level."""
    t = rt.triple
    e = rt.lift.idempotent.matrix
    rng = np.random.default_rng(seed)
    proj = rt.projection
    dd = rt.d_r if isinstance(rt, RightTriple) else rt.d_l
    rep = rt.pi_r if isinstance(rt, RightTriple) else rt.pi_l
    sp = rt.lift.sigma_prime
    sp_inv = rt.lift.sigma_prime_inv

    sa = rel_defect(proj @ dd @ proj, dagger(proj @ dd @ proj))
    mult = reg = hom = inv = 0.0
    bracket_id = 0.0 if isinstance(rt, RightTriple) else None
    d = t.dim
    amp_d = np.kron(np.eye(e.n), t.dirac)
    m_blk = _blk_ops(rt.connection.one_forms, d)
    for _ in range(samples):
        b, c = _random_b(e, rng), _random_b(e, rng)
        mult = max(mult, sp(b * c).defect(sp(b) * sp(c)))
        reg = max(reg, sp(b.star()).defect(sp_inv(b).star()))
        # pi_L is an anti-representation: pi_L(b) pi_L(c) = pi_L(c b)
        prod = b * c if isinstance(rt, RightTriple) else c * b
        hom = max(hom, rel_defect(rep(b) @ rep(c), rep(prod)))
        inv = max(inv, rel_defect(dagger(proj @ rep(b) @ proj), proj @ rep(b.star()) @ proj))
        if isinstance(rt, RightTriple):
            inner = (amp_d + m_blk) @ _blk_pi(t, b) - _blk_pi(t, b.map(t.sigma)) @ (amp_d + m_blk)
            rhs = _blk_pi(t, e) @ inner @ proj
            bracket_id = max(bracket_id, rel_defect(rt.bracket(b) @ proj, rhs))
    return MoritaTripleReport(sa, bracket_id, mult, reg, hom, inv, tol)


# ---------------------------------------------------------------------------
# the real construction on e M_n(H) e
# ---------------------------------------------------------------------------


def _left_op_alg(t: TwistedTriple, m: AlgebraMatrix) -> np.ndarray:
    """(X Psi)_i^j = sum_k pi(X_i^k) Psi_k^j on M_n(H) flattened as (i, j, H)."""
    n, d = m.n, t.dim
    out = np.zeros((n * n * d, n * n * d), complex)
    for i in range(n):
        for k in range(n):
            blk = t.pi(m.entries[i][k])
            for j in range(n):
                r, c = (i * n + j) * d, (k * n + j) * d
                out[r:r + d, c:c + d] += blk
    return out


def _right_op_alg(t: TwistedTriple, m: AlgebraMatrix) -> np.ndarray:
    """(Psi X)_i^j = sum_l pi_opp(X_l^j) Psi_i^l."""
    n, d = m.n, t.dim
    out = np.zeros((n * n * d, n * n * d), complex)
    for j in range(n):
        for l in range(n):
            blk = t.pi_opp(m.entries[l][j])
            for i in range(n):
                r, c = (i * n + j) * d, (i * n + l) * d
                out[r:r + d, c:c + d] += blk
    return out


def _left_op(ops, n: int, d: int) -> np.ndarray:
    out = np.zeros((n * n * d, n * n * d), complex)
    for i in range(n):
        for k in range(n):
            for j in range(n):
                r, c = (i * n + j) * d, (k * n + j) * d
                out[r:r + d, c:c + d] += ops[i][k]
    return out


def _right_op(ops, n: int, d: int) -> np.ndarray:
    """(Psi Y)_i^j = sum_l Y_l^j Psi_i^l with operator entries Y[l][j]."""
    out = np.zeros((n * n * d, n * n * d), complex)
    for j in range(n):
        for l in range(n):
            for i in range(n):
                r, c = (i * n + j) * d, (i * n + l) * d
                out[r:r + d, c:c + d] += ops[l][j]
    return out


@dataclass(frozen=True)
class RealTriple:
    """(B, H', D'), sigma', J', Gamma' with H' = e M_n(H) e."""

    triple: TwistedTriple
    lift: ModuleLift
    connection: Connection
    projection: np.ndarray
    d_prime: np.ndarray
    d_second: np.ndarray
    j_prime: AntilinearOp
    gamma_prime: np.ndarray
    report: "RealTripleReport | None" = None

    def pi_prime(self, b: AlgebraMatrix) -> np.ndarray:
        return _left_op_alg(self.triple, b) @ self.projection

    def pi_prime_opp(self, c: AlgebraMatrix) -> np.ndarray:
        return _right_op_alg(self.triple, c) @ self.projection


def build_real_triple(
    t: TwistedTriple, e: IdempotentData, conn: Connection, tol: Tolerance = DEFAULT_TOL
) -> RealTriple:
    """Real, graded export through e A^n; demands the first-order condition on the input.

    The self-Morita case without first order is handled by the fluctuation
    machinery in `pert` instead.
    """
    if t.real is None or t.grading is None:
        raise ValueError("real construction requires a real, graded triple")
    if _triple_first_order_defect(t) > tol.abs_eps:
        raise ValueError("real construction requires the twisted first-order condition")
    lift = lift_maps(t, e, tol)
    if conn.side != "right":
        raise ValueError("real construction starts from a right connection")
    _require_hermitian(t, conn, tol)

    em = e.matrix
    n, d = e.n, t.dim
    ep = t.epsilon_prime()
    j = t.real.j

    proj = _left_op_alg(t, em) @ _right_op_alg(t, em)
    e_sig_e = em * em.map(t.sigma)
    sinv_e_e = em.map(t.sigma.inverse()) * em
    d_full = np.kron(np.eye(n * n), t.dirac)

    # connection entries of nabla(e-columns): delta(e_p^k) + (M e)_p^k
    m = conn.one_forms
    me = [[sum(m[p][r] @ t.pi(em.entries[r][k]) for r in range(n)) for k in range(n)]
          for p in range(n)]
    w = [[t.twisted_commutator(em.entries[p][k]) + me[p][k] for k in range(n)] for p in range(n)]

    term12 = _right_op_alg(t, sinv_e_e) @ _left_op_alg(t, e_sig_e) @ (d_full + _left_op(w, n, d))
    v = [[ep * j.conjugate(w[p][l]) for p in range(n)] for l in range(n)]
    term3 = _left_op_alg(t, e_sig_e) @ _right_op_alg(t, sinv_e_e) @ _right_op(v, n, d)
    d_prime = (term12 + term3) @ proj

    # left-then-right assembly with the conjugate connection entries eps' J m^T J^{-1}
    n_ops = [[ep * j.conjugate(m[l][r]) for l in range(n)] for r in range(n)]
    d_second = (
        _left_op_alg(t, e_sig_e) @ _right_op_alg(t, sinv_e_e)
        @ (d_full + _right_op(n_ops, n, d) + _left_op(w, n, d)) @ proj
    )

    jp = np.zeros((n * n * d, n * n * d), complex)
    for i in range(n):
        for jj in range(n):
            r, c = (i * n + jj) * d, (jj * n + i) * d
            jp[r:r + d, c:c + d] = j.mat
    gamma_p = np.kron(np.eye(n * n), t.grading)
    rt = RealTriple(t, lift, conn, proj, d_prime, d_second, AntilinearOp(jp), gamma_p)
    report = check_real_triple(rt, samples=4, tol=tol)
    if not report.passes:
        raise ValueError(f"exported real triple fails verification: {report}")
    object.__setattr__(rt, "report", report)
    return rt


@dataclass(frozen=True)
class RealTripleReport:
    selfadjoint_defect: float
    d_second_defect: float
    order_zero: float
    first_order: float
    j_squared_sign: int | None
    j_dirac_sign: int | None
    j_grading_sign: int | None
    ko_dimension: int | None
    tol: Tolerance = DEFAULT_TOL

    @property
    def passes(self) -> bool:
        eps = self.tol.abs_eps
        return (
            max(self.selfadjoint_defect, self.d_second_defect, self.order_zero, self.first_order) <= eps
            and None not in (self.j_squared_sign, self.j_dirac_sign, self.j_grading_sign)
        )


def check_real_triple(
    rt: RealTriple, samples: int = 8, seed: int = 0, tol: Tolerance = DEFAULT_TOL
) -> RealTripleReport:
    from .triple import _KO_GRADED

    t = rt.triple
    e = rt.lift.idempotent.matrix
    rng = np.random.default_rng(seed)
    proj, dp, jp, gp = rt.projection, rt.d_prime, rt.j_prime, rt.gamma_prime
    eye = np.eye(proj.shape[0])

    sa = rel_defect(proj @ dp @ proj, dagger(proj @ dp @ proj))
    dsec = rel_defect(dp, rt.d_second)

    # sign detection restricted to the subspace
    def sub_sign(transformed, original):
        dplus = rel_defect(transformed @ proj, original @ proj)
        dminus = rel_defect(transformed @ proj, -original @ proj)
        if min(dplus, dminus) > tol.abs_eps:
            return None
        return 1 if dplus <= dminus else -1

    s_eps = sub_sign(jp.squared(), eye)
    s_epsp = sub_sign(jp.mat @ np.conj(dp) @ jp.inv_mat, dp)
    s_epspp = sub_sign(jp.mat @ np.conj(gp) @ jp.inv_mat, gp)
    ko = _KO_GRADED.get((s_eps, s_epsp, s_epspp)) if None not in (s_eps, s_epsp, s_epspp) else None

    oz = fo = 0.0
    sp, sp_inv = rt.lift.sigma_prime, rt.lift.sigma_prime_inv
    for _ in range(samples):
        b, c = _random_b(e, rng), _random_b(e, rng)
        pb, pc = rt.pi_prime(b), rt.pi_prime_opp(c)
        oz = max(oz, rel_defect(pb @ pc @ proj, pc @ pb @ proj))
        x = dp @ pb - rt.pi_prime(sp(b)) @ dp
        outer = x @ pc - rt.pi_prime_opp(sp_inv(c)) @ x
        fo = max(fo, float(np.linalg.norm(outer @ proj)) / max(1.0, float(np.linalg.norm(x))))
    return RealTripleReport(sa, dsec, oz, fo, s_eps, s_epsp, s_epspp, ko, tol)


def opp_one_form_action_corrected(
    t: TwistedTriple, q: OppPerturbation, base_one_form: np.ndarray
) -> np.ndarray:
    """Self-Morita action of an opposite one-form without first order.

    Returns eta_opp(q) plus the correction sum_j pi_opp(a_j)[w, pi_opp(b_j)]_{sigma_opp}
    with w the base (right) fluctuation one-form; this is exactly the non-linear
    term mechanism used by the fluctuation in `pert`.
    """
    out = eta_opp(t, q)
    for a, b in q.pairs:
        out += t.pi_opp(a) @ t.bracket_sigma_opp(base_one_form, b)
    return out
