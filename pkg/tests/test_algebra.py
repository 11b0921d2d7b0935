import numpy as np
import pytest

from twistlab.algebra import (
    AlgebraElement,
    AlgebraShape,
    Automorphism,
    Unitary,
    check_regularity,
    compose,
    identity_automorphism,
)

SHAPE = AlgebraShape((1, 2))          # C + M2(C)
DOUBLE = AlgebraShape((1, 2, 1, 2))   # (C + M2) + (C + M2), for the flip


def flip_double():
    conj = tuple(np.eye(n, dtype=complex) for n in DOUBLE.block_dims)
    return Automorphism(DOUBLE, (2, 3, 0, 1), conj)


def random_inner_m2(rng, unitary=False):
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    if unitary:
        q, r = np.linalg.qr(x)
        x = q @ np.diag(np.exp(1j * np.angle(np.diag(r))))
    else:
        x = x + 2.0 * np.eye(2)  # keep it comfortably invertible
    return Automorphism(SHAPE, (0, 1), (np.eye(1, dtype=complex), x))


class TestElementOps:
    def test_unit_law(self):
        rng = np.random.default_rng(1)
        a = SHAPE.random_element(rng)
        assert (SHAPE.unit() * a).defect(a) == 0.0
        assert (a * SHAPE.unit()).defect(a) == 0.0

    def test_star_involutive(self):
        a = SHAPE.random_element(np.random.default_rng(2))
        assert a.star().star().defect(a) == 0.0

    def test_star_antimultiplicative_blockwise_oracle(self):
        rng = np.random.default_rng(3)
        a, b = SHAPE.random_element(rng), SHAPE.random_element(rng)
        lhs = (a * b).star()
        rhs = b.star() * a.star()
        # entrywise oracle, block by block
        for la, lb, ba, bb in zip(lhs.blocks, rhs.blocks, a.blocks, b.blocks):
            assert np.allclose(la, np.conj((ba @ bb).T), atol=1e-12)
            assert np.allclose(la, lb, atol=1e-12)

    def test_shape_mismatch(self):
        other = AlgebraShape((2, 1))
        with pytest.raises(ValueError):
            SHAPE.unit() * other.unit()


class TestAutomorphism:
    def test_identity(self):
        rng = np.random.default_rng(4)
        a = SHAPE.random_element(rng)
        assert identity_automorphism(SHAPE)(a).defect(a) == 0.0

    def test_flip_swaps_halves(self):
        rng = np.random.default_rng(5)
        x, y = SHAPE.random_element(rng), SHAPE.random_element(rng)
        a = AlgebraElement(DOUBLE, x.blocks + y.blocks)
        flipped = flip_double()(a)
        assert flipped.defect(AlgebraElement(DOUBLE, y.blocks + x.blocks)) == 0.0

    def test_inner_multiplicative_on_50_pairs(self):
        rng = np.random.default_rng(6)
        sigma = random_inner_m2(rng)
        for _ in range(50):
            a, b = SHAPE.random_element(rng), SHAPE.random_element(rng)
            assert sigma(a * b).defect(sigma(a) * sigma(b)) <= 1e-12

    def test_unit_preserved(self):
        rng = np.random.default_rng(7)
        sigma = random_inner_m2(rng)
        assert sigma(SHAPE.unit()).defect(SHAPE.unit()) <= 1e-12
        assert flip_double()(DOUBLE.unit()).defect(DOUBLE.unit()) == 0.0

    def test_inverse_identity_and_flip(self):
        ident = identity_automorphism(SHAPE)
        assert ident.inverse().is_identity()
        flip = flip_double()
        rng = np.random.default_rng(8)
        a = DOUBLE.random_element(rng)
        assert flip.inverse()(a).defect(flip(a)) == 0.0  # flip is involutive

    def test_inverse_roundtrip_50(self):
        rng = np.random.default_rng(9)
        sigma = random_inner_m2(rng)
        inv = sigma.inverse()
        for _ in range(50):
            a = SHAPE.random_element(rng)
            assert inv(sigma(a)).defect(a) <= 1e-12
            assert sigma(inv(a)).defect(a) <= 1e-12

    def test_composition_matches_pointwise_on_basis(self):
        rng = np.random.default_rng(10)
        s1, s2 = random_inner_m2(rng), random_inner_m2(rng)
        comp = compose(s1, s2)
        for _, a in SHAPE.basis():
            assert comp(a).defect(s1(s2(a))) <= 1e-12

    def test_dimension_preserving_perm_required(self):
        with pytest.raises(ValueError):
            Automorphism(SHAPE, (1, 0), (np.eye(1), np.eye(2)))


class TestRegularity:
    def test_identity_automorphism(self):
        assert check_regularity(identity_automorphism(SHAPE)).max_defect == 0.0

    def test_flip_with_trivial_conjugators(self):
        assert check_regularity(flip_double()).max_defect <= 1e-14

    def test_hermitian_conjugator_is_regular(self):
        # diag(2,1) is hermitian, and sigma(a*) = (sigma^{-1}(a))* holds for
        # exactly the conjugators that are a phase times a hermitian matrix
        sigma = Automorphism(SHAPE, (0, 1), (np.eye(1), np.diag([2.0, 1.0])))
        assert check_regularity(sigma).max_defect <= 1e-14

    def test_phase_times_hermitian_is_regular(self):
        rng = np.random.default_rng(11)
        h = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = 0.5 * (h + np.conj(h.T)) + 3.0 * np.eye(2)
        s = np.exp(0.7j) * h
        sigma = Automorphism(SHAPE, (0, 1), (np.eye(1), s))
        assert check_regularity(sigma).max_defect <= 1e-12

    def test_unitary_with_nonscalar_square_is_irregular(self):
        sigma = Automorphism(SHAPE, (0, 1), (np.eye(1), np.diag([1.0, 1j])))
        report = check_regularity(sigma)
        assert report.max_defect > 1.0
        assert not report.passes

    def test_generic_conjugator_is_irregular(self):
        rng = np.random.default_rng(12)
        s = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) + 3.0 * np.eye(2)
        sigma = Automorphism(SHAPE, (0, 1), (np.eye(1), s))
        assert check_regularity(sigma).max_defect > 1e-3


class TestUnitary:
    def test_accepts_unitary(self):
        u = SHAPE.random_unitary(np.random.default_rng(13))
        e = SHAPE.unit()
        assert (u.element * u.element.star()).defect(e) <= 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="not unitary"):
            Unitary(2.0 * SHAPE.unit())
