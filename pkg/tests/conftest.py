import pytest

import twistlab as tw


@pytest.fixture(scope="session")
def u1u2():
    return tw.build_u1u2(1 + 0.5j, 0.7 - 0.2j)


@pytest.fixture(scope="session")
def u1u2_ky0():
    return tw.build_u1u2(1 + 0.5j, 0.0)


@pytest.fixture(scope="session")
def toy():
    return tw.two_point_model()


@pytest.fixture(scope="session")
def rand6():
    return tw.random_real_triple(3)


@pytest.fixture(scope="session")
def corpus(u1u2, toy, rand6):
    return {"toy": toy, "u1u2": u1u2.triple, "rand6": rand6}


def random_pert(t, rng, n_pairs=None, scale=0.5):
    n = int(rng.integers(1, 4)) if n_pairs is None else n_pairs
    pairs = tuple(
        (t.shape.random_element(rng, scale), t.shape.random_element(rng, scale)) for _ in range(n)
    )
    return tw.Perturbation(t.shape, pairs)


def random_normalized_pert(t, rng, n_pairs=None, scale=0.5):
    return tw.normalize(t, random_pert(t, rng, n_pairs, scale))
