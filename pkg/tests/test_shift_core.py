import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.csgraph import connected_components

from thermoshift.errors import InputError
from thermoshift.shift_core import (
    MarkovShift,
    enumerate_cylinders,
    extend_to_irreducible,
    finitely_irreducible_witness,
    is_admissible,
    is_irreducible,
    transitive_components,
)

GOLDEN_MEAN = MarkovShift.from_array([[1, 1], [1, 0]], name="golden-mean")


def zero_one(n: int, seed: int, density: float = 0.4) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (rng.random((n, n)) < density).astype(int)


def test_admissibility_examples():
    assert is_admissible((1,), GOLDEN_MEAN.A)
    assert not is_admissible((2, 2), GOLDEN_MEAN.A)
    assert is_admissible((1, 2, 1, 1), GOLDEN_MEAN.A)


def test_enumeration_small_cases():
    assert enumerate_cylinders(MarkovShift.full(2), 2).words == ((1, 1), (1, 2), (2, 1), (2, 2))
    assert enumerate_cylinders(GOLDEN_MEAN, 2).words == ((1, 1), (1, 2), (2, 1))
    assert len(enumerate_cylinders(GOLDEN_MEAN, 3).words) == 5


def test_fibonacci_counts():
    counts = [len(enumerate_cylinders(GOLDEN_MEAN, d).words) for d in range(1, 10)]
    assert counts == [2, 3, 5, 8, 13, 21, 34, 55, 89]


def test_point_surrogates_start_with_their_word():
    cyl = enumerate_cylinders(GOLDEN_MEAN, 3)
    assert len(cyl.points) == len(cyl.words)
    for w, pt in zip(cyl.words, cyl.points):
        assert pt.itinerary(len(w)) == w
        assert is_admissible(pt.itinerary(12), GOLDEN_MEAN.A)


@given(st.integers(2, 6), st.integers(1, 4), st.integers(0, 10**6))
def test_word_count_matches_matrix_power(n, depth, seed):
    A = zero_one(n, seed, 0.6)
    np.fill_diagonal(A, 1)
    shift = MarkovShift.from_array(A)
    words = enumerate_cylinders(shift, depth).words
    # Words that can be continued forever: count paths into the recurrent core.
    assert all(is_admissible(w, shift.A) for w in words)
    assert len(set(words)) == len(words)
    assert len(words) == int(np.linalg.matrix_power(A, depth - 1).sum())


def test_component_examples():
    blocks = MarkovShift.from_array(np.kron(np.eye(2), np.ones((2, 2))).astype(int))
    assert transitive_components(blocks.A).components == ((1, 2), (3, 4))
    assert len(transitive_components(GOLDEN_MEAN.A).components) == 1
    assert transitive_components(MarkovShift.from_array([[1, 1], [0, 1]]).A).components == ((1,), (2,))


@given(st.integers(2, 9), st.integers(0, 10**6))
def test_components_agree_with_scipy(n, seed):
    A = zero_one(n, seed)
    shift = MarkovShift.from_array(A)
    part = transitive_components(shift.A)
    _, labels = connected_components(A, directed=True, connection="strong")
    assert sorted(s for c in part.components for s in c) == list(range(1, n + 1))
    assert len(part.components) == len(set(labels))
    for comp, kind in zip(part.components, part.kinds):
        idx = [s - 1 for s in comp]
        assert len({labels[i] for i in idx}) == 1
        cyclic = A[np.ix_(idx, idx)].sum() > 0
        assert kind == ("irreducible" if cyclic else "degenerate")


def test_extend_four_cycle():
    cyc = MarkovShift.from_array(np.roll(np.eye(4), 1, axis=1).astype(int))
    assert extend_to_irreducible(cyc.A, {1, 3}) == (1, 2, 3, 4)
    full = MarkovShift.full(3)
    assert extend_to_irreducible(full.A, {1, 2, 3}) == (1, 2, 3)


@given(st.integers(0, 10**6))
def test_extension_is_irreducible(seed):
    rng = np.random.default_rng(seed)
    n = 8
    A = zero_one(n, seed, 0.3)
    for i in range(n):
        A[i, (i + 1) % n] = 1
    shift = MarkovShift.from_array(A)
    T = set(rng.choice(np.arange(1, n + 1), size=int(rng.integers(1, 5)), replace=False).tolist())
    S0 = extend_to_irreducible(shift.A, T)
    assert T <= set(S0)
    idx = [s - 1 for s in S0]
    ncomp, _ = connected_components(A[np.ix_(idx, idx)], directed=True, connection="strong")
    assert ncomp == 1
    assert is_irreducible(shift.A, S0)


def test_finite_irreducibility_witnesses():
    w = finitely_irreducible_witness(GOLDEN_MEAN.A, 3)
    assert w.F == ((1,),)
    for a in (1, 2):
        for b in (1, 2):
            assert is_admissible((a, 1, b), GOLDEN_MEAN.A)
    assert finitely_irreducible_witness(MarkovShift.full(3).A, 2).bip is not None
    chain = np.eye(4, k=1, dtype=int)
    chain[3, 3] = 1
    assert finitely_irreducible_witness(MarkovShift.from_array(chain).A, 4).F is None


def test_shift_round_trip_and_errors():
    doc = GOLDEN_MEAN.to_dict()
    again = MarkovShift.from_dict(doc)
    assert again.A.edges() == GOLDEN_MEAN.A.edges()
    with pytest.raises(InputError, match="edges"):
        MarkovShift.from_dict({"states": [1, 2]})
    with pytest.raises(InputError):
        GOLDEN_MEAN.space.index_of(7)
