import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_irreducible
from thermoshift.demos import four_state_chain, six_state_chain, stochastic_stationary, symmetric_two_well
from thermoshift.errors import InputError
from thermoshift.metastability import (
    coupling_b,
    coupling_decomposition,
    default_schedule,
    delta_coefficients,
    extrapolate,
    maximal_pressure_components,
    splitting_limit,
    tilde_delta,
)
from thermoshift.potential import CylinderPotential
from thermoshift.shift_core import MarkovShift
from thermoshift.transfer import OperatorMatrix, assemble_operator, perron_triplet

TWO_BLOCKS = MarkovShift.from_array(np.kron(np.eye(2), np.ones((2, 2))).astype(int))


def chain_op(P):
    # A stochastic chain P acts on densities through its transpose.
    return OperatorMatrix.from_array(np.asarray(P, dtype=float).T)


def test_maximal_components_examples():
    mx = maximal_pressure_components(TWO_BLOCKS, TWO_BLOCKS.A, CylinderPotential.constant(TWO_BLOCKS))
    assert mx.components == ((1, 2), (3, 4))
    assert mx.pressures == pytest.approx((math.log(2), math.log(2)))

    lower = MarkovShift.from_array([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    mx = maximal_pressure_components(lower, lower.A, CylinderPotential.constant(lower))
    assert mx.components == ((1, 2),)
    assert mx.lower_classes() == [(3,)]

    phi = CylinderPotential.from_first_symbol(TWO_BLOCKS, {1: 0.3, 2: 0.7, 3: 0.5, 4: 0.5})
    mx = maximal_pressure_components(TWO_BLOCKS, TWO_BLOCKS.A, phi)
    assert mx.m0 == 2
    assert mx.pressures == pytest.approx((0.0, 0.0), abs=1e-14)


def test_coupling_examples():
    op = chain_op([[0.9, 0.1], [0.2, 0.8]])
    rep = coupling_decomposition(op, perron_triplet(op), [0, 1], [[0, 1]])
    np.testing.assert_allclose(rep.D, [[1.0]])
    np.testing.assert_allclose(rep.beta, [1.0])
    np.testing.assert_allclose(rep.gamma, [1.0])

    sym = OperatorMatrix.from_array([[0.4, 0.1, 0.3, 0.2], [0.1, 0.4, 0.2, 0.3], [0.3, 0.2, 0.4, 0.1], [0.2, 0.3, 0.1, 0.4]])
    rep = coupling_decomposition(sym, perron_triplet(sym), range(4), [[0, 1], [2, 3]])
    np.testing.assert_allclose(rep.D, rep.E, atol=1e-14)
    np.testing.assert_allclose(rep.beta, [1.0, 1.0])
    np.testing.assert_allclose(rep.gamma, [0.5, 0.5])
    np.testing.assert_allclose(rep.weights, [0.5, 0.5])
    np.testing.assert_allclose(tilde_delta(sym, perron_triplet(sym), range(4), [[0, 1], [2, 3]]).delta, [0.5, 0.5])


def test_two_state_arithmetic():
    # b(1 : rest) = 0.1 and b(2 : rest) = 0.2; the gaps are 0.1 and 0.2 as well.
    op = chain_op([[0.9, 0.1], [0.2, 0.8]])
    trip = perron_triplet(op)
    assert coupling_b(op, trip, {0, 1}, [(0,), (1,)], [0], []) == pytest.approx(0.1)
    assert coupling_b(op, trip, {0, 1}, [(0,), (1,)], [1], []) == pytest.approx(0.2)
    for method in ("flow", "direct"):
        np.testing.assert_allclose(tilde_delta(op, trip, {0, 1}, [(0,), (1,)], method).delta, [2 / 3, 1 / 3])
    res = delta_coefficients(op, 1.0, {0, 1}, [{0}, {1}])
    assert res.c[0, 1] == pytest.approx(0.9) and res.c[1, 0] == pytest.approx(0.8)
    np.testing.assert_allclose(res.delta, [2 / 3, 1 / 3])


def test_equal_gaps_split_evenly():
    P = np.full((3, 3), 0.05) + 0.85 * np.eye(3)
    np.testing.assert_allclose(delta_coefficients(chain_op(P), 1.0, {0, 1, 2}, [{0}, {1}, {2}]).delta, [1 / 3] * 3)


def test_four_state_tilde_delta_against_stationary_vector():
    shift, fam = four_state_chain([1e-3])
    eps = 1e-3
    op = assemble_operator(shift, None, fam.member(eps))
    td = tilde_delta(op, perron_triplet(op), {1, 2, 3, 4}, [(1, 2), (3, 4)])
    assert 0.65 <= td.delta[0] <= 0.68
    # Frozen oracle: the left well carries 2 / (3 + eps) of the stationary vector.
    assert td.delta[0] == pytest.approx(2 / (3 + eps), rel=1e-10)


@given(st.integers(0, 10**6))
def test_tilde_delta_equals_induced_block_masses(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 9))
    M = random_irreducible(rng, n, 0.5)
    op = OperatorMatrix.from_array(M)
    trip = perron_triplet(op)
    Q = sorted(rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False).tolist())
    cut = int(rng.integers(1, len(Q)))
    blocks = [Q[:cut], Q[cut:]]
    expected = np.array([trip.mu[b].sum() for b in blocks]) / trip.mu[Q].sum()
    for method in ("flow", "direct"):
        td = tilde_delta(op, trip, Q, blocks, method)
        assert td.delta.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(td.delta, expected, rtol=1e-8)


@given(st.integers(0, 10**6))
def test_coupling_decomposition_random(seed):
    rng = np.random.default_rng(seed)
    M = random_irreducible(rng, 6, 0.6)
    op = OperatorMatrix.from_array(M)
    perm = rng.permutation(6).tolist()
    rep = coupling_decomposition(op, perron_triplet(op), range(6), [perm[:2], perm[2:]])
    assert rep.residuals["decomposition"] <= 1e-10
    assert rep.weights.sum() == pytest.approx(1.0)


@given(st.integers(0, 10**6))
def test_normalized_coupling(seed):
    rng = np.random.default_rng(seed)
    M = random_irreducible(rng, 6, 0.6)
    # Unit row sums: constants are eigenfunctions with eigenvalue one.
    op = OperatorMatrix.from_array(M / M.sum(axis=1, keepdims=True))
    rep = coupling_decomposition(op, perron_triplet(op), range(6), [[0, 1, 2], [3, 4, 5]])
    assert rep.normalized is not None
    assert rep.normalized["D_minus_E"] <= 1e-10
    assert rep.normalized["beta_minus_one"] <= 1e-10


@given(st.floats(-2, 2), st.floats(-5, 5), st.floats(-5, 5))
def test_extrapolation_is_exact_on_quadratics(a, b, c):
    eps = [2.0**-k for k in range(1, 12)]
    ex = extrapolate(eps, [a + b * e + c * e * e for e in eps])
    assert ex.value == pytest.approx(a, abs=1e-10)
    assert ex.converged


def test_extrapolation_reports_slow_convergence():
    eps = [2.0**-k for k in range(1, 8)]
    ex = extrapolate(eps, [math.sqrt(e) for e in eps])
    assert not ex.converged
    assert ex.uncertainty > 1e-4


def test_schedule_and_guards():
    shift, fam = four_state_chain([0.1, 0.05])
    mx = maximal_pressure_components(shift, fam.limit.zero_pattern(shift), fam.limit)
    sched = default_schedule(mx.partition)
    assert all(set(q) & {1, 2} and set(q) & {3, 4} for q in sched)
    with pytest.raises(InputError, match="does not meet"):
        splitting_limit(fam, shift, Q_schedule=[[1, 2]])
    with pytest.raises(InputError, match="nested"):
        splitting_limit(fam, shift, Q_schedule=[[1, 3, 4], [1, 2, 3]])


def test_symmetric_two_well():
    shift, fam = symmetric_two_well()
    rep = splitting_limit(fam, shift)
    np.testing.assert_allclose(rep.delta, [0.5, 0.5], atol=1e-8)
    assert rep.delta_sum == pytest.approx(1.0, abs=1e-8)
    assert rep.ok


def test_four_state_limit():
    shift, fam = four_state_chain()
    rep = splitting_limit(fam, shift, Q_schedule=[[1, 3], [1, 2, 3, 4]])
    assert rep.delta[0] == pytest.approx(2 / 3, abs=1e-6)
    assert rep.ok
    # Limit measure against the stationary vector at the smallest eps.
    P = np.array([[fam.member(fam.grid[-1]).weight((a, b)) for b in range(1, 5)] for a in range(1, 5)])
    np.testing.assert_allclose(rep.mu_limit, stochastic_stationary(P), atol=1e-5)


def test_six_state_transient_block_loses_its_weight():
    shift, fam = six_state_chain()
    rep = splitting_limit(fam, shift)
    final = rep.curves[-1]
    lower = [k for k, lab in enumerate(final.tilde_labels) if lab.startswith("S1")]
    assert lower
    assert final.tilde_delta[-1, lower].sum() < 1e-3
    assert rep.ok
