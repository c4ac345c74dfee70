import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from thermoshift.errors import InputError
from thermoshift.potential import (
    CylinderPotential,
    PerturbedFamily,
    birkhoff_weight,
    default_grid,
    pressure_estimate,
    pressure_growth,
    regularity_report,
)
from thermoshift.shift_core import MarkovShift, enumerate_cylinders

FULL2 = MarkovShift.full(2)
GOLDEN_MEAN = MarkovShift.from_array([[1, 1], [1, 0]])
BERNOULLI = CylinderPotential.from_first_symbol(FULL2, {1: 0.3, 2: 0.7})


def point(shift):
    return enumerate_cylinders(shift, 1).points[0]


def test_birkhoff_weight_examples():
    zero = CylinderPotential.constant(FULL2)
    assert birkhoff_weight(zero, (1, 2, 1, 2, 2), point(FULL2), FULL2) == 1.0
    assert birkhoff_weight(BERNOULLI, (1, 2, 2), point(FULL2), FULL2) == pytest.approx(0.147, rel=1e-14)
    hole = CylinderPotential.from_function(FULL2, 1, lambda w: 0.0 if w == (2, 1) else 1.0)
    assert birkhoff_weight(hole, (2, 1), point(FULL2), FULL2) == 0.0


def test_regularity_examples():
    constant = PerturbedFamily.from_function(lambda e: BERNOULLI, [0.1, 0.01])
    rep = regularity_report(constant)
    assert rep.A1 == 0.0
    assert rep.A2 == pytest.approx(1.0)
    assert all(v == 0.0 for table in rep.A3.values() for v in table.values())

    base = np.array([[1.0, 1.0], [0.0, 1.0]])
    crossing = np.array([[0.0, 0.0], [1.0, 0.0]])
    fam = PerturbedFamily.from_matrices(FULL2, base, crossing, [0.1, 0.01])
    rep = regularity_report(fam)
    for eps in (0.1, 0.01):
        assert max(rep.A3[eps].values()) == pytest.approx(eps)
    assert rep.A3_monotone


def test_pressure_examples():
    zero = CylinderPotential.constant(FULL2)
    for n in range(1, 15):
        assert pressure_estimate(FULL2, zero, n).point == pytest.approx(math.log(2), abs=1e-15)
        assert abs(pressure_estimate(FULL2, BERNOULLI, n).point) < 1e-12
    golden = pressure_growth(GOLDEN_MEAN, CylinderPotential.constant(GOLDEN_MEAN), 20)
    assert golden == pytest.approx(math.log((1 + 5**0.5) / 2), abs=1e-8)


@given(st.lists(st.floats(0.05, 3.0), min_size=4, max_size=4), st.integers(1, 8))
def test_bracket_contains_point(weights, n):
    table = dict(zip([(1, 1), (1, 2), (2, 1), (2, 2)], weights))
    phi = CylinderPotential(1, table)
    est = pressure_estimate(FULL2, phi, n)
    assert est.low <= est.point <= est.high


@given(st.lists(st.floats(0.05, 3.0), min_size=4, max_size=4), st.floats(0.1, 10.0))
def test_scaling_weights_shifts_pressure(weights, t):
    table = dict(zip([(1, 1), (1, 2), (2, 1), (2, 2)], weights))
    scaled = {w: t * v for w, v in table.items()}
    p1 = pressure_growth(FULL2, CylinderPotential(1, table), 12)
    p2 = pressure_growth(FULL2, CylinderPotential(1, scaled), 12)
    assert p2 - p1 == pytest.approx(math.log(t), abs=1e-10)


@given(st.lists(st.floats(0.05, 3.0), min_size=4, max_size=4))
def test_growth_converges_to_log_spectral_radius(weights):
    W = np.array(weights).reshape(2, 2)
    mods = np.sort(np.abs(np.linalg.eigvals(W)))
    # The ratio Z_n / Z_{n-1} converges at the rate |lambda_2 / lambda_1|^n.
    assume(mods[0] / mods[1] < 0.9)
    phi = CylinderPotential.from_matrix(FULL2, W)
    assert pressure_growth(FULL2, phi, 300) == pytest.approx(math.log(mods[1]), abs=1e-9)


def test_family_construction():
    assert default_grid(3) == (0.5, 0.25, 0.125)
    fam = PerturbedFamily.from_dict({"matrix": {"base": [[0.5, 0.5], [0.5, 0.5]], "slope": [[-0.5, 0.5], [0, 0]]}, "eps": [0.5, 0.25]}, FULL2)
    assert fam.member(0.5).weight((1, 2)) == pytest.approx(0.75)
    assert fam.limit.weight((1, 2)) == pytest.approx(0.5)
    with pytest.raises(InputError, match="negative"):
        PerturbedFamily.from_matrices(FULL2, [[0.1, 0.5], [0.5, 0.5]], [[-1.0, 0], [0, 0]], [0.5])
    with pytest.raises(InputError, match="members"):
        PerturbedFamily.from_dict({"eps": [0.1]}, FULL2)


def test_row_normalized_family_is_stochastic():
    fam = PerturbedFamily.from_matrices(FULL2, [[1.0, 0.0], [1.0, 1.0]], [[0.0, 1.0], [0.0, 0.0]], [0.5, 0.1], normalize_rows=True)
    for eps in fam.grid:
        phi = fam.member(eps)
        for a in (1, 2):
            assert phi.weight((a, 1)) + phi.weight((a, 2)) == pytest.approx(1.0)
