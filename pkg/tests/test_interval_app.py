import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermoshift.errors import ConstructionError, InputError
from thermoshift.interval_app import (
    IntervalSystem,
    coding_point,
    dyadic_cells,
    forward_map,
    geometric_potential,
    monte_carlo,
    p_coefficients,
    pushforward,
    splitting_experiment,
    validate,
)
from thermoshift.interval_app.demos import doubling_doc, ring_family, split_doc, two_half_family
from thermoshift.transfer import assemble_operator, perron_triplet

DOUBLING = IntervalSystem.from_dict(doubling_doc())


def full_branch_doc(cuts):
    """[0, 1] mapped affinely onto each piece of a partition."""
    pts = [0.0] + sorted(cuts) + [1.0]
    edges = [
        {"id": k + 1, "i": 1, "t": 1, "map": {"type": "affine", "a": hi - lo, "b": lo}}
        for k, (lo, hi) in enumerate(zip(pts, pts[1:]))
    ]
    return {"vertices": [1], "intervals": {"1": [0.0, 1.0]}, "edges": edges}


def spectral(sys, depth=1):
    op = assemble_operator(sys.shift(), None, geometric_potential(sys, depth).potential)
    return op, perron_triplet(op)


def test_doubling_validates():
    rep = validate(DOUBLING)
    assert rep.ok
    assert set(rep.clauses) >= {"cover", "injective", "expanding", "open_set_condition"}


def test_doubling_potential_and_coding():
    for depth in (1, 2, 3):
        gp = geometric_potential(DOUBLING, depth)
        assert set(gp.potential.weights.values()) == {0.5}
        op, t = spectral(DOUBLING, depth)
        assert t.lam == pytest.approx(1.0, abs=1e-14)
    # Edge 2 is the digit 1, edge 1 the digit 0: 0.101010... in binary.
    assert coding_point(DOUBLING, (2, 1) * 30) == pytest.approx(2 / 3, abs=1e-15)


def test_lebesgue_identity_on_doubling():
    op, t = spectral(DOUBLING)
    cm = pushforward(DOUBLING, op, t, dyadic_cells(6), "nu")
    np.testing.assert_allclose(cm.masses, cm.lengths, atol=1e-12)


def test_two_half_limit():
    fam = two_half_family(1.0, 2.0)
    lim = fam.limit()
    assert validate(lim).ok
    assert fam.limit_components() == [(1,), (2,)]
    assert fam.edge_classes() == [(1, 2, 3), (4, 5, 6)]
    op, t = spectral(lim)
    # Each half is a full two-branch system with slopes 1/2: weights sum to one.
    assert t.lam == pytest.approx(1.0, abs=1e-14)


def test_vanishing_branch_derivative():
    sys = two_half_family().system(1e-3)
    assert validate(sys).ok
    assert sys.dT(2, 0.3) == pytest.approx(1e-3)
    assert 2 not in sys.limit().edge_ids


def test_p_coefficients_examples():
    np.testing.assert_allclose(p_coefficients(two_half_family(), 1e-3).delta, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(p_coefficients(two_half_family(1.0, 2.0), 1e-3).delta, [2 / 3, 1 / 3], atol=1e-12)
    np.testing.assert_allclose(p_coefficients(ring_family(3), 1e-3).delta, [1 / 3] * 3, atol=1e-12)


@given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=4, unique=True))
def test_full_branch_systems_have_lebesgue_conformal_measure(cuts):
    pts = sorted(cuts)
    if min(np.diff([0.0] + pts + [1.0])) < 0.02:
        return
    sys = IntervalSystem.from_dict(full_branch_doc(pts))
    assert validate(sys).ok
    op, t = spectral(sys)
    assert t.lam == pytest.approx(1.0, abs=1e-12)
    cm = pushforward(sys, op, t, dyadic_cells(5), "nu")
    # Leaves crossing a cell boundary are the only source of error.
    assert np.all(np.abs(cm.masses - cm.lengths) <= cm.straddle + 1e-12)
    assert cm.masses.sum() == pytest.approx(1.0, abs=1e-12)


@given(st.lists(st.floats(1e-9, 1 - 1e-9), min_size=1, max_size=20))
def test_forward_map_inverts_branches(xs):
    x = np.array(xs)
    for eid in DOUBLING.edge_ids:
        y = DOUBLING.T(eid, x)
        np.testing.assert_allclose(forward_map(DOUBLING, y), x, atol=1e-12)


@given(st.floats(0.01, 0.2), st.floats(0.5, 3.0))
def test_left_mass_matches_leak_ratio(eps, k_right):
    fam = two_half_family(1.0, k_right, grid=[eps])
    op, t = spectral(fam.system(eps))
    left = sum(t.mu[i] for i, w in enumerate(op.basis) if fam.system(eps).edge(w[0]).i == 1)
    assert left == pytest.approx(k_right / (1.0 + k_right), abs=1e-10)


def test_monte_carlo_is_reproducible_and_uniform():
    a = monte_carlo(DOUBLING, dyadic_cells(3), 40000, 200, 20, seed=3)
    b = monte_carlo(DOUBLING, dyadic_cells(3), 40000, 200, 20, seed=3, workers=4)
    np.testing.assert_array_equal(a.masses, b.masses)
    np.testing.assert_allclose(a.masses, 1 / 8, atol=0.02)


def test_small_experiment_runs_clean():
    fam = two_half_family(1.0, 2.0, grid=[0.1, 0.05, 0.02, 0.01])
    rep = splitting_experiment(fam, cell_depth=6, lebesgue_depth=8, mc_iterates=100000, mc_orbits=2000, seed=1)
    assert rep.ok, rep.checks
    assert rep.p_limit[0].value == pytest.approx(2 / 3, abs=1e-8)


def test_malformed_systems_are_rejected():
    doc = doubling_doc()
    doc["edges"][1]["map"]["b"] = 0.4
    with pytest.raises(ConstructionError):
        validate(IntervalSystem.from_dict(doc))
    doc = doubling_doc()
    del doc["intervals"]
    with pytest.raises(InputError):
        IntervalSystem.from_dict(doc)


def test_split_doc_layout():
    doc = split_doc([1.0, 2.0, 3.0])
    assert [e["id"] for e in doc["edges"]] == list(range(1, 10))
    assert doc["intervals"]["3"] == pytest.approx([2 / 3, 1.0])
