"""Seeded randomized property suites behind ``thermoshift verify``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .complement import (
    complement_spectral_radius,
    eigen_transfer_check,
    excursion_budget,
    induced_series,
    perron_complement,
    schur_frobenius_residual,
)
from .metastability import coupling_decomposition
from .potential import CylinderPotential, pressure_estimate, pressure_growth
from .shift_core import MarkovShift
from .transfer import OperatorMatrix, assemble_operator, perron_triplet, spectral_radius

SUITES = ("complement-identities", "coupling-identities", "pressure-oracles", "interval-checks")


@dataclass
class PropertyResult:
    name: str
    tol: float
    passed: int = 0
    total: int = 0
    worst: float = 0.0
    failures: list = field(default_factory=list)

    def record(self, value: float, instance: dict | None = None) -> None:
        self.total += 1
        self.worst = max(self.worst, value) if math.isfinite(value) else math.inf
        if value < self.tol:
            self.passed += 1
        elif instance is not None and len(self.failures) < 3:
            self.failures.append({"value": value, **instance})

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def line(self) -> str:
        return f"{self.name}: {self.passed}/{self.total} passed (worst {self.worst:.3g}, tol {self.tol:.0e})"


@dataclass
class SuiteResult:
    name: str
    seed: int
    properties: list
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.properties)

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "seed": self.seed,
            "ok": self.ok,
            "properties": [
                {"name": p.name, "passed": p.passed, "total": p.total, "worst": p.worst, "tol": p.tol, "failures": p.failures}
                for p in self.properties
            ],
        }


def random_instance(rng: np.random.Generator, n_min: int = 4, n_max: int = 12, density: float = 0.6) -> tuple[np.ndarray, set, set]:
    """Irreducible nonnegative matrix (a weighted n-cycle plus random entries) and a random U/V split."""
    n = int(rng.integers(n_min, n_max + 1))
    M = rng.random((n, n)) * (rng.random((n, n)) < density)
    for i in range(n):
        M[i, (i + 1) % n] = max(M[i, (i + 1) % n], 0.1)
    perm = rng.permutation(n)
    p = int(rng.integers(1, n))
    return M, set(perm[:p].tolist()), set(perm[p:].tolist())


def _instance(M: np.ndarray, U: set, V: set, **extra) -> dict:
    return {"matrix": M.tolist(), "U": sorted(U), "V": sorted(V), **extra}


def complement_identities(seed: int = 0, count: int = 100, series_count: int = 50) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    sf = PropertyResult("schur_frobenius_residual", 1e-12)
    et = PropertyResult("eigen_transfer_residual", 1e-9)
    cr = PropertyResult("complement_spectral_radius", 1e-10)
    series = PropertyResult("series_minus_closed_form_beyond_tail", 1e-12)
    tails = PropertyResult("series_tail_bound", 1e-8)
    for k in range(count):
        M, U, V = random_instance(rng)
        op = OperatorMatrix.from_array(M)
        lam = perron_triplet(op).lam
        for eta in (lam, 0.5 * lam, 1.3 * lam):
            sf.record(schur_frobenius_residual(op, U, V, lam, eta), _instance(M, U, V, eta=eta))
        worst = 0.0
        for side in ("right", "left"):
            chk = eigen_transfer_check(op, U, V, lam, side=side)
            worst = max(worst, chk.max_forward_residual, chk.max_backward_residual)
        et.record(worst, _instance(M, U, V))
        cr.record(abs(complement_spectral_radius(op, U) - lam), _instance(M, U, V))
        if k < series_count:
            f = rng.random(op.size) - 0.3
            r = spectral_radius(M[np.ix_(sorted(V), sorted(V))])
            K = excursion_budget(lam, r, len(V))
            res = induced_series(op, U, V, lam, f, K)
            closed = perron_complement(op, U, V, lam).apply(f)
            excess = float(np.max(np.abs(res.values - closed))) - res.tail_bound
            series.record(max(excess, 0.0) / max(1.0, float(np.max(np.abs(closed)))), _instance(M, U, V, f=f.tolist(), K=K))
            tails.record(res.tail_bound, _instance(M, U, V, K=K))
    return [sf, et, cr, series, tails]


def coupling_identities(seed: int = 0, count: int = 50) -> list[PropertyResult]:
    rng = np.random.default_rng(seed)
    dec = PropertyResult("decomposition_residual", 1e-9)
    eig = PropertyResult("eigenvector_identities", 1e-9)
    d_e = PropertyResult("normalized_D_equals_E", 1e-10)
    beta = PropertyResult("normalized_beta_is_one", 1e-10)
    for _ in range(count):
        M, _, _ = random_instance(rng, 4, 8)
        n = M.shape[0]
        op = OperatorMatrix.from_array(M)
        trip = perron_triplet(op)
        W = sorted(rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False).tolist())
        cut = int(rng.integers(1, len(W)))
        rng.shuffle(W)
        blocks = [W[:cut], W[cut:]]
        rep = coupling_decomposition(op, trip, W, blocks)
        res = rep.residuals
        dec.record(res["decomposition"], _instance(M, set(W), set(), blocks=blocks))
        eig.record(max(res["D_beta"], res["gamma_E"], res["gamma_sum"], res["beta_gamma_sum"]) / max(1.0, trip.lam), _instance(M, set(W), set()))

        # Row-normalized operator: L 1 = 1 on all states.
        P = M / M.sum(axis=1, keepdims=True)
        opn = OperatorMatrix.from_array(P)
        tn = perron_triplet(opn)
        perm = rng.permutation(n).tolist()
        c2 = int(rng.integers(1, n))
        rn = coupling_decomposition(opn, tn, range(n), [perm[:c2], perm[c2:]])
        d_e.record(rn.normalized["D_minus_E"] if rn.normalized else math.inf, _instance(P, set(range(n)), set(), blocks=[perm[:c2], perm[c2:]]))
        beta.record(rn.normalized["beta_minus_one"] if rn.normalized else math.inf)
    return [dec, eig, d_e, beta]


def pressure_oracles(seed: int = 0) -> list[PropertyResult]:
    full = MarkovShift.full(2)
    zero = CylinderPotential.constant(full, 1.0)
    fs = PropertyResult("full_shift_log2_every_n", 1e-15)
    for n in range(1, 21):
        fs.record(abs(pressure_estimate(full, zero, n).point - math.log(2.0)))
    golden = MarkovShift.from_array([[1, 1], [1, 0]], name="golden-mean")
    gphi = CylinderPotential.constant(golden, 1.0)
    target = math.log((1 + math.sqrt(5)) / 2)
    gm = PropertyResult("golden_mean_spectral_pressure", 1e-6)
    gm.record(abs(perron_triplet(assemble_operator(golden, None, gphi)).pressure - target))
    gg = PropertyResult("golden_mean_partition_growth_n15", 1e-6)
    gg.record(abs(pressure_growth(golden, gphi, 15) - target))
    depth = PropertyResult("depth_refinement_invariance", 1e-8)
    for d in (2, 3, 4):
        depth.record(abs(perron_triplet(assemble_operator(golden, None, gphi, d)).pressure - target))
    rng = np.random.default_rng(seed)
    bern = PropertyResult("bernoulli_pressure_zero", 1e-12)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        p = rng.random(n)
        p /= p.sum()
        shift = MarkovShift.full(n)
        phi = CylinderPotential.from_first_symbol(shift, dict(zip(shift.states, p)))
        bern.record(abs(perron_triplet(assemble_operator(shift, None, phi)).pressure), {"weights": p.tolist()})
        for n in (1, 5, 12):
            bern.record(abs(pressure_estimate(shift, phi, n).point), {"weights": p.tolist(), "n": n})
    return [fs, gm, gg, depth, bern]


def interval_checks(seed: int = 0) -> list[PropertyResult]:
    from .interval_app import IntervalSystem, coding_point, dyadic_cells, geometric_potential, p_coefficients, pushforward, validate
    from .interval_app.demos import doubling_doc, ring_family, two_half_family

    out = []
    dbl = IntervalSystem.from_dict(doubling_doc())
    valid = PropertyResult("doubling_system_valid", 0.5)
    valid.record(0.0 if validate(dbl).ok else 1.0)
    code = PropertyResult("binary_coding_two_thirds", 1e-12)
    code.record(abs(coding_point(dbl, (2, 1) * 30) - 2.0 / 3.0))
    leb = PropertyResult("lebesgue_identity_depth10", 1e-3)
    for sys in (dbl, two_half_family(1.0, 2.0).system(1e-3)):
        op = assemble_operator(sys.shift(), None, geometric_potential(sys).potential)
        cm = pushforward(sys, op, perron_triplet(op), dyadic_cells(10), "nu")
        leb.record(float(np.max(np.abs(cm.masses - cm.lengths))))
    p_sym = PropertyResult("symmetric_two_half_p", 0.02)
    p_sym.record(float(np.max(np.abs(p_coefficients(two_half_family(), 1e-3).delta - 0.5))))
    p_asym = PropertyResult("asymmetric_two_half_p", 0.02)
    p_asym.record(abs(float(p_coefficients(two_half_family(1.0, 2.0), 1e-3).delta[0]) - 2.0 / 3.0))
    ring = PropertyResult("ring_of_three_p", 0.02)
    ring.record(float(np.max(np.abs(p_coefficients(ring_family(3), 1e-3).delta - 1.0 / 3.0))))
    classes = PropertyResult("edge_classes_partition", 0.5)
    fam = two_half_family(1.0, 2.0)
    cond = fam.check_conditions()
    classes.record(0.0 if cond["edge_classes_partition"].passed else 1.0)
    out.extend([valid, code, leb, p_sym, p_asym, ring, classes])
    return out


_RUNNERS: dict[str, Callable[[int], list[PropertyResult]]] = {
    "complement-identities": complement_identities,
    "coupling-identities": coupling_identities,
    "pressure-oracles": pressure_oracles,
    "interval-checks": interval_checks,
}


def run_suite(name: str, seed: int = 0) -> SuiteResult:
    if name not in _RUNNERS:
        raise KeyError(name)
    t0 = time.perf_counter()
    props = _RUNNERS[name](seed)
    return SuiteResult(name, seed, props, time.perf_counter() - t0)
