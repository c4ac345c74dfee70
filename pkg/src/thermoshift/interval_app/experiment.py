"""Splitting experiments for perturbed interval maps, with a Monte Carlo cross-check."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import InputError
from ..metastability import DeltaResult, delta_coefficients, extrapolate, maximal_pressure_components
from ..transfer import assemble_operator, perron_triplet
from .coding import dyadic_cells, geometric_potential, pushforward
from .family import PerturbedIntervalFamily
from .system import IntervalSystem


def p_coefficients(fam: PerturbedIntervalFamily, eps: float, Q: Iterable | None = None, depth: int = 1) -> DeltaResult:
    """p_eps(Q, k) from the complement spectral radii at reference value 1.

    The components are the edge classes E_H of the limit graph; Q defaults
    to all edges.
    """
    sys = fam.system(eps)
    shift = fam.shift()
    op = assemble_operator(shift, None, geometric_potential(sys, depth).potential)
    Q = set(shift.states) if Q is None else set(Q)
    return delta_coefficients(op, 1.0, Q, fam.edge_classes())


# ---------------------------------------------------------------------------
# Monte Carlo


def forward_map(sys: IntervalSystem, x: np.ndarray) -> np.ndarray:
    """f(x) = T_e^{-1}(x) on the image of e, ties going to the lowest edge id.

    Points outside every image (possible only through rounding or at
    collapsed branches) use the nearest image.
    """
    out = np.empty_like(x)
    todo = np.ones(x.shape, dtype=bool)
    spans = []
    for eid in sys.edge_ids:
        e = sys.edge(eid)
        if not (e.branch.persistent or sys.eps > 0):
            continue
        lo, hi = sys.image(eid)
        spans.append((lo, hi, e))
        hit = todo & (x >= lo) & (x <= hi)
        if hit.any():
            out[hit] = e.branch.inverse(sys.eps, x[hit])
            todo &= ~hit
    if todo.any():
        rest = x[todo]
        dist = np.array([np.maximum(lo - rest, 0.0) + np.maximum(rest - hi, 0.0) for lo, hi, _ in spans])
        pick = np.argmin(dist, axis=0)
        mapped = np.empty_like(rest)
        for k, (lo, hi, e) in enumerate(spans):
            sel = pick == k
            if sel.any():
                mapped[sel] = e.branch.inverse(sys.eps, np.clip(rest[sel], lo, hi))
        out[todo] = mapped
    return out


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    boundaries: np.ndarray
    masses: np.ndarray
    iterates: int
    orbits: int
    burn_in: int
    group_mass: np.ndarray
    group_stderr: np.ndarray
    warnings: tuple = field(default=())


def _mc_batch(sys: IntervalSystem, boundaries: np.ndarray, orbits: int, steps: int, burn_in: int, seed, jitter: float, groups) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, orbits)
    ncell = len(boundaries) - 1

    def step(x: np.ndarray) -> np.ndarray:
        # Expanding maps in floating point collapse onto rounding artifacts
        # (x -> 2x mod 1 reaches 0 in ~53 steps); a tiny jitter keeps orbits typical.
        y = forward_map(sys, x) + rng.uniform(-jitter, jitter, x.shape)
        return np.clip(y, 0.0, 1.0)

    for _ in range(burn_in):
        x = step(x)
    counts = np.zeros(ncell)
    group_hits = np.zeros(len(groups))
    for _ in range(steps):
        cell = np.clip(np.searchsorted(boundaries, x, side="right") - 1, 0, ncell - 1)
        counts += np.bincount(cell, minlength=ncell)
        for g, spans in enumerate(groups):
            group_hits[g] += sum(np.count_nonzero((x >= lo) & (x < hi)) for lo, hi in spans)
        x = step(x)
    return counts, group_hits / (orbits * steps)


def monte_carlo(
    sys: IntervalSystem,
    boundaries: np.ndarray,
    iterates: int = 10**6,
    orbits: int = 10000,
    burn_in: int = 100,
    seed: int = 0,
    jitter: float = 1e-12,
    batches: int = 8,
    workers: int = 1,
    groups: Sequence[Sequence[tuple[float, float]]] = (),
) -> MonteCarloResult:
    """Cell-occupation histogram of forward orbits started from uniform points.

    ``batches`` independent orbit groups with spawned seeds make the result
    independent of ``workers``; their spread gives the standard error of
    the occupation of each interval union in ``groups``.
    """
    if iterates < orbits:
        raise InputError("iterates must be at least the number of orbits")
    per_batch = max(1, orbits // batches)
    steps = max(1, iterates // (per_batch * batches))
    seeds = np.random.SeedSequence(seed).spawn(batches)
    args = [(sys, boundaries, per_batch, steps, burn_in, s, jitter, groups) for s in seeds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _mc_batch(*a), args))
    else:
        results = [_mc_batch(*a) for a in args]
    counts = sum(r[0] for r in results)
    gm = np.array([r[1] for r in results])
    total = per_batch * batches * steps
    stderr = gm.std(axis=0, ddof=1) / math.sqrt(batches) if batches > 1 else np.full(len(groups), math.inf)
    warnings = []
    if np.any(stderr > 0.01):
        warnings.append(f"Monte Carlo group masses have standard error up to {float(stderr.max()):.3g}; effective sample size is small")
    return MonteCarloResult(np.asarray(boundaries), counts / total, total, per_batch * batches, burn_in, gm.mean(axis=0), stderr, tuple(warnings))


# ---------------------------------------------------------------------------
# experiment


@dataclass(frozen=True, eq=False)
class IntervalEpsRecord:
    eps: float
    p: DeltaResult
    component_mass: np.ndarray
    mu_cells: np.ndarray
    lebesgue_error: float
    lebesgue_straddle: float
    outside_mass: float
    floor: np.ndarray
    gap: float


@dataclass(frozen=True, eq=False)
class IntervalReport:
    eps: tuple
    Q: tuple
    classes: tuple
    records: tuple
    p_limit: tuple
    limit_cells: np.ndarray
    limit_l1: np.ndarray
    cell_boundaries: np.ndarray
    mc_eps: float | None
    mc: MonteCarloResult | None
    mc_l1: float
    mc_spectral_cells: np.ndarray | None
    conditions: dict
    checks: dict
    check_values: dict
    warnings: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def record(self, eps: float) -> IntervalEpsRecord:
        for r in self.records:
            if r.eps == eps:
                return r
        raise InputError(f"eps={eps!r} is not on the experiment grid")


def _gap(dense: np.ndarray) -> float:
    mods = np.sort(np.abs(np.linalg.eigvals(dense)))[::-1]
    return float(mods[0] - mods[1]) if len(mods) > 1 else float(mods[0])


def _vertex_spans(sys: IntervalSystem, classes: Sequence[tuple]) -> list[list[tuple[float, float]]]:
    out = []
    for cls in classes:
        verts = {sys.edge(e).i for e in cls}
        out.append([sys.intervals[v] for v in sorted(verts, key=repr)])
    return out


def _eps_record(fam: PerturbedIntervalFamily, eps: float, Q: set, classes, cells: np.ndarray, leb_cells: np.ndarray, depth: int) -> IntervalEpsRecord:
    sys = fam.system(eps)
    shift = fam.shift()
    op = assemble_operator(shift, None, geometric_potential(sys, depth).potential)
    trip = perron_triplet(op)
    p = delta_coefficients(op, 1.0, Q, classes)
    mu = trip.mu
    comp_mass = np.array([mu[op.indices(c)].sum() for c in classes])
    mu_cells = pushforward(sys, op, trip, cells, "mu").masses
    leb = pushforward(sys, op, trip, leb_cells, "nu")
    err = np.abs(leb.masses - leb.lengths)
    outside = float(mu[op.indices(set(shift.states) - Q)].sum()) if set(shift.states) - Q else 0.0
    floor = []
    for c in classes:
        g = trip.h[op.indices(set(c) & Q)]
        floor.append(float(g.min() / g.max()) if g.max() > 0 else 0.0)
    return IntervalEpsRecord(eps, p, comp_mass, mu_cells, float(err.max()), float(leb.straddle.max()), outside, np.array(floor), _gap(op.dense))


def splitting_experiment(
    fam: PerturbedIntervalFamily,
    Q: Iterable | None = None,
    cell_depth: int = 8,
    lebesgue_depth: int = 10,
    mc_iterates: int = 10**6,
    mc_orbits: int = 20000,
    mc_eps: float | None = None,
    seed: int = 0,
    depth: int = 1,
    eta: float = 1e-3,
    workers: int = 1,
) -> IntervalReport:
    """Spectral splitting weights, pushforward cell masses and a Monte Carlo check.

    ``mc_eps`` selects the grid point for the Monte Carlo comparison
    (default: the smallest eps); ``mc_iterates=0`` skips it.  Burn-in is
    ten relaxation times 1/gap of the transfer operator at ``mc_eps``.
    """
    shift = fam.shift()
    classes = tuple(fam.edge_classes())
    if len(classes) < 1:
        raise InputError("the limit graph has no strongly connected component")
    Q = set(shift.states) if Q is None else set(Q)
    cells = dyadic_cells(cell_depth)
    leb_cells = dyadic_cells(lebesgue_depth)
    conditions = fam.check_conditions()

    jobs = list(fam.grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda e: _eps_record(fam, e, Q, classes, cells, leb_cells, depth), jobs))
    else:
        records = [_eps_record(fam, e, Q, classes, cells, leb_cells, depth) for e in jobs]

    eps = tuple(fam.grid)
    m = len(classes)
    p_table = np.array([r.p.delta for r in records])
    p_limit = tuple(extrapolate(eps, p_table[:, k]) for k in range(m))

    # Limit measure sum_k p(k) mu(k, .) from the unperturbed component triplets.
    limit_sys = fam.template.at(0.0)
    limit_phi = geometric_potential(limit_sys, depth).potential
    maximal = maximal_pressure_components(shift, limit_phi.zero_pattern(shift), limit_phi, depth=depth)
    limit_cells = np.zeros(len(cells) - 1)
    for cm in maximal.measures:
        k = next((k for k, c in enumerate(classes) if set(cm.states) <= set(c)), None)
        if k is None:
            raise InputError(f"maximal component {cm.states!r} lies in no edge class")
        limit_cells += p_limit[k].value * pushforward(limit_sys, cm.op, cm.triplet, cells, "mu").masses
    limit_l1 = np.array([float(np.abs(r.mu_cells - limit_cells).sum()) for r in records])

    mc = None
    mc_l1 = math.nan
    spectral = None
    warnings = []
    if mc_iterates > 0:
        mc_eps = eps[-1] if mc_eps is None else float(mc_eps)
        rec = next((r for r in records if r.eps == mc_eps), None)
        if rec is None:
            rec = _eps_record(fam, mc_eps, Q, classes, cells, leb_cells, depth)
        burn = int(math.ceil(10.0 / max(rec.gap, 1e-6)))
        mc = monte_carlo(fam.system(mc_eps), cells, mc_iterates, mc_orbits, burn, seed, workers=workers, groups=_vertex_spans(fam.template, classes))
        spectral = rec.mu_cells
        mc_l1 = float(np.abs(mc.masses - spectral).sum())
        warnings.extend(mc.warnings)

    p_sum = float(sum(x.value for x in p_limit))
    leb_max = max(r.lebesgue_error for r in records)
    floor_min = float(min(r.floor.min() for r in records))
    outside_max = max(r.outside_mass for r in records)
    check_values = {
        "p_limit_sum": p_sum,
        "lebesgue_max_error": leb_max,
        "mc_l1": mc_l1,
        "floor_min": floor_min,
        "outside_mass_max": outside_max,
        "limit_l1_smallest_eps": float(limit_l1[-1]),
    }
    checks = {
        "conditions": all(c.passed for k, c in conditions.items() if k != "convergence_table"),
        "p_sums_to_one": abs(p_sum - 1.0) < 1e-3,
        "lebesgue_identity": leb_max < 1e-3,
        "restricted_floor_positive": floor_min > 0.0,
        "mass_outside_q": outside_max <= eta,
    }
    if mc is not None:
        checks["monte_carlo_agreement"] = mc_l1 < 0.05
    if not all(x.converged for x in p_limit):
        warnings.append("extrapolation of p did not settle within tolerance")
    return IntervalReport(
        eps,
        tuple(sorted(Q, key=repr)),
        classes,
        tuple(records),
        p_limit,
        limit_cells,
        limit_l1,
        cells,
        mc_eps if mc is not None else None,
        mc,
        mc_l1,
        spectral,
        conditions,
        checks,
        check_values,
        tuple(warnings),
    )
