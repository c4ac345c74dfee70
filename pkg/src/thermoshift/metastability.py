"""Splitting of perturbed equilibrium measures among maximal-pressure components.

Two independent routes produce the limiting weights: the spectral gaps of
Perron complements (``delta_coefficients``) and the coupling coefficients
b and B built from the perturbed triplet (``tilde_delta``).  ``splitting_limit``
runs both along an eps-grid and extrapolates to eps = 0.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .complement import perron_complement
from .errors import DegenerateBlockError, DegenerateCouplingError, EmptyComponentSetError, InputError, ResolventError
from .potential import CylinderPotential, PerturbedFamily
from .shift_core import ComponentPartition, MarkovShift, TransitionMatrix, transitive_components
from .transfer import OperatorMatrix, PerronTriplet, assemble_operator, perron_triplet

GUARD_TOL = 1e-14


# ---------------------------------------------------------------------------
# maximal pressure components


@dataclass(frozen=True, eq=False)
class ComponentMeasure:
    """Unperturbed RPF data of one transitive component."""

    states: tuple
    op: OperatorMatrix
    triplet: PerronTriplet


@dataclass(frozen=True, eq=False)
class MaximalPressureSet:
    components: tuple
    pressures: tuple
    P_global: float
    tol: float
    partition: ComponentPartition
    all_pressures: tuple
    measures: tuple

    @property
    def m0(self) -> int:
        return len(self.components)

    def lower_classes(self) -> list[tuple]:
        """Transitive classes (degenerate included) outside the maximal set."""
        chosen = set(self.components)
        return [c for c in self.partition.components if c not in chosen]


def maximal_pressure_components(
    shift: MarkovShift,
    B: TransitionMatrix,
    phi: CylinderPotential,
    tol: float = 1e-9,
    depth: int | None = None,
) -> MaximalPressureSet:
    """Components of B whose restricted pressure is within ``tol`` of the maximum."""
    part = transitive_components(B)
    pressures = []
    measures = []
    for comp, kind in zip(part.components, part.kinds):
        if kind == "degenerate":
            pressures.append(-math.inf)
            measures.append(None)
            continue
        op = assemble_operator(shift, B.restrict(comp), phi, depth)
        trip = perron_triplet(op)
        pressures.append(trip.pressure)
        measures.append(ComponentMeasure(comp, op, trip))
    top = max(pressures)
    if top == -math.inf:
        raise EmptyComponentSetError("every transitive component has zero spectral radius")
    keep = [k for k, p in enumerate(pressures) if abs(p - top) <= tol]
    return MaximalPressureSet(
        tuple(part.components[k] for k in keep),
        tuple(pressures[k] for k in keep),
        top,
        tol,
        part,
        tuple(pressures),
        tuple(measures[k] for k in keep),
    )


# ---------------------------------------------------------------------------
# coupling matrices


@dataclass(frozen=True, eq=False)
class CouplingReport:
    W: tuple
    partition: tuple
    lam: float
    D: np.ndarray
    E: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    weights: np.ndarray
    residuals: dict
    normalized: dict | None


def _conditional(nu: np.ndarray, idx: np.ndarray) -> np.ndarray:
    mass = nu[idx].sum()
    out = np.zeros_like(nu)
    out[idx] = nu[idx] / mass
    return out


def coupling_decomposition(op: OperatorMatrix, triplet: PerronTriplet, W: Iterable, partition: Sequence[Iterable]) -> CouplingReport:
    """Coupling matrices D, E and the decomposition of mu^W into block measures.

    For blocks W(i) with conditional measures nu_i = nu(. | W(i)) and
    restricted eigenfunctions h_i = h chi_i / nu_i(h):

        D(i,j) = nu_i(L[W, S\\W, lam] h_j),   E(i,j) = nu_i(L[W, S\\W, lam] chi_j),
        beta(i) = nu_i(h^W),                gamma(i) = nu^W(chi_i),

    and mu^W = sum_i beta(i) gamma(i) mu_i.
    """
    W = tuple(sorted(set(W), key=repr))
    blocks = [tuple(sorted(set(b), key=repr)) for b in partition]
    if any(not b for b in blocks):
        raise InputError("partition blocks must be nonempty")
    union = [s for b in blocks for s in b]
    if len(union) != len(set(union)) or set(union) != set(W):
        raise InputError("partition blocks must be disjoint with union W")
    lam, h, nu = triplet.lam, triplet.h, triplet.nu
    w_idx = op.indices(W)
    idx = [op.indices(b) for b in blocks]
    for b, ix in zip(blocks, idx):
        if nu[ix].sum() <= 0:
            raise DegenerateBlockError(f"block {b!r} has zero conformal mass")
    rest = set(op.alphabet) - set(W)
    LW = perron_complement(op, W, rest, lam).matrix
    nuW = _conditional(nu, w_idx)
    nus = [_conditional(nu, ix) for ix in idx]
    hs = []
    for b, ix, nu_i in zip(blocks, idx, nus):
        chi_h = np.zeros_like(h)
        chi_h[ix] = h[ix]
        denom = nu_i @ h
        if denom <= 0:
            raise DegenerateBlockError(f"h vanishes nu-almost everywhere on block {b!r}")
        hs.append(chi_h / denom)
    hW = np.zeros_like(h)
    hW[w_idx] = h[w_idx]
    hW /= nuW @ h
    chis = [np.isin(np.arange(op.size), ix).astype(float) for ix in idx]

    m = len(blocks)
    D = np.array([[nus[i] @ (LW @ hs[j]) for j in range(m)] for i in range(m)])
    E = np.array([[nus[i] @ (LW @ chis[j]) for j in range(m)] for i in range(m)])
    beta = np.array([nus[i] @ hW for i in range(m)])
    gamma = np.array([nuW @ chis[i] for i in range(m)])
    weights = beta * gamma
    muW = hW * nuW
    combo = sum(weights[i] * hs[i] * nus[i] for i in range(m))
    residuals = {
        "D_beta": float(np.max(np.abs(D @ beta - lam * beta))),
        "gamma_E": float(np.max(np.abs(gamma @ E - lam * gamma))),
        "gamma_sum": abs(float(gamma.sum()) - 1.0),
        "beta_gamma_sum": abs(float(weights.sum()) - 1.0),
        "decomposition": float(np.max(np.abs(muW - combo))),
    }
    normalized = None
    ones = np.zeros(op.size)
    ones[w_idx] = 1.0
    LWW = op.dense[np.ix_(w_idx, w_idx)]
    if np.max(np.abs(LWW @ np.ones(len(w_idx)) - lam)) <= 1e-12 * max(lam, 1.0):
        normalized = {
            "D_minus_E": float(np.max(np.abs(D - E))),
            "beta_minus_one": float(np.max(np.abs(beta - 1.0))),
        }
    return CouplingReport(W, tuple(blocks), lam, D, E, beta, gamma, weights, residuals, normalized)


# ---------------------------------------------------------------------------
# coefficient routes


@dataclass(frozen=True, eq=False)
class TildeDelta:
    delta: np.ndarray
    B: np.ndarray
    b: dict
    partition: tuple


def _q_vectors(op: OperatorMatrix, triplet: PerronTriplet, Q: Iterable) -> tuple[np.ndarray, np.ndarray]:
    q_idx = op.indices(Q)
    g = np.zeros(op.size)
    g[q_idx] = triplet.h[q_idx]
    top = np.max(np.abs(g))
    if top <= 0:
        raise DegenerateBlockError("h vanishes on Q")
    return g / top, _conditional(triplet.nu, q_idx)


def coupling_b(
    op: OperatorMatrix,
    triplet: PerronTriplet,
    Q: Iterable,
    partition: Sequence[Iterable],
    heads: Sequence[int],
    P0: Iterable[int],
) -> float:
    """b(i_1 ... i_n : P0) = lam - nu^Q(L[U, V, lam] g^Q) / nu^Q(g^Q chi_U).

    Here U is the union of the blocks in ``heads`` and V is the complement of
    Q together with the blocks in ``P0``.
    """
    Q = set(Q)
    g, nuQ = _q_vectors(op, triplet, Q)
    U = set().union(*(set(partition[i]) for i in heads))
    V = (set(op.alphabet) - Q).union(*(set(partition[k]) for k in P0))
    comp = perron_complement(op, U, V, triplet.lam)
    chiU = op.indicator(U)
    denom = nuQ @ (g * chiU)
    if denom <= 0:
        raise DegenerateCouplingError(f"nu^Q(g chi_U) vanishes for blocks {tuple(heads)!r}")
    return float(triplet.lam - (nuQ @ comp.apply(g)) / denom)


def coupling_b_pair(op: OperatorMatrix, triplet: PerronTriplet, Q: Iterable, partition: Sequence[Iterable], i: int, j: int) -> float:
    """b(i : T0 \\ {i, j}) in cancellation-free form.

    On U' = Q(i) ∪ Q(j) the complement L[U', S\\U', lam] fixes g chi_U', so
    lam nu(chi_i g) splits into the diagonal term (which is lam - b times the
    same mass) and the off-diagonal flow nu(chi_i L[U', ., lam] chi_j g).
    Using the latter avoids subtracting two nearly equal numbers.
    """
    g, nuQ = _q_vectors(op, triplet, Q)
    Ui, Uj = set(partition[i]), set(partition[j])
    comp = perron_complement(op, Ui | Uj, set(op.alphabet) - Ui - Uj, triplet.lam)
    chi_i, chi_j = op.indicator(Ui), op.indicator(Uj)
    denom = nuQ @ (g * chi_i)
    if denom <= 0:
        raise DegenerateCouplingError(f"nu^Q(g chi) vanishes on block {i}")
    return float((nuQ * chi_i) @ comp.apply(g * chi_j) / denom)


def tilde_delta(
    op: OperatorMatrix,
    triplet: PerronTriplet,
    Q: Iterable,
    partition: Sequence[Iterable],
    method: str = "flow",
) -> TildeDelta:
    """Weights of mu^Q on the blocks Q(k) from the coupling coefficients.

    ``method="direct"`` evaluates every b with :func:`coupling_b`;
    ``method="flow"`` uses the equivalent off-diagonal form
    :func:`coupling_b_pair`, which keeps full relative accuracy when the
    blocks are almost decoupled.
    """
    Q = set(Q)
    blocks = [tuple(b) for b in partition]
    if any(not b for b in blocks):
        raise InputError("partition blocks must be nonempty")
    if set().union(*map(set, blocks)) != Q:
        raise InputError("partition blocks must cover Q")
    m = len(blocks)
    b: dict = {}
    Bm = np.ones((m, m))
    for i, j in combinations(range(m), 2):
        rest = [k for k in range(m) if k not in (i, j)]
        for x, y in ((i, j), (j, i)):
            if method == "flow":
                b[(x, y)] = coupling_b_pair(op, triplet, Q, blocks, x, y)
            elif method == "direct":
                b[(x, y)] = coupling_b(op, triplet, Q, blocks, [x], rest)
            else:
                raise InputError(f"unknown method {method!r}")
        for x, y in ((i, j), (j, i)):
            if b[(y, x)] == 0:
                raise DegenerateCouplingError(f"b({y} : rest) = 0 for the pair ({x}, {y})")
            Bm[x, y] = b[(x, y)] / b[(y, x)]
    delta = np.array([1.0 / (1.0 + sum(Bm[k, j] for j in range(m) if j != k)) for k in range(m)])
    return TildeDelta(delta, Bm, b, tuple(blocks))


@dataclass(frozen=True, eq=False)
class DeltaResult:
    delta: np.ndarray
    c: np.ndarray
    gaps: np.ndarray
    flagged: tuple


def _perron_gap(C: np.ndarray, lam: float) -> tuple[float, float]:
    # Spectral radius c of C and lam - c as a compensated Rayleigh quotient
    # x (lam I - C) y / x y with the Perron vectors x, y of C.
    vals, left, right = scipy.linalg.eig(C, left=True, right=True)
    k = int(np.argmax(vals.real))
    c = float(np.max(np.abs(vals)))
    x = np.abs(np.real(left[:, k]))
    y = np.abs(np.real(right[:, k]))
    xy = math.fsum(x * y)
    if xy <= 1e-300:
        return c, lam - c
    terms = []
    for i in range(len(y)):
        if x[i] == 0:
            continue
        row = [lam * y[i]] + [-C[i, j] * y[j] for j in range(len(y))]
        terms.append(x[i] * math.fsum(row))
    return c, math.fsum(terms) / xy


def delta_coefficients(
    op: OperatorMatrix,
    lam: float,
    Q: Iterable,
    components: Sequence[Iterable],
    guard_tol: float = GUARD_TOL,
) -> DeltaResult:
    """delta(Q, i) = 1 / (1 + sum_j (lam - c(Q,i,j)) / (lam - c(Q,j,i))).

    c(Q,i,j) is the spectral radius of L[Q∩U(i), S\\((U(i)∪U(j))∩Q), lam].
    Gaps below ``guard_tol`` are flagged and the affected deltas are NaN.
    """
    Q = set(Q)
    comps = [set(u) for u in components]
    m = len(comps)
    for k, u in enumerate(comps):
        if not (u & Q):
            raise InputError(f"Q does not meet component {k + 1}")
    alphabet = set(op.alphabet)
    c = np.full((m, m), np.nan)
    gaps = np.full((m, m), np.nan)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            U = Q & comps[i]
            V = alphabet - ((comps[i] | comps[j]) & Q)
            try:
                comp = perron_complement(op, U, V, lam)
            except ResolventError as exc:
                raise ResolventError(f"resolvent condition fails for the pair ({i + 1}, {j + 1}): {exc}", exc.radius, exc.lam) from None
            c[i, j], gaps[i, j] = _perron_gap(comp.core, lam)
    flagged = tuple((i, j) for i in range(m) for j in range(m) if i != j and not gaps[i, j] >= guard_tol)
    delta = np.ones(m)
    for i in range(m):
        if any((j, i) in flagged for j in range(m)):
            delta[i] = np.nan
            continue
        delta[i] = 1.0 / (1.0 + sum(gaps[i, j] / gaps[j, i] for j in range(m) if j != i))
    return DeltaResult(delta, c, gaps, flagged)


# ---------------------------------------------------------------------------
# extrapolation


@dataclass(frozen=True)
class Extrapolation:
    value: float
    uncertainty: float
    converged: bool
    order: int


def extrapolate(eps: Sequence[float], values: Sequence[float], order: int = 2, tol: float = 1e-4) -> Extrapolation:
    """Richardson-type limit eps -> 0 from the smallest grid points.

    Polynomial extrapolation of degree ``order`` through the last
    ``order + 1`` points (Neville).  The uncertainty is the larger of the
    change against degree ``order - 1`` and against the window shifted one
    point towards larger eps.
    """
    x = np.asarray(eps, dtype=float)
    y = np.asarray(values, dtype=float)
    good = np.isfinite(y)
    x, y = x[good], y[good]
    if len(x) == 0:
        return Extrapolation(math.nan, math.inf, False, 0)
    order = min(order, len(x) - 1)
    if order == 0:
        return Extrapolation(float(y[-1]), math.inf, False, 0)

    def neville(xs: np.ndarray, ys: np.ndarray) -> float:
        p = list(ys)
        for level in range(1, len(xs)):
            for i in range(len(xs) - level):
                p[i] = (xs[i + level] * p[i] - xs[i] * p[i + 1]) / (xs[i + level] - xs[i])
        return float(p[0])

    best = neville(x[-(order + 1) :], y[-(order + 1) :])
    lower = neville(x[-order:], y[-order:])
    spread = abs(best - lower)
    if len(x) >= order + 2:
        shifted = neville(x[-(order + 2) : -1], y[-(order + 2) : -1])
        spread = max(spread, abs(best - shifted))
    return Extrapolation(best, spread, spread <= tol, order)


# ---------------------------------------------------------------------------
# eps-sweep


def default_schedule(partition: ComponentPartition) -> list[tuple]:
    """Q_n = first n states of every transitive class, for n up to the largest class."""
    size = max(len(c) for c in partition.components)
    return [tuple(sorted((s for c in partition.components for s in c[:n]), key=repr)) for n in range(1, size + 1)]


@dataclass(frozen=True, eq=False)
class QRecord:
    mass: float
    delta: DeltaResult
    tilde: TildeDelta
    tilde_labels: tuple
    cb_ratio: dict


@dataclass(frozen=True, eq=False)
class EpsRecord:
    eps: float
    lam: float
    mu: np.ndarray
    outside_mass: float
    per_q: tuple
    floor: tuple
    triplet_warnings: tuple


@dataclass(frozen=True, eq=False)
class SplittingCurve:
    Q: tuple
    eps: tuple
    muQ_mass: np.ndarray
    delta: np.ndarray
    tilde_delta: np.ndarray
    tilde_labels: tuple
    c: np.ndarray
    gaps: np.ndarray
    cb_ratio: dict
    a_Q: Extrapolation
    delta_limit: tuple


@dataclass(frozen=True, eq=False)
class SplittingReport:
    maximal: MaximalPressureSet
    eps: tuple
    lambdas: np.ndarray
    curves: tuple
    delta: np.ndarray
    delta_sum: float
    mu_limit: np.ndarray
    test_errors: np.ndarray
    outside_mass: np.ndarray
    a4_eta: float
    a4_pass: bool
    floor: np.ndarray
    checks: dict
    check_values: dict
    warnings: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _eps_job(
    eps: float,
    shift: MarkovShift,
    phi: CylinderPotential,
    depth: int,
    schedule: Sequence[tuple],
    maximal: MaximalPressureSet,
    classes: Sequence[tuple],
) -> EpsRecord:
    op = assemble_operator(shift, None, phi, depth)
    trip = perron_triplet(op)
    lam = trip.lam
    mu = trip.mu
    comps = [set(u) for u in maximal.components]
    m0 = len(comps)
    per_q = []
    for Q in schedule:
        Qs = set(Q)
        mass = float(mu[op.indices(Qs)].sum())
        dres = delta_coefficients(op, lam, Qs, comps)
        blocks = [tuple(sorted(Qs & set(c), key=repr)) for c in classes if Qs & set(c)]
        labels = []
        for blk in blocks:
            k = next((k for k, u in enumerate(comps) if set(blk) <= u), None)
            labels.append(f"U{k + 1}" if k is not None else f"S1:{blk[0]}")
        tilde = tilde_delta(op, trip, Qs, blocks)
        Q0 = [tuple(sorted(Qs & u, key=repr)) for u in comps]
        Q0_union = set().union(*map(set, Q0))
        cb = {}
        for i in range(m0):
            for j in range(m0):
                if i != j:
                    b = coupling_b_pair(op, trip, Q0_union, Q0, i, j)
                    cb[(i, j)] = dres.gaps[i, j] / b if b > 0 else math.nan
        per_q.append(QRecord(mass, dres, tilde, tuple(labels), cb))
    floor = []
    last = set(schedule[-1])
    for u in comps:
        idx = op.indices(last & u)
        g = trip.h[idx]
        floor.append(float(g.min() / g.max()) if g.max() > 0 else 0.0)
    outside = float(mu[op.indices(set(shift.states) - last)].sum()) if set(shift.states) - last else 0.0
    return EpsRecord(eps, lam, mu, outside, tuple(per_q), tuple(floor), tuple(trip.warnings))


def splitting_limit(
    family: PerturbedFamily,
    shift: MarkovShift,
    Q_schedule: Sequence[Iterable] | None = None,
    test_functions: Sequence[np.ndarray] | None = None,
    depth: int | None = None,
    pressure_tol: float = 1e-9,
    eta: float = 1e-3,
    extrapolation_tol: float = 1e-4,
    ratio_tol: float = 1e-2,
    workers: int = 1,
) -> SplittingReport:
    """Sweep the eps-grid, extrapolate the splitting weights and assemble the limit measure.

    Parameters
    ----------
    family : PerturbedFamily
        Potentials along a decreasing grid together with their limit.
    shift : MarkovShift
        The truncated shift carrying every member.
    Q_schedule : sequence of state sets, optional
        Nested sets each meeting every maximal component; defaults to
        :func:`default_schedule`.
    test_functions : sequence of arrays, optional
        Vectors over the operator basis; defaults to state indicators.
    eta : float
        Threshold of the outside-mass check mu_eps(S \\ Q_last) <= eta.

    Returns
    -------
    SplittingReport
        ``checks`` holds the pass/fail verdicts of the invariant checks.
    """
    depth = family.depth if depth is None else depth
    B = family.limit.zero_pattern(shift)
    maximal = maximal_pressure_components(shift, B, family.limit, pressure_tol, depth)
    classes = maximal.partition.components
    schedule = [tuple(sorted(set(Q), key=repr)) for Q in (Q_schedule or default_schedule(maximal.partition))]
    if not schedule:
        raise InputError("Q schedule must contain at least one set")
    for a, b in zip(schedule, schedule[1:]):
        if not set(a) <= set(b):
            raise InputError("Q schedule must be nested")
    for Q in schedule:
        for k, u in enumerate(maximal.components):
            if not set(Q) & set(u):
                raise InputError(f"Q={list(Q)!r} does not meet maximal component U{k + 1}")

    jobs = [(e, family.member(e)) for e in family.grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda job: _eps_job(job[0], shift, job[1], depth, schedule, maximal, classes), jobs))
    else:
        records = [_eps_job(e, shift, phi, depth, schedule, maximal, classes) for e, phi in jobs]

    m0 = maximal.m0
    eps = tuple(family.grid)
    curves = []
    for qi, Q in enumerate(schedule):
        recs = [r.per_q[qi] for r in records]
        mass = np.array([r.mass for r in recs])
        delta = np.array([r.delta.delta for r in recs])
        labels = recs[0].tilde_labels
        tilde = np.array([r.tilde.delta for r in recs])
        c = np.array([r.delta.c for r in recs])
        gaps = np.array([r.delta.gaps for r in recs])
        cb = {key: np.array([r.cb_ratio[key] for r in recs]) for key in recs[0].cb_ratio}
        a_Q = extrapolate(eps, mass, tol=extrapolation_tol)
        dl = tuple(extrapolate(eps, delta[:, k], tol=extrapolation_tol) for k in range(m0))
        curves.append(SplittingCurve(Q, eps, mass, delta, tilde, labels, c, gaps, cb, a_Q, dl))

    final = curves[-1]
    delta_lim = np.array([final.a_Q.value * d.value for d in final.delta_limit])
    delta_sum = float(delta_lim.sum())
    mu_limit = sum(delta_lim[k] * maximal.measures[k].triplet.mu for k in range(m0))

    op0 = maximal.measures[0].op
    if test_functions is None:
        test_functions = [op0.indicator({s}) for s in shift.states]
    F = np.array(test_functions, dtype=float)
    test_errors = np.array([float(np.max(np.abs(F @ r.mu - F @ mu_limit))) for r in records])
    outside = np.array([r.outside_mass for r in records])
    a4_pass = bool(np.all(outside <= eta))
    floor = np.array([r.floor for r in records])

    tilde_dev = max(abs(float(np.sum(t)) - 1.0) for cv in curves for t in cv.tilde_delta)
    cb_dev = max((abs(float(v[-1]) - 1.0) for v in final.cb_ratio.values()), default=0.0)
    zero_labels = [k for k, lab in enumerate(final.tilde_labels) if lab.startswith("U")]
    route_dev = 0.0
    for k, col in enumerate(zero_labels):
        ratio = final.delta[-1, k] / final.tilde_delta[-1, col]
        route_dev = max(route_dev, abs(float(ratio) - 1.0))
    min_delta = float(np.nanmin([cv.delta for cv in curves]))
    check_values = {
        "tilde_delta_sum_deviation": tilde_dev,
        "delta_sum": delta_sum,
        "cb_ratio_deviation": cb_dev,
        "route_ratio_deviation": route_dev,
        "min_delta_eps": min_delta,
        "outside_mass_max": float(outside.max()),
    }
    checks = {
        "tilde_delta_sums_to_one": tilde_dev <= 1e-9,
        "mass_bound": delta_sum <= 1.0 + 1e-8,
        "probability_limit": (abs(delta_sum - 1.0) < 1e-3) if a4_pass else True,
        "cb_ratio_near_one": cb_dev <= ratio_tol,
        "route_agreement": route_dev <= ratio_tol,
        "delta_nonnegative": min_delta >= 0.0,
    }
    warnings = []
    if not final.a_Q.converged or not all(d.converged for d in final.delta_limit):
        warnings.append("extrapolation did not settle within tolerance: the limit conditions may fail")
    for r in records:
        for w in r.triplet_warnings:
            warnings.append(f"eps={r.eps!r}: {w}")
    return SplittingReport(
        maximal,
        eps,
        np.array([r.lam for r in records]),
        tuple(curves),
        delta_lim,
        delta_sum,
        mu_limit,
        test_errors,
        outside,
        eta,
        a4_pass,
        floor,
        checks,
        check_values,
        tuple(warnings),
    )
