"""Coding map, geometric potential and pushforwards of symbolic measures to the interval."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import InputError
from ..potential import CylinderPotential
from ..shift_core import PointSurrogate, enumerate_cylinders
from ..transfer import OperatorMatrix, PerronTriplet
from .system import IntervalSystem, validate

CODING_TOL = 1e-12


def coding_depth(sys: IntervalSystem, tol: float = CODING_TOL) -> int:
    """Smallest n with r**n < tol, r the contraction rate of the system."""
    r = sys.contraction()
    if r <= 0:
        return 1
    return max(1, math.ceil(math.log(tol) / math.log(r)))


def coding_point(sys: IntervalSystem, omega: PointSurrogate | Sequence, n: int | None = None) -> float:
    """pi_n(omega) = T_{omega_0} o ... o T_{omega_{n-1}}(mid J_{t(omega_{n-1})}).

    Any start point in the innermost interval gives the same value up to
    r**n |J|.  A finite word is coded through its first ``len(word)`` symbols.
    """
    if isinstance(omega, PointSurrogate):
        word = omega.itinerary(coding_depth(sys) if n is None else n)
    else:
        word = tuple(omega) if n is None else tuple(omega)[:n]
    if not word:
        raise InputError("cannot code the empty word")
    lo, hi = sys.intervals[sys.edge(word[-1]).t]
    x = 0.5 * (lo + hi)
    for e in reversed(word):
        x = float(sys.T(e, x))
    return x


def word_image(sys: IntervalSystem, word: Sequence) -> tuple[float, float]:
    """T_w(J_{t(w_last)}) as an interval; branches are monotone so endpoints suffice."""
    lo, hi = sys.intervals[sys.edge(word[-1]).t]
    for e in reversed(word):
        a, b = float(sys.T(e, lo)), float(sys.T(e, hi))
        lo, hi = min(a, b), max(a, b)
    return lo, hi


@dataclass(frozen=True, eq=False)
class GeometricPotential:
    potential: CylinderPotential
    coding_points: Mapping
    table_error: float


def geometric_potential(sys: IntervalSystem, depth: int = 1, tol: float = CODING_TOL) -> GeometricPotential:
    """Weights |T'_{w_0}(pi(sigma w))| on depth+1 words.

    The coding point of sigma w uses the minimal admissible extension of w.
    Affine branches make the table exact; otherwise ``table_error`` bounds
    the log-weight error by the sampled distortion constant times r**depth.
    """
    if depth < 1:
        raise InputError("geometric potential depth must be at least 1")
    shift = sys.shift()
    n = coding_depth(sys, tol)
    weights = {}
    points = {}
    for w in enumerate_cylinders(shift, depth + 1).words:
        x = coding_point(sys, shift.representative(w).shifted(1), n)
        points[w] = x
        weights[w] = abs(float(sys.dT(w[0], x)))
    affine = all(e.branch.affine for e in sys.edges)
    if affine:
        error = 0.0
    else:
        distortion = validate(sys, strict=False).clauses["bounded_distortion"].value
        span = max(hi - lo for lo, hi in sys.intervals.values())
        error = distortion * span * sys.contraction() ** depth
    return GeometricPotential(CylinderPotential(depth, weights, name="geometric"), points, error)


def _affine_coeffs(sys: IntervalSystem) -> dict | None:
    """(a, b) per edge when every branch is affine, else None."""
    if not all(e.branch.affine for e in sys.edges):
        return None
    return {e.id: e.branch.coeffs(sys.eps) for e in sys.edges}


@dataclass(frozen=True, eq=False)
class CellMasses:
    boundaries: np.ndarray
    masses: np.ndarray
    straddle: np.ndarray
    leaves: int

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.boundaries)


def dyadic_cells(depth: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, 2**depth + 1)


def pushforward(
    sys: IntervalSystem,
    op: OperatorMatrix,
    triplet: PerronTriplet,
    boundaries: np.ndarray,
    which: str = "mu",
    resolution: float | None = None,
    max_length: int = 80,
) -> CellMasses:
    """Masses of nu o pi^-1 (or mu o pi^-1) on the cells between ``boundaries``.

    Cylinders [w] are refined into [w e] until their image is shorter than
    ``resolution``; each leaf goes to the cell holding its midpoint.
    ``straddle`` collects, per cell, the mass of leaves crossing one of its
    boundaries and bounds the assignment error.  Appending e multiplies the
    conformal mass by L[tail', tail] nu(tail') / (lam nu(tail)), so measures
    of subsystem operators stay on their subsystem.
    """
    if which not in ("mu", "nu"):
        raise InputError("which must be 'mu' or 'nu'")
    if op.shift is None:
        raise InputError("pushforward needs an operator assembled on a shift")
    boundaries = np.asarray(boundaries, dtype=float)
    if resolution is None:
        resolution = float(np.min(np.diff(boundaries))) / 16
    shift = op.shift
    d = op.depth
    lam = triplet.lam
    nu = triplet.nu
    pos = op.position
    dense = op.dense
    states = shift.states
    succ = shift.A.succ
    index_of = shift.space.index_of
    coeffs = _affine_coeffs(sys)

    def image(word: tuple, comp) -> tuple[float, float]:
        lo, hi = sys.intervals[sys.edge(word[-1]).t]
        if comp is None:
            return word_image(sys, word)
        A, B = comp
        x, y = A * lo + B, A * hi + B
        return min(x, y), max(x, y)

    mids, los, his, masses = [], [], [], []
    stack = []
    for w in enumerate_cylinders(shift, d).words:
        m = float(nu[pos[w]])
        if m <= 0:
            continue
        comp = None
        if coeffs is not None:
            A, B = 1.0, 0.0
            for e in w:
                a, b = coeffs[e]
                A, B = A * a, A * b + B
            comp = (A, B)
        head = triplet.h[pos[w]] if which == "mu" else 1.0
        stack.append((w, comp, m, head))
    while stack:
        w, comp, m, head = stack.pop()
        lo, hi = image(w, comp)
        if hi - lo <= resolution or len(w) >= max_length:
            mids.append(0.5 * (lo + hi))
            los.append(lo)
            his.append(hi)
            masses.append(m * head)
            continue
        tail = w[len(w) - d :]
        col = pos[tail]
        for b_idx in succ[index_of(w[-1])]:
            e = states[b_idx]
            tail2 = tail[1:] + (e,)
            row = pos.get(tail2)
            if row is None or dense[row, col] <= 0 or nu[row] <= 0:
                continue
            child = m * dense[row, col] * nu[row] / (lam * nu[col])
            if comp is not None:
                a, b = coeffs[e]
                child_comp = (comp[0] * a, comp[0] * b + comp[1])
            else:
                child_comp = None
            stack.append((w + (e,), child_comp, child, head))

    ncell = len(boundaries) - 1
    mids = np.asarray(mids)
    masses = np.asarray(masses)
    cell = np.clip(np.searchsorted(boundaries, mids, side="right") - 1, 0, ncell - 1)
    out = np.bincount(cell, weights=masses, minlength=ncell)
    first = np.clip(np.searchsorted(boundaries, np.asarray(los), side="right") - 1, 0, ncell - 1)
    last = np.clip(np.searchsorted(boundaries, np.asarray(his), side="left") - 1, 0, ncell - 1)
    straddle = np.zeros(ncell)
    crossing = first != last
    np.add.at(straddle, first[crossing], masses[crossing])
    np.add.at(straddle, last[crossing], masses[crossing])
    return CellMasses(boundaries, out, straddle, len(masses))
