"""Potentials as tables of weights e^phi on cylinders, and perturbed families.

Weights rather than values are stored so that a forbidden transition
(phi = -inf) is the exact number 0.  A potential of depth ``d`` is keyed by
admissible words of length ``d + 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError
from .shift_core import MarkovShift, PointSurrogate, TransitionMatrix, Word, enumerate_cylinders, is_admissible


def default_grid(kmax: int = 20) -> tuple[float, ...]:
    """Geometric grid eps_k = 2**-k for k = 1..kmax."""
    return tuple(2.0**-k for k in range(1, kmax + 1))


@dataclass(frozen=True)
class CylinderPotential:
    """Locally constant potential given by weights on depth-(d+1) cylinders.

    Parameters
    ----------
    depth : int
        The potential depends on the first ``depth + 1`` symbols.
    weights : mapping
        Word (tuple of state ids) of length ``depth + 1`` -> e^phi >= 0.
    tail_bound : float
        Bound on the summability sum carried by states outside the truncation.
    default : float, optional
        Weight used for admissible words missing from ``weights``.
    """

    depth: int
    weights: Mapping[tuple, float]
    tail_bound: float = 0.0
    default: float | None = None
    name: str = field(default="phi", compare=False)

    def __post_init__(self):
        if self.depth < 1:
            raise InputError("potential depth must be at least 1")
        table = {}
        for key, value in dict(self.weights).items():
            key = tuple(key)
            if len(key) != self.depth + 1:
                raise InputError(f"weight key {key!r} must have length {self.depth + 1}")
            value = float(value)
            if not value >= 0.0 or math.isinf(value):
                raise InputError(f"weight for {key!r} must be a finite nonnegative number")
            table[key] = value
        if self.tail_bound < 0:
            raise InputError("tail_bound must be nonnegative")
        if self.default is not None and not self.default >= 0.0:
            raise InputError("default weight must be nonnegative")
        object.__setattr__(self, "weights", MappingProxyType(table))

    def weight(self, key: Sequence) -> float:
        try:
            return self.weights[tuple(key)]
        except KeyError:
            if self.default is not None:
                return self.default
            raise InputError(f"potential has no weight for word {tuple(key)!r}") from None

    def check_keys(self, shift: MarkovShift) -> None:
        for key in self.weights:
            if not is_admissible(key, shift.A):
                raise InputError(f"weight key {key!r} is not admissible")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_function(cls, shift: MarkovShift, depth: int, fn: Callable[[Word], float], **kw) -> "CylinderPotential":
        words = enumerate_cylinders(shift, depth + 1).words
        return cls(depth, {w: fn(w) for w in words}, **kw)

    @classmethod
    def constant(cls, shift: MarkovShift, value: float = 1.0, depth: int = 1) -> "CylinderPotential":
        return cls.from_function(shift, depth, lambda w: value, name="constant")

    @classmethod
    def from_first_symbol(cls, shift: MarkovShift, table: Mapping, depth: int = 1) -> "CylinderPotential":
        return cls.from_function(shift, depth, lambda w: table[w[0]])

    @classmethod
    def from_matrix(cls, shift: MarkovShift, P) -> "CylinderPotential":
        """Depth-1 table with weight P[a, b] on the cylinder [a b]."""
        P = np.asarray(P, dtype=float)
        idx = shift.space.index_of
        return cls.from_function(shift, 1, lambda w: P[idx(w[0]), idx(w[1])])

    @classmethod
    def from_dict(cls, doc: Mapping, shift: MarkovShift | None = None) -> "CylinderPotential":
        try:
            depth = int(doc["depth"])
            rows = doc["weights"]
        except KeyError as exc:
            raise InputError(f"potential definition is missing field {exc.args[0]!r}") from None
        table = {}
        for row in rows:
            if len(row) != 2:
                raise InputError(f"weight entry {row!r} must be [word, value]")
            word, value = row
            table[tuple(word)] = value
        pot = cls(depth, table, float(doc.get("tail_bound", 0.0)), doc.get("default"), doc.get("name", "phi"))
        if shift is not None:
            pot.check_keys(shift)
        return pot

    def to_dict(self) -> dict:
        out = {
            "depth": self.depth,
            "weights": [[list(k), v] for k, v in sorted(self.weights.items())],
            "tail_bound": self.tail_bound,
        }
        if self.default is not None:
            out["default"] = self.default
        return out

    # -- derived quantities -------------------------------------------------

    def lip2(self, theta: float = 0.5) -> float:
        """Exact weak-Lipschitz seminorm [phi]_2 of the table.

        Two points in a common 2-cylinder first differing at index n can only
        see different weights when n <= depth, so it suffices to compare keys
        sharing their first n symbols.
        """
        best = 0.0
        for n in range(2, self.depth + 1):
            groups: dict[tuple, list[float]] = {}
            for key, value in self.weights.items():
                groups.setdefault(key[:n], []).append(value)
            for values in groups.values():
                positive = [v for v in values if v > 0]
                if not positive:
                    continue
                if len(positive) < len(values):
                    return math.inf
                spread = math.log(max(positive)) - math.log(min(positive))
                best = max(best, spread / theta**n)
        return best

    def first_symbol_sup(self) -> dict:
        """sup over [a] of e^phi for every state a appearing in the table."""
        out: dict = {}
        for key, value in self.weights.items():
            out[key[0]] = max(out.get(key[0], 0.0), value)
        return out

    def summability(self) -> float:
        return math.fsum(self.first_symbol_sup().values()) + self.tail_bound

    def zero_pattern(self, shift: MarkovShift) -> TransitionMatrix:
        """Transition matrix B with B(ab)=1 iff phi is finite somewhere on [ab]."""
        edges = {(w[0], w[1]) for w in enumerate_cylinders(shift, self.depth + 1).words if self.weight(w) > 0}
        return TransitionMatrix.from_edges(shift.space, edges)


@dataclass(frozen=True)
class PerturbedFamily:
    """Potentials phi(eps, .) on a strictly decreasing grid, with their eps = 0 limit."""

    grid: tuple
    members: tuple
    limit: CylinderPotential

    def __post_init__(self):
        grid = tuple(float(e) for e in self.grid)
        if not grid:
            raise InputError("family grid must be nonempty")
        if any(e <= 0 for e in grid):
            raise InputError("grid values must be positive")
        if any(a <= b for a, b in zip(grid, grid[1:])):
            raise InputError("grid must be strictly decreasing")
        if len(self.members) != len(grid):
            raise InputError("one member potential per grid value is required")
        depths = {m.depth for m in self.members} | {self.limit.depth}
        if len(depths) != 1:
            raise InputError("all members must share the limit's depth")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "members", tuple(self.members))

    @property
    def depth(self) -> int:
        return self.limit.depth

    def member(self, eps: float) -> CylinderPotential:
        for e, m in zip(self.grid, self.members):
            if e == eps:
                return m
        raise InputError(f"eps={eps!r} is not on the family grid")

    @classmethod
    def from_function(cls, fn: Callable[[float], CylinderPotential], grid: Iterable[float] | None = None) -> "PerturbedFamily":
        grid = tuple(grid) if grid is not None else default_grid()
        return cls(grid, tuple(fn(e) for e in grid), fn(0.0))

    @classmethod
    def linear(
        cls,
        shift: MarkovShift,
        base: CylinderPotential,
        slope: CylinderPotential,
        grid: Iterable[float] | None = None,
        normalize_rows: bool = False,
    ) -> "PerturbedFamily":
        """Family with weights base + eps * slope, optionally row-normalized.

        Row normalization (depth 1 only) divides the weights on [a .] by their
        sum, turning each member into a stochastic matrix.
        """
        if base.depth != slope.depth:
            raise InputError("base and slope must share the same depth")
        if normalize_rows and base.depth != 1:
            raise InputError("row normalization needs depth-1 tables")
        words = enumerate_cylinders(shift, base.depth + 1).words

        def member(eps: float) -> CylinderPotential:
            table = {w: base.weight(w) + eps * slope.weight(w) for w in words}
            if normalize_rows:
                sums: dict = {}
                for w, v in table.items():
                    sums[w[0]] = sums.get(w[0], 0.0) + v
                table = {w: (v / sums[w[0]] if sums[w[0]] > 0 else 0.0) for w, v in table.items()}
            return CylinderPotential(base.depth, table, base.tail_bound + eps * slope.tail_bound)

        return cls.from_function(member, grid)

    @classmethod
    def from_matrices(
        cls,
        shift: MarkovShift,
        base,
        slope,
        grid: Iterable[float] | None = None,
        normalize_rows: bool = False,
    ) -> "PerturbedFamily":
        """Depth-1 family with weights P(eps) = base + eps * slope on the cylinders [a b].

        ``slope`` may be negative as long as every member stays nonnegative;
        with ``normalize_rows`` each member is rescaled to a stochastic matrix.
        """
        base = np.asarray(base, dtype=float)
        slope = np.asarray(slope, dtype=float)
        n = len(shift.states)
        if base.shape != (n, n) or slope.shape != (n, n):
            raise InputError(f"base and slope must be {n}x{n} matrices")

        def member(eps: float) -> CylinderPotential:
            P = base + eps * slope
            if np.any(P < 0):
                raise InputError(f"member at eps={eps!r} has negative weights")
            if normalize_rows:
                sums = P.sum(axis=1, keepdims=True)
                P = np.divide(P, sums, out=np.zeros_like(P), where=sums > 0)
            return CylinderPotential.from_matrix(shift, P)

        return cls.from_function(member, grid)

    @classmethod
    def from_dict(cls, doc: Mapping, shift: MarkovShift | None = None) -> "PerturbedFamily":
        grid = _grid_from(doc)
        if "matrix" in doc:
            if shift is None:
                raise InputError("a matrix family needs the shift definition")
            mat = doc["matrix"]
            for key in ("base", "slope"):
                if key not in mat:
                    raise InputError(f"matrix family is missing field {key!r}")
            return cls.from_matrices(shift, mat["base"], mat["slope"], grid, bool(mat.get("normalize_rows", False)))
        if "members" in doc:
            if "limit" not in doc:
                raise InputError("family definition is missing field 'limit'")
            members = tuple(CylinderPotential.from_dict(m, shift) for m in doc["members"])
            return cls(grid, members, CylinderPotential.from_dict(doc["limit"], shift))
        if "linear" in doc:
            if shift is None:
                raise InputError("a linear family needs the shift definition")
            lin = doc["linear"]
            for key in ("base", "slope"):
                if key not in lin:
                    raise InputError(f"linear family is missing field {key!r}")
            return cls.linear(
                shift,
                CylinderPotential.from_dict(lin["base"], shift),
                CylinderPotential.from_dict(lin["slope"], shift),
                grid,
                bool(lin.get("normalize_rows", False)),
            )
        raise InputError("family definition needs 'members', 'linear' or 'matrix'")

    @classmethod
    def from_json(cls, path: str | Path, shift: MarkovShift | None = None) -> "PerturbedFamily":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), shift)

    def to_dict(self) -> dict:
        return {"eps": list(self.grid), "members": [m.to_dict() for m in self.members], "limit": self.limit.to_dict()}


def _grid_from(doc: Mapping) -> tuple[float, ...]:
    if "eps" in doc:
        return tuple(float(e) for e in doc["eps"])
    if "eps_grid" in doc:
        g = doc["eps_grid"]
        base = float(g.get("base", 2.0))
        return tuple(base ** -k for k in range(int(g.get("kmin", 1)), int(g.get("kmax", 20)) + 1))
    return default_grid()


@dataclass(frozen=True)
class DistortionData:
    lip2: float
    theta: float
    c: float
    c_bd: float

    @classmethod
    def of(cls, potentials: Iterable[CylinderPotential], theta: float = 0.5) -> "DistortionData":
        lip = max((p.lip2(theta) for p in potentials), default=0.0)
        c = lip * theta / (1 - theta)
        return cls(lip, theta, c, math.exp(c * theta**2 / (1 - theta)))

    @classmethod
    def of_family(cls, fam: PerturbedFamily, theta: float = 0.5) -> "DistortionData":
        return cls.of((fam.limit, *fam.members), theta)


def birkhoff_weight(phi: CylinderPotential, w: Sequence, omega: PointSurrogate, shift: MarkovShift | None = None) -> float:
    """e^{S_|w| phi(w . omega)} as a product of window weights."""
    n = len(w)
    if n == 0:
        raise InputError("words have length at least 1")
    seq = tuple(w) + omega.itinerary(phi.depth)
    if shift is not None and not is_admissible(seq, shift.A):
        raise InputError(f"concatenation of {tuple(w)!r} with the point is not admissible")
    out = 1.0
    for j in range(n):
        out *= phi.weight(seq[j : j + phi.depth + 1])
        if out == 0.0:
            return 0.0
    return out


@dataclass(frozen=True)
class RegularityReport:
    A1: float
    A1_members: tuple
    A2: float
    A3: dict
    A3_sup: tuple
    A3_monotone: bool
    sampled: bool


def regularity_report(fam: PerturbedFamily, theta: float = 0.5, sample_budget: int = 100000, seed: int = 0) -> RegularityReport:
    """Diagnostics for the uniform regularity, summability and convergence conditions."""
    members = fam.members
    sampled = any(len(m.weights) > sample_budget for m in (*members, fam.limit))
    if sampled:
        rng = np.random.default_rng(seed)

        def thin(p: CylinderPotential) -> CylinderPotential:
            keys = sorted(p.weights)
            pick = sorted(rng.choice(len(keys), size=sample_budget, replace=False))
            return CylinderPotential(p.depth, {keys[k]: p.weights[keys[k]] for k in pick}, p.tail_bound, p.default)

        members = tuple(thin(m) if len(m.weights) > sample_budget else m for m in members)
    lips = tuple(m.lip2(theta) for m in members)

    sup: dict = {}
    for m in (*fam.members, fam.limit):
        for a, v in m.first_symbol_sup().items():
            sup[a] = max(sup.get(a, 0.0), v)
    A2 = math.fsum(sup.values()) + max((m.tail_bound for m in fam.members), default=0.0)

    A3: dict = {}
    sups = []
    for eps, m in zip(fam.grid, fam.members):
        per_state: dict = {}
        for key in set(m.weights) | set(fam.limit.weights):
            diff = abs(m.weight(key) - fam.limit.weight(key))
            per_state[key[0]] = max(per_state.get(key[0], 0.0), diff)
        A3[eps] = per_state
        sups.append(max(per_state.values(), default=0.0))
    monotone = all(b <= a + 1e-15 for a, b in zip(sups, sups[1:]))
    return RegularityReport(max(lips, default=0.0), lips, A2, A3, tuple(sups), monotone, sampled)


@dataclass(frozen=True)
class PressureEstimate:
    low: float
    high: float
    point: float

    def __iter__(self):
        return iter((self.low, self.high, self.point))


def _log_partition(shift: MarkovShift, phi: CylinderPotential, n: int) -> float:
    """log of sum over admissible n-words of e^{S_n phi} at representative points.

    Representative points extend a word greedily from its last symbol, so the
    sum factorizes through a transfer matrix on depth-d suffixes.
    """
    d = phi.depth
    if n <= d:
        words = enumerate_cylinders(shift, n).words
        total = math.fsum(birkhoff_weight(phi, w, shift.extension(w[-1])) for w in words)
        return math.log(total) if total > 0 else -math.inf
    suffixes = enumerate_cylinders(shift, d).words
    if not suffixes:
        return -math.inf
    pos = {s: k for k, s in enumerate(suffixes)}
    K = np.zeros((len(suffixes), len(suffixes)))
    for s in suffixes:
        for b_idx in shift.A.succ[shift.space.index_of(s[-1])]:
            b = shift.states[b_idx]
            nxt = s[1:] + (b,)
            if nxt in pos:
                K[pos[s], pos[nxt]] += phi.weight(s + (b,))
    tau = np.array([birkhoff_weight(phi, s, shift.extension(s[-1])) for s in suffixes])
    v = np.ones(len(suffixes))
    log_scale = 0.0
    for _ in range(n - d):
        v = v @ K
        top = v.max()
        if top == 0:
            return -math.inf
        v /= top
        log_scale += math.log(top)
    total = float(v @ tau)
    return log_scale + math.log(total) if total > 0 else -math.inf


def pressure_estimate(shift: MarkovShift, phi: CylinderPotential, n: int) -> PressureEstimate:
    """Finite-n pressure (1/n) log Z_n with a distortion/tail bracket.

    The bracket widens the point value by (1/n) log c_bd when n is below the
    potential depth (above it the table is exact) and adds the truncation
    tail to the upper end as log(1 + tail / A2).
    """
    if n < 1:
        raise InputError("n must be at least 1")
    logz = _log_partition(shift, phi, n)
    if logz == -math.inf:
        return PressureEstimate(-math.inf, -math.inf, -math.inf)
    point = logz / n
    width = 0.0 if n >= phi.depth else math.log(DistortionData.of([phi], shift.theta).c_bd) / n
    mass = math.fsum(phi.first_symbol_sup().values())
    tail = math.log1p(phi.tail_bound / mass) if phi.tail_bound > 0 and mass > 0 else 0.0
    return PressureEstimate(point - width, point + width + tail, point)


def pressure_growth(shift: MarkovShift, phi: CylinderPotential, n: int) -> float:
    """log(Z_n / Z_{n-1}); converges geometrically where (1/n) log Z_n converges like 1/n."""
    if n < 2:
        raise InputError("n must be at least 2")
    return _log_partition(shift, phi, n) - _log_partition(shift, phi, n - 1)
