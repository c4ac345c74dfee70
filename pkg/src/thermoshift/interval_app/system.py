"""Piecewise expanding Markov interval systems given by their inverse branches.

A system is a finite directed multigraph with an interval J_v per vertex and
one contracting injective branch T_e : J_t(e) -> J_i(e) per edge.  Branches
may depend on a perturbation parameter eps; a *vanishing* branch collapses to
a point as eps -> 0 and is dropped from the limit graph.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from ..errors import ConstructionError, InputError
from ..shift_core import MarkovShift, StateSpace, TransitionMatrix, transitive_components

AFFINE_TOL = 1e-12


@dataclass(frozen=True)
class AffineBranch:
    """T(x) = a(eps) x + b(eps) with coefficients affine in eps."""

    a: tuple[float, float]
    b: tuple[float, float]

    affine = True
    persistent = True

    def coeffs(self, eps: float) -> tuple[float, float]:
        return self.a[0] + self.a[1] * eps, self.b[0] + self.b[1] * eps

    def value(self, eps: float, x):
        a, b = self.coeffs(eps)
        return a * np.asarray(x, dtype=float) + b

    def derivative(self, eps: float, x):
        return np.full(np.shape(x), self.coeffs(eps)[0])

    def inverse(self, eps: float, y):
        a, b = self.coeffs(eps)
        return (np.asarray(y, dtype=float) - b) / a

    def to_dict(self) -> dict:
        return {"type": "affine", "a": list(self.a), "b": list(self.b)}


@dataclass(frozen=True)
class VanishingBranch:
    """T(eps, x) = target + scale * eps * (x - mid), collapsing onto ``target`` at eps = 0."""

    target: float
    scale: float
    mid: float

    affine = True
    persistent = False

    def coeffs(self, eps: float) -> tuple[float, float]:
        a = self.scale * eps
        return a, self.target - a * self.mid

    def value(self, eps: float, x):
        return self.target + self.scale * eps * (np.asarray(x, dtype=float) - self.mid)

    def derivative(self, eps: float, x):
        return np.full(np.shape(x), self.scale * eps)

    def inverse(self, eps: float, y):
        return self.mid + (np.asarray(y, dtype=float) - self.target) / (self.scale * eps)

    def to_dict(self) -> dict:
        return {"type": "vanishing", "target": self.target, "scale_of_eps": self.scale}


@dataclass(frozen=True)
class ParametricBranch:
    """Differentiable branch given by callables of (eps, x); validated by sampling."""

    fn: Callable[[float, np.ndarray], np.ndarray]
    deriv: Callable[[float, np.ndarray], np.ndarray]
    inv: Callable[[float, np.ndarray], np.ndarray] | None = None
    persistent: bool = True

    affine = False

    def value(self, eps: float, x):
        return self.fn(eps, np.asarray(x, dtype=float))

    def derivative(self, eps: float, x):
        return self.deriv(eps, np.asarray(x, dtype=float))

    def inverse(self, eps: float, y):
        if self.inv is not None:
            return self.inv(eps, np.asarray(y, dtype=float))
        raise InputError("parametric branch has no inverse; supply inv= to iterate the forward map")

    def to_dict(self) -> dict:
        return {"type": "parametric"}


Branch = AffineBranch | VanishingBranch | ParametricBranch


@dataclass(frozen=True)
class Edge:
    id: Any
    i: Any
    t: Any
    branch: Branch


@dataclass(frozen=True)
class BranchGraph:
    vertices: tuple
    edges: tuple

    def restrict(self, edge_ids) -> "BranchGraph":
        keep = set(edge_ids)
        return BranchGraph(self.vertices, tuple(e for e in self.edges if e.id in keep))

    def strong_components(self) -> list[tuple]:
        """Nontrivial strongly connected vertex sets, ordered by minimal vertex."""
        space = StateSpace.of(self.vertices)
        M = TransitionMatrix.from_edges(space, {(e.i, e.t) for e in self.edges})
        part = transitive_components(M)
        return [c for c, k in zip(part.components, part.kinds) if k != "degenerate"]

    def is_strongly_connected(self) -> bool:
        comps = self.strong_components()
        return len(comps) == 1 and len(comps[0]) == len(self.vertices)


@dataclass(frozen=True, eq=False)
class IntervalSystem:
    """Interval system frozen at one parameter value ``eps`` (0 for the limit)."""

    graph: BranchGraph
    intervals: Mapping
    eps: float = 0.0
    name: str = field(default="system", compare=False)

    def __post_init__(self):
        ids = [e.id for e in self.graph.edges]
        if len(set(ids)) != len(ids):
            raise InputError("edge ids must be unique")
        for e in self.graph.edges:
            for v in (e.i, e.t):
                if v not in self.intervals:
                    raise InputError(f"edge {e.id!r} refers to vertex {v!r} without an interval")

    @property
    def edges(self) -> tuple:
        return self.graph.edges

    @property
    def edge_ids(self) -> tuple:
        return tuple(sorted(e.id for e in self.graph.edges))

    def edge(self, eid) -> Edge:
        for e in self.graph.edges:
            if e.id == eid:
                return e
        raise InputError(f"unknown edge {eid!r}")

    def at(self, eps: float) -> "IntervalSystem":
        return replace(self, eps=float(eps))

    def limit(self) -> "IntervalSystem":
        """The eps = 0 subsystem on the persistent edges."""
        keep = [e.id for e in self.graph.edges if e.branch.persistent]
        return replace(self, graph=self.graph.restrict(keep), eps=0.0)

    def active_edges(self) -> tuple:
        return tuple(e for e in self.graph.edges if e.branch.persistent or self.eps > 0)

    def shift(self) -> MarkovShift:
        """Edge shift: e may precede e' iff t(e) = i(e')."""
        space = StateSpace.of(self.edge_ids)
        pairs = [(e.id, f.id) for e in self.graph.edges for f in self.graph.edges if e.t == f.i]
        return MarkovShift(TransitionMatrix.from_edges(space, pairs), name=self.name)

    def T(self, eid, x):
        return self.edge(eid).branch.value(self.eps, x)

    def dT(self, eid, x):
        return self.edge(eid).branch.derivative(self.eps, x)

    def image(self, eid, samples: int = 1000) -> tuple[float, float]:
        e = self.edge(eid)
        lo, hi = self.intervals[e.t]
        xs = np.array([lo, hi]) if e.branch.affine else np.linspace(lo, hi, samples)
        ys = e.branch.value(self.eps, xs)
        return float(np.min(ys)), float(np.max(ys))

    def contraction(self, samples: int = 1000) -> float:
        """sup |T'| over all active edges."""
        return max((_sup_derivative(self, e, samples) for e in self.active_edges()), default=0.0)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.graph.vertices),
            "intervals": {str(v): list(self.intervals[v]) for v in self.graph.vertices},
            "edges": [{"id": e.id, "i": e.i, "t": e.t, "map": e.branch.to_dict()} for e in self.graph.edges],
        }

    @classmethod
    def from_dict(cls, doc: Mapping, name: str = "system") -> "IntervalSystem":
        for key in ("vertices", "intervals", "edges"):
            if key not in doc:
                raise InputError(f"interval system is missing field {key!r}")
        vertices = tuple(doc["vertices"])
        raw = doc["intervals"]
        intervals = {}
        for v in vertices:
            span = raw.get(str(v), raw.get(v)) if isinstance(raw, Mapping) else None
            if span is None or len(span) != 2:
                raise InputError(f"vertex {v!r} needs an interval [lo, hi]")
            intervals[v] = (float(span[0]), float(span[1]))
        edges = []
        for row in doc["edges"]:
            try:
                eid, i, t, desc = row["id"], row["i"], row["t"], row["map"]
            except KeyError as exc:
                raise InputError(f"edge entry is missing field {exc.args[0]!r}") from None
            if t not in intervals:
                raise InputError(f"edge {eid!r} has unknown terminal vertex {t!r}")
            edges.append(Edge(eid, i, t, _branch_from(desc, intervals[t], eid)))
        return cls(BranchGraph(vertices, tuple(edges)), intervals, 0.0, doc.get("name", name))

    @classmethod
    def from_json(cls, path: str | Path) -> "IntervalSystem":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), Path(path).stem)


def _pair(value, what: str) -> tuple[float, float]:
    if isinstance(value, (int, float)):
        return float(value), 0.0
    if isinstance(value, Sequence) and len(value) == 2:
        return float(value[0]), float(value[1])
    raise InputError(f"{what} must be a number or [value, eps_slope]")


def _branch_from(desc: Mapping, domain: tuple[float, float], eid) -> Branch:
    kind = desc.get("type")
    if kind == "affine":
        if "a" not in desc or "b" not in desc:
            raise InputError(f"affine map of edge {eid!r} needs 'a' and 'b'")
        return AffineBranch(_pair(desc["a"], "a"), _pair(desc["b"], "b"))
    if kind == "vanishing":
        if "target" not in desc:
            raise InputError(f"vanishing map of edge {eid!r} needs 'target'")
        return VanishingBranch(float(desc["target"]), float(desc.get("scale_of_eps", 1.0)), 0.5 * (domain[0] + domain[1]))
    raise InputError(f"edge {eid!r}: unknown map type {kind!r}")


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Clause:
    passed: bool
    value: float
    sampled: bool = False
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    clauses: dict

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    def to_dict(self) -> dict:
        return {k: {"passed": c.passed, "value": c.value, "sampled": c.sampled, "detail": c.detail} for k, c in self.clauses.items()}


def validate(sys: IntervalSystem, samples: int = 1000, gap_tol: float = 1e-9, strict: bool = True) -> ValidationReport:
    """Check the structural conditions of an interval system at its current eps.

    Affine checks are exact up to ``AFFINE_TOL``; parametric branches are
    sampled on ``samples`` points and labeled as sampled.  With ``strict``,
    overlaps, escaping images, non-injective or non-contracting branches
    raise :class:`ConstructionError`.
    """
    clauses: dict = {}
    spans = sorted(sys.intervals.values())
    cover_err = abs(spans[0][0]) + abs(spans[-1][1] - 1.0)
    cover_err += sum(abs(b[0] - a[1]) for a, b in zip(spans, spans[1:]))
    bad_span = any(hi <= lo for lo, hi in spans)
    clauses["cover"] = Clause(cover_err <= AFFINE_TOL and not bad_span, cover_err)

    active = sys.active_edges()
    sampled = any(not e.branch.affine for e in active)
    hard = []
    images = {}
    contain_err = 0.0
    sup_deriv = 0.0
    inj_ok = True
    distortion = 0.0
    for e in active:
        lo, hi = sys.intervals[e.t]
        xs = np.array([lo, hi]) if e.branch.affine else np.linspace(lo, hi, samples)
        ys = np.asarray(e.branch.value(sys.eps, xs))
        d = np.asarray(e.branch.derivative(sys.eps, xs))
        images[e.id] = (float(ys.min()), float(ys.max()))
        ilo, ihi = sys.intervals[e.i]
        contain_err = max(contain_err, ilo - ys.min(), ys.max() - ihi, 0.0)
        sup_deriv = max(sup_deriv, float(np.max(np.abs(d))))
        if np.any(d == 0) or (np.any(d > 0) and np.any(d < 0)):
            inj_ok = False
            hard.append(f"branch {e.id!r} is not injective")
        if not e.branch.affine and len(xs) > 1:
            logd = np.log(np.abs(d))
            distortion = max(distortion, float(np.max(np.abs(np.diff(logd)) / np.diff(xs))))
    clauses["image_containment"] = Clause(contain_err <= AFFINE_TOL, contain_err, sampled)
    clauses["injective"] = Clause(inj_ok, 0.0 if inj_ok else 1.0, sampled)
    clauses["expanding"] = Clause(sup_deriv < 1.0, sup_deriv, sampled)
    clauses["bounded_distortion"] = Clause(math.isfinite(distortion), distortion, sampled)
    if contain_err > AFFINE_TOL:
        hard.append(f"a branch image leaves its target interval by {contain_err:.3g}")
    if sup_deriv >= 1.0:
        hard.append(f"sup |T'| = {sup_deriv:.6g} is not below 1")

    overlap = 0.0
    for v in sys.graph.vertices:
        spans_v = sorted(images[e.id] for e in active if e.i == v)
        for (a_lo, a_hi), (b_lo, b_hi) in zip(spans_v, spans_v[1:]):
            overlap = max(overlap, a_hi - b_lo)
    clauses["open_set_condition"] = Clause(overlap <= AFFINE_TOL, max(overlap, 0.0), sampled)
    if overlap > AFFINE_TOL:
        hard.append(f"branch images overlap by {overlap:.3g}")

    gap = 0.0
    for v in sys.graph.vertices:
        lo, hi = sys.intervals[v]
        spans_v = sorted(images[e.id] for e in active if e.i == v)
        if not spans_v:
            gap = max(gap, hi - lo)
            continue
        gap = max(gap, spans_v[0][0] - lo, hi - spans_v[-1][1])
        for (_, a_hi), (b_lo, _) in zip(spans_v, spans_v[1:]):
            gap = max(gap, b_lo - a_hi)
    clauses["closure"] = Clause(gap <= gap_tol, gap, sampled)
    total = sum(_sup_derivative(sys, e, samples) for e in active)
    clauses["summability"] = Clause(math.isfinite(total), total, sampled)
    if strict and hard:
        raise ConstructionError("; ".join(hard))
    return ValidationReport(clauses)


def _sup_derivative(sys: IntervalSystem, e: Edge, samples: int) -> float:
    lo, hi = sys.intervals[e.t]
    xs = np.array([lo]) if e.branch.affine else np.linspace(lo, hi, samples)
    return float(np.max(np.abs(e.branch.derivative(sys.eps, xs))))
