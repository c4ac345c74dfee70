"""Perturbed interval families and their limit-graph structure."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from ..errors import InputError
from ..potential import PerturbedFamily, default_grid
from ..shift_core import MarkovShift
from .coding import geometric_potential
from .system import Clause, IntervalSystem, validate


@dataclass(frozen=True, eq=False)
class PerturbedIntervalFamily:
    """An interval system whose branches depend on eps, sampled on a decreasing grid."""

    template: IntervalSystem
    grid: tuple

    def __post_init__(self):
        grid = tuple(float(e) for e in self.grid)
        if not grid or any(e <= 0 for e in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
            raise InputError("interval family grid must be positive and strictly decreasing")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_dict(cls, doc: Mapping, name: str = "family") -> "PerturbedIntervalFamily":
        grid = doc.get("eps")
        return cls(IntervalSystem.from_dict(doc, name), tuple(grid) if grid is not None else default_grid(10))

    @classmethod
    def from_json(cls, path: str | Path) -> "PerturbedIntervalFamily":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), Path(path).stem)

    def system(self, eps: float) -> IntervalSystem:
        return self.template.at(eps)

    def limit(self) -> IntervalSystem:
        return self.template.limit()

    def shift(self) -> MarkovShift:
        return self.template.shift()

    def persistent_edges(self) -> tuple:
        return tuple(sorted(e.id for e in self.template.edges if e.branch.persistent))

    def limit_components(self) -> list[tuple]:
        """Vertex sets of the strongly connected subgraphs H of the limit graph."""
        return self.limit().graph.strong_components()

    def edge_classes(self) -> list[tuple]:
        """E_H = {e : i(e) in V_H} for every limit component H, ordered as the components."""
        return [tuple(sorted(e.id for e in self.template.edges if e.i in set(H))) for H in self.limit_components()]

    def potential_family(self, depth: int = 1, grid: Iterable[float] | None = None) -> PerturbedFamily:
        grid = tuple(grid) if grid is not None else self.grid
        members = tuple(geometric_potential(self.system(e), depth).potential for e in grid)
        return PerturbedFamily(grid, members, geometric_potential(self.template.at(0.0), depth).potential)

    def check_conditions(self, samples: int = 1000) -> dict:
        """Pass/fail table of the perturbation hypotheses on the declared graph."""
        out: dict = {}
        out["graph_strongly_connected"] = Clause(self.template.graph.is_strongly_connected(), 1.0)
        rows = []
        for eps in self.grid:
            sys_e = self.system(eps)
            dist = dev = vanish = 0.0
            for e in self.template.edges:
                lo, hi = self.template.intervals[e.t]
                xs = np.linspace(lo, hi, 2 if e.branch.affine else samples)
                if e.branch.persistent:
                    dist = max(dist, float(np.max(np.abs(e.branch.value(eps, xs) - e.branch.value(0.0, xs)))))
                    dev = max(dev, float(np.max(np.abs(e.branch.derivative(eps, xs) - e.branch.derivative(0.0, xs)))))
                else:
                    vanish = max(vanish, float(np.max(np.abs(e.branch.derivative(eps, xs)))))
            validate(sys_e, samples)
            rows.append((eps, dist, dev, vanish))
        table = np.array(rows)
        # Deviations at the smallest eps must be within 10x of linear decay from the largest.
        rate = table[0, 1:] / table[0, 0]
        tail = table[-1, 1:]
        linear = bool(np.all(tail <= 10 * rate * self.grid[-1] + 1e-15))
        out["uniform_convergence"] = Clause(linear, float(np.max(tail)))
        limit_report = validate(self.limit(), samples)
        out["limit_system_valid"] = Clause(limit_report.ok, 0.0 if limit_report.ok else 1.0)
        comps = self.limit_components()
        counts = {v: sum(v in set(H) for H in comps) for v in self.template.graph.vertices}
        unique = all(c == 1 for c in counts.values())
        out["unique_absorbing_component"] = Clause(unique, float(max(counts.values(), default=0)), detail="checked on the declared graph")
        classes = self.edge_classes()
        flat = [e for c in classes for e in c]
        partition = len(flat) == len(set(flat)) and set(flat) == set(self.template.edge_ids)
        out["edge_classes_partition"] = Clause(partition, float(len(classes)))
        out["convergence_table"] = table
        return out
