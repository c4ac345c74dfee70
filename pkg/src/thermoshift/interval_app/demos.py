"""Reference interval systems: the doubling map and split-interval families."""

from __future__ import annotations

from typing import Sequence

from .family import PerturbedIntervalFamily

DEFAULT_GRID = (1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3)


def doubling_doc() -> dict:
    """Inverse branches x/2 and x/2 + 1/2 of the doubling map on [0, 1]."""
    return {
        "name": "doubling",
        "vertices": [1],
        "intervals": {"1": [0.0, 1.0]},
        "edges": [
            {"id": 1, "i": 1, "t": 1, "map": {"type": "affine", "a": 0.5, "b": 0.0}},
            {"id": 2, "i": 1, "t": 1, "map": {"type": "affine", "a": 0.5, "b": 0.5}},
        ],
    }


def split_doc(rates: Sequence[float], successors: Sequence[int] | None = None, grid: Sequence[float] = DEFAULT_GRID) -> dict:
    """[0, 1] cut into n equal pieces, each a full two-branch system, joined by vanishing branches.

    Piece v keeps two persistent branches of slope (1 - k_v eps)/2 onto its
    outer parts and a vanishing branch of slope k_v eps from piece
    ``successors[v]`` onto its middle, so a uniformly distributed point of
    piece v leaves it with probability k_v eps per step.
    """
    n = len(rates)
    succ = list(successors) if successors is not None else [(v + 1) % n + 1 for v in range(n)]
    L = 1.0 / n
    intervals = {str(v + 1): [v * L, (v + 1) * L] for v in range(n)}
    edges = []
    for v in range(n):
        lo, k = v * L, float(rates[v])
        edges.append({"id": 3 * v + 1, "i": v + 1, "t": v + 1, "map": {"type": "affine", "a": [0.5, -k / 2], "b": [lo / 2, lo * k / 2]}})
        edges.append({"id": 3 * v + 2, "i": v + 1, "t": succ[v], "map": {"type": "vanishing", "target": lo + L / 2, "scale_of_eps": k}})
        edges.append(
            {"id": 3 * v + 3, "i": v + 1, "t": v + 1, "map": {"type": "affine", "a": [0.5, -k / 2], "b": [lo / 2 + L / 2, k * (L + lo) / 2]}}
        )
    return {"name": f"split-{n}", "vertices": list(range(1, n + 1)), "intervals": intervals, "edges": edges, "eps": list(grid)}


def two_half_family(k_left: float = 1.0, k_right: float = 1.0, grid: Sequence[float] = DEFAULT_GRID) -> PerturbedIntervalFamily:
    """Halves [0,1/2] and [1/2,1] leaking at rates k_left eps and k_right eps.

    The left half carries k_right / (k_left + k_right) of the invariant mass
    at every eps.
    """
    return PerturbedIntervalFamily.from_dict(split_doc([k_left, k_right], grid=grid), "two-half")


def ring_family(m: int = 3, grid: Sequence[float] = DEFAULT_GRID) -> PerturbedIntervalFamily:
    """m equal pieces, each leaking at rate eps into the next one."""
    return PerturbedIntervalFamily.from_dict(split_doc([1.0] * m, grid=grid), f"ring-{m}")
