"""Small reference chains used by the shipped configs, tests and verify suites."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .potential import PerturbedFamily
from .shift_core import MarkovShift


def matrix_family_doc(base: np.ndarray, slope: np.ndarray, kmax: int = 20) -> dict:
    """Family document with row-normalized weights base + eps * slope on the grid 2**-k."""
    return {
        "matrix": {"base": np.asarray(base).tolist(), "slope": np.asarray(slope).tolist(), "normalize_rows": True},
        "eps_grid": {"base": 2.0, "kmin": 1, "kmax": kmax},
    }


def support_shift(base, slope, name: str = "chain") -> MarkovShift:
    """Shift on states 1..n over the joint support of the base and slope matrices."""
    base = np.asarray(base, dtype=float)
    slope = np.asarray(slope, dtype=float)
    return MarkovShift.from_array(((base != 0) | (slope != 0)).astype(int), name=name)


def family_from_doc(doc: dict, grid: Iterable[float] | None = None) -> tuple[MarkovShift, PerturbedFamily]:
    mat = doc["matrix"]
    shift = support_shift(mat["base"], mat["slope"])
    if grid is None:
        return shift, PerturbedFamily.from_dict(doc, shift)
    return shift, PerturbedFamily.from_matrices(shift, mat["base"], mat["slope"], grid, mat.get("normalize_rows", False))


def two_well_matrices(leak_right: float = 1.0, leak_left: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Wells {1,2} and {3,4}: rows put (1-eps)/2 on each own state and leak*eps/2 on each other state."""
    base = np.kron(np.eye(2), np.full((2, 2), 0.5))
    slope = np.kron(np.eye(2), np.full((2, 2), -0.5))
    slope[:2, 2:] = leak_right / 2
    slope[2:, :2] = leak_left / 2
    return base, slope


def six_state_matrices() -> tuple[np.ndarray, np.ndarray]:
    """The four-state chain plus a transient block {5,6} of lower pressure.

    Rows 5 and 6 put 1/4 on each of 5, 6, 1 and 3, so the block {5,6} has
    spectral radius 1/2.  States 2 and 4 also leak eps/4 into state 5.
    """
    base = np.zeros((6, 6))
    slope = np.zeros((6, 6))
    b4, s4 = two_well_matrices(1.0, 2.0)
    base[:4, :4] = b4
    slope[:4, :4] = s4
    slope[1, 4] = slope[3, 4] = 0.25
    base[4:, [4, 5, 0, 2]] = 0.25
    return base, slope


def symmetric_two_well(grid: Iterable[float] | None = None) -> tuple[MarkovShift, PerturbedFamily]:
    return family_from_doc(matrix_family_doc(*two_well_matrices(1.0, 1.0)), grid)


def four_state_chain(grid: Iterable[float] | None = None) -> tuple[MarkovShift, PerturbedFamily]:
    """Leak eps out of {1,2} against 2 eps out of {3,4}; the first well keeps 2/3."""
    return family_from_doc(matrix_family_doc(*two_well_matrices(1.0, 2.0)), grid)


def six_state_chain(grid: Iterable[float] | None = None) -> tuple[MarkovShift, PerturbedFamily]:
    return family_from_doc(matrix_family_doc(*six_state_matrices()), grid)


def four_state_stationary(eps: float) -> np.ndarray:
    """Closed-form stationary vector of :func:`four_state_chain` at eps."""
    left = 2.0 / (3.0 + eps)
    return np.array([left / 2, left / 2, (1 - left) / 2, (1 - left) / 2])


def stochastic_stationary(P: np.ndarray) -> np.ndarray:
    """Stationary vector of a stochastic matrix via the bordered linear system."""
    n = P.shape[0]
    M = np.vstack([P.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    return np.linalg.lstsq(M, rhs, rcond=None)[0]
