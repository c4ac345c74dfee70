"""Ruelle transfer operators on a cylinder basis and their Perron triplets.

For a depth-``d`` basis the operator acts on functions that are constant on
the cylinders [u], |u| = d:

    (L f)(u) = sum over a with M(a, u0) = 1 of  e^{phi(a u)} f((a u)[:d]),

so row ``u`` of the matrix has its nonzero entries at the columns
``a . u[:d-1]``.  Left vectors are cylinder masses of the conformal measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import InputError
from .potential import CylinderPotential, birkhoff_weight
from .shift_core import MarkovShift, TransitionMatrix, enumerate_cylinders


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Finite nonnegative matrix realizing a transfer operator."""

    basis: tuple
    matrix: scipy.sparse.csr_matrix
    depth: int
    alphabet: tuple
    metadata: Mapping = field(default_factory=dict)
    shift: MarkovShift | None = None
    potential: CylinderPotential | None = None

    def __post_init__(self):
        mat = scipy.sparse.csr_matrix(self.matrix, dtype=float)
        n = len(self.basis)
        if mat.shape != (n, n):
            raise InputError(f"matrix shape {mat.shape} does not match basis size {n}")
        if mat.nnz and mat.data.min() < 0:
            raise InputError("operator entries must be nonnegative")
        mat.eliminate_zeros()
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "basis", tuple(tuple(w) for w in self.basis))

    @classmethod
    def from_array(cls, array, states: Sequence | None = None, **metadata) -> "OperatorMatrix":
        """Depth-1 operator whose basis is the state list itself."""
        arr = np.asarray(array, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InputError("operator matrix must be square")
        states = tuple(states) if states is not None else tuple(range(arr.shape[0]))
        return cls(tuple((s,) for s in states), scipy.sparse.csr_matrix(arr), 1, states, dict(metadata))

    @property
    def size(self) -> int:
        return len(self.basis)

    @cached_property
    def dense(self) -> np.ndarray:
        out = self.matrix.toarray()
        out.setflags(write=False)
        return out

    @cached_property
    def position(self) -> dict:
        return {w: k for k, w in enumerate(self.basis)}

    @cached_property
    def first_symbols(self) -> np.ndarray:
        pos = {s: k for k, s in enumerate(self.alphabet)}
        return np.array([pos[w[0]] for w in self.basis], dtype=int)

    def indices(self, states: Iterable) -> np.ndarray:
        """Basis positions whose first symbol lies in ``states``."""
        wanted = set(states)
        unknown = wanted - set(self.alphabet)
        if unknown:
            raise InputError(f"unknown states {sorted(unknown, key=repr)!r}")
        return np.array([k for k, w in enumerate(self.basis) if w[0] in wanted], dtype=int)

    def indicator(self, states: Iterable) -> np.ndarray:
        out = np.zeros(self.size)
        out[self.indices(states)] = 1.0
        return out

    def to_dict(self) -> dict:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return {
            "basis": [list(w) for w in self.basis],
            "entries": [[int(coo.row[k]), int(coo.col[k]), float(coo.data[k])] for k in order],
        }

    def with_matrix(self, matrix) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, scipy.sparse.csr_matrix(matrix), self.depth, self.alphabet, self.metadata, self.shift, self.potential)


def assemble_operator(
    shift: MarkovShift,
    M: TransitionMatrix | None,
    phi: CylinderPotential,
    depth: int | None = None,
) -> OperatorMatrix:
    """Matrix of L_{M,phi} on the depth-``depth`` cylinders of ``shift``.

    ``M`` defaults to the shift's own matrix.  The basis consists of the
    A-admissible words; M only restricts the prepended transition.
    """
    M = shift.A if M is None else M
    depth = phi.depth if depth is None else depth
    if depth < max(1, phi.depth):
        raise InputError(f"operator depth {depth} is below the potential depth {phi.depth}")
    if not M.dominated_by(shift.A):
        raise InputError("subsystem matrix M is not dominated by the shift's transition matrix")
    basis = enumerate_cylinders(shift, depth).words
    pos = {w: k for k, w in enumerate(basis)}
    space = shift.space
    rows, cols, vals = [], [], []
    for k, u in enumerate(basis):
        for a_idx in M.pred[space.index_of(u[0])]:
            a = space.states[a_idx]
            v = (a,) + u[: depth - 1]
            col = pos.get(v)
            if col is None:
                continue
            w = phi.weight((a,) + u[: phi.depth])
            if w > 0:
                rows.append(k)
                cols.append(col)
                vals.append(w)
    mat = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(len(basis), len(basis)))
    meta = {"shift": shift.name, "potential": phi.name, "depth": depth, "subsystem": "A" if M == shift.A else "M"}
    return OperatorMatrix(basis, mat, depth, shift.states, meta, shift, phi)


def block(op: OperatorMatrix, U: Iterable, V: Iterable) -> OperatorMatrix:
    """chi_U L (chi_V f): keep rows starting in U and columns starting in V."""
    rows = op.indicator(U)
    cols = op.indicator(V)
    return op.with_matrix(scipy.sparse.diags(rows) @ op.matrix @ scipy.sparse.diags(cols))


def spectral_radius(matrix: np.ndarray) -> float:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(scipy.linalg.eigvals(matrix))))


@dataclass(frozen=True, eq=False)
class PerronTriplet:
    """(lambda, h, nu) normalized by nu(1) = 1 and nu(h) = 1."""

    lam: float
    h: np.ndarray
    nu: np.ndarray
    residual: float
    converged: bool = True
    simple: bool = True
    normalized: bool = True
    iterations: int = 0
    method: str = "dense"

    @property
    def mu(self) -> np.ndarray:
        return self.h * self.nu

    @property
    def g(self) -> np.ndarray:
        """h rescaled to sup norm 1."""
        top = np.max(np.abs(self.h))
        return self.h / top if top > 0 else self.h

    @property
    def pressure(self) -> float:
        return math.log(self.lam) if self.lam > 0 else -math.inf

    @property
    def warnings(self) -> list[str]:
        out = []
        if not self.converged:
            out.append("iteration budget exhausted")
        if not self.simple:
            out.append("dominant eigenvalue is not simple")
        if not self.normalized:
            out.append("nu(h) = 0; h scaled to sup norm 1")
        if self.lam == 0:
            out.append("spectral radius is zero")
        return out


def _clean(vec: np.ndarray) -> np.ndarray:
    # Orient a real null vector, scale it to sup norm 1 and zero rounding noise.
    vec = np.real(vec)
    if vec.sum() < 0:
        vec = -vec
    top = np.max(np.abs(vec))
    if top == 0:
        return vec
    vec = vec / top
    vec[np.abs(vec) < 1e-14] = 0.0
    return vec


def _power(mat, tol: float, maxiter: int, shift: float = 1.0) -> tuple[np.ndarray, int, bool]:
    n = mat.shape[0]
    x = np.ones(n) / n
    for it in range(1, maxiter + 1):
        y = mat @ x + shift * x
        y /= np.max(np.abs(y))
        if np.max(np.abs(y - x)) <= tol:
            return y, it, True
        x = y
    return x, maxiter, False


def _normalize(lam: float, h: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    total = nu.sum()
    if total > 0:
        nu = nu / total
    mass = float(nu @ h)
    if mass > 0:
        return h / mass, nu, True
    top = np.max(np.abs(h))
    return (h / top if top > 0 else h), nu, False


def _residual(mat: np.ndarray, lam: float, h: np.ndarray, nu: np.ndarray) -> float:
    scale = max(np.max(np.abs(mat)) if mat.size else 0.0, 1e-300)
    rh = np.max(np.abs(mat @ h - lam * h)) / max(np.max(np.abs(h)), 1e-300)
    rn = np.max(np.abs(nu @ mat - lam * nu)) / max(np.max(np.abs(nu)), 1e-300)
    return float(max(rh, rn) / scale)


def perron_triplet(op: OperatorMatrix | np.ndarray, tol: float = 1e-12, maxiter: int = 100000, method: str = "auto") -> PerronTriplet:
    """Dominant eigenvalue with right and left Perron vectors.

    Parameters
    ----------
    op : OperatorMatrix or array
        Nonnegative square matrix.
    tol, maxiter : float, int
        Convergence tolerance and iteration budget of the power method.
    method : {"auto", "power", "dense"}
        ``power`` iterates op + I from a positive start, which neutralizes
        periodicity.  ``dense`` takes the largest real eigenvalue from a full
        eigensolve and the Perron vectors from the null spaces of L - lambda I;
        it stays accurate for nearly decoupled (metastable) matrices where the
        power method would need on the order of 1/gap iterations.  ``auto``
        uses ``dense`` up to 1500 basis elements.

    Returns
    -------
    PerronTriplet
    """
    if isinstance(op, OperatorMatrix):
        dense = op.dense if op.size <= 1500 or method == "dense" else None
        sparse = op.matrix
    else:
        dense = np.asarray(op, dtype=float)
        sparse = scipy.sparse.csr_matrix(dense)
    n = sparse.shape[0]
    if sparse.nnz == 0:
        zero = np.zeros(n)
        return PerronTriplet(0.0, zero, zero, 0.0, True, True, False, 0, "none")
    if method == "auto":
        method = "dense" if dense is not None else "power"
    if method == "power":
        return _perron_power(sparse, dense, tol, maxiter)
    if method != "dense":
        raise InputError(f"unknown method {method!r}")
    return _perron_dense(dense, sparse, tol, maxiter)


def _perron_power(sparse, dense, tol: float, maxiter: int) -> PerronTriplet:
    h, it_h, ok_h = _power(sparse, tol, maxiter)
    nu, it_n, ok_n = _power(sparse.T.tocsr(), tol, maxiter)
    lh = sparse @ h
    lam = float(nu @ lh / (nu @ h)) if nu @ h > 0 else float(np.max(lh) / np.max(h))
    h, nu, normalized = _normalize(lam, h, nu)
    mat = dense if dense is not None else sparse
    res = _residual_sparse(mat, lam, h, nu)
    return PerronTriplet(lam, h, nu, res, ok_h and ok_n, True, normalized, max(it_h, it_n), "power")


def _residual_sparse(mat, lam, h, nu) -> float:
    if isinstance(mat, np.ndarray):
        return _residual(mat, lam, h, nu)
    scale = max(abs(mat).max(), 1e-300)
    rh = np.max(np.abs(mat @ h - lam * h)) / max(np.max(np.abs(h)), 1e-300)
    rn = np.max(np.abs(mat.T @ nu - lam * nu)) / max(np.max(np.abs(nu)), 1e-300)
    return float(max(rh, rn) / scale)


def _perron_dense(dense: np.ndarray, sparse, tol: float, maxiter: int) -> PerronTriplet:
    eig = scipy.linalg.eigvals(dense)
    lam = float(np.max(eig.real))
    if lam <= 0:
        lam = 0.0
    scale = max(np.max(np.abs(dense)), 1e-300)
    near = int(np.sum(np.abs(eig - lam) <= 1e-9 * max(lam, scale)))
    simple = near <= 1
    if simple and lam > 0:
        shifted = dense - lam * np.eye(dense.shape[0])
        h = _null_vector(shifted)
        nu = _null_vector(shifted.T)
        if np.min(h) < 0 or np.min(nu) < 0:
            simple = False
    if not simple or lam == 0:
        h, _, _ = _power(sparse, tol, maxiter)
        nu, _, _ = _power(sparse.T.tocsr(), tol, maxiter)
    h, nu, normalized = _normalize(lam, h, nu)
    res = _residual(dense, lam, h, nu)
    return PerronTriplet(lam, h, nu, res, res <= max(tol, 1e-10), simple, normalized, 0, "dense")


def _null_vector(mat: np.ndarray) -> np.ndarray:
    _, _, vh = scipy.linalg.svd(mat)
    return _clean(vh[-1])


def cylinder_measure(op: OperatorMatrix, triplet: PerronTriplet, w: Sequence, which: str = "mu") -> float:
    """mu([w]) (or nu([w])) for any admissible word, including |w| > depth.

    Longer cylinders are pushed down to the basis with the operator itself:
    L^k chi_[w] = c_w chi_[w[k:]] where c_w is the product of matrix entries
    along the word.
    """
    w = tuple(w)
    d = op.depth
    vec = triplet.nu if which == "nu" else triplet.mu
    if len(w) < d:
        return float(sum(vec[k] for k, u in enumerate(op.basis) if u[: len(w)] == w))
    k = len(w) - d
    dense = op.dense
    pos = op.position
    coeff = 1.0
    for j in range(k):
        r = pos.get(w[j + 1 : j + 1 + d])
        c = pos.get(w[j : j + d])
        if r is None or c is None:
            return 0.0
        coeff *= dense[r, c]
        if coeff == 0.0:
            return 0.0
    tail = pos.get(w[k:])
    head = pos.get(w[:d])
    if tail is None or head is None:
        return 0.0
    value = coeff * triplet.lam ** (-k) * triplet.nu[tail]
    if which == "mu":
        value *= triplet.h[head]
    return float(value)


@dataclass(frozen=True)
class ConeCertificate:
    c: float
    verdict: bool
    worst_pair: tuple
    worst_ratio: float


@dataclass(frozen=True)
class Certificate:
    cone: ConeCertificate
    gibbs: tuple


def certify(
    op: OperatorMatrix,
    triplet: PerronTriplet,
    phi: CylinderPotential,
    P: float | None = None,
    cone_c: float = 0.0,
    max_length: int = 8,
) -> Certificate:
    """Gibbs-ratio bounds over words up to ``max_length`` and a cone check on h."""
    shift = op.shift
    if shift is None:
        raise InputError("certify needs an operator assembled from a shift")
    P = triplet.pressure if P is None else P
    ratios = []
    for length in range(1, max_length + 1):
        for w in enumerate_cylinders(shift, length).words:
            mass = cylinder_measure(op, triplet, w)
            weight = birkhoff_weight(phi, w, shift.extension(w[-1]))
            if weight == 0.0:
                continue
            ratios.append(mass / math.exp(-length * P + math.log(weight)))
    gibbs = (min(ratios), max(ratios)) if ratios else (math.nan, math.nan)

    points = enumerate_cylinders(shift, op.depth).points
    worst = ((), 0.0)
    for i, u in enumerate(op.basis):
        for j, v in enumerate(op.basis):
            if i == j or u[0] != v[0] or triplet.h[j] <= 0:
                continue
            dist = points[i].distance(points[j], shift.theta)
            ratio = triplet.h[i] / (math.exp(cone_c * dist) * triplet.h[j])
            if ratio > worst[1]:
                worst = ((u, v), float(ratio))
    verdict = worst[1] <= 1.0 + 1e-12
    return Certificate(ConeCertificate(cone_c, verdict, worst[0], worst[1]), gibbs)
