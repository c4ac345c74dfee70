"""Perron complements M[U, V, lambda] = M_UU + M_UV (lambda I - M_VV)^{-1} M_VU.

The closed form is evaluated with an LU solve.  ``induced_series`` sums the
same operator as a series over excursions through V, one extra V-symbol per
term, which is the word-by-word definition grouped by word length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.linalg

from .errors import DivergenceError, InputError, ResolventError
from .potential import CylinderPotential
from .shift_core import MarkovShift, TransitionMatrix
from .transfer import OperatorMatrix, assemble_operator, perron_triplet, spectral_radius

RESOLVENT_TOL = 1e-10


def _split(op: OperatorMatrix, U: Iterable, V: Iterable) -> tuple[np.ndarray, np.ndarray]:
    U, V = set(U), set(V)
    if not U:
        raise InputError("U must be nonempty")
    if U & V:
        raise InputError(f"U and V overlap in {sorted(U & V, key=repr)!r}")
    return op.indices(U), op.indices(V)


def _radius_vv(dense: np.ndarray, v: np.ndarray) -> float:
    return spectral_radius(dense[np.ix_(v, v)]) if len(v) else 0.0


@dataclass(frozen=True, eq=False)
class ComplementOperator:
    """Perron complement realized on the full basis (zero outside U)."""

    base: OperatorMatrix
    U: frozenset
    V: frozenset
    lam: float
    matrix: np.ndarray
    radius_vv: float
    u_idx: np.ndarray = field(repr=False)

    @property
    def margin(self) -> float:
        return self.lam - self.radius_vv

    @property
    def core(self) -> np.ndarray:
        """The U x U block, the only nonzero part."""
        return self.matrix[np.ix_(self.u_idx, self.u_idx)]

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(f, dtype=float)

    def spectral_radius(self) -> float:
        return spectral_radius(self.core)


def perron_complement(op: OperatorMatrix, U: Iterable, V: Iterable, lam: float, tol: float = RESOLVENT_TOL) -> ComplementOperator:
    """Closed-form Perron complement.

    Raises
    ------
    ResolventError
        If ``lam`` does not exceed r(M_VV) by more than ``tol``.
    """
    U, V = frozenset(U), frozenset(V)
    u, v = _split(op, U, V)
    dense = op.dense
    r = _radius_vv(dense, v)
    if not lam > r + tol:
        raise ResolventError(f"lambda={lam!r} is not above r(M_VV)={r!r} by more than {tol}", r, lam)
    core = dense[np.ix_(u, u)].copy()
    if len(v):
        rhs = dense[np.ix_(v, u)]
        solved = scipy.linalg.solve(lam * np.eye(len(v)) - dense[np.ix_(v, v)], rhs)
        core += dense[np.ix_(u, v)] @ solved
    full = np.zeros_like(dense)
    full[np.ix_(u, u)] = core
    return ComplementOperator(op, U, V, float(lam), full, r, u)


@dataclass(frozen=True, eq=False)
class InducedResult:
    values: np.ndarray
    tail_bound: float
    excursions: int

    def __iter__(self):
        return iter((self.values, self.tail_bound))


def _cw_vector(B: np.ndarray) -> tuple[np.ndarray, float]:
    # Positive z with B z <= rho z.  Taking z = (I - B/rho0)^{-1} 1 for some
    # r(B) < rho0 < 1 gives B z = rho0 (z - 1) <= rho0 z, with z >= 1 even
    # when B is reducible.
    r = spectral_radius(B)
    rho0 = r**0.9 if r > 0 else 1e-2
    z = scipy.linalg.solve(np.eye(B.shape[0]) - B / rho0, np.ones(B.shape[0]))
    z = np.maximum(z, 1.0)
    return z, float(np.max((B @ z) / z))


def induced_series(op: OperatorMatrix, U: Iterable, V: Iterable, eta: float, f, max_excursion: int) -> InducedResult:
    """Sum of eta^{-|w|+1} e^{S_|w| phi} f over words starting in U with |w|-1 symbols in V.

    Words with at most ``max_excursion`` V-symbols are summed exactly; the
    remainder is bounded with a Collatz-Wielandt vector for M_VV / eta.
    """
    u, v = _split(op, U, V)
    dense = op.dense
    f = np.asarray(f, dtype=float)
    if f.shape != (op.size,):
        raise InputError(f"f must be a vector over the {op.size} basis elements")
    out = np.zeros(op.size)
    acc = dense[np.ix_(u, u)] @ f[u]
    if not len(v):
        out[u] = acc
        return InducedResult(out, 0.0, 0)
    r = _radius_vv(dense, v)
    if not eta > r:
        raise DivergenceError(f"eta={eta!r} does not exceed r(M_VV)={r!r}; the series diverges", r, eta)
    B = dense[np.ix_(v, v)] / eta
    M_uv = dense[np.ix_(u, v)]
    t = dense[np.ix_(v, u)] @ f[u]
    v0 = t.copy()
    done = 0
    for m in range(1, max_excursion + 1):
        acc = acc + M_uv @ t / eta
        done = m
        t = B @ t
        if not t.any():
            break
    z, rho = _cw_vector(B)
    if not t.any():
        tail = 0.0
    elif rho >= 1.0:
        raise DivergenceError("no contracting weight vector found for the excursion block", r, eta)
    else:
        scale = float(np.max(np.abs(v0) / z))
        tail = float(np.max(M_uv @ z)) * scale * rho**max_excursion / ((1.0 - rho) * eta)
    out[u] = acc
    return InducedResult(out, tail, done)


def excursion_budget(lam: float, radius: float, size: int, digits: float = 200.0) -> int:
    """Excursion count K with (r/lam)**K <= 10**-digits.

    A nilpotent block (r = 0) makes every excursion longer than the block
    size vanish, so K = size sums the series exactly.
    """
    if radius <= 0:
        return max(size, 1)
    if radius >= lam:
        raise DivergenceError(f"lam={lam!r} does not exceed r(M_VV)={radius!r}", radius, lam)
    return max(1, math.ceil(digits * math.log(10.0) / math.log(lam / radius)))


def induced_apply(
    shift: MarkovShift,
    M: TransitionMatrix | None,
    phi: CylinderPotential,
    U: Iterable,
    V: Iterable,
    eta: float,
    f,
    max_excursion: int,
    depth: int | None = None,
) -> InducedResult:
    """Word-series form of the induced operator L_{M,phi}[U, V, eta] applied to f."""
    return induced_series(assemble_operator(shift, M, phi, depth), U, V, eta, f, max_excursion)


def _w_blocks(op: OperatorMatrix, U, V):
    u, v = _split(op, U, V)
    dense = op.dense
    return (
        dense[np.ix_(u, u)],
        dense[np.ix_(u, v)],
        dense[np.ix_(v, u)],
        dense[np.ix_(v, v)],
        u,
        v,
    )


def schur_frobenius_residual(op: OperatorMatrix, U: Iterable, V: Iterable, lam: float, eta: float) -> float:
    """Max-norm defect of the three-factor factorization of M_eta - eta I on W = U ∪ V.

    With R = (M_VV - lam I)^{-1},

        M_eta - eta I = [[I, M_UV R], [0, I]]
                        · diag(M[U,V,lam] - eta I, (eta/lam)(M_VV - lam I))
                        · [[I, 0], [(lam/eta) R M_VU, I]],

    where M_eta = [[M_UU, (eta/lam) M_UV], [M_VU, (eta/lam) M_VV]].
    """
    if eta == 0:
        raise InputError("eta must be nonzero")
    comp = perron_complement(op, U, V, lam)
    Muu, Muv, Mvu, Mvv, u, v = _w_blocks(op, U, V)
    p, q = len(u), len(v)
    Iu, Iv = np.eye(p), np.eye(q)
    lhs = np.block([[Muu, eta / lam * Muv], [Mvu, eta / lam * Mvv]]) - eta * np.eye(p + q)
    shifted = Mvv - lam * Iv
    if q:
        upper = scipy.linalg.solve(shifted.T, Muv.T).T
        lower = scipy.linalg.solve(shifted, Mvu)
    else:
        upper = np.zeros((p, 0))
        lower = np.zeros((0, p))
    left = np.block([[Iu, upper], [np.zeros((q, p)), Iv]])
    middle = np.block([[comp.core - eta * Iu, np.zeros((p, q))], [np.zeros((q, p)), eta / lam * shifted]])
    right = np.block([[Iu, np.zeros((p, q))], [lam / eta * lower, Iv]])
    return float(np.max(np.abs(lhs - left @ middle @ right)))


@dataclass(frozen=True)
class TransferCheck:
    forward: bool
    backward: bool
    max_forward_residual: float
    max_backward_residual: float
    eigenvalues: tuple
    skipped: int


def _transfer_one_side(Muu, Muv, Mvu, Mvv, lam: float, eta: float | None, tol: float, zero_tol: float) -> TransferCheck:
    p, q = Muu.shape[0], Mvv.shape[0]
    n = p + q
    scale = max(1.0, float(np.max(np.abs(np.block([[Muu, Muv], [Mvu, Mvv]])))) * n)
    resolvent = lam * np.eye(q) - Mvv
    core = Muu + (Muv @ scipy.linalg.solve(resolvent, Mvu) if q else 0.0)

    def nonlinear_residual(mu: complex, g: np.ndarray) -> float:
        # (M_WU + (mu/lam) M_WV) g - mu g on W.
        gu, gv = g[:p], g[p:]
        top = Muu @ gu + mu / lam * (Muv @ gv) - mu * gu
        bottom = Mvu @ gu + mu / lam * (Mvv @ gv) - mu * gv
        return float(max(np.max(np.abs(top)), np.max(np.abs(bottom), initial=0.0)) / (scale * np.max(np.abs(g))))

    def reconstruct(mu: complex, gu: np.ndarray) -> np.ndarray:
        return lam / mu * scipy.linalg.solve(resolvent, Mvu @ gu) if q else np.zeros(0)

    def wanted(mu: complex) -> bool:
        if abs(mu) <= zero_tol * max(lam, scale):
            return False
        return eta is None or abs(mu - eta) <= 1e-8 * max(1.0, abs(eta))

    skipped = 0
    seen = []
    # Forward: the nonlinear problem (M_WU + (mu/lam) M_WV) g = mu g is the
    # generalized eigenproblem M_WU g = mu (I - M_WV / lam) g.
    A = np.zeros((n, n))
    A[:p, :p] = Muu
    A[p:, :p] = Mvu
    Bm = np.eye(n)
    Bm[:p, p:] -= Muv / lam
    Bm[p:, p:] -= Mvv / lam
    mus, vecs = scipy.linalg.eig(A, Bm)
    fwd = 0.0
    for mu, g in zip(mus, vecs.T):
        if not np.isfinite(mu) or not wanted(mu):
            skipped += 1
            continue
        g = g / np.max(np.abs(g))
        gu, gv = g[:p], g[p:]
        r_core = np.max(np.abs(core @ gu - mu * gu)) / scale
        r_rec = np.max(np.abs(gv - reconstruct(mu, gu)), initial=0.0) / max(1.0, np.max(np.abs(gv), initial=0.0))
        fwd = max(fwd, float(r_core), float(r_rec), nonlinear_residual(mu, g))
        seen.append(complex(mu))

    bwd = 0.0
    mus, vecs = scipy.linalg.eig(core)
    for mu, gu in zip(mus, vecs.T):
        if not wanted(mu):
            skipped += 1
            continue
        gu = gu / np.max(np.abs(gu))
        g = np.concatenate([gu, reconstruct(mu, gu)])
        bwd = max(bwd, nonlinear_residual(mu, g))
    return TransferCheck(fwd <= tol, bwd <= tol, fwd, bwd, tuple(sorted(seen, key=lambda z: (-abs(z), z.real))), skipped)


def eigen_transfer_check(
    op: OperatorMatrix,
    U: Iterable,
    V: Iterable,
    lam: float,
    eta: float | None = None,
    side: str = "right",
    tol: float = 1e-9,
    zero_tol: float = 1e-8,
) -> TransferCheck:
    """Check the correspondence between eigenpairs of M[U,V,lam] and of M_WU + (eta/lam) M_WV.

    ``side="left"`` runs the dual statement, i.e. the same check on the
    transposed operator.  With ``eta`` given only that eigenvalue is checked;
    eigenvalues with modulus below ``zero_tol`` (relative) are skipped.
    """
    Muu, Muv, Mvu, Mvv, _, v = _w_blocks(op, U, V)
    r = spectral_radius(Mvv) if len(v) else 0.0
    if not lam > r + RESOLVENT_TOL:
        raise ResolventError(f"lambda={lam!r} is not above r(M_VV)={r!r}", r, lam)
    if side == "left":
        Muu, Muv, Mvu, Mvv = Muu.T, Mvu.T, Muv.T, Mvv.T
    elif side != "right":
        raise InputError("side must be 'right' or 'left'")
    return _transfer_one_side(Muu, Muv, Mvu, Mvv, lam, eta, tol, zero_tol)


def complement_spectral_radius(op: OperatorMatrix, U: Iterable, V: Iterable | None = None, lam: float | None = None) -> float:
    """r(M[U, V, lambda]) with lambda the Perron value of ``op`` by default."""
    U = set(U)
    if V is None:
        V = set(op.alphabet) - U
    lam = perron_triplet(op).lam if lam is None else lam
    return perron_complement(op, U, V, lam).spectral_radius()
