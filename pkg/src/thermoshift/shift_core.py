"""Finitely truncated topological Markov shifts.

A shift is a sorted, finite working set of symbolic states together with a
zero-one transition matrix.  Words are plain tuples of state identifiers.
Everything in this module is immutable and deterministic: enumerations run
in lexicographic order of state indices and ties are always broken towards
the smallest index.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError, TruncationTooSmallError

State = Hashable
Word = tuple


@dataclass(frozen=True)
class StateSpace:
    """Ordered finite working subset of the countable state set."""

    states: tuple
    labels: tuple | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise InputError("state space must be nonempty")
        if len(set(states)) != len(states):
            raise InputError("state identifiers must be unique")
        try:
            ordered = tuple(sorted(states))
        except TypeError as exc:
            raise InputError("state identifiers must be mutually comparable") from exc
        if ordered != states:
            raise InputError("states must be listed in sorted order")
        if self.labels is not None and len(self.labels) != len(states):
            raise InputError("labels must match the number of states")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_index", {s: k for k, s in enumerate(states)})

    @classmethod
    def of(cls, states: Iterable[State], labels: Sequence[str] | None = None) -> "StateSpace":
        states = list(states)
        if labels is not None:
            order = sorted(range(len(states)), key=lambda k: states[k])
            return cls(tuple(states[k] for k in order), tuple(labels[k] for k in order))
        return cls(tuple(sorted(states)))

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[State]:
        return iter(self.states)

    def __contains__(self, s: object) -> bool:
        try:
            return s in self._index
        except TypeError:
            return False

    def index_of(self, s: State) -> int:
        try:
            return self._index[s]
        except (KeyError, TypeError):
            raise InputError(f"unknown state {s!r}") from None

    def indices(self, subset: Iterable[State]) -> list[int]:
        return sorted(self.index_of(s) for s in subset)


@dataclass(frozen=True)
class TransitionMatrix:
    """Zero-one matrix stored as sorted successor lists of state indices."""

    space: StateSpace
    succ: tuple

    def __post_init__(self):
        n = len(self.space)
        succ = tuple(tuple(sorted(set(row))) for row in self.succ)
        if len(succ) != n:
            raise InputError("one successor list per state is required")
        for row in succ:
            if row and (row[0] < 0 or row[-1] >= n):
                raise InputError("successor index out of range")
        object.__setattr__(self, "succ", succ)

    @classmethod
    def from_edges(cls, space: StateSpace, edges: Iterable[tuple[State, State]]) -> "TransitionMatrix":
        rows: list[list[int]] = [[] for _ in space.states]
        for a, b in edges:
            rows[space.index_of(a)].append(space.index_of(b))
        return cls(space, tuple(tuple(r) for r in rows))

    @classmethod
    def from_array(cls, space: StateSpace, array) -> "TransitionMatrix":
        arr = np.asarray(array)
        if arr.shape != (len(space), len(space)):
            raise InputError(f"matrix shape {arr.shape} does not match {len(space)} states")
        if not np.all((arr == 0) | (arr == 1)):
            raise InputError("transition matrix entries must be 0 or 1")
        return cls(space, tuple(tuple(np.flatnonzero(r).tolist()) for r in arr))

    @cached_property
    def dense(self) -> np.ndarray:
        out = np.zeros((len(self.space), len(self.space)), dtype=bool)
        for a, row in enumerate(self.succ):
            out[a, list(row)] = True
        out.setflags(write=False)
        return out

    @cached_property
    def pred(self) -> tuple:
        rows: list[list[int]] = [[] for _ in self.succ]
        for a, row in enumerate(self.succ):
            for b in row:
                rows[b].append(a)
        return tuple(tuple(r) for r in rows)

    def allowed(self, a: State, b: State) -> bool:
        return bool(self.dense[self.space.index_of(a), self.space.index_of(b)])

    def edges(self) -> list[tuple[State, State]]:
        st = self.space.states
        return [(st[a], st[b]) for a, row in enumerate(self.succ) for b in row]

    def restrict(self, subset: Iterable[State]) -> "TransitionMatrix":
        """Zero every entry whose row or column lies outside ``subset``."""
        keep = set(self.space.indices(subset))
        rows = tuple(tuple(b for b in row if b in keep) if a in keep else () for a, row in enumerate(self.succ))
        return TransitionMatrix(self.space, rows)

    def dominated_by(self, other: "TransitionMatrix") -> bool:
        if other.space.states != self.space.states:
            return False
        return all(set(r) <= set(o) for r, o in zip(self.succ, other.succ))

    def to_dict(self) -> dict:
        return {"states": list(self.space.states), "edges": [list(e) for e in self.edges()]}

    @cached_property
    def _greedy(self) -> tuple[frozenset, dict]:
        # States admitting an infinite forward path, and the smallest such successor.
        alive = set(range(len(self.succ)))
        changed = True
        while changed:
            changed = False
            for a in sorted(alive):
                if not any(b in alive for b in self.succ[a]):
                    alive.discard(a)
                    changed = True
        step = {a: next(b for b in self.succ[a] if b in alive) for a in alive}
        return frozenset(alive), step

    def extendable(self) -> frozenset:
        """Indices of states with an admissible infinite forward itinerary."""
        return self._greedy[0]

    @cached_property
    def _tails(self) -> dict:
        _, step = self._greedy
        tails = {}
        for s in step:
            seen: dict[int, int] = {}
            path: list[int] = []
            x = step[s]
            while x not in seen:
                seen[x] = len(path)
                path.append(x)
                x = step[x]
            k = seen[x]
            tails[s] = (tuple(path[:k]), tuple(path[k:]))
        return tails

    def tail_after(self, s: int) -> tuple[tuple, tuple]:
        """(transient, cycle) index sequences of the minimal extension after state ``s``."""
        try:
            return self._tails[s]
        except KeyError:
            raise TruncationTooSmallError(
                f"state {self.space.states[s]!r} has no admissible infinite extension"
            ) from None


@dataclass(frozen=True)
class MarkovShift:
    """A truncated topological Markov shift (S, A) with metric parameter theta."""

    A: TransitionMatrix
    theta: float = 0.5
    name: str = "shift"

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise InputError("theta must lie in (0, 1)")

    @property
    def space(self) -> StateSpace:
        return self.A.space

    @property
    def states(self) -> tuple:
        return self.A.space.states

    @classmethod
    def from_dict(cls, doc: dict, theta: float = 0.5, name: str = "shift") -> "MarkovShift":
        try:
            states = doc["states"]
            edges = doc["edges"]
        except KeyError as exc:
            raise InputError(f"shift definition is missing field {exc.args[0]!r}") from None
        space = StateSpace.of(states, doc.get("labels"))
        pairs = []
        for e in edges:
            if len(e) != 2:
                raise InputError(f"edge {e!r} must have exactly two endpoints")
            pairs.append((e[0], e[1]))
        return cls(TransitionMatrix.from_edges(space, pairs), theta=doc.get("theta", theta), name=doc.get("name", name))

    @classmethod
    def from_json(cls, path: str | Path, theta: float = 0.5) -> "MarkovShift":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), theta=theta, name=Path(path).stem)

    @classmethod
    def full(cls, n: int, theta: float = 0.5) -> "MarkovShift":
        space = StateSpace(tuple(range(1, n + 1)))
        return cls(TransitionMatrix.from_array(space, np.ones((n, n), dtype=int)), theta, f"full-{n}")

    @classmethod
    def from_array(cls, array, states: Sequence[State] | None = None, theta: float = 0.5, name: str = "shift") -> "MarkovShift":
        arr = np.asarray(array)
        space = StateSpace(tuple(states) if states is not None else tuple(range(1, arr.shape[0] + 1)))
        return cls(TransitionMatrix.from_array(space, arr), theta, name)

    def to_dict(self) -> dict:
        return self.A.to_dict()

    def representative(self, w: Word) -> "PointSurrogate":
        """Lexicographically minimal admissible point in the cylinder [w]."""
        if not is_admissible(w, self.A):
            raise InputError(f"word {w!r} is not admissible")
        st = self.states
        transient, cycle = self.A.tail_after(self.space.index_of(w[-1]))
        return PointSurrogate(tuple(w) + tuple(st[k] for k in transient), tuple(st[k] for k in cycle))

    def extension(self, s: State) -> "PointSurrogate":
        """The minimal admissible point that may follow the symbol ``s``."""
        st = self.states
        transient, cycle = self.A.tail_after(self.space.index_of(s))
        return PointSurrogate(tuple(st[k] for k in transient), tuple(st[k] for k in cycle))


@dataclass(frozen=True)
class PointSurrogate:
    """Eventually periodic point ``head · cycle · cycle · ...``."""

    head: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise InputError("point surrogate needs a nonempty cycle")
        object.__setattr__(self, "head", tuple(self.head))
        object.__setattr__(self, "cycle", tuple(self.cycle))

    def symbol(self, k: int) -> State:
        if k < len(self.head):
            return self.head[k]
        return self.cycle[(k - len(self.head)) % len(self.cycle)]

    def itinerary(self, n: int) -> tuple:
        return tuple(self.symbol(k) for k in range(n))

    def shifted(self, k: int = 1) -> "PointSurrogate":
        if k <= len(self.head):
            return PointSurrogate(self.head[k:], self.cycle)
        r = (k - len(self.head)) % len(self.cycle)
        return PointSurrogate((), self.cycle[r:] + self.cycle[:r])

    def prepend(self, w: Word) -> "PointSurrogate":
        return PointSurrogate(tuple(w) + self.head, self.cycle)

    def first_difference(self, other: "PointSurrogate") -> int | None:
        horizon = len(self.head) + len(other.head) + len(self.cycle) * len(other.cycle) + 1
        for k in range(horizon):
            if self.symbol(k) != other.symbol(k):
                return k
        return None

    def distance(self, other: "PointSurrogate", theta: float) -> float:
        """d_theta = theta ** (first index where the itineraries differ)."""
        k = self.first_difference(other)
        return 0.0 if k is None else theta**k


@dataclass(frozen=True)
class CylinderSet:
    """Admissible words of one length, each paired with its representative point."""

    words: tuple
    points: tuple
    excluded: int = 0

    def __len__(self) -> int:
        return len(self.words)

    def to_json(self) -> list:
        return [list(w) for w in self.words]


@dataclass(frozen=True)
class ComponentPartition:
    """Transitive components, each flagged ``irreducible`` or ``degenerate``."""

    components: tuple
    kinds: tuple

    def __len__(self) -> int:
        return len(self.components)

    def nondegenerate(self) -> list[tuple]:
        return [c for c, k in zip(self.components, self.kinds) if k == "irreducible"]

    def component_of(self, s: State) -> int:
        for k, c in enumerate(self.components):
            if s in c:
                return k
        raise InputError(f"state {s!r} is not covered by the partition")

    def to_json(self) -> list:
        return [{"states": list(c), "kind": k} for c, k in zip(self.components, self.kinds)]


def is_admissible(w: Sequence[State], M: TransitionMatrix) -> bool:
    idx = [M.space.index_of(s) for s in w]
    if not idx:
        raise InputError("words have length at least 1")
    dense = M.dense
    return all(dense[a, b] for a, b in zip(idx, idx[1:]))


def enumerate_cylinders(shift: MarkovShift, depth: int) -> CylinderSet:
    """All admissible words of length ``depth`` that extend to infinite itineraries.

    Words are returned in lexicographic order of state indices.  Words whose
    every continuation dies inside the truncation are dropped and counted in
    ``excluded``.
    """
    if depth < 1:
        raise InputError("depth must be at least 1")
    A = shift.A
    alive = A.extendable()
    layer: list[tuple[int, ...]] = [(a,) for a in sorted(alive)]
    for _ in range(depth - 1):
        layer = [w + (b,) for w in layer for b in A.succ[w[-1]] if b in alive]
    st = shift.states
    words = tuple(tuple(st[k] for k in w) for w in layer)
    points = tuple(shift.representative(w) for w in words)
    return CylinderSet(words, points, _count_dead_words(A, alive, depth))


def _count_dead_words(A: TransitionMatrix, alive: frozenset, depth: int) -> int:
    # Admissible words of the given length whose last symbol has no infinite continuation.
    n = len(A.succ)
    if len(alive) == n:
        return 0
    adj = A.dense.astype(object)
    vec = np.array([0 if a in alive else 1 for a in range(n)], dtype=object)
    for _ in range(depth - 1):
        vec = adj.dot(vec)
    return int(sum(vec))


def transitive_components(B: TransitionMatrix) -> ComponentPartition:
    """Partition the states into classes of mutual B-reachability.

    Uses an iterative Tarjan traversal.  Classes are ordered by their
    smallest state index; a singleton without a self-loop is degenerate.
    """
    n = len(B.succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    classes: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            row = B.succ[v]
            if k < len(row):
                work[-1] = (v, k + 1)
                w = row[k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                classes.append(sorted(comp))
    classes.sort(key=lambda c: c[0])
    st = B.space.states
    dense = B.dense
    kinds = tuple("degenerate" if len(c) == 1 and not dense[c[0], c[0]] else "irreducible" for c in classes)
    return ComponentPartition(tuple(tuple(st[k] for k in c) for c in classes), kinds)


def is_irreducible(M: TransitionMatrix, subset: Iterable[State] | None = None) -> bool:
    """True when M restricted to ``subset`` (default: all states) is irreducible."""
    sub = M.restrict(subset) if subset is not None else M
    keep = set(M.space.indices(subset)) if subset is not None else set(range(len(M.succ)))
    if not keep:
        return False
    part = transitive_components(sub)
    inside = [c for c in part.components if M.space.index_of(c[0]) in keep]
    if len(inside) != 1:
        return False
    return part.kinds[part.components.index(inside[0])] == "irreducible"


def _distances_to(M: TransitionMatrix, target: int) -> list[float]:
    dist = [float("inf")] * len(M.succ)
    dist[target] = 0
    queue = deque([target])
    while queue:
        b = queue.popleft()
        for a in M.pred[b]:
            if dist[a] == float("inf"):
                dist[a] = dist[b] + 1
                queue.append(a)
    return dist


def _connecting_path(M: TransitionMatrix, i: int, j: int, dist_to_j: list[float]) -> list[int]:
    # Lexicographically minimal shortest path i -> ... -> j with at least one step.
    options = [b for b in M.succ[i] if dist_to_j[b] < float("inf")]
    if not options:
        raise TruncationTooSmallError(
            f"no admissible path from {M.space.states[i]!r} to {M.space.states[j]!r} in the truncation"
        )
    best = min(dist_to_j[b] for b in options)
    x = min(b for b in options if dist_to_j[b] == best)
    path = [i, x]
    while x != j:
        x = min(b for b in M.succ[x] if dist_to_j[b] == dist_to_j[x] - 1)
        path.append(x)
    return path


def extend_to_irreducible(A: TransitionMatrix, T: Iterable[State]) -> tuple:
    """Smallest-path closure S0 ⊇ T on which A is irreducible.

    For every ordered pair (i, j) of T the lexicographically minimal shortest
    connecting path is added, which makes every vertex reachable from and
    able to reach every other.
    """
    targets = A.space.indices(T)
    if not targets:
        raise InputError("T must be nonempty")
    out = set(targets)
    for j in targets:
        dist = _distances_to(A, j)
        for i in targets:
            out.update(_connecting_path(A, i, j, dist))
    st = A.space.states
    return tuple(st[k] for k in sorted(out))


@dataclass(frozen=True)
class IrreducibilityWitness:
    F: tuple | None
    bip: tuple | None


def finitely_irreducible_witness(M: TransitionMatrix, maxlen: int, max_candidates: int = 20000) -> IrreducibilityWitness:
    """Greedy search for a finite connecting word set F and a BIP set.

    ``None`` entries mean nothing was found within ``maxlen``; that is not a
    proof that no witness exists.
    """
    if maxlen < 1:
        raise InputError("maxlen must be at least 1")
    n = len(M.succ)
    st = M.space.states
    candidates: list[tuple[int, ...]] = []
    layer = [(a,) for a in range(n)]
    for length in range(1, maxlen + 1):
        candidates.extend(layer)
        if len(candidates) > max_candidates or length == maxlen:
            break
        layer = [w + (b,) for w in layer for b in M.succ[w[-1]]]
    candidates = candidates[:max_candidates]

    uncovered = {(a, b) for a in range(n) for b in range(n)}
    chosen: list[tuple[int, ...]] = []
    cover = {w: {(a, b) for a in M.pred[w[0]] for b in M.succ[w[-1]]} for w in candidates}
    while uncovered:
        best = max(candidates, key=lambda w: (len(cover[w] & uncovered), -len(w)), default=None)
        if best is None or not cover[best] & uncovered:
            chosen = []
            break
        chosen.append(best)
        uncovered -= cover[best]
    F = tuple(sorted((tuple(st[k] for k in w) for w in chosen), key=lambda w: (len(w), w))) if not uncovered else None

    needs = {("in", b) for b in range(n)} | {("out", b) for b in range(n)}
    gives = {a: {("in", b) for b in M.succ[a]} | {("out", b) for b in M.pred[a]} for a in range(n)}
    bip: list[int] = []
    while needs:
        a = max(range(n), key=lambda s: (len(gives[s] & needs), -s))
        if not gives[a] & needs:
            break
        bip.append(a)
        needs -= gives[a]
    return IrreducibilityWitness(F, None if needs else tuple(st[k] for k in sorted(bip)))
