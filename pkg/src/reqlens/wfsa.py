"""Weighted finite-state acceptors over the tropical (min, +) semiring.

Weights are plain floats read as costs (negative log scores).  ``math.inf``
is the semiring zero: it encodes rejection and never appears on an arc.
Plus is ``min``, times is ``+``, so the weight of a string is the cheapest
accepting path for it.

Acceptors are immutable after construction; every operation here returns a
new machine.  Arc weights must be finite.  They are normally non-negative,
and the Dijkstra-based operations (``shortest_distance``, ``remove_epsilon``
and the epsilon handling inside ``accept``) require non-negative weights on
the arcs they relax; acyclic machines without epsilons tolerate negative
arc weights everywhere else.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

EPSILON = 0

ZERO = math.inf  # additive identity: no path
ONE = 0.0  # multiplicative identity: the free path


def w_plus(a: float, b: float) -> float:
    """Tropical addition: keep the better (smaller) cost."""
    return a if a <= b else b


def w_times(a: float, b: float) -> float:
    """Tropical multiplication: accumulate costs along a path."""
    return a + b


class SymbolTable:
    """Bidirectional token <-> symbol-id map.  Id 0 is reserved for epsilon.

    Tables are shared between the machines that get intersected, so symbol
    ids stay comparable.  ``add`` only appends; existing ids never change.
    """

    __slots__ = ("_ids", "_tokens")

    def __init__(self, tokens: Iterable[str] = ()) -> None:
        self._ids: dict[str, int] = {}
        self._tokens: list[str] = []
        for token in tokens:
            self.add(token)

    def add(self, token: str) -> int:
        sym = self._ids.get(token)
        if sym is None:
            sym = len(self._tokens) + 1
            self._ids[token] = sym
            self._tokens.append(token)
        return sym

    def id_of(self, token: str) -> int | None:
        return self._ids.get(token)

    def token_of(self, sym: int) -> str:
        if sym == EPSILON:
            raise ValueError("epsilon (id 0) has no token")
        return self._tokens[sym - 1]

    def same_as(self, other: "SymbolTable") -> bool:
        return self is other or self._ids == other._ids

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __len__(self) -> int:
        return len(self._tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self._tokens)


class Arc(NamedTuple):
    src: int
    label: int
    weight: float
    dst: int


class Wfsa:
    """A weighted acceptor: dense states 0..n-1, one start, weighted finals."""

    __slots__ = ("n_states", "start", "finals", "symbols", "_out")

    def __init__(
        self,
        n_states: int,
        start: int,
        finals: Mapping[int, float],
        arcs: Iterable[Arc],
        symbols: SymbolTable,
    ) -> None:
        if n_states < 1:
            raise ValueError("an acceptor needs at least one state")
        if not 0 <= start < n_states:
            raise ValueError(f"start state {start} out of range 0..{n_states - 1}")
        self.n_states = n_states
        self.start = start
        self.symbols = symbols
        self.finals = {}
        for state, weight in finals.items():
            if not 0 <= state < n_states:
                raise ValueError(f"final state {state} out of range")
            if not math.isfinite(weight):
                raise ValueError(f"final weight for state {state} must be finite")
            self.finals[state] = float(weight)
        self._out: list[list[Arc]] = [[] for _ in range(n_states)]
        n_symbols = len(symbols)
        for arc in arcs:
            if not (0 <= arc.src < n_states and 0 <= arc.dst < n_states):
                raise ValueError(f"arc {arc} references an invalid state")
            if not 0 <= arc.label <= n_symbols:
                raise ValueError(f"arc {arc} uses label {arc.label} absent from the symbol table")
            if not math.isfinite(arc.weight):
                raise ValueError(f"arc {arc} has non-finite weight; rejection is absence of path")
            self._out[arc.src].append(arc)

    def arcs_from(self, state: int) -> Sequence[Arc]:
        return self._out[state]

    @property
    def arcs(self) -> list[Arc]:
        return [arc for out in self._out for arc in out]

    @property
    def n_arcs(self) -> int:
        return sum(len(out) for out in self._out)

    def is_epsilon_free(self) -> bool:
        return all(arc.label != EPSILON for out in self._out for arc in out)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"Wfsa(n_states={self.n_states}, start={self.start}, "
            f"n_arcs={self.n_arcs}, n_finals={len(self.finals)})"
        )


def _epsilon_relax(a: Wfsa, dist: dict[int, float]) -> dict[int, float]:
    """Relax `dist` over epsilon arcs (Dijkstra; epsilon weights must be >= 0)."""
    best = dict(dist)
    heap = [(d, s) for s, d in dist.items()]
    heapq.heapify(heap)
    while heap:
        d, s = heapq.heappop(heap)
        if d > best.get(s, ZERO):
            continue
        for arc in a.arcs_from(s):
            if arc.label != EPSILON:
                continue
            nd = d + arc.weight
            if nd < best.get(arc.dst, ZERO):
                best[arc.dst] = nd
                heapq.heappush(heap, (nd, arc.dst))
    return best


def accept(a: Wfsa, tokens: Sequence[str]) -> float:
    """Cheapest accepting path labelled `tokens`; ``math.inf`` if rejected.

    Unknown tokens reject (they cannot label any arc).  Epsilon arcs are
    traversed freely in label terms but their weights still accumulate.
    """
    ids = []
    for token in tokens:
        sym = a.symbols.id_of(token)
        if sym is None:
            return ZERO
        ids.append(sym)
    dist = _epsilon_relax(a, {a.start: ONE})
    for sym in ids:
        advanced: dict[int, float] = {}
        for s, d in dist.items():
            for arc in a.arcs_from(s):
                if arc.label != sym:
                    continue
                nd = d + arc.weight
                if nd < advanced.get(arc.dst, ZERO):
                    advanced[arc.dst] = nd
        if not advanced:
            return ZERO
        dist = _epsilon_relax(a, advanced)
    best = ZERO
    for state, final_weight in a.finals.items():
        d = dist.get(state, ZERO)
        if d + final_weight < best:
            best = d + final_weight
    return best


def shortest_distance(a: Wfsa) -> float:
    """Minimum over accepting paths of arc weights plus final weight.

    Requires non-negative arc weights (Dijkstra).  ``math.inf`` when the
    machine accepts nothing.
    """
    dist = {a.start: ONE}
    heap = [(ONE, a.start)]
    done: set[int] = set()
    while heap:
        d, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        for arc in a.arcs_from(s):
            nd = d + arc.weight
            if nd < dist.get(arc.dst, ZERO):
                dist[arc.dst] = nd
                heapq.heappush(heap, (nd, arc.dst))
    best = ZERO
    for state, final_weight in a.finals.items():
        d = dist.get(state, ZERO)
        if d + final_weight < best:
            best = d + final_weight
    return best


def remove_epsilon(a: Wfsa) -> Wfsa:
    """Epsilon-free acceptor with the same weighted language.

    Uses the tropical epsilon closure of each state: a per-state shortest
    distance over epsilon-only arcs folded into the outgoing non-epsilon
    arcs and final weights.  Epsilon cycles converge because their weights
    are non-negative.
    """
    kept: dict[tuple[int, int, int], float] = {}
    finals: dict[int, float] = {}
    for s in range(a.n_states):
        closure = _epsilon_relax(a, {s: ONE})
        final_best = ZERO
        for t, d in closure.items():
            for arc in a.arcs_from(t):
                if arc.label == EPSILON:
                    continue
                key = (s, arc.label, arc.dst)
                nd = d + arc.weight
                if nd < kept.get(key, ZERO):
                    kept[key] = nd
            ft = a.finals.get(t)
            if ft is not None and d + ft < final_best:
                final_best = d + ft
        if final_best < ZERO:
            finals[s] = final_best
    arcs = [Arc(src, label, w, dst) for (src, label, dst), w in kept.items()]
    return trim(Wfsa(a.n_states, a.start, finals, arcs, a.symbols))


def trim(a: Wfsa) -> Wfsa:
    """Drop states that are not on any start -> final path.

    The start state is always kept so the result stays well-formed; an
    empty language collapses to a single start state with no arcs.
    """
    forward = {a.start}
    queue = deque([a.start])
    while queue:
        s = queue.popleft()
        for arc in a.arcs_from(s):
            if arc.dst not in forward:
                forward.add(arc.dst)
                queue.append(arc.dst)

    reverse: list[list[int]] = [[] for _ in range(a.n_states)]
    for out in a._out:
        for arc in out:
            reverse[arc.dst].append(arc.src)
    backward = set(s for s in a.finals if s in forward)
    queue = deque(backward)
    while queue:
        s = queue.popleft()
        for src in reverse[s]:
            if src not in backward:
                backward.add(src)
                queue.append(src)

    alive = forward & backward
    order = sorted(alive | {a.start})
    remap = {old: new for new, old in enumerate(order)}
    arcs = [
        Arc(remap[arc.src], arc.label, arc.weight, remap[arc.dst])
        for s in order
        if s in alive
        for arc in a.arcs_from(s)
        if arc.dst in alive
    ]
    finals = {remap[s]: w for s, w in a.finals.items() if s in alive}
    return Wfsa(len(order), remap[a.start], finals, arcs, a.symbols)


def intersect(a: Wfsa, b: Wfsa) -> Wfsa:
    """Weighted intersection by product construction; result is trimmed.

    Both inputs must be epsilon-free and share one symbol table.  The result
    accepts exactly the strings both accept, each at the sum of the two
    path weights.
    """
    if not a.is_epsilon_free() or not b.is_epsilon_free():
        raise ValueError("intersect requires epsilon-free inputs; call remove_epsilon first")
    if not a.symbols.same_as(b.symbols):
        raise ValueError("intersect requires both acceptors to share one symbol table")

    pair_ids: dict[tuple[int, int], int] = {(a.start, b.start): 0}
    queue = deque([(a.start, b.start)])
    arcs: list[Arc] = []
    finals: dict[int, float] = {}
    b_by_label: dict[int, dict[int, list[Arc]]] = {}

    while queue:
        s, t = queue.popleft()
        i = pair_ids[(s, t)]
        by_label = b_by_label.get(t)
        if by_label is None:
            by_label = {}
            for barc in b.arcs_from(t):
                by_label.setdefault(barc.label, []).append(barc)
            b_by_label[t] = by_label
        for arc in a.arcs_from(s):
            for barc in by_label.get(arc.label, ()):
                pair = (arc.dst, barc.dst)
                j = pair_ids.get(pair)
                if j is None:
                    j = len(pair_ids)
                    pair_ids[pair] = j
                    queue.append(pair)
                arcs.append(Arc(i, arc.label, arc.weight + barc.weight, j))
        fa = a.finals.get(s)
        fb = b.finals.get(t)
        if fa is not None and fb is not None:
            finals[i] = fa + fb

    return trim(Wfsa(len(pair_ids), 0, finals, arcs, a.symbols))


def iter_language(a: Wfsa, symbols: bool = True) -> Iterator[tuple[tuple, float]]:
    """Enumerate (string, weight) pairs of an acyclic acceptor by DFS.

    Yields token tuples when `symbols` is true, label-id tuples otherwise.
    Epsilon arcs contribute weight but no token.  Raises on cyclic input.
    """

    def walk(state: int, labels: list[int], cost: float, on_path: set[int]) -> Iterator[tuple[tuple, float]]:
        final_weight = a.finals.get(state)
        if final_weight is not None:
            if symbols:
                yield tuple(a.symbols.token_of(l) for l in labels), cost + final_weight
            else:
                yield tuple(labels), cost + final_weight
        on_path.add(state)
        for arc in a.arcs_from(state):
            if arc.dst in on_path:
                raise ValueError("iter_language requires an acyclic acceptor")
            if arc.label == EPSILON:
                yield from walk(arc.dst, labels, cost + arc.weight, on_path)
            else:
                labels.append(arc.label)
                yield from walk(arc.dst, labels, cost + arc.weight, on_path)
                labels.pop()
        on_path.discard(state)

    yield from walk(a.start, [], ONE, set())


def dump(a: Wfsa) -> str:
    """Line-oriented text form: header, one line per arc, one per final."""
    lines = [f"WFSA v1 {a.n_states} {a.start}"]
    for arc in a.arcs:
        lines.append(f"arc {arc.src} {arc.label} {arc.weight!r} {arc.dst}")
    for state in sorted(a.finals):
        lines.append(f"final {state} {a.finals[state]!r}")
    return "\n".join(lines) + "\n"


def load(text: str, symbols: SymbolTable) -> Wfsa:
    """Parse the `dump` format.  Symbol ids are resolved against `symbols`."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty acceptor file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "WFSA" or header[1] != "v1":
        raise ValueError(f"bad header: {lines[0]!r}")
    n_states, start = int(header[2]), int(header[3])
    arcs: list[Arc] = []
    finals: dict[int, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if fields[0] == "arc" and len(fields) == 5:
            arcs.append(Arc(int(fields[1]), int(fields[2]), float(fields[3]), int(fields[4])))
        elif fields[0] == "final" and len(fields) == 3:
            finals[int(fields[1])] = float(fields[2])
        else:
            raise ValueError(f"line {lineno}: unrecognized record {line!r}")
    return Wfsa(n_states, start, finals, arcs, symbols)
