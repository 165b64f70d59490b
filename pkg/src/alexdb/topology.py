"""Finite topological spaces presented by a bounded-by relation.

A space is a pair ``(X, R)``: a finite set of elements and an irreflexive
relation ``R`` where ``(a, b)`` reads "a is bounded by b" (an edge is
bounded by its end vertices, a face by its rim edges, and so on).  ``R``
generates a topology: a set ``A`` is open when for every pair ``(a, b)``
with ``b`` in ``A``, ``a`` is in ``A`` as well.  Open sets collect, with
every element, everything that element bounds — the combinatorial "star"
convention.  Arbitrary unions *and* arbitrary intersections of opens are
open, so the topology is equivalent to a preorder (the reflexive-transitive
closure of ``R``) and all queries below reduce to reachability.

The space is T0 (distinct points have distinct neighbourhood filters)
exactly when ``R`` is acyclic; ``build_space`` enforces that by default.

Conventions used throughout:

* ``closure(A)``  = everything reachable from ``A`` along ``R``;
  the smallest closed set containing ``A``.
* ``star(A)``     = everything that reaches ``A`` along ``R``;
  the smallest *open* set containing ``A`` (minimal neighbourhood).
* dimension       = longest strict bounded-by chain, counted in steps.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Union

from .errors import (
    DanglingPairError,
    DuplicateKeyError,
    EmptySpaceError,
    NotFoundError,
    T0ViolationError,
)
from .limits import OPEN_SET_GUARD, check_guard

Scalar = Union[str, int, float]


@dataclass(frozen=True, order=True)
class ElementId:
    """Key of an element: an id string plus a level-of-detail tag."""

    id: str
    lod: int = 0

    def __str__(self) -> str:
        return self.id if self.lod == 0 else f"{self.id}:{self.lod}"


@dataclass(frozen=True)
class Element:
    """An element together with its bookkeeping columns.

    ``version`` is the token of the version that introduced the element,
    ``gen_target`` the key of its image under the generalisation map to the
    next-coarser level (both optional), and ``attributes`` holds scalar
    payload values.
    """

    key: ElementId
    version: str | None = None
    gen_target: ElementId | None = None
    attributes: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True, order=True)
class BoundedByPair:
    """One relation row: ``ida`` is bounded by ``idb``."""

    ida: ElementId
    idb: ElementId


@dataclass(frozen=True)
class Space:
    """A finite space: elements keyed by ``ElementId`` plus the relation."""

    elements: Mapping[ElementId, Element]
    relation: frozenset[BoundedByPair]

    def keys(self) -> frozenset[ElementId]:
        return frozenset(self.elements)

    def element(self, key: ElementId) -> Element:
        try:
            return self.elements[key]
        except KeyError:
            raise NotFoundError(f"no element {key} in space") from None

    def __contains__(self, key: ElementId) -> bool:
        return key in self.elements

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Preorder:
    """Reflexive-transitive closure of a bounded-by relation.

    ``pairs`` contains every ``(a, b)`` with a path ``a -> ... -> b``
    (including the diagonal).  The lookup maps are derived data and do not
    take part in equality.
    """

    pairs: frozenset[tuple[ElementId, ElementId]]
    _down: Mapping[ElementId, frozenset[ElementId]] = field(compare=False, repr=False)
    _up: Mapping[ElementId, frozenset[ElementId]] = field(compare=False, repr=False)

    def holds(self, a: ElementId, b: ElementId) -> bool:
        """True when a == b or a is transitively bounded by b."""
        return (a, b) in self.pairs

    def descendants(self, a: ElementId) -> frozenset[ElementId]:
        """All keys reachable from ``a`` (reflexive)."""
        return self._down[a]

    def ancestors(self, a: ElementId) -> frozenset[ElementId]:
        """All keys that reach ``a`` (reflexive)."""
        return self._up[a]

    def comparable(self, a: ElementId, b: ElementId) -> bool:
        return (a, b) in self.pairs or (b, a) in self.pairs


# ---------------------------------------------------------------------------
# construction


def build_space(
    elements: Iterable[Element],
    pairs: Iterable[BoundedByPair],
    t0_check: bool = True,
) -> Space:
    """Validate and assemble a space.

    Raises ``DuplicateKeyError`` for repeated element keys,
    ``DanglingPairError`` for pairs touching unknown keys, and — unless
    ``t0_check`` is disabled — ``T0ViolationError`` carrying a witness cycle.
    Reflexive pairs are dropped: reflexivity is implicit in the preorder.
    """
    table: dict[ElementId, Element] = {}
    for el in elements:
        if el.key in table:
            raise DuplicateKeyError(f"duplicate element key {el.key}")
        table[el.key] = el
    rel = set()
    for p in pairs:
        if p.ida == p.idb:
            continue
        if p.ida not in table:
            raise DanglingPairError(f"pair {p} references unknown element {p.ida}")
        if p.idb not in table:
            raise DanglingPairError(f"pair {p} references unknown element {p.idb}")
        rel.add(p)
    space = Space(elements=table, relation=frozenset(rel))
    if t0_check:
        cycle = find_cycle(space)
        if cycle is not None:
            raise T0ViolationError(
                f"relation has a cycle, space is not T0: {[str(k) for k in cycle]}",
                cycle=cycle,
            )
    return space


def simple_space(
    ids: Iterable[str | ElementId],
    pairs: Iterable[tuple[str | ElementId, str | ElementId]] = (),
    attributes: Mapping[str, Mapping[str, Scalar]] | None = None,
    lod: int = 0,
    t0_check: bool = True,
) -> Space:
    """Shorthand constructor coercing bare strings to keys at one level."""

    def coerce(x: str | ElementId) -> ElementId:
        return x if isinstance(x, ElementId) else ElementId(x, lod)

    attributes = attributes or {}
    els = [
        Element(key=coerce(i), attributes=dict(attributes.get(str(i), {})))
        for i in ids
    ]
    rel = [BoundedByPair(coerce(a), coerce(b)) for a, b in pairs]
    return build_space(els, rel, t0_check=t0_check)


# ---------------------------------------------------------------------------
# adjacency / reachability plumbing


def out_adjacency(space: Space) -> dict[ElementId, set[ElementId]]:
    """key -> set of keys it is bounded by (one relation step)."""
    adj: dict[ElementId, set[ElementId]] = {k: set() for k in space.elements}
    for p in space.relation:
        adj[p.ida].add(p.idb)
    return adj


def in_adjacency(space: Space) -> dict[ElementId, set[ElementId]]:
    """key -> set of keys bounded by it (one relation step)."""
    adj: dict[ElementId, set[ElementId]] = {k: set() for k in space.elements}
    for p in space.relation:
        adj[p.idb].add(p.ida)
    return adj


def _reach(adj: Mapping[ElementId, set[ElementId]], start: ElementId) -> frozenset[ElementId]:
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return frozenset(seen)


def find_cycle(space: Space) -> list[ElementId] | None:
    """Return one directed cycle of the relation, or None when acyclic."""
    return find_cycle_in(out_adjacency(space))


def find_cycle_in(adj: Mapping[ElementId, set[ElementId]]) -> list[ElementId] | None:
    """Cycle search over a bare adjacency mapping (key -> successors)."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {k: WHITE for k in adj}
    parent: dict[ElementId, ElementId] = {}
    for root in adj:
        if colour[root] != WHITE:
            continue
        stack = [(root, iter(sorted(adj[root])))]
        colour[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    parent[nxt] = node
                    stack.append((nxt, iter(sorted(adj[nxt]))))
                    advanced = True
                    break
                if colour[nxt] == GREY:
                    # back edge: unwind the grey chain into a cycle
                    cycle = [nxt]
                    cur = node
                    while cur != nxt:
                        cycle.append(cur)
                        cur = parent[cur]
                    cycle.reverse()
                    return cycle
            if not advanced:
                colour[node] = BLACK
                stack.pop()
    return None


def preorder(space: Space) -> Preorder:
    """Reflexive-transitive closure of the space's relation."""
    adj = out_adjacency(space)
    down = {k: _reach(adj, k) for k in adj}
    up: dict[ElementId, set[ElementId]] = {k: set() for k in adj}
    pairs = set()
    for a, reach in down.items():
        for b in reach:
            pairs.add((a, b))
            up[b].add(a)
    return Preorder(
        pairs=frozenset(pairs),
        _down=down,
        _up={k: frozenset(v) for k, v in up.items()},
    )


def _require_keys(space: Space, keys: Iterable[ElementId]) -> frozenset[ElementId]:
    ks = frozenset(keys)
    missing = ks - space.keys()
    if missing:
        raise NotFoundError(f"unknown element keys: {sorted(str(k) for k in missing)}")
    return ks


# ---------------------------------------------------------------------------
# topological queries


def closure(space: Space, a_set: Iterable[ElementId]) -> frozenset[ElementId]:
    """Smallest closed set containing ``a_set``: all keys reachable along R."""
    keys = _require_keys(space, a_set)
    adj = out_adjacency(space)
    out: set[ElementId] = set()
    for k in keys:
        out |= _reach(adj, k)
    return frozenset(out)


def star(space: Space, a_set: Iterable[ElementId]) -> frozenset[ElementId]:
    """Smallest open set containing ``a_set``: all keys that reach it along R."""
    keys = _require_keys(space, a_set)
    adj = in_adjacency(space)
    out: set[ElementId] = set()
    for k in keys:
        out |= _reach(adj, k)
    return frozenset(out)


def enumerate_open_sets(space: Space) -> frozenset[frozenset[ElementId]]:
    """The full family of open sets, by brute force over all subsets.

    Guarded: 2^n subsets are checked, so spaces beyond the bound are
    refused rather than silently slow.
    """
    n = len(space.elements)
    check_guard(n, OPEN_SET_GUARD, "enumerate_open_sets")
    keys = sorted(space.elements)
    index = {k: i for i, k in enumerate(keys)}
    # bound_mask[j]: bits of all a with (a, keys[j]) in R — must accompany j
    bound_mask = [0] * n
    for p in space.relation:
        bound_mask[index[p.idb]] |= 1 << index[p.ida]
    opens = []
    for m in range(1 << n):
        rest = m
        ok = True
        while rest:
            low = rest & -rest
            j = low.bit_length() - 1
            if bound_mask[j] & ~m:
                ok = False
                break
            rest ^= low
        if ok:
            opens.append(frozenset(keys[i] for i in range(n) if m >> i & 1))
    return frozenset(opens)


def is_t0(space: Space) -> bool:
    return find_cycle(space) is None


# ---------------------------------------------------------------------------
# dimension and classification


def _longest_out_chain(space: Space) -> dict[ElementId, int]:
    """Longest strict bounded-by chain starting at each key, in steps."""
    adj = out_adjacency(space)
    depth: dict[ElementId, int] = {}
    state: dict[ElementId, int] = {}  # 1 = in progress, 2 = done

    def walk(k: ElementId) -> int:
        if state.get(k) == 2:
            return depth[k]
        if state.get(k) == 1:
            raise T0ViolationError(
                f"relation has a cycle through {k}; dimension is undefined",
                cycle=[k],
            )
        state[k] = 1
        best = 0
        for nxt in adj[k]:
            best = max(best, 1 + walk(nxt))
        state[k] = 2
        depth[k] = best
        return best

    for k in adj:
        walk(k)
    return depth


def element_dimension(space: Space, x: ElementId) -> int:
    """Length in steps of the longest chain descending from ``x``."""
    _require_keys(space, [x])
    return _longest_out_chain(space)[x]


def krull_dimension(space: Space) -> int:
    """Length of the longest strict chain in the space.

    A chain of k+1 pairwise-related distinct elements has length k.  Raises
    on the empty space and on cyclic relations, where no finite strict
    chain bound exists.
    """
    if not space.elements:
        raise EmptySpaceError("dimension of the empty space is undefined")
    return max(_longest_out_chain(space).values())


def classify(space: Space, x: ElementId) -> Literal["vertex", "edge", "higher"]:
    """vertex: bounded by nothing; edge: bounded only by vertices; else higher."""
    _require_keys(space, [x])
    adj = out_adjacency(space)
    if not adj[x]:
        return "vertex"
    boundary = closure(space, [x]) - {x}
    if all(not adj[b] for b in boundary):
        return "edge"
    return "higher"


# ---------------------------------------------------------------------------
# connectedness


def connected_components(space: Space) -> tuple[frozenset[ElementId], ...]:
    """Partition of the elements into connected components.

    On the full element set, topological connectedness coincides with
    connectedness of the undirected reflection of the relation.
    """
    undirected: dict[ElementId, set[ElementId]] = {k: set() for k in space.elements}
    for p in space.relation:
        undirected[p.ida].add(p.idb)
        undirected[p.idb].add(p.ida)
    seen: set[ElementId] = set()
    comps = []
    for k in sorted(space.elements):
        if k in seen:
            continue
        comp = _reach(undirected, k)
        seen |= comp
        comps.append(comp)
    return tuple(comps)


def components_within(space: Space, a_set: Iterable[ElementId]) -> tuple[frozenset[ElementId], ...]:
    """Connected components of the subspace on ``a_set``.

    Subspace connectedness is comparability-graph connectedness of the
    *restricted preorder*: two kept elements are adjacent when one is
    transitively bounded by the other in the ambient space, even when every
    intermediate element was dropped.
    """
    keys = _require_keys(space, a_set)
    pre = preorder(space)
    adj: dict[ElementId, set[ElementId]] = {k: set() for k in keys}
    for a in keys:
        for b in pre.descendants(a):
            if b in keys and b != a:
                adj[a].add(b)
                adj[b].add(a)
    seen: set[ElementId] = set()
    comps = []
    for k in sorted(keys):
        if k in seen:
            continue
        comp = _reach(adj, k)
        seen |= comp
        comps.append(comp)
    return tuple(comps)


def is_connected(space: Space, a_set: Iterable[ElementId]) -> bool:
    """Whether the subspace on ``a_set`` is connected (empty: vacuously yes)."""
    comps = components_within(space, a_set)
    return len(comps) <= 1
