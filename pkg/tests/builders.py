"""Deterministic random generators shared by the tests.

All builders take an explicit ``random.Random`` so every test run draws the
same corpus.
"""
from __future__ import annotations

import random
import string

from alexdb import (
    BoundedByPair,
    Element,
    ElementId,
    PointRow,
    Space,
    SpaceMap,
    build_space,
    changeset,
    commit,
    new_store,
    simple_space,
)
from alexdb.storage import VersionStore
from alexdb.versioning import reconstruct_version


def random_space(rng: random.Random, max_n: int = 8, p: float = 0.3, prefix: str = "e") -> Space:
    """A random T0 space: forward edges over an ordered element list."""
    n = rng.randint(1, max_n)
    keys = [f"{prefix}{i}" for i in range(n)]
    pairs = [
        (keys[i], keys[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    ]
    return simple_space(keys, pairs)


def random_subset(rng: random.Random, space: Space, may_be_empty: bool = True) -> frozenset:
    keys = sorted(space.keys())
    chosen = [k for k in keys if rng.random() < 0.5]
    if not chosen and not may_be_empty:
        chosen = [rng.choice(keys)]
    return frozenset(chosen)


def random_total_map(rng: random.Random, source: Space, target: Space) -> SpaceMap:
    targets = sorted(target.keys())
    mapping = {k: rng.choice(targets) for k in source.keys()}
    return SpaceMap(source, target, mapping)


def cluster_map(rng: random.Random, max_coarse: int = 4, max_cluster: int = 3) -> SpaceMap:
    """A monotone, continuous, surjective map built by construction.

    Each coarse element is expanded into a chain of fine elements; every
    coarse pair becomes one fine pair between the chains.  Mapping each
    chain back onto its coarse element is then continuous (pairs land on
    pairs), surjective (chains are nonempty) and monotone (preimages glue
    exactly like the coarse elements they came from).
    """
    coarse = random_space(rng, max_coarse, p=0.4, prefix="c")
    coarse_keys = sorted(coarse.keys())
    fine_keys: dict = {}
    fine_pairs = []
    for c in coarse_keys:
        size = rng.randint(1, max_cluster)
        chain = [ElementId(f"{c.id}f{i}") for i in range(size)]
        fine_keys[c] = chain
        fine_pairs += [
            BoundedByPair(chain[i], chain[i + 1]) for i in range(size - 1)
        ]
    for pair in coarse.relation:
        fine_pairs.append(
            BoundedByPair(rng.choice(fine_keys[pair.ida]), rng.choice(fine_keys[pair.idb]))
        )
    fine = build_space(
        (Element(k) for chain in fine_keys.values() for k in chain),
        fine_pairs,
    )
    mapping = {k: c for c, chain in fine_keys.items() for k in chain}
    return SpaceMap(fine, coarse, mapping)


def random_version_dag(rng: random.Random, max_n: int = 8, p: float = 0.3):
    n = rng.randint(1, max_n)
    nodes = [f"v{i}" for i in range(n)]
    edges = [
        (nodes[i], nodes[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    ]
    return nodes, edges


_LETTERS = string.ascii_lowercase


def _random_attrs(rng: random.Random) -> dict:
    attrs = {}
    for _ in range(rng.randint(0, 2)):
        name = "".join(rng.choice(_LETTERS) for _ in range(4))
        kind = rng.random()
        if kind < 0.4:
            attrs[name] = rng.randint(-1000, 1000)
        elif kind < 0.7:
            attrs[name] = rng.uniform(-10, 10)
        else:
            attrs[name] = "w" + "".join(rng.choice(_LETTERS) for _ in range(5))
    return attrs


def random_store(rng: random.Random, max_versions: int = 4) -> VersionStore:
    """A store grown by committing random changesets along a random chain."""
    base = random_space(rng, max_n=5, p=0.35, prefix="n")
    elements = [
        Element(key=k, attributes=_random_attrs(rng)) for k in sorted(base.keys())
    ]
    space = build_space(elements, base.relation)
    points = tuple(
        PointRow(key=k, x=rng.uniform(-5, 5), y=rng.uniform(-5, 5), z=0.0, t=float(i))
        for i, k in enumerate(sorted(space.keys()))
        if rng.random() < 0.6
    )
    store = new_store("v0", space, points)
    counter = len(space.elements)
    for i in range(1, rng.randint(1, max_versions)):
        parent = rng.choice(store.vx)
        current = reconstruct_version(store, parent)
        keys = sorted(current.keys())
        removable = [k for k in keys if rng.random() < 0.25]
        added = []
        add_pairs = []
        if rng.random() < 0.8:
            new_key = ElementId(f"n{counter}")
            counter += 1
            added.append(Element(key=new_key, attributes=_random_attrs(rng)))
            anchors = [k for k in keys if k not in removable]
            if anchors and rng.random() < 0.7:
                add_pairs.append((rng.choice(anchors), new_key))
        changes = changeset(
            f"v{len(store.vx)}",
            add_elements=added,
            remove_elements=removable,
            add_pairs=add_pairs,
        )
        store = commit(store, parent, changes)
    return store


def two_level_store(rng: random.Random, version: str = "v1") -> VersionStore:
    """A single-version store whose fine level generalises onto the coarse."""
    g = cluster_map(rng)
    elements = [
        Element(
            key=k,
            gen_target=ElementId(g.mapping[k].id, 1),
        )
        for k in sorted(g.source.keys())
    ]
    elements += [Element(key=ElementId(c.id, 1)) for c in sorted(g.target.keys())]
    pairs = [p for p in g.source.relation]
    pairs += [
        BoundedByPair(ElementId(p.ida.id, 1), ElementId(p.idb.id, 1))
        for p in g.target.relation
    ]
    return new_store(version, build_space(elements, pairs))
