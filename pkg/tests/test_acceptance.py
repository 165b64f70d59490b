"""Acceptance suite: ten go/no-go checks, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines;
the whole suite stays far under a minute.  Every criterion draws its corpus
from its own fixed seed, so reruns check the same instances.
"""
from __future__ import annotations

import functools
import random

import pytest

import builders
import oracles
from alexdb import demos
from alexdb.algebra import check_map, open_reduction, product, restrict_map, select_subspace
from alexdb.lod import (
    chain_from_store,
    filtered_path_query,
    monotone_path_query,
    path_query,
    telescope,
    telescope_fiber,
)
from alexdb.spacetime import time_slice
from alexdb.storage import (
    RRow,
    VersionStore,
    canonicalize,
    load,
    reconstruct_version,
    save,
    validate,
)
from alexdb.topology import (
    ElementId,
    closure,
    enumerate_open_sets,
    is_connected,
    krull_dimension,
    simple_space,
    star,
)
from alexdb.versioning import merge, reconstruction_covers, version_space


def criterion(num: int, name: str):
    """Print one PASS/FAIL line per criterion, then defer to pytest."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            label = f"ACCEPTANCE {num:02d} {name}"
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"{label}: FAIL")
                raise
            print(f"{label}: PASS")

        return wrapper

    return deco


def pairs_of(space):
    return [(p.ida, p.idb) for p in space.relation]


def random_subset(rng, keys):
    keys = sorted(keys)
    return frozenset(k for k in keys if rng.random() < 0.5)


# ---------------------------------------------------------------------------


@criterion(1, "hulls and subspaces match open-set enumeration")
def test_topology_matches_the_open_set_oracle():
    rng = random.Random(0xA111)
    for _ in range(200):
        space = builders.random_space(rng, max_n=10)
        keys = frozenset(space.keys())
        opens = oracles.open_family(keys, pairs_of(space))
        assert set(enumerate_open_sets(space)) == opens

        subset = random_subset(rng, keys)
        assert star(space, subset) == oracles.smallest_open_superset(opens, subset)
        assert closure(space, subset) == oracles.smallest_closed_superset(
            keys, opens, subset
        )
        assert is_connected(space, subset) == oracles.is_connected_subset(opens, subset)
        sub = select_subspace(space, subset)
        relative = {o & subset for o in opens}
        assert set(enumerate_open_sets(sub)) == relative


@criterion(2, "pair reduction is the exact minimal covering relation")
def test_open_reduction_matches_the_reduction_oracle():
    rng = random.Random(0xA112)
    for _ in range(200):
        space = builders.random_space(rng, max_n=12)
        keys = frozenset(space.keys())
        raw = pairs_of(space)
        reduced = {(p.ida, p.idb) for p in open_reduction(space.relation)}
        assert reduced == oracles.transitive_reduction_pairs(keys, raw)
        full = oracles.transitive_closure_pairs(keys, raw)
        assert oracles.transitive_closure_pairs(keys, reduced) == full
        for dropped in reduced:
            thinner = reduced - {dropped}
            assert oracles.transitive_closure_pairs(keys, thinner) != full


@criterion(3, "dimension equals exhaustive longest-chain search")
def test_dimension_matches_exhaustive_chain_search():
    rng = random.Random(0xA113)
    for _ in range(200):
        space = builders.random_space(rng, max_n=10)
        assert krull_dimension(space) == oracles.longest_chain_steps(
            space.keys(), pairs_of(space)
        )
    countdown = simple_space(["3", "2", "1", "0"], [("3", "2"), ("2", "1"), ("1", "0")])
    assert krull_dimension(countdown) == 3
    for _ in range(50):
        a = builders.random_space(rng, max_n=6)
        b = builders.random_space(rng, max_n=6)
        assert krull_dimension(product(a, b)) == krull_dimension(a) + krull_dimension(b)


@criterion(4, "relational continuity equals open-preimage continuity")
def test_continuity_definitions_agree():
    rng = random.Random(0xA114)
    checked = 0
    while checked < 500:
        a = builders.random_space(rng, max_n=7)
        b = builders.random_space(rng, max_n=7)
        f = builders.random_total_map(rng, a, b)
        assert check_map(f).continuous == oracles.open_preimage_continuous(f)
        checked += 1


@criterion(5, "filtered path queries are sound and sometimes skip the fine level")
def test_filtered_path_query_soundness_and_acceleration():
    rng = random.Random(0xA115)
    accelerated = 0
    for _ in range(500):
        g = builders.cluster_map(rng)
        fine_keys = sorted(g.source.keys())
        a, b = rng.choice(fine_keys), rng.choice(fine_keys)
        region = random_subset(rng, fine_keys) | {a, b}
        trace = filtered_path_query(g, region, a, b)
        direct = path_query(g.source, region, a, b)
        assert trace.answer == direct
        assert monotone_path_query(g, region, a, b) == direct
        if len(g.target.elements) < len(g.source.elements) and not trace.used_fallback:
            accelerated += 1
    assert accelerated >= 1


@criterion(6, "two-document merge reproduces the conflict report exactly")
def test_text_merge_golden():
    help_doc = reconstruct_version(demos.help_store(), "v1")
    halo_doc = reconstruct_version(demos.halo_store(), "v2")
    merged, report = merge(help_doc, halo_doc, rules=["linear-dag"])
    letters = {k.id: merged.elements[k].attributes["letter"] for k in merged.keys()}
    assert letters == {"1": "h", "2": "e", "3": "l", "5": "o", "6": "p", "7": "a"}
    assert {(p.ida.id, p.idb.id) for p in merged.relation} == {
        ("1", "2"),
        ("1", "7"),
        ("2", "3"),
        ("3", "5"),
        ("3", "6"),
        ("7", "3"),
    }
    assert report.inherent == ()
    assert report.consistency != ()
    assert all(c.rule == "linear-dag" for c in report.consistency)


@criterion(7, "moving-wall pipeline and its time slices match the drawn complex")
def test_moving_wall_golden():
    space = demos.lineland_space()
    expected = simple_space(
        [
            "I⊗s01", "I⊗t0", "J⊗t2", "X⊗t1", "wl⊗s01", "wl⊗t0", "wl⊗t2",
            "wr⊗s01", "wr⊗t0", "wr⊗t1", "wrr⊗s12", "wrr⊗t1", "wrr⊗t2",
        ],
        [
            ("I⊗s01", "I⊗t0"),
            ("I⊗s01", "J⊗t2"),
            ("I⊗s01", "X⊗t1"),
            ("I⊗s01", "wl⊗s01"),
            ("I⊗s01", "wrr⊗s12"),
            ("I⊗s01", "wr⊗s01"),
            ("I⊗t0", "wl⊗t0"),
            ("I⊗t0", "wr⊗t0"),
            ("J⊗t2", "wl⊗t2"),
            ("J⊗t2", "wrr⊗t2"),
            ("X⊗t1", "wrr⊗t1"),
            ("X⊗t1", "wr⊗t1"),
            ("wl⊗s01", "wl⊗t0"),
            ("wl⊗s01", "wl⊗t2"),
            ("wrr⊗s12", "wrr⊗t1"),
            ("wrr⊗s12", "wrr⊗t2"),
            ("wr⊗s01", "wr⊗t0"),
            ("wr⊗s01", "wr⊗t1"),
        ],
    )
    assert set(space.keys()) == set(expected.keys())
    assert space.relation == expected.relation
    assert oracles.spaces_homeomorphic(space, expected)

    pts = demos.lineland_points()
    # interior times of each span look like the 1D states around the change
    assert oracles.spaces_homeomorphic(time_slice(space, pts, 0.5), demos.house())
    assert oracles.spaces_homeomorphic(
        time_slice(space, pts, 1.5), demos.house_after()
    )
    # the boundary rule: at an instant, exactly its face elements survive
    assert {k.id for k in time_slice(space, pts, 0.0).keys()} == {
        "I⊗t0", "wl⊗t0", "wr⊗t0",
    }
    assert {k.id for k in time_slice(space, pts, 1.0).keys()} == {
        "I⊗s01", "X⊗t1", "wl⊗s01", "wr⊗t1", "wrr⊗t1",
    }
    assert {k.id for k in time_slice(space, pts, 2.0).keys()} == {
        "J⊗t2", "wl⊗t2", "wrr⊗t2",
    }


@criterion(8, "reconstructability from bases agrees with path enumeration")
def test_reconstruction_covers_matches_path_enumeration():
    rng = random.Random(0xA118)
    for _ in range(1000):
        nodes, edges = builders.random_version_dag(rng, max_n=8)
        vs = version_space(nodes, edges)
        v = rng.choice(nodes)
        v0 = {t for t in nodes if rng.random() < 0.4} or {rng.choice(nodes)}
        w = {t for t in nodes if rng.random() < 0.3}
        assert reconstruction_covers(vs, v0, v, w) == oracles.covers_by_paths(
            vs.versions, set(vs.transitions), v0, v, w
        )


def _coarse_reaches(rows, a, b):
    """Reachability over the level-1 pair rows, a to b."""
    out = {}
    for w in rows:
        out.setdefault(w.ida, set()).add(w.idb)
    seen, queue = {a}, [a]
    while queue:
        cur = queue.pop()
        for nxt in out.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return b in seen


def _breakable_coarse_row(store):
    """A coarse pair row whose removal severs its endpoints, or None."""
    coarse = [w for w in store.r if w.lod == 1]
    for row in coarse:
        rest = [w for w in coarse if w is not row]
        if not _coarse_reaches(rest, row.ida, row.idb):
            return row
    return None


def _drop_row(store, row):
    return VersionStore(
        x=store.x,
        r=tuple(w for w in store.r if w is not row),
        point=store.point,
        delx=store.delx,
        delr=store.delr,
        vx=store.vx,
        vr=store.vr,
        atts=store.atts,
    )


def _add_r_row(store, row):
    return VersionStore(
        x=store.x,
        r=store.r + (row,),
        point=store.point,
        delx=store.delx,
        delr=store.delr,
        vx=store.vx,
        vr=store.vr,
        atts=store.atts,
    )


@criterion(9, "stores round-trip exactly and every seeded fault is flagged")
def test_store_round_trip_and_fault_injection(tmp_path):
    rng = random.Random(0xA119)
    for i in range(50):
        store = builders.random_store(rng)
        target = tmp_path / f"rt{i}"
        save(store, target)
        assert load(target) == canonicalize(store)

    # ten broken foreign keys of rotating kinds
    for i in range(10):
        store = builders.random_store(rng)
        ghost = RRow(ida="ghost", idb=store.x[0].id, lod=store.x[0].lod, version=store.vx[0])
        tampered = _add_r_row(store, ghost)
        issues = [x for x in validate(tampered) if x.rule == "foreign-key"]
        assert issues, "foreign-key fault not flagged"
        assert any(x.witnesses == (ghost,) and x.subject == "R.ida→X" for x in issues)

    # ten severed generalisation pairs: continuity of the level map breaks
    found = 0
    while found < 10:
        store = builders.two_level_store(rng)
        row = _breakable_coarse_row(store)
        if row is None:
            continue
        found += 1
        tampered = _drop_row(store, row)
        issues = [x for x in validate(tampered) if x.rule == "cfk-continuity"]
        assert issues, "continuity fault not flagged"
        (issue,) = issues
        x1, x2 = issue.witnesses
        space = reconstruct_version(tampered, tampered.vx[0])
        g1 = space.elements[x1].gen_target
        g2 = space.elements[x2].gen_target
        assert g1 is not None and g2 is not None and g1 != g2
        coarse_rows = [w for w in tampered.r if w.lod == 1]
        assert not _coarse_reaches(coarse_rows, g1.id, g2.id)

    # ten injected reverse pairs: a two-cycle at one version
    done = 0
    while done < 10:
        store = builders.random_store(rng)
        candidates = [
            w
            for w in store.r
            if w.ida != w.idb
            and not any(
                o.ida == w.idb and o.idb == w.ida and o.lod == w.lod for o in store.r
            )
        ]
        if not candidates:
            continue
        done += 1
        row = rng.choice(candidates)
        reverse = RRow(ida=row.idb, idb=row.ida, lod=row.lod, version=row.version)
        tampered = _add_r_row(store, reverse)
        issues = [x for x in validate(tampered) if x.rule == "t0"]
        assert issues, "separation fault not flagged"
        flagged = {x.subject for x in issues}
        assert f"version {row.version}" in flagged


@criterion(10, "the telescope stacks levels with an extra dimension")
def test_telescope_fibers_and_dimension():
    store = demos.regions_store()
    base = reconstruct_version(store, "v1")
    chain = chain_from_store(store, "v1")
    tele = telescope(store, "v1")
    assert oracles.spaces_homeomorphic(telescope_fiber(tele, "0-0"), chain.spaces[0])
    assert oracles.spaces_homeomorphic(telescope_fiber(tele, "1-1"), chain.spaces[1])
    assert oracles.spaces_homeomorphic(telescope_fiber(tele, "0-1"), chain.spaces[0])
    assert krull_dimension(tele) >= krull_dimension(base) + 1
