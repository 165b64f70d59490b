"""Small worked examples used by the test suite, the docs and the CLI demos.

Everything here is deterministic and hand-sized: an edge with its two end
vertices, a three-element "house" (one interior bounded by two walls), a
four-element chain of dimension three, a one-dimensional house whose right
wall moves at a known time (the space-time complex built by gluing), a
three-version text store whose branches merge with known conflicts, a
two-level region store with a continuous generalisation map, and a tiny
store whose single pair is deleted and later re-added.
"""
from __future__ import annotations

from .algebra import PRODUCT_SEPARATOR, quotient, space_map
from .spacetime import AttachmentSpec, PointRow, attach_change
from .storage import VersionStore, commit, new_store
from .topology import BoundedByPair, Element, ElementId, Space, build_space, simple_space
from .versioning import changeset, reconstruct_version, text_space

_S = PRODUCT_SEPARATOR


# ---------------------------------------------------------------------------
# plain spaces


def edge_space() -> Space:
    """One edge bounded by its two end vertices."""
    return simple_space(["u", "v", "e"], [("e", "u"), ("e", "v")])


def house() -> Space:
    """A 1D interior between a left and a right wall."""
    return simple_space(["wl", "wr", "I"], [("I", "wl"), ("I", "wr")])


def house_after() -> Space:
    """The house after the right wall moved outward."""
    return simple_space(["wl", "wrr", "J"], [("J", "wl"), ("J", "wrr")])


def chain4() -> Space:
    """A four-element chain; its dimension is three."""
    return simple_space(
        ["x0", "x1", "x2", "x3"], [("x3", "x2"), ("x2", "x1"), ("x1", "x0")]
    )


def point_space(name: str = "P") -> Space:
    return simple_space([name])


# ---------------------------------------------------------------------------
# the moving-wall space-time complex


def moving_wall_overlay() -> Space:
    """The overlay at the change instant: old interior I, transition X."""
    return simple_space(
        ["wl", "wr", "wrr", "I", "X"],
        [("I", "wl"), ("I", "wr"), ("X", "wr"), ("X", "wrr")],
    )


def moving_wall_spec() -> AttachmentSpec:
    overlay = moving_wall_overlay()
    past = space_map(overlay, house(), {"wl": "wl", "I": "I", "wr": "wr"})
    future = space_map(
        overlay,
        house_after(),
        {"wl": "wl", "I": "J", "wr": "J", "X": "J", "wrr": "wrr"},
    )
    return AttachmentSpec(overlay, past, future)


def lineland_glued() -> Space:
    """The raw glued complex: prism halves around the change at t1."""
    return attach_change(
        house(),
        house_after(),
        moving_wall_spec(),
        t="t1",
        t_before="t0",
        t_after="t2",
        span_past="s01",
        span_future="s12",
    )


def lineland_space() -> Space:
    """The glued complex with unchanged trajectories collapsed."""
    glued = lineland_glued()
    left_wall = {
        ElementId(f"wl{_S}s01"),
        ElementId(f"wl{_S}t1"),
        ElementId(f"wl{_S}s12"),
    }
    interior = {
        ElementId(f"I{_S}s01"),
        ElementId(f"I{_S}t1"),
        ElementId(f"J{_S}s12"),
    }
    return quotient(glued, [left_wall, interior])


def lineland_points() -> tuple[PointRow, ...]:
    """Coordinates for the corner vertices of the collapsed complex."""
    coords = {
        f"wl{_S}t0": (0.0, 0.0),
        f"wr{_S}t0": (1.0, 0.0),
        f"wr{_S}t1": (1.0, 1.0),
        f"wrr{_S}t1": (2.0, 1.0),
        f"wl{_S}t2": (0.0, 2.0),
        f"wrr{_S}t2": (2.0, 2.0),
    }
    return tuple(
        PointRow(key=ElementId(k), x=x, y=0.0, z=0.0, t=t) for k, (x, t) in coords.items()
    )


def lineland_store() -> VersionStore:
    return new_store("v0", lineland_space(), lineland_points())


# ---------------------------------------------------------------------------
# text versions: hello -> help, hello -> halo


def text_store() -> VersionStore:
    """Three versions of a five-letter string, branching at the root."""
    store = new_store("v0", text_space("hello", version="v0"))
    to_help = changeset(
        "v1",
        remove_elements=["4", "5"],
        add_elements=[Element(ElementId("6"), attributes={"letter": "p"})],
        add_pairs=[("3", "6")],
    )
    store = commit(store, "v0", to_help)
    to_halo = changeset(
        "v2",
        remove_elements=["2", "4"],
        add_elements=[Element(ElementId("7"), attributes={"letter": "a"})],
        add_pairs=[("1", "7"), ("7", "3")],
        remove_pairs=[("1", "3")],
    )
    return commit(store, "v0", to_halo)


def help_store() -> VersionStore:
    """The h-e-l-p branch as a standalone one-version store."""
    return new_store("v1", reconstruct_version(text_store(), "v1"))


def halo_store() -> VersionStore:
    """The h-a-l-o branch as a standalone one-version store."""
    return new_store("v2", reconstruct_version(text_store(), "v2"))


# ---------------------------------------------------------------------------
# two levels of detail over a strip of three faces


def regions_space(faulty: bool = False) -> Space:
    """Three faces at the fine level, two at the coarse level.

    Fine faces A and B meet along edge ab, B and C along bc; the coarse
    level keeps the A/B wall but absorbs C (with bc and m2) into the
    vertex Cc interior to Bc.  With ``faulty`` the coarse pair recording
    that absorption is dropped, which breaks the continuity of the
    generalisation map at (B, bc).
    """
    gen = {
        "A": "Ac",
        "B": "Bc",
        "C": "Cc",
        "ab": "ab_c",
        "bc": "Cc",
        "m1": "m_c",
        "m2": "Cc",
    }
    region = {"A": "west", "ab": "west", "B": "west", "bc": "east", "C": "east", "m2": "east"}
    elements = [
        Element(
            key=ElementId(name),
            gen_target=ElementId(gen[name], 1),
            attributes={"region": region[name]} if name in region else {},
        )
        for name in ["A", "B", "C", "ab", "bc", "m1", "m2"]
    ]
    elements += [Element(key=ElementId(name, 1)) for name in ["Ac", "Bc", "Cc", "ab_c", "m_c"]]
    fine_pairs = [("A", "ab"), ("B", "ab"), ("B", "bc"), ("C", "bc"), ("ab", "m1"), ("bc", "m2")]
    coarse_pairs = [("Ac", "ab_c"), ("Bc", "ab_c"), ("ab_c", "m_c")]
    if not faulty:
        coarse_pairs.append(("Bc", "Cc"))
    pairs = [BoundedByPair(ElementId(a), ElementId(b)) for a, b in fine_pairs]
    pairs += [BoundedByPair(ElementId(a, 1), ElementId(b, 1)) for a, b in coarse_pairs]
    return build_space(elements, pairs)


def regions_points() -> tuple[PointRow, ...]:
    fine = {
        "A": (0.5, 1.0),
        "B": (1.5, 1.0),
        "C": (2.5, 1.0),
        "ab": (1.0, 0.5),
        "bc": (2.0, 0.5),
        "m1": (1.0, 0.0),
        "m2": (2.0, 0.0),
    }
    coarse = {
        "Ac": (0.5, 2.0),
        "Bc": (2.0, 2.0),
        "Cc": (2.5, 1.5),
        "ab_c": (1.0, 1.5),
        "m_c": (1.0, 1.0),
    }
    rows = [
        PointRow(key=ElementId(k), x=x, y=y, z=0.0, t=0.0) for k, (x, y) in fine.items()
    ]
    rows += [
        PointRow(key=ElementId(k, 1), x=x, y=y, z=0.0, t=0.0) for k, (x, y) in coarse.items()
    ]
    return tuple(rows)


def regions_store(faulty: bool = False) -> VersionStore:
    return new_store("v1", regions_space(faulty), regions_points())


# ---------------------------------------------------------------------------
# a pair deleted and re-added across versions


def path_store() -> VersionStore:
    """a->b linked at v1, unlinked at v2, re-linked at v3."""
    store = new_store("v1", simple_space(["a", "b"], [("a", "b")]))
    store = commit(store, "v1", changeset("v2", remove_pairs=[("a", "b")]))
    return commit(store, "v2", changeset("v3", add_pairs=[("a", "b")]))


def demo_stores() -> dict[str, VersionStore]:
    """Every committed demo store by directory name."""
    return {
        "chain4": new_store("v0", chain4()),
        "lineland": lineland_store(),
        "textstore": text_store(),
        "help": help_store(),
        "halo": halo_store(),
        "regions": regions_store(),
        "pathdemo": path_store(),
    }
