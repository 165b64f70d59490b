"""An embedded topological-relational store for finite spaces.

Spaces are finite sets of elements with a bounded-by relation; the topology
this induces integrates 3D objects, their history and their levels of
detail in one queryable structure.  See the README for a tour.
"""
from __future__ import annotations

from .algebra import (
    MapReport,
    SpaceMap,
    check_map,
    disjoint_union,
    image_space,
    open_reduction,
    product,
    pullback,
    quotient,
    restrict_map,
    select_subspace,
    space_map,
)
from .errors import (
    AlexdbError,
    AttributeMergeWarning,
    DanglingPairError,
    DiscontinuousMapError,
    DuplicateKeyError,
    EmptySpaceError,
    ForeignKeyError,
    IntegrityError,
    MissingGeometryError,
    NotFoundError,
    QueryEvalError,
    QueryParseError,
    SizeGuardError,
    StoreFormatError,
    T0ViolationError,
)
from .lod import (
    LodChain,
    PathQueryTrace,
    chain_from_store,
    filtered_path_query,
    interpolate,
    lod_graph,
    monotone_path_query,
    path_query,
    telescope,
    telescope_fiber,
    validate_chain,
)
from .spacetime import (
    AttachmentSpec,
    PointRow,
    attach_change,
    prism,
    time_complex,
    time_slice,
)
from .storage import (
    AttRow,
    DelRRow,
    DelXRow,
    RRow,
    ValidationIssue,
    VersionStore,
    XRow,
    canonicalize,
    commit,
    load,
    new_store,
    save,
    validate,
    versions_with_path,
)
from .topology import (
    BoundedByPair,
    Element,
    ElementId,
    Preorder,
    Space,
    build_space,
    classify,
    closure,
    connected_components,
    components_within,
    element_dimension,
    enumerate_open_sets,
    find_cycle,
    is_connected,
    is_t0,
    krull_dimension,
    preorder,
    simple_space,
    star,
)
from .versioning import (
    ChangeSet,
    ConflictReport,
    ConsistencyConflict,
    InherentConflict,
    VersionSpace,
    apply_changeset,
    changeset,
    consistency_rule,
    merge,
    reconstruct_version,
    reconstruction_covers,
    register_rule,
    text_space,
    version_closure,
    version_space,
    version_star,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
