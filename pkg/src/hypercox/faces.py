"""Faces of acute-angled polytopes from Gram data alone.

A subset S of facets spans a face iff the principal submatrix G_S is positive
definite; the face's own Gram matrix is the Schur complement over its bounding
set, rows and columns normalised by the square roots of the diagonal.  The
facet tree collects isometry types level by level, globally deduplicating
non-Coxeter types while always preserving Coxeter faces.
"""

from dataclasses import dataclass, field
from itertools import combinations

from . import linalg
from .angles import NonCoxeter, recognize_angle
from .arithmeticity import ClassificationReport, classify
from .errors import NotAFace
from .gram import GramMatrix
from .tower import sqrt_extend

__all__ = [
    "FaceDescriptor",
    "face_gram",
    "enumerate_faces",
    "is_coxeter_face",
    "vertices_with_ideal",
    "finite_volume_check",
    "is_compact",
    "FacetTree",
    "TreeNode",
    "facet_tree",
]


@dataclass
class FaceDescriptor:
    """A face of codimension |subset| with its normalised Gram matrix.

    facet_map[k] is the parent facet whose hyperplane cuts out the k-th facet
    of the face.
    """

    subset: tuple
    dim: int
    gram: GramMatrix
    facet_map: tuple
    is_coxeter: bool
    recognition_bound: int
    classification: ClassificationReport | None = None

    def classify(self, cycle_cap=None):
        if self.classification is None:
            kwargs = {} if cycle_cap is None else {"cycle_cap": cycle_cap}
            self.classification = classify(self.gram, **kwargs)
        return self.classification


def _pd_subset(raw, subset):
    return linalg.is_positive_definite(linalg.submatrix(raw, list(subset)))


def face_gram(g, subset):
    """Normalised Gram matrix of the face cut out by ``subset``.

    Returns (GramMatrix, bounding) where bounding lists the facets whose
    hyperplanes still bound the face, i.e. those j with S + {j} elliptic.
    """
    subset = tuple(sorted(subset))
    raw = g.raw()
    if not _pd_subset(raw, subset):
        raise NotAFace(f"subset {subset} has non-elliptic Gram submatrix")
    in_s = set(subset)
    bounding = tuple(
        j
        for j in range(g.n)
        if j not in in_s and _pd_subset(raw, subset + (j,))
    )
    schur = linalg.schur_complement(raw, list(subset), list(bounding))
    m = len(bounding)
    tower = g.tower
    roots = []
    for i in range(m):
        r = sqrt_extend(tower.lift(schur[i][i]))
        tower = r.tower if r.tower.levels > tower.levels else tower
        roots.append(r)
    roots = [tower.lift(r) for r in roots]
    entries = [
        [tower.lift(schur[i][j]) / (roots[i] * roots[j]) for j in range(m)]
        for i in range(m)
    ]
    return GramMatrix(entries), bounding


def is_coxeter_face(gram, max_m=60):
    """Every off-diagonal entry recognises as a Coxeter label up to max_m."""
    for i, j in gram.nonzero_pairs():
        if isinstance(recognize_angle(gram.rows[i][j], max_m), NonCoxeter):
            return False
    return True


def _make_descriptor(g, subset, max_m, ambient_dim):
    fg, bounding = face_gram(g, subset)
    return FaceDescriptor(
        subset=tuple(sorted(subset)),
        dim=ambient_dim - len(subset),
        gram=fg,
        facet_map=bounding,
        is_coxeter=is_coxeter_face(fg, max_m),
        recognition_bound=max_m,
    )


def enumerate_faces(g, codim, max_m=60):
    """All faces of the given codimension, via elliptic facet subsets.

    codim n-1 and n give edges and ordinary vertices; faces are only
    classified from dimension 2 up.
    """
    n_dim = g.polytope_dim()
    if codim < 0 or codim > n_dim:
        raise ValueError(f"codimension must lie in [0, {n_dim}]")
    raw = g.raw()
    subsets = [()]
    for _ in range(codim):
        nxt = []
        for s in subsets:
            start = s[-1] + 1 if s else 0
            for j in range(start, g.n):
                cand = s + (j,)
                if _pd_subset(raw, cand):
                    nxt.append(cand)
        subsets = nxt
    return [_make_descriptor(g, s, max_m, n_dim) for s in subsets]


# ---------------------------------------------------------------------------
# vertices, finite volume, compactness
# ---------------------------------------------------------------------------


def _pd_subsets_of_size(raw, n_facets, size):
    out = []
    for s in combinations(range(n_facets), size):
        if _pd_subset(raw, s):
            out.append(s)
    return out


def _connected_subsets(raw, n_facets, max_size):
    """All connected subsets of the nonzero graph, up to max_size."""
    adj = [
        {j for j in range(n_facets) if j != i and raw[i][j]} for i in range(n_facets)
    ]
    out = []

    def grow(current, frontier, banned):
        out.append(tuple(sorted(current)))
        if len(current) == max_size:
            return
        blocked = set(banned)
        for v in sorted(frontier - banned):
            grow(current | {v}, (frontier | adj[v]) - current - {v}, set(blocked))
            blocked.add(v)

    for start in range(n_facets):
        grow({start}, set(adj[start]), set(range(start)))
    return out


def _affine_components(raw, n_facets, n_dim):
    comps = []
    for s in _connected_subsets(raw, n_facets, n_dim):
        if len(s) < 2:
            continue
        sub = linalg.submatrix(raw, list(s))
        pos, neg, zero = linalg.signature(sub)
        if neg == 0 and zero == 1 and pos == len(s) - 1:
            comps.append(s)
    return comps


def _ideal_vertices(raw, n_facets, n_dim):
    """Maximal parabolic subsets of rank n_dim - 1: orthogonal unions of
    connected affine components."""
    comps = _affine_components(raw, n_facets, n_dim)
    compatible = {}
    for a in range(len(comps)):
        for b in range(a + 1, len(comps)):
            disjoint = not (set(comps[a]) & set(comps[b]))
            orthogonal = disjoint and all(
                not raw[i][j] for i in comps[a] for j in comps[b]
            )
            compatible[(a, b)] = orthogonal
    target = n_dim - 1
    out = []

    def search(start, chosen_idx, rank):
        if rank == target:
            out.append(tuple(sorted(v for i in chosen_idx for v in comps[i])))
            return
        for idx in range(start, len(comps)):
            extra = len(comps[idx]) - 1
            if rank + extra > target:
                continue
            if all(compatible[(i, idx)] for i in chosen_idx):
                search(idx + 1, chosen_idx + [idx], rank + extra)

    search(0, [], 0)
    return out


def vertices_with_ideal(g):
    """(ordinary, ideal): elliptic n-subsets and maximal parabolic subsets of
    rank n-1."""
    raw = g.raw()
    n_dim = g.polytope_dim()
    ordinary = _pd_subsets_of_size(raw, g.n, n_dim)
    ideal = _ideal_vertices(raw, g.n, n_dim)
    return ordinary, ideal


def _fv_data(raw, n_facets):
    sig = linalg.signature(raw)
    n_dim = sig[0]
    if sig[1] != 1:
        return None
    ordinary = _pd_subsets_of_size(raw, n_facets, n_dim)
    ideal = _ideal_vertices(raw, n_facets, n_dim)
    return n_dim, ordinary, ideal


def _fv_on_raw(raw, n_facets):
    """Vinberg's termination criterion on an (un)normalised Gram matrix:
    every 1-dimensional face lies in exactly two vertices, ordinary or ideal."""
    data = _fv_data(raw, n_facets)
    if data is None:
        return False
    n_dim, ordinary, ideal = data
    if not ordinary and not ideal:
        return False
    edges = _pd_subsets_of_size(raw, n_facets, n_dim - 1)
    if not edges:
        return False
    ordinary_sets = [set(v) for v in ordinary]
    ideal_sets = [set(v) for v in ideal]
    for e in edges:
        es = set(e)
        count = sum(1 for v in ordinary_sets if es <= v)
        count += sum(1 for v in ideal_sets if es <= v)
        if count != 2:
            return False
    return True


def finite_volume_check(g):
    return _fv_on_raw(g.raw(), g.n)


def is_compact(g):
    """Finite volume with no ideal vertices."""
    if not finite_volume_check(g):
        return False
    _ordinary, ideal = vertices_with_ideal(g)
    return not ideal


# ---------------------------------------------------------------------------
# facet tree
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    id: int
    parent: int | None
    level: int
    face: FaceDescriptor
    key: str
    children: list = field(default_factory=list)


@dataclass
class FacetTree:
    """Rooted tree of isometry types of faces, root = the polytope.

    Levels run from 0 (the polytope) to n-2 (dimension-2 faces).  Non-Coxeter
    isometry types appear once in the whole tree (global dedup, recorded in
    ``pruned``); Coxeter faces are kept under every parent.
    """

    dim: int
    max_m: int
    nodes: list
    dedup: dict
    pruned: list  # (parent_id, key, kept_node_id)

    def level_nodes(self, level):
        return [n for n in self.nodes if n.level == level]

    def coxeter_nodes(self):
        return [n for n in self.nodes if n.face.is_coxeter]


def facet_tree(g, max_m=60, max_depth=None, classify_coxeter=True, cycle_cap=None):
    """Breadth-first facet tree with pruning.

    Children of a node are the isometry types of its facets; by Schur
    transitivity they are materialised directly from root subsets.
    """
    n_dim = g.polytope_dim()
    depth = n_dim - 2 if max_depth is None else min(max_depth, n_dim - 2)
    face_cache = {}

    def face_of(subset):
        f = face_cache.get(subset)
        if f is None:
            f = _make_descriptor(g, subset, max_m, n_dim)
            face_cache[subset] = f
        return f

    root = face_of(())
    if classify_coxeter and root.is_coxeter:
        root.classify(cycle_cap)
    nodes = [TreeNode(0, None, 0, root, root.gram.canonical_key())]
    dedup = {nodes[0].key: 0}
    pruned = []
    frontier = [nodes[0]]
    for level in range(depth):
        nxt = []
        for node in frontier:
            subset = node.face.subset
            seen_here = set()
            for j in node.face.facet_map:
                child_subset = tuple(sorted(subset + (j,)))
                child = face_of(child_subset)
                key = child.gram.canonical_key()
                if key in seen_here:
                    continue
                seen_here.add(key)
                if not child.is_coxeter and key in dedup:
                    pruned.append((node.id, key, dedup[key]))
                    continue
                if classify_coxeter and child.is_coxeter and child.dim >= 2:
                    child.classify(cycle_cap)
                new = TreeNode(len(nodes), node.id, level + 1, child, key)
                nodes.append(new)
                node.children.append(new.id)
                dedup.setdefault(key, new.id)
                nxt.append(new)
        frontier = nxt
    return FacetTree(dim=n_dim, max_m=max_m, nodes=nodes, dedup=dedup, pruned=pruned)
