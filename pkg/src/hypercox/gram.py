"""Gram matrices of acute-angled polytopes, Coxeter diagrams, ground fields.

A GramMatrix is symmetric with unit diagonal; all entries share one tower,
canonically ordered (dependency-first, row-major first use) so that equal
matrices built through different routes serialize identically.
"""

from gmpy2 import mpq

from . import linalg
from .angles import (
    PARALLEL,
    RIGHT_ANGLE,
    Angle,
    Divergent,
    NonCoxeter,
    Parallel,
    RightAngle,
    cos_pi_over,
    recognize_angle,
)
from .errors import SizeLimit, TowerMismatch
from .expressions import serialize_algnum
from .tower import (
    QQ,
    AlgNum,
    alg_equal,
    compose_towers,
    entry_label,
    sign,
)

__all__ = [
    "GramMatrix",
    "CoxeterDiagram",
    "SubfieldDescriptor",
    "diagram_to_gram",
    "gram_to_diagram",
    "diagrams_isomorphic",
    "subfield_leq",
    "subfield_equal",
]


def _as_algnum(v):
    if isinstance(v, AlgNum):
        return v
    return QQ.rational(v)


def _unify(entries):
    """Lift a flat list of AlgNums into one compositum tower."""
    towers = []
    seen = set()
    for e in entries:
        if e.tower.key not in seen:
            seen.add(e.tower.key)
            towers.append(e.tower)
    comp = towers[0]
    lifts = {towers[0].key: None}
    for t in towers[1:]:
        comp, lift = compose_towers(comp, t)
        lifts[t.key] = lift
    out = []
    for e in entries:
        lift = lifts[e.tower.key]
        out.append(comp.lift(e) if lift is None else lift(e))
    # earlier lifts may predate later tower growth; re-lift into the final tower
    return [comp.lift(x) for x in out]


def _canonical_level_order(entries, tower):
    """Dependency-first, first-use order of the levels entries touch."""
    order = []
    placed = set()

    def place(level):
        if level in placed:
            return
        for m in tower._rad_dicts[level]:
            mm = m
            while mm:
                low = mm & -mm
                mm ^= low
                place(low.bit_length() - 1)
        placed.add(level)
        order.append(level)

    for e in entries:
        for mask in sorted(e.coeffs):
            mm = mask
            while mm:
                low = mm & -mm
                mm ^= low
                place(low.bit_length() - 1)
    return order


class GramMatrix:
    """Symmetric unit-diagonal matrix of exact algebraic numbers."""

    __slots__ = (
        "n",
        "tower",
        "rows",
        "_signature",
        "_ground_field",
        "_entry_field",
        "_key",
        "_labels",
    )

    def __init__(self, entries, acute=False):
        n = len(entries)
        flat = [_as_algnum(v) for row in entries for v in row]
        if any(len(row) != n for row in entries):
            raise ValueError("matrix must be square")
        if n == 0:
            self.tower = QQ
            self.n = 0
            self.rows = ()
            self._signature = (0, 0, 0)
            self._ground_field = None
            self._entry_field = None
            self._key = "0|"
            self._labels = []
            return
        try:
            tower = flat[0].tower
            for e in flat:
                if e.tower is not tower and not (
                    e.tower.is_prefix_of(tower) or tower.is_prefix_of(e.tower)
                ):
                    raise TowerMismatch
                if e.tower.levels > tower.levels:
                    tower = e.tower
            flat = [tower.lift(e) for e in flat]
        except TowerMismatch:
            flat = _unify(flat)
            tower = flat[0].tower
        order = _canonical_level_order(flat, tower)
        sub, remap = tower.subtower(tuple(order))
        flat = [AlgNum(sub, {remap(m): c for m, c in e.coeffs.items()}) for e in flat]
        self.tower = sub
        self.n = n
        self.rows = tuple(tuple(flat[i * n + j] for j in range(n)) for i in range(n))
        for i in range(n):
            if self.rows[i][i] != 1:
                raise ValueError("diagonal entries must be exactly 1")
            for j in range(i + 1, n):
                if self.rows[i][j] != self.rows[j][i]:
                    raise ValueError("matrix must be symmetric")
                if acute and sign(self.rows[i][j]) > 0:
                    raise ValueError(
                        f"positive off-diagonal entry at ({i},{j}): not acute-angled"
                    )
        self._signature = None
        self._ground_field = None
        self._entry_field = None
        self._key = None
        self._labels = None

    # -- basics ---------------------------------------------------------------

    def entry(self, i, j):
        return self.rows[i][j]

    def raw(self):
        return [list(r) for r in self.rows]

    def submatrix(self, idx):
        return GramMatrix([[self.rows[i][j] for j in idx] for i in idx])

    def permuted(self, perm):
        return GramMatrix(
            [[self.rows[perm[i]][perm[j]] for j in range(self.n)] for i in range(self.n)]
        )

    def __eq__(self, other):
        if not isinstance(other, GramMatrix):
            return NotImplemented
        if self.n != other.n:
            return False
        return all(
            alg_equal(self.rows[i][j], other.rows[i][j])
            for i in range(self.n)
            for j in range(self.n)
        )

    def __hash__(self):
        return hash((self.n, self.tower.key))

    def __repr__(self):
        return f"GramMatrix(n={self.n}, tower_degree={self.tower.degree})"

    def nonzero_pairs(self):
        return [
            (i, j)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.rows[i][j]
        ]

    # -- exact predicates -------------------------------------------------------

    def signature(self):
        if self._signature is None:
            self._signature = linalg.signature(self.raw())
        return self._signature

    def polytope_dim(self):
        pos, neg, _zero = self.signature()
        if neg != 1:
            raise ValueError(f"signature {self.signature()} is not Lorentzian")
        return pos

    def is_positive_definite(self):
        return linalg.is_positive_definite(self.raw())

    def is_positive_semidefinite(self):
        return linalg.is_positive_semidefinite(self.raw())

    def is_parabolic(self):
        return linalg.is_parabolic_matrix(self.raw())

    # -- fields -------------------------------------------------------------------

    def cyclic_generators(self):
        """Generators of the field of cyclic products: squares of the entries
        on every edge plus one product per fundamental cycle."""
        gens = []
        for i, j in self.nonzero_pairs():
            g = self.rows[i][j]
            gens.append(g * g)
        forest_parent = self._spanning_forest()
        for i, j in self.nonzero_pairs():
            if forest_parent[j] == i or forest_parent[i] == j:
                continue
            path = self._tree_path(forest_parent, i, j)
            if path is None:
                continue
            prod = self.rows[j][i]
            for a, b in path:
                prod = prod * self.rows[a][b]
            gens.append(prod)
        # dedupe, keep deterministic order
        out = []
        seen = set()
        for g in gens:
            h = (g.tower.key, tuple(sorted(g.coeffs.items())))
            if h not in seen:
                seen.add(h)
                out.append(g)
        return out

    def _spanning_forest(self):
        parent = [-1] * self.n
        visited = [False] * self.n
        for root in range(self.n):
            if visited[root]:
                continue
            visited[root] = True
            stack = [root]
            while stack:
                v = stack.pop()
                for w in range(self.n):
                    if w != v and not visited[w] and self.rows[v][w]:
                        visited[w] = True
                        parent[w] = v
                        stack.append(w)
        return parent

    def _tree_path(self, parent, i, j):
        """Edges of the forest path i -> j, or None if disconnected."""

        def ancestors(v):
            chain = [v]
            while parent[v] != -1:
                v = parent[v]
                chain.append(v)
            return chain

        ai, aj = ancestors(i), ancestors(j)
        if ai[-1] != aj[-1]:
            return None
        set_ai = {v: k for k, v in enumerate(ai)}
        meet = next(v for v in aj if v in set_ai)
        edges = []
        v = i
        while v != meet:
            edges.append((v, parent[v]))
            v = parent[v]
        v = j
        while v != meet:
            edges.append((v, parent[v]))
            v = parent[v]
        return edges

    def ground_field(self):
        if self._ground_field is None:
            self._ground_field = SubfieldDescriptor(self.tower, self.cyclic_generators())
        return self._ground_field

    def entry_field(self):
        """F~: the field generated by all entries."""
        if self._entry_field is None:
            gens = [self.rows[i][j] for i, j in self.nonzero_pairs()]
            self._entry_field = SubfieldDescriptor(self.tower, gens)
        return self._entry_field

    def cyclic_rescale(self):
        """Congruent matrix diag(e) G diag(e) whose entries generate the
        ground field: e_v multiplies the entries along a spanning-forest path.

        Definiteness of any embedding image agrees with the original.
        """
        parent = self._spanning_forest()
        e = [None] * self.n
        for root in range(self.n):
            if parent[root] == -1:
                e[root] = self.tower.one()
        # parents always appear before children along forest discovery order
        pending = [v for v in range(self.n) if e[v] is None]
        while pending:
            nxt = []
            for v in pending:
                if e[parent[v]] is not None:
                    e[v] = e[parent[v]] * self.rows[parent[v]][v]
                else:
                    nxt.append(v)
            pending = nxt
        return [[e[i] * e[j] * self.rows[i][j] for j in range(self.n)] for i in range(self.n)]

    # -- canonical form -------------------------------------------------------------

    def entry_labels(self):
        """Value-canonical string label per entry (minpoly + root index)."""
        if self._labels is None:
            cache = {}
            labels = []
            for i in range(self.n):
                row = []
                for j in range(self.n):
                    x = self.rows[i][j]
                    h = tuple(sorted(x.coeffs.items()))
                    lab = cache.get(h)
                    if lab is None:
                        lab = _label_str(x)
                        cache[h] = lab
                    row.append(lab)
                labels.append(row)
            self._labels = labels
        return self._labels

    def canonical_key(self, size_limit=16):
        """String equal for two matrices iff they agree up to a simultaneous
        row/column permutation."""
        if self._key is not None:
            return self._key
        if self.n > size_limit:
            raise SizeLimit(f"canonical form search limited to n <= {size_limit}")
        labels = self.entry_labels()
        perm = _canonical_permutation(self.n, labels)
        mat = [[labels[perm[i]][perm[j]] for j in range(self.n)] for i in range(self.n)]
        self._key = f"{self.n}|" + ";".join(",".join(row) for row in mat)
        return self._key


def _label_str(x):
    lab = entry_label(x)
    if len(lab) == 1:
        return f"q{lab[0]}"
    poly, idx = lab
    return "p" + ":".join(str(c) for c in poly) + f"#r{idx}"


def _canonical_permutation(n, labels):
    """Order-minimising permutation via refined colors plus backtracking.

    The encoding compared is the sequence (color, edge labels to earlier
    vertices); choosing the minimum at each step with backtracking over ties
    yields the global lexicographic minimum.
    """
    if n <= 1:
        return list(range(n))
    off = {labels[i][j] for i in range(n) for j in range(n) if i != j}
    if len(off) <= 1:
        return list(range(n))
    # Weisfeiler-Lehman style refinement with exact labels
    colors = [tuple(sorted(labels[i][j] for j in range(n) if j != i)) for i in range(n)]
    colors = _normalize_colors(colors)
    while True:
        new = [
            (colors[i], tuple(sorted((labels[i][j], colors[j]) for j in range(n) if j != i)))
            for i in range(n)
        ]
        new = _normalize_colors(new)
        if new == colors:
            break
        colors = new

    best = {"enc": None, "perm": None}

    def extend(placed, used, enc):
        if len(placed) == n:
            enc_t = tuple(enc)
            if best["enc"] is None or enc_t < best["enc"]:
                best["enc"] = enc_t
                best["perm"] = list(placed)
            return
        cands = []
        for u in range(n):
            if u in used:
                continue
            key = (colors[u], tuple(labels[u][v] for v in placed))
            cands.append((key, u))
        min_key = min(k for k, _ in cands)
        if best["enc"] is not None:
            probe = tuple(enc + [min_key])
            if probe > best["enc"][: len(probe)]:
                return
        for key, u in cands:
            if key == min_key:
                placed.append(u)
                used.add(u)
                enc.append(key)
                extend(placed, used, enc)
                enc.pop()
                used.remove(u)
                placed.pop()

    extend([], set(), [])
    return best["perm"]


def _normalize_colors(colors):
    table = {c: k for k, c in enumerate(sorted(set(colors)))}
    return [table[c] for c in colors]


# ---------------------------------------------------------------------------
# subfields
# ---------------------------------------------------------------------------


class SubfieldDescriptor:
    """A subfield of a tower given by generators, with exact membership."""

    __slots__ = ("tower", "generators", "_basis")

    def __init__(self, tower, generators):
        lifted = _unify([tower.one()] + [_as_algnum(g) for g in generators])
        self.tower = lifted[0].tower
        self.generators = lifted[1:]
        self._basis = None

    def _closure(self):
        if self._basis is not None:
            return self._basis
        rows = {}  # pivot mask -> coeff dict (pivot coefficient 1)

        def reduce(coeffs):
            v = dict(coeffs)
            while v:
                pivot = min(v)
                row = rows.get(pivot)
                if row is None:
                    return v, pivot
                f = v[pivot]
                for m, c in row.items():
                    cur = v.get(m, mpq(0)) - f * c
                    if cur:
                        v[m] = cur
                    elif m in v:
                        del v[m]
            return v, None

        frontier = [self.tower.one()]
        v, p = reduce(frontier[0].coeffs)
        rows[p] = {m: c / v[p] for m, c in v.items()}
        while frontier:
            new_frontier = []
            for b in frontier:
                for g in self.generators:
                    prod = b * g
                    v, p = reduce(prod.coeffs)
                    if p is not None:
                        rows[p] = {m: c / v[p] for m, c in v.items()}
                        new_frontier.append(prod)
            frontier = new_frontier
        self._basis = rows
        return rows

    def degree(self):
        return len(self._closure())

    def contains(self, x):
        """Exact membership for an element of the same (or prefix) tower."""
        x = self.tower.lift(x)
        rows = self._closure()
        v = dict(x.coeffs)
        while v:
            pivot = min(v)
            row = rows.get(pivot)
            if row is None:
                return False
            f = v[pivot]
            for m, c in row.items():
                cur = v.get(m, mpq(0)) - f * c
                if cur:
                    v[m] = cur
                elif m in v:
                    del v[m]
        return True

    def moved_by(self, emb):
        """True iff the embedding moves some generator (sigma|_F != Id)."""
        return any(not alg_equal(emb(g), g) for g in self.generators)

    def to_json(self):
        return {"generators": [serialize_algnum(g) for g in self.generators]}

    def __repr__(self):
        return f"SubfieldDescriptor(degree={self.degree()})"


def subfield_leq(a, b):
    """Is the field of a contained in the field of b?  Cross-tower safe."""
    if a.tower == b.tower or a.tower.is_prefix_of(b.tower):
        big = SubfieldDescriptor(b.tower, b.generators)
        return all(big.contains(b.tower.lift(g)) for g in a.generators)
    if b.tower.is_prefix_of(a.tower):
        big = SubfieldDescriptor(a.tower, [a.tower.lift(g) for g in b.generators])
        return all(big.contains(g) for g in a.generators)
    comp, lift_b = compose_towers(a.tower, b.tower)
    big = SubfieldDescriptor(comp, [lift_b(g) for g in b.generators])
    return all(big.contains(comp.lift(g)) for g in a.generators)


def subfield_equal(a, b):
    return a.degree() == b.degree() and subfield_leq(a, b)


# ---------------------------------------------------------------------------
# Coxeter diagrams
# ---------------------------------------------------------------------------


class CoxeterDiagram:
    """Labeled-graph view of a Gram matrix.

    Edge labels: Angle(m >= 3), Parallel, Divergent(weight); absence of an
    edge means a right angle.  Divergent weight None acts as a wildcard in
    isomorphism tests (weights produced by computation, not asserted).
    """

    def __init__(self, vertices, edges):
        self.vertices = list(vertices)
        index = {v: i for i, v in enumerate(self.vertices)}
        self.edges = []
        seen = set()
        for u, v, label in edges:
            iu = index[u] if u in index else u
            iv = index[v] if v in index else v
            if iu == iv:
                raise ValueError("self-loops are not allowed")
            k = (min(iu, iv), max(iu, iv))
            if k in seen:
                raise ValueError(f"duplicate edge {k}")
            seen.add(k)
            self.edges.append((k[0], k[1], label))

    @property
    def n(self):
        return len(self.vertices)

    def label_matrix(self, with_weights=False):
        """Discrete token matrix for isomorphism tests; '.' on the diagonal."""
        tok = [["2"] * self.n for _ in range(self.n)]
        for i in range(self.n):
            tok[i][i] = "."
        for u, v, label in self.edges:
            if isinstance(label, Angle):
                t = str(label.m)
            elif isinstance(label, Parallel):
                t = "inf"
            elif isinstance(label, Divergent):
                if with_weights and label.weight is not None:
                    t = "d=" + _label_str(label.weight)
                else:
                    t = "d"
            else:
                raise ValueError(f"unsupported edge label {label!r}")
            tok[u][v] = tok[v][u] = t
        return tok


def diagram_to_gram(diagram):
    """Gram matrix of a diagram; Angle(m) needs constructible cos(pi/m)."""
    n = diagram.n
    entries = [[QQ.rational(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for u, v, label in diagram.edges:
        if isinstance(label, Angle):
            if label.m < 3:
                raise ValueError("angle labels start at m = 3; use no edge for pi/2")
            val = -cos_pi_over(label.m)
        elif isinstance(label, Parallel):
            val = QQ.rational(-1)
        elif isinstance(label, Divergent):
            if label.weight is None:
                raise ValueError("divergent edge needs an explicit weight")
            if sign(label.weight - 1) <= 0:
                raise ValueError("divergent weight must exceed 1")
            val = -label.weight
        else:
            raise ValueError(f"unsupported edge label {label!r}")
        entries[u][v] = val
        entries[v][u] = val
    return GramMatrix(entries, acute=True)


def gram_to_diagram(g, max_m=60, names=None):
    """Entrywise recognition; raises ValueError on a non-Coxeter entry."""
    vertices = names if names is not None else [str(i + 1) for i in range(g.n)]
    edges = []
    for i, j in g.nonzero_pairs():
        label = recognize_angle(g.rows[i][j], max_m)
        if isinstance(label, RightAngle):
            continue
        if isinstance(label, NonCoxeter):
            raise ValueError(f"entry ({i},{j}) is not a Coxeter label up to m={max_m}")
        edges.append((i, j, label))
    return CoxeterDiagram(vertices, edges)


def diagrams_isomorphic(d1, d2, match_divergent_weights=False):
    """Label-respecting graph isomorphism via canonical token matrices."""
    if d1.n != d2.n:
        return False
    keys = []
    for d in (d1, d2):
        tok = d.label_matrix(with_weights=match_divergent_weights)
        perm = _canonical_permutation(d.n, tok)
        mat = [[tok[perm[i]][perm[j]] for j in range(d.n)] for i in range(d.n)]
        keys.append(";".join(",".join(r) for r in mat))
    return keys[0] == keys[1]
