"""Vinberg's (quasi-)arithmeticity criterion and related tests.

A cofinite hyperbolic reflection group with fundamental polytope P is
arithmetic iff

  (V1) the field generated by all Gram entries is totally real,
  (V2) G^sigma(P) is positive semidefinite for every real embedding sigma
       with sigma not the identity on the ground field F(P), and
  (V3) all cyclic products of 2*G(P) are algebraic integers;

(V1)+(V2) alone characterise quasi-arithmeticity.

(V2) is evaluated on a congruent rescaling of G whose entries already lie in
the ground field, so only embeddings of a small pruned tower are enumerated;
semidefiniteness is invariant under the rescaling embedding by embedding.
(V3) is checked on edge squares plus simple cycles; ring closure extends the
verdict to every closed walk.
"""

from dataclasses import dataclass
from enum import Enum

import networkx as nx

from . import linalg
from .angles import Angle, cos_pi_over, recognize_angle
from .errors import CycleExplosion
from .expressions import serialize_algnum
from .gram import GramMatrix, SubfieldDescriptor, subfield_leq
from .tower import (
    AlgNum,
    alg_equal,
    apply_embedding,
    is_algebraic_integer,
    real_embeddings,
    sign,
    totally_real_witness,
)

__all__ = [
    "Verdict",
    "ClassificationReport",
    "check_v1",
    "check_v2",
    "check_v3",
    "classify",
    "ground_field_obstruction",
    "EvenAngleResult",
    "even_angle_facet_test",
    "rho_even_check",
]

DEFAULT_CYCLE_CAP = 10**6


class Verdict(str, Enum):
    ARITHMETIC = "arithmetic"
    PROPERLY_QUASI_ARITHMETIC = "properly_quasi_arithmetic"
    NOT_QUASI_ARITHMETIC = "not_quasi_arithmetic"


@dataclass
class ClassificationReport:
    verdict: Verdict
    ground_field: SubfieldDescriptor
    adjacent_field: SubfieldDescriptor
    witness: dict | None

    def to_json(self):
        return {
            "verdict": self.verdict.value,
            "ground_field": self.ground_field.to_json(),
            "adjacent_field": self.adjacent_field.to_json(),
            "witness": self.witness,
        }


def check_v1(g):
    """(V1): the tower containing all entries is totally real.

    Returns (ok, witness); the witness names the first radicand that fails to
    stay positive under some partial embedding.
    """
    w = totally_real_witness(g.tower)
    if w is None:
        return True, None
    level, signs = w
    return False, {
        "condition": "V1",
        "radicand": serialize_algnum(g.tower.chain[level + 1].radicand),
        "partial_embedding_signs": list(signs),
    }


def check_v2(g):
    """(V2): G^sigma positive semidefinite for every real embedding moving F.

    Works on the cyclic rescaling of G (entries in the ground field), which is
    congruent to G under every embedding, so the verdicts coincide.
    """
    h = g.cyclic_rescale()
    gens = g.cyclic_generators()
    flat = [x for row in h for x in row] + gens
    tower = g.tower
    used = set()
    for x in flat:
        for m in x.coeffs:
            mm = m
            while mm:
                low = mm & -mm
                mm ^= low
                used.add(low.bit_length() - 1)
    closure = set(used)
    for lvl in used:
        closure |= tower.level_deps(lvl)
    sub, remap = tower.subtower(tuple(sorted(closure)))
    small = [AlgNum(sub, {remap(m): c for m, c in x.coeffs.items()}) for x in flat]
    n = g.n
    h_small = [small[i * n : (i + 1) * n] for i in range(n)]
    gens_small = small[n * n :]
    for emb in real_embeddings(sub):
        if all(alg_equal(apply_embedding(x, emb), x) for x in gens_small):
            continue  # sigma restricts to the identity on F
        conj = [[apply_embedding(x, emb) for x in row] for row in h_small]
        if not linalg.is_positive_semidefinite(conj):
            return False, {
                "condition": "V2",
                "embedding_signs": list(emb.signs),
                "tower_radicands": [
                    serialize_algnum(sub.chain[i + 1].radicand) for i in range(sub.levels)
                ],
            }
    return True, None


def check_v3(g, cycle_cap=DEFAULT_CYCLE_CAP):
    """(V3): Cyc(2G) consists of algebraic integers.

    Tests (2 g_ij)^2 on every edge and 2^k times the product over every simple
    cycle of length k; the ring generated by these contains every closed-walk
    product.  Raises CycleExplosion past the cap instead of guessing.
    """
    pairs = g.nonzero_pairs()
    for i, j in pairs:
        val = 2 * g.rows[i][j]
        val = val * val
        if not is_algebraic_integer(val):
            return False, {
                "condition": "V3",
                "cycle": [i, j, i],
                "value": serialize_algnum(val),
            }
    graph = nx.Graph(pairs)
    count = 0
    for cycle in nx.simple_cycles(graph):
        count += 1
        if count > cycle_cap:
            raise CycleExplosion(
                f"more than {cycle_cap} simple cycles; verdict inconclusive"
            )
        prod = g.tower.one()
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            prod = prod * (2 * g.rows[a][b])
        if not is_algebraic_integer(prod):
            return False, {
                "condition": "V3",
                "cycle": list(cycle) + [cycle[0]],
                "value": serialize_algnum(prod),
            }
    return True, None


def classify(g, cycle_cap=DEFAULT_CYCLE_CAP):
    """Full verdict cascade with witnesses."""
    ground = g.ground_field()
    adjacent = g.entry_field()
    ok, witness = check_v1(g)
    if not ok:
        return ClassificationReport(Verdict.NOT_QUASI_ARITHMETIC, ground, adjacent, witness)
    ok, witness = check_v2(g)
    if not ok:
        return ClassificationReport(Verdict.NOT_QUASI_ARITHMETIC, ground, adjacent, witness)
    ok, witness = check_v3(g, cycle_cap)
    if not ok:
        return ClassificationReport(
            Verdict.PROPERLY_QUASI_ARITHMETIC, ground, adjacent, witness
        )
    return ClassificationReport(Verdict.ARITHMETIC, ground, adjacent, None)


def ground_field_obstruction(parent, face):
    """True iff the face's ground field is a proper subfield of the parent's.

    A strict inclusion rules out quasi-arithmeticity of the parent without
    any embedding computation.
    """
    fp = parent.ground_field()
    ff = face.ground_field()
    return subfield_leq(ff, fp) and ff.degree() < fp.degree()


@dataclass(frozen=True)
class EvenAngleResult:
    applicable: bool
    witness_m: int | None = None
    witness_entry: str | None = None


def even_angle_facet_test(g, facet_index, max_m=60):
    """Does the facet meet all adjacent facets at angles pi/(2m)?

    Applicable plus an arithmetic parent implies the facet is arithmetic; the
    caller records that implication.  Non-intersecting neighbours (parallel or
    divergent) are not adjacent and put no constraint.
    """
    i = facet_index
    for j in range(g.n):
        if j == i or not g.rows[i][j]:
            continue
        if sign(g.rows[i][j] + 1) <= 0:
            continue  # parallel or divergent: not an angle
        label = recognize_angle(g.rows[i][j], max_m)
        if not isinstance(label, Angle) or label.m % 2 != 0:
            m = label.m if isinstance(label, Angle) else None
            return EvenAngleResult(False, m, serialize_algnum(g.rows[i][j]))
    return EvenAngleResult(True)


def rho_even_check(m):
    """rho_m = 1/sin^2(pi/(2m)): build it exactly and test that rho_m/2 is an
    algebraic integer.  Returns (rho_m, verdict)."""
    if m < 2:
        raise ValueError("m must be at least 2")
    c = cos_pi_over(m)
    sin_sq_half = (1 - c) / 2
    rho = 2 / (1 - c)
    return rho, is_algebraic_integer(rho / 2)
