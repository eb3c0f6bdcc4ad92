"""Vinberg's algorithm for diagonal Lorentzian lattices.

Scope: forms diag(-d0, d1, ..., dn) with an orthogonal basis over Q or a real
quadratic field, d0 totally positive and d1..dn totally positive (so the form
is admissible: Lorentzian at the identity embedding, definite elsewhere).

The controlling vector v0 defaults to the first basis vector.  Roots come out
in increasing (e, v0)^2/(e, e) order with a documented lexicographic
tie-break, so runs are reproducible; the iteration stops as soon as the
accepted mirrors cut a finite-volume chamber.
"""

from dataclasses import dataclass

from gmpy2 import gcd as _zgcd, isqrt, mpq, mpz

from . import linalg
from .errors import IterationLimit, SearchExhausted
from .faces import _fv_on_raw
from .gram import GramMatrix
from .intervals import sqrt_upper
from .tower import QQ, sign as alg_sign, sqrt_extend

__all__ = [
    "RationalIntegers",
    "QuadraticIntegers",
    "Root",
    "DiagonalLattice",
    "fundamental_cone",
    "next_root",
    "vinberg_run",
]


def _floor_q(q):
    return q.numerator // q.denominator


def _ceil_q(q):
    return -((-q).numerator // q.denominator)


def _sign_quad(a, b, d):
    """Exact sign of A + B*sqrt(d) for rational A, B and nonsquare d > 0."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    t = a * a - b * b * d
    s = 1 if t > 0 else -1
    return s if a > 0 else -s


class RationalIntegers:
    """Z, with the trivial embedding pair."""

    is_quadratic = False

    def from_int(self, v):
        return mpz(v)

    def zero(self):
        return mpz(0)

    def one(self):
        return mpz(1)

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def is_zero(self, x):
        return x == 0

    def sign_pair(self, x):
        s = (x > 0) - (x < 0)
        return (s, s)

    def value_intervals(self, x):
        q = mpq(x)
        return ((q, q), (q, q))

    def divides(self, d, x):
        if d == 0:
            return x == 0
        return x % d == 0

    def exact_div(self, x, d):
        return x // d

    def content(self, xs):
        g = mpz(0)
        for x in xs:
            g = _zgcd(g, x)
        return g

    def lex_key(self, x):
        return (int(x),)

    def to_algnum(self, x, tower):
        return tower.rational(x)

    def box(self, b1, b2):
        """All x with |x| <= b1 and |x| <= b2 (rational bounds), ascending."""
        cap = _floor_q(min(b1, b2))
        return [mpz(v) for v in range(-int(cap), int(cap) + 1)]

    def base_tower(self):
        return QQ

    def admissible_norm_candidates(self, two_lcm):
        n = int(abs(two_lcm))
        return [mpz(k) for k in range(1, n + 1) if n % k == 0]

    def norm_reduce(self, k):
        return abs(k)


class QuadraticIntegers:
    """Ring of integers of Q(sqrt(d)), elements (a, b) = a + b*omega."""

    is_quadratic = True

    def __init__(self, d):
        d = int(d)
        if d <= 1:
            raise ValueError("d must be a squarefree integer > 1")
        for p in range(2, 1000):
            if d % (p * p) == 0:
                raise ValueError("d must be squarefree")
            if p * p > d:
                break
        self.d = d
        self.half = d % 4 == 1
        # omega = (1+sqrt d)/2 if half else sqrt d; A,B with x = (A + B sqrt d)/den
        self.den = 2 if self.half else 1
        from .intervals import sqrt_lower

        self._sqrt_lo = sqrt_lower(mpq(d), 64)
        self._sqrt_hi = sqrt_upper(mpq(d), 64)
        self._tower = None
        self._unit = None

    def from_int(self, v):
        return (mpz(v), mpz(0))

    def element(self, a, b):
        return (mpz(a), mpz(b))

    def zero(self):
        return (mpz(0), mpz(0))

    def one(self):
        return (mpz(1), mpz(0))

    def add(self, x, y):
        return (x[0] + y[0], x[1] + y[1])

    def sub(self, x, y):
        return (x[0] - y[0], x[1] - y[1])

    def neg(self, x):
        return (-x[0], -x[1])

    def mul(self, x, y):
        a, b = x
        c, e = y
        if self.half:
            # omega^2 = omega + (d-1)/4
            be = b * e
            return (a * c + be * ((self.d - 1) // 4), a * e + b * c + be)
        return (a * c + b * e * self.d, a * e + b * c)

    def conj(self, x):
        a, b = x
        if self.half:
            return (a + b, -b)
        return (a, -b)

    def norm(self, x):
        n = self.mul(x, self.conj(x))
        assert n[1] == 0
        return n[0]

    def is_zero(self, x):
        return x[0] == 0 and x[1] == 0

    def _ab_form(self, x):
        """x = (A + B*sqrt(d))/den with A, B integers."""
        a, b = x
        if self.half:
            return (2 * a + b, b)
        return (a, b)

    def sign_pair(self, x):
        a, b = self._ab_form(x)
        return (
            _sign_quad(mpq(a), mpq(b), self.d),
            _sign_quad(mpq(a), mpq(-b), self.d),
        )

    def value_intervals(self, x):
        a, b = self._ab_form(x)
        lo, hi = self._sqrt_lo, self._sqrt_hi
        den = self.den
        v1 = (b * lo, b * hi) if b >= 0 else (b * hi, b * lo)
        v2 = (-b * hi, -b * lo) if b >= 0 else (-b * lo, -b * hi)
        return (
            ((a + v1[0]) / den, (a + v1[1]) / den),
            ((a + v2[0]) / den, (a + v2[1]) / den),
        )

    def divides(self, k, x):
        if self.is_zero(k):
            return self.is_zero(x)
        y = self.mul(x, self.conj(k))
        n = self.norm(k)
        return y[0] % n == 0 and y[1] % n == 0

    def exact_div(self, x, k):
        y = self.mul(x, self.conj(k))
        n = self.norm(k)
        return (y[0] // n, y[1] // n)

    def content(self, xs):
        g = mpz(0)
        for a, b in xs:
            g = _zgcd(_zgcd(g, a), b)
        return g

    def lex_key(self, x):
        return (int(x[0]), int(x[1]))

    def to_algnum(self, x, tower):
        a, b = self._ab_form(x)
        root = tower.radical(0)
        return (tower.rational(a) + tower.rational(b) * root) / self.den

    def base_tower(self):
        if self._tower is None:
            self._tower = sqrt_extend(QQ.rational(self.d)).tower
        return self._tower

    def box(self, b1, b2):
        """Elements x with |sigma1(x)| <= b1, |sigma2(x)| <= b2, sorted by
        coordinates; bounds are rational and treated conservatively."""
        den = self.den
        lo, hi = self._sqrt_lo, self._sqrt_hi
        out = []
        bmax = _floor_q((b1 + b2) * den / (2 * lo))
        for b in range(-int(bmax), int(bmax) + 1):
            bq = mpz(b)
            sd = (bq * lo, bq * hi) if b >= 0 else (bq * hi, bq * lo)
            # A + B sqrt(d) in [-b1*den, b1*den]; A - B sqrt(d) in [-b2*den, b2*den]
            a_lo1 = -b1 * den - sd[1]
            a_hi1 = b1 * den - sd[0]
            a_lo2 = -b2 * den + sd[0]
            a_hi2 = b2 * den + sd[1]
            a_lo = _ceil_q(max(a_lo1, a_lo2))
            a_hi = _floor_q(min(a_hi1, a_hi2))
            for aa in range(int(a_lo), int(a_hi) + 1):
                if self.half:
                    if (aa - b) % 2:
                        continue
                    out.append((mpz((aa - b) // 2), mpz(b)))
                else:
                    out.append((mpz(aa), mpz(b)))
        out.sort(key=self.lex_key)
        return out

    # -- units and divisors ---------------------------------------------------

    def fundamental_unit(self):
        """Smallest unit > 1, by scanning Pell-type equations."""
        if self._unit is not None:
            return self._unit
        d = self.d
        y = 1
        while y < 10**6:
            if self.half:
                for target in (-4, 4):
                    x2 = d * y * y + target
                    if x2 > 0:
                        x = isqrt(x2)
                        if x * x == x2 and (x - y) % 2 == 0:
                            self._unit = ((x - y) // 2, mpz(y))
                            return self._unit
            else:
                for target in (-1, 1):
                    x2 = d * y * y + target
                    if x2 > 0:
                        x = isqrt(x2)
                        if x * x == x2:
                            self._unit = (mpz(x), mpz(y))
                            return self._unit
            y += 1
        raise SearchExhausted("fundamental unit not found")

    def norm_reduce(self, k):
        """Canonical representative of k modulo squares of units, totally
        positive, with sigma1/sigma2 in [1, eps^4)."""
        s1, s2 = self.sign_pair(k)
        if s1 < 0 and s2 < 0:
            k = self.neg(k)
        eps = self.fundamental_unit()
        eps2 = self.mul(eps, eps)
        eps2_inv = self.conj(eps2) if self.norm(eps2) == 1 else None
        if eps2_inv is None:
            raise AssertionError("eps^2 must have norm 1")

        def ratio_state(x):
            # sign of sigma1(x) - sigma2(x): positive when sigma1 > sigma2
            a, b = self._ab_form(x)
            return _sign_quad(mpq(0), mpq(2 * b), self.d)

        while ratio_state(k) < 0:
            k = self.mul(k, eps2)
        # now sigma1 >= sigma2; shrink while still true after dividing
        while True:
            cand = self.mul(k, eps2_inv)
            if ratio_state(cand) >= 0:
                k = cand
            else:
                return k

    def admissible_norm_candidates(self, two_lcm):
        """Totally positive divisors of two_lcm, one per unit-square class."""
        n_bound = abs(self.norm(two_lcm))
        eps = self.fundamental_unit()
        e1, _ = self.value_intervals(self.mul(eps, eps))
        bound = sqrt_upper(mpq(n_bound), 32) * e1[1] + 1
        seen = set()
        out = []
        for cand in self.box(bound, bound):
            if self.is_zero(cand):
                continue
            s1, s2 = self.sign_pair(cand)
            if s1 <= 0 or s2 <= 0:
                continue
            if n_bound % self.norm(cand) != 0:
                continue
            if not self.divides(cand, two_lcm):
                continue
            red = self.norm_reduce(cand)
            if red not in seen:
                seen.add(red)
                out.append(red)
        out.sort(key=lambda k: (int(abs(self.norm(k))), self.lex_key(k)))
        return out


@dataclass(frozen=True)
class Root:
    """A crystallographic lattice vector: 2(e, x) in (e,e)*O for all x."""

    coords: tuple
    norm: object


class DiagonalLattice:
    """diag(d0, d1, ..., dn) with d0 totally negative, d1..dn totally positive."""

    def __init__(self, ring, diag):
        self.ring = ring
        self.diag = tuple(diag)
        self.rank = len(self.diag)
        self.dim = self.rank - 1  # hyperbolic dimension
        # admissibility: Lorentzian at the identity, definite at conjugates
        s = ring.sign_pair(self.diag[0])
        if s[0] >= 0:
            raise ValueError("diag[0] must be negative at the identity embedding")
        if ring.is_quadratic and s[1] <= 0:
            raise ValueError(
                "diag[0] must be positive under the non-identity embedding "
                "(otherwise the form is not admissible)"
            )
        for dj in self.diag[1:]:
            s = ring.sign_pair(dj)
            if not (s[0] > 0 and s[1] > 0):
                raise ValueError("diag[1:] must be totally positive")
        self.tower = ring.base_tower()

    @classmethod
    def from_json(cls, data):
        from .expressions import parse_algebraic

        field = data["field"]
        if field == "Q":
            ring = RationalIntegers()

            def conv(s):
                v = parse_algebraic(s)
                q = v.as_rational()
                if q.denominator != 1:
                    raise ValueError(f"diagonal entry {s} is not a ring integer")
                return mpz(q.numerator)

        else:
            ring = QuadraticIntegers(field["quadratic"])

            def conv(s):
                v = parse_algebraic(s)
                a = v.coeffs.get(0, mpq(0))
                b = v.coeffs.get(1, mpq(0))
                if any(m not in (0, 1) for m in v.coeffs):
                    raise ValueError(f"{s} is not in the quadratic field")
                # x = a + b sqrt(d) = (a - b') + 2b*omega when half
                if ring.half:
                    aa, bb = a - b, 2 * b
                else:
                    aa, bb = a, b
                if aa.denominator != 1 or bb.denominator != 1:
                    raise ValueError(f"diagonal entry {s} is not a ring integer")
                return (mpz(aa.numerator), mpz(bb.numerator))

        diag = [conv(s) for s in data["diag"]]
        return cls(ring, diag)

    def inner(self, x, y):
        r = self.ring
        acc = r.zero()
        for dj, xj, yj in zip(self.diag, x, y):
            acc = r.add(acc, r.mul(dj, r.mul(xj, yj)))
        return acc

    def to_algnum(self, x):
        return self.ring.to_algnum(x, self.tower)

    def admissible_norms(self):
        """Candidate root norms: totally positive divisors of 2*lcm(diag),
        modulo squares of units; the crystallographic condition is checked
        per root."""
        r = self.ring
        if not r.is_quadratic:
            l = mpz(1)
            for dj in self.diag:
                l = l * dj // _zgcd(l, dj)
            return r.admissible_norm_candidates(2 * abs(l))
        l = r.one()
        for dj in self.diag:
            g = _ring_gcd(r, l, dj)
            l = r.exact_div(r.mul(l, dj), g)
        return r.admissible_norm_candidates(r.mul(r.from_int(2), l))

    def crystallographic(self, coords, k):
        r = self.ring
        return all(
            r.divides(k, r.mul(r.from_int(2), r.mul(dj, ej)))
            for dj, ej in zip(self.diag, coords)
        )

    def representations(self, c, k):
        """Solutions of sum_{j>=1} d_j e_j^2 = c with k | 2 d_j e_j, sorted."""
        r = self.ring
        out = []
        n = self.rank - 1

        def nonneg(x):
            s = r.sign_pair(x)
            return s[0] >= 0 and s[1] >= 0

        def rec(j, remaining, prefix):
            if j == n:
                if r.is_zero(remaining):
                    out.append(tuple(prefix))
                return
            dj = self.diag[j + 1]
            iv1, iv2 = r.value_intervals(remaining)
            d1, d2 = r.value_intervals(dj)
            b1 = sqrt_upper(max(iv1[1], mpq(0)) / d1[0], 32)
            b2 = sqrt_upper(max(iv2[1], mpq(0)) / d2[0], 32)
            for ej in r.box(b1, b2):
                if not r.divides(k, r.mul(r.from_int(2), r.mul(dj, ej))):
                    continue
                rem = r.sub(remaining, r.mul(dj, r.mul(ej, ej)))
                if not nonneg(rem):
                    continue
                rec(j + 1, rem, prefix + [ej])

        rec(0, c, [])
        return out


def _ring_gcd(ring, x, y, max_steps=64):
    """Euclidean gcd with norm rounding; falls back to 1 (product lcm) if the
    ring resists, which only enlarges the candidate norm set."""
    if ring.is_zero(x):
        return y
    if ring.is_zero(y):
        return x
    a, b = x, y
    for _ in range(max_steps):
        if ring.is_zero(b):
            return a
        # q = round(a * conj(b) / N(b)) componentwise
        t = ring.mul(a, ring.conj(b))
        n = ring.norm(b)
        q = (_round_div(t[0], n), _round_div(t[1], n))
        a, b = b, ring.sub(a, ring.mul(b, q))
    return ring.one()


def _round_div(a, n):
    q, rem = divmod(a, n)
    if 2 * rem >= abs(n):
        q += 1
    return mpz(q)


def _validate_v0(lat, v0):
    if v0 is None:
        v0 = tuple(
            lat.ring.one() if j == 0 else lat.ring.zero() for j in range(lat.rank)
        )
    else:
        v0 = tuple(v0)
        if any(not lat.ring.is_zero(c) for c in v0[1:]):
            raise ValueError(
                "only controlling vectors along the negative basis slot are supported"
            )
    s = lat.ring.sign_pair(lat.inner(v0, v0))
    if s[0] >= 0:
        raise ValueError("v0 must have negative norm")
    return v0


def fundamental_cone(lat, v0=None):
    """Simple system for the stabiliser of v0: roots orthogonal to v0 cutting
    a fundamental chamber, pairwise non-obtuse."""
    r = lat.ring
    v0 = _validate_v0(lat, v0)
    roots = []
    for k in lat.admissible_norms():
        for rep in lat.representations(k, k):
            coords = (r.zero(),) + rep
            if all(r.is_zero(c) for c in coords):
                continue
            if abs(r.content(coords)) != 1:
                continue
            if not lat.crystallographic(coords, k):
                continue
            roots.append(Root(coords, k))
    # deterministic positive system via a generic rational functional
    max_abs = 1
    for root in roots:
        for c in root.coords:
            pair = c if isinstance(c, tuple) else (c, 0)
            max_abs = max(max_abs, abs(int(pair[0])), abs(int(pair[1])))
    base = 4 * max_abs + 3

    def h_sign(root):
        acc_a, acc_b = mpq(0), mpq(0)
        scale = mpq(1)
        for c in root.coords:
            pair = c if isinstance(c, tuple) else (c, mpz(0))
            acc_a += pair[0] * scale
            acc_b += pair[1] * scale
            scale /= base
        if not r.is_quadratic:
            return (acc_a > 0) - (acc_a < 0)
        if r.half:
            return _sign_quad(acc_a + acc_b / 2, acc_b / 2, r.d)
        return _sign_quad(acc_a, acc_b, r.d)

    positive = {}
    for root in roots:
        s = h_sign(root)
        assert s != 0
        if s > 0:
            positive[root.coords] = root
    simple = []
    coord_set = set(positive)
    for coords, root in positive.items():
        decomposable = False
        for other in coord_set:
            diff = tuple(r.sub(a, b) for a, b in zip(coords, other))
            if diff in coord_set and other != coords:
                decomposable = True
                break
        if not decomposable:
            simple.append(root)
    simple.sort(key=lambda rt: _tie_break(lat, rt))
    return simple


def _tie_break(lat, root):
    r = lat.ring
    return (
        int(abs(r.norm(root.norm))) if r.is_quadratic else int(abs(root.norm)),
        tuple(r.lex_key(c) for c in root.coords),
    )


class _CandidateStream:
    """Roots off v0's mirror in increasing (e, v0)^2 / (e, e) order."""

    MAX_EMPTY_BATCHES = 4096

    def __init__(self, lat, v0):
        self.lat = lat
        self.v0 = v0
        self.norms = lat.admissible_norms()
        # per-norm stream of e0 values with sigma1(e0) > 0, ascending
        self._streams = [
            {"k": k, "queue": [], "ceiling": mpq(1), "seen": set(), "dead": False}
            for k in self.norms
        ]

    def _sigma2_bound(self, k):
        """sigma2(k - d0 e0^2) >= 0 caps |sigma2(e0)| for quadratic rings,
        where sigma2(d0) > 0 by admissibility."""
        r = self.lat.ring
        if not r.is_quadratic:
            return None
        _iv1, k_iv2 = r.value_intervals(k)
        _div1, d0_iv2 = r.value_intervals(self.lat.diag[0])
        return sqrt_upper(k_iv2[1] / d0_iv2[0], 32)

    def _refill(self, stream):
        r = self.lat.ring
        hi = stream["ceiling"] * 2
        b2 = self._sigma2_bound(stream["k"])
        if b2 is None:
            b2 = hi
        found = []
        for e0 in r.box(hi, b2):
            key = e0 if not isinstance(e0, tuple) else tuple(map(int, e0))
            if key in stream["seen"]:
                continue
            if r.sign_pair(e0)[0] <= 0:
                continue
            stream["seen"].add(key)
            found.append(e0)
        if not r.is_quadratic and not found and stream["ceiling"] > b2:
            stream["dead"] = True

        def cmp(x, y):
            diff = r.sub(x, y)
            return r.sign_pair(diff)[0]

        import functools

        found.sort(key=functools.cmp_to_key(cmp))
        stream["queue"].extend(found)
        stream["ceiling"] = hi

    def _w_algnum(self, k, e0):
        lat = self.lat
        d0e0 = lat.ring.mul(lat.diag[0], e0)
        num = lat.to_algnum(lat.ring.mul(d0e0, d0e0))
        return num / lat.to_algnum(k)

    def next_batch(self):
        """Smallest-w batch: (w, k, e0, candidate roots sorted by tie-break)."""
        lat, r = self.lat, self.lat.ring
        for _ in range(self.MAX_EMPTY_BATCHES):
            best = None
            for stream in self._streams:
                tries = 0
                while not stream["queue"] and not stream["dead"] and tries < 48:
                    self._refill(stream)
                    tries += 1
                if not stream["queue"]:
                    continue
                e0 = stream["queue"][0]
                w = self._w_algnum(stream["k"], e0)
                if best is None or alg_sign(w - best[0]) < 0:
                    best = (w, stream, e0)
            if best is None:
                raise SearchExhausted("no candidate norms produce roots")
            w, stream, e0 = best
            stream["queue"].pop(0)
            k = stream["k"]
            # remaining positive-definite norm: k - d0 e0^2
            c = r.sub(k, r.mul(lat.diag[0], r.mul(e0, e0)))
            roots = []
            for rep in lat.representations(c, k):
                coords = (e0,) + rep
                if abs(r.content(coords)) != 1:
                    continue
                if not lat.crystallographic(coords, k):
                    continue
                roots.append(Root(coords, k))
            roots.sort(key=lambda rt: _tie_break(lat, rt))
            if roots:
                return w, k, e0, roots
        raise SearchExhausted(
            f"candidate stream produced no roots in {self.MAX_EMPTY_BATCHES} batches"
        )


def next_root(lat, accepted, v0=None):
    """The admissible root closest to v0 compatible with the accepted set."""
    v0 = _validate_v0(lat, v0)
    stream = _CandidateStream(lat, v0)
    r = lat.ring
    while True:
        _w, _k, _e0, roots = stream.next_batch()
        for root in roots:
            ok = True
            for a in accepted:
                s = r.sign_pair(lat.inner(root.coords, a.coords))
                if s[0] > 0:
                    ok = False
                    break
            if ok:
                return root


def _normalized_gram(lat, roots):
    tower = lat.tower
    n = len(roots)
    inner = [[lat.to_algnum(lat.inner(roots[i].coords, roots[j].coords)) for j in range(n)] for i in range(n)]
    sqrts = []
    for i in range(n):
        s = sqrt_extend(tower.lift(inner[i][i]))
        tower = s.tower if s.tower.levels > tower.levels else tower
        sqrts.append(s)
    sqrts = [tower.lift(s) for s in sqrts]
    entries = [
        [tower.lift(inner[i][j]) / (sqrts[i] * sqrts[j]) for j in range(n)]
        for i in range(n)
    ]
    return GramMatrix(entries, acute=True)


def vinberg_run(lat, max_roots=64, v0=None):
    """Iterate Vinberg's algorithm until the chamber has finite volume.

    Returns (gram, roots); raises IterationLimit with partial output when
    max_roots is hit first.
    """
    v0 = _validate_v0(lat, v0)
    r = lat.ring
    accepted = list(fundamental_cone(lat, v0))
    n_dim = lat.dim

    def fv_now():
        if len(accepted) < n_dim + 1:
            return False
        raw = [
            [lat.to_algnum(lat.inner(a.coords, b.coords)) for b in accepted]
            for a in accepted
        ]
        sig = linalg.signature(raw)
        if sig[0] != n_dim or sig[1] != 1:
            return False
        return _fv_on_raw(raw, len(accepted))

    if fv_now():
        return _normalized_gram(lat, accepted), accepted
    stream = _CandidateStream(lat, v0)
    while True:
        _w, _k, _e0, roots = stream.next_batch()
        for root in roots:
            ok = True
            for a in accepted:
                s = r.sign_pair(lat.inner(root.coords, a.coords))
                if s[0] > 0:
                    ok = False
                    break
            if not ok:
                continue
            accepted.append(root)
            if len(accepted) > max_roots:
                raise IterationLimit(
                    f"no finite-volume chamber within {max_roots} roots",
                    roots=accepted,
                    gram=None,
                )
            if fv_now():
                return _normalized_gram(lat, accepted), accepted
