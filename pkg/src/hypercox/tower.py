"""Exact real algebraic numbers in iterated square-root towers.

A :class:`TowerField` is Q(sqrt(d1), ..., sqrt(dt)) where each radicand d_i is
a positive non-square element of the tower truncated below it.  An
:class:`AlgNum` stores sparse rational coordinates over the multiplicative
basis {prod_{i in mask} sqrt(d_i)}: a dict mapping bit masks to ``mpq``.

Design notes:

* arithmetic is exact and closed; the zero test is structural (empty dict);
* sqrt_extend keeps towers minimal via is_square, so embedding counts mean
  what they should;
* sign determination refines dyadic interval enclosures, doubling precision
  per round (seed 64 bits); zero is never decided numerically;
* minimal polynomials come from the first linear dependence among powers,
  which makes them irreducible by construction.

Values are immutable after construction; interval caches are the only mutable
state and are recomputed harmlessly under races.
"""

from gmpy2 import gcd as _gcd, isqrt, lcm as _lcm, mpq, mpz

from .errors import (
    DivisionByZero,
    InvalidEmbedding,
    NegativeRadicand,
    NotTotallyRealTower,
    TowerMismatch,
)
from .intervals import (
    iv_add,
    iv_mul,
    iv_scale,
    iv_sign,
    iv_width,
    isolate_real_roots,
    refine_root,
    sqrt_interval,
)

__all__ = [
    "TowerField",
    "AlgNum",
    "Embedding",
    "QQ",
    "rational",
    "sqrt_extend",
    "is_square",
    "sign",
    "minimal_polynomial",
    "is_algebraic_integer",
    "real_embeddings",
    "totally_real_witness",
    "is_totally_real",
    "apply_embedding",
    "is_totally_positive",
    "alg_equal",
    "compose_towers",
    "entry_label",
]

_SEED_PREC = 64


def _acc(out, mask, c):
    v = out.get(mask)
    if v is None:
        if c:
            out[mask] = c
        return
    v = v + c
    if v:
        out[mask] = v
    else:
        del out[mask]


class TowerField:
    """Immutable tower of real quadratic extensions of Q."""

    __slots__ = (
        "prefix",
        "radicand",
        "levels",
        "chain",
        "_rad_dicts",
        "_key",
        "_rad_enc",
        "_mask_enc",
        "_embeddings",
        "_tr_witness",
        "_subtowers",
    )

    def __init__(self, prefix=None, radicand=None, _checked=False):
        if prefix is None:
            self.prefix = None
            self.radicand = None
            self.levels = 0
            self.chain = (self,)
            self._rad_dicts = ()
        else:
            if not _checked:
                if radicand.tower is not prefix:
                    radicand = prefix.lift(radicand)
                if sign(radicand) <= 0:
                    raise NegativeRadicand("tower radicand must be positive")
                if is_square(radicand) is not None:
                    raise ValueError("tower radicand must not be a square")
            self.prefix = prefix
            self.radicand = radicand
            self.levels = prefix.levels + 1
            self.chain = prefix.chain + (self,)
            self._rad_dicts = prefix._rad_dicts + (radicand.coeffs,)
        self._key = None
        self._rad_enc = {}
        self._mask_enc = {}
        self._embeddings = None
        self._tr_witness = -1
        self._subtowers = {}

    @property
    def degree(self):
        return 1 << self.levels

    @property
    def key(self):
        """Structural key: equal keys iff identical radicand chains."""
        if self._key is None:
            parts = []
            for d in self._rad_dicts:
                parts.append(tuple(sorted(d.items())))
            self._key = tuple(parts)
        return self._key

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, TowerField):
            return NotImplemented
        return self.levels == other.levels and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"TowerField(levels={self.levels}, degree={self.degree})"

    def is_prefix_of(self, other):
        if self.levels > other.levels:
            return False
        o = other.chain[self.levels]
        return o is self or o.key == self.key

    # -- element constructors ------------------------------------------------

    def rational(self, value):
        q = mpq(value)
        return AlgNum(self, {0: q} if q else {})

    def zero(self):
        return AlgNum(self, {})

    def one(self):
        return AlgNum(self, {0: mpq(1)})

    def radical(self, level):
        """sqrt(d_level) as an element of this tower."""
        return AlgNum(self, {1 << level: mpq(1)})

    def lift(self, x):
        """Reinterpret an element of a structural prefix in this tower."""
        if x.tower is self:
            return x
        if isinstance(x, (int, mpq, mpz)):
            return self.rational(x)
        if not x.tower.is_prefix_of(self):
            raise TowerMismatch("element does not live in a prefix of this tower")
        return AlgNum(self, x.coeffs)

    # -- interval machinery ----------------------------------------------------

    def _radical_enclosures(self, prec):
        enc = self._rad_enc.get(prec)
        if enc is None:
            enc = []
            for i, d in enumerate(self._rad_dicts):
                div = _eval_dict(self.chain[i], d, prec, enc)
                enc.append(sqrt_interval(div, prec))
            enc = tuple(enc)
            self._rad_enc[prec] = enc
        return enc

    def _mask_interval(self, mask, prec, rads):
        cache = self._mask_enc.setdefault(prec, {0: (mpq(1), mpq(1))})
        iv = cache.get(mask)
        if iv is None:
            low = mask & -mask
            iv = iv_mul(self._mask_interval(mask ^ low, prec, rads),
                        rads[low.bit_length() - 1])
            cache[mask] = iv
        return iv

    # -- sub-towers ------------------------------------------------------------

    def level_deps(self, level):
        """Levels the radicand at ``level`` refers to, transitively."""
        out = set()
        stack = [m for m in self._rad_dicts[level]]
        while stack:
            m = stack.pop()
            while m:
                low = m & -m
                m ^= low
                i = low.bit_length() - 1
                if i not in out:
                    out.add(i)
                    stack.extend(self._rad_dicts[i].keys())
        return out

    def subtower(self, levels):
        """Tower spanned by a dependency-closed, sorted subset of levels.

        Returns ``(tower, remap)`` where remap sends old masks to new masks.
        """
        levels = tuple(levels)
        cached = self._subtowers.get(levels)
        if cached is not None:
            return cached
        pos = {lvl: i for i, lvl in enumerate(levels)}

        def remap(mask):
            out = 0
            while mask:
                low = mask & -mask
                mask ^= low
                out |= 1 << pos[low.bit_length() - 1]
            return out

        t = QQ
        for lvl in levels:
            d = {remap(m): c for m, c in self._rad_dicts[lvl].items()}
            t = TowerField(t, AlgNum(t, d), _checked=True)
        self._subtowers[levels] = (t, remap)
        return t, remap


QQ = TowerField()


class AlgNum:
    """Exact element of a TowerField; sparse rational coordinates."""

    __slots__ = ("tower", "coeffs", "_enc", "_hash", "_pruned", "_minpoly")

    def __init__(self, tower, coeffs):
        self.tower = tower
        self.coeffs = coeffs
        self._enc = None
        self._hash = None
        self._pruned = None
        self._minpoly = None

    # -- coercion --------------------------------------------------------------

    def _pair(self, other):
        if isinstance(other, AlgNum):
            if other.tower is self.tower:
                return self, other
            if other.tower.levels <= self.tower.levels:
                if other.tower.is_prefix_of(self.tower):
                    return self, AlgNum(self.tower, other.coeffs)
            elif self.tower.is_prefix_of(other.tower):
                return AlgNum(other.tower, self.coeffs), other
            raise TowerMismatch("operands from incompatible towers")
        if isinstance(other, (int, mpz, mpq)):
            return self, self.tower.rational(other)
        return self, None

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        a, b = self._pair(other)
        if b is None:
            return NotImplemented
        out = dict(a.coeffs)
        for m, c in b.coeffs.items():
            _acc(out, m, c)
        return AlgNum(a.tower, out)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._pair(other)
        if b is None:
            return NotImplemented
        out = dict(a.coeffs)
        for m, c in b.coeffs.items():
            _acc(out, m, -c)
        return AlgNum(a.tower, out)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return AlgNum(self.tower, {m: -c for m, c in self.coeffs.items()})

    def __mul__(self, other):
        a, b = self._pair(other)
        if b is None:
            return NotImplemented
        return AlgNum(a.tower, _mul_dicts(a.tower, a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._pair(other)
        if b is None:
            return NotImplemented
        return AlgNum(a.tower, _mul_dicts(a.tower, a.coeffs, _inv_dict(a.tower, b.coeffs)))

    def __rtruediv__(self, other):
        inv = AlgNum(self.tower, _inv_dict(self.tower, self.coeffs))
        return inv.__mul__(other)

    def __pow__(self, n):
        if n < 0:
            return (self.tower.one() / self) ** (-n)
        result = self.tower.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        """Representation equality (same value in coercible towers).

        Use :func:`alg_equal` to compare values across unrelated towers.
        """
        if isinstance(other, (int, mpz, mpq)):
            other = self.tower.rational(other)
        if not isinstance(other, AlgNum):
            return NotImplemented
        if other.tower is not self.tower:
            try:
                a, b = self._pair(other)
            except TowerMismatch:
                return alg_equal(self, other)
            return a.coeffs == b.coeffs
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            if len(self.coeffs) <= 1 and (not self.coeffs or 0 in self.coeffs):
                self._hash = hash(self.coeffs.get(0, mpq(0)))
            else:
                self._hash = hash((self.tower.key, tuple(sorted(self.coeffs.items()))))
        return self._hash

    # -- queries ---------------------------------------------------------------

    def is_rational(self):
        return not self.coeffs or set(self.coeffs) == {0}

    def as_rational(self):
        if not self.is_rational():
            raise ValueError("not a rational value")
        return self.coeffs.get(0, mpq(0))

    def enclosure(self, prec=_SEED_PREC):
        cached = self._enc
        if cached is not None and cached[0] >= prec:
            return cached[1]
        iv = _eval_dict(self.tower, self.coeffs, prec, None)
        self._enc = (prec, iv)
        return iv

    def refine(self, width):
        """Enclosure of width below ``width``; refinement never widens."""
        prec = max(self._enc[0] if self._enc else _SEED_PREC, _SEED_PREC)
        iv = self.enclosure(prec)
        while iv_width(iv) >= width:
            prec *= 2
            iv = self.enclosure(prec)
        return iv

    def __float__(self):
        iv = self.enclosure()
        return float((iv[0] + iv[1]) / 2)

    def __repr__(self):
        from .expressions import serialize_algnum

        return f"AlgNum({serialize_algnum(self)})"

    def pruned(self):
        """Equal value over the sub-tower of levels it actually uses."""
        if self._pruned is None:
            used = set()
            for m in self.coeffs:
                while m:
                    low = m & -m
                    m ^= low
                    used.add(low.bit_length() - 1)
            closure = set(used)
            for lvl in used:
                closure |= self.tower.level_deps(lvl)
            if len(closure) == self.tower.levels:
                self._pruned = self
            else:
                sub, remap = self.tower.subtower(tuple(sorted(closure)))
                self._pruned = AlgNum(sub, {remap(m): c for m, c in self.coeffs.items()})
        return self._pruned


def rational(value):
    return QQ.rational(value)


# ---------------------------------------------------------------------------
# low-level dict arithmetic
# ---------------------------------------------------------------------------


def _pair_mul(rads, m1, c1, m2, c2, out):
    common = m1 & m2
    if not common:
        _acc(out, m1 ^ m2, c1 * c2)
        return
    i = common.bit_length() - 1
    bit = 1 << i
    tmp = {}
    _pair_mul(rads, m1 ^ bit, c1, m2 ^ bit, c2, tmp)
    rad = rads[i]
    for ms, cs in tmp.items():
        for mr, cr in rad.items():
            _pair_mul(rads, ms, cs, mr, cr, out)


def _mul_dicts(tower, a, b):
    out = {}
    rads = tower._rad_dicts
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            _pair_mul(rads, m1, c1, m2, c2, out)
    return out


def _inv_dict(tower, a):
    if not a:
        raise DivisionByZero("division by zero")
    top = -1
    for m in a:
        if m:
            b = m.bit_length() - 1
            if b > top:
                top = b
    if top < 0:
        return {0: 1 / a[0]}
    bit = 1 << top
    a0 = {}
    a1 = {}
    for m, c in a.items():
        if m & bit:
            a1[m ^ bit] = c
        else:
            a0[m] = c
    if not a1:
        return _inv_dict(tower, a0)
    # 1/(a0 + a1*s) = (a0 - a1*s)/(a0^2 - a1^2*d); the denominator is nonzero
    # because d is not a square below its level
    sq1 = _mul_dicts(tower, a1, a1)
    denom = _mul_dicts(tower, a0, a0)
    for m, c in _mul_dicts(tower, sq1, tower._rad_dicts[top]).items():
        _acc(denom, m, -c)
    dinv = _inv_dict(tower, denom)
    num = dict(a0)
    for m, c in a1.items():
        _acc(num, m | bit, -c)
    return _mul_dicts(tower, num, dinv)


def _eval_dict(tower, coeffs, prec, rad_enc):
    if rad_enc is None:
        rad_enc = tower._radical_enclosures(prec)
    lo = mpq(0)
    hi = mpq(0)
    for m, c in coeffs.items():
        if m:
            iv = iv_scale(tower._mask_interval(m, prec, rad_enc), c)
        else:
            iv = (c, c)
        lo += iv[0]
        hi += iv[1]
    return (lo, hi)


# ---------------------------------------------------------------------------
# sign, square roots, squares
# ---------------------------------------------------------------------------


def sign(x):
    """Exact sign under the identity embedding: -1, 0, or +1."""
    if isinstance(x, (int, mpz, mpq)):
        return (x > 0) - (x < 0)
    if not x.coeffs:
        return 0
    prec = _SEED_PREC
    while True:
        s = iv_sign(x.enclosure(prec))
        if s is not None:
            return s
        prec *= 2


def _rational_square_root(c):
    if c < 0:
        return None
    num, den = mpz(c.numerator), mpz(c.denominator)
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return mpq(rn, rd)
    return None


def _is_square_dict(tower, a, level):
    """Square root of ``a`` inside the first ``level`` levels, or None."""
    if not a:
        return {}
    if level == 0:
        r = _rational_square_root(a[0])
        return None if r is None else {0: r}
    bit = 1 << (level - 1)
    a0 = {}
    a1 = {}
    for m, c in a.items():
        if m & bit:
            a1[m ^ bit] = c
        else:
            a0[m] = c
    d = tower._rad_dicts[level - 1]
    if not a1:
        w = _is_square_dict(tower, a0, level - 1)
        if w is not None:
            return w
        ad = _mul_dicts(tower, a0, d)
        w = _is_square_dict(tower, ad, level - 1)
        if w is not None:
            # sqrt(a0) = (w/d) * sqrt(d)
            wd = _mul_dicts(tower, w, _inv_dict(tower, d))
            return {m | bit: c for m, c in wd.items()}
        return None
    disc = {}
    for m, c in _mul_dicts(tower, a0, a0).items():
        _acc(disc, m, c)
    for m, c in _mul_dicts(tower, _mul_dicts(tower, a1, a1), d).items():
        _acc(disc, m, -c)
    sp = _is_square_dict(tower, disc, level - 1)
    if sp is None:
        return None
    for sgn in (1, -1):
        cand = dict(a0)
        for m, c in sp.items():
            _acc(cand, m, c if sgn > 0 else -c)
        cand = {m: c / 2 for m, c in cand.items()}
        if not cand:
            continue
        c_root = _is_square_dict(tower, cand, level - 1)
        if c_root:
            half = {m: c / 2 for m, c in a1.items()}
            e = _mul_dicts(tower, half, _inv_dict(tower, c_root))
            w = dict(c_root)
            for m, c in e.items():
                _acc(w, m | bit, c)
            return w
    return None


def is_square(x):
    """Square root of x inside its *current* tower, or None."""
    w = _is_square_dict(x.tower, x.coeffs, x.tower.levels)
    if w is None:
        return None
    y = AlgNum(x.tower, w)
    return y if sign(y) >= 0 else -y


def _square_content(n):
    """Largest s with s^2 | n, by trial division plus a square tail check."""
    n = abs(mpz(n))
    if n <= 1:
        return mpz(1)
    s = mpz(1)
    p = 2
    while p * p <= n and p < 100_000:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            s *= mpz(p) ** (e // 2)
        p += 1 if p == 2 else 2
    r = isqrt(n)
    if r * r == n:
        s *= r
    return s


def sqrt_extend(x):
    """Nonnegative square root, extending the tower by one level if needed.

    The new radicand is normalised by clearing rational denominators and
    stripping square integer content, so equal values always produce equal
    radicands.
    """
    s = sign(x)
    if s < 0:
        raise NegativeRadicand("sqrt of a negative value")
    if s == 0:
        return x.tower.zero()
    w = is_square(x)
    if w is not None:
        return w
    den_lcm = mpz(1)
    for c in x.coeffs.values():
        den_lcm = _lcm(den_lcm, c.denominator)
    scaled = {m: c * den_lcm * den_lcm for m, c in x.coeffs.items()}
    g = mpz(0)
    for c in scaled.values():
        g = _gcd(g, c.numerator)
    sq = _square_content(g)
    factor = mpq(1) * den_lcm * den_lcm / (sq * sq)
    radicand = AlgNum(x.tower, {m: c * factor for m, c in x.coeffs.items()})
    new = TowerField(x.tower, radicand, _checked=True)
    return AlgNum(new, {1 << x.tower.levels: mpq(sq, den_lcm)})


# ---------------------------------------------------------------------------
# minimal polynomials
# ---------------------------------------------------------------------------


def minimal_polynomial(x):
    """Monic irreducible rational polynomial annihilating x (low coeff first)."""
    if x._minpoly is not None:
        return x._minpoly
    xp = x.pruned()
    tower = xp.tower
    dim = tower.degree
    masks = sorted({m for m in range(dim)})
    index = {m: i for i, m in enumerate(masks)}
    pivots = []  # (pivot_col, dense_row, combo)
    power = tower.one()
    for k in range(dim + 1):
        vec = [mpq(0)] * dim
        for m, c in power.coeffs.items():
            vec[index[m]] = c
        combo = [mpq(0)] * k + [mpq(1)]
        for col, row, rcombo in pivots:
            f = vec[col]
            if f:
                for i in range(dim):
                    if row[i]:
                        vec[i] -= f * row[i]
                for i, rc in enumerate(rcombo):
                    combo[i] -= f * rc
        pivot_col = next((i for i, v in enumerate(vec) if v), None)
        if pivot_col is None:
            poly = tuple(combo)
            x._minpoly = poly
            return poly
        inv = 1 / vec[pivot_col]
        vec = [v * inv for v in vec]
        combo = [c * inv for c in combo]
        pivots.append((pivot_col, vec, combo))
        power = power * xp
    raise AssertionError("no power dependence found below tower degree")


def is_algebraic_integer(x):
    return all(c.denominator == 1 for c in minimal_polynomial(x))


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


class Embedding:
    """A real embedding of a tower: one sign choice per level, plus the
    conjugated tower chain the images live in."""

    __slots__ = ("tower", "signs", "conj_chain")

    def __init__(self, tower, signs, conj_chain):
        self.tower = tower
        self.signs = signs
        self.conj_chain = conj_chain

    @property
    def conj_tower(self):
        return self.conj_chain[-1]

    @property
    def is_identity(self):
        return all(s == 1 for s in self.signs) and self.conj_chain[-1] is self.tower

    def __call__(self, x):
        return apply_embedding(x, self)

    def __repr__(self):
        return f"Embedding(signs={self.signs})"


def _conjugate_radicand(tower, level, signs, conj_prefix):
    d = tower._rad_dicts[level]
    out = {}
    for m, c in d.items():
        s = 1
        mm = m
        while mm:
            low = mm & -mm
            mm ^= low
            s *= signs[low.bit_length() - 1]
        out[m] = c if s > 0 else -c
    return AlgNum(conj_prefix, out)


def _extend_embeddings(tower, partials, stop_on_failure):
    """One DFS level of real-embedding enumeration.

    partials: list of (signs_tuple, conj_chain_tuple). Returns (next, failure)
    where failure is (level, signs) for the first dead branch, if any.
    """
    level = len(partials[0][0]) if partials else 0
    nxt = []
    failure = None
    for signs, chain in partials:
        conj_prefix = chain[-1]
        d_conj = _conjugate_radicand(tower, level, signs, conj_prefix)
        if sign(d_conj) <= 0:
            if failure is None:
                failure = (level, signs)
            if stop_on_failure:
                return None, failure
            continue
        orig = tower.chain[level + 1]
        if conj_prefix is tower.chain[level] and d_conj.coeffs == orig.radicand.coeffs:
            conj = orig
        else:
            conj = TowerField(conj_prefix, d_conj, _checked=True)
        nchain = chain + (conj,)
        nxt.append((signs + (1,), nchain))
        nxt.append((signs + (-1,), nchain))
    return nxt, failure


def real_embeddings(tower):
    """All valid sign vectors; 2^t of them iff the tower is totally real."""
    if tower._embeddings is None:
        partials = [((), (QQ,))]
        for _ in range(tower.levels):
            partials, _failure = _extend_embeddings(tower, partials, False)
        tower._embeddings = tuple(
            Embedding(tower, signs, chain) for signs, chain in partials
        )
    return tower._embeddings


def totally_real_witness(tower):
    """None if the tower is totally real, else (level, partial_signs) of the
    first radicand that fails to stay positive."""
    if tower._tr_witness == -1:
        partials = [((), (QQ,))]
        witness = None
        for _ in range(tower.levels):
            partials, witness = _extend_embeddings(tower, partials, True)
            if witness is not None:
                break
        tower._tr_witness = witness
    return tower._tr_witness


def is_totally_real(tower):
    return totally_real_witness(tower) is None


def apply_embedding(x, emb):
    """Image of x under a real embedding, as an element of the conjugate tower."""
    lvl = x.tower.levels
    if lvl > emb.tower.levels or not x.tower.is_prefix_of(emb.tower):
        raise InvalidEmbedding("embedding does not apply to this element's tower")
    signs = emb.signs
    out = {}
    for m, c in x.coeffs.items():
        s = 1
        mm = m
        while mm:
            low = mm & -mm
            mm ^= low
            s *= signs[low.bit_length() - 1]
        out[m] = c if s > 0 else -c
    return AlgNum(emb.conj_chain[lvl], out)


def is_totally_positive(x):
    """True iff every real embedding sends x to a positive value.

    Requires the (pruned) tower of x to be totally real.
    """
    xp = x.pruned()
    if not is_totally_real(xp.tower):
        raise NotTotallyRealTower("tower of the element is not totally real")
    return all(sign(apply_embedding(xp, e)) > 0 for e in real_embeddings(xp.tower))


# ---------------------------------------------------------------------------
# cross-tower comparisons and canonical labels
# ---------------------------------------------------------------------------


def alg_equal(x, y):
    """Exact value equality, no shared tower required."""
    if isinstance(y, (int, mpz, mpq)):
        y = x.tower.rational(y)
    if x.tower is y.tower:
        return x.coeffs == y.coeffs
    if x.tower.is_prefix_of(y.tower) or y.tower.is_prefix_of(x.tower):
        return x.coeffs == y.coeffs
    xp, yp = x.pruned(), y.pruned()
    if xp.tower == yp.tower:
        return xp.coeffs == yp.coeffs
    if xp.is_rational() or yp.is_rational():
        return xp.is_rational() and yp.is_rational() and xp.coeffs == yp.coeffs
    p = minimal_polynomial(xp)
    if p != minimal_polynomial(yp):
        return False
    return _root_index(xp, p) == _root_index(yp, p)


_root_isolation_cache = {}


def _root_index(x, p=None):
    """Index of x among the increasing real roots of its minimal polynomial."""
    if p is None:
        p = minimal_polynomial(x)
    intervals = _root_isolation_cache.get(p)
    if intervals is None:
        intervals = isolate_real_roots(p)
        _root_isolation_cache[p] = intervals
    if len(intervals) == 1:
        return 0
    width = min(b - a for a, b in intervals)
    tight = [refine_root(p, iv, width / 4) for iv in intervals]
    while True:
        enc = x.refine(width / 4)
        hits = [
            i
            for i, (a, b) in enumerate(tight)
            if enc[1] >= a and enc[0] <= b
        ]
        if len(hits) == 1:
            return hits[0]
        width /= 16
        tight = [refine_root(p, iv, width / 4) for iv in tight]


def entry_label(x):
    """Canonical hashable label of the value of x: (minpoly, root index).

    Equal across any representations of the same real algebraic number.
    """
    xp = x.pruned()
    if xp.is_rational():
        return (xp.coeffs.get(0, mpq(0)),)
    p = minimal_polynomial(xp)
    return (p, _root_index(xp, p))


def compose_towers(base, other):
    """Compositum of two towers.

    Returns ``(tower, lift_other)`` where ``tower`` extends ``base`` and
    ``lift_other`` maps elements of ``other`` into it.  Elements of ``base``
    lift by :meth:`TowerField.lift`.
    """
    comp = base
    sqrts = []  # images of sqrt(d_i) of `other`, as AlgNums of `comp`

    def lift_partial(coeffs):
        total = comp.zero()
        for m, c in coeffs.items():
            term = comp.rational(c)
            mm = m
            while mm:
                low = mm & -mm
                mm ^= low
                term = term * comp.lift(sqrts[low.bit_length() - 1])
            total = total + term
        return total

    for lvl in range(other.levels):
        rad = lift_partial(other._rad_dicts[lvl])
        s = sqrt_extend(rad)
        comp = s.tower
        sqrts = [comp.lift(v) for v in sqrts]
        sqrts.append(s)

    final = comp

    def lift_other(x):
        if x.tower.levels > other.levels or not x.tower.is_prefix_of(other):
            raise TowerMismatch("element does not belong to the composed tower")
        total = final.zero()
        for m, c in x.coeffs.items():
            term = final.rational(c)
            mm = m
            while mm:
                low = mm & -mm
                mm ^= low
                term = term * final.lift(sqrts[low.bit_length() - 1])
            total = total + term
        return total

    return final, lift_other
