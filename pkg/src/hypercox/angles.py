"""Exact construction and recognition of Coxeter angle labels.

cos(pi/m) lives in an iterated square-root tower exactly when phi(2m) is a
power of two, i.e. the odd part of m is a squarefree product of distinct
Fermat primes.  Construction is fully exact: explicit values for the Fermat
primes, Chebyshev evaluation plus angle addition for coprime composites, and
repeated half-angle for powers of two.

Recognition of a Gram entry is float-guided but exactly certified: the unique
candidate m comes from a numeric arccos, then T_m(-g) = -1 is checked in exact
arithmetic and an interval computation isolates -g as the largest root.
"""

import math
from dataclasses import dataclass

from gmpy2 import mpq

from .errors import PositiveEntry, UnsupportedAngle
from .intervals import cos_rational_angle
from .tower import QQ, AlgNum, alg_equal, compose_towers, sign, sqrt_extend

__all__ = [
    "Angle",
    "RightAngle",
    "Parallel",
    "Divergent",
    "NonCoxeter",
    "RIGHT_ANGLE",
    "PARALLEL",
    "is_constructible_angle",
    "chebyshev_t",
    "chebyshev_u",
    "cos_pi_over",
    "sin_pi_over",
    "recognize_angle",
]

FERMAT_PRIMES = (3, 5, 17, 257, 65537)


@dataclass(frozen=True)
class Angle:
    """Dihedral angle pi/m."""

    m: int


class RightAngle:
    def __repr__(self):
        return "RightAngle"

    def __eq__(self, other):
        return isinstance(other, RightAngle)

    def __hash__(self):
        return hash("RightAngle")


class Parallel:
    def __repr__(self):
        return "Parallel"

    def __eq__(self, other):
        return isinstance(other, Parallel)

    def __hash__(self):
        return hash("Parallel")


@dataclass(frozen=True)
class Divergent:
    """Diverging hyperplanes at distance l; weight = cosh(l) > 1."""

    weight: AlgNum


@dataclass(frozen=True)
class NonCoxeter:
    """Not of the form pi/m for any m up to the search bound."""

    max_m: int


RIGHT_ANGLE = RightAngle()
PARALLEL = Parallel()


def is_constructible_angle(m):
    """phi(2m) is a power of two: odd part squarefree over Fermat primes."""
    if m < 1:
        return False
    q = m
    while q % 2 == 0:
        q //= 2
    for p in FERMAT_PRIMES:
        if q % p == 0:
            q //= p
            if q % p == 0:
                return False
    return q == 1


def chebyshev_t(n, x):
    """T_n(x), exact."""
    one = x.tower.one()
    if n == 0:
        return one
    prev, cur = one, x
    for _ in range(n - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def chebyshev_u(n, x):
    """U_n(x), exact."""
    one = x.tower.one()
    if n < 0:
        return x.tower.zero()
    if n == 0:
        return one
    prev, cur = one, 2 * x
    for _ in range(n - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


_cos_cache = {}


def cos_pi_over(m):
    """Exact cos(pi/m) for constructible m >= 1, in its own minimal tower."""
    if m < 1:
        raise UnsupportedAngle(m)
    cached = _cos_cache.get(m)
    if cached is not None:
        return cached
    if not is_constructible_angle(m):
        raise UnsupportedAngle(m)
    halvings = 0
    q = m
    while q % 2 == 0:
        q //= 2
        halvings += 1
    c = _cos_pi_over_odd(q)
    for _ in range(halvings):
        c = sqrt_extend((1 + c) / 2)
    c = c.pruned()
    _cos_cache[m] = c
    return c


def sin_pi_over(m):
    """Exact sin(pi/m) for constructible m >= 1."""
    c = cos_pi_over(m)
    return sqrt_extend(1 - c * c)


def _cos_pi_over_odd(q):
    if q == 1:
        return QQ.rational(-1)
    if q == 3:
        return QQ.rational(mpq(1, 2))
    if q == 5:
        r5 = sqrt_extend(QQ.rational(5))
        return (1 + r5) / 4
    if q == 17:
        return _cos_pi_over_17()
    for p in FERMAT_PRIMES:
        if q % p == 0:
            return _cos_sum(p, q // p)
    raise UnsupportedAngle(q)


def _cos_pi_over_17():
    # Gauss: 16 cos(2 pi/17) = -1 + sqrt(17) + sqrt(34 - 2 sqrt(17))
    #        + 2 sqrt(17 + 3 sqrt(17) - sqrt(34 - 2 sqrt(17)) - 2 sqrt(34 + 2 sqrt(17)))
    r17 = sqrt_extend(QQ.rational(17))
    t = r17.tower
    a = sqrt_extend(t.rational(34) - 2 * r17)
    t = a.tower
    b = sqrt_extend(t.rational(34) + 2 * t.lift(r17))
    t = b.tower
    inner = t.rational(17) + 3 * t.lift(r17) - t.lift(a) - 2 * b
    d = sqrt_extend(inner)
    t = d.tower
    cos2 = (t.rational(-1) + t.lift(r17) + t.lift(a) + 2 * d) / 16
    return sqrt_extend((1 + cos2) / 2)


def _cos_sum(p, r):
    """cos(pi/(p*r)) for coprime p, r via pi/(pr) = u pi/p + v pi/r."""
    # u*r + v*p = 1
    u = pow(r, -1, p)
    v = (1 - u * r) // p
    cp = cos_pi_over(p)
    sp = sin_pi_over(p)
    tower, lift = compose_towers(sp.tower, cos_pi_over(r).tower)
    cr = lift(cos_pi_over(r))
    sr_sq = 1 - cr * cr
    sr = sqrt_extend(sr_sq)
    tower = sr.tower
    cp, sp, cr = tower.lift(cp), tower.lift(sp), tower.lift(cr)

    def cos_mult(k, c):
        return chebyshev_t(abs(k), c)

    def sin_mult(k, c, s):
        if k == 0:
            return c.tower.zero()
        val = chebyshev_u(abs(k) - 1, c) * s
        return val if k > 0 else -val

    ca, sa = cos_mult(u, cp), sin_mult(u, cp, sp)
    cb, sb = cos_mult(v, cr), sin_mult(v, cr, sr)
    return ca * cb - sa * sb


def recognize_angle(g, max_m=60):
    """Classify a single Gram entry.

    0 -> RightAngle; -1 -> Parallel; < -1 -> Divergent(-g); otherwise search
    for the unique m with g = -cos(pi/m), exactly certified, up to max_m.
    """
    s = sign(g)
    if s > 0:
        raise PositiveEntry("positive off-diagonal Gram entry")
    if s == 0:
        return RIGHT_ANGLE
    s1 = sign(g + 1)
    if s1 == 0:
        return PARALLEL
    if s1 < 0:
        return Divergent(-g)
    x = -g
    xf = float(x)
    xf = min(max(xf, 1e-12), 1 - 1e-15)
    m_est = math.pi / math.acos(xf)
    for m in sorted({math.floor(m_est), math.ceil(m_est)}):
        if m < 3 or m > max_m or not is_constructible_angle(m):
            # cos(pi/m) outside every square-root tower cannot equal x
            continue
        if chebyshev_t(m, x) == -1 and _is_largest_chebyshev_root(x, m):
            return Angle(m)
    return NonCoxeter(max_m)


def _is_largest_chebyshev_root(x, m):
    """Certify x = cos(pi/m) among the roots {cos((2k+1)pi/m)} of T_m + 1."""
    if m < 3:
        return True
    c1 = cos_rational_angle(1, m)
    c3 = cos_rational_angle(3, m)
    gap = (c1[0] - c3[1]) / 4
    enc = x.refine(gap)
    return enc[0] > c3[1]
