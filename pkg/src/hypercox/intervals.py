"""Certified rational interval arithmetic and exact real-root isolation.

Intervals are plain ``(lo, hi)`` pairs of ``gmpy2.mpq``.  Ring operations on
rational endpoints are exact, so no directed rounding is needed; only square
roots introduce 2^-prec slack.  Polynomials are tuples of ``mpq`` coefficients,
constant term first.
"""

from gmpy2 import mpq, mpz, isqrt

QONE = mpq(1)
QZERO = mpq(0)

# 1 <= PI_LO < pi < PI_HI, good to ~10^-95.
_PI_DIGITS = (
    "3."
    "14159265358979323846264338327950288419716939937510"
    "5820974944592307816406286208998628034825342117067"
)
_scale = 10 ** (len(_PI_DIGITS) - 2)
PI_LO = mpq(int(_PI_DIGITS.replace(".", "")), _scale)
PI_HI = PI_LO + mpq(1, _scale)


def iv_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def iv_neg(a):
    return (-a[1], -a[0])


def iv_scale(a, c):
    if c >= 0:
        return (a[0] * c, a[1] * c)
    return (a[1] * c, a[0] * c)


def iv_mul(a, b):
    p1 = a[0] * b[0]
    p2 = a[0] * b[1]
    p3 = a[1] * b[0]
    p4 = a[1] * b[1]
    return (min(p1, p2, p3, p4), max(p1, p2, p3, p4))


def iv_contains_zero(a):
    return a[0] <= 0 <= a[1]


def iv_sign(a):
    """Sign of every point of the interval, or None if it straddles zero."""
    if a[0] > 0:
        return 1
    if a[1] < 0:
        return -1
    if a[0] == a[1] == 0:
        return 0
    return None


def iv_width(a):
    return a[1] - a[0]


def sqrt_interval(x, prec):
    """Certified enclosure of sqrt over a nonnegative rational interval."""
    lo, hi = x
    if lo < 0:
        lo = QZERO
    return (sqrt_lower(lo, prec), sqrt_upper(hi, prec))


def sqrt_lower(x, prec):
    """Rational lower bound of sqrt(x) with error < 2^-prec, for x >= 0."""
    num = mpz(x.numerator) << (2 * prec)
    r = isqrt(num // mpz(x.denominator))
    return mpq(r, mpz(1) << prec)


def sqrt_upper(x, prec):
    num = mpz(x.numerator) << (2 * prec)
    q, rem = divmod(num, mpz(x.denominator))
    r = isqrt(q)
    if r * r < q or rem:
        r += 1
    return mpq(r, mpz(1) << prec)


def cos_point_enclosure(x_iv, prec=64):
    """Enclosure of cos over a rational interval inside [0, pi].

    cos is decreasing there, so it suffices to bound cos at both endpoints by
    alternating Taylor partial sums with an explicit tail bound.
    """
    lo_x, hi_x = x_iv
    c_hi = _cos_taylor(lo_x, prec)[1]
    c_lo = _cos_taylor(hi_x, prec)[0]
    return (c_lo, c_hi)


def _cos_taylor(x, prec):
    """Certified (lo, hi) for cos(x), 0 <= x <= pi, via Taylor with tail bound."""
    x2 = x * x
    term = QONE
    total = QONE
    k = 0
    eps = mpq(1, mpz(1) << prec)
    while True:
        k += 1
        term = term * x2 / ((2 * k - 1) * (2 * k))
        total = total - term if k % 2 else total + term
        # alternating with decreasing terms once (2k+1)(2k+2) > x^2
        if (2 * k + 1) * (2 * k + 2) > x2 and term < eps:
            break
    return (total - term, total + term)


def cos_rational_angle(p, q, prec=64):
    """Certified enclosure of cos(p*pi/q) for integers 0 <= p <= q."""
    x_iv = (PI_LO * p / q, PI_HI * p / q)
    return cos_point_enclosure(x_iv, prec)


# ---------------------------------------------------------------------------
# exact polynomial utilities (coefficients mpq, constant term first)
# ---------------------------------------------------------------------------


def poly_trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_eval(p, x):
    acc = QZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_deriv(p):
    return tuple(c * k for k, c in enumerate(p) if k >= 1)


def poly_neg_x(p):
    """p(-x)."""
    return tuple(c if k % 2 == 0 else -c for k, c in enumerate(p))


def _poly_rem(a, b):
    """Remainder of a modulo b over the rationals."""
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    while len(a) - 1 >= db and any(c != 0 for c in a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < db:
            break
        factor = a[-1] / lead
        shift = len(a) - 1 - db
        for i, c in enumerate(b):
            a[i + shift] -= factor * c
        a.pop()
    return poly_trim(a)


def sturm_chain(p):
    p = poly_trim(p)
    chain = [p, poly_trim(poly_deriv(p))]
    while chain[-1]:
        r = _poly_rem(chain[-2], chain[-1])
        if not r:
            break
        chain.append(tuple(-c for c in r))
    return [c for c in chain if c]


def _variations_at(chain, x):
    signs = []
    for p in chain:
        v = poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def root_bound(p):
    """Cauchy bound: all real roots lie in (-B, B)."""
    p = poly_trim(p)
    lead = abs(p[-1])
    b = max((abs(c) / lead for c in p[:-1]), default=QZERO)
    return b + 1


def count_roots(chain, a, b):
    """Number of distinct real roots in (a, b]."""
    return _variations_at(chain, a) - _variations_at(chain, b)


def isolate_real_roots(p):
    """Disjoint rational intervals (a, b], each containing exactly one real
    root of the squarefree polynomial p, in increasing order."""
    p = poly_trim(p)
    if len(p) <= 1:
        return []
    chain = sturm_chain(p)
    bound = root_bound(p)
    total = count_roots(chain, -bound, bound)
    out = []

    def split(a, b, n):
        if n == 0:
            return
        if n == 1:
            out.append((a, b))
            return
        mid = (a + b) / 2
        # nudge off a root so interval endpoints stay sign-definite
        while poly_eval(p, mid) == 0:
            mid = mid + (b - a) / 16
        left = count_roots(chain, a, mid)
        split(a, mid, left)
        split(mid, b, n - left)

    split(-bound, bound, total)
    return out


def refine_root(p, interval, width):
    """Shrink an isolating interval (a, b] of p below the requested width."""
    a, b = interval
    fa = poly_eval(p, a)
    while b - a > width:
        mid = (a + b) / 2
        fm = poly_eval(p, mid)
        if fm == 0:
            return (mid, mid)
        if (fa > 0) != (fm > 0):
            b = mid
        else:
            a, fa = mid, fm
    return (a, b)
