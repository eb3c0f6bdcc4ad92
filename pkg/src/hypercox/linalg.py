"""Exact linear algebra over square-root towers.

Matrices are lists of lists of AlgNum sharing one tower.  Everything here is
congruence-invariant machinery, so callers may pass unnormalised Gram data
(arbitrary positive diagonal) and read off the same definiteness verdicts.
"""

from .tower import sign

__all__ = [
    "submatrix",
    "determinant",
    "charpoly",
    "signature",
    "is_positive_definite",
    "is_positive_semidefinite",
    "is_parabolic_matrix",
    "schur_complement",
    "connected_components",
]


def submatrix(m, idx):
    return [[m[i][j] for j in idx] for i in idx]


def determinant(m):
    n = len(m)
    if n == 0:
        return None
    tower = m[0][0].tower
    if n == 1:
        return m[0][0]
    rows = [list(r) for r in m]
    det = tower.one()
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if rows[i][k]), None)
        if pivot_row is None:
            return tower.zero()
        if pivot_row != k:
            rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
            det = -det
        pivot = rows[k][k]
        det = det * pivot
        inv = 1 / pivot
        for i in range(k + 1, n):
            f = rows[i][k]
            if f:
                f = f * inv
                ri, rk = rows[i], rows[k]
                for j in range(k + 1, n):
                    if rk[j]:
                        ri[j] = ri[j] - f * rk[j]
    return det


def is_positive_definite(m):
    """All leading principal minors positive (Sylvester), via one elimination."""
    n = len(m)
    if n == 0:
        return True
    rows = [list(r) for r in m]
    for k in range(n):
        pivot = rows[k][k]
        if sign(pivot) <= 0:
            return False
        inv = 1 / pivot
        for i in range(k + 1, n):
            f = rows[i][k]
            if f:
                f = f * inv
                ri, rk = rows[i], rows[k]
                for j in range(k + 1, n):
                    if rk[j]:
                        ri[j] = ri[j] - f * rk[j]
    return True


def charpoly(m):
    """Coefficients [1, c1, ..., cn] of det(x*I - M), Faddeev-LeVerrier."""
    n = len(m)
    tower = m[0][0].tower
    coeffs = [tower.one()]
    mk = [row[:] for row in m]
    for k in range(1, n + 1):
        tr = mk[0][0]
        for i in range(1, n):
            tr = tr + mk[i][i]
        ck = tr / (-k)
        coeffs.append(ck)
        if k == n:
            break
        for i in range(n):
            mk[i][i] = mk[i][i] + ck
        mk = _matmul(m, mk)
    return coeffs


def _matmul(a, b):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        ai = a[i]
        for j in range(n):
            acc = ai[0] * b[0][j]
            for k in range(1, n):
                if ai[k] and b[k][j]:
                    acc = acc + ai[k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def signature(m):
    """Inertia (pos, neg, zero) of a symmetric matrix.

    Sign analysis of the characteristic polynomial: Descartes' rule is exact
    on real-rooted polynomials.
    """
    n = len(m)
    if n == 0:
        return (0, 0, 0)
    coeffs = charpoly(m)  # x^n + c1 x^(n-1) + ... + cn
    signs = [sign(c) for c in coeffs]
    zero = 0
    while zero < n and signs[n - zero] == 0:
        zero += 1
    reduced = signs[: n - zero + 1]
    nonzero = [s for s in reduced if s != 0]
    pos = sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)
    return (pos, n - zero - pos, zero)


def is_positive_semidefinite(m):
    """Every coefficient e_k of the characteristic polynomial nonnegative."""
    n = len(m)
    if n == 0:
        return True
    coeffs = charpoly(m)
    for k in range(1, n + 1):
        ek_sign = sign(coeffs[k]) * (1 if k % 2 == 0 else -1)
        if ek_sign < 0:
            return False
    return True


def connected_components(m):
    """Components of the nonzero off-diagonal graph."""
    n = len(m)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in range(n):
                if w != v and not seen[w] and m[v][w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def is_parabolic_matrix(m):
    """PSD, not PD, and every connected component degenerate."""
    if not is_positive_semidefinite(m):
        return False
    if is_positive_definite(m):
        return False
    for comp in connected_components(m):
        if determinant(submatrix(m, comp)):
            return False
    return True


def solve(a, b_cols):
    """Solve A X = B exactly; B given as list of columns."""
    n = len(a)
    k = len(b_cols)
    rows = [list(a[i]) + [b_cols[j][i] for j in range(k)] for i in range(n)]
    for col in range(n):
        pivot_row = next((i for i in range(col, n) if rows[i][col]), None)
        if pivot_row is None:
            raise ValueError("singular system")
        if pivot_row != col:
            rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for i in range(n):
            if i != col and rows[i][col]:
                f = rows[i][col]
                rows[i] = [vi - f * vc for vi, vc in zip(rows[i], rows[col])]
    return [[rows[i][n + j] for i in range(n)] for j in range(k)]


def schur_complement(m, s_idx, t_idx):
    """M_TT - M_TS M_SS^{-1} M_ST for disjoint index sets S, T."""
    if not s_idx:
        return submatrix(m, t_idx)
    b_cols = [[m[i][j] for i in s_idx] for j in t_idx]  # columns of M_ST
    x_cols = solve(submatrix(m, s_idx), b_cols)  # M_SS^{-1} M_ST, per column
    out = []
    for a, i in enumerate(t_idx):
        row = []
        for b, j in enumerate(t_idx):
            acc = m[i][j]
            for c, k in enumerate(s_idx):
                if m[i][k] and x_cols[b][c]:
                    acc = acc - m[i][k] * x_cols[b][c]
            row.append(acc)
        out.append(row)
    return out
