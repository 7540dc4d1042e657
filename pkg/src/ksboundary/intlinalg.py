"""Small exact integer linear algebra on lists of lists.

Matrices are row-major ``list[list[int]]``; vectors are tuples of ints.
Nothing here is fast, everything here is exact.
"""

from __future__ import annotations

from fractions import Fraction


def zeros(r: int, c: int) -> list[list[int]]:
    return [[0] * c for _ in range(r)]


def identity(n: int) -> list[list[int]]:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = 1
    return m


def transpose(a):
    return [list(row) for row in zip(*a)] if a else []


def matmul(a, b):
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def columns(a):
    return [tuple(c) for c in zip(*a)]


def from_columns(cols, nrows: int):
    if not cols:
        return [[] for _ in range(nrows)]
    return [list(r) for r in zip(*cols)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def column_echelon(a):
    """Return (H, U, pivots) with a @ U = H, U unimodular.

    H is in column echelon form: column j has its first nonzero entry in row
    ``pivots[j]``, pivots strictly increasing, and the columns past
    ``len(pivots)`` are zero. Those trailing columns of U span the kernel.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    h = [list(r) for r in a]
    u = identity(n)

    def colop(j, k, p, q, r, s):
        # (col_j, col_k) <- (p*col_j + q*col_k, r*col_j + s*col_k), ps - qr = +-1
        for mat in (h, u):
            for row in mat:
                x, y = row[j], row[k]
                row[j], row[k] = p * x + q * y, r * x + s * y

    pivots = []
    col = 0
    for i in range(m):
        if col >= n:
            break
        for k in range(col + 1, n):
            if h[i][k] == 0:
                continue
            x, y = h[i][col], h[i][k]
            g, s, t = _xgcd(x, y)
            # new col <- s*col + t*k ; k <- (-y/g)*col + (x/g)*k
            colop(col, k, s, t, -y // g, x // g)
        if h[i][col] == 0:
            continue
        if h[i][col] < 0:
            for mat in (h, u):
                for row in mat:
                    row[col] = -row[col]
        # reduce earlier pivot columns in this row
        p = h[i][col]
        for j in range(col):
            qt = h[i][j] // p
            if qt:
                for mat in (h, u):
                    for row in mat:
                        row[j] -= qt * row[col]
        pivots.append(i)
        col += 1
    return h, u, pivots


def kernel_basis(a) -> list[tuple[int, ...]]:
    """Basis of the integer kernel {x : a x = 0} (saturated by construction)."""
    n = len(a[0]) if a else 0
    _, u, piv = column_echelon(a)
    return [tuple(u[r][c] for r in range(n)) for c in range(len(piv), n)]


def solve_integer(a, b) -> tuple[int, ...] | None:
    """Some integer x with a x = b, or None. Linear in b on the image lattice."""
    m = len(a)
    n = len(a[0]) if m else 0
    h, u, piv = column_echelon(a)
    y = [0] * n
    for j, i in enumerate(piv):
        acc = b[i] - sum(h[i][k] * y[k] for k in range(j))
        if acc % h[i][j]:
            return None
        y[j] = acc // h[i][j]
    x = tuple(sum(u[r][c] * y[c] for c in range(n)) for r in range(n))
    if matvec(a, x) != tuple(b):
        return None
    return x


def det(a) -> int:
    """Bareiss fraction-free determinant."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(r) for r in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def det_fraction(a) -> Fraction:
    """Bareiss on rationals: clears denominators first."""
    from math import lcm

    n = len(a)
    if n == 0:
        return Fraction(1)
    scale = 1
    rows = []
    for row in a:
        d = 1
        for x in row:
            d = lcm(d, Fraction(x).denominator)
        scale *= d
        rows.append([int(Fraction(x) * d) for x in row])
    return Fraction(det(rows), scale)


def inverse_unimodular(a):
    """Integer inverse of a unimodular matrix (ValueError otherwise)."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            raise ValueError("singular matrix")
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [x / piv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    out = [[x for x in row[n:]] for row in m]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def lattice_saturated(vectors, dim: int) -> bool:
    """True iff span(vectors) is a primitive sublattice of Z^dim (vectors independent)."""
    if not vectors:
        return True
    h, _, piv = column_echelon([list(v) for v in vectors])  # rows = vectors
    if len(piv) != len(vectors):
        return False
    d = 1
    for j, i in enumerate(piv):
        d *= h[i][j]
    return abs(d) == 1
