"""Dense exact linear algebra over the rationals.

A matrix here is a plain list of lists of Rat.  These routines back the
constant-matrix work everywhere in the package (null spaces, inverses,
basis completions, Kronecker products); none of them mutate their inputs.
"""

from __future__ import annotations

from .errors import NotSquare, SingularMatrix
from .ratpoly import ONE, ZERO, Rat, as_rat


def mzeros(m: int, n: int):
    return [[ZERO] * n for _ in range(m)]


def midentity(n: int):
    out = mzeros(n, n)
    for i in range(n):
        out[i][i] = ONE
    return out


def mcopy(a):
    return [row[:] for row in a]


def mshape(a):
    return len(a), len(a[0]) if a else 0


def from_rows(rows):
    return [[as_rat(x) for x in row] for row in rows]


def madd(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def msub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mneg(a):
    return [[-x for x in row] for row in a]


def mscale(a, c):
    c = as_rat(c)
    return [[x * c for x in row] for row in a]


def mmul(a, b):
    m, k = mshape(a)
    k2, n = mshape(b)
    if k != k2:
        raise ValueError(f"matmul shape mismatch: {m}x{k} @ {k2}x{n}")
    bt = list(zip(*b)) if b else []
    out = mzeros(m, n)
    for i in range(m):
        ai = a[i]
        for j in range(n):
            s = ZERO
            for x, y in zip(ai, bt[j]):
                if x and y:
                    s += x * y
            out[i][j] = s
    return out


def mtranspose(a):
    return [list(col) for col in zip(*a)] if a else []


def mhstack(blocks):
    blocks = [b for b in blocks if mshape(b)[1] > 0 or mshape(b)[0] > 0]
    if not blocks:
        return []
    rows = len(blocks[0])
    out = []
    for i in range(rows):
        row = []
        for b in blocks:
            row.extend(b[i])
        out.append(row)
    return out


def mvstack(blocks):
    out = []
    for b in blocks:
        out.extend(mcopy(b))
    return out


def mblockdiag(blocks):
    total_r = sum(mshape(b)[0] for b in blocks)
    total_c = sum(mshape(b)[1] for b in blocks)
    out = mzeros(total_r, total_c)
    r0 = c0 = 0
    for b in blocks:
        br, bc = mshape(b)
        for i in range(br):
            out[r0 + i][c0 : c0 + bc] = b[i][:]
        r0 += br
        c0 += bc
    return out


def meq(a, b):
    return mshape(a) == mshape(b) and all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_zero_matrix(a):
    return all(x == 0 for row in a for x in row)


def kron(a, b):
    ma, na = mshape(a)
    mb, nb = mshape(b)
    out = mzeros(ma * mb, na * nb)
    for i in range(ma):
        for j in range(na):
            aij = a[i][j]
            if aij == 0:
                continue
            for p in range(mb):
                for q in range(nb):
                    out[i * mb + p][j * nb + q] = aij * b[p][q]
    return out


def vec(a):
    """Column-major vectorization, as a list of Rat."""
    m, n = mshape(a)
    return [a[i][j] for j in range(n) for i in range(m)]


def unvec(v, m: int, n: int):
    if len(v) != m * n:
        raise ValueError("unvec length mismatch")
    out = mzeros(m, n)
    for j in range(n):
        for i in range(m):
            out[i][j] = v[j * m + i]
    return out


def _row_echelon(a):
    """In-place forward elimination; returns pivot (row, col) pairs."""
    m, n = mshape(a)
    pivots = []
    r = 0
    for c in range(n):
        pr = None
        for i in range(r, m):
            if a[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            a[r], a[pr] = a[pr], a[r]
        piv = a[r][c]
        for i in range(r + 1, m):
            f = a[i][c]
            if f == 0:
                continue
            f = f / piv
            ai, ar = a[i], a[r]
            for j in range(c, n):
                ai[j] = ai[j] - f * ar[j]
        pivots.append((r, c))
        r += 1
        if r == m:
            break
    return pivots


def rank(a) -> int:
    if not a or not a[0]:
        return 0
    work = mcopy(a)
    return len(_row_echelon(work))


def rref(a):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    work = mcopy(a)
    pivots = _row_echelon(work)
    n = mshape(work)[1]
    for r, c in reversed(pivots):
        piv = work[r][c]
        if piv != 1:
            work[r] = [x / piv for x in work[r]]
        for i in range(r):
            f = work[i][c]
            if f == 0:
                continue
            work[i] = [x - f * y for x, y in zip(work[i], work[r])]
    return work, [c for _, c in pivots]


def nullspace(a):
    """Columns spanning null(a), each free variable set to one.

    Returns a matrix with one column per free variable; [] when a is FCR
    (the paper's convention A^perp = 0 maps to an empty basis).
    """
    m, n = mshape(a)
    if n == 0:
        return []
    if m == 0:
        return midentity(n)
    red, piv_cols = rref(a)
    free_cols = [c for c in range(n) if c not in piv_cols]
    if not free_cols:
        return []
    basis = mzeros(n, len(free_cols))
    for k, fc in enumerate(free_cols):
        basis[fc][k] = ONE
        for r, c in zip(range(len(piv_cols)), piv_cols):
            basis[c][k] = -red[r][fc]
    return basis


def colspace(a):
    """Columns of `a` forming a basis of its column space."""
    _, piv_cols = rref(a)
    if not piv_cols:
        return []
    return [[row[c] for c in piv_cols] for row in a]


def extend_independent(base, candidates):
    """Greedily append candidate columns that enlarge span(base).

    Both arguments are matrices with equal row counts (base may be []).
    Returns the appended columns as a matrix (possibly []).
    """
    m = mshape(candidates)[0]
    if m == 0:
        return []
    cur = mcopy(base) if base else [[] for _ in range(m)]
    cur_rank = rank(cur) if base else 0
    added = [[] for _ in range(m)]
    for j in range(mshape(candidates)[1]):
        col = [candidates[i][j] for i in range(m)]
        trial = [cur[i] + [col[i]] for i in range(m)]
        r = rank(trial)
        if r > cur_rank:
            cur = trial
            cur_rank = r
            for i in range(m):
                added[i].append(col[i])
    return added if added[0] else []


def complete_basis(b, m: int | None = None):
    """Extend independent columns b to an invertible m x m matrix."""
    if m is None:
        m = mshape(b)[0] if b else 0
    if m == 0:
        raise ValueError("cannot complete a basis with zero ambient dimension")
    if not b:
        return midentity(m)
    ext = extend_independent(b, midentity(m))
    full = mhstack([b, ext]) if ext else mcopy(b)
    if mshape(full) != (m, m):
        raise ValueError("basis completion failed")
    return full


def solve_matrix(a, b):
    """Solve a X = b for square invertible a."""
    m, n = mshape(a)
    if m != n:
        raise NotSquare("solve requires a square matrix")
    k = mshape(b)[1]
    aug = [a[i][:] + b[i][:] for i in range(m)]
    pivots = _row_echelon(aug)
    if len(pivots) != n:
        raise SingularMatrix("singular coefficient matrix")
    x = mzeros(n, k)
    for r in range(n - 1, -1, -1):
        c = pivots[r][1]
        for col in range(k):
            s = aug[r][n + col]
            for j in range(c + 1, n):
                s -= aug[r][j] * x[j][col]
            x[c][col] = s / aug[r][c]
    return x


def inv(a):
    n = mshape(a)[0]
    return solve_matrix(a, midentity(n))


def solve_any(a, b):
    """One exact solution of a X = b for arbitrary (possibly rectangular) a.

    Free variables are set to zero.  Returns None when the system is
    inconsistent.
    """
    m, n = mshape(a)
    k = mshape(b)[1]
    if mshape(b)[0] != m:
        raise ValueError("right-hand side row count mismatch")
    aug = [a[i][:] + b[i][:] for i in range(m)]
    red, piv_cols = rref(aug)
    for r in range(len(piv_cols), m):
        if any(red[r][n + col] != 0 for col in range(k)):
            return None
    if any(c >= n for c in piv_cols):
        return None
    x = mzeros(n, k)
    for r, c in enumerate(piv_cols):
        for col in range(k):
            x[c][col] = red[r][n + col]
    return x


def det(a) -> Rat:
    m, n = mshape(a)
    if m != n:
        raise NotSquare("determinant of a non-square matrix")
    if n == 0:
        return ONE
    work = mcopy(a)
    sign = 1
    d = ONE
    for c in range(n):
        pr = None
        for i in range(c, n):
            if work[i][c] != 0:
                pr = i
                break
        if pr is None:
            return ZERO
        if pr != c:
            work[c], work[pr] = work[pr], work[c]
            sign = -sign
        piv = work[c][c]
        d *= piv
        for i in range(c + 1, n):
            f = work[i][c]
            if f == 0:
                continue
            f = f / piv
            wi, wc = work[i], work[c]
            for j in range(c, n):
                wi[j] = wi[j] - f * wc[j]
    return d if sign > 0 else -d
