"""Matrices over polynomials and rational functions.

This module carries every rank certificate in the package: Smith form of a
polynomial matrix with tracked unimodular factors, Smith-McMillan form of a
transfer function matrix, exact normal rank, null spaces and inverses over
the rational-function field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

from . import linalg
from .errors import NotSquare, ShapeMismatch, SingularMatrix
from .ratpoly import Poly, RatFunc, as_rat, poly_gcd, poly_lcm, poly_xgcd


class PolyMatrix:
    """Dense matrix of Poly entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[Poly]], cols: int | None = None):
        ent = []
        for row in entries:
            ent.append(tuple(e if isinstance(e, Poly) else Poly.const(as_rat(e)) for e in row))
        self.entries = tuple(ent)
        self.rows = len(ent)
        if self.rows:
            self.cols = len(ent[0])
            if any(len(r) != self.cols for r in ent):
                raise ShapeMismatch("ragged PolyMatrix rows")
        else:
            self.cols = 0 if cols is None else cols

    @staticmethod
    def zeros(m: int, n: int) -> "PolyMatrix":
        z = Poly.zero()
        return PolyMatrix([[z] * n for _ in range(m)], cols=n)

    @staticmethod
    def identity(n: int) -> "PolyMatrix":
        z, o = Poly.zero(), Poly.one()
        return PolyMatrix([[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def from_const(a) -> "PolyMatrix":
        return PolyMatrix([[Poly.const(x) for x in row] for row in a])

    @staticmethod
    def pencil(g, h) -> "PolyMatrix":
        """Degree-one matrix lam*g + h from two constant matrices."""
        if linalg.mshape(g) != linalg.mshape(h):
            raise ShapeMismatch("pencil coefficient shapes differ")
        m, n = linalg.mshape(g)
        return PolyMatrix(
            [[Poly((h[i][j], g[i][j])) for j in range(n)] for i in range(m)], cols=n
        )

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def __eq__(self, other):
        return (
            isinstance(other, PolyMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check_same(other)
        return PolyMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
            cols=self.cols,
        )

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check_same(other)
        return PolyMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
            cols=self.cols,
        )

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix([[-a for a in row] for row in self.entries], cols=self.cols)

    def __mul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.cols != other.rows:
            raise ShapeMismatch(f"matmul {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = [[Poly.zero()] * other.cols for _ in range(self.rows)]
        for i in range(self.rows):
            for k in range(self.cols):
                a = self.entries[i][k]
                if a.is_zero():
                    continue
                for j in range(other.cols):
                    b = other.entries[k][j]
                    if not b.is_zero():
                        out[i][j] = out[i][j] + a * b
        return PolyMatrix(out, cols=other.cols)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def scale(self, p: Poly) -> "PolyMatrix":
        return PolyMatrix([[e * p for e in row] for row in self.entries], cols=self.cols)

    def eval(self, x):
        """Constant rational matrix of entrywise evaluations."""
        return [[e.eval(x) for e in row] for row in self.entries]

    def compose_neg(self) -> "PolyMatrix":
        return PolyMatrix([[e.compose_neg() for e in row] for row in self.entries], cols=self.cols)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def max_degree(self):
        deg = float("-inf")
        for row in self.entries:
            for e in row:
                if e.degree > deg:
                    deg = e.degree
        return deg

    def to_rat(self) -> "RatMatrix":
        return RatMatrix(
            [[RatFunc(e) for e in row] for row in self.entries], cols=self.cols
        )

    def submatrix(self, rows, cols) -> "PolyMatrix":
        return PolyMatrix(
            [[self.entries[i][j] for j in cols] for i in rows], cols=len(list(cols))
        )

    def _check_same(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("PolyMatrix shapes differ")

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols})"


class RatMatrix:
    """Dense matrix of RatFunc entries; the carrier of every TFM."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[RatFunc]], cols: int | None = None):
        ent = []
        for row in entries:
            ent.append(
                tuple(e if isinstance(e, RatFunc) else RatFunc.const(as_rat(e)) for e in row)
            )
        self.entries = tuple(ent)
        self.rows = len(ent)
        if self.rows:
            self.cols = len(ent[0])
            if any(len(r) != self.cols for r in ent):
                raise ShapeMismatch("ragged RatMatrix rows")
        else:
            self.cols = 0 if cols is None else cols

    @staticmethod
    def zeros(m: int, n: int) -> "RatMatrix":
        z = RatFunc.zero()
        return RatMatrix([[z] * n for _ in range(m)], cols=n)

    @staticmethod
    def identity(n: int) -> "RatMatrix":
        z, o = RatFunc.zero(), RatFunc.one()
        return RatMatrix([[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def from_const(a) -> "RatMatrix":
        return RatMatrix([[RatFunc.const(x) for x in row] for row in a])

    @staticmethod
    def block_diag(blocks: Sequence["RatMatrix"]) -> "RatMatrix":
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        out = [[RatFunc.zero()] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    out[r0 + i][c0 + j] = b.entries[i][j]
            r0 += b.rows
            c0 += b.cols
        return RatMatrix(out, cols=cols)

    @staticmethod
    def hstack(blocks: Sequence["RatMatrix"]) -> "RatMatrix":
        rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise ShapeMismatch("hstack row counts differ")
        out = [sum((list(b.entries[i]) for b in blocks), []) for i in range(rows)]
        return RatMatrix(out, cols=sum(b.cols for b in blocks))

    @staticmethod
    def vstack(blocks: Sequence["RatMatrix"]) -> "RatMatrix":
        cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise ShapeMismatch("vstack column counts differ")
        out = []
        for b in blocks:
            out.extend(list(row) for row in b.entries)
        return RatMatrix(out, cols=cols)

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def __eq__(self, other):
        return (
            isinstance(other, RatMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
            cols=self.cols,
        )

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
            cols=self.cols,
        )

    def __neg__(self) -> "RatMatrix":
        return RatMatrix([[-a for a in row] for row in self.entries], cols=self.cols)

    def __mul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ShapeMismatch(f"matmul {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        out = [[RatFunc.zero()] * other.cols for _ in range(self.rows)]
        for i in range(self.rows):
            for k in range(self.cols):
                a = self.entries[i][k]
                if a.is_zero():
                    continue
                for j in range(other.cols):
                    b = other.entries[k][j]
                    if not b.is_zero():
                        out[i][j] = out[i][j] + a * b
        return RatMatrix(out, cols=other.cols)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def scale(self, f: RatFunc) -> "RatMatrix":
        return RatMatrix([[e * f for e in row] for row in self.entries], cols=self.cols)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def is_constant(self) -> bool:
        return all(e.is_constant() for row in self.entries for e in row)

    def to_const(self):
        return [[e.as_constant() for e in row] for row in self.entries]

    def has_pole_at(self, x) -> bool:
        return any(e.has_pole_at(x) for row in self.entries for e in row)

    def eval(self, x):
        return [[e.eval(x) for e in row] for row in self.entries]

    def den_lcm(self) -> Poly:
        d = Poly.one()
        for row in self.entries:
            for e in row:
                d = poly_lcm(d, e.den)
        return d

    def clear_denominators(self):
        """Return (N, d) with self == N / d, N a PolyMatrix and d monic."""
        d = self.den_lcm()
        num = [
            [e.num * d.exact_div(e.den) for e in row] for row in self.entries
        ]
        return PolyMatrix(num, cols=self.cols), d

    def submatrix(self, rows, cols) -> "RatMatrix":
        cols = list(cols)
        return RatMatrix(
            [[self.entries[i][j] for j in cols] for i in rows], cols=len(cols)
        )

    def _check_same(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("RatMatrix shapes differ")

    def __repr__(self):
        return f"RatMatrix({self.rows}x{self.cols})"


# ---------------------------------------------------------------------------
# rank machinery
# ---------------------------------------------------------------------------

# Deterministic evaluation points for the normal-rank fast path.  Chosen as
# small "unstructured" rationals so that degree-bounded coincidences are
# unlikely; correctness never depends on them (see normal_rank).
_SAMPLE_POINTS = [as_rat(s) for s in ("7/3", "-11/5", "13/7", "-3/8", "17/4", "23/9", "-19/6")]


def poly_rank(m: PolyMatrix) -> int:
    """Exact rank over the rational-function field, by fraction-free elimination."""
    if m.rows == 0 or m.cols == 0:
        return 0
    work = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    prev = Poly.one()
    r = 0
    for _step in range(min(rows, cols)):
        piv = None
        best = None
        for i in range(r, rows):
            for j in range(r, cols):
                e = work[i][j]
                if not e.is_zero():
                    if best is None or e.degree < best:
                        best = e.degree
                        piv = (i, j)
        if piv is None:
            break
        pi, pj = piv
        if pi != r:
            work[r], work[pi] = work[pi], work[r]
        if pj != r:
            for row in work:
                row[r], row[pj] = row[pj], row[r]
        p = work[r][r]
        for i in range(r + 1, rows):
            for j in range(r + 1, cols):
                num = work[r][r] * work[i][j] - work[i][r] * work[r][j]
                work[i][j] = num.exact_div(prev)
            work[i][r] = Poly.zero()
        prev = p
        r += 1
    return r


def poly_det(m: PolyMatrix) -> Poly:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise NotSquare("determinant of a non-square PolyMatrix")
    n = m.rows
    if n == 0:
        return Poly.one()
    work = [list(row) for row in m.entries]
    prev = Poly.one()
    sign = 1
    for k in range(n - 1):
        if work[k][k].is_zero():
            swap = None
            for i in range(k + 1, n):
                if not work[i][k].is_zero():
                    swap = i
                    break
            if swap is None:
                return Poly.zero()
            work[k], work[swap] = work[swap], work[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = work[k][k] * work[i][j] - work[i][k] * work[k][j]
                work[i][j] = num.exact_div(prev)
            work[i][k] = Poly.zero()
        prev = work[k][k]
    d = work[n - 1][n - 1]
    return d if sign > 0 else -d


def rat_det(g: RatMatrix) -> RatFunc:
    if g.rows != g.cols:
        raise NotSquare("determinant of a non-square RatMatrix")
    if g.rows == 0:
        return RatFunc.one()
    num, d = g.clear_denominators()
    det_num = poly_det(num)
    den = Poly.one()
    for _ in range(g.rows):
        den = den * d
    return RatFunc(det_num, den)


def normal_rank(g: RatMatrix) -> int:
    """Rank of g over the rational-function field.

    Fast path: exact rank at deterministic rational sample points never
    exceeds the normal rank, so hitting min(rows, cols) settles the answer.
    Otherwise fall back to fraction-free elimination, which is exact and
    total (sampling alone could in principle land on unlucky points).
    """
    if g.rows == 0 or g.cols == 0:
        return 0
    bound = min(g.rows, g.cols)
    for x in _SAMPLE_POINTS[:3]:
        if g.has_pole_at(x):
            continue
        r = linalg.rank(g.eval(x))
        if r == bound:
            return bound
    num, _ = g.clear_denominators()
    return poly_rank(num)


def poly_normal_rank(m: PolyMatrix) -> int:
    bound = min(m.rows, m.cols)
    if bound == 0:
        return 0
    for x in _SAMPLE_POINTS[:3]:
        if linalg.rank(m.eval(x)) == bound:
            return bound
    return poly_rank(m)


def is_fncr(g: RatMatrix) -> bool:
    """Full normal column rank."""
    return normal_rank(g) == g.cols

def is_fnrr(g: RatMatrix) -> bool:
    """Full normal row rank."""
    return normal_rank(g) == g.rows


def const_nullspace(a: RatMatrix) -> RatMatrix:
    """Right null-space basis of a constant RatMatrix; empty when FCR."""
    if not a.is_constant():
        raise ValueError("const_nullspace requires degree-0 entries")
    basis = linalg.nullspace(a.to_const())
    if not basis:
        return RatMatrix.zeros(a.cols, 0)
    return RatMatrix.from_const(basis)


def rat_inverse(g: RatMatrix) -> RatMatrix:
    """Exact inverse over the rational-function field."""
    if g.rows != g.cols:
        raise NotSquare("inverse of a non-square RatMatrix")
    n = g.rows
    if n == 0:
        return g
    aug = [list(row) + [RatFunc.one() if i == j else RatFunc.zero() for j in range(n)]
           for i, row in enumerate(g.entries)]
    for c in range(n):
        piv_row = None
        for i in range(c, n):
            if not aug[i][c].is_zero():
                piv_row = i
                break
        if piv_row is None:
            raise SingularMatrix("matrix is singular over the function field")
        if piv_row != c:
            aug[c], aug[piv_row] = aug[piv_row], aug[c]
        piv = aug[c][c]
        inv_piv = piv.inv()
        aug[c] = [e * inv_piv for e in aug[c]]
        for i in range(n):
            if i == c:
                continue
            f = aug[i][c]
            if f.is_zero():
                continue
            aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return RatMatrix([row[n:] for row in aug], cols=n)


# ---------------------------------------------------------------------------
# Smith and Smith-McMillan forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithForm:
    """m = U * diag(d) * V with U, V unimodular and d a divisibility chain."""

    u: PolyMatrix
    diag: List[Poly]
    v: PolyMatrix
    rank: int

    def reassemble(self, rows: int, cols: int) -> PolyMatrix:
        core = PolyMatrix.zeros(rows, cols)
        ent = [list(r) for r in core.entries]
        for j, d in enumerate(self.diag):
            ent[j][j] = d
        return self.u * PolyMatrix(ent, cols=cols) * self.v


@dataclass(frozen=True)
class SmithMcMillan:
    """g = U * diag(alphas[j]/betas[j]) * V padded with zeros."""

    u: PolyMatrix
    alphas: List[Poly]
    betas: List[Poly]
    v: PolyMatrix
    rank: int

    def reassemble(self, rows: int, cols: int) -> RatMatrix:
        core = [[RatFunc.zero()] * cols for _ in range(rows)]
        for j in range(self.rank):
            core[j][j] = RatFunc(self.alphas[j], self.betas[j])
        return self.u.to_rat() * RatMatrix(core, cols=cols) * self.v.to_rat()


def _apply_row_op(work, u_cols, op, *args):
    """Row op on work plus the inverse column op on the U factor."""
    if op == "swap":
        i, j = args
        work[i], work[j] = work[j], work[i]
        for row in u_cols:
            row[i], row[j] = row[j], row[i]
    elif op == "add":
        # row_i += p * row_j  =>  u_col_j -= p * u_col_i
        i, j, p = args
        work[i] = [a + p * b for a, b in zip(work[i], work[j])]
        for row in u_cols:
            row[j] = row[j] - p * row[i]
    elif op == "scale":
        # row_i *= c (constant)  =>  u_col_i /= c
        i, c = args
        work[i] = [a.scale(c) for a in work[i]]
        inv_c = 1 / as_rat(c)
        for row in u_cols:
            row[i] = row[i].scale(inv_c)
    elif op == "combine":
        # [row_i; row_j] <- [[a, b], [c, d]] [row_i; row_j], det = 1
        i, j, a, b, c, d = args
        ri, rj = work[i], work[j]
        work[i] = [a * x + b * y for x, y in zip(ri, rj)]
        work[j] = [c * x + d * y for x, y in zip(ri, rj)]
        for row in u_cols:
            x, y = row[i], row[j]
            row[i] = d * x - c * y
            row[j] = -b * x + a * y


def _apply_col_op(work, v_rows, op, *args):
    """Column op on work plus the inverse row op on the V factor."""
    if op == "swap":
        i, j = args
        for row in work:
            row[i], row[j] = row[j], row[i]
        v_rows[i], v_rows[j] = v_rows[j], v_rows[i]
    elif op == "add":
        # col_i += p * col_j  =>  v_row_j -= p * v_row_i
        i, j, p = args
        for row in work:
            row[i] = row[i] + p * row[j]
        v_rows[j] = [a - p * b for a, b in zip(v_rows[j], v_rows[i])]
    elif op == "scale":
        i, c = args
        for row in work:
            row[i] = row[i].scale(c)
        inv_c = 1 / as_rat(c)
        v_rows[i] = [a.scale(inv_c) for a in v_rows[i]]
    elif op == "combine":
        # [col_i, col_j] <- [col_i, col_j] [[a, c], [b, d]] ... i.e.
        # col_i <- a col_i + b col_j, col_j <- c col_i + d col_j, det = 1
        i, j, a, b, c, d = args
        for row in work:
            x, y = row[i], row[j]
            row[i] = a * x + b * y
            row[j] = c * x + d * y
        ri, rj = v_rows[i], v_rows[j]
        v_rows[i] = [d * x - c * y for x, y in zip(ri, rj)]
        v_rows[j] = [-b * x + a * y for x, y in zip(ri, rj)]


def _primitive_scale(polys) -> "object | None":
    """Constant c making the given coefficients integer and coprime, or None."""
    import math

    nums, dens = [], []
    for p in polys:
        for c in p.coeffs:
            nums.append(int(c.numerator))
            dens.append(int(c.denominator))
    if not nums:
        return None
    g = 0
    for x in nums:
        g = math.gcd(g, x)
    l = 1
    for x in dens:
        l = l * x // math.gcd(l, x)
    if g == 0:
        return None
    c = as_rat(l) / as_rat(g)
    return None if c == 1 else c


def smith_form(m: PolyMatrix) -> SmithForm:
    """Smith normal form over Q[x] with exactly tracked unimodular factors.

    Pivots are chosen by minimal degree; rows and columns of the remaining
    submatrix are rescaled to primitive integer coefficients each round
    (a constant, hence unimodular, operation) to keep coefficients small.
    """
    rows, cols = m.rows, m.cols
    work = [list(r) for r in m.entries]
    u = [[Poly.one() if i == j else Poly.zero() for j in range(rows)] for i in range(rows)]
    v = [[Poly.one() if i == j else Poly.zero() for j in range(cols)] for i in range(cols)]

    def primitivize(t):
        for i in range(t, rows):
            c = _primitive_scale(work[i][t:])
            if c is not None:
                _apply_row_op(work, u, "scale", i, c)
        for j in range(t, cols):
            c = _primitive_scale([work[i][j] for i in range(t, rows)])
            if c is not None:
                _apply_col_op(work, v, "scale", j, c)

    def find_pivot(t):
        best = None
        where = None
        for i in range(t, rows):
            for j in range(t, cols):
                e = work[i][j]
                if not e.is_zero() and (best is None or e.degree < best):
                    best = e.degree
                    where = (i, j)
        return where

    t = 0
    while t < min(rows, cols):
        primitivize(t)
        where = find_pivot(t)
        if where is None:
            break
        pi, pj = where
        if pi != t:
            _apply_row_op(work, u, "swap", t, pi)
        if pj != t:
            _apply_col_op(work, v, "swap", t, pj)

        while True:
            primitivize(t)
            # clear column t: exact divisions where possible, otherwise a
            # Bezout 2x2 transform that drops the pivot to the gcd at once
            # (avoids the degree blowup of repeated remainder promotion)
            for i in range(t + 1, rows):
                e = work[i][t]
                if e.is_zero():
                    continue
                p = work[t][t]
                q, r = divmod(e, p)
                if r.is_zero():
                    _apply_row_op(work, u, "add", i, t, -q)
                else:
                    g, s, w = poly_xgcd(p, e)
                    _apply_row_op(
                        work, u, "combine", t, i, s, w, -e.exact_div(g), p.exact_div(g)
                    )
            dirty = False
            for j in range(t + 1, cols):
                e = work[t][j]
                if e.is_zero():
                    continue
                p = work[t][t]
                q, r = divmod(e, p)
                if r.is_zero():
                    _apply_col_op(work, v, "add", j, t, -q)
                else:
                    g, s, w = poly_xgcd(p, e)
                    _apply_col_op(
                        work, v, "combine", t, j, s, w, -e.exact_div(g), p.exact_div(g)
                    )
                    dirty = True  # the combine mixes column t; recheck it
            if dirty or any(not work[i][t].is_zero() for i in range(t + 1, rows)):
                continue
            # row and column are both clear; enforce divisibility of the rest
            offender = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if not (work[i][j] % work[t][t]).is_zero():
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            _apply_row_op(work, u, "add", t, offender, Poly.one())

        lead = work[t][t].leading()
        if lead != 1:
            _apply_row_op(work, u, "scale", t, 1 / lead)
        t += 1

    diag = [work[j][j] for j in range(t)]
    return SmithForm(
        u=PolyMatrix(u, cols=rows), diag=diag, v=PolyMatrix(v, cols=cols), rank=t
    )


def smith_mcmillan(g: RatMatrix) -> SmithMcMillan:
    """Smith-McMillan form of a transfer function matrix, exactly."""
    num, d = g.clear_denominators()
    sf = smith_form(num)
    alphas, betas = [], []
    for s in sf.diag:
        gcd = poly_gcd(s, d)
        alphas.append(s.exact_div(gcd).monic())
        betas.append(d.exact_div(gcd).monic())
    return SmithMcMillan(u=sf.u, alphas=alphas, betas=betas, v=sf.v, rank=sf.rank)
