"""Matrix pencils lam*G + H: canonical blocks, null spaces, exact KCF.

The Kronecker canonical form is computed entirely in rational arithmetic:
right/left singular structure is split off one minimal-degree null
polynomial at a time, and the remaining regular pencil is separated into
zero-eigenvalue, infinite-eigenvalue and strictly regular parts through
Fitting decompositions and nilpotent Jordan bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import linalg
from .errors import InvalidIndex, NotSquare, ShapeMismatch
from .polymat import PolyMatrix, poly_det, poly_rank
from .ratpoly import ONE, ZERO, as_rat


class MatrixPencil:
    """Constant rational coefficient pair; the pencil is lam*g + h.

    `cols` disambiguates the zero-row case (L_0 is a 0 x 1 zero pencil).
    """

    __slots__ = ("g", "h", "_cols")

    def __init__(self, g, h, cols: int | None = None):
        g = tuple(tuple(as_rat(x) for x in row) for row in g)
        h = tuple(tuple(as_rat(x) for x in row) for row in h)
        if len(g) != len(h) or any(len(rg) != len(rh) for rg, rh in zip(g, h)):
            raise ShapeMismatch("pencil coefficient shapes differ")
        if g and any(len(r) != len(g[0]) for r in g):
            raise ShapeMismatch("ragged pencil rows")
        self.g = g
        self.h = h
        if g:
            self._cols = len(g[0])
        else:
            self._cols = 0 if cols is None else cols

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.g), self._cols

    def __eq__(self, other):
        return (
            isinstance(other, MatrixPencil)
            and self.shape == other.shape
            and self.g == other.g
            and self.h == other.h
        )

    def __hash__(self):
        return hash((self.shape, self.g, self.h))

    def __repr__(self):
        return f"MatrixPencil({self.shape[0]}x{self.shape[1]})"

    def g_list(self):
        return [list(r) for r in self.g]

    def h_list(self):
        return [list(r) for r in self.h]

    def eval(self, lam0):
        lam0 = as_rat(lam0)
        return [[lam0 * a + b for a, b in zip(rg, rh)] for rg, rh in zip(self.g, self.h)]

    def as_poly(self) -> PolyMatrix:
        return PolyMatrix.pencil(self.g_list(), self.h_list())

    def transpose(self) -> "MatrixPencil":
        m, n = self.shape
        gt = [[self.g[i][j] for i in range(m)] for j in range(n)]
        ht = [[self.h[i][j] for i in range(m)] for j in range(n)]
        return MatrixPencil(gt, ht, cols=m)


def is_regular(p: MatrixPencil) -> bool:
    """det(lam*G + H) is not the zero polynomial (square pencils only)."""
    m, n = p.shape
    if m != n:
        raise NotSquare("regularity is defined for square pencils")
    return not poly_det(p.as_poly()).is_zero()


def is_strictly_regular(p: MatrixPencil) -> bool:
    m, n = p.shape
    if m != n:
        raise NotSquare("strict regularity is defined for square pencils")
    return linalg.det(p.g_list()) != 0 and linalg.det(p.h_list()) != 0


def _shift(m: int):
    """m x m nilpotent with ones on the superdiagonal."""
    out = linalg.mzeros(m, m)
    for i in range(m - 1):
        out[i][i + 1] = ONE
    return out


def canonical_block(kind: str, m: int) -> MatrixPencil:
    """The canonical pencils; J_m is the transpose of L_m."""
    if kind in ("K", "N", "H"):
        if m < 1:
            raise InvalidIndex(f"{kind}-block needs size >= 1, got {m}")
    elif kind in ("L", "J"):
        if m < 0:
            raise InvalidIndex(f"{kind}-block needs size >= 0, got {m}")
    else:
        raise InvalidIndex(f"unknown block kind {kind!r}")
    if kind == "K":
        return MatrixPencil(linalg.midentity(m), _shift(m))
    if kind == "N":
        return MatrixPencil(_shift(m), linalg.midentity(m))
    if kind == "H":
        # representative strictly regular block; kcf stores actual matrices
        return MatrixPencil(linalg.midentity(m), linalg.midentity(m))
    if kind == "L":
        g = [[ONE if i == j else ZERO for j in range(m + 1)] for i in range(m)]
        h = [[ONE if i + 1 == j else ZERO for j in range(m + 1)] for i in range(m)]
        return MatrixPencil(g, h, cols=m + 1)
    # J
    lm = canonical_block("L", m)
    return lm.transpose()


def block_nullspace(kind: str, m: int, lam0) -> list:
    """Exact right null basis of the evaluated canonical block.

    Closed forms: L always drops column rank with null vector
    col{1, (-lam0)^j}; K is singular only at zero with null vector
    col{1, 0}; N and J never drop column rank.  H-block eigenvalues are
    not enumerated here.
    """
    lam0 = as_rat(lam0)
    if kind == "L":
        basis = [[ONE]]
        p = ONE
        for _ in range(m):
            p = p * (-lam0)
            basis.append([p])
        return basis
    if kind == "K":
        if m < 1:
            raise InvalidIndex("K-block needs size >= 1")
        if lam0 == 0:
            return [[ONE]] + [[ZERO] for _ in range(m - 1)]
        return []
    if kind in ("N", "J"):
        return []
    if kind == "H":
        raise InvalidIndex("H-block singular values are not enumerated")
    raise InvalidIndex(f"unknown block kind {kind!r}")


@dataclass(frozen=True)
class KroneckerBlock:
    kind: str
    size: int
    g: tuple = ()
    h: tuple = ()

    def pencil(self) -> MatrixPencil:
        if self.kind == "H":
            return MatrixPencil(self.g, self.h)
        return canonical_block(self.kind, self.size)

    @property
    def shape(self) -> Tuple[int, int]:
        if self.kind == "L":
            return self.size, self.size + 1
        if self.kind == "J":
            return self.size + 1, self.size
        return self.size, self.size


@dataclass(frozen=True)
class KroneckerForm:
    """pencil == U * blockdiag(blocks)(lam) * V with constant invertible U, V.

    Blocks are ordered L (ascending), H, K, N, J; the L-first ordering is
    what the identifiability pencil chain consumes.
    """

    u: list
    v: list
    blocks: List[KroneckerBlock]

    @property
    def zeta_l(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "L")

    @property
    def zeta_k(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "K")

    @property
    def zeta_n(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "N")

    @property
    def zeta_j(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "J")

    @property
    def xi_h(self) -> int:
        return sum(b.size for b in self.blocks if b.kind == "H")

    def indices(self, kind: str) -> List[int]:
        return [b.size for b in self.blocks if b.kind == kind]

    @property
    def l_column_count(self) -> int:
        """Total column count of the L part: zeta_L + sum of L indices."""
        return sum(b.size + 1 for b in self.blocks if b.kind == "L")

    def inventory(self):
        """Multiset signature of the block structure."""
        return tuple(sorted((b.kind, b.size) for b in self.blocks))

    def block_coefficients(self):
        """Coefficient matrices of blockdiag(blocks), with declared shapes."""
        rows = sum(b.shape[0] for b in self.blocks)
        cols = sum(b.shape[1] for b in self.blocks)
        gk = linalg.mzeros(rows, cols)
        hk = linalg.mzeros(rows, cols)
        r0 = c0 = 0
        for b in self.blocks:
            p = b.pencil()
            br, bc = b.shape
            for i in range(br):
                for j in range(bc):
                    gk[r0 + i][c0 + j] = p.g[i][j]
                    hk[r0 + i][c0 + j] = p.h[i][j]
            r0 += br
            c0 += bc
        return gk, hk

    def reassemble(self) -> MatrixPencil:
        m = len(self.u)
        n = len(self.v)
        if m == 0:
            return MatrixPencil([], [], cols=n)
        if n == 0:
            return MatrixPencil([[] for _ in range(m)], [[] for _ in range(m)])
        gk, hk = self.block_coefficients()
        return MatrixPencil(
            linalg.mmul(linalg.mmul(self.u, gk), self.v),
            linalg.mmul(linalg.mmul(self.u, hk), self.v),
        )


# ---------------------------------------------------------------------------
# minimal polynomial null vectors
# ---------------------------------------------------------------------------


def _stacked_null_matrix(g, h, d):
    """Coefficient matrix whose kernel encodes degree-d polynomial null vectors.

    A polynomial x(lam) = sum x_k lam^k satisfies (lam*G + H) x(lam) = 0
    iff H x_0 = 0, G x_{k-1} + H x_k = 0 for k=1..d, and G x_d = 0.
    """
    m, n = linalg.mshape(g)
    rows = (d + 2) * m
    cols = (d + 1) * n
    out = linalg.mzeros(rows, cols)
    for k in range(d + 1):
        # H goes in block row k, G in block row k+1, both at block column k
        for i in range(m):
            for j in range(n):
                if h[i][j]:
                    out[k * m + i][k * n + j] = h[i][j]
                if g[i][j]:
                    out[(k + 1) * m + i][k * n + j] = g[i][j]
    return out


def minimal_null_polynomial(g, h) -> Optional[List[list]]:
    """Coefficient vectors [x_0, .., x_eps] of a minimal-degree right null
    polynomial of lam*G + H, or None when the pencil has full normal
    column rank."""
    m, n = linalg.mshape(g)
    if n == 0:
        return None
    if poly_rank(PolyMatrix.pencil(g, h)) == n:
        return None
    for d in range(0, n):
        ns = linalg.nullspace(_stacked_null_matrix(g, h, d))
        if ns:
            coeff = [[ns[k * n + i][0] for i in range(n)] for k in range(d + 1)]
            return coeff
    raise AssertionError("rank-deficient pencil without a null polynomial")


# ---------------------------------------------------------------------------
# nilpotent Jordan basis and Fitting decomposition
# ---------------------------------------------------------------------------


def _nilpotent_jordan(a):
    """Basis S and descending sizes with S^-1 a S = nilpotent Jordan blocks."""
    n = linalg.mshape(a)[0]
    if n == 0:
        return [], []
    powers = [linalg.midentity(n)]
    while not linalg.is_zero_matrix(powers[-1]):
        powers.append(linalg.mmul(powers[-1], a))
        if len(powers) > n + 1:
            raise ValueError("matrix is not nilpotent")
    index = len(powers) - 1  # smallest p with a^p = 0
    kernels = [linalg.nullspace(powers[j]) if j else [] for j in range(index + 1)]

    chains = []  # (height, top vector)
    carried = []  # columns: images at the current height of taller chains
    for j in range(index, 0, -1):
        base_cols = []
        if kernels[j - 1]:
            base_cols.append(kernels[j - 1])
        if carried:
            base_cols.append(carried)
        base = linalg.mhstack(base_cols) if base_cols else []
        fresh = linalg.extend_independent(base, kernels[j])
        n_fresh = linalg.mshape(fresh)[1] if fresh else 0
        for t in range(n_fresh):
            chains.append((j, [fresh[i][t] for i in range(n)]))
        # push every chain passing through this height down one level
        stack = []
        if carried:
            stack.append(carried)
        if fresh:
            stack.append(fresh)
        if stack:
            carried = linalg.mmul(a, linalg.mhstack(stack))
        else:
            carried = []

    chains.sort(key=lambda c: -c[0])
    cols = [[] for _ in range(n)]
    sizes = []
    for height, top in chains:
        sizes.append(height)
        vecs = [top]
        for _ in range(height - 1):
            vecs.append([sum(a[i][k] * vecs[-1][k] for k in range(n)) for i in range(n)])
        vecs.reverse()  # a^(h-1) v first, top last
        for vcol in vecs:
            for i in range(n):
                cols[i].append(vcol[i])
    s = cols
    if linalg.mshape(s) != (n, n):
        raise AssertionError("nilpotent Jordan basis is not square")
    return s, sizes


def _fitting(a):
    """S, r with S^-1 a S = diag(core, nil), core invertible r x r."""
    n = linalg.mshape(a)[0]
    power = linalg.midentity(n)
    prev_rank = n + 1
    for _ in range(n + 1):
        r = linalg.rank(power)
        if r == prev_rank:
            break
        prev_rank = r
        power = linalg.mmul(power, a)
    col = linalg.colspace(power)
    ker = linalg.nullspace(power)
    parts = [p for p in (col, ker) if p]
    s = linalg.mhstack(parts) if parts else linalg.midentity(n)
    if linalg.mshape(s) != (n, n):
        raise AssertionError("Fitting decomposition basis is not square")
    return s, prev_rank


# ---------------------------------------------------------------------------
# the KCF itself
# ---------------------------------------------------------------------------


def _peel_singular_column(g, h):
    """Split lam*G+H into blockdiag(L_eps, B) by one strict equivalence.

    Returns (eps, u, v, g2, h2) with lam*G+H == u * blockdiag(L_eps, lam*g2+h2) * v.
    Assumes a right null polynomial exists.
    """
    m, n = linalg.mshape(g)
    coeffs = minimal_null_polynomial(g, h)
    eps = len(coeffs) - 1

    # alternating sign twist makes the peeled block exactly canonical
    x_cols = [[] for _ in range(n)]
    for j, xj in enumerate(coeffs):
        sgn = 1 if j % 2 == 0 else -1
        for i in range(n):
            x_cols[i].append(sgn * xj[i])
    u_cols = [[] for _ in range(m)]
    for k in range(1, eps + 1):
        uk = [sum(g[i][t] * coeffs[k - 1][t] for t in range(n)) for i in range(m)]
        sgn = 1 if (k + 1) % 2 == 0 else -1
        for i in range(m):
            u_cols[i].append(sgn * uk[i])

    v_full = linalg.complete_basis(x_cols, n)
    u_full = linalg.complete_basis(u_cols, m) if eps > 0 else linalg.midentity(m)
    if linalg.rank(v_full) != n or linalg.rank(u_full) != m:
        raise AssertionError("peeling bases are singular")

    u_inv = linalg.inv(u_full)
    gn = linalg.mmul(linalg.mmul(u_inv, g), v_full)
    hn = linalg.mmul(linalg.mmul(u_inv, h), v_full)

    # verify the carved shape: top-left L_eps, zero below it
    lblk = canonical_block("L", eps)
    for i in range(eps):
        for j in range(eps + 1):
            if gn[i][j] != lblk.g[i][j] or hn[i][j] != lblk.h[i][j]:
                raise AssertionError("peeled block is not canonical")
    for i in range(eps, m):
        for j in range(eps + 1):
            if gn[i][j] != 0 or hn[i][j] != 0:
                raise AssertionError("sub-pencil leaks below the peeled block")

    m2, n2 = m - eps, n - eps - 1
    g2 = [[gn[eps + i][eps + 1 + j] for j in range(n2)] for i in range(m2)]
    h2 = [[hn[eps + i][eps + 1 + j] for j in range(n2)] for i in range(m2)]

    u_step = u_full
    v_step = linalg.inv(v_full)

    if eps > 0 and n2 > 0:
        # decouple the coupling W: find constant Y, Z with L Z + Y B = W
        w1 = [[gn[i][eps + 1 + j] for j in range(n2)] for i in range(eps)]
        w0 = [[hn[i][eps + 1 + j] for j in range(n2)] for i in range(eps)]
        if not (linalg.is_zero_matrix(w1) and linalg.is_zero_matrix(w0)):
            f_mat = lblk.g_list()  # eps x (eps+1)
            e_mat = lblk.h_list()
            i_n2 = linalg.midentity(n2)
            i_eps = linalg.midentity(eps)
            top = linalg.mhstack(
                [linalg.kron(i_n2, f_mat), linalg.kron(linalg.mtranspose(g2), i_eps)]
            )
            bot = linalg.mhstack(
                [linalg.kron(i_n2, e_mat), linalg.kron(linalg.mtranspose(h2), i_eps)]
            )
            rhs = [[x] for x in (linalg.vec(w1) + linalg.vec(w0))]
            sol = linalg.solve_any(linalg.mvstack([top, bot]), rhs)
            if sol is None:
                raise AssertionError("decoupling system inconsistent; index not minimal")
            zlen = (eps + 1) * n2
            z = linalg.unvec([row[0] for row in sol[:zlen]], eps + 1, n2)
            y = linalg.unvec([row[0] for row in sol[zlen:]], eps, m2)
            # u_step *= [[I, Y], [0, I]];  v_step = [[I, Z], [0, I]] * v_step
            uy = linalg.midentity(m)
            for i in range(eps):
                for j in range(m2):
                    uy[i][eps + j] = y[i][j]
            vz = linalg.midentity(n)
            for i in range(eps + 1):
                for j in range(n2):
                    vz[i][eps + 1 + j] = z[i][j]
            u_step = linalg.mmul(u_step, uy)
            v_step = linalg.mmul(vz, v_step)

    return eps, u_step, v_step, g2, h2


def _kcf_core(g, h):
    """Recursive exact KCF; returns (u, blocks, v)."""
    m, n = linalg.mshape(g)
    if m == 0 and n == 0:
        return [], [], []
    if m == 0:
        return [], [KroneckerBlock("L", 0)] * n, linalg.midentity(n)
    if n == 0:
        return linalg.midentity(m), [KroneckerBlock("J", 0)] * m, []

    pm = PolyMatrix.pencil(g, h)
    r = poly_rank(pm)

    if r < n:
        eps, u1, v1, g2, h2 = _peel_singular_column(g, h)
        u2, blocks2, v2 = _kcf_core(g2, h2)
        lrows, lcols = eps, eps + 1
        u = linalg.mmul(u1, linalg.mblockdiag([linalg.midentity(lrows), u2]))
        v = linalg.mmul(linalg.mblockdiag([linalg.midentity(lcols), v2]), v1)
        return u, [KroneckerBlock("L", eps)] + blocks2, v

    if r < m:
        # left singular structure: peel one L from the transpose
        gt = linalg.mtranspose(g)
        ht = linalg.mtranspose(h)
        eps, u1, v1, g2t, h2t = _peel_singular_column(gt, ht)
        u2, blocks2, v2 = _kcf_core(linalg.mtranspose(g2t), linalg.mtranspose(h2t))
        jrows, jcols = eps + 1, eps
        u = linalg.mmul(linalg.mtranspose(v1), linalg.mblockdiag([linalg.midentity(jrows), u2]))
        v = linalg.mmul(linalg.mblockdiag([linalg.midentity(jcols), v2]), linalg.mtranspose(u1))
        return u, [KroneckerBlock("J", eps)] + blocks2, v

    # regular part: m == n, det not identically zero
    if m != n:
        raise AssertionError("full-rank non-square pencil escaped the singular passes")
    c = None
    k = 0
    while c is None:
        for cand in (as_rat(k), as_rat(-k)):
            trial = [[cand * g[i][j] + h[i][j] for j in range(n)] for i in range(n)]
            if linalg.det(trial) != 0:
                c = cand
                base = trial
                break
        k += 1
        if k > n + 1:
            raise AssertionError("no regular evaluation point found for a regular pencil")

    w = linalg.mmul(linalg.inv(base), g)
    # lam*G + H == base * (lam*W + (I - c*W))
    s1, rr = _fitting(w)
    s1_inv = linalg.inv(s1)
    wt = linalg.mmul(linalg.mmul(s1_inv, w), s1)
    core = [[wt[i][j] for j in range(rr)] for i in range(rr)]
    nil = [[wt[i][j] for j in range(rr, n)] for i in range(rr, n)]
    for i in range(rr):
        for j in range(rr, n):
            if wt[i][j] != 0 or wt[j][i] != 0:
                raise AssertionError("Fitting blocks are coupled")

    blocks: List[KroneckerBlock] = []
    u_parts, v_parts = [], []

    q = n - rr
    if rr > 0:
        # lam*core + (I - c*core), core invertible: split zero eigenvalue off
        a = linalg.msub(linalg.inv(core), linalg.mscale(linalg.midentity(rr), c))
        # lam*core + I - c*core == core * (lam*I + A)
        s2, r2 = _fitting(a)
        s2_inv = linalg.inv(s2)
        at = linalg.mmul(linalg.mmul(s2_inv, a), s2)
        a_reg = [[at[i][j] for j in range(r2)] for i in range(r2)]
        a_nil = [[at[i][j] for j in range(r2, rr)] for i in range(r2, rr)]
        s3, k_sizes = _nilpotent_jordan(a_nil)
        if r2 > 0:
            blocks.append(
                KroneckerBlock(
                    "H",
                    r2,
                    tuple(tuple(row) for row in linalg.midentity(r2)),
                    tuple(tuple(row) for row in a_reg),
                )
            )
        for sz in k_sizes:
            blocks.append(KroneckerBlock("K", sz))
        s23 = linalg.mmul(s2, linalg.mblockdiag([linalg.midentity(r2), s3]))
        # lam*I + A == s23 (lam*I + diag(a_reg, jordan)) s23^-1
        u_parts.append(linalg.mmul(core, s23))
        v_parts.append(linalg.inv(s23))

    if q > 0:
        # lam*nil + (I - c*nil), nil nilpotent: pure infinite structure
        i_q = linalg.midentity(q)
        imcn = linalg.msub(i_q, linalg.mscale(nil, c))
        ntil = linalg.mmul(linalg.inv(imcn), nil)
        s4, n_sizes = _nilpotent_jordan(ntil)
        for sz in n_sizes:
            blocks.append(KroneckerBlock("N", sz))
        u_parts.append(linalg.mmul(imcn, s4))
        v_parts.append(linalg.inv(s4))

    u = linalg.mmul(linalg.mmul(base, s1), linalg.mblockdiag(u_parts))
    v = linalg.mmul(linalg.mblockdiag(v_parts), s1_inv)
    return u, blocks, v


_KIND_ORDER = {"L": 0, "H": 1, "K": 2, "N": 3, "J": 4}


def kcf(p: MatrixPencil) -> KroneckerForm:
    """Exact Kronecker canonical form with verified reassembly."""
    g, h = p.g_list(), p.h_list()
    u, blocks, v = _kcf_core(g, h)

    # reorder blocks to the canonical L, H, K, N, J layout by permuting
    # the corresponding column slices of U and row slices of V
    m, n = p.shape
    row_offsets, col_offsets = [], []
    r0 = c0 = 0
    for b in blocks:
        br, bc = b.shape
        row_offsets.append(r0)
        col_offsets.append(c0)
        r0 += br
        c0 += bc
    order = sorted(
        range(len(blocks)), key=lambda i: (_KIND_ORDER[blocks[i].kind], blocks[i].size)
    )
    u_cols, v_rows = [], []
    for idx in order:
        br, bc = blocks[idx].shape
        for t in range(br):
            u_cols.append([u[i][row_offsets[idx] + t] for i in range(m)])
        for t in range(bc):
            v_rows.append(v[col_offsets[idx] + t])
    u_new = [[col[i] for col in u_cols] for i in range(m)]
    v_new = [list(row) for row in v_rows]
    form = KroneckerForm(u=u_new, v=v_new, blocks=[blocks[i] for i in order])

    back = form.reassemble()
    if back != p:
        raise AssertionError("KCF reassembly failed")
    return form
