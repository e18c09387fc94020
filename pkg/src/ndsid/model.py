"""Networked dynamic system model: LFT subsystems, interconnection, TFMs.

A subsystem is a state-space block whose system matrices depend on a
parameter matrix P through nominal + H * P * (I - G*P)^-1 * F.  Subsystems
are coupled by v = Phi * z, where Phi is the subsystem connection matrix.
All matrices are exact rationals; every transfer matrix below is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

from . import linalg
from .errors import IllPosedSubsystem, ShapeMismatch
from .polymat import PolyMatrix, RatMatrix, rat_inverse
from .ratpoly import Poly, as_rat


def _grid(rows, r, c, name):
    out = [[as_rat(x) for x in row] for row in rows]
    if len(out) != r or any(len(row) != c for row in out):
        raise ShapeMismatch(f"{name} must be {r}x{c}")
    return tuple(tuple(row) for row in out)


@dataclass(frozen=True)
class Dims:
    m_u: int
    m_v: int
    m_x: int
    m_y: int
    m_z: int
    m_g: int = 0
    m_p: int = 0

    def __post_init__(self):
        for f in ("m_u", "m_v", "m_x", "m_y", "m_z", "m_g", "m_p"):
            if getattr(self, f) < 0:
                raise ShapeMismatch(f"dimension {f} must be nonnegative")


@dataclass(frozen=True)
class SubsystemRealized:
    """Constant system matrices of one subsystem (state, internal, external)."""

    dims: Dims
    a_xx: tuple
    a_xv: tuple
    b_x: tuple
    a_zx: tuple
    a_zv: tuple
    b_z: tuple
    c_x: tuple
    c_v: tuple
    d_u: tuple

    def __post_init__(self):
        d = self.dims
        object.__setattr__(self, "a_xx", _grid(self.a_xx, d.m_x, d.m_x, "A_xx"))
        object.__setattr__(self, "a_xv", _grid(self.a_xv, d.m_x, d.m_v, "A_xv"))
        object.__setattr__(self, "b_x", _grid(self.b_x, d.m_x, d.m_u, "B_x"))
        object.__setattr__(self, "a_zx", _grid(self.a_zx, d.m_z, d.m_x, "A_zx"))
        object.__setattr__(self, "a_zv", _grid(self.a_zv, d.m_z, d.m_v, "A_zv"))
        object.__setattr__(self, "b_z", _grid(self.b_z, d.m_z, d.m_u, "B_z"))
        object.__setattr__(self, "c_x", _grid(self.c_x, d.m_y, d.m_x, "C_x"))
        object.__setattr__(self, "c_v", _grid(self.c_v, d.m_y, d.m_v, "C_v"))
        object.__setattr__(self, "d_u", _grid(self.d_u, d.m_y, d.m_u, "D_u"))


@dataclass(frozen=True)
class SubsystemLft:
    """LFT-parametrized subsystem: nominal blocks plus H/F/G modulation and P."""

    dims: Dims
    a_xx0: tuple
    a_xv0: tuple
    b_x0: tuple
    a_zx0: tuple
    a_zv0: tuple
    b_z0: tuple
    c_x0: tuple
    c_v0: tuple
    d_u0: tuple
    h_x: tuple
    h_z: tuple
    h_y: tuple
    f_x: tuple
    f_v: tuple
    f_u: tuple
    g: tuple
    p: tuple

    def __post_init__(self):
        d = self.dims
        object.__setattr__(self, "a_xx0", _grid(self.a_xx0, d.m_x, d.m_x, "A_xx0"))
        object.__setattr__(self, "a_xv0", _grid(self.a_xv0, d.m_x, d.m_v, "A_xv0"))
        object.__setattr__(self, "b_x0", _grid(self.b_x0, d.m_x, d.m_u, "B_x0"))
        object.__setattr__(self, "a_zx0", _grid(self.a_zx0, d.m_z, d.m_x, "A_zx0"))
        object.__setattr__(self, "a_zv0", _grid(self.a_zv0, d.m_z, d.m_v, "A_zv0"))
        object.__setattr__(self, "b_z0", _grid(self.b_z0, d.m_z, d.m_u, "B_z0"))
        object.__setattr__(self, "c_x0", _grid(self.c_x0, d.m_y, d.m_x, "C_x0"))
        object.__setattr__(self, "c_v0", _grid(self.c_v0, d.m_y, d.m_v, "C_v0"))
        object.__setattr__(self, "d_u0", _grid(self.d_u0, d.m_y, d.m_u, "D_u0"))
        object.__setattr__(self, "h_x", _grid(self.h_x, d.m_x, d.m_p, "H_x"))
        object.__setattr__(self, "h_z", _grid(self.h_z, d.m_z, d.m_p, "H_z"))
        object.__setattr__(self, "h_y", _grid(self.h_y, d.m_y, d.m_p, "H_y"))
        object.__setattr__(self, "f_x", _grid(self.f_x, d.m_g, d.m_x, "F_x"))
        object.__setattr__(self, "f_v", _grid(self.f_v, d.m_g, d.m_v, "F_v"))
        object.__setattr__(self, "f_u", _grid(self.f_u, d.m_g, d.m_u, "F_u"))
        object.__setattr__(self, "g", _grid(self.g, d.m_g, d.m_p, "G"))
        object.__setattr__(self, "p", _grid(self.p, d.m_p, d.m_g, "P"))

    @staticmethod
    def from_realized(s: SubsystemRealized) -> "SubsystemLft":
        """Promote a realized subsystem: zero parameter block, nominal = realized."""
        d = s.dims
        dims = Dims(d.m_u, d.m_v, d.m_x, d.m_y, d.m_z, 0, 0)
        empty_g = [[] for _ in range(0)]
        return SubsystemLft(
            dims=dims,
            a_xx0=s.a_xx,
            a_xv0=s.a_xv,
            b_x0=s.b_x,
            a_zx0=s.a_zx,
            a_zv0=s.a_zv,
            b_z0=s.b_z,
            c_x0=s.c_x,
            c_v0=s.c_v,
            d_u0=s.d_u,
            h_x=[[] for _ in range(d.m_x)],
            h_z=[[] for _ in range(d.m_z)],
            h_y=[[] for _ in range(d.m_y)],
            f_x=empty_g,
            f_v=empty_g,
            f_u=empty_g,
            g=empty_g,
            p=empty_g,
        )


@dataclass(frozen=True)
class Scm:
    """Subsystem connection matrix with an optional fixed-zero pattern."""

    matrix: tuple
    zero_pattern: Optional[tuple] = None

    def __post_init__(self):
        mat = tuple(tuple(as_rat(x) for x in row) for row in self.matrix)
        object.__setattr__(self, "matrix", mat)
        if self.zero_pattern is not None:
            pat = tuple(tuple(bool(x) for x in row) for row in self.zero_pattern)
            if len(pat) != len(mat) or any(
                len(pr) != len(mr) for pr, mr in zip(pat, mat)
            ):
                raise ShapeMismatch("zero pattern shape differs from Phi")
            for pr, mr in zip(pat, mat):
                for masked, val in zip(pr, mr):
                    if masked and val != 0:
                        raise ShapeMismatch("fixed-zero Phi entry is nonzero")
            object.__setattr__(self, "zero_pattern", pat)

    @property
    def shape(self):
        return len(self.matrix), len(self.matrix[0]) if self.matrix else 0

    def as_list(self):
        return [list(r) for r in self.matrix]

    def block(self, row_dims, col_dims, i, j):
        """Sub-block (i, j) when rows/cols are partitioned by subsystem."""
        r0 = sum(row_dims[:i])
        c0 = sum(col_dims[:j])
        return [
            [self.matrix[r0 + a][c0 + b] for b in range(col_dims[j])]
            for a in range(row_dims[i])
        ]


@dataclass(frozen=True)
class NdsModel:
    subsystems: tuple
    phi: Scm

    def __init__(self, subsystems: Sequence[SubsystemLft], phi):
        subs = []
        for s in subsystems:
            if isinstance(s, SubsystemRealized):
                s = SubsystemLft.from_realized(s)
            subs.append(s)
        object.__setattr__(self, "subsystems", tuple(subs))
        if not isinstance(phi, Scm):
            phi = Scm(phi)
        object.__setattr__(self, "phi", phi)
        mv = sum(s.dims.m_v for s in subs)
        mz = sum(s.dims.m_z for s in subs)
        if phi.shape != (mv, mz):
            raise ShapeMismatch(
                f"Phi must be {mv}x{mz} for this interconnection, got {phi.shape}"
            )

    @property
    def n(self) -> int:
        return len(self.subsystems)

    def v_dims(self) -> List[int]:
        return [s.dims.m_v for s in self.subsystems]

    def z_dims(self) -> List[int]:
        return [s.dims.m_z for s in self.subsystems]

    def u_dims(self) -> List[int]:
        return [s.dims.m_u for s in self.subsystems]

    def y_dims(self) -> List[int]:
        return [s.dims.m_y for s in self.subsystems]


@dataclass(frozen=True)
class TfmBundle:
    """The four subsystem (or block-diagonal network) transfer matrices."""

    g_yu: RatMatrix
    g_yv: RatMatrix
    g_zu: RatMatrix
    g_zv: RatMatrix


@dataclass(frozen=True)
class HtfmBundle:
    """Auxiliary-signal transfer matrices of the augmented subsystem."""

    h_wr: RatMatrix
    h_wv: RatMatrix
    h_wu: RatMatrix
    h_zr: RatMatrix
    h_zv: RatMatrix
    h_zu: RatMatrix
    h_yr: RatMatrix
    h_yv: RatMatrix
    h_yu: RatMatrix


def well_posed_subsystem(s: SubsystemLft) -> bool:
    """I - G(i) P(i) invertible."""
    d = s.dims
    gp = linalg.mmul(s.g, s.p) if d.m_p else linalg.mzeros(d.m_g, d.m_g)
    return linalg.det(linalg.msub(linalg.midentity(d.m_g), gp)) != 0


def realize(s: SubsystemLft) -> SubsystemRealized:
    """Evaluate the LFT: nominal + H * P * (I - G*P)^-1 * F."""
    d = s.dims
    if not well_posed_subsystem(s):
        raise IllPosedSubsystem("I - G*P is singular")
    if d.m_p == 0 or d.m_g == 0:
        mod = linalg.mzeros(d.m_x + d.m_z + d.m_y, d.m_x + d.m_v + d.m_u)
    else:
        gp = linalg.mmul(s.g, s.p)
        core = linalg.inv(linalg.msub(linalg.midentity(d.m_g), gp))
        h = linalg.mvstack([s.h_x, s.h_z, s.h_y])
        f = linalg.mhstack([s.f_x, s.f_v, s.f_u])
        mod = linalg.mmul(linalg.mmul(linalg.mmul(h, s.p), core), f)
    nom = linalg.mvstack(
        [
            linalg.mhstack([s.a_xx0, s.a_xv0, s.b_x0]),
            linalg.mhstack([s.a_zx0, s.a_zv0, s.b_z0]),
            linalg.mhstack([s.c_x0, s.c_v0, s.d_u0]),
        ]
    )
    tot = linalg.madd(nom, mod)

    def cut(r0, r1, c0, c1):
        return [row[c0:c1] for row in tot[r0:r1]]

    x1, x2 = d.m_x, d.m_x + d.m_z
    c1, c2 = d.m_x, d.m_x + d.m_v
    return SubsystemRealized(
        dims=d,
        a_xx=cut(0, x1, 0, c1),
        a_xv=cut(0, x1, c1, c2),
        b_x=cut(0, x1, c2, c2 + d.m_u),
        a_zx=cut(x1, x2, 0, c1),
        a_zv=cut(x1, x2, c1, c2),
        b_z=cut(x1, x2, c2, c2 + d.m_u),
        c_x=cut(x2, x2 + d.m_y, 0, c1),
        c_v=cut(x2, x2 + d.m_y, c1, c2),
        d_u=cut(x2, x2 + d.m_y, c2, c2 + d.m_u),
    )


def resolvent(a_xx) -> RatMatrix:
    """(lam*I - A)^-1, exactly."""
    n = linalg.mshape(a_xx)[0]
    lam_i_minus_a = PolyMatrix(
        [
            [
                Poly((-a_xx[i][j], 1)) if i == j else Poly((-a_xx[i][j],))
                for j in range(n)
            ]
            for i in range(n)
        ],
        cols=n,
    )
    return rat_inverse(lam_i_minus_a.to_rat())


def subsystem_tfms(s: SubsystemRealized) -> TfmBundle:
    """[G_yu G_yv; G_zu G_zv] from the realized state space, exactly."""
    d = s.dims
    res = resolvent([list(r) for r in s.a_xx])
    c_stack = RatMatrix.from_const(linalg.mvstack([s.c_x, s.a_zx]))
    b_side = RatMatrix.from_const(linalg.mhstack([s.b_x, s.a_xv]))
    dyn = c_stack * res * b_side
    g_yu = RatMatrix.from_const(s.d_u) + dyn.submatrix(range(d.m_y), range(d.m_u))
    g_yv = RatMatrix.from_const(s.c_v) + dyn.submatrix(
        range(d.m_y), range(d.m_u, d.m_u + d.m_v)
    )
    g_zu = RatMatrix.from_const(s.b_z) + dyn.submatrix(
        range(d.m_y, d.m_y + d.m_z), range(d.m_u)
    )
    g_zv = RatMatrix.from_const(s.a_zv) + dyn.submatrix(
        range(d.m_y, d.m_y + d.m_z), range(d.m_u, d.m_u + d.m_v)
    )
    return TfmBundle(g_yu=g_yu, g_yv=g_yv, g_zu=g_zu, g_zv=g_zv)


def augmented_h_tfms(s: SubsystemLft) -> HtfmBundle:
    """The nine auxiliary TFMs of the augmented (parameter-extracted) subsystem."""
    d = s.dims
    res = resolvent([list(r) for r in s.a_xx0])
    left = RatMatrix.from_const(linalg.mvstack([s.f_x, s.a_zx0, s.c_x0]))
    right = RatMatrix.from_const(linalg.mhstack([s.h_x, s.a_xv0, s.b_x0]))
    dyn = left * res * right
    nom = RatMatrix.from_const(
        linalg.mvstack(
            [
                linalg.mhstack([s.g, s.f_v, s.f_u]),
                linalg.mhstack([s.h_z, s.a_zv0, s.b_z0]),
                linalg.mhstack([s.h_y, s.c_v0, s.d_u0]),
            ]
        )
    )
    full = nom + dyn
    r_w = range(d.m_g)
    r_z = range(d.m_g, d.m_g + d.m_z)
    r_y = range(d.m_g + d.m_z, d.m_g + d.m_z + d.m_y)
    c_r = range(d.m_p)
    c_v = range(d.m_p, d.m_p + d.m_v)
    c_u = range(d.m_p + d.m_v, d.m_p + d.m_v + d.m_u)
    return HtfmBundle(
        h_wr=full.submatrix(r_w, c_r),
        h_wv=full.submatrix(r_w, c_v),
        h_wu=full.submatrix(r_w, c_u),
        h_zr=full.submatrix(r_z, c_r),
        h_zv=full.submatrix(r_z, c_v),
        h_zu=full.submatrix(r_z, c_u),
        h_yr=full.submatrix(r_y, c_r),
        h_yv=full.submatrix(r_y, c_v),
        h_yu=full.submatrix(r_y, c_u),
    )


def lft_tfms(s: SubsystemLft) -> TfmBundle:
    """Subsystem TFMs expressed as an LFT of the parameter matrix."""
    if not well_posed_subsystem(s):
        raise IllPosedSubsystem("I - G*P is singular")
    d = s.dims
    h = augmented_h_tfms(s)
    if d.m_p == 0 or d.m_g == 0:
        return TfmBundle(g_yu=h.h_yu, g_yv=h.h_yv, g_zu=h.h_zu, g_zv=h.h_zv)
    p = RatMatrix.from_const(s.p)
    core = rat_inverse(RatMatrix.identity(d.m_g) - h.h_wr * p)
    zr_yr = RatMatrix.vstack([h.h_zr, h.h_yr])
    wv_wu = RatMatrix.hstack([h.h_wv, h.h_wu])
    mod = zr_yr * p * core * wv_wu
    g_zv = h.h_zv + mod.submatrix(range(d.m_z), range(d.m_v))
    g_zu = h.h_zu + mod.submatrix(range(d.m_z), range(d.m_v, d.m_v + d.m_u))
    g_yv = h.h_yv + mod.submatrix(range(d.m_z, d.m_z + d.m_y), range(d.m_v))
    g_yu = h.h_yu + mod.submatrix(
        range(d.m_z, d.m_z + d.m_y), range(d.m_v, d.m_v + d.m_u)
    )
    return TfmBundle(g_yu=g_yu, g_yv=g_yv, g_zu=g_zu, g_zv=g_zv)


def realize_all(m: NdsModel) -> List[SubsystemRealized]:
    return [realize(s) for s in m.subsystems]


def network_tfms(m: NdsModel) -> TfmBundle:
    """Block-diagonal network-level TFMs."""
    bundles = [subsystem_tfms(r) for r in realize_all(m)]
    return TfmBundle(
        g_yu=RatMatrix.block_diag([b.g_yu for b in bundles]),
        g_yv=RatMatrix.block_diag([b.g_yv for b in bundles]),
        g_zu=RatMatrix.block_diag([b.g_zu for b in bundles]),
        g_zv=RatMatrix.block_diag([b.g_zv for b in bundles]),
    )


def network_realized(m: NdsModel):
    """Block-diagonal realized matrices of the whole network, as Rat grids."""
    rs = realize_all(m)
    return {
        "a_xx": linalg.mblockdiag([r.a_xx for r in rs]),
        "a_xv": linalg.mblockdiag([r.a_xv for r in rs]),
        "b_x": linalg.mblockdiag([r.b_x for r in rs]),
        "a_zx": linalg.mblockdiag([r.a_zx for r in rs]),
        "a_zv": linalg.mblockdiag([r.a_zv for r in rs]),
        "b_z": linalg.mblockdiag([r.b_z for r in rs]),
        "c_x": linalg.mblockdiag([r.c_x for r in rs]),
        "c_v": linalg.mblockdiag([r.c_v for r in rs]),
        "d_u": linalg.mblockdiag([r.d_u for r in rs]),
    }


def well_posed_nds(m: NdsModel, phi: Optional[Scm] = None) -> bool:
    """I - Phi * diag(A_zv(i)) invertible (equivalently I - A_zv*Phi)."""
    phi = phi if phi is not None else m.phi
    a_zv = linalg.mblockdiag([realize(s).a_zv for s in m.subsystems])
    mv = linalg.mshape(a_zv)[1]
    prod = linalg.mmul(phi.as_list(), a_zv)
    return linalg.det(linalg.msub(linalg.midentity(mv), prod)) != 0
