import random

import pytest

from ndsid import linalg
from ndsid.distance import CircuitParams, circuit_example, circuit_nds
from ndsid.errors import IllPosedSubsystem, ShapeMismatch
from ndsid.model import (
    Dims,
    NdsModel,
    Scm,
    SubsystemLft,
    SubsystemRealized,
    augmented_h_tfms,
    lft_tfms,
    network_tfms,
    realize,
    subsystem_tfms,
    well_posed_nds,
    well_posed_subsystem,
)
from ndsid.polymat import RatMatrix, rat_det
from ndsid.ratpoly import Poly, RatFunc, as_rat


# ---------------------------------------------------------------------------
# helpers / oracles
# ---------------------------------------------------------------------------

def rand_rat(rng, span=3):
    return as_rat(rng.randint(-span, span)) / as_rat(rng.randint(1, span))


def rand_grid(rng, m, n, span=3):
    return [[rand_rat(rng, span) for _ in range(n)] for _ in range(m)]


def rand_subsystem(rng, with_params=True) -> SubsystemLft:
    d = Dims(
        m_u=rng.randint(1, 2),
        m_v=rng.randint(1, 2),
        m_x=rng.randint(1, 3),
        m_y=rng.randint(1, 2),
        m_z=rng.randint(1, 2),
        m_g=rng.randint(1, 2) if with_params else 0,
        m_p=rng.randint(1, 2) if with_params else 0,
    )
    while True:
        s = SubsystemLft(
            dims=d,
            a_xx0=rand_grid(rng, d.m_x, d.m_x),
            a_xv0=rand_grid(rng, d.m_x, d.m_v),
            b_x0=rand_grid(rng, d.m_x, d.m_u),
            a_zx0=rand_grid(rng, d.m_z, d.m_x),
            a_zv0=rand_grid(rng, d.m_z, d.m_v),
            b_z0=rand_grid(rng, d.m_z, d.m_u),
            c_x0=rand_grid(rng, d.m_y, d.m_x),
            c_v0=rand_grid(rng, d.m_y, d.m_v),
            d_u0=rand_grid(rng, d.m_y, d.m_u),
            h_x=rand_grid(rng, d.m_x, d.m_p),
            h_z=rand_grid(rng, d.m_z, d.m_p),
            h_y=rand_grid(rng, d.m_y, d.m_p),
            f_x=rand_grid(rng, d.m_g, d.m_x),
            f_v=rand_grid(rng, d.m_g, d.m_v),
            f_u=rand_grid(rng, d.m_g, d.m_u),
            g=rand_grid(rng, d.m_g, d.m_p),
            p=rand_grid(rng, d.m_p, d.m_g),
        )
        if well_posed_subsystem(s):
            return s


def cofactor_inverse(a):
    """Independent inverse oracle: adjugate over determinant."""
    n = linalg.mshape(a)[0]
    det = _cofactor_det(a)
    assert det != 0
    adj = linalg.mzeros(n, n)
    for i in range(n):
        for j in range(n):
            minor = [
                [a[r][c] for c in range(n) if c != j] for r in range(n) if r != i
            ]
            sign = as_rat(1) if (i + j) % 2 == 0 else as_rat(-1)
            adj[j][i] = sign * _cofactor_det(minor)
    return [[x / det for x in row] for row in adj]


def _cofactor_det(a):
    n = len(a)
    if n == 0:
        return as_rat(1)
    if n == 1:
        return a[0][0]
    total = as_rat(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in a[1:]]
        sign = as_rat(1) if j % 2 == 0 else as_rat(-1)
        total += sign * a[0][j] * _cofactor_det(minor)
    return total


def zero_sub(d: Dims, **overrides) -> SubsystemLft:
    fields = {
        "a_xx0": (d.m_x, d.m_x),
        "a_xv0": (d.m_x, d.m_v),
        "b_x0": (d.m_x, d.m_u),
        "a_zx0": (d.m_z, d.m_x),
        "a_zv0": (d.m_z, d.m_v),
        "b_z0": (d.m_z, d.m_u),
        "c_x0": (d.m_y, d.m_x),
        "c_v0": (d.m_y, d.m_v),
        "d_u0": (d.m_y, d.m_u),
        "h_x": (d.m_x, d.m_p),
        "h_z": (d.m_z, d.m_p),
        "h_y": (d.m_y, d.m_p),
        "f_x": (d.m_g, d.m_x),
        "f_v": (d.m_g, d.m_v),
        "f_u": (d.m_g, d.m_u),
        "g": (d.m_g, d.m_p),
        "p": (d.m_p, d.m_g),
    }
    kw = {name: linalg.mzeros(*shape) for name, shape in fields.items()}
    kw.update(overrides)
    return SubsystemLft(dims=d, **kw)


# ---------------------------------------------------------------------------
# well-posedness and realization
# ---------------------------------------------------------------------------

def test_well_posed_with_zero_g():
    d = Dims(1, 1, 1, 1, 1, 2, 2)
    s = zero_sub(d, p=rand_grid(random.Random(1), 2, 2))
    assert well_posed_subsystem(s)


def test_ill_posed_g_equals_p_equals_identity():
    d = Dims(1, 1, 1, 1, 1, 2, 2)
    s = zero_sub(d, g=linalg.midentity(2), p=linalg.midentity(2))
    assert not well_posed_subsystem(s)
    with pytest.raises(IllPosedSubsystem):
        realize(s)


def test_circuit_well_posed_for_all_k():
    for k in ("1/10", "1/2", "1"):
        s = circuit_example(CircuitParams(t=1, k1=k, k2=k))
        assert well_posed_subsystem(s)


def test_realize_zero_parameters_is_nominal():
    rng = random.Random(2)
    s = rand_subsystem(rng)
    s0 = SubsystemLft(
        dims=s.dims,
        a_xx0=s.a_xx0, a_xv0=s.a_xv0, b_x0=s.b_x0,
        a_zx0=s.a_zx0, a_zv0=s.a_zv0, b_z0=s.b_z0,
        c_x0=s.c_x0, c_v0=s.c_v0, d_u0=s.d_u0,
        h_x=s.h_x, h_z=s.h_z, h_y=s.h_y,
        f_x=s.f_x, f_v=s.f_v, f_u=s.f_u,
        g=s.g,
        p=linalg.mzeros(s.dims.m_p, s.dims.m_g),
    )
    r = realize(s0)
    assert r.a_xx == s.a_xx0 and r.a_xv == s.a_xv0 and r.b_x == s.b_x0
    assert r.a_zx == s.a_zx0 and r.a_zv == s.a_zv0 and r.b_z == s.b_z0
    assert r.c_x == s.c_x0 and r.c_v == s.c_v0 and r.d_u == s.d_u0


def test_realize_g_zero_p_identity_is_affine():
    # with G = 0 and P = I the LFT degenerates to nominal + H*F
    d = Dims(m_u=1, m_v=1, m_x=2, m_y=1, m_z=1, m_g=2, m_p=2)
    rng = random.Random(3)
    s = zero_sub(
        d,
        h_x=rand_grid(rng, 2, 2),
        h_z=rand_grid(rng, 1, 2),
        h_y=rand_grid(rng, 1, 2),
        f_x=rand_grid(rng, 2, 2),
        f_v=rand_grid(rng, 2, 1),
        f_u=rand_grid(rng, 2, 1),
        p=linalg.midentity(2),
    )
    r = realize(s)
    assert r.a_xx == tuple(map(tuple, linalg.mmul(s.h_x, s.f_x)))
    assert r.a_xv == tuple(map(tuple, linalg.mmul(s.h_x, s.f_v)))
    assert r.c_v == tuple(map(tuple, linalg.mmul(s.h_y, s.f_v)))


def test_circuit_realized_state_matrix():
    # P(I - G P)^-1 collapses to diag(k1, k2) for the circuit, so the
    # realized A_xx is -(1/T) [[3+k1,0,0],[1,2+k2,0],[1,0,1]]
    s = circuit_example(CircuitParams(t=1, k1="2/5", k2="9/10"))
    r = realize(s)
    want = [
        [as_rat("-17/5"), 0, 0],
        [-1, as_rat("-29/10"), 0],
        [-1, 0, -1],
    ]
    assert r.a_xx == tuple(tuple(as_rat(x) for x in row) for row in want)


# ---------------------------------------------------------------------------
# subsystem TFMs against the printed circuit closed forms
# ---------------------------------------------------------------------------

def _pole(t, c):
    """Monic factor lam + c/t corresponding to (lam*T + c)."""
    return Poly((as_rat(c) / as_rat(t), 1))


def circuit_gzu_closed_form(t, k1, k2):
    """Closed-form G_zu of the circuit subsystem.

    Derived independently from the realized state space (adjugate of the
    triangular resolvent): entries over the poles (lam T + 1),
    (lam T + k1 + 3), (lam T + k2 + 2).
    """
    t, k1, k2 = as_rat(t), as_rat(k1), as_rat(k2)
    one = Poly.one()
    p1 = _pole(t, 1)            # lam + 1/T
    pk1 = _pole(t, k1 + 3)      # lam + (k1+3)/T
    pk2 = _pole(t, k2 + 2)      # lam + (k2+2)/T
    e11 = RatFunc(one.scale((2 * k1 - 1) / t), pk1) + RatFunc(
        one.scale((2 * k2 - 1) / (t * t)), pk1 * pk2
    )
    e12 = RatFunc(one.scale((2 * k2 - 1) / t), pk2)
    e21 = RatFunc(one.scale(as_rat(-1) / (t * t)), p1 * pk1)
    e22 = RatFunc(one.scale(as_rat(-1) / t), p1)
    return RatMatrix([[e11, e12], [e21, e22]], cols=2)


def test_circuit_gzu_matches_printed_matrix():
    for t, k1, k2 in (("1", "2/5", "9/10"), ("2", "1/4", "3/4"), ("1/2", "9/10", "1/5")):
        s = circuit_example(CircuitParams(t=t, k1=k1, k2=k2))
        b = subsystem_tfms(realize(s))
        assert b.g_zu == circuit_gzu_closed_form(t, k1, k2)


def circuit_gzu_det_closed_form(t, k1):
    """det G_zu = -(2 k1 - 1) / ((lam T + 1)(lam T + k1 + 3))."""
    tq, k1q = as_rat(t), as_rat(k1)
    return RatFunc(
        Poly.one().scale(-(2 * k1q - 1) / (tq * tq)), _pole(t, 1) * _pole(t, k1q + 3)
    )


def test_circuit_gzu_determinant_formula():
    for t, k1, k2 in (("1", "2/5", "9/10"), ("3/2", "1/5", "1/3")):
        s = circuit_example(CircuitParams(t=t, k1=k1, k2=k2))
        b = subsystem_tfms(realize(s))
        assert rat_det(b.g_zu) == circuit_gzu_det_closed_form(t, k1)


def test_circuit_gzu_singular_exactly_at_half():
    s = circuit_example(CircuitParams(t="7/3", k1="1/2", k2="9/10"))
    assert rat_det(subsystem_tfms(realize(s)).g_zu).is_zero()
    s2 = circuit_example(CircuitParams(t="7/3", k1="1/2000", k2="9/10"))
    assert not rat_det(subsystem_tfms(realize(s2)).g_zu).is_zero()


def test_circuit_gyv_scalar_nonzero():
    s = circuit_example(CircuitParams(t=1, k1="2/5", k2="9/10"))
    b = subsystem_tfms(realize(s))
    assert b.g_yv.rows == 1 and b.g_yv.cols == 1
    assert not b.g_yv[0, 0].is_zero()


def test_tfms_static_and_scalar_resolvent():
    d = Dims(m_u=1, m_v=1, m_x=1, m_y=1, m_z=1, m_g=0, m_p=0)
    s = zero_sub(d, d_u0=[[as_rat(5)]])
    b = subsystem_tfms(realize(s))
    assert b.g_yu[0, 0] == RatFunc.const(5)
    assert b.g_yv.is_zero() and b.g_zu.is_zero() and b.g_zv.is_zero()
    # scalar resolvent: A=a, C_x=B_x=1 gives G_yu = 1/(lam - a)
    a = as_rat("3/7")
    s2 = zero_sub(d, a_xx0=[[a]], b_x0=[[1]], c_x0=[[1]])
    b2 = subsystem_tfms(realize(s2))
    assert b2.g_yu[0, 0] == RatFunc(Poly.one(), Poly((-a, 1)))


# ---------------------------------------------------------------------------
# augmented TFMs
# ---------------------------------------------------------------------------

def test_h_wr_constant_without_dynamic_path():
    d = Dims(m_u=1, m_v=1, m_x=2, m_y=1, m_z=1, m_g=2, m_p=2)
    rng = random.Random(4)
    g = rand_grid(rng, 2, 2)
    s = zero_sub(d, g=g)
    h = augmented_h_tfms(s)
    assert h.h_wr == RatMatrix.from_const(g)


def test_h_yr_scalar_resolvent():
    d = Dims(m_u=1, m_v=1, m_x=1, m_y=1, m_z=1, m_g=1, m_p=1)
    s = zero_sub(d, c_x0=[[1]], f_x=[[1]], h_x=[[1]], h_y=[[as_rat("1/3")]])
    h = augmented_h_tfms(s)
    want = RatFunc.const("1/3") + RatFunc(Poly.one(), Poly.x())
    assert h.h_yr[0, 0] == want


def test_circuit_h_wr_against_cofactor_resolvent():
    s = circuit_example(CircuitParams(t=1, k1="2/5", k2="9/10"))
    h = augmented_h_tfms(s)
    # oracle: I + F_x (lam I - A_xx0)^-1 H_x entrywise via adjugate inverse
    # evaluated at rational points (poles avoided)
    for lam in ("1", "-7/2", "5/3"):
        lam = as_rat(lam)
        a = [[lam * (1 if i == j else 0) - s.a_xx0[i][j] for j in range(3)] for i in range(3)]
        res = cofactor_inverse(a)
        want = linalg.madd(
            linalg.midentity(2), linalg.mmul(linalg.mmul(s.f_x, res), s.h_x)
        )
        assert h.h_wr.eval(lam) == want


# ---------------------------------------------------------------------------
# LFT route equals realized route (the module's central cross-check)
# ---------------------------------------------------------------------------

def test_lft_tfms_with_p_zero_equals_nominal_h_blocks():
    rng = random.Random(6)
    s = rand_subsystem(rng)
    s0 = SubsystemLft(
        dims=s.dims,
        a_xx0=s.a_xx0, a_xv0=s.a_xv0, b_x0=s.b_x0,
        a_zx0=s.a_zx0, a_zv0=s.a_zv0, b_z0=s.b_z0,
        c_x0=s.c_x0, c_v0=s.c_v0, d_u0=s.d_u0,
        h_x=s.h_x, h_z=s.h_z, h_y=s.h_y,
        f_x=s.f_x, f_v=s.f_v, f_u=s.f_u,
        g=s.g,
        p=linalg.mzeros(s.dims.m_p, s.dims.m_g),
    )
    b = lft_tfms(s0)
    h = augmented_h_tfms(s0)
    assert b.g_yv == h.h_yv and b.g_zu == h.h_zu and b.g_zv == h.h_zv and b.g_yu == h.h_yu


def test_lft_route_matches_realized_route_on_circuit():
    s = circuit_example(CircuitParams(t=1, k1="2/5", k2="9/10"))
    via_lft = lft_tfms(s)
    via_real = subsystem_tfms(realize(s))
    for name in ("g_yu", "g_yv", "g_zu", "g_zv"):
        assert getattr(via_lft, name) == getattr(via_real, name)


def test_lft_route_matches_realized_route_random():
    rng = random.Random(8)
    for _ in range(12):
        s = rand_subsystem(rng)
        via_lft = lft_tfms(s)
        via_real = subsystem_tfms(realize(s))
        for name in ("g_yu", "g_yv", "g_zu", "g_zv"):
            assert getattr(via_lft, name) == getattr(via_real, name)


# ---------------------------------------------------------------------------
# network assembly and NDS well-posedness
# ---------------------------------------------------------------------------

def test_network_tfms_block_structure():
    m = circuit_nds(
        CircuitParams(t=1, k1="2/5", k2="9/10"), CircuitParams(t=1, k1="3/5", k2="1/2")
    )
    net = network_tfms(m)
    assert net.g_zu.rows == 4 and net.g_zu.cols == 4
    assert net.g_yv.rows == 2 and net.g_yv.cols == 2
    # off-diagonal blocks are exactly zero
    for i in range(2):
        for j in range(2, 4):
            assert net.g_zu[i, j].is_zero()
            assert net.g_zu[j - 2 + 2, i if i < 2 else 0].is_zero()
    single = NdsModel([circuit_example(CircuitParams(t=1, k1="2/5", k2="9/10"))],
                      Scm([[0, 0]]))
    b = network_tfms(single)
    sub = subsystem_tfms(realize(single.subsystems[0]))
    assert b.g_zu == sub.g_zu and b.g_yv == sub.g_yv


def test_well_posed_nds_cases():
    m = circuit_nds(
        CircuitParams(t=1, k1="2/5", k2="9/10"), CircuitParams(t=1, k1="3/5", k2="1/2")
    )
    # the circuit has A_zv = 0, so any Phi is fine
    assert well_posed_nds(m)
    # scalar counterexample: A_zv = 1, Phi = 1
    d = Dims(m_u=1, m_v=1, m_x=1, m_y=1, m_z=1, m_g=0, m_p=0)
    s = zero_sub(d, a_zv0=[[1]])
    bad = NdsModel([s], Scm([[1]]))
    assert not well_posed_nds(bad)
    ok = NdsModel([s], Scm([[0]]))
    assert well_posed_nds(ok)


def test_det_phi_commutation():
    # det(I - Phi A_zv) == det(I - A_zv Phi) exactly
    rng = random.Random(12)
    for _ in range(10):
        mv, mz = rng.randint(1, 3), rng.randint(1, 3)
        phi = rand_grid(rng, mv, mz)
        azv = rand_grid(rng, mz, mv)
        lhs = linalg.det(linalg.msub(linalg.midentity(mv), linalg.mmul(phi, azv)))
        rhs = linalg.det(linalg.msub(linalg.midentity(mz), linalg.mmul(azv, phi)))
        assert lhs == rhs


def test_scm_pattern_validation():
    with pytest.raises(ShapeMismatch):
        Scm([[1, 0]], zero_pattern=[[True, False]])
    s = Scm([[0, as_rat("1/2")]], zero_pattern=[[True, False]])
    assert s.zero_pattern == ((True, False),)


def test_model_shape_validation():
    s = circuit_example(CircuitParams(t=1, k1="2/5", k2="9/10"))
    with pytest.raises(ShapeMismatch):
        NdsModel([s], Scm([[0, 0], [0, 0]]))  # needs 1x2
