import random

import pytest

from ndsid import linalg
from ndsid.errors import SingularMatrix
from ndsid.polymat import (
    PolyMatrix,
    RatMatrix,
    const_nullspace,
    is_fncr,
    is_fnrr,
    normal_rank,
    poly_det,
    poly_rank,
    rat_det,
    rat_inverse,
    smith_form,
    smith_mcmillan,
)
from ndsid.ratpoly import Poly, RatFunc, as_rat, poly_gcd


# ---------------------------------------------------------------------------
# oracles and generators
# ---------------------------------------------------------------------------

def eval_rank_oracle(g: RatMatrix, points):
    """Max exact rank over evaluation points; a lower bound on normal rank
    with equality at all but finitely many points."""
    best = 0
    for x in points:
        if g.has_pole_at(x):
            continue
        best = max(best, linalg.rank(g.eval(x)))
    return best


def rand_rat(rng, span=5):
    return as_rat(rng.randint(-span, span)) / as_rat(rng.randint(1, span))


def rand_poly(rng, max_deg=2, span=4):
    return Poly([rand_rat(rng, span) for _ in range(rng.randint(0, max_deg) + 1)])


def rand_polymatrix(rng, m, n, max_deg=2):
    return PolyMatrix([[rand_poly(rng, max_deg) for _ in range(n)] for _ in range(m)], cols=n)


def rand_ratfunc(rng, num_deg=2, den_deg=2):
    num = rand_poly(rng, num_deg)
    while True:
        den = rand_poly(rng, den_deg)
        if not den.is_zero():
            break
    return RatFunc(num, den)


def rand_ratmatrix(rng, m, n, num_deg=1, den_deg=1):
    return RatMatrix(
        [[rand_ratfunc(rng, num_deg, den_deg) for _ in range(n)] for _ in range(m)], cols=n
    )


SAMPLE_XS = [as_rat(s) for s in ("2", "-3", "5/2", "-7/3", "9/4", "11/5", "-13/6")]


# ---------------------------------------------------------------------------
# smith form
# ---------------------------------------------------------------------------

def test_smith_identity():
    sf = smith_form(PolyMatrix.identity(3))
    assert sf.rank == 3
    assert [d for d in sf.diag] == [Poly.one()] * 3
    assert sf.reassemble(3, 3) == PolyMatrix.identity(3)


def test_smith_already_diagonal():
    x = Poly.x()
    m = PolyMatrix([[x, Poly.zero()], [Poly.zero(), x * x]], cols=2)
    sf = smith_form(m)
    assert sf.rank == 2
    assert sf.diag[0] == x.monic()
    assert sf.diag[1] == (x * x).monic()
    assert sf.reassemble(2, 2) == m


def test_smith_unimodular_factors_and_divisibility():
    rng = random.Random(101)
    for _ in range(15):
        m = rand_polymatrix(rng, 3, 4)
        sf = smith_form(m)
        # exact reconstruction
        assert sf.reassemble(3, 4) == m
        # U, V unimodular: nonzero constant determinants
        for f in (sf.u, sf.v):
            d = poly_det(f)
            assert d.is_constant() and not d.is_zero()
        # divisibility chain
        for a, b in zip(sf.diag, sf.diag[1:]):
            assert (b % a).is_zero()
        # rank agrees with the evaluation oracle
        assert sf.rank == eval_rank_oracle(m.to_rat(), SAMPLE_XS[:5])


def test_poly_rank_matches_smith_rank():
    rng = random.Random(55)
    for _ in range(15):
        m = rand_polymatrix(rng, 3, 3)
        assert poly_rank(m) == smith_form(m).rank


# ---------------------------------------------------------------------------
# smith-mcmillan
# ---------------------------------------------------------------------------

def test_smith_mcmillan_scalar_one_over_x():
    g = RatMatrix([[RatFunc(Poly.one(), Poly.x())]], cols=1)
    sm = smith_mcmillan(g)
    assert sm.rank == 1
    assert sm.alphas[0] == Poly.one()
    assert sm.betas[0] == Poly.x()
    assert sm.reassemble(1, 1) == g


def test_smith_mcmillan_zero_matrix():
    g = RatMatrix.zeros(2, 2)
    sm = smith_mcmillan(g)
    assert sm.rank == 0
    assert sm.alphas == [] and sm.betas == []
    assert sm.reassemble(2, 2) == g


def test_smith_mcmillan_reconstruction_and_chains():
    rng = random.Random(303)
    for _ in range(10):
        g = rand_ratmatrix(rng, 3, 2)
        sm = smith_mcmillan(g)
        assert sm.reassemble(3, 2) == g
        assert sm.rank == normal_rank(g)
        for j in range(sm.rank):
            assert poly_gcd(sm.alphas[j], sm.betas[j]).is_one()
        for j in range(sm.rank - 1):
            assert (sm.alphas[j + 1] % sm.alphas[j]).is_zero()
            assert (sm.betas[j] % sm.betas[j + 1]).is_zero()


# ---------------------------------------------------------------------------
# normal rank / FNCR / FNRR
# ---------------------------------------------------------------------------

def test_normal_rank_identity_and_rank_one():
    assert normal_rank(RatMatrix.identity(4)) == 4
    rng = random.Random(9)
    u = [[rand_ratfunc(rng)] for _ in range(3)]
    v = [[rand_ratfunc(rng) for _ in range(4)]]
    outer = RatMatrix(u, cols=1) * RatMatrix(v, cols=4)
    if not outer.is_zero():
        assert normal_rank(outer) == 1


def test_normal_rank_agrees_with_evaluation_oracle():
    rng = random.Random(77)
    for _ in range(12):
        g = rand_ratmatrix(rng, 4, 4)
        r = normal_rank(g)
        r_eval = eval_rank_oracle(g, SAMPLE_XS)
        assert r == r_eval
        # lower-bound property at every clean point
        for x in SAMPLE_XS:
            if not g.has_pole_at(x):
                assert linalg.rank(g.eval(x)) <= r


def test_fncr_fnrr_basics():
    col = RatMatrix([[RatFunc.one()], [RatFunc.x()]], cols=1)
    assert is_fncr(col)
    withzero = RatMatrix([[RatFunc.one(), RatFunc.zero()], [RatFunc.x(), RatFunc.zero()]], cols=2)
    assert not is_fncr(withzero)
    assert is_fnrr(col.transpose())


# ---------------------------------------------------------------------------
# constant null spaces
# ---------------------------------------------------------------------------

def test_const_nullspace_row_vector():
    a = RatMatrix.from_const([[1, 1]])
    basis = const_nullspace(a)
    assert basis.cols == 1
    # col {1, -1} up to scaling
    ratio = basis[0, 0].as_constant() / basis[1, 0].as_constant()
    assert ratio == -1


def test_const_nullspace_fcr_is_empty():
    assert const_nullspace(RatMatrix.identity(3)).cols == 0


def test_const_nullspace_rank_nullity():
    rng = random.Random(13)
    for _ in range(10):
        # engineered rank deficiency: 4x6 = (4x2)(2x6)
        left = [[rand_rat(rng) for _ in range(2)] for _ in range(4)]
        right = [[rand_rat(rng) for _ in range(6)] for _ in range(2)]
        a = linalg.mmul(left, right)
        basis = linalg.nullspace(a)
        ncols = linalg.mshape(basis)[1] if basis else 0
        assert linalg.rank(a) + ncols == 6
        if basis:
            assert linalg.is_zero_matrix(linalg.mmul(a, basis))


# ---------------------------------------------------------------------------
# inverse and determinant
# ---------------------------------------------------------------------------

def test_rat_inverse_identity_and_diagonal():
    eye = RatMatrix.identity(3)
    assert rat_inverse(eye) == eye
    x = RatFunc.x()
    d = RatMatrix([[x, RatFunc.zero()], [RatFunc.zero(), x.inv()]], cols=2)
    dinv = rat_inverse(d)
    assert dinv[0, 0] == x.inv() and dinv[1, 1] == x


def test_rat_inverse_product_is_identity():
    rng = random.Random(31)
    for _ in range(8):
        g = rand_ratmatrix(rng, 3, 3)
        try:
            ginv = rat_inverse(g)
        except SingularMatrix:
            assert rat_det(g).is_zero()
            continue
        assert g * ginv == RatMatrix.identity(3)


def test_rat_inverse_singular_raises():
    z = RatMatrix.zeros(2, 2)
    with pytest.raises(SingularMatrix):
        rat_inverse(z)


def test_det_identity_det_i_minus_ab_equals_det_i_minus_ba():
    rng = random.Random(99)
    for _ in range(10):
        p, q = rng.randint(1, 3), rng.randint(1, 3)
        a = rand_ratmatrix(rng, p, q)
        b = rand_ratmatrix(rng, q, p)
        lhs = rat_det(RatMatrix.identity(p) - a * b)
        rhs = rat_det(RatMatrix.identity(q) - b * a)
        assert lhs == rhs


def test_lemma1_split_property():
    # A = [A1; A2] with A1 column-rank-deficient: A FCR iff A2 * null(A1) FCR.
    rng = random.Random(41)
    for _ in range(20):
        n = rng.randint(2, 5)
        r1 = rng.randint(0, n - 1)
        left = [[rand_rat(rng) for _ in range(r1)] for _ in range(3)]
        right = [[rand_rat(rng) for _ in range(n)] for _ in range(r1)]
        a1 = linalg.mmul(left, right) if r1 else linalg.mzeros(3, n)
        a2 = [[rand_rat(rng) for _ in range(n)] for _ in range(rng.randint(1, 4))]
        if linalg.rank(a1) == n:
            continue
        perp = linalg.nullspace(a1)
        full = linalg.rank(linalg.mvstack([a1, a2])) == n
        reduced = linalg.rank(linalg.mmul(a2, perp)) == linalg.mshape(perp)[1]
        assert full == reduced
