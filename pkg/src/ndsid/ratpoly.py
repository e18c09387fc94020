"""Exact scalar arithmetic: rationals, univariate polynomials, rational functions.

Everything here is immutable and carries no floating point.  ``Rat`` is
``gmpy2.mpq`` when gmpy2 is importable (it is considerably faster) and
``fractions.Fraction`` otherwise; the two are interchangeable for every
operation used in this package.
"""

from __future__ import annotations

from typing import Iterable, Union

from .errors import DivisionByZeroFunction

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is available in CI
    from fractions import Fraction as Rat

#: Degree of the zero polynomial.  Kept as a distinct marker so degree
#: arithmetic never silently treats "no terms" as "-1 terms".
NEG_INF = float("-inf")

RatLike = Union[int, str, "Rat"]

ZERO = Rat(0)
ONE = Rat(1)


def as_rat(value) -> Rat:
    """Coerce ints, "p/q" strings, decimal strings and rationals to Rat.

    Floats are accepted and converted exactly (every float is a dyadic
    rational); decimal strings like "0.4" become 2/5 exactly.
    """
    if isinstance(value, float):
        # route through Fraction to get the exact binary expansion
        from fractions import Fraction

        f = Fraction(value)
        return Rat(f.numerator) / Rat(f.denominator)
    return Rat(value)


class Poly:
    """Univariate polynomial with Rat coefficients, stored ascending.

    The zero polynomial has an empty coefficient tuple and degree NEG_INF;
    otherwise the leading coefficient is nonzero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[RatLike] = ()):
        cs = [as_rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "Poly":
        return Poly(())

    @staticmethod
    def one() -> "Poly":
        return Poly((1,))

    @staticmethod
    def const(c) -> "Poly":
        return Poly((c,))

    @staticmethod
    def x() -> "Poly":
        """The identity polynomial (the transform variable itself)."""
        return Poly((0, 1))

    # -- basic queries -------------------------------------------------

    @property
    def degree(self):
        return NEG_INF if not self.coeffs else len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == (ONE,)

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def leading(self) -> Rat:
        if not self.coeffs:
            return ZERO
        return self.coeffs[-1]

    def coeff(self, k: int) -> Rat:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else ZERO

    # -- ring operations -----------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(())
        out = [ZERO] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] = out[i + j] + ai * bj
        return Poly(out)

    def scale(self, c) -> "Poly":
        c = as_rat(c)
        if c == 0:
            return Poly(())
        return Poly(tuple(a * c for a in self.coeffs))

    def shift(self, k: int) -> "Poly":
        """Multiply by x**k."""
        if not self.coeffs:
            return self
        return Poly((ZERO,) * k + self.coeffs)

    def __divmod__(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(other.coeffs) - 1
        lead = other.coeffs[-1]
        if len(rem) - 1 < dq:
            return Poly(()), Poly(rem)
        quot = [ZERO] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k]
            if c == 0:
                continue
            q = c / lead
            quot[k - dq] = q
            for j in range(dq + 1):
                rem[k - dq + j] = rem[k - dq + j] - q * other.coeffs[j]
        return Poly(quot), Poly(rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ValueError("exact_div with nonzero remainder")
        return q

    # -- normal forms and helpers ---------------------------------------

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.coeffs[-1]
        if lead == 1:
            return self
        return Poly(tuple(c / lead for c in self.coeffs))

    def eval(self, x) -> Rat:
        """Exact Horner evaluation at a rational point."""
        x = as_rat(x)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_neg(self) -> "Poly":
        """Substitute x -> -x."""
        return Poly(tuple(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)))

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({format_poly(self)})"


def format_poly(p: Poly, var: str = "x") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[k]
        if c == 0:
            continue
        if k == 0:
            term = str(c)
        else:
            xk = var if k == 1 else f"{var}^{k}"
            if c == 1:
                term = xk
            elif c == -1:
                term = f"-{xk}"
            else:
                term = f"{c}*{xk}"
        parts.append(term)
    out = parts[0]
    for term in parts[1:]:
        out += f" - {term[1:]}" if term.startswith("-") else f" + {term}"
    return out


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor; poly_gcd(p, 0) is p made monic."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_xgcd(a: Poly, b: Poly):
    """Extended Euclid: monic g and s, u with s*a + u*b = g."""
    r0, r1 = a, b
    s0, s1 = Poly.one(), Poly.zero()
    u0, u1 = Poly.zero(), Poly.one()
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        u0, u1 = u1, u0 - q * u1
    lead = r0.leading()
    if not r0.is_zero() and lead != 1:
        inv = 1 / lead
        r0, s0, u0 = r0.scale(inv), s0.scale(inv), u0.scale(inv)
    return r0, s0, u0


def poly_lcm(a: Poly, b: Poly) -> Poly:
    if a.is_zero() or b.is_zero():
        return Poly(())
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def poly_eval(p: Poly, x) -> Rat:
    return p.eval(x)


class RatFunc:
    """Reduced rational function num/den with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            num = Poly.const(as_rat(num))
        if den is None:
            den = Poly.one()
        elif not isinstance(den, Poly):
            den = Poly.const(as_rat(den))
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num, den = Poly.zero(), Poly.one()
        else:
            g = poly_gcd(num, den)
            if not g.is_one():
                num, den = num.exact_div(g), den.exact_div(g)
            lead = den.leading()
            if lead != 1:
                num = num.scale(1 / lead)
                den = den.scale(1 / lead)
        self.num = num
        self.den = den

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> "RatFunc":
        return RatFunc(Poly.zero())

    @staticmethod
    def one() -> "RatFunc":
        return RatFunc(Poly.one())

    @staticmethod
    def const(c) -> "RatFunc":
        return RatFunc(Poly.const(c))

    @staticmethod
    def x() -> "RatFunc":
        return RatFunc(Poly.x())

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc(p)

    # -- queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_one()

    def as_constant(self) -> Rat:
        if not self.is_constant():
            raise ValueError("rational function is not constant")
        return self.num.coeff(0)

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    # -- field operations ------------------------------------------------

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.num, self.den * other.den)

    def inv(self) -> "RatFunc":
        if self.is_zero():
            raise DivisionByZeroFunction("inverse of the zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        return self * other.inv()

    def scale(self, c) -> "RatFunc":
        return RatFunc(self.num.scale(c), self.den)

    def eval(self, x) -> Rat:
        """Exact evaluation at a rational point that is not a pole."""
        x = as_rat(x)
        d = self.den.eval(x)
        if d == 0:
            raise ZeroDivisionError(f"evaluation at pole {x}")
        return self.num.eval(x) / d

    def has_pole_at(self, x) -> bool:
        return self.den.eval(x) == 0

    def __eq__(self, other) -> bool:
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFunc({format_ratfunc(self)})"


def format_ratfunc(r: RatFunc, var: str = "x") -> str:
    if r.den.is_one():
        return format_poly(r.num, var)
    return f"({format_poly(r.num, var)}) / ({format_poly(r.den, var)})"


def ratfunc_add(a: RatFunc, b: RatFunc) -> RatFunc:
    return a + b


def ratfunc_mul(a: RatFunc, b: RatFunc) -> RatFunc:
    return a * b


def ratfunc_inv(a: RatFunc) -> RatFunc:
    return a.inv()
