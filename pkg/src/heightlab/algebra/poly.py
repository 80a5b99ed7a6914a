"""Dense univariate polynomials in t over Q.

A ``Poly`` is stored as a tuple of integer numerators over one positive common
denominator, reduced so that gcd(content, den) == 1.  The public view is the
tuple of ``Fraction`` coefficients (index i = coefficient of t^i); the integer
form keeps large products cheap (Kronecker substitution through gmpy2).
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from numbers import Rational as _RationalABC

import gmpy2

from heightlab.errors import DomainError

Rational = Fraction

# below this length schoolbook beats packing
_KRONECKER_MIN = 24
# above this length the pseudo-remainder sequence loses to the modular gcd
_MODULAR_GCD_MIN = 12


def _trim(nums):
    n = len(nums)
    while n and not nums[n - 1]:
        n -= 1
    return tuple(nums[:n])


def _content(nums):
    return reduce(gcd, nums, 0)


def _pack(nums, nbytes):
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in nums)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in nums)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _imul(a, b):
    """Product of two integer coefficient tuples."""
    if not a or not b:
        return ()
    la, lb = len(a), len(b)
    if min(la, lb) < _KRONECKER_MIN:
        if la < lb:
            a, b, la, lb = b, a, lb, la
        out = [0] * (la + lb - 1)
        for j, bj in enumerate(b):
            if bj:
                for i, ai in enumerate(a):
                    out[i + j] += ai * bj
        return tuple(out)
    bits = (
        max(abs(c).bit_length() for c in a)
        + max(abs(c).bit_length() for c in b)
        + min(la, lb).bit_length()
        + 2
    )
    nbytes = (bits + 7) // 8
    va = gmpy2.mpz(_pack(a, nbytes))
    vb = gmpy2.mpz(_pack(b, nbytes))
    length = la + lb - 1
    half = 1 << (8 * nbytes - 1)
    offset = int.from_bytes((b"\x00" * (nbytes - 1) + b"\x80") * length, "little")
    w = int(va * vb) + offset
    raw = w.to_bytes(nbytes * length, "little")
    return tuple(
        int.from_bytes(raw[i : i + nbytes], "little") - half
        for i in range(0, nbytes * length, nbytes)
    )


def _iadd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return out


def _as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, _RationalABC)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class Poly:
    __slots__ = ("_num", "_den", "_hash")

    def __init__(self, coeffs=()):
        fr = [_as_fraction(c) for c in coeffs]
        den = lcm(*(c.denominator for c in fr)) if fr else 1
        num = [c.numerator * (den // c.denominator) for c in fr]
        self._set(num, den)

    def _set(self, num, den):
        num = _trim(num)
        if not num:
            den = 1
        elif den > 1:
            g = den
            for c in num:
                g = gcd(g, c)
                if g == 1:
                    break
            if g > 1:
                num = tuple(c // g for c in num)
                den //= g
        self._num = num
        self._den = den
        self._hash = None

    @classmethod
    def from_ints(cls, num, den=1):
        if den <= 0:
            if den == 0:
                raise ZeroDivisionError("zero denominator")
            num, den = [-c for c in num], -den
        p = cls.__new__(cls)
        p._set(num, den)
        return p

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def monomial(cls, k, c=1):
        return cls([0] * k + [c])

    @classmethod
    def t(cls):
        return cls.from_ints((0, 1))

    # -- basic views ------------------------------------------------------

    @property
    def coeffs(self):
        return tuple(Fraction(c, self._den) for c in self._num)

    @property
    def numerators(self):
        return self._num

    @property
    def denominator(self):
        return self._den

    @property
    def degree(self):
        return len(self._num) - 1

    def __len__(self):
        return len(self._num)

    def is_zero(self):
        return not self._num

    def __bool__(self):
        return bool(self._num)

    def is_constant(self):
        return len(self._num) <= 1

    def is_integral(self):
        return self._den == 1

    @property
    def lc(self):
        if not self._num:
            return Fraction(0)
        return Fraction(self._num[-1], self._den)

    def coeff(self, i):
        if 0 <= i < len(self._num):
            return Fraction(self._num[i], self._den)
        return Fraction(0)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._num == other._num and self._den == other._den
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._num, self._den))
        return self._hash

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return format_poly(self, "t")

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        den = lcm(self._den, other._den)
        fa, fb = den // self._den, den // other._den
        a = [c * fa for c in self._num] if fa != 1 else self._num
        b = [c * fb for c in other._num] if fb != 1 else other._num
        return Poly.from_ints(_iadd(a, b), den)

    __radd__ = __add__

    def __neg__(self):
        return Poly.from_ints([-c for c in self._num], self._den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return Poly.from_ints(
                [c * f.numerator for c in self._num], self._den * f.denominator
            )
        if not isinstance(other, Poly):
            return NotImplemented
        return Poly.from_ints(_imul(self._num, other._num), self._den * other._den)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Poly.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            if f == 0:
                raise ZeroDivisionError("division of a Poly by zero")
            return self * (1 / f)
        return NotImplemented

    def __divmod__(self, other):
        return poly_divmod(self, other)

    def __floordiv__(self, other):
        return poly_divmod(self, other)[0]

    def __mod__(self, other):
        return poly_divmod(self, other)[1]

    def shift_up(self, k):
        """Multiply by t^k."""
        if not self._num or k == 0:
            return self
        return Poly.from_ints((0,) * k + self._num, self._den)

    def shift_down(self, k):
        """Divide by t^k; the low k coefficients must vanish."""
        if k == 0:
            return self
        if any(self._num[:k]):
            raise DomainError(f"t^{k} does not divide {self}")
        return Poly.from_ints(self._num[k:], self._den)

    def low_order(self):
        """ord_{t=0}, with the zero polynomial raising."""
        if not self._num:
            raise DomainError("order of the zero polynomial is undefined")
        for i, c in enumerate(self._num):
            if c:
                return i

    def truncate(self, n):
        """Reduce modulo t^n."""
        return Poly.from_ints(self._num[:n], self._den)

    def derivative(self):
        return Poly.from_ints([i * c for i, c in enumerate(self._num)][1:], self._den)

    def monic(self):
        if not self._num:
            raise DomainError("the zero polynomial has no monic form")
        lead = self._num[-1]
        return Poly.from_ints(self._num, lead)

    def primitive(self):
        """Integer primitive part with positive leading coefficient."""
        if not self._num:
            return ()
        g = _content(self._num)
        if self._num[-1] < 0:
            g = -g
        return tuple(c // g for c in self._num)

    def content(self):
        """Rational content c with self = c * primitive()."""
        if not self._num:
            return Fraction(0)
        g = _content(self._num)
        if self._num[-1] < 0:
            g = -g
        return Fraction(g, self._den)

    def __call__(self, x):
        """Evaluate; exact for int/Fraction arguments, floating for float/complex."""
        if isinstance(x, (int, Fraction)):
            x = Fraction(x)
            if x.denominator == 1:
                v = 0
                xi = x.numerator
                for c in reversed(self._num):
                    v = v * xi + c
                return Fraction(v, self._den)
            # homogenised Horner keeps everything in integers
            p, q = x.numerator, x.denominator
            v = 0
            qpow = 1
            for c in reversed(self._num):
                v = v * p + c * qpow
                qpow *= q
            return Fraction(v, self._den * (qpow // q if self._num else 1))
        v = 0
        for c in reversed(self.coeffs):
            v = v * x + float(c)
        return v

    def taylor_shift(self, c):
        """Return p(t + c)."""
        c = Fraction(c)
        if c == 0 or len(self._num) <= 1:
            return self
        a = list(self.coeffs)
        n = len(a)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                a[j] += c * a[j + 1]
        return Poly(a)

    def reversed(self, n=None):
        """t^n p(1/t); n defaults to the degree."""
        if n is None:
            n = self.degree
        if n < self.degree:
            raise ValueError("reversal length below degree")
        padded = self._num + (0,) * (n + 1 - len(self._num))
        return Poly.from_ints(padded[::-1], self._den)

    def to_floats(self):
        """Coefficients as doubles (may overflow to inf for huge entries)."""
        return [float(c) for c in self.coeffs]


ZERO = Poly()
ONE = Poly.constant(1)
T = Poly.t()


def poly_divmod(a: Poly, b: Poly):
    """Quotient and remainder in Q[t]."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if a.degree < b.degree:
        return ZERO, a
    bn = b._num
    lead = bn[-1]
    m = len(bn) - 1
    rem = list(a._num)
    nq = len(rem) - m
    if lead in (1, -1):
        q = [0] * nq
        for i in range(nq - 1, -1, -1):
            c = rem[i + m] * lead
            if c:
                q[i] = c
                for j in range(m):
                    rem[i + j] -= c * bn[j]
            rem[i + m] = 0
        # a = A/ad, b = B/bd  =>  a/b = (A/B) * bd/ad
        quot = Poly.from_ints(q, a._den) * Fraction(b._den)
        return quot, Poly.from_ints(rem[:m], a._den)
    remf = [Fraction(c) for c in rem]
    q = [Fraction(0)] * nq
    for i in range(nq - 1, -1, -1):
        c = remf[i + m] / lead
        if c:
            q[i] = c
            for j in range(m):
                remf[i + j] -= c * bn[j]
        remf[i + m] = Fraction(0)
    quot = Poly(q) * Fraction(b._den, a._den)
    return quot, Poly(remf[:m]) * Fraction(1, a._den)


def exquo(a: Poly, b: Poly) -> Poly:
    """Exact quotient a / b; raises DomainError on a nonzero remainder."""
    q, r = poly_divmod(a, b)
    if not r.is_zero():
        raise DomainError(f"{b} does not divide {a}")
    return q


def divides(b: Poly, a: Poly) -> bool:
    return poly_divmod(a, b)[1].is_zero()


def _prem_int(a, b):
    """Integer pseudo-remainder of coefficient tuples (a, b nonzero)."""
    r = list(a)
    m = len(b) - 1
    lead = b[-1]
    while len(r) - 1 >= m and r:
        c = r[-1]
        shift = len(r) - 1 - m
        r = [x * lead for x in r]
        for j in range(m + 1):
            r[shift + j] -= c * b[j]
        r = list(_trim(r))
        if r:
            g = _content(r)
            if g > 1:
                r = [x // g for x in r]
    return tuple(r)


def poly_gcd(p: Poly, q: Poly) -> Poly:
    """Monic gcd over Q, with gcd(p, 0) = monic(p)."""
    if p.is_zero() and q.is_zero():
        raise DomainError("gcd(0, 0) is undefined")
    if q.is_zero():
        return p.monic()
    if p.is_zero():
        return q.monic()
    a, b = p.primitive(), q.primitive()
    if len(a) < len(b):
        a, b = b, a
    if len(b) > _MODULAR_GCD_MIN:
        from heightlab.algebra.modular import gcd_int_modular

        return Poly.from_ints(gcd_int_modular(a, b)).monic()
    while b:
        if len(b) == 1:
            return ONE
        r = _prem_int(a, b)
        a, b = b, r
    return Poly.from_ints(a).monic()


def poly_gcd_many(polys):
    nonzero = [p for p in polys if not p.is_zero()]
    if not nonzero:
        raise DomainError("gcd of zero polynomials is undefined")
    g = nonzero[0].monic()
    for p in nonzero[1:]:
        if g.degree == 0:
            break
        g = poly_gcd(g, p)
    return g


def ord_at(p: Poly, c) -> int:
    """Multiplicity of t = c as a root of p."""
    if p.is_zero():
        raise DomainError("ord_at of the zero polynomial is undefined")
    c = Fraction(c)
    if c == 0:
        return p.low_order()
    lin = Poly((-c, 1))
    k = 0
    while p.degree >= 1 and p(c) == 0:
        p = exquo(p, lin)
        k += 1
    return k


def squarefree_factorization(p: Poly):
    """Yun's algorithm: list of (monic squarefree factor, multiplicity)."""
    if p.is_zero():
        raise DomainError("squarefree factorization of the zero polynomial")
    if p.degree < 1:
        return []
    f = p.monic()
    df = f.derivative()
    a = poly_gcd(f, df)
    b = exquo(f, a)
    c = exquo(df, a)
    d = c - b.derivative()
    out = []
    i = 1
    while b.degree >= 1:
        a = poly_gcd(b, d) if not d.is_zero() else b.monic()
        b = exquo(b, a)
        c = exquo(d, a)
        d = c - b.derivative()
        if a.degree >= 1:
            out.append((a, i))
        i += 1
    return out


def _divisors(n, limit=10**12):
    n = abs(n)
    if n == 0:
        return None
    if n > limit:
        return None
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def rational_roots(p: Poly):
    """All rational roots of p (without multiplicity), sorted.

    Uses the rational root theorem; when the extreme coefficients are too large
    to factor, candidates come from real numeric roots and are verified exactly.
    """
    if p.is_zero():
        raise DomainError("rational roots of the zero polynomial")
    num = list(p.primitive())
    roots = set()
    k = 0
    while num and num[0] == 0:
        num.pop(0)
        k += 1
    if k:
        roots.add(Fraction(0))
    if len(num) <= 1:
        return sorted(roots)
    reduced = Poly.from_ints(num)
    if len(num) == 2:
        roots.add(Fraction(-num[0], num[1]))
        return sorted(roots)
    ps, qs = _divisors(num[0]), _divisors(num[-1])
    if ps is not None and qs is not None and len(ps) * len(qs) <= 200_000:
        for a in ps:
            for b in qs:
                for r in (Fraction(a, b), Fraction(-a, b)):
                    if r not in roots and reduced(r) == 0:
                        roots.add(r)
        return sorted(roots)
    from heightlab.algebra.roots import complex_roots

    for z, _ in complex_roots(reduced).roots:
        if abs(z.imag) < 1e-6 * (1 + abs(z)):
            for dmax in (10, 1000, 10**6, 10**9):
                r = Fraction(z.real).limit_denominator(dmax)
                if reduced(r) == 0:
                    roots.add(r)
                    break
    return sorted(roots)


# -- printing ---------------------------------------------------------------


def format_rational(c: Fraction) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_poly(p: Poly, var="t") -> str:
    """Human- and parser-readable form, highest degree first."""
    if p.is_zero():
        return "0"
    terms = []
    for i in range(p.degree, -1, -1):
        c = p.coeff(i)
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if i == 0:
            body = format_rational(mag)
        else:
            mono = var if i == 1 else f"{var}^{i}"
            body = mono if mag == 1 else f"{format_rational(mag)}*{mono}"
        terms.append((sign, body))
    first_sign, first_body = terms[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out
