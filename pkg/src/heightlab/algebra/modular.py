"""Arithmetic in F_p[t] with numpy: squarefreeness certificates and a
multi-modular gcd for large integer polynomials.

If deg p is preserved mod a prime and gcd(p, p') is constant mod that prime,
then p is squarefree over Q.  The converse can fail for unlucky primes, so a
negative answer only means "fall back to exact arithmetic".
"""

import math

import gmpy2
import numpy as np

from heightlab.algebra.poly import Poly

PRIMES = (2147483647, 2147483629, 2147483587, 2147483579)


def _prime_stream(start=1 << 30):
    p = gmpy2.mpz(start)
    while True:
        p = gmpy2.next_prime(p)
        yield int(p)


def reduce_mod(p: Poly, prime: int):
    """Coefficients of p mod prime (ascending) or None if the denominator vanishes."""
    if p.denominator % prime == 0:
        return None
    inv = pow(p.denominator, -1, prime)
    return np.array([(c * inv) % prime for c in p.numerators], dtype=np.int64)


def _trim(a):
    nz = np.nonzero(a)[0]
    return a[: nz[-1] + 1] if nz.size else a[:0]


def gcd_mod(a, b, prime):
    """Monic gcd of two ascending coefficient arrays over F_prime."""
    a, b = _trim(a.copy()), _trim(b.copy())
    while b.size:
        m = b.size - 1
        inv = pow(int(b[-1]), -1, prime)
        b = (b * inv) % prime
        for i in range(a.size - 1, m - 1, -1):
            c = a[i]
            if c:
                a[i - m : i + 1] = (a[i - m : i + 1] - c * b) % prime
        a = _trim(a[:m])
        a, b = b, a
    if a.size:
        a = (a * pow(int(a[-1]), -1, prime)) % prime
    return a


def is_squarefree_modular(p: Poly, primes=PRIMES) -> bool:
    if p.degree < 1:
        return True
    dp = p.derivative()
    for prime in primes:
        a = reduce_mod(p, prime)
        b = reduce_mod(dp, prime)
        if a is None or b is None or a[-1] == 0 or b.size == 0 or b[-1] == 0:
            continue
        if gcd_mod(a, b, prime).size == 1:
            return True
    return False


def _int_divides(b, a):
    """Whether integer polynomial b divides integer polynomial a over Z."""
    from heightlab.algebra.poly import poly_divmod

    q, r = poly_divmod(Poly.from_ints(a), Poly.from_ints(b))
    return r.is_zero() and q.is_integral()


def gcd_int_modular(a, b):
    """Primitive gcd (positive leading coefficient) of primitive integer tuples.

    Images mod word-size primes are combined by CRT until they stop
    changing; the candidate is then proven by exact trial division, so the
    result never depends on a lucky choice of primes.
    """
    la, lb = a[-1], b[-1]
    gamma = gmpy2.gcd(la, lb)
    best_deg = None
    H, M = None, 1
    for prime in _prime_stream():
        if la % prime == 0 or lb % prime == 0:
            continue
        ga = np.array([c % prime for c in a], dtype=np.int64)
        gb = np.array([c % prime for c in b], dtype=np.int64)
        g = gcd_mod(ga, gb, prime)
        deg = g.size - 1
        if deg == 0:
            return (1,)
        if best_deg is not None and deg > best_deg:
            continue  # unlucky prime
        if best_deg is None or deg < best_deg:
            best_deg, H, M = deg, None, 1
        r = [(int(c) * int(gamma)) % prime for c in g]
        if H is None:
            new = r
        else:
            inv = pow(M % prime, -1, prime)
            new = [h + M * (((rc - h) * inv) % prime) for h, rc in zip(H, r)]
        M *= prime
        half = M // 2
        new = [x % M for x in new]
        new = [x - M if x > half else x for x in new]
        if H is not None and new == H:
            cont = math.gcd(*new)
            cand = [c // cont for c in new]
            if cand[-1] < 0:
                cand = [-c for c in cand]
            if _int_divides(cand, a) and _int_divides(cand, b):
                return tuple(cand)
        H = new
