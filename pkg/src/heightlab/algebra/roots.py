"""Floating-point complex root finding for exact polynomials.

Aberth-Ehrlich simultaneous iteration on the squarefree part, started on
circles whose radii come from the Newton polygon of log|coefficients|.
Multiplicities are read off the squarefree factorization.  The iteration only
needs the Newton ratio p(z)/p'(z), so callers with a better-conditioned way to
evaluate it (e.g. a recurrence) can plug that in through :func:`aberth`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from heightlab.algebra.poly import Poly, squarefree_factorization
from heightlab.errors import DomainError, RootFindingError


@dataclass(frozen=True)
class RootList:
    """Roots with multiplicities.

    ``residual`` is max |p(r)| / max|coeff| over the returned roots, which
    keeps it finite for coefficients beyond double range.
    """

    roots: tuple
    residual: float
    converged: bool = True

    @property
    def values(self):
        return [z for z, _ in self.roots]

    @property
    def total_multiplicity(self):
        return sum(m for _, m in self.roots)


def _log2_abs(c: int) -> float:
    c = abs(c)
    n = c.bit_length()
    if n <= 1000:
        return math.log2(c)
    return math.log2(c >> (n - 64)) + (n - 64)


def scaled_coefficients(p: Poly) -> np.ndarray:
    """Float coefficients divided by a power of two so that max |c| is ~1.

    Tiny entries may underflow to 0, which only drops terms below double
    resolution relative to the largest one.
    """
    nums = p.numerators
    emax = max(abs(c).bit_length() for c in nums)
    return np.array([float(Fraction(c, 1 << emax)) for c in nums])


def newton_polygon_guesses(logabs, degree, seed_angle=0.4):
    """Initial approximations on circles from the upper hull of (i, log|c_i|).

    ``logabs[i]`` is log2|c_i| (or -inf for a zero coefficient).
    """
    pts = [(i, v) for i, v in enumerate(logabs) if np.isfinite(v)]
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] when it lies on or below the chord hull[-2] -> p
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    guesses = []
    for (i, vi), (j, vj) in zip(hull, hull[1:]):
        k = j - i
        r = 2.0 ** ((vi - vj) / k)
        r = min(max(r, 1e-150), 1e150)
        for m in range(k):
            ang = 2 * math.pi * m / k + 2 * math.pi * i / degree + seed_angle
            guesses.append(r * complex(math.cos(ang), math.sin(ang)))
    return np.array(guesses[:degree], dtype=complex)


def horner_ratio(coeffs: np.ndarray):
    """Return z -> (p(z)/p'(z), noisy) for scaled ascending coefficients.

    Inside the unit disk plain Horner is used; outside, the reversed
    polynomial is evaluated at 1/z so nothing overflows.  ``noisy`` marks
    points where |p(z)| is below the rounding error bound of the evaluation
    (Bini's stopping rule), i.e. the root is as good as doubles allow.
    """
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    rev = c[::-1]
    ac, arev = np.abs(c), np.abs(rev)
    u = 2.0**-52

    def _horner(cs, acs, x):
        p = np.full(x.shape, cs[n], dtype=complex)
        dp = np.zeros(x.shape, dtype=complex)
        bound = np.full(x.shape, acs[n])
        ax = np.abs(x)
        for k in range(n - 1, -1, -1):
            dp = dp * x + p
            p = p * x + cs[k]
            bound = bound * ax + acs[k]
        return p, dp, np.abs(p) <= 4 * n * u * bound

    def ratio(z):
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        noisy = np.zeros(z.shape, dtype=bool)
        inside = np.abs(z) <= 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            if inside.any():
                p, dp, small = _horner(c, ac, z[inside])
                out[inside] = p / dp
                noisy[inside] = small
            outside = ~inside
            if outside.any():
                w = 1.0 / z[outside]
                q, dq, small = _horner(rev, arev, w)
                out[outside] = q / (w * (n * q - w * dq))
                noisy[outside] = small
        return out, noisy

    return ratio


def relative_residual(coeffs: np.ndarray, z) -> np.ndarray:
    """|p(z)| / max|c|, scale-free so it can use the scaled coefficients.

    Evaluated in the reversed form outside the unit disk; may be inf when
    |z|^deg exceeds double range.
    """
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    res = np.empty(z.shape)
    cmax = np.max(np.abs(c))
    for idx, x in enumerate(z):
        if abs(x) <= 1:
            v = 0j
            for ck in c[::-1]:
                v = v * x + ck
            res[idx] = abs(v)
        else:
            w = 1 / x
            v = 0j
            for ck in c:
                v = v * w + ck
            with np.errstate(over="ignore"):
                res[idx] = abs(v) * abs(x) ** n if n * math.log(abs(x)) < 700 else math.inf
    return res / cmax


def aberth(ratio, z0, *, eps=4e-16, max_iter=1000, block=128):
    """Aberth-Ehrlich iteration with block Gauss-Seidel updates.

    ``ratio(z)`` returns p(z)/p'(z) elementwise, or a pair (ratio, noisy)
    where ``noisy`` flags values already at the evaluation noise floor.
    Ratios are taken at the start of each sweep; the Aberth sums of a block
    already see the updated approximations of earlier blocks.  Returns
    (roots, converged).  A root freezes once its correction falls below
    eps*max(1,|z|) or its value is noise.
    """
    z = np.array(z0, dtype=complex)
    active = np.ones(len(z), dtype=bool)

    def call(x):
        r = ratio(x)
        if isinstance(r, tuple):
            return r
        return r, np.zeros(np.shape(x), dtype=bool)

    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            return z, True
        nr, noisy = call(z[idx])
        for lo in range(0, idx.size, block):
            ib, nb, quiet = idx[lo : lo + block], nr[lo : lo + block], noisy[lo : lo + block]
            zb = z[ib]
            rows = np.arange(ib.size)
            diff = zb[:, None] - z[None, :]
            diff[rows, ib] = 1.0
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                inv = 1.0 / diff
                inv[rows, ib] = 0.0
                w = nb / (1.0 - nb * inv.sum(axis=1))
            bad = ~np.isfinite(w)
            w[bad | quiet] = 0.0
            z[ib] = zb - w
            done = quiet | (nb == 0) | ((np.abs(w) <= eps * np.maximum(1.0, np.abs(z[ib]))) & ~bad)
            active[ib[done]] = False
    return z, not active.any()


def _roots_squarefree(f: Poly, max_iter):
    k = f.low_order()
    if k:
        # squarefree, so k == 1
        rest = f.shift_down(k)
        if rest.degree < 1:
            return np.zeros(k, dtype=complex), True
        z, ok = _roots_squarefree(rest, max_iter)
        return np.concatenate([np.zeros(k, dtype=complex), z]), ok
    if f.degree == 1:
        c0, c1 = f.coeff(0), f.coeff(1)
        return np.array([complex(-c0 / c1)]), True
    coeffs = scaled_coefficients(f)
    logabs = [(_log2_abs(c) if c else -math.inf) for c in f.numerators]
    z0 = newton_polygon_guesses(logabs, f.degree)
    return aberth(horner_ratio(coeffs), z0, max_iter=max_iter)


def _squarefree_parts(p: Poly):
    from heightlab.algebra.modular import is_squarefree_modular

    if is_squarefree_modular(p):
        return [(p.monic(), 1)]
    return squarefree_factorization(p)


def complex_roots(p: Poly, tol: float = 1e-9, max_iter: int = 1000) -> RootList:
    """All complex roots of p with multiplicities."""
    if p.degree < 1:
        raise DomainError("complex_roots needs a polynomial of degree >= 1")
    found = []
    converged = True
    for factor, mult in _squarefree_parts(p):
        z, ok = _roots_squarefree(factor, max_iter)
        converged &= ok
        found.extend((complex(r), mult) for r in z)
    coeffs = scaled_coefficients(p)
    resid = float(np.max(relative_residual(coeffs, [r for r, _ in found])))
    if not converged:
        raise RootFindingError(
            f"root iteration did not converge in {max_iter} steps",
            roots=found,
            residual=resid,
        )
    found.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return RootList(roots=tuple(found), residual=resid, converged=resid <= tol)
