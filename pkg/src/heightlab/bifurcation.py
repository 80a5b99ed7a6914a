"""Parameter-space numerics for a marked point: activity maps, preperiodic
parameters and density experiments.

The activity indicator follows the parameter derivative of the orbit.  With a
homogeneous lift (X_i, Y_i) of f_t^i(a(t)) and its t-derivative (X_i', Y_i'),
the derivative of z_i = X_i / Y_i is (X_i' Y_i - X_i Y_i') / Y_i^2.  Both the
lift and its derivative can be divided by any common scalar each step, which
keeps everything in double range.

Preperiodic-parameter equations are built exactly from the normalized orbit.
Their roots are found by Aberth iteration in which the Newton ratio E/E' is
evaluated through the same lift recurrence instead of from the (enormous)
coefficients of E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from heightlab.algebra import Poly, ProjPointK, complex_roots, squarefree_factorization
from heightlab.algebra.modular import is_squarefree_modular
from heightlab.algebra.roots import _log2_abs, aberth, scaled_coefficients
from heightlab.dynamics import DEFAULT_BUDGET, orbit
from heightlab.errors import DomainError, RootFindingError
from heightlab.family import RationalMapFamily
from heightlab.parallel import map_chunks

DEFAULT_CAP = 256
DEFAULT_THRESHOLD = 1e12
COLLISION_TOL = 1e-6
# above this degree the coefficient-based root finder loses all accuracy
RECURRENCE_MIN_DEGREE = 24
BRIDGE_MAX_DEGREE = 32


@dataclass(frozen=True)
class ParamGrid:
    """Rectangle [x0, x1] x [y0, y1] sampled at pixel centres, row 0 on top."""

    x0: float
    y0: float
    x1: float
    y1: float
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DomainError("grid resolution must be positive")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise DomainError("grid rectangle is degenerate")

    @classmethod
    def parse(cls, text: str) -> "ParamGrid":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 6:
            raise DomainError("grid must be 'x0,y0,x1,y1,W,H'")
        x0, y0, x1, y1 = (float(p) for p in parts[:4])
        return cls(x0, y0, x1, y1, int(parts[4]), int(parts[5]))

    def points(self):
        xs = self.x0 + (np.arange(self.width) + 0.5) * (self.x1 - self.x0) / self.width
        ys = self.y1 - (np.arange(self.height) + 0.5) * (self.y1 - self.y0) / self.height
        return xs[None, :] + 1j * ys[:, None]

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return (z.real >= self.x0) & (z.real <= self.x1) & (z.imag >= self.y0) & (z.imag <= self.y1)


@dataclass
class ActivityMap:
    grid: ParamGrid
    values: np.ndarray  # (height, width) first-activity iterate, 0 = inactive
    cap: int
    threshold: float
    metric: str = "affine"
    nan_cells: int = 0

    @property
    def active(self):
        return self.values > 0


# -- numeric helpers -------------------------------------------------------


def _poly_values(p: Poly, t):
    """p(t) and p'(t) in doubles for array t."""
    t = np.asarray(t, dtype=complex)
    if p.is_zero():
        return np.zeros_like(t), np.zeros_like(t)
    c = np.array([float(x) for x in reversed(p.coeffs)])
    return np.polyval(c, t), (np.polyval(np.polyder(c), t) if len(c) > 1 else np.zeros_like(t))


def _form_with_partials(coeffs, x, y):
    """Value and x-, y-partials of sum_j c_j x^(d-j) y^j."""
    d = len(coeffs) - 1
    xp = [np.ones_like(x)]
    yp = [np.ones_like(y)]
    for _ in range(d):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    val = np.zeros_like(x)
    dx = np.zeros_like(x)
    dy = np.zeros_like(x)
    for j, c in enumerate(coeffs):
        val = val + c * xp[d - j] * yp[j]
        if d - j > 0:
            dx = dx + (d - j) * c * xp[d - j - 1] * yp[j]
        if j > 0:
            dy = dy + j * c * xp[d - j] * yp[j - 1]
    return val, dx, dy


def _step_with_derivative(coeffs, X, Y, dX, dY):
    """One application of the lift together with its total t-derivative."""
    Pc, Qc, dPc, dQc = coeffs
    P, Px, Py = _form_with_partials(Pc, X, Y)
    Q, Qx, Qy = _form_with_partials(Qc, X, Y)
    Pt = _form_with_partials(dPc, X, Y)[0]
    Qt = _form_with_partials(dQc, X, Y)[0]
    return P, Q, Pt + Px * dX + Py * dY, Qt + Qx * dX + Qy * dY


def _renormalize(X, Y, dX, dY):
    s = np.maximum(np.abs(X), np.abs(Y))
    s = np.where(s > 0, s, 1.0)
    return X / s, Y / s, dX / s, dY / s


def chordal(x1, y1, x2, y2):
    """Chordal distance between (x1 : y1) and (x2 : y2); infinity needs no special case."""
    num = np.abs(x1 * y2 - x2 * y1)
    den = np.sqrt(np.abs(x1) ** 2 + np.abs(y1) ** 2) * np.sqrt(np.abs(x2) ** 2 + np.abs(y2) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


def _activity_rows(F, a, t, cap, threshold, metric):
    shape = t.shape
    t = t.ravel()
    out = np.zeros(t.size, dtype=np.int64)
    nan = np.zeros(t.size, dtype=bool)
    X, dX = _poly_values(a.a1, t)
    Y, dY = _poly_values(a.a2, t)
    X, Y, dX, dY = _renormalize(X, Y, dX, dY)
    coeffs = F.specialize_with_derivative(t)
    idx = np.arange(t.size)
    with np.errstate(all="ignore"):
        for i in range(1, cap + 1):
            if idx.size == 0:
                break
            X, Y, dX, dY = _renormalize(*_step_with_derivative(coeffs, X, Y, dX, dY))
            num = np.abs(dX * Y - X * dY)
            den = np.abs(Y) ** 2 if metric == "affine" else np.abs(X) ** 2 + np.abs(Y) ** 2
            u = np.where(num == 0, 0.0, num / den)
            bad = np.isnan(u)
            hit = (u > threshold) & ~bad
            out[idx[hit]] = i
            nan[idx[bad]] = True
            keep = ~(hit | bad)
            if not keep.all():
                idx = idx[keep]
                X, Y, dX, dY = X[keep], Y[keep], dX[keep], dY[keep]
                coeffs = tuple([c[keep] if np.ndim(c) else c for c in part] for part in coeffs)
    return out.reshape(shape), nan.reshape(shape)


def activity_map(
    F: RationalMapFamily,
    a: ProjPointK,
    grid: ParamGrid,
    cap: int = DEFAULT_CAP,
    threshold: float = DEFAULT_THRESHOLD,
    *,
    metric: str = "affine",
    workers: Optional[int] = None,
) -> ActivityMap:
    """First iterate at which the parameter derivative of the marked orbit exceeds ``threshold``.

    ``metric`` selects how the derivative is measured: "affine" uses
    |dz_i/dt| in the coordinate z (infinite when z_i = infinity), "spherical"
    divides by 1 + |z_i|^2.
    """
    if cap < 1:
        raise DomainError("cap must be positive")
    if metric not in ("affine", "spherical"):
        raise DomainError(f"unknown metric {metric!r}")
    t = grid.points()
    parts = map_chunks(
        lambda rows: _activity_rows(F, a, t[rows], cap, threshold, metric), grid.height, workers
    )
    values = np.concatenate([p[0] for p in parts], axis=0)
    nan = np.concatenate([p[1] for p in parts], axis=0)
    return ActivityMap(grid, values, cap, threshold, metric, int(nan.sum()))


# -- preperiodic equations -------------------------------------------------


@dataclass
class PreperiodicEquation:
    n: int
    m: int
    E: Poly
    identically_zero: bool
    points: tuple = ()  # exact normalized orbit points g_0..g_n
    cancelled: tuple = ()  # factors removed at each step

    @property
    def degree(self):
        return -1 if self.identically_zero else self.E.degree


def preperiodic_equation(
    F: RationalMapFamily, a: ProjPointK, n: int, m: int, *, budget: int = DEFAULT_BUDGET
) -> PreperiodicEquation:
    """E = X_n Y_m - X_m Y_n for the normalized orbit points g_i = (X_i : Y_i).

    E is returned as a primitive integer polynomial with positive leading
    coefficient.  If the orbit closes up before step n the exact points are
    continued periodically.
    """
    if not n > m >= 0:
        raise DomainError("need n > m >= 0")
    orb = orbit(F, a, n, budget)
    pts = list(orb.points)
    cancelled = list(orb.cancelled)
    if orb.cycle is not None:
        mu, p = orb.cycle
        while len(pts) < n + 1:
            pts.append(pts[mu + (len(pts) - mu) % p])
        while len(cancelled) < n:
            cancelled.append(cancelled[mu + (len(cancelled) - mu) % p])
    gn, gm = pts[n], pts[m]
    E = gn.a1 * gm.a2 - gm.a1 * gn.a2
    if E.is_zero():
        return PreperiodicEquation(n, m, E, True, tuple(pts), tuple(cancelled))
    E = Poly.from_ints(E.primitive())
    return PreperiodicEquation(n, m, E, False, tuple(pts), tuple(cancelled))


def _orbit_ratio(F, eq: PreperiodicEquation):
    """tau -> E(tau)/E'(tau) evaluated through the lift recurrence.

    Each step applies the lift, divides by the exactly known cancelled factor
    c_i(t) (quotient rule for the derivative) and renormalizes.  Constant
    factors between the recurrence and E do not change the ratio.
    """
    a = eq.points[0]
    cancelled = eq.cancelled
    n, m = eq.n, eq.m

    def ratio(tau):
        tau = np.asarray(tau, dtype=complex)
        coeffs = F.specialize_with_derivative(tau)
        X, dX = _poly_values(a.a1, tau)
        Y, dY = _poly_values(a.a2, tau)
        X, Y, dX, dY = _renormalize(X, Y, dX, dY)
        saved = {0: (X, Y, dX, dY)}
        with np.errstate(all="ignore"):
            for i in range(1, n + 1):
                X, Y, dX, dY = _step_with_derivative(coeffs, X, Y, dX, dY)
                c, dc = _poly_values(cancelled[i - 1], tau)
                dX = (dX * c - X * dc) / (c * c)
                dY = (dY * c - Y * dc) / (c * c)
                X, Y = X / c, Y / c
                X, Y, dX, dY = _renormalize(X, Y, dX, dY)
                saved[i] = (X, Y, dX, dY)
            Xn, Yn, dXn, dYn = saved[n]
            Xm, Ym, dXm, dYm = saved[m]
            H = Xn * Ym - Xm * Yn
            dH = dXn * Ym + Xn * dYm - dXm * Yn - Xm * dYn
            return H / dH

    return ratio


def centroid_circle(E: Poly, seed_angle=0.4):
    """Start points on a circle about the root centroid c.

    The radius is the geometric mean distance of the roots from c,
    |E(c) / lc(E)|^(1/N), computed from exact values; the Newton polygon of
    E itself is useless when its coefficients cancel massively.
    """
    N = E.degree
    c = Fraction(-E.coeff(N - 1) / (N * E.lc)).limit_denominator(1 << 20)
    val = E(c)
    if val == 0:
        c += Fraction(1, 1 << 10)
        val = E(c)
    logr = (_log2_frac(abs(val)) - _log2_frac(abs(E.lc))) / N
    r = 2.0 ** min(max(logr, -60.0), 60.0)
    ang = 2 * np.pi * np.arange(N) / N + seed_angle
    return float(c) + r * np.exp(1j * ang)


def _log2_frac(x: Fraction) -> float:
    return _log2_abs(x.numerator) - _log2_abs(x.denominator)


def _equation_roots(F, eq: PreperiodicEquation, max_iter: int):
    """Roots of E with multiplicities; returns (roots, method).

    Low degree goes to the coefficient-based finder.  Otherwise Aberth runs
    on E / t^k0 with its Newton ratio taken from the orbit recurrence.
    Multiple roots only converge to about sqrt(eps), so corrections down to
    1e-6 are accepted there, and the approximations clustered at each root
    of a small repeated squarefree factor are replaced by that root (from
    the factor's own coefficients) carrying its multiplicity.
    """
    E = eq.E
    k0 = E.low_order()
    core = E.shift_down(k0)
    found = [(0j, k0)] if k0 else []
    if core.degree < 1:
        return found, "coefficients"
    if core.degree < RECURRENCE_MIN_DEGREE:
        found.extend(complex_roots(core).roots)
        return found, "coefficients"
    base = _orbit_ratio(F, eq)

    def ratio(z):
        r = base(z)
        with np.errstate(all="ignore"):
            if k0:
                r = r / (1.0 - k0 * r / z)
        noisy = np.isnan(r)  # 0/0: sitting exactly on a multiple root
        r[noisy] = 0.0
        return r, noisy

    z, ok = aberth(ratio, centroid_circle(core), eps=1e-13, max_iter=max_iter)
    if not ok:
        r, _ = ratio(z)
        if not np.all(np.abs(r) <= 1e-6 * np.maximum(1.0, np.abs(z))):
            raise RootFindingError(
                f"root iteration for E({eq.n},{eq.m}) did not converge", roots=list(z)
            )
    if is_squarefree_modular(core):
        found.extend((complex(r), 1) for r in z)
        return found, "recurrence"
    pool = list(z)
    for g, k in squarefree_factorization(core):
        if k == 1 or g.degree >= RECURRENCE_MIN_DEGREE:
            continue
        for zeta, _ in complex_roots(g).roots:
            for _ in range(k):
                pool.pop(int(np.argmin(np.abs(np.array(pool) - zeta))))
            found.append((zeta, k))
    found.extend((complex(r), 1) for r in pool)
    return found, "recurrence"


@dataclass
class RootSet:
    n: int
    m: int
    roots: list  # verified (complex, multiplicity)
    residuals: list  # chordal collision distance per verified root
    unverified: list = field(default_factory=list)  # (complex, multiplicity, residual)
    degenerate: list = field(default_factory=list)  # roots at degenerate parameters
    bridged: list = field(default_factory=list)  # exact bracket per verified root (None = skipped)
    method: str = "coefficients"
    degree: int = 0

    @property
    def values(self):
        return [z for z, _ in self.roots]


def collision_distance(F: RationalMapFamily, a: ProjPointK, tau, n: int, m: int):
    """Chordal distance between f^n(a(tau)) and f^m(a(tau)) by forward iteration."""
    tau = np.atleast_1d(np.asarray(tau, dtype=complex))
    Pc, Qc = F.specialize(tau)
    X, _ = _poly_values(a.a1, tau)
    Y, _ = _poly_values(a.a2, tau)
    X, Y, _, _ = _renormalize(X, Y, X, Y)
    keep = {}
    with np.errstate(all="ignore"):
        for i in range(n + 1):
            if i == m:
                keep["m"] = (X, Y)
            if i == n:
                break
            X, Y = _form_with_partials(Pc, X, Y)[0], _form_with_partials(Qc, X, Y)[0]
            X, Y, _, _ = _renormalize(X, Y, X, Y)
    Xm, Ym = keep["m"]
    dist = chordal(X, Y, Xm, Ym)
    return np.where(np.isfinite(dist), dist, np.inf)


def preperiodic_parameters(
    F: RationalMapFamily,
    a: ProjPointK,
    n: int,
    m: int,
    tol: float = COLLISION_TOL,
    *,
    equation: Optional[PreperiodicEquation] = None,
    max_iter: int = 1000,
    bridge: bool = True,
) -> RootSet:
    """Numeric roots of the (n, m) equation, each checked by forward iteration.

    A root is verified when the chordal distance between f^n(a(tau)) and
    f^m(a(tau)) is at most ``tol``; the rest are listed in ``unverified``.
    Roots within ``tol`` of a degenerate parameter (t = infinity included
    when it is degenerate) are set aside in ``degenerate``: the lift
    collapses there, so a collision says nothing about f_tau.
    For degree <= BRIDGE_MAX_DEGREE each verified root also gets an exact
    disk certificate (see :func:`exact_root_bracket`).
    """
    eq = equation or preperiodic_equation(F, a, n, m)
    if eq.identically_zero:
        raise DomainError(f"E({n},{m}) vanishes identically: the pair is preperiodic")
    E = eq.E
    if E.degree < 1:
        return RootSet(n, m, [], [], degree=E.degree)
    found, method = _equation_roots(F, eq, max_iter)
    places = F.place_report
    finite = np.array([complex(r) for r, _ in places.finite_places], dtype=complex)
    dist = collision_distance(F, a, [r for r, _ in found], n, m)
    rs = RootSet(n, m, [], [], method=method, degree=E.degree)
    for (r, mult), dd in zip(found, dist):
        near_place = finite.size and np.min(np.abs(finite - r)) <= tol
        if near_place or (places.q_infinity and abs(r) * tol >= 1):
            rs.degenerate.append((r, mult))
        elif dd <= tol:
            rs.roots.append((r, mult))
            rs.residuals.append(float(dd))
            small = bridge and E.degree <= BRIDGE_MAX_DEGREE
            rs.bridged.append(exact_root_bracket(E, r) if small else None)
        else:
            rs.unverified.append((r, mult, float(dd)))
    return rs


def _gaussian_taylor_shift(coeffs, re, im):
    """Coefficients of p(s + (re + i im)) for integer p, Gaussian-integer shift."""
    a = [(c, 0) for c in coeffs]
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            xr, xi = a[j + 1]
            a[j] = (a[j][0] + xr * re - xi * im, a[j][1] + xr * im + xi * re)
    return a


def exact_root_bracket(E: Poly, tau: complex, bits: int = 60) -> bool:
    """Exact certificate that E has a root within a small disk around tau.

    tau is rounded to a dyadic rational tau~ and E(tau~ + s) is expanded
    exactly.  Rouche's theorem against the linear term then proves a root in
    |s| < r whenever |b_0| + sum_{l>=2} |b_l| r^l < |b_1| r, where the complex
    absolute values are bounded above by |re| + |im| and below by max(|re|, |im|).
    """
    num = E.primitive()
    D = len(num) - 1
    scale = 1 << bits
    re, im = round(tau.real * scale), round(tau.imag * scale)
    # 2^(bits*D) E(tau~ + sigma / 2^bits), as a polynomial in sigma
    scaled = [c * (1 << (bits * (D - j))) for j, c in enumerate(num)]
    b = _gaussian_taylor_shift(scaled, re, im)
    b1 = max(abs(b[1][0]), abs(b[1][1]))
    if b1 == 0:
        return False
    b0 = abs(b[0][0]) + abs(b[0][1])
    # radii (in sigma units) of 2, 4, ... times the Newton step, at least one ulp
    step = max(Fraction(b0, b1), Fraction(1, 2))
    for k in range(1, 6):
        rho = step * (1 << k)
        lhs = b0 + sum((abs(br) + abs(bi)) * rho**l for l, (br, bi) in enumerate(b[2:], start=2))
        if lhs < b1 * rho:
            return True
    return False


# -- density ---------------------------------------------------------------


@dataclass
class DensityEntry:
    n: int
    m: int
    identically_preperiodic: bool
    degree: int = 0
    verified: int = 0
    unverified: int = 0
    fraction_in_grid: float = math.nan
    median_distance: float = math.nan
    note: str = ""


@dataclass
class DensityReport:
    entries: list
    active_pixels: int
    nonincreasing: Optional[bool]


def density_experiment(
    F: RationalMapFamily,
    a: ProjPointK,
    grid: ParamGrid,
    pairs,
    *,
    activity: Optional[ActivityMap] = None,
    cap: int = DEFAULT_CAP,
    threshold: float = DEFAULT_THRESHOLD,
    workers: Optional[int] = None,
) -> DensityReport:
    """Median distance from active pixels to the nearest verified root, per (n, m).

    ``nonincreasing`` compares consecutive non-trivial entries in the order
    given; it is None when fewer than two entries have roots.
    """
    amap = activity or activity_map(F, a, grid, cap, threshold, workers=workers)
    pts = grid.points()[amap.active]
    entries = []
    for n, m in pairs:
        eq = preperiodic_equation(F, a, n, m)
        if eq.identically_zero:
            entries.append(DensityEntry(n, m, True, note="identically preperiodic; density trivial"))
            continue
        rs = preperiodic_parameters(F, a, n, m, equation=eq, bridge=False)
        roots = np.array(rs.values, dtype=complex)
        e = DensityEntry(n, m, False, eq.degree, len(rs.roots), len(rs.unverified))
        if roots.size:
            e.fraction_in_grid = float(np.mean(grid.contains(roots)))
            if pts.size:
                tree = cKDTree(np.column_stack([roots.real, roots.imag]))
                dist, _ = tree.query(np.column_stack([pts.real, pts.imag]))
                e.median_distance = float(np.median(dist))
        entries.append(e)
    meds = [e.median_distance for e in entries if not math.isnan(e.median_distance)]
    mono = None if len(meds) < 2 else all(y <= x for x, y in zip(meds, meds[1:]))
    return DensityReport(entries, int(pts.size), mono)
