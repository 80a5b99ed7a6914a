"""Escape rates of a marked lift at a degenerate parameter t = 0.

With a_n = ord_{t=0} F^n(A) and F_n = t^(-a_n) F^n(A), the increments
k_n = a_n - d a_(n-1) lie in [0, q] for q = ord_{t=0} res, and

    G_n(t) = d^(-n) log ||F_n(t)||,   ||(z1, z2)|| = max(|z1|, |z2|)

converges on the punctured disk.  Orders are computed exactly; the grids are
evaluated in doubles with the norm carried in a separate log register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from heightlab.algebra import Poly
from heightlab.errors import DomainError, InvariantViolation, ResourceError
from heightlab.family import RationalMapFamily
from heightlab.parallel import map_chunks

# exact lifts grow like d^N in degree and in coefficient size
EXACT_MAX_GROWTH = 4096
DEFAULT_DEGREE_BUDGET = 200_000


@dataclass(frozen=True)
class MarkedLift:
    A1: Poly
    A2: Poly

    def __post_init__(self):
        A1 = self.A1 if isinstance(self.A1, Poly) else Poly.constant(self.A1)
        A2 = self.A2 if isinstance(self.A2, Poly) else Poly.constant(self.A2)
        object.__setattr__(self, "A1", A1)
        object.__setattr__(self, "A2", A2)
        if A1.coeff(0) == 0 and A2.coeff(0) == 0:
            raise DomainError("marked lift must not vanish at t = 0")

    def scaled(self, c):
        """(c*A1, c*A2) for a nonzero constant c."""
        return MarkedLift(self.A1 * c, self.A2 * c)

    def times_t_power(self, j):
        """(t^j A1, t^j A2); vanishes at 0, so only usable numerically."""
        return _RawLift(self.A1.shift_up(j), self.A2.shift_up(j))

    def evaluate(self, t):
        t = np.asarray(t, dtype=complex)
        return _polyval(self.A1, t), _polyval(self.A2, t)


class _RawLift(MarkedLift):
    """A lift allowed to vanish at 0 (e.g. t^j * A); only used numerically."""

    def __post_init__(self):
        pass


def _polyval(p: Poly, t):
    if p.is_zero():
        return np.zeros_like(t)
    return np.polyval(np.array([float(c) for c in reversed(p.coeffs)]), t)


@dataclass
class OrderSequence:
    q: int
    a: list
    k: list
    restart_index: Optional[int] = None
    ell: list = field(default_factory=list)
    mode: str = "exact"
    final_lift: tuple = None

    def normalized(self, d):
        """a_n / d^n as exact Fractions."""
        return [Fraction(a, d**n) for n, a in enumerate(self.a)]


def _iterate_orders(F, X1, X2, N, q, *, precision=None, budget=DEFAULT_DEGREE_BUDGET, strict_bound=True):
    """Exact (precision None) or truncated power-series iteration of the lift."""
    ks = []
    prec = precision
    for n in range(1, N + 1):
        if precision is not None and prec <= q:
            raise ResourceError(f"series precision exhausted at n={n} (have {prec}, need > {q})", n=n)
        if precision is None and 2 * F.d * (max(X1.degree, X2.degree) + F.coeff_degree) > budget:
            raise ResourceError(f"degree budget {budget} exceeded at n={n}", n=n)
        Y1, Y2 = F.P(X1, X2), F.Q(X1, X2)
        if precision is not None:
            Y1, Y2 = Y1.truncate(prec), Y2.truncate(prec)
        orders = [Y.low_order() for Y in (Y1, Y2) if not Y.is_zero()]
        if not orders:
            raise InvariantViolation(f"lift became zero at n={n}")
        k = min(orders)
        if strict_bound and not 0 <= k <= q:
            raise InvariantViolation(
                f"order increment k_{n} = {k} outside [0, q={q}]", witness={"n": n, "k": k, "q": q}
            )
        ks.append(k)
        X1, X2 = Y1.shift_down(k), Y2.shift_down(k)
        if precision is not None:
            prec -= k
    return ks, (X1, X2)


def order_sequence(
    F: RationalMapFamily,
    A: MarkedLift,
    N: int,
    *,
    lenient: bool = False,
    mode: str = "auto",
    precision: Optional[int] = None,
    restart: Optional[int] = None,
    budget: int = DEFAULT_DEGREE_BUDGET,
) -> OrderSequence:
    """Orders a_n of F^n(A) at t = 0 and their increments k_n.

    ``mode`` is "exact", "series" or "auto" (exact while d^N <= 4096).
    In series mode every stripped lift is kept modulo t^p with p shrinking by
    k_n per step; exactness only needs p > q before each step, so the default
    precision is q*(N+1) + 1.  ``restart`` = N' additionally iterates from
    F_{N'} and records its increments in ``ell``.
    """
    q = F.res.low_order()
    if q == 0 and not lenient:
        raise DomainError("family is not degenerate at t = 0 (q = 0); pass lenient=True")
    if mode == "auto":
        mode = "exact" if F.d**N <= EXACT_MAX_GROWTH else "series"
    if mode == "series":
        prec = precision if precision is not None else q * (N + 1) + 1
        X1, X2 = A.A1.truncate(prec), A.A2.truncate(prec)
    elif mode == "exact":
        prec = None
        X1, X2 = A.A1, A.A2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    ks, final = _iterate_orders(F, X1, X2, N, q, precision=prec, budget=budget)
    a = [0]
    for k in ks:
        a.append(F.d * a[-1] + k)
    seq = OrderSequence(q=q, a=a, k=ks, mode=mode, final_lift=final)
    check_order_invariants(seq, F.d)
    if restart is not None:
        if not 0 <= restart < N:
            raise ValueError("restart index must satisfy 0 <= N' < N")
        head = order_sequence(F, A, restart, lenient=True, mode=mode, precision=precision, budget=budget)
        R1, R2 = head.final_lift
        if mode == "series":
            p2 = q * (N - restart + 1) + 1
            R1, R2 = R1.truncate(p2), R2.truncate(p2)
        ells, _ = _iterate_orders(
            F, R1, R2, N - restart, q, precision=p2 if mode == "series" else None, budget=budget
        )
        seq.restart_index = restart
        seq.ell = ells
    return seq


def check_order_invariants(seq: OrderSequence, d: int):
    """a_0 = 0, 0 <= k_n <= q, a_n/d^n nondecreasing with steps <= q/d^n (exact)."""
    if seq.a[0] != 0:
        raise InvariantViolation("a_0 != 0")
    norm = seq.normalized(d)
    for n, k in enumerate(seq.k, start=1):
        if not 0 <= k <= seq.q:
            raise InvariantViolation(f"k_{n} = {k} outside [0, {seq.q}]")
        if seq.a[n] - d * seq.a[n - 1] != k:
            raise InvariantViolation(f"a_{n} inconsistent with k_{n}")
        step = norm[n] - norm[n - 1]
        if step < 0 or step > Fraction(seq.q, d**n):
            raise InvariantViolation(f"a_n/d^n step {step} at n={n} outside [0, q/d^n]")


# -- numerics ---------------------------------------------------------------


def eval_forms(P_coeffs, Q_coeffs, u1, u2):
    """P_t(u1, u2), Q_t(u1, u2) given specialized coefficient arrays."""
    d = len(P_coeffs) - 1
    p1 = [np.ones_like(u1)]
    p2 = [np.ones_like(u2)]
    for _ in range(d):
        p1.append(p1[-1] * u1)
        p2.append(p2[-1] * u2)
    P = sum(P_coeffs[j] * p1[d - j] * p2[j] for j in range(d + 1))
    Q = sum(Q_coeffs[j] * p1[d - j] * p2[j] for j in range(d + 1))
    return P, Q


def maxnorm(u1, u2):
    return np.maximum(np.abs(u1), np.abs(u2))


def escape_values(F: RationalMapFamily, A: MarkedLift, t, ks):
    """G_0..G_N at parameter values t (array) given exact increments ks.

    The lift's own order at t = 0 (nonzero only for raw t^j A lifts) is
    stripped as a_0.  Returns an array of shape (N+1,) + t.shape.
    """
    t = np.asarray(t, dtype=complex)
    d = F.d
    Pc, Qc = F.specialize(t)
    a0 = min(p.low_order() for p in (A.A1, A.A2) if not p.is_zero())
    logt = np.log(np.abs(t))
    u1, u2 = A.evaluate(t)
    nrm = maxnorm(u1, u2)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.log(nrm) - a0 * logt
        u1, u2 = u1 / nrm, u2 / nrm
    out = [S.copy()]
    for n, k in enumerate(ks, start=1):
        v1, v2 = eval_forms(Pc, Qc, u1, u2)
        nv = maxnorm(v1, v2)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            S = d * S + np.log(nv) - k * logt
            u1, u2 = v1 / nv, v2 / nv
        out.append(S / float(d) ** n)
    return np.array(out)


@dataclass(frozen=True)
class AnnulusSpec:
    r_in: float
    r_out: float
    n_angular: int = 64
    n_radial: int = 64

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise DomainError("annulus needs 0 < r_in < r_out")
        if self.n_angular < 1 or self.n_radial < 1:
            raise DomainError("grid resolution must be positive")

    def points(self):
        """Complex sample points, shape (n_radial, n_angular), log-spaced radii."""
        r = np.exp(np.linspace(math.log(self.r_in), math.log(self.r_out), self.n_radial))
        theta = 2 * np.pi * (np.arange(self.n_angular) + 0.5) / self.n_angular
        return r[:, None] * np.exp(1j * theta)[None, :]


@dataclass
class EscapeGrid:
    spec: AnnulusSpec
    t: np.ndarray
    values: np.ndarray  # (N+1, n_radial, n_angular)
    ks: list
    norm: str = "max"
    nan_cells: int = 0

    def sup_increments(self):
        """sup over the grid of |G_(n+1) - G_n| for n = 0..N-1 (fixed reduction order)."""
        diffs = np.abs(np.diff(self.values, axis=0))
        return [float(np.nanmax(x)) for x in diffs]


def escape_grid(
    F: RationalMapFamily,
    A: MarkedLift,
    spec: AnnulusSpec,
    N: int,
    *,
    lenient: bool = True,
    workers: int = 1,
) -> EscapeGrid:
    seq = order_sequence(F, A, N, lenient=lenient, mode="series")
    t = spec.points()
    chunks = map_chunks(lambda rows: escape_values(F, A, t[rows], seq.k), t.shape[0], workers)
    values = np.concatenate(chunks, axis=1)
    nan_cells = int(np.count_nonzero(~np.isfinite(values[-1])))
    return EscapeGrid(spec, t, values, seq.k, nan_cells=nan_cells)


def convergence_ratios(grid: EscapeGrid, n_from=3, n_to=None):
    """Ratios sup|G_(n+1)-G_n| / sup|G_n-G_(n-1)| for n = n_from..n_to."""
    sups = grid.sup_increments()
    n_to = len(sups) - 1 if n_to is None else n_to
    return {
        n: (sups[n] / sups[n - 1] if sups[n - 1] > 0 else math.nan)
        for n in range(n_from, n_to + 1)
    }


@dataclass
class SlowGrowthReport:
    radii: list
    m: list
    nonincreasing: bool
    slack: float


def slow_growth_diagnostic(
    F: RationalMapFamily,
    A: MarkedLift,
    radii,
    N: int,
    *,
    n_angular: int = 256,
    slack: float = 0.10,
    lenient: bool = True,
) -> SlowGrowthReport:
    """m(r) = max_{|t|=r} |G_N(t)| / |log r|; no verdict on continuity at 0 is drawn."""
    radii = [float(r) for r in radii]
    if any(not 0 < r < 1 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must lie in (0, 1) and decrease")
    seq = order_sequence(F, A, N, lenient=lenient, mode="series")
    theta = 2 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    m = []
    for r in radii:
        G = escape_values(F, A, r * np.exp(1j * theta), seq.k)[-1]
        m.append(float(np.max(np.abs(G))) / abs(math.log(r)))
    # absolute floor so that G = 0 up to rounding does not count as growth
    ok = all(b <= a * (1 + slack) + 1e-12 for a, b in zip(m, m[1:]))
    return SlowGrowthReport(radii, m, ok, slack)


@dataclass
class BoundCheck:
    q: int
    alpha_hat: float
    beta_hat: float
    violations: int
    samples: int


def sample_unit_vectors(rng, n):
    """Vectors of max-norm 1: one coordinate 1, the other uniform in the unit disk."""
    r = np.sqrt(rng.random(n))
    w = r * np.exp(2j * np.pi * rng.random(n))
    first = rng.random(n) < 0.5
    z1 = np.where(first, 1.0 + 0j, w)
    z2 = np.where(first, w, 1.0 + 0j)
    return z1, z2


def sample_parameters(rng, n, rmin, rmax):
    r = np.exp(rng.uniform(math.log(rmin), math.log(rmax), n))
    return r * np.exp(2j * np.pi * rng.random(n))


def lemma_bound_check(F: RationalMapFamily, t_samples, z_samples) -> BoundCheck:
    """Empirical constants in alpha |t|^q <= ||F_t(z)|| / ||z||^d <= beta."""
    q = F.res.low_order()
    t = np.asarray(t_samples, dtype=complex)
    z1, z2 = (np.asarray(z, dtype=complex) for z in z_samples)
    Pc, Qc = F.specialize(t)
    v1, v2 = eval_forms(Pc, Qc, z1, z2)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = maxnorm(v1, v2) / maxnorm(z1, z2) ** F.d
        scaled = ratio / np.abs(t) ** q
    good = np.isfinite(ratio) & np.isfinite(scaled)
    return BoundCheck(
        q=q,
        alpha_hat=float(np.min(scaled[good])),
        beta_hat=float(np.max(ratio[good])),
        violations=int(np.count_nonzero(~good)),
        samples=int(t.size),
    )


def homogeneous_escape_rate(F: RationalMapFamily, t, z, N: int, *, tol: float = 1e-12):
    """G_{F_t}(z) ~ d^(-N) log ||F_t^N(z)|| for a nondegenerate parameter t."""
    if abs(F.res_value(complex(t))) <= tol:
        raise DomainError(f"parameter t = {t} is (numerically) degenerate")
    Pc, Qc = F.specialize(np.asarray(complex(t)))
    u1, u2 = (np.asarray(c, dtype=complex) for c in z)
    nrm = maxnorm(u1, u2)
    S = np.log(nrm)
    u1, u2 = u1 / nrm, u2 / nrm
    for _ in range(N):
        v1, v2 = eval_forms(Pc, Qc, u1, u2)
        nv = maxnorm(v1, v2)
        S = F.d * S + np.log(nv)
        u1, u2 = v1 / nv, v2 / nv
    G = S / float(F.d) ** N
    return float(G) if np.ndim(G) == 0 else G


@dataclass
class GaugeCheck:
    spread: float
    mean_value_defect: float
    tolerance: float


def stability_linkage(F: RationalMapFamily, A: MarkedLift, spec: AnnulusSpec, N: int) -> GaugeCheck:
    """Shadow of G = 0 (up to the harmonic lift gauge) for a stable pair.

    ``spread`` is max |G_N - mean G_N| over the annulus.  A gauge change of
    the lift adds a harmonic function, so ``mean_value_defect`` (the largest
    gap between G_N at a point and its average over a small circle around
    it) is the gauge-free version of the same check.
    """
    grid = escape_grid(F, A, spec, N)
    G = grid.values[-1]
    spread = float(np.max(np.abs(G - G.mean())))
    defect = _mean_value_defect(F, A, grid.ks, spec)
    return GaugeCheck(spread, defect, 10.0 * float(F.d) ** (-N))


def _mean_value_defect(F, A, ks, spec: AnnulusSpec, n_disks=8, n_circle=128):
    """max over small disks inside the annulus of |G(c) - mean_{|t-c|=rho} G|."""
    r_mid = math.sqrt(spec.r_in * spec.r_out)
    rho = 0.45 * min(r_mid - spec.r_in, spec.r_out - r_mid)
    centers = r_mid * np.exp(2j * np.pi * np.arange(n_disks) / n_disks)
    phi = 2 * np.pi * (np.arange(n_circle) + 0.5) / n_circle
    worst = 0.0
    for c in centers:
        ring = c + rho * np.exp(1j * phi)
        g_ring = escape_values(F, A, ring, ks)[-1]
        g_c = escape_values(F, A, np.array([c]), ks)[-1][0]
        worst = max(worst, abs(float(np.mean(g_ring)) - float(g_c)))
    return worst
