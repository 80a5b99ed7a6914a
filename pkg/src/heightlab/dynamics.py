"""Exact orbits in P^1(Q(t)), degree growth and canonical-height enclosures.

For a point a with orbit g_i = f^i(a), the canonical height is
lim deg(g_i) / d^i.  Each step changes the degree by at most D_total away
from d * deg(g_i) (finite-place cancellation divides res, the place at
infinity is covered by the flipped model), which yields the rigorous
enclosure

    |h(a) - deg(g_i)/d^i| <= D_total / (d^i (d - 1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from heightlab.algebra import ProjPointK
from heightlab.errors import InvariantViolation, ResourceError
from heightlab.family import RationalMapFamily, apply

DEFAULT_NMAX = 64
DEFAULT_BUDGET = 100_000


@dataclass
class Orbit:
    points: list
    drops: list
    cancelled: list
    cycle: Optional[tuple] = None
    deviations: list = field(default_factory=list)

    @property
    def degrees(self):
        return [p.degree for p in self.points]

    @property
    def max_deviation(self):
        return max((abs(x) for x in self.deviations), default=0)


@dataclass(frozen=True)
class HeightEnclosure:
    lo: Fraction
    hi: Fraction
    n_used: int
    degree_sequence: tuple
    D_total: int = 0
    max_deviation: int = 0

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, x):
        return self.lo <= Fraction(x) <= self.hi


@dataclass(frozen=True)
class Preperiodic:
    m: int
    p: int
    enclosure: HeightEnclosure = None

    kind = "preperiodic"


@dataclass(frozen=True)
class PositiveHeight:
    enclosure: HeightEnclosure

    kind = "positive-height"


@dataclass(frozen=True)
class Undetermined:
    enclosure: HeightEnclosure
    cap: int
    reason: str = "nmax"
    certificate: object = None

    kind = "undetermined"


@dataclass(frozen=True)
class IsotrivialityCertificate:
    """2d+1 consecutive, distinct, constant orbit points starting at ``start``.

    The specializations f_t then agree on 2d+1 points, so f_t restricted to
    this segment does not depend on t.
    """

    start: int
    values: tuple


def _check_step(F, prev: ProjPointK, img: ProjPointK, n: int, D: int):
    dev = img.degree - F.d * prev.degree
    if abs(dev) > D:
        raise InvariantViolation(
            f"per-step degree bound violated at n={n}: "
            f"deg g_n - d*deg g_(n-1) = {dev}, D_total = {D}",
            witness={"n": n, "deviation": dev, "D_total": D, "point": str(prev)},
        )
    return dev


def iterate(F: RationalMapFamily, a: ProjPointK, nmax: int, budget: int = DEFAULT_BUDGET):
    """Yield (n, point, cancelled, deviation, cycle) for n = 1..nmax, stopping on a repeat.

    Raises ResourceError before a step whose output would exceed ``budget``
    stored coefficients.
    """
    D = F.D_total
    seen = {a: 0}
    cur = a
    for n in range(1, nmax + 1):
        predicted = 2 * (F.d * cur.degree + F.coeff_degree + 1)
        if predicted > budget:
            raise ResourceError(
                f"degree budget {budget} exceeded at n={n} (~{predicted} coefficients)", n=n
            )
        img, c = apply(F, cur)
        dev = _check_step(F, cur, img, n, D)
        cycle = None
        if img in seen:
            m = seen[img]
            cycle = (m, n - m)
        else:
            seen[img] = n
        yield n, img, c, dev, cycle
        if cycle is not None:
            return
        cur = img


def orbit(F: RationalMapFamily, a: ProjPointK, nmax: int, budget: int = DEFAULT_BUDGET) -> Orbit:
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    orb = Orbit(points=[a], drops=[], cancelled=[])
    for _, img, c, dev, cycle in iterate(F, a, nmax, budget):
        orb.points.append(img)
        orb.cancelled.append(c)
        orb.drops.append(c.degree)
        orb.deviations.append(dev)
        if cycle is not None:
            orb.cycle = cycle
    return orb


def degree_sequence(F: RationalMapFamily, a: ProjPointK, n: int, budget: int = DEFAULT_BUDGET):
    """deg g_i for i = 0..n (periodic continuation once a cycle closes)."""
    orb = orbit(F, a, n, budget) if n >= 1 else Orbit([a], [], [])
    degs = orb.degrees
    if orb.cycle is not None:
        m, p = orb.cycle
        while len(degs) < n + 1:
            degs.append(degs[m + (len(degs) - m) % p])
    return degs[: n + 1]


class _EnclosureAccumulator:
    def __init__(self, d, D):
        self.d = d
        self.D = D
        self.lo = Fraction(0)
        self.hi = None
        self.degrees = []

    def add(self, i, deg):
        self.degrees.append(deg)
        scale = Fraction(1, self.d**i)
        center = deg * scale
        half = Fraction(self.D, self.d - 1) * scale
        lo, hi = center - half, center + half
        self.lo = max(self.lo, lo)
        self.hi = hi if self.hi is None else min(self.hi, hi)
        if self.lo > self.hi:
            raise InvariantViolation(
                f"bound violated: empty height enclosure at n={i} "
                f"(lo={self.lo}, hi={self.hi}); D_total={self.D} is not a valid bound",
                witness={"n": i, "degrees": list(self.degrees)},
            )

    def result(self, n_used, max_dev):
        return HeightEnclosure(
            self.lo, self.hi, n_used, tuple(self.degrees), self.D, max_dev
        )


def canonical_height(
    F: RationalMapFamily, a: ProjPointK, n: int, budget: int = DEFAULT_BUDGET
) -> HeightEnclosure:
    """Rigorous enclosure of the canonical height from n iterates ([0,0] if preperiodic)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    acc = _EnclosureAccumulator(F.d, F.D_total)
    acc.add(0, a.degree)
    max_dev = 0
    for i, img, _, dev, cycle in iterate(F, a, n, budget):
        max_dev = max(max_dev, abs(dev))
        if cycle is not None:
            acc.degrees.append(img.degree)
            return HeightEnclosure(Fraction(0), Fraction(0), i, tuple(acc.degrees), F.D_total, max_dev)
        acc.add(i, img.degree)
    return acc.result(n, max_dev)


def classify(
    F: RationalMapFamily,
    a: ProjPointK,
    nmax: int = DEFAULT_NMAX,
    budget: int = DEFAULT_BUDGET,
):
    """Preperiodic (exact cycle), PositiveHeight (lo > 0) or Undetermined.

    Stops as soon as either verdict is certain; hitting the degree budget
    ends the search with Undetermined rather than an error.
    """
    acc = _EnclosureAccumulator(F.d, F.D_total)
    acc.add(0, a.degree)
    orb = Orbit(points=[a], drops=[], cancelled=[])
    max_dev = 0
    n_done = 0
    reason = "nmax"
    try:
        for i, img, c, dev, cycle in iterate(F, a, nmax, budget):
            n_done = i
            max_dev = max(max_dev, abs(dev))
            orb.points.append(img)
            orb.cancelled.append(c)
            orb.drops.append(c.degree)
            orb.deviations.append(dev)
            if cycle is not None:
                acc.degrees.append(img.degree)
                enc = HeightEnclosure(Fraction(0), Fraction(0), i, tuple(acc.degrees), F.D_total, max_dev)
                return Preperiodic(cycle[0], cycle[1], enc)
            acc.add(i, img.degree)
            if acc.lo > 0:
                return PositiveHeight(acc.result(i, max_dev))
    except ResourceError:
        reason = "budget"
    cert = constant_tail_certificate(orb, F.d)
    return Undetermined(acc.result(n_done, max_dev), n_done, reason, cert)


def constant_tail_certificate(orb: Orbit, d: int) -> Optional[IsotrivialityCertificate]:
    """First run of >= 2d+1 consecutive, pairwise distinct constant orbit points."""
    need = 2 * d + 1
    run = []
    start = 0
    for i, p in enumerate(orb.points):
        if p.is_constant() and p not in run:
            if not run:
                start = i
            run.append(p)
            if len(run) >= need:
                return IsotrivialityCertificate(start, tuple(q.constant_value() for q in run))
        else:
            run = [p] if p.is_constant() else []
            start = i
    return None
