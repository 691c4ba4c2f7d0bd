"""Polynomial potentials, well detection, and the same-level assumption.

A potential is a polynomial V(x) = sum_k c_k x^k (+ zero_shift) with mass
m = 1, degree >= 4 and positive leading coefficient, so it confines and can
host several minima.  Derivatives are exact polynomial arithmetic: the well
frequencies omega = sqrt(V''(x*)) and the fluctuation potential V''(X(tau))
downstream must not carry finite-difference noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import NotMultiWellError, NotSameLevelError
from .numerics import compensated_polyval

DEFAULT_LEVEL_TOL = 1e-9
DEFAULT_SCAN_POINTS = 4096


@dataclass(frozen=True)
class PotentialModel:
    """Polynomial potential with exact derivatives.

    coefficients[k] multiplies x^k; zero_shift is the constant added so that
    well bottoms sit at V = 0.
    """

    coefficients: tuple[float, ...]
    zero_shift: float = 0.0

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coefficients, dtype=float), "b")
        if c.size - 1 < 4:
            raise ValueError("potential degree must be >= 4")
        if c[-1] <= 0:
            raise ValueError("leading coefficient must be positive (confining)")
        object.__setattr__(self, "coefficients", tuple(float(x) for x in c))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def value(self, x):
        # compensated Horner: plain evaluation is cancellation noise near the
        # double roots at the well bottoms, where sqrt(2V) drives the tails
        return compensated_polyval(self.coefficients, x) + self.zero_shift

    def first(self, x):
        return P.polyval(x, P.polyder(self.coefficients))

    def second(self, x):
        return P.polyval(x, P.polyder(self.coefficients, 2))

    __call__ = value

    def root_bound(self) -> float:
        """Cauchy bound: all real roots of V' lie within [-B, B]."""
        d = P.polyder(self.coefficients)
        return 1.0 + float(np.max(np.abs(d[:-1] / d[-1])))

    def with_zero_level(self, wells: "list[Well]") -> "PotentialModel":
        """Shift so the mean well-bottom level sits at V = 0."""
        mean = float(np.mean([self.value(w.position) for w in wells]))
        return replace(self, zero_shift=self.zero_shift - mean)


@dataclass(frozen=True)
class Well:
    """A minimum of V: position, frequency omega = sqrt(V''), SHO ground energy."""

    position: float
    omega: float
    ground_energy: float

    @property
    def curvature(self) -> float:
        return self.omega**2


@dataclass(frozen=True)
class WellPair:
    """Two adjacent wells with the barrier top of the segment between them."""

    initial: Well
    final: Well
    barrier_top: float
    barrier_position: float

    def __post_init__(self):
        if not self.initial.position < self.final.position:
            raise ValueError("initial well must lie left of final well")


def _refine_root(model: PotentialModel, a: float, b: float, tol: float) -> float:
    fa = model.first(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = model.first(m)
        if fm == 0.0:
            a = b = m
            break
        if (fa < 0) != (fm < 0):
            b = m
        else:
            a, fa = m, fm
    # Newton polish on V' (V'' is exact); simple roots converge to eps level
    x = 0.5 * (a + b)
    for _ in range(3):
        d2 = model.second(x)
        if d2 == 0.0:
            break
        x = x - model.first(x) / d2
    return x


def find_wells(
    model: PotentialModel,
    scan_interval: tuple[float, float] | None = None,
    root_tol: float | None = None,
    level_tol: float = DEFAULT_LEVEL_TOL,
    hbar: float = 1.0,
    n_scan: int = DEFAULT_SCAN_POINTS,
) -> list[Well]:
    """All minima of V on the interval, sorted by position.

    Roots of V' are bracketed by sign changes on a uniform scan and refined
    by bisection; minima are classified by V'' > 0.  Raises NotMultiWellError
    if fewer than two minima are found and NotSameLevelError if the bottoms
    differ by more than level_tol relative to the barrier scale.
    """
    if scan_interval is None:
        b = model.root_bound()
        scan_interval = (-b, b)
    lo, hi = scan_interval
    if root_tol is None:
        root_tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
    xs = np.linspace(lo, hi, n_scan)
    fs = model.first(xs)
    roots = []
    for k in range(n_scan - 1):
        if fs[k] == 0.0:
            roots.append(_refine_root(model, xs[k], xs[k], root_tol))
        elif (fs[k] < 0) != (fs[k + 1] < 0):
            roots.append(_refine_root(model, xs[k], xs[k + 1], root_tol))
    if fs[-1] == 0.0:
        roots.append(xs[-1])
    # exact grid hits and bracketed refinements can find the same root twice
    roots.sort()
    dedup: list[float] = []
    sep = 1e-9 * max(abs(lo), abs(hi), 1.0)
    for r in roots:
        if not dedup or r - dedup[-1] > sep:
            dedup.append(r)

    wells = []
    for r in dedup:
        curv = model.second(r)
        if curv > 0:
            omega = float(np.sqrt(curv))
            wells.append(Well(float(r), omega, 0.5 * hbar * omega))
    wells.sort(key=lambda w: w.position)
    if len(wells) < 2:
        raise NotMultiWellError(
            f"not a multi-well: found {len(wells)} minima in {scan_interval}"
        )
    if not same_level_check(model, wells, level_tol):
        raise NotSameLevelError("not same-level: well bottoms differ beyond tolerance")
    return wells


def barrier_top(model: PotentialModel, left: Well, right: Well) -> tuple[float, float]:
    """(height, position) of the maximum of V strictly between two wells."""
    xs = np.linspace(left.position, right.position, 2049)[1:-1]
    vs = model.value(xs)
    k = int(np.argmax(vs))
    # refine the max via bisection on V' (leftmost maximum on ties)
    a = xs[max(k - 1, 0)]
    b = xs[min(k + 1, xs.size - 1)]
    pos = _refine_root(model, a, b, 1e-14 * max(1.0, abs(b)))
    return float(model.value(pos)), float(pos)


def same_level_check(
    model: PotentialModel, wells: list[Well], level_tol: float = DEFAULT_LEVEL_TOL
) -> bool:
    """True iff all well bottoms agree within level_tol of the barrier scale."""
    if not wells:
        raise ValueError("wells must be nonempty")
    if len(wells) == 1:
        return True
    levels = [model.value(w.position) for w in wells]
    scale = 0.0
    for a, b in zip(wells[:-1], wells[1:]):
        height, _ = barrier_top(model, a, b)
        scale = max(scale, abs(height - min(levels)))
    spread = max(levels) - min(levels)
    return spread <= level_tol * max(scale, 1e-300)


def adjacent_pairs(model: PotentialModel, wells: list[Well]) -> list[WellPair]:
    """WellPair for each adjacent pair, with V > 0 checked strictly between."""
    pairs = []
    for a, b in zip(wells[:-1], wells[1:]):
        height, pos = barrier_top(model, a, b)
        xs = np.linspace(a.position, b.position, 4097)[1:-1]
        # the zero-level shift leaves ~eps^2-scale residue at the bottoms;
        # only dips beyond float noise of the barrier scale are real
        if np.min(model.value(xs)) < -1e-14 * height:
            raise NotSameLevelError(
                "potential dips below the well level between wells"
            )
        pairs.append(WellPair(a, b, height, pos))
    return pairs


# ---------------------------------------------------------------------------
# presets

def symmetric_double_well(lam: float, a: float | None = None,
                          omega: float | None = None) -> PotentialModel:
    """V = (lam/4!)(x^2 - a^2)^2, wells at +-a with omega^2 = lam a^2 / 3.

    Exactly one of a / omega may be given; omega defaults to 1.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if a is None:
        omega = 1.0 if omega is None else omega
        a = float(np.sqrt(3.0 * omega**2 / lam))
    elif omega is not None:
        raise ValueError("give either a or omega, not both")
    c = lam / 24.0
    model = PotentialModel((c * a**4, 0.0, -2.0 * c * a**2, 0.0, c))
    return model


def triple_well(lam: float, a: float = 1.0) -> PotentialModel:
    """V = (lam/2) x^2 (x^2 - a^2)^2, wells at {-a, 0, a}.

    Middle-well frequency omega_m = sqrt(lam) a^2; outer wells have 2 omega_m.
    """
    if lam <= 0 or a <= 0:
        raise ValueError("lambda and a must be positive")
    h = lam / 2.0
    return PotentialModel((0.0, 0.0, h * a**4, 0.0, -2.0 * h * a**2, 0.0, h))
