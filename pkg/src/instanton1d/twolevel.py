"""All-order dilute-gas resummation: the effective two-level system.

Instanton transitions between a pair of same-level wells resum into a 2x2
problem with off-diagonal coupling hbar*K.  A well with g neighbouring wells
(the middle of a triple well has g = 2) picks up the bounce multiplicity as
(hbar K)^2 -> g (hbar K)^2; equivalently k = sqrt(g) hbar K / |e_f - e_i|,
and every closed form below is written through R = sqrt((e_fi/2)^2 +
g (hbar K)^2) so the equal-level limit e_fi -> 0 stays regular.

For g > 1 the "final" channel of the 2x2 model is the symmetric combination
of the g degenerate neighbours, which carries 1/sqrt(g) per physical well;
the endpoint wavefunction table splits that factor back out.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import AmplitudeError, ResolventPoleError
from .instanton import InstantonSolution

K_FORM_TOL = 1e-8


@dataclass(frozen=True)
class TwoLevelSystem:
    """Two coupled SHO ground levels, e_f >= e_i, with degeneracy g.

    Invariants (determinant/trace of the 2x2 problem):
        E_plus + E_minus == e_i + e_f
        E_plus * E_minus == e_i e_f - g (hbar K)^2
    """

    e_i: float
    e_f: float
    hbar: float
    big_k: float
    degeneracy: int
    e_split: float
    small_k: float | None
    E_plus: float
    E_minus: float
    delta_E: float

    @property
    def coupling(self) -> float:
        """sqrt(g) hbar K, the effective off-diagonal matrix element."""
        return math.sqrt(self.degeneracy) * self.hbar * self.big_k

    @property
    def half_gap(self) -> float:
        """R = sqrt((e_fi/2)^2 + g (hbar K)^2) = (E_plus - E_minus)/2."""
        return math.hypot(0.5 * self.e_split, self.coupling)

    def as_dict(self) -> dict:
        return {
            "e_i": self.e_i, "e_f": self.e_f, "hbar": self.hbar,
            "big_k": self.big_k, "degeneracy": self.degeneracy,
            "e_split": self.e_split, "small_k": self.small_k,
            "E_plus": self.E_plus, "E_minus": self.E_minus,
            "delta_E": self.delta_E,
        }


def two_level_energies(e_i: float, e_f: float, hbar: float, big_k: float,
                       degeneracy: int = 1) -> TwoLevelSystem:
    """E_pm = (e_f + e_i)/2 +- R; requires the e_f >= e_i branch and K > 0.

    delta_E = R - |e_fi|/2 (the per-level instanton shift) is computed in the
    cancellation-free form g (hbar K)^2 / (R + |e_fi|/2).
    """
    if big_k <= 0:
        raise ValueError("K must be positive")
    if e_f < e_i:
        raise ValueError("branch convention requires e_f >= e_i (reorder inputs)")
    e_fi = e_f - e_i
    c = math.sqrt(degeneracy) * hbar * big_k
    r = math.hypot(0.5 * e_fi, c)
    delta = c * c / (r + 0.5 * e_fi)
    small_k = (c / e_fi) if e_fi > 0 else None
    return TwoLevelSystem(
        e_i=e_i, e_f=e_f, hbar=hbar, big_k=big_k, degeneracy=degeneracy,
        e_split=e_fi, small_k=small_k,
        E_plus=0.5 * (e_f + e_i) + r, E_minus=0.5 * (e_f + e_i) - r,
        delta_E=delta,
    )


def kay_factor(sol: InstantonSolution, k0: float, hbar: float) -> float:
    """Per-instanton amplitude density K.

    Three algebraically equivalent forms are evaluated -- the Gaussian
    prefactor times K0, the zero-mode amplitude form, and the position
    amplitude form -- and must agree to 1e-8; disagreement signals an
    upstream amplitude-extraction error.  Warns (ValueError at < 1) when
    S/hbar is too small for the dilute gas to mean anything.
    """
    s_over = sol.action / hbar
    if s_over < 1.0:
        raise ValueError("S/hbar < 1: dilute-gas approximation inapplicable")
    if s_over < 5.0:
        warnings.warn("S/hbar < 5: dilute-gas approximation is marginal",
                      stacklevel=2)
    om_i, om_f = sol.omega_i, sol.omega_f
    pref = 0.5 * (math.sqrt(om_f / om_i) + math.sqrt(om_i / om_f))
    boltz = math.exp(-s_over)
    k1 = pref**-0.5 * math.sqrt(sol.action / (2.0 * math.pi * hbar)) * boltz * k0
    k2 = ((om_f * om_i) ** 0.25 / math.sqrt(math.pi * hbar)
          * math.sqrt(sol.amp_i * sol.amp_f * sol.action) * boltz)
    k3 = ((om_f * om_i) ** 0.75 / math.sqrt(math.pi * hbar)
          * math.sqrt(sol.c_i * sol.c_f) * boltz)
    if abs(k2 / k1 - 1.0) > K_FORM_TOL or abs(k3 / k1 - 1.0) > K_FORM_TOL:
        raise AmplitudeError(
            f"K forms disagree: {k1:.12e} / {k2:.12e} / {k3:.12e}"
        )
    return k1


def overlap_odd(sys: TwoLevelSystem, tau) -> np.ndarray | float:
    """Cross overlap (start well -> other well) after resumming odd sectors.

    coefficient * (e^{-E_- tau/hbar} - e^{-E_+ tau/hbar}) with coefficient
    k/sqrt(1+4k^2) = sqrt(g) hbar K / (2R), regular at e_fi = 0 where it
    tends to 1/2.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    coef = sys.coupling / (2.0 * sys.half_gap)
    out = coef * (np.exp(-sys.E_minus * tau / sys.hbar)
                  - np.exp(-sys.E_plus * tau / sys.hbar))
    return out if out.ndim else float(out)


def overlap_even(sys: TwoLevelSystem, tau) -> np.ndarray | float:
    """Return-to-start overlap after resumming even sectors.

    (1 + (1+4k^2)^{-1/2})/2 on E_- and (1 - ...)/2 on E_+, with
    (1+4k^2)^{-1/2} = e_fi/(2R); the coefficients sum to 1 at tau = 0.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    q = sys.e_split / (2.0 * sys.half_gap)
    out = (0.5 * (1.0 + q) * np.exp(-sys.E_minus * tau / sys.hbar)
           + 0.5 * (1.0 - q) * np.exp(-sys.E_plus * tau / sys.hbar))
    return out if out.ndim else float(out)


def _check_below_spectrum(sys: TwoLevelSystem, energy: float) -> None:
    for pole in (sys.E_minus, sys.E_plus):
        if abs(energy - pole) < 1e-13 * max(1.0, abs(pole)):
            raise ResolventPoleError(f"resolvent pole at E = {pole}")


def resolvent_odd(sys: TwoLevelSystem, energy: float) -> float:
    """sqrt(g) hbar K / ((e_f - E)(e_i - E) - g (hbar K)^2).

    Laplace transform of overlap_odd for E below the spectrum; poles sit
    exactly at E_pm.
    """
    _check_below_spectrum(sys, energy)
    den = (sys.e_f - energy) * (sys.e_i - energy) - sys.coupling**2
    return sys.coupling / den


def resolvent_even(sys: TwoLevelSystem, energy: float) -> float:
    """(e_f - E) / ((e_i - E)(e_f - E) - g (hbar K)^2); reduces to the
    isolated-well term 1/(e_i - E) when K -> 0."""
    _check_below_spectrum(sys, energy)
    den = (sys.e_i - energy) * (sys.e_f - energy) - sys.coupling**2
    return (sys.e_f - energy) / den


def laplace_overlap_numeric(sys: TwoLevelSystem, energy: float, odd: bool = True,
                            epsrel: float = 1e-11) -> float:
    """integral_0^inf (dtau/hbar) e^{E tau/hbar} * overlap(tau), by quadrature.

    Converges only below the spectrum (E < E_minus); used as the oracle for
    the closed-form resolvents.
    """
    if energy >= sys.E_minus:
        raise ValueError("Laplace integral diverges for E >= E_minus")
    f = overlap_odd if odd else overlap_even
    # cut where the integrand has decayed by e^{-45}; keeps exp() in range
    t_max = 45.0 * sys.hbar / (sys.E_minus - energy)
    val, _ = quad(lambda t: math.exp(energy * t / sys.hbar) * float(f(sys, t)),
                  0.0, t_max, epsabs=0.0, epsrel=epsrel, limit=400)
    return val / sys.hbar


def simplex_term_odd(n: int, sys: TwoLevelSystem, tau: float,
                     epsrel: float = 1e-12) -> float:
    """Closed single-integral form of the (2n+1)-instanton term.

    g^n K^{2n+1} * integral_0^tau dT (T^n/n!) ((tau-T)^n/n!)
    e^{-(e_i T + e_f (tau-T))/hbar}; the sum over n >= 0 reproduces the
    odd overlap divided by sqrt(g) (the symmetric-combination normalization).
    """
    if n < 0 or tau < 0:
        raise ValueError("need n >= 0 and tau >= 0")
    nf = math.factorial(n)
    mult = sys.degeneracy**n * sys.big_k ** (2 * n + 1)
    if tau == 0.0:
        return 0.0
    val, _ = quad(
        lambda t: (t**n / nf) * ((tau - t) ** n / nf)
        * math.exp(-(sys.e_i * t + sys.e_f * (tau - t)) / sys.hbar),
        0.0, tau, epsabs=0.0, epsrel=epsrel, limit=200)
    return mult * val


def simplex_term_even(n: int, sys: TwoLevelSystem, tau: float,
                      epsrel: float = 1e-12) -> float:
    """Closed single-integral form of the 2n-instanton return term (n >= 1);
    n = 0 is the free decay e^{-e_i tau/hbar}.

    g^n K^{2n} * integral dT_f (T_i^n/n!) (T_f^{n-1}/(n-1)!) e^{-...} with
    T_i = tau - T_f.
    """
    if n < 0 or tau < 0:
        raise ValueError("need n >= 0 and tau >= 0")
    if n == 0:
        return math.exp(-sys.e_i * tau / sys.hbar)
    nf = math.factorial(n)
    nf1 = math.factorial(n - 1)
    mult = sys.degeneracy**n * sys.big_k ** (2 * n)
    if tau == 0.0:
        return 0.0
    val, _ = quad(
        lambda tf: ((tau - tf) ** n / nf) * (tf ** (n - 1) / nf1)
        * math.exp(-(sys.e_i * (tau - tf) + sys.e_f * tf) / sys.hbar),
        0.0, tau, epsabs=0.0, epsrel=epsrel, limit=200)
    return mult * val


def wavefunction_amplitudes(sys: TwoLevelSystem) -> list[dict]:
    """Endpoint values |<well|level>| / (omega/pi hbar)^{1/4} per the 2-level mixing.

    Rows carry the dimensionless mixing factor; multiply by
    (omega_well/pi hbar)^{1/4} for the physical endpoint value (the caller
    knows the well frequencies).  For degeneracy g the "final" rows are per
    physical outer well (the 1/sqrt(g) of the symmetric combination is
    included), and the g = 2 parity-protected level is appended.
    """
    q = sys.e_split / (2.0 * sys.half_gap)  # = (1+4k^2)^{-1/2}
    cos2 = 0.5 * (1.0 + q)
    sin2 = 0.5 * (1.0 - q)
    g = sys.degeneracy
    rows = [
        {"level": "ground", "well": "initial", "mixing": math.sqrt(cos2)},
        {"level": "ground", "well": "final", "mixing": math.sqrt(sin2 / g)},
        {"level": "excited", "well": "initial", "mixing": math.sqrt(sin2)},
        {"level": "excited", "well": "final", "mixing": math.sqrt(cos2 / g)},
    ]
    if g == 2:
        rows.append({"level": "parity", "well": "initial", "mixing": 0.0})
        rows.append({"level": "parity", "well": "final",
                     "mixing": math.sqrt(0.5)})
    return rows
