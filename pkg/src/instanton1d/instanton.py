"""The classical 1-instanton between two adjacent wells.

The trajectory solves dX/dtau = +sqrt(2V(X)) (Euclidean energy exactly zero,
which also suppresses the unstable growing mode a second-order solve would
excite).  Integration starts at the barrier-top crossing and runs outward
both ways; the zero-energy velocity makes the approach to each well a clean
exponential with rate omega.

Asymptotic amplitudes are reported in the gauge where the zero-mode tail
amplitudes on the two sides are equal (A_i = A_f).  For asymmetric wells the
amplitudes A, C and the determinant quotient K0 all depend on where the
reference time tau1 is placed; only the equal-amplitude choice is symmetric
between the wells, and it is the convention under which the worked closed
forms for the asymmetric case hold.  The anchor used to *start* the ODE
(barrier top) is kept separately as `tau1`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import AmplitudeError, Instanton1DError, NotSameLevelError
from .potential import PotentialModel, WellPair

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_ODE_TOL = 1e-13
# fit window in units of omega*|tau - tau1|: deep enough that the
# anharmonic tail corrections are absorbed by a few basis terms, shallow
# enough that the data stay far above the trajectory noise floor
FIT_LO, FIT_HI = 10.0, 16.0


@dataclass(frozen=True, eq=False)
class InstantonSolution:
    """Sampled 1-instanton trajectory with action and asymptotic amplitudes.

    tau1 is the ODE anchor (barrier-top crossing); tau1_ref is the
    equal-amplitude reference time used for amplitudes and the GY step model.
    amp_i == amp_f by construction of the gauge; c_i, c_f are the position
    amplitudes |X - X_pm| ~ C_pm exp(-omega_pm |tau - tau1_ref|).
    """

    pair: WellPair
    tau1: float
    tau1_ref: float
    tau_grid: np.ndarray
    x_bar: np.ndarray
    x_bar_dot: np.ndarray
    action: float
    amp_i: float
    amp_f: float
    c_i: float
    c_f: float
    fit_residual: float
    x_of_tau: Callable[[np.ndarray], np.ndarray]

    @property
    def omega_i(self) -> float:
        return self.pair.initial.omega

    @property
    def omega_f(self) -> float:
        return self.pair.final.omega

    def translated(self, delta: float) -> "InstantonSolution":
        """The same physical solution with all times shifted by delta."""
        inner = self.x_of_tau
        return replace(
            self,
            tau1=self.tau1 + delta,
            tau1_ref=self.tau1_ref + delta,
            tau_grid=self.tau_grid + delta,
            x_of_tau=lambda t: inner(np.asarray(t) - delta),
        )

    def summary(self) -> dict:
        return {
            "action": self.action,
            "tau1": self.tau1,
            "tau1_ref": self.tau1_ref,
            "amp_i": self.amp_i,
            "amp_f": self.amp_f,
            "c_i": self.c_i,
            "c_f": self.c_f,
            "omega_i": self.omega_i,
            "omega_f": self.omega_f,
            "fit_residual": self.fit_residual,
        }

    def write_csv(self, path) -> None:
        x0 = zero_mode(self)
        with open(path, "w") as fh:
            fh.write("tau,x_bar,x_bar_dot,x0\n")
            for row in zip(self.tau_grid, self.x_bar, self.x_bar_dot, x0):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def write_summary_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def action_between(model: PotentialModel, xi: float, xf: float,
                   quad_tol: float = DEFAULT_QUAD_TOL,
                   v_floor: float = 0.0) -> float:
    """integral_{xi}^{xf} sqrt(2 V) dX; zero for a degenerate interval.

    sqrt(2V) vanishes like |X - X_pm| at the endpoints; substituting
    X = X_pm -+ u^2 removes the square-root behaviour of the error term in
    adaptive quadrature there, and plain Gauss-Kronrod covers the middle.
    """
    if xf <= xi:
        return 0.0

    def integrand(x):
        v = model.value(x)
        if v < v_floor:
            raise NotSameLevelError(
                "potential dips below zero between wells; not same-level"
            )
        return math.sqrt(2.0 * v) if v > 0 else 0.0

    d = 0.125 * (xf - xi)
    # endpoints: X = xi + u^2 (resp. xf - u^2), dX = 2 u du
    left, _ = quad(lambda u: integrand(xi + u * u) * 2.0 * u,
                   0.0, math.sqrt(d), epsabs=0.0, epsrel=quad_tol, limit=200)
    right, _ = quad(lambda u: integrand(xf - u * u) * 2.0 * u,
                    0.0, math.sqrt(d), epsabs=0.0, epsrel=quad_tol, limit=200)
    mid, _ = quad(integrand, xi + d, xf - d,
                  epsabs=0.0, epsrel=quad_tol, limit=200)
    return left + mid + right


def action_quadrature(
    model: PotentialModel, pair: WellPair, quad_tol: float = DEFAULT_QUAD_TOL
) -> float:
    """On-shell action S = integral sqrt(2 V) dX between the two well bottoms."""
    return action_between(model, pair.initial.position, pair.final.position,
                          quad_tol, v_floor=-1e-14 * pair.barrier_top)


def solve_trajectory(
    model: PotentialModel,
    pair: WellPair,
    window: float | None = None,
    ode_tol: float = DEFAULT_ODE_TOL,
    sample_dt: float | None = None,
) -> InstantonSolution:
    """Integrate the 1-instanton and extract action, amplitudes, and samples.

    `window` is the half-width in time around the anchor.  It must satisfy
    window * min(omega) >= 20 so both tails are deep in the SHO regime; the
    default gives 26 e-foldings on the slower side.
    """
    om_min = min(pair.initial.omega, pair.final.omega)
    om_max = max(pair.initial.omega, pair.final.omega)
    if window is None:
        window = 26.0 / om_min
    if window * om_min < 20.0:
        raise ValueError("window too small: need window*min(omega) >= 20")

    x_top = pair.barrier_position
    x_lo, x_hi = pair.initial.position, pair.final.position

    def rhs(t, y):
        # the wells are fixed points; the rhs is clamped outside (x_lo, x_hi)
        # so an overshooting step cannot run away up the outer slope
        if not x_lo < y[0] < x_hi:
            return [0.0]
        v = model.value(y[0])
        return [math.sqrt(2.0 * v) if v > 0 else 0.0]

    kw = dict(rtol=ode_tol, atol=1e-16, method="DOP853", dense_output=True,
              max_step=0.2 / om_max)
    fwd = solve_ivp(rhs, [0.0, window], [x_top], **kw)
    bwd = solve_ivp(rhs, [0.0, -window], [x_top], **kw)
    if not (fwd.success and bwd.success):
        raise Instanton1DError("instanton ODE integration failed")

    def x_of_tau(t):
        t = np.asarray(t, dtype=float)
        tt = np.clip(t, -window, window)
        out = np.where(tt >= 0.0,
                       fwd.sol(np.maximum(tt, 0.0))[0],
                       bwd.sol(np.minimum(tt, 0.0))[0])
        out = np.where(t > window, pair.final.position, out)
        out = np.where(t < -window, pair.initial.position, out)
        return out

    if sample_dt is None:
        sample_dt = 0.01 / om_max
    n = int(math.ceil(2.0 * window / sample_dt))
    tau = np.linspace(-window, window, n + 1)
    x = x_of_tau(tau)
    span = pair.final.position - pair.initial.position
    if np.any(np.diff(x) < -1e-12 * span):
        raise Instanton1DError("non-monotone instanton trajectory (internal error)")
    xdot = np.sqrt(2.0 * np.maximum(model.value(x), 0.0))

    action = action_quadrature(model, pair)
    sol = InstantonSolution(
        pair=pair, tau1=0.0, tau1_ref=0.0, tau_grid=tau, x_bar=x, x_bar_dot=xdot,
        action=action, amp_i=np.nan, amp_f=np.nan, c_i=np.nan, c_f=np.nan,
        fit_residual=np.nan, x_of_tau=x_of_tau,
    )
    amp_i, amp_f, c_i, c_f, tau_ref, resid = extract_amplitudes(sol)
    return replace(sol, amp_i=amp_i, amp_f=amp_f, c_i=c_i, c_f=c_f,
                   tau1_ref=tau_ref, fit_residual=resid)


def _tail_fit(taus: np.ndarray, ys: np.ndarray, omega: float) -> tuple[float, float]:
    """Fixed-slope fit of log y ~ log A - omega |tau| (+ subleading tail terms).

    The data carry corrections in integer powers of exp(-omega|tau|) from the
    anharmonicity of the approach to the well; four correction basis
    functions absorb them (strongly anharmonic wells need the higher powers),
    leaving the intercept as the clean asymptotic amplitude.
    """
    z = np.log(ys) + omega * np.abs(taus)
    u = np.exp(-omega * np.abs(taus))
    u = u / np.max(u)  # scale for conditioning; rescales coefficients only
    basis = np.vstack([u**k for k in range(5)]).T
    coef, *_ = np.linalg.lstsq(basis, z, rcond=None)
    resid = float(np.max(np.abs(basis @ coef - z)))
    return float(np.exp(coef[0])), resid


def extract_amplitudes(
    sol: InstantonSolution,
    fit_window: tuple[float, float] = (FIT_LO, FIT_HI),
) -> tuple[float, float, float, float, float, float]:
    """Asymptotic amplitudes A_i, A_f, C_i, C_f in the equal-amplitude gauge.

    Fits are done on omega|tau - tau1| in [fit_window] at each end relative
    to the ODE anchor, then moved to the reference time
    tau1_ref = tau1 + log(A_f/A_i)/(omega_i + omega_f), where A_i = A_f.
    Returns (amp_i, amp_f, c_i, c_f, tau1_ref, max fit residual).
    """
    lo, hi = fit_window
    if not (8.0 <= lo < hi <= 18.0):
        raise ValueError("fit window must lie within omega|dtau| in [8, 18]")
    om_i, om_f = sol.omega_i, sol.omega_f
    dt = sol.tau_grid - sol.tau1
    x = sol.x_bar
    x0 = sol.x_bar_dot / math.sqrt(sol.action)

    mi = (dt <= -lo / om_i) & (dt >= -hi / om_i)
    mf = (dt >= lo / om_f) & (dt <= hi / om_f)
    if not (np.any(mi) and np.any(mf)):
        raise AmplitudeError("window not asymptotic: fit region not sampled")

    a_i, r1 = _tail_fit(dt[mi], x0[mi], om_i)
    a_f, r2 = _tail_fit(dt[mf], x0[mf], om_f)
    c_i, r3 = _tail_fit(dt[mi], np.abs(x[mi] - sol.pair.initial.position), om_i)
    c_f, r4 = _tail_fit(dt[mf], np.abs(sol.pair.final.position - x[mf]), om_f)
    resid = max(r1, r2, r3, r4)
    if resid > 1e-4:
        raise AmplitudeError(f"window not asymptotic: fit residual {resid:.2e}")

    # move to the equal-amplitude gauge: A -> A e^{+-omega s}
    s = math.log(a_f / a_i) / (om_i + om_f)
    amp = a_i * math.exp(om_i * s)
    return (amp, amp, c_i * math.exp(om_i * s), c_f * math.exp(-om_f * s),
            sol.tau1 + s, resid)


def zero_mode(sol: InstantonSolution) -> np.ndarray:
    """Normalized zero mode x0 = Xdot / sqrt(S) on the stored grid."""
    return sol.x_bar_dot / math.sqrt(sol.action)


def action_from_trajectory(sol: InstantonSolution) -> float:
    """S = integral Xdot^2 dtau over the sampled trajectory (Simpson)."""
    from scipy.integrate import simpson

    return float(simpson(sol.x_bar_dot**2, x=sol.tau_grid))
