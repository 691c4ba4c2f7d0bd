"""Low-level numerical kernels.

Everything here exists because the quantities downstream are exponentially
small or exponentially large:

* grown-solution bookkeeping is done as (sign, log magnitude) pairs,
* the linear recurrence for -psi'' + w psi = 0 runs in compensated
  (double-double) arithmetic so roundoff is not amplified by e^{2 omega T},
* Rayleigh quotients are summed exactly with `math.fsum` over error-free
  product expansions, so eigenvalues far below eps*||T|| remain meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float):
    p = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(ah, al, bh, bl):
    sh, sl = _two_sum(ah, bh)
    sl += al + bl
    return _two_sum(sh, sl)


def _dd_mul_f(ah, al, b):
    ph, pl = _two_prod(ah, b)
    pl += al * b
    return _two_sum(ph, pl)


def two_prod_arrays(a: np.ndarray, b: np.ndarray):
    """Elementwise error-free product: returns (hi, lo) with hi+lo == a*b exactly."""
    p = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def compensated_polyval(coeffs, x):
    """Horner evaluation of sum c_k x^k with a compensated error term.

    Near a double root the plain Horner value is pure cancellation noise at
    the eps * max|c_k x^k| level, which is fatally large for sqrt(2V) in the
    instanton tails; the compensated form is accurate to ~eps^2 there.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xv = np.atleast_1d(x)
    s = np.full_like(xv, coeffs[-1])
    err = np.zeros_like(xv)
    for c in coeffs[-2::-1]:
        p, pi = two_prod_arrays(s, xv)
        s = p + c
        bb = s - p
        sigma = (p - (s - bb)) + (c - bb)
        err = err * xv + (pi + sigma)
    out = s + err
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SignedLog:
    """A real number x stored as sign(x) and log|x|; sign 0 encodes x == 0."""

    sign: float
    log: float

    @property
    def value(self) -> float:
        if self.sign == 0.0:
            return 0.0
        return self.sign * math.exp(self.log)

    @classmethod
    def from_value(cls, x: float) -> "SignedLog":
        if x == 0.0:
            return cls(0.0, -math.inf)
        return cls(math.copysign(1.0, x), math.log(abs(x)))

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        return SignedLog(self.sign * other.sign, self.log + other.log)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        return SignedLog(self.sign * other.sign, self.log - other.log)

    def scaled(self, c: float) -> "SignedLog":
        if c == 0.0:
            return SignedLog(0.0, -math.inf)
        return SignedLog(self.sign * math.copysign(1.0, c), self.log + math.log(abs(c)))


def signedlog_combine(coeffs, values) -> SignedLog:
    """sum_i coeffs[i] * values[i] for SignedLog values, done at a common scale."""
    finite = [v.log for v in values if v.sign != 0.0]
    if not finite:
        return SignedLog(0.0, -math.inf)
    ref = max(finite)
    acc = 0.0
    for c, v in zip(coeffs, values):
        if v.sign != 0.0:
            acc += c * v.sign * math.exp(v.log - ref)
    if acc == 0.0:
        return SignedLog(0.0, -math.inf)
    return SignedLog(math.copysign(1.0, acc), math.log(abs(acc)) + ref)


def numerov_log(w: np.ndarray, h: float) -> tuple[SignedLog, float, int]:
    """Integrate psi'' = w(t) psi with psi(0)=0, psi'(0)=1 across the sampled grid.

    Fixed-step Numerov recurrence in summed-increment form, carried in
    double-double precision with log rescaling.  This keeps the roundoff
    floor near eps^2 so the exponentially fine-tuned decay of the solution
    through the second potential tail is not drowned by noise.

    Returns (endpoint as SignedLog, log of the running peak magnitude,
    number of sign changes of psi on the interior).
    """
    n = w.size
    if n < 3:
        raise ValueError("need at least 3 grid points")
    h2 = h * h
    f = 1.0 - h2 * w / 12.0
    wt = (h2 * w / f).tolist()

    # O(h^5) Taylor start for psi(h); w', w'' from one-sided differences
    w0 = float(w[0])
    wp = (float(w[1]) - w0) / h
    wpp = (float(w[2]) - 2.0 * float(w[1]) + w0) / h2
    psi1 = h + w0 * h**3 / 6.0 + wp * h**4 / 12.0 + (3.0 * wpp + w0 * w0) * h**5 / 120.0

    uh, ul = _dd_mul_f(psi1, 0.0, float(f[1]))
    dh, dl = uh, ul
    logscale = 0.0
    peak = -math.inf
    sign_changes = 0
    last = 1.0 if uh > 0 else -1.0
    log = math.log
    for k in range(1, n - 1):
        ph, pl = _dd_mul_f(uh, ul, wt[k])
        dh, dl = _dd_add(dh, dl, ph, pl)
        uh, ul = _dd_add(uh, ul, dh, dl)
        a = abs(uh)
        if a > 1e250:
            inv = 1.0 / a
            uh *= inv
            ul *= inv
            dh *= inv
            dl *= inv
            logscale += log(a)
            a = abs(uh)
        if uh != 0.0:
            s = 1.0 if uh > 0 else -1.0
            if s != last:
                sign_changes += 1
            last = s
            cur = logscale + log(a)
            if cur > peak:
                peak = cur
    psi_end = uh / float(f[-1])
    if psi_end == 0.0:
        return SignedLog(0.0, -math.inf), peak, sign_changes
    end = SignedLog(math.copysign(1.0, psi_end), logscale + log(abs(psi_end)))
    return end, peak, sign_changes


def _taylor_start(w: list, h: float, psi0: float, dpsi0: float) -> float:
    """psi(h) to O(h^6) from (psi, psi')(0), using psi'' = w psi."""
    h2 = h * h
    w0 = w[0]
    wp = (w[1] - w0) / h
    wpp = (w[2] - 2.0 * w[1] + w0) / h2 if len(w) > 2 else 0.0
    wppp = ((w[3] - 3.0 * w[2] + 3.0 * w[1] - w0) / h**3) if len(w) > 3 else 0.0
    return (psi0 + h * dpsi0 + 0.5 * h2 * w0 * psi0
            + h**3 / 6.0 * (wp * psi0 + w0 * dpsi0)
            + h**4 / 24.0 * (wpp * psi0 + 2.0 * wp * dpsi0 + w0 * w0 * psi0)
            + h**5 / 120.0 * (wppp * psi0 + 3.0 * wpp * dpsi0
                              + 4.0 * w0 * wp * psi0 + w0 * w0 * dpsi0))


def numerov_pair_wronskian_drift(w: np.ndarray, h: float, n_check: int = 12) -> float:
    """Drift of the discrete Wronskian of two independent Numerov solutions.

    The solutions start at index 0 with (psi, psi') = (1, 0) and (0, 1); the
    discrete Wronskian W_k = u1_k u2_{k-1} - u2_k u1_{k-1} is exactly
    conserved by the recurrence, so its relative variation across ~n_check
    checkpoints measures accumulated arithmetic error only.  Both solutions
    march in one loop (double-double, synchronized rescaling) so the
    e^{2 omega t} cancellation between the products stays below tolerance.
    """
    wl = w.tolist()
    n = len(wl)
    h2 = h * h
    f0 = 1.0 - h2 * wl[0] / 12.0
    f1 = 1.0 - h2 * wl[1] / 12.0
    # solution 1: (1, 0); solution 2: (0, 1); u = (1 - h^2 w/12) psi
    u1h, u1l = _dd_mul_f(_taylor_start(wl, h, 1.0, 0.0), 0.0, f1)
    p1h, p1l = _dd_mul_f(1.0, 0.0, f0)
    u2h, u2l = _dd_mul_f(_taylor_start(wl, h, 0.0, 1.0), 0.0, f1)
    p2h, p2l = 0.0, 0.0
    d1h, d1l = _dd_add(u1h, u1l, -p1h, -p1l)
    d2h, d2l = _dd_add(u2h, u2l, -p2h, -p2l)
    logscale = 0.0
    stride = max(1, (n - 1) // n_check)
    logs = []

    def record():
        t1h, t1l = _two_prod(u1h, p2h)
        t1l += u1h * p2l + u1l * p2h
        t2h, t2l = _two_prod(u2h, p1h)
        t2l += u2h * p1l + u2l * p1h
        wh, wv = _dd_add(t1h, t1l, -t2h, -t2l)
        if wh != 0.0:
            logs.append((math.copysign(1.0, wh),
                         math.log(abs(wh + wv)) + 2.0 * logscale))

    record()
    for k in range(1, n - 1):
        wt = h2 * wl[k] / (1.0 - h2 * wl[k] / 12.0)
        p1h, p1l = u1h, u1l
        p2h, p2l = u2h, u2l
        qh, ql = _dd_mul_f(u1h, u1l, wt)
        d1h, d1l = _dd_add(d1h, d1l, qh, ql)
        u1h, u1l = _dd_add(u1h, u1l, d1h, d1l)
        qh, ql = _dd_mul_f(u2h, u2l, wt)
        d2h, d2l = _dd_add(d2h, d2l, qh, ql)
        u2h, u2l = _dd_add(u2h, u2l, d2h, d2l)
        if max(abs(u1h), abs(u2h)) > 1e150:
            inv = 1.0 / max(abs(u1h), abs(u2h))
            u1h *= inv; u1l *= inv; d1h *= inv; d1l *= inv
            p1h *= inv; p1l *= inv
            u2h *= inv; u2l *= inv; d2h *= inv; d2l *= inv
            p2h *= inv; p2l *= inv
            logscale += math.log(1.0 / inv)
        if k % stride == 0 or k == n - 2:
            record()
    if len(logs) < 2:
        return math.inf
    s0, l0 = logs[0]
    drift = 0.0
    for s, l in logs[1:]:
        drift = max(drift, abs(s * s0 * math.exp(l - l0) - 1.0))
    return drift


def richardson(values, step_sizes, order: int = 2) -> tuple[float, float]:
    """Neville extrapolation of values(h) to h -> 0 assuming an h^order error series.

    Returns (extrapolated value, magnitude of the last correction) -- the
    latter is the error estimate quoted by the oracles.
    """
    x = [h**order for h in step_sizes]
    t = list(values)
    if len(t) < 2:
        return t[0], math.inf
    last = t[-1]
    for k in range(1, len(t)):
        t = [
            (t[i + 1] * x[i] - t[i] * x[i + k]) / (x[i] - x[i + k])
            for i in range(len(t) - 1)
        ]
    return t[0], abs(t[0] - last)


def _sturm_count(d: list, e2: list, shift: float) -> int:
    tiny = 1e-300
    q = d[0] - shift
    count = 1 if q < 0 else 0
    for k in range(1, len(d)):
        if q == 0.0:
            q = tiny
        q = (d[k] - shift) - e2[k - 1] / q
        if q < 0:
            count += 1
    return count


def sturm_count_below(diag: np.ndarray, off: np.ndarray, shift: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (diag, off) below shift.

    Standard Sturm sequence sign count with the LAPACK-style pivot guard.
    """
    return _sturm_count(np.asarray(diag, dtype=float).tolist(),
                        (np.asarray(off, dtype=float) ** 2).tolist(), shift)


def bisect_lowest_eigenvalues(
    diag: np.ndarray,
    off: np.ndarray,
    n_levels: int,
    tol: float | None = None,
    guesses: np.ndarray | None = None,
    guess_radius: float = 0.0,
) -> np.ndarray:
    """Lowest n_levels eigenvalues of a symmetric tridiagonal matrix by bisection.

    Bracketing starts from the Gershgorin bounds, so every eigenvalue is
    isolated by its Sturm count before refinement.  Optional `guesses` (e.g.
    results from a coarser grid) warm-start the brackets; each warm bracket
    is verified by its Sturm counts and falls back to the full interval if
    the eigenvalue moved farther than guess_radius.
    """
    d = np.asarray(diag, dtype=float).tolist()
    e2 = (np.asarray(off, dtype=float) ** 2).tolist()
    r = np.zeros_like(diag)
    r[0] = abs(off[0])
    r[-1] = abs(off[-1])
    if diag.size > 2:
        r[1:-1] = np.abs(off[:-1]) + np.abs(off[1:])
    lo = float(np.min(diag - r))
    hi = float(np.max(diag + r))
    if tol is None:
        tol = 1e-13 * max(abs(lo), abs(hi), 1.0)
    out = np.empty(n_levels)
    floor = lo
    for j in range(n_levels):
        a, b = floor, hi
        if guesses is not None and guess_radius > 0.0:
            ga, gb = guesses[j] - guess_radius, guesses[j] + guess_radius
            if _sturm_count(d, e2, ga) <= j and _sturm_count(d, e2, gb) >= j + 1:
                a, b = ga, gb
        while b - a > tol:
            mid = 0.5 * (a + b)
            if _sturm_count(d, e2, mid) >= j + 1:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
        floor = a  # eigenvalues are ordered; reuse the lower edge
    return out


def rayleigh_quotient_exact(y: np.ndarray, w: np.ndarray, h: float) -> float:
    """<y|T|y>/<y|y> for T = -d^2/dt^2 + w on a Dirichlet grid, summed exactly.

    The quadratic form is rewritten as sum (dy)^2 / h^2 + sum w y^2; the two
    sums cancel almost completely for near-zero modes, so each product is
    expanded error-free and everything is summed once with math.fsum.  The
    returned value is exact to one final rounding of lambda * h^2, which keeps
    eigenvalues ~1e-16 meaningful on grids with ||T|| ~ 1e6.
    """
    dy = np.diff(np.concatenate(([0.0], y, [0.0])))
    p_hi, p_lo = two_prod_arrays(dy, dy)
    y2_hi, y2_lo = two_prod_arrays(y, y)
    q_hi, q_lo = two_prod_arrays(w, y2_hi)
    q2 = w * y2_lo
    h2 = h * h
    terms = []
    # lambda * h^2 = sum (dy)^2 + h^2 * sum w y^2, all contributions exact
    terms.extend(p_hi.tolist())
    terms.extend(p_lo.tolist())
    a_hi, a_lo = two_prod_arrays(np.full(q_hi.size, h2), q_hi)
    terms.extend(a_hi.tolist())
    terms.extend(a_lo.tolist())
    terms.extend((h2 * q_lo).tolist())
    terms.extend((h2 * q2).tolist())
    num = math.fsum(terms) / h2
    den = math.fsum((y2_hi + y2_lo).tolist())
    return num / den
