"""The radial barrier weight r^m * exp(-k r^2), its admissible constants, the
Kaplan functional G, and every closed-form blow-up bound.

The barrier is a generalized subeigenfunction: for alpha above the spectral
bottom and k small enough (k0 is produced constructively here, the existence
proof only being constructive in spirit), it satisfies

    Lap(Phi0) + alpha*Phi0 >= omega1 * sinh(r)^-2 * Phi0   on all of H^n,

which makes the correction term in the weighted-average differential
inequality nonnegative, so G(t) is a supersolution of an explicit scalar ODE.
Direct integration of that ODE gives the finite blow-up time bounds exposed
below, one per theorem-grade regime (universal, exponential-conditional,
power-forced).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .cap import EigenPair
from .geometry import lambda1
from .grid import Grid

__all__ = [
    "BarrierParams",
    "KaplanTrace",
    "phi0",
    "find_R0",
    "find_k0",
    "lemma1_lhs",
    "verify_lemma1",
    "normalize_barrier",
    "make_barrier",
    "barrier_weight",
    "kaplan_G",
    "bound_T_thm1",
    "bound_Tstar_thm2",
    "ode_lower_bound",
    "H_integral",
    "bound_Tstar_thm2bis",
    "largeness_condition_14",
    "default_m",
    "default_alpha",
]

R0_MARGIN = 1e-6


@dataclass(frozen=True)
class BarrierParams:
    """Normalized weight C * r^m * exp(-k r^2) plus the average's exponent alpha."""

    m: float
    k: float
    C: float
    alpha: float
    n: int
    omega1: float

    def phi(self, r):
        """Weight value C * r^m * exp(-k r^2) (vectorized)."""
        r = np.asarray(r, dtype=float)
        return self.C * r**self.m * np.exp(-self.k * r * r)


@dataclass(frozen=True)
class KaplanTrace:
    """Sampled weighted average G(t_k) along a simulation."""

    times: np.ndarray
    G: np.ndarray
    alpha: float
    barrier: BarrierParams


def _coth(r):
    r = np.asarray(r, dtype=float)
    return np.cosh(r) / np.sinh(r)


def phi0(r, m: float, k: float):
    """Raw barrier r^m e^(-k r^2) with its first two radial derivatives.

    d_r  = (m r^(m-1) - 2k r^(m+1)) e^(-k r^2)
    d_rr = (m(m-1) r^(m-2) - 2k(2m+1) r^m + 4 k^2 r^(m+2)) e^(-k r^2)

    Valid for m >= 2, r >= 0 (0^0 = 1 makes the m = 2 curvature at the origin
    come out as m(m-1)).
    """
    if m < 2.0:
        raise ValueError(f"m must be >= 2, got {m}")
    if k <= 0.0:
        raise ValueError(f"k must be positive, got {k}")
    scalar = np.isscalar(r)
    r = np.asarray(r, dtype=float)
    gauss = np.exp(-k * r * r)
    value = r**m * gauss
    d_r = (m * r ** (m - 1.0) - 2.0 * k * r ** (m + 1.0)) * gauss
    d_rr = (m * (m - 1.0) * r ** (m - 2.0)
            - 2.0 * k * (2.0 * m + 1.0) * r**m
            + 4.0 * k * k * r ** (m + 2.0)) * gauss
    if scalar:
        return float(value), float(d_r), float(d_rr)
    return value, d_r, d_rr


def find_R0(alpha: float, n: int) -> float:
    """Radius beyond which the curvature term coth^2 is close enough to its limit.

    Strict inequality lambda1*coth(r)^2 - alpha < (lambda1 - alpha)/2 for all
    r >= R0 rearranges (via coth^2 - 1 = sinh^-2) to sinh(r)^2 > (n-1)^2 / (2(alpha-lambda1));
    a small margin keeps it strict, and R0 > 1 is enforced as a floor.
    """
    lam = lambda1(n)
    if alpha <= lam:
        raise ValueError(f"alpha must exceed lambda1={lam}, got {alpha}")
    r_star = math.asinh(math.sqrt((n - 1) ** 2 / (2.0 * (alpha - lam))))
    return max(1.0 + R0_MARGIN, r_star + R0_MARGIN)


def find_k0(n: int, m: float, alpha: float, omega1: float, safety: float = 0.9) -> float:
    """Largest certified Gaussian rate: both admissibility inequalities are affine in k.

    bound3 keeps 2k(2m+1) below (alpha - lambda1)/2; bound4 keeps the
    inner-region remainder m(m-1) - omega1 positive after subtracting the
    k-proportional terms evaluated at R0.  Any k in (0, k0] works; we return
    safety * min of the two limits.
    """
    if not (0.0 < safety < 1.0):
        raise ValueError(f"safety must lie in (0,1), got {safety}")
    if m < 2.0:
        raise ValueError(f"m must be >= 2, got {m}")
    if m * (m - 1.0) <= omega1:
        raise ValueError(
            f"need m(m-1) > omega1 strictly; got m(m-1)={m*(m-1.0)} <= omega1={omega1}")
    lam = lambda1(n)
    if alpha <= lam:
        raise ValueError(f"alpha must exceed lambda1={lam}, got {alpha}")
    r0 = find_R0(alpha, n)
    bound3 = (alpha - lam) / (4.0 * (2.0 * m + 1.0))
    bound4 = (m * (m - 1.0) - omega1) / (
        2.0 * (2.0 * m + 1.0) * r0 * r0
        + 2.0 * (n - 1) * r0**3 * float(_coth(r0)))
    return safety * min(bound3, bound4)


def lemma1_lhs(r, n: int, m: float, k: float, alpha: float, omega1: float):
    """Pointwise value whose nonnegativity is the subeigenfunction inequality:

    m(m-1) + m(n-1) r coth r - omega1 (r/sinh r)^2
        + r^2 [4k^2 r^2 - 2(n-1) k r coth r - (2k(2m+1) - alpha)].

    Stable down to r ~ 1e-300: the ratios r*coth(r) and (r/sinh r)^2 are
    evaluated directly (both -> 1 as r -> 0 with no cancellation).
    """
    r = np.asarray(r, dtype=float)
    sh = np.sinh(r)
    rcoth = r * np.cosh(r) / sh
    rsinh2 = (r / sh) ** 2
    bracket = 4.0 * k * k * r**2 - 2.0 * (n - 1) * k * rcoth - (2.0 * k * (2.0 * m + 1.0) - alpha)
    return (m * (m - 1.0) + m * (n - 1) * rcoth - omega1 * rsinh2 + r * r * bracket)


def verify_lemma1(params: BarrierParams, r_max: float, grid_points: int):
    """Minimum of the subeigenfunction expression on (0, r_max], with the r -> 0 limit.

    Returns (min_residual, passed).  A failing check is a valid result: it
    signals inadmissible (m, k, alpha, omega1), not an error here.
    """
    r = np.linspace(r_max / grid_points, r_max, grid_points)
    values = lemma1_lhs(r, params.n, params.m, params.k, params.alpha, params.omega1)
    limit0 = params.m * (params.m - 1.0) + params.m * (params.n - 1) - params.omega1
    min_residual = float(min(values.min(), limit0))
    return min_residual, min_residual >= -1e-12


def _log_integrand(r, m, k, n):
    return m * math.log(r) - k * r * r + (n - 1) * math.log(math.sinh(r))


def _log_integrand_slope(r, m, k, n):
    return m / r - 2.0 * k * r + (n - 1) * math.cosh(r) / math.sinh(r)


def normalize_barrier(m: float, k: float, n: int) -> float:
    """Constant C with C * integral_0^inf r^m e^(-k r^2) sinh(r)^(n-1) dr = 1.

    The integrand is evaluated in log space relative to its peak (the Gaussian
    always beats the e^((n-1)r) volume growth, but the raw values overflow for
    small k).  Truncation radius is pushed out until the integrand has dropped
    18 orders below the peak while decaying at unit log-slope, which bounds
    the discarded tail below 1e-16 of the integral.
    """
    if k <= 0.0:
        raise ValueError(f"k must be positive, got {k}")
    if m < 0.0:
        raise ValueError(f"m must be nonnegative, got {m}")
    # Peak of the log-integrand: unique root of its decreasing slope.
    lo, hi = 1e-12, 1.0
    while _log_integrand_slope(hi, m, k, n) > 0.0:
        hi *= 2.0
    from scipy.optimize import brentq

    r_peak = brentq(lambda r: _log_integrand_slope(r, m, k, n), lo, hi, xtol=1e-12)
    log_peak = _log_integrand(r_peak, m, k, n)

    r_cut = max(2.0 * r_peak, r_peak + 5.0)
    while (_log_integrand(r_cut, m, k, n) - log_peak > math.log(1e-18)
           or _log_integrand_slope(r_cut, m, k, n) > -1.0):
        r_cut *= 1.5

    def scaled(r):
        if r <= 0.0:
            return 0.0
        return math.exp(_log_integrand(r, m, k, n) - log_peak)

    val, _ = quad(scaled, 0.0, r_cut, points=[r_peak], limit=200, epsabs=0.0, epsrel=1e-11)
    return math.exp(-log_peak) / val


def make_barrier(n: int, omega1: float, m: float, k: float, alpha: float) -> BarrierParams:
    """Normalized BarrierParams; validates the Lemma-grade invariants."""
    if m < 2.0:
        raise ValueError(f"m must be >= 2, got {m}")
    if m * (m - 1.0) <= omega1:
        raise ValueError(f"need m(m-1) > omega1; got {m*(m-1.0)} <= {omega1}")
    C = normalize_barrier(m, k, n)
    return BarrierParams(m=m, k=k, C=C, alpha=alpha, n=n, omega1=omega1)


def barrier_weight(r, barrier: BarrierParams):
    """Full radial measure density C r^m e^(-k r^2) sinh(r)^(n-1), log-space evaluated."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = r > 0.0
    rp = r[pos]
    log_w = (math.log(barrier.C) + barrier.m * np.log(rp) - barrier.k * rp * rp
             + (barrier.n - 1) * np.log(np.sinh(rp)))
    out[pos] = np.exp(log_w)
    return out


def kaplan_G(u_slice: np.ndarray, grid: Grid, pair: EigenPair, barrier: BarrierParams,
             t: float) -> float:
    """Discrete weighted average e^(alpha t) * iint u psi1 Phi sinh^(n-1), midpoint rule.

    Radial fields are angularly constant, so their cap integral against psi1
    is exactly the L^1 norm, 1.
    """
    u = np.asarray(u_slice, dtype=float)
    rad_w = barrier_weight(grid.r_centers, barrier) * grid.dr
    factor = math.exp(barrier.alpha * t)
    if u.ndim == 1:
        if u.size != grid.r_centers.size:
            raise ValueError("field does not match the radial grid")
        return factor * float(rad_w @ u)
    if grid.radial_only or u.shape != grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid shape {grid.shape}")
    if grid.phi_centers.size != pair.psi1.size:
        raise ValueError("grid angular resolution does not match the eigenpair tabulation")
    ang_w = pair.angular_weights() * pair.psi1
    return factor * float(rad_w @ (u @ ang_w))


def bound_T_thm1(G0: float, p: float) -> float:
    """Universal-regime bound T <= G0^(1-p) / (p-1), from integrating G' >= G^p."""
    if G0 <= 0.0:
        raise ValueError(f"G0 must be positive, got {G0}")
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    return G0 ** (1.0 - p) / (p - 1.0)


def bound_Tstar_thm2(G0: float, p: float, mu: float, alpha: float) -> Optional[float]:
    """Conditional-regime bound from G' >= e^(-((p-1)alpha - mu) t) G^p.

    Returns None when the datum misses the strict largeness condition
    G0 > (alpha - mu/(p-1))^(1/(p-1)); absence of a bound is information.
    """
    beta = (p - 1.0) * alpha - mu
    if beta <= 0.0:
        raise ValueError(f"(p-1)*alpha - mu must be positive, got {beta}")
    gap = alpha - mu / (p - 1.0)
    if not G0 > gap ** (1.0 / (p - 1.0)):
        return None
    return -math.log1p(-gap * G0 ** (1.0 - p)) / beta


def ode_lower_bound(t: float, G0: float, p: float, mu: float, alpha: float) -> float:
    """Closed-form lower envelope of G along the conditional-regime ODE.

    G(t) >= (G0^(1-p) + (p-1)/beta * (e^(-beta t) - 1))^(-1/(p-1)),
    beta = (p-1)alpha - mu; the beta = 0 limit is the pure G' = G^p solution.
    Raises once the bracket hits zero (past the bound's own blow-up time).
    """
    if G0 <= 0.0:
        raise ValueError(f"G0 must be positive, got {G0}")
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    beta = (p - 1.0) * alpha - mu
    if beta == 0.0:
        bracket = G0 ** (1.0 - p) - (p - 1.0) * t
    else:
        bracket = G0 ** (1.0 - p) + (p - 1.0) / beta * math.expm1(-beta * t)
    if bracket <= 0.0:
        raise ValueError(f"t={t} is past the lower bound's blow-up time")
    return bracket ** (-1.0 / (p - 1.0))


def H_integral(t: float, q: float, p: float, alpha: float) -> float:
    """H(t) = integral_0^t s^q e^(-(p-1) alpha s) ds, finite at t = inf for q > -1.

    For q < 0 the integrable endpoint singularity is removed by s = tau^(1/(1+q));
    H(inf) uses the closed form Gamma(q+1) / ((p-1) alpha)^(q+1).
    """
    if q <= -1.0:
        raise ValueError(f"q must exceed -1, got {q}")
    if p <= 1.0 or alpha <= 0.0:
        raise ValueError("need p > 1 and alpha > 0")
    beta = (p - 1.0) * alpha
    if t == math.inf:
        return math.gamma(q + 1.0) / beta ** (q + 1.0)
    if t <= 0.0:
        return 0.0
    if q < 0.0:
        expo = 1.0 / (1.0 + q)
        val, _ = quad(lambda tau: math.exp(-beta * tau**expo), 0.0, t ** (1.0 + q),
                      limit=200, epsabs=0.0, epsrel=1e-12)
        return val * expo
    val, _ = quad(lambda s: s**q * math.exp(-beta * s), 0.0, t,
                  limit=200, epsabs=0.0, epsrel=1e-12)
    return val


def bound_Tstar_thm2bis(G0: float, p: float, q: float, alpha: float) -> Optional[float]:
    """Power-forcing bound T* = H^(-1)(G0^(1-p)/(p-1)), by monotone bisection on H.

    None when G0 misses the strict largeness condition
    G0 > ((p-1) H(inf))^(-1/(p-1)), i.e. when the target level is not below H(inf).
    """
    if G0 <= 0.0:
        raise ValueError(f"G0 must be positive, got {G0}")
    target = G0 ** (1.0 - p) / (p - 1.0)
    h_inf = H_integral(math.inf, q, p, alpha)
    if not target < h_inf:
        return None
    hi = 1.0
    while H_integral(hi, q, p, alpha) < target:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the H inverse")
    lo = 0.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if H_integral(mid, q, p, alpha) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def largeness_condition_14(u0_field: np.ndarray, grid: Grid, pair: EigenPair,
                           m: float, k: float, n: int, alpha: float, mu: float,
                           p: float):
    """Weighted-mass comparison deciding whether the conditional bound applies.

    lhs = iint u0 psi1 r^m e^(-k r^2) sinh(r)^(n-1)  (unnormalized barrier),
    rhs = (alpha - mu/(p-1))^(1/(p-1)) * int r^m e^(-k r^2) sinh(r)^(n-1) dr.

    Both sides use the same midpoint quadrature on the field's grid, so the
    comparison is exactly equivalent to G(0) > (alpha - mu/(p-1))^(1/(p-1))
    for the discretized run the caller is about to launch.
    """
    gap = alpha - mu / (p - 1.0)
    if gap <= 0.0:
        raise ValueError(f"alpha - mu/(p-1) must be positive, got {gap}")
    r = grid.r_centers
    rad = r**m * np.exp(-k * r * r) * np.sinh(r) ** (n - 1) * grid.dr
    u = np.asarray(u0_field, dtype=float)
    if u.ndim == 1:
        lhs = float(rad @ u)
    else:
        if grid.radial_only or u.shape != grid.shape:
            raise ValueError(f"field shape {u.shape} does not match grid shape {grid.shape}")
        ang_w = pair.angular_weights() * pair.psi1
        lhs = float(rad @ (u @ ang_w))
    rhs = gap ** (1.0 / (p - 1.0)) * float(rad.sum())
    return lhs, rhs, lhs > rhs


def default_m(omega1: float) -> float:
    """Smallest admissible barrier power with half a unit of slack over omega1."""
    return max(2.0, 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * (omega1 + 0.5))))


def default_alpha(n: int, p: float, mu: float, universal: bool) -> float:
    """Exponent policy: mu/(p-1) in the universal regime (as the proof takes it),
    lambda1 + 1 otherwise."""
    if universal:
        return mu / (p - 1.0)
    return lambda1(n) + 1.0
