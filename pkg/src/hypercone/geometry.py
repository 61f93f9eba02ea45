"""Hyperbolic-space geometry in polar coordinates and parameter-regime classification.

Everything here is closed-form: the spectral bottom of -Laplace on H^n, the
polar-coordinate operator coefficients, the sinh volume weight, the sharp
blow-up threshold mu = (p-1)*lambda1, and the Euclidean-cone comparison
exponents obtained from the indicial quadratic gamma*(gamma+n-2) = omega1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

__all__ = [
    "ConeSpec",
    "Exponential",
    "Power",
    "ModelParams",
    "Regime",
    "EuclideanComparison",
    "lambda1",
    "radial_coefficients",
    "volume_weight",
    "classify_regime",
    "euclidean_comparison",
]


@dataclass(frozen=True)
class ConeSpec:
    """Cone (0, inf) x Omega in H^n, Omega the geodesic cap of half-angle theta0.

    theta0 = pi means Omega is the whole sphere, i.e. the cone is all of H^n.
    """

    n: int
    theta0: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got n={self.n}")
        if not (0.0 < self.theta0 <= math.pi):
            raise ValueError(f"cap half-angle must lie in (0, pi], got {self.theta0}")

    @property
    def is_full_sphere(self) -> bool:
        return math.isclose(self.theta0, math.pi, rel_tol=0.0, abs_tol=1e-12)


@dataclass(frozen=True)
class Exponential:
    """Forcing factor exp(mu*t) in front of u^p."""

    mu: float


@dataclass(frozen=True)
class Power:
    """Forcing factor t^q in front of u^p; requires q > -1."""

    q: float

    def __post_init__(self):
        if self.q <= -1.0:
            raise ValueError(f"q must exceed -1, got {self.q}")


Forcing = Union[Exponential, Power]


@dataclass(frozen=True)
class ModelParams:
    """Reaction exponent p > 1 and the time-dependent forcing factor."""

    p: float
    forcing: Forcing

    def __post_init__(self):
        if self.p <= 1.0:
            raise ValueError(f"p must exceed 1, got {self.p}")

    @property
    def forcing_kind(self) -> str:
        return "exp" if isinstance(self.forcing, Exponential) else "power"

    @property
    def forcing_value(self) -> float:
        return self.forcing.mu if isinstance(self.forcing, Exponential) else self.forcing.q


@dataclass(frozen=True)
class Regime:
    """Universal blow-up vs conditional regime, with the raw threshold (p-1)*lambda1."""

    tag: Literal["blow_up_always", "conditional"]
    threshold: float


@dataclass(frozen=True)
class EuclideanComparison:
    """Comparison exponent lambda = -gamma_minus and the cone-of-R^n verdict for p."""

    lam: float
    regime: Literal["blows_up", "global_possible", "unresolved"]


def lambda1(n: int) -> float:
    """Bottom of the L^2 spectrum of -Laplace on H^n: (n-1)^2 / 4."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got n={n}")
    return (n - 1) ** 2 / 4.0


def radial_coefficients(r, n: int):
    """Coefficients (a_rr, a_r, a_ang) of u_rr, u_r and the angular Laplacian at radius r.

    The hyperbolic polar Laplacian is u_rr + (n-1)*coth(r)*u_r + sinh(r)^-2 * Lap_theta(u).
    coth is evaluated as cosh/sinh; r must be strictly positive (the coordinate
    singularity is the grid layout's problem, never this function's).
    Accepts scalars or numpy arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0):
        raise ValueError("radial coefficients require r > 0")
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got n={n}")
    sh = np.sinh(r_arr)
    a_r = (n - 1) * np.cosh(r_arr) / sh
    a_ang = 1.0 / (sh * sh)
    if np.isscalar(r) or r_arr.ndim == 0:
        return 1.0, float(a_r), float(a_ang)
    return np.ones_like(r_arr), a_r, a_ang


def volume_weight(r, n: int):
    """Radial volume density sinh(r)^(n-1) of H^n in polar coordinates."""
    out = np.sinh(np.asarray(r, dtype=float)) ** (n - 1)
    if np.isscalar(r):
        return float(out)
    return out


def classify_regime(params: ModelParams, n: int) -> Regime:
    """Sharp parameter split for the exponentially forced problem.

    Exponential forcing: every nontrivial solution blows up iff mu > (p-1)*lambda1(H^n);
    at and below the threshold global solutions can exist (the equality case sits on
    the conditional side, unlike the Euclidean Fujita threshold).  Power forcing t^q
    is conditional for every p > 1, q > -1.
    """
    thr = (params.p - 1.0) * lambda1(n)
    if isinstance(params.forcing, Exponential) and params.forcing.mu > thr:
        return Regime(tag="blow_up_always", threshold=thr)
    return Regime(tag="conditional", threshold=thr)


def euclidean_comparison(omega1: float, n: int, p: float) -> EuclideanComparison:
    """Verdict for the same cone sitting in R^n instead of H^n.

    lambda = -gamma_minus with gamma_minus the negative root of
    gamma*(gamma+n-2) = omega1.  Blow-up for every datum when
    1 < p < 1 + 2/(2+lambda); global solutions possible when p lies in
    (1 + 2/lambda, (n+1)/(n-3)) for n > 3 or p > 1 + 2/lambda for n = 2, 3.
    The gap between the two bands is reported as "unresolved", as is the
    degenerate lambda = 0 global band (n = 2 with omega1 = 0).
    """
    if omega1 < 0.0:
        raise ValueError(f"omega1 must be >= 0, got {omega1}")
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got n={n}")
    if p <= 1.0:
        raise ValueError(f"p must exceed 1, got {p}")
    lam = ((n - 2) + math.sqrt((n - 2) ** 2 + 4.0 * omega1)) / 2.0
    if p < 1.0 + 2.0 / (2.0 + lam):
        return EuclideanComparison(lam=lam, regime="blows_up")
    if lam > 0.0:
        lower = 1.0 + 2.0 / lam
        upper = (n + 1.0) / (n - 3.0) if n > 3 else math.inf
        if lower < p < upper:
            return EuclideanComparison(lam=lam, regime="global_possible")
    return EuclideanComparison(lam=lam, regime="unresolved")
