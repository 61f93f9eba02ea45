"""First Dirichlet eigenpair of the angular Laplacian on a geodesic cap of S^(n-1).

The cap {polar angle phi < theta0} reduces the eigenproblem to the
Legendre-type ODE

    psi'' + (n-2) cot(phi) psi' + omega psi = 0,   psi'(0) = 0, psi(theta0) = 0,

solved by shooting on a cell-centered grid (so cot is never evaluated at 0; a
mirror ghost enforces regularity on the axis) with bisection in omega.  The
eigenfunction is normalized to unit L^1 norm against the cap surface measure
|S^(n-2)| * (sin phi)^(n-2) dphi, the normalization every Kaplan-type weighted
average downstream relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConeSpec

__all__ = [
    "EigenPair",
    "ConvergenceError",
    "sphere_area",
    "solve_cap_eigenpair",
    "cap_l1_normalize",
    "angular_average",
    "eigenpair_to_csv",
]

OMEGA_TOL = 1e-10
MIN_GRID_POINTS = 64


class ConvergenceError(RuntimeError):
    """Eigenvalue bracket failed to form or shrink below tolerance."""


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim: 2*pi^((dim+1)/2) / Gamma((dim+1)/2)."""
    if dim < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {dim}")
    return 2.0 * math.pi ** ((dim + 1) / 2.0) / math.gamma((dim + 1) / 2.0)


@dataclass(frozen=True)
class EigenPair:
    """First Dirichlet eigenvalue/eigenfunction of the cap, L^1-normalized.

    psi1 is tabulated at the cell centers phi_i = (i+1/2)*dphi.  sphere_factor
    is |S^(n-2)|, the area of the azimuthal sphere carried by the surface
    measure (sin phi)^(n-2) dphi.
    """

    omega1: float
    psi1: np.ndarray
    phi: np.ndarray
    dphi: float
    cap: ConeSpec
    sphere_factor: float

    def angular_weights(self) -> np.ndarray:
        """Midpoint quadrature weights of the cap surface measure on the psi grid."""
        n = self.cap.n
        return self.sphere_factor * np.sin(self.phi) ** (n - 2) * self.dphi

    def l1_norm(self) -> float:
        """Discrete L^1 norm of psi1 against the cap surface measure."""
        return float(np.dot(self.angular_weights(), self.psi1))


def _shoot(omega: float, n: int, theta0: float, grid_points: int):
    """March the discretized ODE outward; return (face value at theta0, cell values).

    Cell-centered recurrence with a mirror ghost across phi = 0; the returned
    face value is the linear interpolant of the last cell and the ghost cell
    beyond theta0, so its zero locates the discrete Dirichlet eigenvalue.
    """
    h = theta0 / grid_points
    phi = (np.arange(grid_points) + 0.5) * h
    c = (n - 2) * (np.cos(phi) / np.sin(phi))
    inv_h2 = 1.0 / (h * h)
    psi = np.empty(grid_points + 1)
    psi[0] = 1.0
    # i = 0: ghost mirrors psi[0], so both difference stencils collapse.
    a0 = inv_h2 + c[0] / (2.0 * h)
    psi[1] = psi[0] - omega * psi[0] / a0
    for i in range(1, grid_points):
        a_plus = inv_h2 + c[i] / (2.0 * h)
        a_minus = inv_h2 - c[i] / (2.0 * h)
        psi[i + 1] = ((2.0 * inv_h2 - omega) * psi[i] - a_minus * psi[i - 1]) / a_plus
    face = 0.5 * (psi[grid_points - 1] + psi[grid_points])
    return face, psi[:grid_points]


def solve_cap_eigenpair(cone: ConeSpec, grid_points: int) -> EigenPair:
    """Smallest Dirichlet eigenvalue of the cap with its positive eigenfunction.

    theta0 = pi is the whole sphere: no boundary, omega1 = 0 and psi1 is the
    constant 1/|S^(n-1)|.  Otherwise bisection on the shooting face value,
    bracket [0, upper] with upper doubled until the sign change appears,
    tolerance 1e-10 on omega.
    """
    if grid_points < MIN_GRID_POINTS:
        raise ValueError(f"grid_points must be >= {MIN_GRID_POINTS}, got {grid_points}")
    n, theta0 = cone.n, cone.theta0
    h = theta0 / grid_points
    phi = (np.arange(grid_points) + 0.5) * h
    sphere_factor = sphere_area(n - 2)

    if cone.is_full_sphere:
        psi = np.full(grid_points, 1.0 / sphere_area(n - 1))
        return EigenPair(omega1=0.0, psi1=psi, phi=phi, dphi=h, cap=cone,
                         sphere_factor=sphere_factor)

    scale = (math.pi / (2.0 * theta0)) ** 2
    lo, s_lo = 0.0, 1.0
    hi = 0.5 * scale
    while True:
        s_hi, _ = _shoot(hi, n, theta0, grid_points)
        if s_hi < 0.0:
            break
        lo, s_lo = hi, s_hi
        hi *= 2.0
        if hi > 1e9 * scale:
            raise ConvergenceError(
                f"no sign change of the shooting value up to omega={hi:.3e}")
    while hi - lo > OMEGA_TOL:
        mid = 0.5 * (lo + hi)
        s_mid, _ = _shoot(mid, n, theta0, grid_points)
        if s_mid < 0.0:
            hi = mid
        else:
            lo = mid
    omega = 0.5 * (lo + hi)
    # Tabulate on the sign-definite side of the bracket.
    _, psi_raw = _shoot(lo, n, theta0, grid_points)
    if np.any(psi_raw[:-1] <= 0.0):
        raise ConvergenceError("shooting solution changed sign; not the first eigenvalue")
    psi = cap_l1_normalize(psi_raw, cone)
    return EigenPair(omega1=omega, psi1=psi, phi=phi, dphi=h, cap=cone,
                     sphere_factor=sphere_factor)


def cap_l1_normalize(psi_raw: np.ndarray, cone: ConeSpec) -> np.ndarray:
    """Scale a tabulated nonnegative profile to unit discrete L^1 cap norm.

    The grid is inferred from the tabulation: uniform cell centers on
    (0, theta0).  Raises on an identically vanishing (or underflowing) profile.
    """
    psi_raw = np.asarray(psi_raw, dtype=float)
    m = psi_raw.size
    h = cone.theta0 / m
    phi = (np.arange(m) + 0.5) * h
    weights = sphere_area(cone.n - 2) * np.sin(phi) ** (cone.n - 2) * h
    total = float(np.dot(weights, psi_raw))
    if not total > 0.0:
        raise ValueError("profile integrates to zero; cannot normalize")
    return psi_raw / total


def angular_average(u_slice: np.ndarray, pair: EigenPair, alpha: float, t: float) -> np.ndarray:
    """Weighted angular average e^(alpha t) * integral of psi1 * u over the cap.

    u_slice is either a 2-D (r, phi) field whose second axis matches the psi
    grid, or a 1-D radial field (angularly constant, so the psi integral is
    exactly its L^1 norm, 1).
    """
    u = np.asarray(u_slice, dtype=float)
    factor = math.exp(alpha * t)
    if u.ndim == 1:
        return factor * u
    if u.ndim != 2 or u.shape[1] != pair.psi1.size:
        raise ValueError(
            f"field shape {u.shape} does not match the psi grid of size {pair.psi1.size}")
    weights = pair.angular_weights() * pair.psi1
    return factor * (u @ weights)


def eigenpair_to_csv(pair: EigenPair, path) -> None:
    """Two-column CSV (phi, psi1) with a header comment carrying n, theta0, omega1."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={pair.cap.n} theta0={pair.cap.theta0!r} omega1={pair.omega1!r}\n")
        fh.write("phi,psi1\n")
        for p, v in zip(pair.phi, pair.psi1):
            fh.write(f"{p!r},{v!r}\n")
