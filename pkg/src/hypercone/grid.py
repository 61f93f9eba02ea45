"""Cell-centered tensor grid on the truncated cone (0, R_max) x (0, theta0).

Cells are centered at r_i = (i+1/2)*dr and phi_j = (j+1/2)*dphi so that no
node ever sits on a coordinate pole or a Dirichlet face; boundaries live on
cell faces.  Full-sphere cones (theta0 = pi) carry no angular direction: the
data families used on them are angularly constant and stay that way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ConeSpec

__all__ = ["Grid", "make_grid"]


@dataclass(frozen=True)
class Grid:
    r_centers: np.ndarray
    dr: float
    phi_centers: Optional[np.ndarray]
    dphi: Optional[float]
    cone: ConeSpec
    r_max: float

    @property
    def radial_only(self) -> bool:
        return self.phi_centers is None

    @property
    def shape(self):
        if self.radial_only:
            return (self.r_centers.size,)
        return (self.r_centers.size, self.phi_centers.size)


def make_grid(cone: ConeSpec, r_max: float, nr: int, nphi: int) -> Grid:
    """Build the cell-centered grid; radial-only when the cone is all of H^n."""
    if r_max <= 0.0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if nr < 1:
        raise ValueError(f"Nr must be >= 1, got {nr}")
    dr = r_max / nr
    r_centers = (np.arange(nr) + 0.5) * dr
    if cone.is_full_sphere:
        return Grid(r_centers=r_centers, dr=dr, phi_centers=None, dphi=None,
                    cone=cone, r_max=r_max)
    if nphi < 1:
        raise ValueError(f"Nphi must be >= 1, got {nphi}")
    dphi = cone.theta0 / nphi
    phi_centers = (np.arange(nphi) + 0.5) * dphi
    return Grid(r_centers=r_centers, dr=dr, phi_centers=phi_centers, dphi=dphi,
                cone=cone, r_max=r_max)
