"""Spherical caps on the sample grid and the displacement phase model.

A phase center displaced by ``d`` from the origin adds ``k * d . u`` to
the far-field phase, where ``u`` is the unit propagation vector
``(cos(phi) sin(theta), sin(phi) sin(theta), cos(theta))``.

The published derivation prints ``sin(theta)`` in the z term. That form
is kept behind ``paper_z_sin_theta=True`` for literal reproduction only;
it does not describe a plane wave and makes broadside phase blind to z.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegionTooSmall
from .farfield import Wavenumber
from .grid import SphericalGrid

MIN_REGION_SAMPLES = 4


@dataclass(frozen=True)
class Direction:
    phi: float
    theta: float

    def __post_init__(self):
        if not (0.0 <= self.phi < 360.0):
            raise ValueError(f"phi must lie in [0, 360), got {self.phi!r}")
        if not (0.0 <= self.theta <= 90.0):
            raise ValueError(f"theta must lie in [0, 90], got {self.theta!r}")


@dataclass(frozen=True)
class Displacement:
    """Phase-center offset from the physical center, in meters."""

    x_pc: float = 0.0
    y_pc: float = 0.0
    z_pc: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x_pc, self.y_pc, self.z_pc)):
            raise ValueError("displacement components must be finite")

    @classmethod
    def from_vector(cls, v) -> "Displacement":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_pc, self.y_pc, self.z_pc])

    @property
    def norm(self) -> float:
        return math.sqrt(self.x_pc ** 2 + self.y_pc ** 2 + self.z_pc ** 2)

    def in_wavelengths(self, wavelength: float) -> tuple[float, float, float]:
        return (self.x_pc / wavelength, self.y_pc / wavelength, self.z_pc / wavelength)

    def __add__(self, other: "Displacement") -> "Displacement":
        return Displacement.from_vector(self.as_array() + other.as_array())


@dataclass(frozen=True)
class AngularRegion:
    """Grid samples within ``diameter / 2`` great-circle degrees of ``center``."""

    grid: SphericalGrid
    center: Direction
    diameter: float
    member_indices: np.ndarray

    @property
    def n_p(self) -> int:
        return int(self.member_indices.size)

    @property
    def phi(self) -> np.ndarray:
        return self.grid.mesh[0][self.member_indices]

    @property
    def theta(self) -> np.ndarray:
        return self.grid.mesh[1][self.member_indices]

    @property
    def clipped(self) -> bool:
        """True when the cap reaches past the theta = 90 edge of the grid."""
        return self.center.theta + self.diameter / 2.0 > 90.0


def unit_vectors(phi, theta) -> np.ndarray:
    """Unit propagation vectors, shape ``(..., 3)``, for angles in degrees."""
    p, t = np.radians(phi), np.radians(theta)
    st = np.sin(t)
    return np.stack([np.cos(p) * st, np.sin(p) * st, np.cos(t)], axis=-1)


def great_circle_distance(a: Direction, b: Direction) -> float:
    """Central angle between two directions in degrees, in [0, 180]."""
    return float(_central_angle(a.phi, a.theta, b.phi, b.theta))


def _central_angle(phi_a, theta_a, phi_b, theta_b):
    ua = unit_vectors(phi_a, theta_a)
    ub = unit_vectors(phi_b, theta_b)
    cross = np.linalg.norm(np.cross(ua, ub), axis=-1)
    dot = np.sum(ua * ub, axis=-1)
    return np.degrees(np.arctan2(cross, dot))


def select_region(grid: SphericalGrid, center: Direction, diameter: float) -> AngularRegion:
    """Closed spherical cap around ``center``; members in storage order."""
    if not diameter > 0:
        raise ValueError(f"diameter must be positive, got {diameter!r}")
    phi, theta = grid.mesh
    dist = _central_angle(center.phi, center.theta, phi, theta)
    # tolerance keeps samples lying exactly on the rim despite rounding
    members = np.flatnonzero(dist <= diameter / 2.0 + 1e-9)
    if members.size < MIN_REGION_SAMPLES:
        raise RegionTooSmall(f"cap of {diameter:g} deg around ({center.phi:g}, {center.theta:g}) "
                             f"holds {members.size} sample(s); need {MIN_REGION_SAMPLES}")
    members.flags.writeable = False
    return AngularRegion(grid, center, float(diameter), members)


def direction_matrix(phi, theta, paper_z_sin_theta: bool = False) -> np.ndarray:
    """Rows are the per-direction factors multiplying ``(x_pc, y_pc, z_pc)``."""
    u = unit_vectors(phi, theta)
    if paper_z_sin_theta:
        u[..., 2] = np.sin(np.radians(theta))
    return u


def displacement_phase(d: Displacement, direction: Direction, k: Wavenumber,
                       paper_z_sin_theta: bool = False) -> float:
    """Phase in degrees added by displacing the phase center by ``d``."""
    u = direction_matrix(direction.phi, direction.theta, paper_z_sin_theta)
    return float(np.degrees(k.k * (u @ d.as_array())))


def phase_shift_vector(d: Displacement, region: AngularRegion, k: Wavenumber,
                       paper_z_sin_theta: bool = False) -> np.ndarray:
    """:func:`displacement_phase` at every region member, in region order."""
    u = direction_matrix(region.phi, region.theta, paper_z_sin_theta)
    return np.degrees(k.k * (u @ d.as_array()))


def grid_phase_shift(d: Displacement, grid: SphericalGrid, k: Wavenumber,
                     paper_z_sin_theta: bool = False) -> np.ndarray:
    """Displacement phase over the whole grid, shaped like the grid."""
    phi, theta = grid.mesh
    u = direction_matrix(phi, theta, paper_z_sin_theta)
    return np.degrees(k.k * (u @ d.as_array())).reshape(grid.shape)
