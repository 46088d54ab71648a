"""The (phi, theta) sample lattice of the upper hemisphere."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonUniformGrid


@dataclass(frozen=True)
class SphericalGrid:
    """Uniform lattice with phi in [0, 360) and theta in [0, 90], in degrees.

    Samples are stored theta-major: arrays on the grid have shape
    ``(n_theta, n_phi)`` and the flat index of ``(i_theta, i_phi)`` is
    ``i_theta * n_phi + i_phi``.
    """

    resolution: float = 1.0

    def __post_init__(self):
        res = float(self.resolution)
        if not np.isfinite(res) or res <= 0:
            raise NonUniformGrid(f"resolution must be positive, got {self.resolution!r}")
        for span in (360.0, 90.0):
            steps = span / res
            if abs(steps - round(steps)) > 1e-9 * steps:
                raise NonUniformGrid(f"resolution {res} does not divide {span:g} degrees")
        object.__setattr__(self, "resolution", res)

    @property
    def n_phi(self) -> int:
        return int(round(360.0 / self.resolution))

    @property
    def n_theta(self) -> int:
        return int(round(90.0 / self.resolution)) + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @cached_property
    def phi_values(self) -> np.ndarray:
        values = np.arange(self.n_phi) * self.resolution
        values.flags.writeable = False
        return values

    @cached_property
    def theta_values(self) -> np.ndarray:
        values = np.arange(self.n_theta) * self.resolution
        values[-1] = 90.0
        values.flags.writeable = False
        return values

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Flat ``(phi, theta)`` arrays in storage order."""
        theta, phi = np.meshgrid(self.theta_values, self.phi_values, indexing="ij")
        phi, theta = phi.ravel(), theta.ravel()
        phi.flags.writeable = False
        theta.flags.writeable = False
        return phi, theta

    def flat_index(self, i_theta: int, i_phi: int) -> int:
        return i_theta * self.n_phi + i_phi

    def nearest_index(self, phi: float, theta: float) -> tuple[int, int]:
        return (int(round(theta / self.resolution)),
                int(round(phi / self.resolution)) % self.n_phi)
