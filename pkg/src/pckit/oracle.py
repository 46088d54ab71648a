"""Synthetic far fields radiated by a displaced ideal point source.

With no noise the phase fronts are exact spheres around the chosen
displacement, so any correct solver must recover it.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .farfield import FieldPattern, Polarization, Wavenumber
from .geometry import Displacement, grid_phase_shift
from .grid import SphericalGrid


class Taper(enum.Enum):
    UNIFORM = "UNIFORM"
    COSINE_THETA = "COSINE_THETA"


@dataclass(frozen=True)
class SyntheticSpec:
    true_displacement: Displacement = Displacement()
    amplitude_taper: Taper = Taper.UNIFORM
    constant_phase: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.noise_sigma >= 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma!r}")
        object.__setattr__(self, "amplitude_taper", Taper(self.amplitude_taper))


def synthetic_phase(spec: SyntheticSpec, grid: SphericalGrid, k: Wavenumber,
                    paper_z_sin_theta: bool = False) -> np.ndarray:
    """Continuous (unwrapped) phase in degrees that :func:`generate` encodes."""
    phase = spec.constant_phase + grid_phase_shift(spec.true_displacement, grid, k, paper_z_sin_theta)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        phase = phase + rng.normal(0.0, spec.noise_sigma, size=grid.shape)
    return phase


def generate(spec: SyntheticSpec, grid: SphericalGrid, k: Wavenumber, mode_id: int = 1,
             polarization=Polarization.RHCP, paper_z_sin_theta: bool = False) -> FieldPattern:
    phase = synthetic_phase(spec, grid, k, paper_z_sin_theta)
    if spec.amplitude_taper is Taper.COSINE_THETA:
        amplitude = np.cos(np.radians(grid.mesh[1])).reshape(grid.shape)
    else:
        amplitude = np.ones(grid.shape)
    samples = amplitude * np.exp(1j * np.radians(phase))
    return FieldPattern(grid, mode_id, polarization, samples)
