"""Phase patterns, theta-cut unwrapping and the phase statistics used by the solver."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AlreadyUnwrapped, EmptyRegion, InvalidRunWarning
from .grid import SphericalGrid


@dataclass(frozen=True)
class PhasePattern:
    """Real phase samples in degrees on a grid.

    ``values`` has the grid's ``(n_theta, n_phi)`` shape. Masked samples
    hold NaN and are ``True`` in ``invalid_mask``.
    """

    grid: SphericalGrid
    values: np.ndarray
    unwrapped: bool = False
    invalid_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if self.invalid_mask is None:
            mask = ~np.isfinite(values)
        else:
            mask = np.array(self.invalid_mask, dtype=bool).reshape(self.grid.shape)
        values[mask] = np.nan
        values.flags.writeable = False
        mask.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "invalid_mask", mask)

    @property
    def flat_values(self) -> np.ndarray:
        return self.values.ravel()

    def __add__(self, other):
        """Add a constant or a grid-shaped array of degrees."""
        return PhasePattern(self.grid, self.values + np.asarray(other, dtype=float),
                            self.unwrapped, self.invalid_mask)


def wrap(value):
    """Map degrees into (-180, 180] by subtracting a multiple of 360.

    Works elementwise on arrays. Inputs already inside the interval are
    returned unchanged, bit for bit.
    """
    value = np.asarray(value, dtype=float)
    turns = np.floor((180.0 - value) / 360.0)
    out = value + 360.0 * turns
    # floor() can land one turn off next to the boundaries
    out = np.where(out <= -180.0, out + 360.0, out)
    out = np.where(out > 180.0, out - 360.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def unwrap_cut(cut) -> tuple[np.ndarray, int]:
    """Unwrap one theta cut.

    Each valid sample is moved by a whole number of turns so that it sits
    within 180 degrees of the previous valid sample of the same run. A NaN
    ends the current run; the next valid sample starts a new one
    unchanged. Returns the unwrapped cut and the number of runs that were
    restarted.
    """
    cut = np.asarray(cut, dtype=float)
    out = cut.copy()
    restarts = 0
    prev = None
    for i, value in enumerate(cut):
        if not np.isfinite(value):
            if prev is not None:
                restarts += 1
            prev = None
            continue
        if prev is not None:
            turns = np.round((prev - value) / 360.0)
            candidate = value + 360.0 * turns
            # exact half-turn steps resolve towards the positive step
            if candidate - prev <= -180.0:
                candidate += 360.0
            elif candidate - prev > 180.0:
                candidate -= 360.0
            out[i] = candidate
        prev = out[i]
    return out, restarts


def unwrap_theta(pattern: PhasePattern) -> PhasePattern:
    """Unwrap every phi cut independently, starting at theta = 0."""
    if pattern.unwrapped:
        raise AlreadyUnwrapped("pattern is already unwrapped")
    values = np.array(pattern.values)
    restarts = 0
    for j in range(pattern.grid.n_phi):
        values[:, j], r = unwrap_cut(values[:, j])
        restarts += r
    if restarts:
        warnings.warn(f"{restarts} theta cut(s) split by invalid samples; "
                      "unwrapping restarted after each gap", InvalidRunWarning, stacklevel=2)
    return PhasePattern(pattern.grid, values, True, pattern.invalid_mask)


def mean_and_variance(values) -> tuple[float, float]:
    """Mean and sum of squared deviations (deliberately not divided by N)."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EmptyRegion("no samples to average")
    mu = values.mean()
    dev = values - mu
    return float(mu), float(dev @ dev)
