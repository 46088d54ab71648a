"""Phase-center estimation by variance minimization over an angular region.

For a candidate displacement ``d`` the equiphase residual over the region
is ``psi_eq = psi - k d.u``. The solver minimizes the sum of squared
deviations of ``psi_eq`` from its mean with the Nelder-Mead simplex,
starting at the physical center. The constant phase (initial and
propagation terms) drops out of the variance and is reported as
``psi_c``, the residual mean.
"""

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyRegion, InvalidSampleInRegion, MagnitudeSpreadWarning, PhaseCenterError,
                     SearchRadiusExceeded)
from .farfield import DB_FLOOR, MagnitudePattern, ModeSet, Wavenumber, magnitude_of, phase_of
from .geometry import (AngularRegion, Direction, Displacement, direction_matrix,
                       phase_shift_vector, select_region)
from .optimizer import OptimizeResult, SimplexConfig, minimize
from .phase import PhasePattern, mean_and_variance, unwrap_theta

MAGNITUDE_SPREAD_LIMIT_DB = 6.0
SEARCH_RADIUS_WAVELENGTHS = 10.0


@dataclass(frozen=True)
class PhaseCenterResult:
    mode_id: int
    center: Direction
    diameter: float
    displacement: Displacement
    wavelength: float
    psi_c: float
    variance_before: float
    variance_after: float
    n_p: int
    optimizer: OptimizeResult
    magnitude_spread_db: float = float("nan")
    clipped: bool = False
    diagnostics: tuple = ()

    @property
    def displacement_wavelengths(self) -> tuple[float, float, float]:
        return self.displacement.in_wavelengths(self.wavelength)

    @property
    def converged(self) -> bool:
        return self.optimizer.converged


@dataclass(frozen=True)
class ResidualPattern:
    """Equiphase residual at the members of a region."""

    region: AngularRegion
    values: np.ndarray

    @property
    def variance(self) -> float:
        return mean_and_variance(self.values)[1]


@dataclass(frozen=True)
class SweepEntry:
    theta: float
    mode_id: int
    result: PhaseCenterResult = None
    clipped: bool = False
    error: PhaseCenterError = None


@dataclass(frozen=True)
class SweepResult:
    plane: float
    diameter: float
    entries: list = field(default_factory=list)


def _region_phases(phases: PhasePattern, region: AngularRegion) -> np.ndarray:
    if not phases.unwrapped:
        raise ValueError("phase pattern must be unwrapped before solving")
    values = phases.flat_values[region.member_indices]
    if phases.invalid_mask.ravel()[region.member_indices].any():
        bad = int(phases.invalid_mask.ravel()[region.member_indices].sum())
        raise InvalidSampleInRegion(f"{bad} invalid sample(s) inside the region")
    return values


class VarianceObjective:
    """Region-restricted variance as a function of a 3-vector displacement."""

    def __init__(self, phases, region, k, paper_z_sin_theta=False, scale=1.0):
        self.psi = _region_phases(phases, region)
        self.factors = np.degrees(k.k) * direction_matrix(region.phi, region.theta, paper_z_sin_theta)
        self.scale = scale

    def residual(self, x):
        return self.psi - self.factors @ x

    def __call__(self, x):
        r = self.residual(x)
        r = r - r.mean()
        return self.scale * float(r @ r)


def objective_variance(d: Displacement, phases: PhasePattern, region: AngularRegion,
                       k: Wavenumber, paper_z_sin_theta: bool = False) -> float:
    psi = _region_phases(phases, region)
    return mean_and_variance(psi - phase_shift_vector(d, region, k, paper_z_sin_theta))[1]


def residual_pattern(phases: PhasePattern, d: Displacement, region: AngularRegion,
                     k: Wavenumber, paper_z_sin_theta: bool = False) -> ResidualPattern:
    psi = _region_phases(phases, region)
    values = psi - phase_shift_vector(d, region, k, paper_z_sin_theta)
    values.flags.writeable = False
    return ResidualPattern(region, values)


def magnitude_consistency(magnitudes: MagnitudePattern, region: AngularRegion) -> float:
    """Magnitude spread (max minus min) over the region, in dB."""
    values = magnitudes.values.ravel()[region.member_indices]
    if values.size == 0:
        raise EmptyRegion("region has no members")
    if not magnitudes.db:
        peak = values.max()
        if peak == 0:
            return 0.0
        with np.errstate(divide="ignore"):
            values = np.maximum(20.0 * np.log10(values / peak), DB_FLOOR)
    return float(values.max() - values.min())


def default_config(wavelength: float, **overrides) -> SimplexConfig:
    """Simplex settings with the initial step scaled to ``wavelength / 20``."""
    overrides.setdefault("initial_step", wavelength / 20.0)
    return SimplexConfig(**overrides)


def solve_phase_center(phases: PhasePattern, region: AngularRegion, k: Wavenumber,
                       config: SimplexConfig = None, *, mode_id: int = 1,
                       magnitudes: MagnitudePattern = None,
                       search_radius: float = None,
                       magnitude_limit_db: float = MAGNITUDE_SPREAD_LIMIT_DB,
                       paper_z_sin_theta: bool = False,
                       trace=None) -> PhaseCenterResult:
    """Find the displacement that makes the phase most uniform over ``region``.

    ``search_radius`` defaults to ten wavelengths; a minimum outside it
    raises :class:`SearchRadiusExceeded`.
    """
    wavelength = k.wavelength
    if config is None:
        config = default_config(wavelength)
    if search_radius is None:
        search_radius = SEARCH_RADIUS_WAVELENGTHS * wavelength
    objective = VarianceObjective(phases, region, k, paper_z_sin_theta)
    opt = minimize(objective, np.zeros(3), config, trace=trace)
    d = Displacement.from_vector(opt.x_min)
    if d.norm > search_radius:
        raise SearchRadiusExceeded(
            f"mode {mode_id}: minimum at |d| = {d.norm:.4g} m lies outside "
            f"the {search_radius:.4g} m search radius")

    psi_c, variance_after = mean_and_variance(objective.residual(opt.x_min))
    variance_before = mean_and_variance(objective.psi)[1]
    diagnostics = []
    if not opt.converged:
        diagnostics.append(f"optimizer stopped after {opt.iterations} iterations without converging")
    spread = float("nan")
    if magnitudes is not None:
        spread = magnitude_consistency(magnitudes, region)
        if spread > magnitude_limit_db:
            msg = (f"mode {mode_id}: magnitude varies {spread:.2f} dB over the region "
                   f"(limit {magnitude_limit_db:g} dB)")
            diagnostics.append(msg)
            warnings.warn(msg, MagnitudeSpreadWarning, stacklevel=2)
    if region.clipped:
        diagnostics.append("region clipped by the theta = 90 deg edge")
    return PhaseCenterResult(
        mode_id=mode_id, center=region.center, diameter=region.diameter, displacement=d,
        wavelength=wavelength, psi_c=psi_c, variance_before=variance_before,
        variance_after=variance_after, n_p=region.n_p, optimizer=opt,
        magnitude_spread_db=spread, clipped=region.clipped, diagnostics=tuple(diagnostics))


def prepare_mode(pattern):
    """Unwrapped phase and linear magnitude for one mode's field pattern."""
    return unwrap_theta(phase_of(pattern)), magnitude_of(pattern)


def thread_count(n_tasks: int) -> int:
    cap = os.environ.get("PCKIT_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def _map(fn, items):
    items = list(items)
    workers = thread_count(len(items))
    if workers == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def solve_modes(modes: ModeSet, center: Direction, diameter: float,
                config: SimplexConfig = None, **kwargs) -> list[PhaseCenterResult]:
    """Solve every mode independently over the same region."""
    region = select_region(modes.grid, center, diameter)
    k = modes.wavenumber

    def one(pattern):
        phases, mags = prepare_mode(pattern)
        return solve_phase_center(phases, region, k, config, mode_id=pattern.mode_id,
                                  magnitudes=mags, **kwargs)

    return _map(one, modes.modes)


def sweep_theta(modes: ModeSet, plane_phi: float, theta_range, diameter: float,
                config: SimplexConfig = None, **kwargs) -> SweepResult:
    """Solve every mode at each ``theta`` in the ``plane_phi`` cut.

    Failures are kept as entries carrying the error rather than aborting.
    """
    k = modes.wavenumber
    prepared = {m.mode_id: prepare_mode(m) for m in modes.modes}
    thetas = sorted(float(t) for t in theta_range)
    tasks = [(t, mid) for t in thetas for mid in prepared]

    def one(task):
        theta, mode_id = task
        clipped = theta + diameter / 2.0 > 90.0
        try:
            region = select_region(modes.grid, Direction(plane_phi % 360.0, theta), diameter)
            phases, mags = prepared[mode_id]
            res = solve_phase_center(phases, region, k, config, mode_id=mode_id,
                                     magnitudes=mags, **kwargs)
            return SweepEntry(theta, mode_id, res, clipped)
        except PhaseCenterError as exc:
            return SweepEntry(theta, mode_id, None, clipped, exc)

    return SweepResult(float(plane_phi), float(diameter), _map(one, tasks))
