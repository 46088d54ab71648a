"""Far-field pattern data model and CSV/manifest ingestion.

Pattern files are UTF-8 CSV with a ``phi_deg,theta_deg,re,im`` header and
one row per grid point; ``#`` starts a comment line. A companion manifest
of ``key=value`` lines supplies ``frequency_hz``, ``mode_id`` and
``polarization`` (and optionally ``pattern_file`` and ``wavelength_m``).

Vendor exports go through :func:`register_importer`, which maps a file
suffix to a callable returning a :class:`FieldPattern`.
"""

import enum
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import SPEED_OF_LIGHT
from .errors import (DuplicateSample, GridMismatch, MalformedInput, MalformedRow,
                     MissingSample, NonUniformGrid, PolarizationMismatch,
                     ZeroAmplitudeWarning)
from .grid import SphericalGrid
from .phase import PhasePattern

HEADER = ("phi_deg", "theta_deg", "re", "im")
DB_FLOOR = -300.0


class Polarization(enum.Enum):
    THETA = "THETA"
    PHI = "PHI"
    RHCP = "RHCP"
    LHCP = "LHCP"


class Hand(enum.Enum):
    RIGHT = "RIGHT"
    LEFT = "LEFT"


@dataclass(frozen=True)
class Wavenumber:
    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"wavenumber must be positive, got {self.k!r}")

    @classmethod
    def from_wavelength(cls, wavelength: float) -> "Wavenumber":
        return cls(2.0 * math.pi / wavelength)

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.k


@dataclass(frozen=True)
class FieldPattern:
    """Complex samples of one polarization component of one mode."""

    grid: SphericalGrid
    mode_id: int
    polarization: Polarization
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.size != self.grid.size:
            raise MissingSample(f"expected {self.grid.size} samples, got {samples.size}")
        samples = samples.reshape(self.grid.shape)
        if not np.all(np.isfinite(samples)):
            raise MalformedInput("pattern contains NaN or infinite samples")
        if int(self.mode_id) < 1:
            raise MalformedInput(f"mode_id must be >= 1, got {self.mode_id!r}")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "mode_id", int(self.mode_id))
        object.__setattr__(self, "polarization", Polarization(self.polarization))


@dataclass(frozen=True)
class ModeSet:
    modes: tuple
    frequency: float
    wavelength: float = None

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise MalformedInput("a mode set needs at least one pattern")
        grid = modes[0].grid
        for m in modes[1:]:
            if m.grid != grid:
                raise GridMismatch(f"mode {m.mode_id} grid differs from mode {modes[0].mode_id}")
        ids = [m.mode_id for m in modes]
        if len(set(ids)) != len(ids):
            raise MalformedInput(f"duplicate mode ids in {ids}")
        nominal = SPEED_OF_LIGHT / self.frequency
        wavelength = nominal if self.wavelength is None else float(self.wavelength)
        if abs(wavelength - nominal) > 0.005 * nominal:
            raise MalformedInput(f"wavelength {wavelength} m inconsistent with "
                                 f"frequency {self.frequency} Hz (c/f = {nominal:.6g} m)")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "wavelength", wavelength)

    @property
    def grid(self) -> SphericalGrid:
        return self.modes[0].grid

    @property
    def wavenumber(self) -> Wavenumber:
        return Wavenumber.from_wavelength(self.wavelength)

    def mode(self, mode_id: int) -> FieldPattern:
        for m in self.modes:
            if m.mode_id == mode_id:
                return m
        raise KeyError(mode_id)


@dataclass(frozen=True)
class MagnitudePattern:
    grid: SphericalGrid
    values: np.ndarray
    db: bool


# ---------------------------------------------------------------------------
# CSV pattern files

_IMPORTERS = {}


def register_importer(suffix: str, reader) -> None:
    """Route files ending in ``suffix`` to ``reader(path, mode_id)``."""
    _IMPORTERS[suffix.lower()] = reader


def _parse_rows(path: Path):
    rows = []
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            cols = [c.strip() for c in text.split(",")]
            if not header_seen:
                header_seen = True
                if tuple(cols) == HEADER:
                    continue
                raise MalformedRow(f"{path}:{lineno}: expected header {','.join(HEADER)}")
            if len(cols) != 4:
                raise MalformedRow(f"{path}:{lineno}: expected 4 columns, got {len(cols)}")
            try:
                rows.append(tuple(float(c) for c in cols))
            except ValueError as exc:
                raise MalformedRow(f"{path}:{lineno}: {exc}") from None
    if not header_seen:
        raise MissingSample(f"{path}: no header and no data rows")
    return np.array(rows, dtype=float).reshape(-1, 4)


def _infer_resolution(values: np.ndarray, axis: str) -> float:
    unique = np.unique(values)
    if unique.size < 2:
        raise MissingSample(f"{axis}: lattice requires at least two distinct values")
    steps = np.diff(unique)
    res = steps[0]
    if np.any(np.abs(steps - res) > 1e-9 * max(res, 1.0)):
        raise NonUniformGrid(f"{axis}: spacing is not uniform")
    return float(res)


def parse_pattern_file(path, mode_id: int, polarization=Polarization.RHCP) -> FieldPattern:
    """Read a pattern CSV into a :class:`FieldPattern`.

    Rows may come in any order. Rows with theta > 90 (full-sphere exports)
    and rows at phi = 360 (duplicate of phi = 0) are dropped.
    """
    path = Path(path)
    reader = _IMPORTERS.get(path.suffix.lower())
    if reader is not None:
        return reader(path, mode_id)
    if not path.is_file():
        raise MalformedInput(f"{path}: no such file")
    data = _parse_rows(path)
    if not np.all(np.isfinite(data)):
        raise MalformedRow(f"{path}: non-finite value in data rows")
    keep = (data[:, 1] <= 90.0 + 1e-9) & (data[:, 0] < 360.0 - 1e-9)
    data = data[keep]
    if data.shape[0] == 0:
        raise MissingSample(f"{path}: no rows inside the upper hemisphere")
    phi, theta = data[:, 0], data[:, 1]
    if phi.min() < 0 or theta.min() < 0:
        raise NonUniformGrid(f"{path}: negative angles are not on the lattice")
    res_theta = _infer_resolution(theta, "theta")
    if np.unique(phi).size > 1:
        res_phi = _infer_resolution(phi, "phi")
        if abs(res_phi - res_theta) > 1e-9:
            raise NonUniformGrid(f"{path}: phi step {res_phi} differs from theta step {res_theta}")
    try:
        grid = SphericalGrid(res_theta)
    except NonUniformGrid as exc:
        raise NonUniformGrid(f"{path}: {exc}") from None

    i_theta = np.round(theta / grid.resolution).astype(int)
    i_phi = np.round(phi / grid.resolution).astype(int)
    off = (np.abs(theta - i_theta * grid.resolution) > 1e-6) | (
        np.abs(phi - i_phi * grid.resolution) > 1e-6)
    if np.any(off):
        raise NonUniformGrid(f"{path}: {int(off.sum())} rows off the {grid.resolution} deg lattice")
    flat = i_theta * grid.n_phi + i_phi
    uniq, counts = np.unique(flat, return_counts=True)
    if np.any(counts > 1):
        dup = uniq[counts > 1][0]
        raise DuplicateSample(f"{path}: sample at phi={grid.mesh[0][dup]:g}, "
                              f"theta={grid.mesh[1][dup]:g} listed {counts.max()} times")
    if uniq.size != grid.size:
        raise MissingSample(f"{path}: {grid.size - uniq.size} of {grid.size} lattice samples missing")
    samples = np.empty(grid.size, dtype=complex)
    samples.real[flat] = data[:, 2]
    samples.imag[flat] = data[:, 3]
    return FieldPattern(grid, mode_id, polarization, samples)


def format_pattern(pattern: FieldPattern, comments=()) -> str:
    phi, theta = pattern.grid.mesh
    samples = pattern.samples.ravel()
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(HEADER))
    for p, t, s in zip(phi.tolist(), theta.tolist(), samples.tolist()):
        lines.append(f"{p!r},{t!r},{s.real!r},{s.imag!r}")
    return "\n".join(lines) + "\n"


def write_pattern_file(pattern: FieldPattern, path, comments=()) -> None:
    """Write ``pattern`` so that :func:`parse_pattern_file` reads it back bit-exactly."""
    Path(path).write_text(format_pattern(pattern, comments), encoding="utf-8")


def read_manifest(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise MalformedInput(f"{path}: no such manifest")
    entries = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise MalformedInput(f"{path}:{lineno}: expected key=value")
        entries[key.strip()] = value.strip()
    missing = {"frequency_hz", "mode_id", "polarization"} - entries.keys()
    if missing:
        raise MalformedInput(f"{path}: manifest lacks {', '.join(sorted(missing))}")
    try:
        entries["frequency_hz"] = float(entries["frequency_hz"])
        entries["mode_id"] = int(entries["mode_id"])
        entries["polarization"] = Polarization(entries["polarization"].upper())
        if "wavelength_m" in entries:
            entries["wavelength_m"] = float(entries["wavelength_m"])
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from None
    entries["pattern_file"] = path.parent / entries.get("pattern_file", path.with_suffix(".csv").name)
    return entries


def write_manifest(path, frequency_hz: float, mode_id: int, polarization: Polarization,
                   pattern_file: str, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines += [f"frequency_hz={frequency_hz!r}", f"mode_id={mode_id}",
              f"polarization={Polarization(polarization).value}", f"pattern_file={pattern_file}"]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_manifest(path) -> tuple[FieldPattern, dict]:
    """Parse a manifest and the pattern file it names."""
    meta = read_manifest(path)
    pattern = parse_pattern_file(meta["pattern_file"], meta["mode_id"], meta["polarization"])
    return pattern, meta


# ---------------------------------------------------------------------------
# Derived quantities

def to_circular(e_theta: FieldPattern, e_phi: FieldPattern, hand=Hand.RIGHT) -> FieldPattern:
    """Combine linear components into RHCP or LHCP (IEEE, exp(+jwt) time dependence)."""
    if e_theta.grid != e_phi.grid:
        raise GridMismatch("theta and phi components are on different grids")
    if e_theta.mode_id != e_phi.mode_id:
        raise GridMismatch(f"mode {e_theta.mode_id} paired with mode {e_phi.mode_id}")
    if e_theta.polarization is not Polarization.THETA or e_phi.polarization is not Polarization.PHI:
        raise PolarizationMismatch(
            f"expected THETA and PHI, got {e_theta.polarization.value} and {e_phi.polarization.value}")
    hand = Hand(hand)
    sign = -1j if hand is Hand.RIGHT else 1j
    samples = (e_theta.samples + sign * e_phi.samples) / math.sqrt(2.0)
    pol = Polarization.RHCP if hand is Hand.RIGHT else Polarization.LHCP
    return FieldPattern(e_theta.grid, e_theta.mode_id, pol, samples)


def phase_of(pattern: FieldPattern) -> PhasePattern:
    """Wrapped phase in degrees, in (-180, 180]; zero samples are masked."""
    samples = pattern.samples
    zero = samples == 0
    phase = np.degrees(np.arctan2(samples.imag, samples.real))
    # arctan2 gives -180 for (-1, -0.0); the interval is half-open at -180
    phase[phase == -180.0] = 180.0
    if np.any(zero):
        warnings.warn(f"{int(zero.sum())} zero-amplitude sample(s) in mode {pattern.mode_id} "
                      "have no phase and were masked", ZeroAmplitudeWarning, stacklevel=2)
    return PhasePattern(pattern.grid, phase, False, zero)


def magnitude_of(pattern: FieldPattern, normalize: bool = False) -> MagnitudePattern:
    """Sample magnitudes; with ``normalize`` in dB relative to the peak."""
    mag = np.abs(pattern.samples)
    if not normalize:
        return MagnitudePattern(pattern.grid, mag, False)
    peak = mag.max()
    db = np.full(mag.shape, DB_FLOOR)
    if peak > 0:
        nz = mag > 0
        db[nz] = np.maximum(20.0 * np.log10(mag[nz] / peak), DB_FLOOR)
    return MagnitudePattern(pattern.grid, db, True)
