"""Phase-center determination for multi-mode antennas from far-field samples."""

__version__ = "0.1.0"

SPEED_OF_LIGHT = 299792458.0
