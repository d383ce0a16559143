"""Sealing-lip geometry.

The lip is a conical annulus between an inner radius ``r`` and an outer
radius ``R``, inclined at ``alpha`` to the horizontal. It is cut into
``n_segments`` wedge segments of angular width ``d_theta``; each segment
is treated as an isosceles trapezoid whose slant height is the length of
a cantilever strip.
"""
import math
from dataclasses import dataclass

from .errors import DomainError

TWO_PI = 2.0 * math.pi
DEFAULT_N_SEGMENTS = 36


@dataclass(frozen=True)
class LipGeometry:
    r: float        # inner radius [m]
    R: float        # outer radius [m]
    alpha: float    # cone inclination to horizontal [rad]
    b: float        # lip thickness [m]
    E: float        # elastic modulus [Pa]

    def __post_init__(self):
        if not (0.0 < self.r < self.R):
            raise DomainError(f"need 0 < r < R, got r={self.r}, R={self.R}")
        if not (0.0 <= self.alpha < math.pi / 2):
            raise DomainError(f"need 0 <= alpha < pi/2, got {self.alpha}")
        if not self.b > 0.0:
            raise DomainError(f"lip thickness must be positive, got {self.b}")
        if not self.E > 0.0:
            raise DomainError(f"modulus must be positive, got {self.E}")

    def replace(self, **changes) -> "LipGeometry":
        fields = {"r": self.r, "R": self.R, "alpha": self.alpha, "b": self.b, "E": self.E}
        fields.update(changes)
        return LipGeometry(**fields)


@dataclass(frozen=True)
class SegmentGrid:
    n_segments: int
    d_theta: float

    def widths(self):
        return [self.d_theta] * self.n_segments


def make_grid(n_segments: int = DEFAULT_N_SEGMENTS) -> SegmentGrid:
    if int(n_segments) != n_segments or n_segments < 1:
        raise DomainError(f"n_segments must be a positive integer, got {n_segments}")
    n = int(n_segments)
    return SegmentGrid(n_segments=n, d_theta=TWO_PI / n)


def check_d_theta(d_theta: float) -> float:
    if not (0.0 < d_theta <= TWO_PI):
        raise DomainError(f"d_theta must lie in (0, 2*pi], got {d_theta}")
    return float(d_theta)


def as_d_theta(grid) -> float:
    """Accept a SegmentGrid or a bare angular width."""
    if isinstance(grid, SegmentGrid):
        return grid.d_theta
    return check_d_theta(grid)


def segment_area(geom: LipGeometry, d_theta: float) -> float:
    """Slant area of one trapezoidal segment: (R^2 - r^2) d_theta / (2 cos alpha)."""
    d_theta = check_d_theta(d_theta)
    return 0.5 * (geom.R**2 - geom.r**2) * d_theta / math.cos(geom.alpha)


def beam_length(geom: LipGeometry) -> float:
    """Slant height of a segment, used as the cantilever length."""
    return (geom.R - geom.r) / math.cos(geom.alpha)


def segment_inertia(geom: LipGeometry, d_theta: float) -> float:
    """Second moment of a segment's rectangular section, b^3 (r + R) d_theta / 24.

    The section width is the trapezoid median (r + R) d_theta / 2.
    """
    d_theta = check_d_theta(d_theta)
    return geom.b**3 * (geom.r + geom.R) * d_theta / 24.0


def annulus_slant_area(geom: LipGeometry) -> float:
    return math.pi * (geom.R**2 - geom.r**2) / math.cos(geom.alpha)
