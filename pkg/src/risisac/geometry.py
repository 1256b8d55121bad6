"""Positions, array layouts, effective angles and steering vectors.

Conventions used everywhere in the package:

* All arrays lie along ``y`` (ULA) or in the ``y-o-z`` plane (URA) and face
  the service half-space ``x > 0``.
* An effective angle is the inter-element phase progression
  ``u = 2*pi*(d/lambda) * cos(el) * sin(az)``, i.e. ``pi`` times a direction
  cosine for half-wavelength spacing.
* URA vectors are flattened y-major: element ``(iy, iz)`` sits at index
  ``iy * m_z + iz``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HALF_WAVELENGTH = 0.5


@dataclass(frozen=True)
class Vec3:
    """A point in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate in {self!r}")

    @classmethod
    def from_array(cls, a) -> Vec3:
        a = np.asarray(a, dtype=float).ravel()
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> Vec3:
        return Vec3(k * self.x, k * self.y, k * self.z)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: Vec3) -> float:
        return (other - self).norm()


@dataclass(frozen=True)
class UlaGeometry:
    """Uniform linear array along ``y``.

    ``spacing`` is expressed in wavelengths (0.5 is half-wavelength).
    """

    n_elements: int
    spacing: float = HALF_WAVELENGTH

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def size(self) -> int:
        return self.n_elements

    @property
    def phase_scale(self) -> float:
        return 2.0 * math.pi * self.spacing


@dataclass(frozen=True)
class UraGeometry:
    """Uniform rectangular array in the ``y-o-z`` plane (spacing in wavelengths)."""

    m_y: int
    m_z: int
    spacing: float = HALF_WAVELENGTH

    def __post_init__(self):
        if self.m_y < 1 or self.m_z < 1:
            raise ValueError("m_y and m_z must be >= 1")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def size(self) -> int:
        return self.m_y * self.m_z

    @property
    def phase_scale(self) -> float:
        return 2.0 * math.pi * self.spacing


@dataclass(frozen=True)
class EffectiveAnglePair:
    """Effective angles ``(u, v)`` along the ``y`` and ``z`` axes, in radians."""

    u: float
    v: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.u, self.v)


def ula_steering(u: float, n: int) -> np.ndarray:
    """Return the length-``n`` ULA response with entry ``k`` equal to ``exp(j*k*u)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.exp(1j * u * np.arange(n))


def ura_steering(u: float, v: float, g: UraGeometry) -> np.ndarray:
    """URA response ``kron(a_y(u), a_z(v))`` in y-major order."""
    return np.kron(ula_steering(u, g.m_y), ula_steering(v, g.m_z))


def _direction(src: Vec3, dst: Vec3) -> tuple[float, float, float]:
    dx, dy, dz = dst.x - src.x, dst.y - src.y, dst.z - src.z
    d = math.sqrt(dx * dx + dy * dy + dz * dz)
    if d == 0.0:
        raise ValueError("degenerate direction: coincident points")
    return dx / d, dy / d, dz / d


def effective_angles_between(
    src: Vec3, dst: Vec3, spacing: float = HALF_WAVELENGTH
) -> EffectiveAnglePair:
    """Effective angles of the direction pointing from ``src`` towards ``dst``.

    Used both for arrivals (``src`` = receiving array, ``dst`` = emitter) and
    for departures (``src`` = transmitting array, ``dst`` = destination).
    """
    _, cy, cz = _direction(src, dst)
    scale = 2.0 * math.pi * spacing
    return EffectiveAnglePair(scale * cy, scale * cz)


def ue_effective_aod(ue: Vec3, target: Vec3, spacing: float = HALF_WAVELENGTH) -> float:
    """Effective AoD of the UE's ULA towards ``target``.

    Equals minus the effective AoA (``u`` component) of the UE's signal at
    ``target``, which is what lets a sensed AoA be turned into a transmit beam.
    """
    return effective_angles_between(ue, target, spacing).u


def wrap_angle(a):
    """Wrap angles to ``(-pi, pi]``."""
    w = np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return w if np.ndim(w) else float(w)
