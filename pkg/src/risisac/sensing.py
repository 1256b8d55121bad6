"""UE localization from the uplink data signal at the two sensing sub-surfaces.

Each sensing sub-surface sees two coherent wavefronts: the UE's direct path
and the copy relayed by the reflecting sub-surface. The pipeline per
sub-surface is forward-backward spatial smoothing, an eigen split into a
2-dimensional signal subspace, TLS-ESPRIT along each array axis, MUSIC-based
pairing of the per-axis estimates, and removal of the relayed path whose
direction is known from the deployment. The two surviving directions are
then intersected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from risisac.channel import Deployment
from risisac.geometry import (
    EffectiveAnglePair,
    UraGeometry,
    Vec3,
    effective_angles_between,
    ura_steering,
    wrap_angle,
)
from risisac.signal import SnapshotBatch

N_SOURCES = 2


class SensingError(RuntimeError):
    """A localization stage failed; ``stage`` names which one."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class DegenerateGeometryWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MicroSurfaceConfig:
    """Sub-array layout used for spatial smoothing on an ``m_y x m_z`` surface."""

    m_y: int
    m_z: int
    q_y: int
    q_z: int

    def __post_init__(self):
        if not (1 <= self.q_y <= self.m_y and 1 <= self.q_z <= self.m_z):
            raise ValueError("micro-surface must fit inside the sub-surface")
        if self.q_y * self.q_z <= N_SOURCES:
            raise ValueError("micro-surface needs more than 2 elements for a noise subspace")

    @classmethod
    def for_array(cls, g: UraGeometry, q_y: int | None = None, q_z: int | None = None) -> MicroSurfaceConfig:
        """Default layout: micro-surfaces one row/column smaller than the array."""
        return cls(g.m_y, g.m_z, q_y if q_y is not None else max(g.m_y - 1, 1), q_z if q_z is not None else max(g.m_z - 1, 1))

    @property
    def l_micro(self) -> int:
        return self.q_y * self.q_z

    @property
    def n_micro(self) -> int:
        return (self.m_y - self.q_y + 1) * (self.m_z - self.q_z + 1)

    @property
    def micro_geometry(self) -> UraGeometry:
        return UraGeometry(self.q_y, self.q_z)


@dataclass(frozen=True)
class CorrelationMatrix:
    r_hat: np.ndarray
    phase_index: int


@dataclass(frozen=True)
class SubspacePair:
    u_s: np.ndarray
    u_n: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class AoaPair:
    angles: EffectiveAnglePair
    music_residual: float = 0.0

    @property
    def u(self) -> float:
        return self.angles.u

    @property
    def v(self) -> float:
        return self.angles.v


@dataclass(frozen=True)
class LocationEstimate:
    """Sensed UE position plus the direct-path AoA pairs it was built from."""

    position: Vec3
    aoa_pairs: tuple[AoaPair, AoaPair]
    phase_index: int
    subsurface_ids: tuple[int, int] = (2, 3)
    diagnostics: dict = field(default_factory=dict, compare=False)


def fbss_covariance(batch: SnapshotBatch, cfg: MicroSurfaceConfig) -> CorrelationMatrix:
    """Forward-backward spatially smoothed sample covariance of the micro-surfaces."""
    x = np.asarray(batch.samples)
    n_el, n_t = x.shape
    if n_el != cfg.m_y * cfg.m_z:
        raise ValueError(f"batch has {n_el} rows, config expects {cfg.m_y}x{cfg.m_z}")
    if n_t < 1:
        raise ValueError("need at least one snapshot")
    grid = x.reshape(cfg.m_y, cfg.m_z, n_t)
    L = cfg.l_micro
    rf = np.zeros((L, L), dtype=complex)
    for sy in range(cfg.m_y - cfg.q_y + 1):
        for sz in range(cfg.m_z - cfg.q_z + 1):
            xm = grid[sy : sy + cfg.q_y, sz : sz + cfg.q_z, :].reshape(L, n_t)
            rf += xm @ xm.conj().T
    # J conj(R) J == reversing both axes of conj(R)
    r = (rf + rf.conj()[::-1, ::-1]) / (2.0 * n_t * cfg.n_micro)
    r = 0.5 * (r + r.conj().T)
    return CorrelationMatrix(r_hat=r, phase_index=batch.phase_index)


def signal_noise_subspaces(r: CorrelationMatrix, n_sources: int = N_SOURCES) -> SubspacePair:
    """Split the covariance eigenvectors into signal (largest ``n_sources``) and noise parts."""
    m = r.r_hat
    if not np.all(np.isfinite(m)):
        raise SensingError("eigendecomposition", "non-finite covariance entries")
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    return SubspacePair(u_s=v[:, :n_sources], u_n=v[:, n_sources:], eigenvalues=w)


def _selection(cfg: MicroSurfaceConfig, axis: str) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(cfg.l_micro).reshape(cfg.q_y, cfg.q_z)
    if axis == "y":
        if cfg.q_y < 2:
            raise ValueError("axis y needs q_y >= 2")
        return idx[:-1, :].ravel(), idx[1:, :].ravel()
    if axis == "z":
        if cfg.q_z < 2:
            raise ValueError("axis z needs q_z >= 2")
        return idx[:, :-1].ravel(), idx[:, 1:].ravel()
    raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")


def esprit_axis(sub: SubspacePair, cfg: MicroSurfaceConfig, axis: str) -> np.ndarray:
    """TLS-ESPRIT estimates of the two effective angles along ``axis``.

    Raises:
        SensingError: if the TLS partition ``V22`` is singular.
    """
    j1, j2 = _selection(cfg, axis)
    us = sub.u_s
    d = us.shape[1]
    exy = np.hstack([us[j1], us[j2]])
    w, v = np.linalg.eigh(exy.conj().T @ exy)
    v = v[:, np.argsort(w)[::-1]]
    v12 = v[:d, d:]
    v22 = v[d:, d:]
    s = np.linalg.svd(v22, compute_uv=False)
    if s[-1] < 1e-12 * max(s[0], 1e-300) or s[-1] < 1e-14:
        raise SensingError("esprit", "TLS degenerate (singular V22)")
    phi = -v12 @ np.linalg.inv(v22)
    return np.angle(np.linalg.eigvals(phi))


def music_residual(u: float, v: float, u_n: np.ndarray, cfg: MicroSurfaceConfig) -> float:
    b = ura_steering(u, v, cfg.micro_geometry)
    f = b.conj() @ u_n
    return float(np.real(f @ f.conj()))


def music_pair(u_cand, v_cand, sub: SubspacePair, cfg: MicroSurfaceConfig) -> tuple[AoaPair, AoaPair]:
    """Pair y-axis and z-axis estimates by the smaller total MUSIC residual.

    Only the two bijective pairings are considered; ties keep the identity
    order.
    """
    u1, u2 = (float(a) for a in u_cand)
    v1, v2 = (float(a) for a in v_cand)
    f = np.array([[music_residual(u, v, sub.u_n, cfg) for v in (v1, v2)] for u in (u1, u2)])
    ident, swap = f[0, 0] + f[1, 1], f[0, 1] + f[1, 0]
    tie = abs(ident - swap) <= 1e-9 * max(1.0, abs(ident), abs(swap))
    if tie or ident <= swap:
        return (AoaPair(EffectiveAnglePair(u1, v1), f[0, 0]), AoaPair(EffectiveAnglePair(u2, v2), f[1, 1]))
    return (AoaPair(EffectiveAnglePair(u1, v2), f[0, 1]), AoaPair(EffectiveAnglePair(u2, v1), f[1, 0]))


def angle_pair_distance(a: EffectiveAnglePair, b: EffectiveAnglePair) -> float:
    """Euclidean distance in ``(u, v)`` with each coordinate wrapped to ``(-pi, pi]``."""
    du = wrap_angle(a.u - b.u)
    dv = wrap_angle(a.v - b.v)
    return math.hypot(du, dv)


def disambiguate(pairs, sub_pos: Vec3, ris_pos: Vec3, spacing: float = 0.5) -> AoaPair:
    """Drop the candidate closest to the known reflecting-surface direction."""
    known = effective_angles_between(sub_pos, ris_pos, spacing)
    d0 = angle_pair_distance(pairs[0].angles, known)
    d1 = angle_pair_distance(pairs[1].angles, known)
    if abs(d0 - d1) <= 1e-12:
        warnings.warn("both AoA candidates are equidistant from the relayed path", DegenerateGeometryWarning, stacklevel=2)
        return pairs[0]
    return pairs[1] if d0 < d1 else pairs[0]


def ray_direction(pair: AoaPair, spacing: float = 0.5) -> np.ndarray:
    """Unit direction into the ``x > 0`` half-space encoded by an effective-angle pair."""
    scale = 2.0 * math.pi * spacing
    cy, cz = pair.u / scale, pair.v / scale
    s = cy * cy + cz * cz
    if s > 1.0 + 1e-6:
        raise SensingError("triangulation", f"non-physical angles (cos^2 sum {s:.6g} > 1)")
    if s > 1.0:
        r = math.sqrt(s)
        cy, cz, s = cy / r, cz / r, 1.0
    return np.array([math.sqrt(max(0.0, 1.0 - s)), cy, cz])


def closest_point_between_lines(p1, d1, p2, d2) -> np.ndarray:
    """Midpoint of the common perpendicular of two lines ``p + t d``."""
    d1 = d1 / np.linalg.norm(d1)
    d2 = d2 / np.linalg.norm(d2)
    if np.linalg.norm(np.cross(d1, d2)) < 1e-9:
        raise SensingError("triangulation", "rays parallel")
    a = np.column_stack([d1, -d2])
    t, *_ = np.linalg.lstsq(a, p2 - p1, rcond=None)
    return 0.5 * ((p1 + t[0] * d1) + (p2 + t[1] * d2))


def triangulate(pair2: AoaPair, q2: Vec3, pair3: AoaPair, q3: Vec3, phase_index: int = 1, spacing: float = 0.5) -> LocationEstimate:
    """Least-squares intersection of the two direct-path rays."""
    p = closest_point_between_lines(q2.as_array(), ray_direction(pair2, spacing), q3.as_array(), ray_direction(pair3, spacing))
    return LocationEstimate(position=Vec3.from_array(p), aoa_pairs=(pair2, pair3), phase_index=phase_index)


def estimate_direct_aoa(batch: SnapshotBatch, cfg: MicroSurfaceConfig, sub_pos: Vec3, ris_pos: Vec3, spacing: float = 0.5) -> AoaPair:
    """Direct-path AoA pair at one sensing sub-surface (Algorithm steps 1-6)."""
    try:
        r = fbss_covariance(batch, cfg)
    except ValueError as e:
        raise SensingError("fbss", str(e)) from e
    sub = signal_noise_subspaces(r)
    u_c = esprit_axis(sub, cfg, "y")
    v_c = esprit_axis(sub, cfg, "z")
    pairs = music_pair(u_c, v_c, sub, cfg)
    return disambiguate(pairs, sub_pos, ris_pos, spacing)


def sense_location(batches, cfg: MicroSurfaceConfig, dep: Deployment, phase_index: int = 1) -> LocationEstimate:
    """Full localization from the snapshots of sub-surfaces 2 and 3.

    Raises:
        SensingError: carrying the failing stage.
    """
    b2, b3 = batches
    if b2.phase_index != b3.phase_index:
        raise ValueError("batches must come from the same phase")
    spacing = dep.sensing.spacing
    pairs = [
        estimate_direct_aoa(b, cfg, q, dep.ris_pos, spacing)
        for b, q in zip((b2, b3), dep.sensing_pos)
    ]
    return triangulate(pairs[0], dep.sensing_pos[0], pairs[1], dep.sensing_pos[1], phase_index, spacing)
