"""Path loss, random complex gains and rank-1 LoS channel matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from risisac.geometry import (
    EffectiveAnglePair,
    UlaGeometry,
    UraGeometry,
    Vec3,
    effective_angles_between,
    ula_steering,
    ura_steering,
)

REFERENCE_DISTANCE = 1.0


@dataclass(frozen=True)
class PathlossModel:
    """Log-distance path loss with a 1 m reference distance.

    Attributes:
        pl0_db: Loss at the reference distance, in dB.
        exp_r2b: Exponent of the reflecting-surface to BS link.
        exp_u2r: Exponent of the UE to sub-surface links.
        exp_r2r: Exponent of the sub-surface to sub-surface links.
    """

    pl0_db: float = 30.0
    exp_r2b: float = 2.3
    exp_u2r: float = 2.2
    exp_r2r: float = 2.1

    def __post_init__(self):
        if self.pl0_db <= 0:
            raise ValueError("pl0_db must be positive")
        for e in (self.exp_r2b, self.exp_u2r, self.exp_r2r):
            if not 1.5 <= e <= 4.0:
                raise ValueError(f"path loss exponent {e} outside [1.5, 4]")


@dataclass(frozen=True)
class LosChannel:
    """A rank-1 LoS channel ``gain * rx_steer @ tx_steer^H``.

    ``rx_angles``/``tx_angles`` hold an :class:`EffectiveAnglePair` for a
    URA end and a plain float for a ULA end.
    """

    matrix: np.ndarray
    gain: complex
    rx_angles: EffectiveAnglePair | float
    tx_angles: EffectiveAnglePair | float

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def linear_path_gain(d: float, exponent: float, model: PathlossModel) -> float:
    """Linear power gain ``10^(-pl0/10) * d^(-exponent)`` for ``d >= 1`` m."""
    if d < REFERENCE_DISTANCE:
        raise ValueError(f"inside reference distance: d={d} m < 1 m")
    return 10.0 ** (-model.pl0_db / 10.0) * d ** (-exponent)


def draw_gain(d: float, exponent: float, model: PathlossModel, rng: np.random.Generator) -> complex:
    """Complex gain with path-loss modulus and a uniform random phase."""
    mag = np.sqrt(linear_path_gain(d, exponent, model))
    return complex(mag * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)))


def _steer(geom, angles):
    if isinstance(geom, UraGeometry):
        return ura_steering(angles.u, angles.v, geom)
    return ula_steering(angles.u, geom.n_elements)


def build_link(rx_geom, tx_geom, rx_pos: Vec3, tx_pos: Vec3, gain: complex) -> LosChannel:
    """Generic LoS link: AoA seen from ``rx_pos``, AoD seen from ``tx_pos``."""
    arr = effective_angles_between(rx_pos, tx_pos, rx_geom.spacing)
    dep = effective_angles_between(tx_pos, rx_pos, tx_geom.spacing)
    h = gain * np.outer(_steer(rx_geom, arr), _steer(tx_geom, dep).conj())
    return LosChannel(
        matrix=h,
        gain=complex(gain),
        rx_angles=arr if isinstance(rx_geom, UraGeometry) else arr.u,
        tx_angles=dep if isinstance(tx_geom, UraGeometry) else dep.u,
    )


def build_u2r(ue_geom: UlaGeometry, sub_geom: UraGeometry, ue_pos: Vec3, sub_pos: Vec3, gain: complex) -> LosChannel:
    """UE to sub-surface channel, shape ``(m_y*m_z, n_ue)``."""
    return build_link(sub_geom, ue_geom, sub_pos, ue_pos, gain)


def build_r2b(bs_geom: UlaGeometry, ris_geom: UraGeometry, bs_pos: Vec3, ris_pos: Vec3, gain: complex) -> LosChannel:
    """Reflecting sub-surface to BS channel, shape ``(n_bs, m_1)``."""
    return build_link(bs_geom, ris_geom, bs_pos, ris_pos, gain)


def build_r2r(ris_geom: UraGeometry, sub_geom: UraGeometry, ris_pos: Vec3, sub_pos: Vec3, gain: complex) -> LosChannel:
    """Reflecting sub-surface to sensing sub-surface channel, shape ``(m_s, m_1)``."""
    return build_link(sub_geom, ris_geom, sub_pos, ris_pos, gain)


@dataclass(frozen=True)
class Deployment:
    """Fixed infrastructure: BS, reflecting sub-surface and the two sensing sub-surfaces.

    ``sensing_pos`` holds the positions of sub-surfaces 2 and 3 in that order.
    """

    bs_pos: Vec3
    ris_pos: Vec3
    sensing_pos: tuple[Vec3, Vec3]
    bs: UlaGeometry
    ue: UlaGeometry
    ris: UraGeometry
    sensing: UraGeometry
    pathloss: PathlossModel = PathlossModel()


@dataclass(frozen=True)
class ChannelSet:
    """All LoS channels of one coherence block.

    ``u2r`` is indexed 0..2 for sub-surfaces 1..3, ``r2r`` 0..1 for 2..3.
    """

    u2r: tuple[LosChannel, LosChannel, LosChannel]
    r2b: LosChannel
    r2r: tuple[LosChannel, LosChannel]

    @property
    def n_bs(self) -> int:
        return self.r2b.shape[0]

    @property
    def n_ue(self) -> int:
        return self.u2r[0].shape[1]

    @property
    def m1(self) -> int:
        return self.r2b.shape[1]

    @property
    def alpha_com(self) -> complex:
        return self.r2b.gain * self.u2r[0].gain


def draw_channels(dep: Deployment, ue_pos: Vec3, rng: np.random.Generator) -> ChannelSet:
    """Draw one block of channels for a UE at ``ue_pos``."""
    pl = dep.pathloss
    g_r2b = draw_gain(dep.bs_pos.distance_to(dep.ris_pos), pl.exp_r2b, pl, rng)
    r2b = build_r2b(dep.bs, dep.ris, dep.bs_pos, dep.ris_pos, g_r2b)
    u2r = []
    for pos, geom in ((dep.ris_pos, dep.ris), (dep.sensing_pos[0], dep.sensing), (dep.sensing_pos[1], dep.sensing)):
        g = draw_gain(ue_pos.distance_to(pos), pl.exp_u2r, pl, rng)
        u2r.append(build_u2r(dep.ue, geom, ue_pos, pos, g))
    r2r = []
    for pos in dep.sensing_pos:
        # closely spaced co-planar panels sit inside the far-field reference distance
        d = max(dep.ris_pos.distance_to(pos), REFERENCE_DISTANCE)
        g = draw_gain(d, pl.exp_r2r, pl, rng)
        r2r.append(build_r2r(dep.ris, dep.sensing, dep.ris_pos, pos, g))
    return ChannelSet(u2r=tuple(u2r), r2b=r2b, r2r=tuple(r2r))
