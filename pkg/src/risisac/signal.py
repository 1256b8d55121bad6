"""Received-signal synthesis, ECSI acquisition and SNR/rate metrics.

Powers (``rho``, ``sigma0_sq``) are linear watts throughout; conversion from
dBm happens only in :mod:`risisac.harness`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from risisac.channel import ChannelSet


@dataclass(frozen=True)
class BeamformerSet:
    """BS combiner, reflecting-surface phase vector and UE precoder of one phase."""

    w_bs: np.ndarray
    xi: np.ndarray
    w_ue: np.ndarray

    def check(self, tol: float = 1e-9) -> None:
        if abs(np.linalg.norm(self.w_bs) - 1.0) > tol or abs(np.linalg.norm(self.w_ue) - 1.0) > tol:
            raise ValueError("w_bs and w_ue must have unit norm")
        if np.max(np.abs(np.abs(self.xi) - 1.0)) > 1e-9:
            raise ValueError("xi must be unimodular")


@dataclass(frozen=True)
class SnapshotBatch:
    """Samples received at one sensing sub-surface, one column per slot."""

    samples: np.ndarray
    phase_index: int
    noise_power: float

    @property
    def n_slots(self) -> int:
        return self.samples.shape[1]

    def concat(self, other: SnapshotBatch) -> SnapshotBatch:
        """Pool two batches (e.g. phase 1 and phase 2); tagged with the later phase."""
        return SnapshotBatch(
            samples=np.hstack([self.samples, other.samples]),
            phase_index=max(self.phase_index, other.phase_index),
            noise_power=self.noise_power,
        )


@dataclass(frozen=True)
class EcsiEstimate:
    h_eff: np.ndarray
    method: str


def effective_channel(ch: ChannelSet, xi: np.ndarray) -> np.ndarray:
    """Cascaded UE-RIS-BS channel ``H_r2b diag(xi) H_u2r1`` (N_BS x N_UE)."""
    return ch.r2b.matrix @ (xi[:, None] * ch.u2r[0].matrix)


def draw_symbols(n_slots: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus data symbols with uniform random phase."""
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n_slots))


def cn_noise(shape, sigma0_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Circularly-symmetric complex Gaussian noise of variance ``sigma0_sq``."""
    if sigma0_sq == 0.0:
        return np.zeros(shape, dtype=complex)
    scale = np.sqrt(sigma0_sq / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _check_dims(ch: ChannelSet, bf: BeamformerSet) -> None:
    if bf.w_ue.shape != (ch.n_ue,):
        raise ValueError(f"w_ue has shape {bf.w_ue.shape}, expected ({ch.n_ue},)")
    if bf.xi.shape != (ch.m1,):
        raise ValueError(f"xi has shape {bf.xi.shape}, expected ({ch.m1},)")
    if bf.w_bs.shape != (ch.n_bs,):
        raise ValueError(f"w_bs has shape {bf.w_bs.shape}, expected ({ch.n_bs},)")


def sensing_signatures(ch: ChannelSet, bf: BeamformerSet) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free per-symbol received vector at sub-surfaces 2 and 3 (without sqrt(rho))."""
    _check_dims(ch, bf)
    reflected = bf.xi * (ch.u2r[0].matrix @ bf.w_ue)
    return tuple(ch.u2r[i + 1].matrix @ bf.w_ue + ch.r2r[i].matrix @ reflected for i in range(2))


def synthesize_sensing_snapshots(
    ch: ChannelSet,
    bf: BeamformerSet,
    rho: float,
    sigma0_sq: float,
    n_slots: int,
    rng: np.random.Generator,
    phase_index: int = 1,
    symbols: np.ndarray | None = None,
) -> tuple[SnapshotBatch, SnapshotBatch]:
    """Snapshots received at sensing sub-surfaces 2 and 3 over ``n_slots`` slots.

    Both sub-surfaces observe the same symbol stream; noise is independent.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    if symbols is None:
        symbols = draw_symbols(n_slots, rng)
    elif symbols.shape != (n_slots,):
        raise ValueError("symbols length must equal n_slots")
    out = []
    for sig in sensing_signatures(ch, bf):
        x = np.sqrt(rho) * np.outer(sig, symbols) + cn_noise((sig.size, n_slots), sigma0_sq, rng)
        out.append(SnapshotBatch(samples=x, phase_index=phase_index, noise_power=sigma0_sq))
    return tuple(out)


def synthesize_bs_signal(
    ch: ChannelSet,
    bf: BeamformerSet,
    rho: float,
    sigma0_sq: float,
    n_slots: int,
    rng: np.random.Generator,
    symbols: np.ndarray | None = None,
) -> np.ndarray:
    """Combined BS output ``y(t)`` for ``n_slots`` slots."""
    _check_dims(ch, bf)
    if symbols is None:
        symbols = draw_symbols(n_slots, rng)
    g = bf.w_bs.conj() @ effective_channel(ch, bf.xi) @ bf.w_ue
    noise = cn_noise((ch.n_bs, n_slots), sigma0_sq, rng)
    return np.sqrt(rho) * g * symbols + bf.w_bs.conj() @ noise


def estimate_ecsi(
    ch: ChannelSet,
    xi: np.ndarray,
    rho: float,
    sigma0_sq: float,
    delta_tau1: int,
    rng: np.random.Generator,
    method: str = "perfect",
) -> EcsiEstimate:
    """Acquire the effective UE-BS channel for a fixed ``xi``.

    ``ls_pilot`` sends the columns of a unitary DFT matrix, repeated
    ``delta_tau1 // n_ue`` times, and forms the least-squares estimate at all
    BS antennas.
    """
    h = effective_channel(ch, xi)
    if method == "perfect":
        return EcsiEstimate(h_eff=h, method=method)
    if method != "ls_pilot":
        raise ValueError(f"unknown ECSI method {method!r}")
    n_ue = ch.n_ue
    if delta_tau1 < n_ue:
        raise ValueError(f"insufficient pilots: delta_tau1={delta_tau1} < N_UE={n_ue}")
    reps = delta_tau1 // n_ue
    pilots = np.fft.fft(np.eye(n_ue)) / np.sqrt(n_ue)
    acc = np.zeros_like(h)
    for _ in range(reps):
        y = np.sqrt(rho) * h @ pilots + cn_noise(h.shape, sigma0_sq, rng)
        acc += y @ pilots.conj().T
    return EcsiEstimate(h_eff=acc / (reps * np.sqrt(rho)), method=method)


def snr_com(ch: ChannelSet, bf: BeamformerSet, rho: float, sigma0_sq: float) -> float:
    """Post-combining SNR at the BS."""
    _check_dims(ch, bf)
    g = bf.w_bs.conj() @ effective_channel(ch, bf.xi) @ bf.w_ue
    return float(rho / sigma0_sq * abs(g) ** 2)


def snr_sen(ch: ChannelSet, bf: BeamformerSet, rho: float, sigma0_sq: float) -> tuple[float, tuple[float, float]]:
    """Direct-link sensing SNR: total and per sensing sub-surface."""
    per = tuple(float(rho / sigma0_sq * np.linalg.norm(ch.u2r[i].matrix @ bf.w_ue) ** 2) for i in (1, 2))
    return per[0] + per[1], per


def rate(snr: float) -> float:
    """Achievable rate ``log2(1 + snr)`` in bps/Hz."""
    if snr < 0:
        raise ValueError("snr must be nonnegative")
    return float(np.log2(1.0 + snr))


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)
