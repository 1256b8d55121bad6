"""Phase-1 and phase-2 beamformer design.

Phase 1 uses MRT-MRC on the estimated effective channel. Phase 2 fixes the
BS combiner and reflecting-surface phases in closed form from the sensed UE
location, then designs the UE precoder by one of two optimizers of the same
QCQP: an SDP relaxation with randomized rounding (``s_sdr``) and a particle
swarm over three steered-beam weights (``s_mbs``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from risisac.channel import Deployment, linear_path_gain
from risisac.geometry import Vec3, effective_angles_between, ue_effective_aod, ula_steering, ura_steering
from risisac.sdp import hermitian_basis, sdp_solve_small
from risisac.sensing import LocationEstimate
from risisac.signal import BeamformerSet, EcsiEstimate

# epsilon_1 as a fraction of N_UE when no explicit SNR-difference threshold is given
DEFAULT_EPS1_FRACTION = 0.05
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class TradeoffConfig:
    """Weights and derived constants of the phase-2 UE precoder problem.

    ``epsilon`` is the SNR-difference threshold (linear SNR units);
    ``epsilon1`` is its normalized version used in the constraint
    ``0 <= F2 - kappa F3 <= epsilon1``.
    """

    rho_tradeoff: float
    epsilon: float
    zeta_s: float
    zeta_c: float
    kappa: float
    epsilon1: float
    eta2: float
    eta3: float

    def __post_init__(self):
        if not 0.0 <= self.rho_tradeoff <= 1.0:
            raise ValueError("rho_tradeoff must lie in [0, 1]")
        if self.kappa <= 0 or self.epsilon1 <= 0 or self.epsilon <= 0:
            raise ValueError("kappa, epsilon and epsilon1 must be positive")

    @classmethod
    def from_gains(
        cls,
        rho_tradeoff: float,
        alpha_sq: tuple[float, float, float],
        alpha_r2b_sq: float,
        m_s: int,
        gamma: float,
        n_ue: int,
        epsilon: float | None = None,
        rho: float = 1.0,
        sigma0_sq: float = 1.0,
    ) -> TradeoffConfig:
        """Derive kappa, epsilon1 and eta from squared gain magnitudes.

        ``alpha_sq`` holds ``|alpha_U2R,i|^2`` for sub-surfaces 1..3. With
        ``epsilon=None`` the threshold is chosen so that
        ``epsilon1 = 0.05 * n_ue``.
        """
        a1, a2, a3 = alpha_sq
        if min(a2, a3) <= 0:
            raise ValueError("sensing gains must be positive")
        scale = a2 * m_s * rho / sigma0_sq
        if epsilon is None:
            eps1 = DEFAULT_EPS1_FRACTION * n_ue
            epsilon = eps1 * scale
        else:
            if epsilon <= 0:
                raise ValueError("epsilon must be positive")
            eps1 = epsilon / scale
        return cls(
            rho_tradeoff=float(rho_tradeoff),
            epsilon=float(epsilon),
            zeta_s=0.5 * (a2 + a3) * m_s,
            zeta_c=alpha_r2b_sq * a1 * gamma**2,
            kappa=a3 / a2,
            epsilon1=float(eps1),
            eta2=2.0 * a2 / (a2 + a3),
            eta3=2.0 * a3 / (a2 + a3),
        )


@dataclass(frozen=True)
class QcqpProblem:
    """``max w^H P w`` s.t. ``0 <= w^H P_kappa w <= epsilon1``, ``||w|| = 1``.

    ``steering`` stacks ``c_1, c_2, c_3`` as rows.
    """

    steering: np.ndarray
    cfg: TradeoffConfig

    @property
    def n_ue(self) -> int:
        return self.steering.shape[1]

    @property
    def p(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.outer(c, c.conj()) for c in self.steering)

    @property
    def p_kappa(self) -> np.ndarray:
        _, p2, p3 = self.p
        return p2 - self.cfg.kappa * p3

    @property
    def objective_matrix(self) -> np.ndarray:
        p1, p2, p3 = self.p
        r = self.cfg.rho_tradeoff
        return r * (self.cfg.eta2 * p2 + self.cfg.eta3 * p3) + (1.0 - r) * p1

    def beam_gains(self, w) -> np.ndarray:
        """``F_i = |c_i^H w|^2`` for each row of ``w`` (or a single vector)."""
        w = np.asarray(w)
        proj = w @ self.steering.conj().T if w.ndim == 2 else self.steering.conj() @ w
        return np.abs(proj) ** 2

    def objective(self, w) -> np.ndarray:
        f = self.beam_gains(w)
        r, c = self.cfg.rho_tradeoff, self.cfg
        return r * (c.eta2 * f[..., 1] + c.eta3 * f[..., 2]) + (1.0 - r) * f[..., 0]

    def balance(self, w) -> np.ndarray:
        """``F2 - kappa F3``."""
        f = self.beam_gains(w)
        return f[..., 1] - self.cfg.kappa * f[..., 2]

    def violation(self, w) -> np.ndarray:
        b = self.balance(w)
        return np.maximum(0.0, -b) + np.maximum(0.0, b - self.cfg.epsilon1)


@dataclass
class SdrDiagnostics:
    """Bookkeeping of one S-SDR run.

    ``rank1_gap`` is the share of the relaxed solution's trace outside its
    principal eigenvector (0 for an exactly rank-one solution).
    """

    sdp_objective: float
    chosen_objective: float
    n_feasible_samples: int
    rank1_gap: float
    source: str = "gaussian"


@dataclass(frozen=True)
class PsoConfig:
    n_particles: int = 50
    n_iters: int = 100
    c1: float = 0.72
    c2: float = 1.49
    c3: float = 1.49
    v_min: float = -0.2
    v_max: float = 0.2
    mu: float | None = None
    hinge_penalty: bool = False

    def __post_init__(self):
        if self.n_particles < 1 or self.n_iters < 1:
            raise ValueError("n_particles and n_iters must be >= 1")
        if not self.v_min < self.v_max:
            raise ValueError("v_min must be below v_max")


def mrt_mrc(ecsi: EcsiEstimate) -> tuple[np.ndarray, np.ndarray]:
    """Principal right singular direction as UE precoder, matched BS combiner."""
    h = np.asarray(ecsi.h_eff)
    if not np.all(np.isfinite(h)):
        raise ValueError("non-finite effective channel")
    scale = np.linalg.norm(h)
    if scale == 0.0:
        raise ValueError("null channel")
    hn = h / scale
    w, v = np.linalg.eigh(hn.conj().T @ hn)
    w_ue = v[:, -1]
    g = hn @ w_ue
    return w_ue, g / np.linalg.norm(g)


def _position(sensed) -> Vec3:
    return sensed.position if isinstance(sensed, LocationEstimate) else sensed


def closed_form_bs_ris(sensed, dep: Deployment) -> tuple[np.ndarray, np.ndarray]:
    """BS combiner aimed at the reflecting sub-surface and the co-phasing RIS vector.

    ``sensed`` is a :class:`LocationEstimate` or a plain :class:`Vec3`.
    """
    q = _position(sensed)
    if q.x <= dep.ris_pos.x:
        raise ValueError("sensed UE position lies behind the RIS plane")
    u_bs = effective_angles_between(dep.bs_pos, dep.ris_pos, dep.bs.spacing).u
    w_bs = ula_steering(u_bs, dep.bs.n_elements) / math.sqrt(dep.bs.n_elements)
    arr = effective_angles_between(dep.ris_pos, q, dep.ris.spacing)
    dep_ang = effective_angles_between(dep.ris_pos, dep.bs_pos, dep.ris.spacing)
    xi = ura_steering(arr.u, arr.v, dep.ris).conj() * ura_steering(dep_ang.u, dep_ang.v, dep.ris)
    return w_bs, xi


def ue_steering(ue_pos: Vec3, dep: Deployment) -> np.ndarray:
    """Rows ``c(u^D_i)`` towards sub-surfaces 1, 2, 3."""
    targets = (dep.ris_pos,) + tuple(dep.sensing_pos)
    n = dep.ue.n_elements
    return np.array([ula_steering(ue_effective_aod(ue_pos, t, dep.ue.spacing), n) for t in targets])


def build_qcqp(
    sensed,
    dep: Deployment,
    rho_tradeoff: float,
    epsilon: float | None = None,
    rho: float = 1.0,
    sigma0_sq: float = 1.0,
) -> tuple[QcqpProblem, TradeoffConfig]:
    """Assemble the UE-precoder QCQP from a sensed location.

    Gain magnitudes come from the path-loss model at sensed distances, since
    true gains are not available to the transmitter.
    """
    if not 0.0 <= rho_tradeoff <= 1.0:
        raise ValueError("rho_tradeoff must lie in [0, 1]")
    q = _position(sensed)
    targets = (dep.ris_pos,) + tuple(dep.sensing_pos)
    for t in targets:
        if q.distance_to(t) == 0.0:
            raise ValueError("degenerate direction: sensed position coincides with a sub-surface")
    pl = dep.pathloss
    alpha_sq = tuple(linear_path_gain(q.distance_to(t), pl.exp_u2r, pl) for t in targets)
    alpha_r2b_sq = linear_path_gain(dep.bs_pos.distance_to(dep.ris_pos), pl.exp_r2b, pl)
    gamma = math.sqrt(dep.bs.n_elements) * dep.ris.size
    cfg = TradeoffConfig.from_gains(
        rho_tradeoff, alpha_sq, alpha_r2b_sq, dep.sensing.size, gamma, dep.ue.n_elements, epsilon, rho, sigma0_sq
    )
    return QcqpProblem(steering=ue_steering(q, dep), cfg=cfg), cfg


def _purify(x: np.ndarray, mats, tol: float = 1e-7) -> np.ndarray:
    """Reduce the rank of PSD ``x`` while keeping ``tr(A x)`` fixed for each ``A`` in ``mats``.

    Each step moves along a Hermitian direction in the range of ``x`` that is
    invisible to every ``A`` until an eigenvalue hits zero. With at most
    three linear functionals this ends at rank one.
    """
    x = 0.5 * (x + x.conj().T)
    for _ in range(x.shape[0]):
        lam, u = np.linalg.eigh(x)
        keep = lam > tol * max(lam[-1], 1e-300)
        k = int(keep.sum())
        if k <= 1:
            break
        v = u[:, keep] * np.sqrt(lam[keep])
        basis = hermitian_basis(k)
        rows = np.array([[np.real(np.trace(v.conj().T @ a @ v @ e)) for e in basis] for a in mats])
        _, s, vt = np.linalg.svd(rows)
        if len(basis) <= len(mats) and s[-1] > 1e-10 * max(s[0], 1.0):
            break
        d = np.tensordot(vt[-1], basis, axes=1)
        mu = np.linalg.eigvalsh(d)
        if mu[-1] <= 0:
            d, mu = -d, -mu[::-1]
        step = np.eye(k) - d / mu[-1]
        x = v @ step @ v.conj().T
        x = 0.5 * (x + x.conj().T)
    return x


def _principal(x: np.ndarray) -> np.ndarray:
    lam, u = np.linalg.eigh(0.5 * (x + x.conj().T))
    return u[:, -1] * math.sqrt(max(lam[-1], 0.0))


def solve_sdr(q: QcqpProblem, l_gr: int, rng: np.random.Generator) -> tuple[np.ndarray, SdrDiagnostics]:
    """S-SDR: relaxed SDP, then Gaussian randomization.

    Besides the ``l_gr`` random draws, the principal eigenvector of the
    relaxed solution and a rank-one purification of it enter the candidate
    pool. Candidates are normalized, filtered by the balance constraint, and
    the best objective wins; if nothing is feasible the best penalized
    objective is used.

    Raises:
        SdpInfeasibleError: when the balance constraint admits no point.
    """
    if l_gr < 1:
        raise ValueError("l_gr must be >= 1")
    a0 = q.objective_matrix
    pk = q.p_kappa
    sol = sdp_solve_small(a0, [(pk, 0.0, q.cfg.epsilon1)], 1.0)
    W = 0.5 * (sol.matrix + sol.matrix.conj().T)
    lam, u = np.linalg.eigh(W)
    lam = np.clip(lam, 0.0, None)
    rank1_gap = float(1.0 - lam[-1] / lam.sum()) if lam.sum() > 0 else 0.0

    n = q.n_ue
    r = (rng.standard_normal((l_gr, n)) + 1j * rng.standard_normal((l_gr, n))) / math.sqrt(2.0)
    cands = r @ (u * np.sqrt(lam)).T
    Q = sol.basis
    pure = Q @ _principal(_purify(sol.reduced, [Q.conj().T @ m @ Q for m in (np.eye(n), pk, a0)]))
    extra = np.array([_principal(W), pure])
    cands = np.vstack([cands, extra])
    sources = ["gaussian"] * l_gr + ["principal", "purified"]

    norms = np.linalg.norm(cands, axis=1)
    ok = norms > 1e-300
    cands = cands[ok] / norms[ok, None]
    sources = [s for s, o in zip(sources, ok) if o]
    if len(cands) == 0:
        raise ValueError("degenerate relaxed solution")

    f = q.objective(cands)
    b = q.balance(cands)
    tol = FEAS_TOL * max(1.0, q.cfg.epsilon1)
    feasible = (b >= -tol) & (b <= q.cfg.epsilon1 + tol)
    n_feas_gr = int(feasible[: min(l_gr, len(feasible))].sum())
    if feasible.any():
        score = np.where(feasible, f, -np.inf)
    else:
        score = f - 2.0 * q.violation(cands)
    k = int(np.argmax(score))
    w = cands[k]
    diag = SdrDiagnostics(
        sdp_objective=sol.objective,
        chosen_objective=float(f[k]),
        n_feasible_samples=n_feas_gr,
        rank1_gap=rank1_gap,
        source=sources[k],
    )
    return w, diag


def mbs_beams(q: QcqpProblem) -> np.ndarray:
    """The three basic beams ``c_i / sqrt(N_UE)`` as rows."""
    return q.steering / math.sqrt(q.n_ue)


def _pso_fitness(q: QcqpProblem, psi: np.ndarray, mu: float, hinge: bool) -> np.ndarray:
    w = psi @ mbs_beams(q)
    nrm = np.linalg.norm(w, axis=1)
    fit = np.full(len(psi), -np.inf)
    ok = nrm > 1e-12
    if not ok.any():
        return fit
    w = w[ok] / nrm[ok, None]
    gap = np.abs(q.balance(w)) - q.cfg.epsilon1
    if hinge:
        gap = np.maximum(gap, 0.0)
    fit[ok] = q.objective(w) - mu * gap
    return fit


@dataclass
class PsoResult:
    w_ue: np.ndarray
    psi: np.ndarray
    trace: np.ndarray = field(repr=False)


def pso_search(q: QcqpProblem, cfg: PsoConfig, rng: np.random.Generator) -> PsoResult:
    """Particle swarm over the beam weights ``psi`` in ``[0, 1]^3``."""
    mu = 2.0 * q.cfg.rho_tradeoff if cfg.mu is None else cfg.mu
    n_p = cfg.n_particles
    psi = rng.uniform(0.0, 1.0, (n_p, 3))
    vel = rng.uniform(cfg.v_min, cfg.v_max, (n_p, 3))
    fit = _pso_fitness(q, psi, mu, cfg.hinge_penalty)
    pbest, pfit = psi.copy(), fit.copy()
    g = int(np.argmax(pfit))
    gbest, gfit = pbest[g].copy(), pfit[g]
    trace = [gfit]
    for _ in range(cfg.n_iters):
        chi2 = rng.uniform(0.0, 1.0, (n_p, 3))
        chi3 = rng.uniform(0.0, 1.0, (n_p, 3))
        vel = cfg.c1 * vel + cfg.c2 * chi2 * (gbest - psi) + cfg.c3 * chi3 * (pbest - psi)
        vel = np.clip(vel, cfg.v_min, cfg.v_max)
        psi = np.clip(psi + vel, 0.0, 1.0)
        fit = _pso_fitness(q, psi, mu, cfg.hinge_penalty)
        better = fit > pfit
        pbest[better], pfit[better] = psi[better], fit[better]
        g = int(np.argmax(pfit))
        if pfit[g] > gfit:
            gbest, gfit = pbest[g].copy(), pfit[g]
        trace.append(gfit)
    w = gbest @ mbs_beams(q)
    nrm = np.linalg.norm(w)
    if not np.any(gbest > 0) or nrm < 1e-12:
        raise ValueError("degenerate weights")
    return PsoResult(w_ue=w / nrm, psi=gbest, trace=np.array(trace))


def solve_mbs_pso(q: QcqpProblem, cfg: PsoConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """S-MBS precoder and the per-iteration best fitness."""
    res = pso_search(q, cfg, rng)
    return res.w_ue, res.trace


def oracle_baseline(true_ue_pos: Vec3, dep: Deployment) -> BeamformerSet:
    """Matched beams computed from the true UE position (perfect-CSI reference)."""
    w_bs, xi = closed_form_bs_ris(true_ue_pos, dep)
    n = dep.ue.n_elements
    w_ue = ula_steering(ue_effective_aod(true_ue_pos, dep.ris_pos, dep.ue.spacing), n) / math.sqrt(n)
    return BeamformerSet(w_bs=w_bs, xi=xi, w_ue=w_ue)


def beampattern(w_ue: np.ndarray, n_grid: int = 721) -> tuple[np.ndarray, np.ndarray]:
    """Array gain ``|c(u)^H w|^2`` on a uniform grid of ``u`` over ``[-pi, pi]``."""
    u = np.linspace(-math.pi, math.pi, n_grid)
    k = np.arange(len(w_ue))
    steer = np.exp(1j * np.outer(u, k))
    return u, np.abs(steer.conj() @ w_ue) ** 2
