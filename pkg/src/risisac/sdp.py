"""Small dense complex SDP solver.

Solves::

    maximize    tr(A0 W)
    subject to  lower_k <= tr(A_k W) <= upper_k
                tr(W) = trace,  W >= 0 (Hermitian PSD)

with a log-barrier path-following interior-point method. Before solving, W
is restricted to the span of the columns of all data matrices. Directions
orthogonal to that span change neither the objective nor the constraints,
they only absorb trace, so the reduced problem uses ``tr(X) <= trace``
whenever the span is a proper subspace and the two problems have the same
optimal value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

GAP_TOL = 1e-9
MAX_OUTER = 40


class SdpInfeasibleError(ValueError):
    pass


@dataclass
class SdpSolution:
    """Solver output.

    Attributes:
        matrix: Optimal W in the full space, trace equal to ``trace``.
        objective: ``tr(A0 W)``.
        reduced: Optimal X in reduced coordinates (``W = Q X Q^H + slack``).
        basis: Orthonormal basis Q of the reduced space.
        gap: Duality-gap bound at termination.
    """

    matrix: np.ndarray
    objective: float
    reduced: np.ndarray
    basis: np.ndarray
    gap: float
    newton_steps: int

    @property
    def in_span(self) -> np.ndarray:
        """The part of W inside the reduced space."""
        return self.basis @ self.reduced @ self.basis.conj().T


def hermitian_basis(r: int) -> np.ndarray:
    """Orthonormal (real inner product) basis of r x r Hermitian matrices, shape (r*r, r, r)."""
    out = []
    for i in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[i, i] = 1.0
        out.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(r):
        for j in range(i + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[i, j] = e[j, i] = s
            out.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[i, j], e[j, i] = -1j * s, 1j * s
            out.append(e)
    return np.array(out)


def span_basis(mats, n: int, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the joint column space of Hermitian matrices."""
    stacked = np.hstack([np.asarray(m) for m in mats]) if mats else np.zeros((n, 0))
    if stacked.size == 0 or not np.any(stacked):
        return np.eye(n, 1, dtype=complex)
    q = scipy.linalg.orth(stacked, rcond=rtol)
    return q.astype(complex)


class _Barrier:
    """Log-barrier for X(x) >= 0 plus affine slacks ``H x - b > 0``."""

    def __init__(self, basis, h, b):
        self.E = basis
        self.h = h
        self.b = b

    def matrix(self, x):
        return np.tensordot(x[: len(self.E)], self.E, axes=1)

    def slacks(self, x):
        return self.h @ x - self.b

    def feasible(self, x):
        if self.h.shape[0] and np.any(self.slacks(x) <= 0):
            return False
        try:
            np.linalg.cholesky(self.matrix(x))
        except np.linalg.LinAlgError:
            return False
        return True

    def value(self, x):
        L = np.linalg.cholesky(self.matrix(x))
        v = -2.0 * np.sum(np.log(np.real(np.diag(L))))
        if self.h.shape[0]:
            v -= np.sum(np.log(self.slacks(x)))
        return v

    def grad_hess(self, x):
        n = len(x)
        k = len(self.E)
        Xi = np.linalg.inv(self.matrix(x))
        Xi = 0.5 * (Xi + Xi.conj().T)
        M = np.einsum("ab,kbc->kac", Xi, self.E)  # X^-1 E_k
        g = np.zeros(n)
        H = np.zeros((n, n))
        g[:k] = -np.real(np.einsum("kaa->k", M))
        H[:k, :k] = np.real(np.einsum("iab,jba->ij", M, M))
        if self.h.shape[0]:
            s = self.slacks(x)
            g -= self.h.T @ (1.0 / s)
            H += (self.h.T / s**2) @ self.h
        return g, H


def _center(bar: _Barrier, c, a_eq, b_eq, x, tau, max_iter=200, stop=None):
    """Newton's method for min  -tau c.x + phi(x)  s.t. a_eq x = b_eq."""
    steps = 0
    null = None
    for _ in range(max_iter):
        g, H = bar.grad_hess(x)
        g = g - tau * c
        if a_eq is not None:
            # eliminate the equality on its null space; better conditioned than the KKT form
            if null is None:
                null = scipy.linalg.null_space(a_eq[None, :])
            xp = a_eq * ((b_eq - a_eq @ x) / (a_eq @ a_eq))
            hz = null.T @ H @ null
            rz = -null.T @ (g + H @ xp)
        else:
            null, xp, hz, rz = None, 0.0, H, -g
        try:
            dz = np.linalg.solve(hz, rz)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(hz, rz, rcond=None)[0]
        dx = xp + (dz if a_eq is None else null @ dz)
        dec = float(dx @ H @ dx)
        if dec / 2.0 < 1e-12:
            break
        f0 = -tau * (c @ x) + bar.value(x)
        slope = g @ dx
        t = 1.0
        while t > 1e-14:
            xn = x + t * dx
            if bar.feasible(xn) and -tau * (c @ xn) + bar.value(xn) <= f0 + 0.25 * t * slope:
                break
            t *= 0.5
        else:
            break
        f1 = -tau * (c @ xn) + bar.value(xn)
        x = xn
        steps += 1
        # stalled at floating-point resolution
        if f0 - f1 <= 1e-13 * max(1.0, abs(f0)):
            break
        if stop is not None and stop(x):
            break
    return x, steps


def _barrier_solve(basis, c, h, b, a_eq, b_eq, x0, gap_tol, stop=None):
    bar = _Barrier(basis, h, b)
    nu = basis.shape[1] + h.shape[0]
    x = x0
    tau = 1.0
    steps = 0
    for _ in range(MAX_OUTER):
        x, k = _center(bar, c, a_eq, b_eq, x, tau, stop=stop)
        steps += k
        if stop is not None and stop(x):
            return x, nu / tau, steps
        if nu / tau < gap_tol(x):
            return x, nu / tau, steps
        tau *= 20.0
    return x, nu / tau, steps


def sdp_solve_small(objective, constraints=(), trace: float = 1.0, reduce: bool = True, gap_tol: float = GAP_TOL) -> SdpSolution:
    """Maximize ``tr(objective W)`` over trace-normalized PSD ``W`` with interval constraints.

    Args:
        objective: Hermitian N x N matrix A0.
        constraints: Iterable of ``(A_k, lower_k, upper_k)``; bounds may be
            ``None`` or infinite.
        trace: Required ``tr(W)``.
        reduce: Restrict to the joint column space of the data first.
        gap_tol: Relative duality-gap target.

    Raises:
        SdpInfeasibleError: when no strictly feasible point exists.
    """
    A0 = np.asarray(objective, dtype=complex)
    n_full = A0.shape[0]
    if trace <= 0:
        raise ValueError("trace must be positive")
    cons = [(np.asarray(a, dtype=complex), lo, hi) for a, lo, hi in constraints]
    mats = [A0] + [a for a, _, _ in cons]
    Q = span_basis(mats, n_full) if reduce else np.eye(n_full, dtype=complex)
    r = Q.shape[1]
    trace_le = r < n_full

    E = hermitian_basis(r)
    nvar = len(E)

    def coeffs(a):
        ar = Q.conj().T @ a @ Q
        return np.real(np.einsum("ab,kba->k", ar, E))

    c = coeffs(A0)
    e_tr = np.real(np.einsum("kaa->k", E))
    rows, rhs = [], []
    for a, lo, hi in cons:
        ak = coeffs(a)
        if lo is not None and np.isfinite(lo):
            rows.append(ak)
            rhs.append(lo)
        if hi is not None and np.isfinite(hi):
            rows.append(-ak)
            rhs.append(-hi)
    n_lin = len(rows)
    if trace_le:
        rows.append(-e_tr)
        rhs.append(-trace)
    h = np.array(rows).reshape(-1, nvar)
    b = np.array(rhs, dtype=float)
    a_eq = None if trace_le else e_tr
    b_eq = None if trace_le else trace

    # start at a scaled identity
    x0 = np.zeros(nvar)
    x0[:r] = trace / (r + 1 if trace_le else r)

    if n_lin and np.any(h[:n_lin] @ x0 - b[:n_lin] <= 0):
        x0 = _phase_one(E, h, b, n_lin, a_eq, b_eq, x0)

    x, gap, steps = _barrier_solve(
        E, c, h, b, a_eq, b_eq, x0, lambda x: gap_tol * max(1.0, abs(c @ x))
    )
    X = np.tensordot(x, E, axes=1)
    X = 0.5 * (X + X.conj().T)
    W = Q @ X @ Q.conj().T
    slack = trace - np.real(np.trace(X))
    if r < n_full and slack > 0:
        P = np.eye(n_full) - Q @ Q.conj().T
        W = W + slack * P / (n_full - r)
    return SdpSolution(
        matrix=W, objective=float(np.real(np.trace(A0 @ W))), reduced=X, basis=Q, gap=gap, newton_steps=steps
    )


def _phase_one(E, h, b, n_lin, a_eq, b_eq, x0):
    """Find a strictly feasible point by minimizing a common slack relaxation ``s``."""
    nvar = len(E)
    viol = h[:n_lin] @ x0 - b[:n_lin]
    s0 = max(0.0, -viol.min()) + 1.0
    h1 = np.zeros((h.shape[0], nvar + 1))
    h1[:, :nvar] = h
    h1[:n_lin, nvar] = 1.0
    c1 = np.zeros(nvar + 1)
    c1[nvar] = -1.0
    a1 = None if a_eq is None else np.concatenate([a_eq, [0.0]])
    z0 = np.concatenate([x0, [s0]])

    def done(z):
        return z[nvar] < -1e-9

    z, _, _ = _barrier_solve(E, c1, h1, b, a1, b_eq, z0, lambda z: 1e-10, stop=done)
    if not done(z):
        raise SdpInfeasibleError("infeasible balance constraint: no strictly feasible point")
    return z[:nvar]

