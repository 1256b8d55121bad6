import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from risisac.sdp import SdpInfeasibleError, hermitian_basis, sdp_solve_small, span_basis


def rand_herm(rng, n, rank=None):
    a = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    return a @ a.conj().T if rank else 0.5 * (a + a.conj().T)


def assert_feasible(sol, cons, trace=1.0, tol=1e-8):
    w = sol.matrix
    np.testing.assert_allclose(w, w.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(w).min() >= -tol
    assert np.real(np.trace(w)) == pytest.approx(trace, abs=1e-9)
    for a, lo, hi in cons:
        v = np.real(np.trace(a @ w))
        if lo is not None:
            assert v >= lo - tol
        if hi is not None:
            assert v <= hi + tol


def dual_value(a0, a1, lo, hi, trace=1.0):
    """Lagrangian dual of the one-constraint problem, minimized over the scalar multiplier."""

    def g(lam):
        lmax = np.linalg.eigvalsh(a0 - lam * a1)[-1]
        return trace * lmax + (lam * hi if lam >= 0 else lam * lo)

    scale = 10 * (np.linalg.norm(a0, 2) + 1) / max(1e-12, min(abs(np.linalg.eigvalsh(a1)).max(), 1.0)) + 10
    res = minimize_scalar(g, bounds=(-scale, scale), method="bounded", options={"xatol": 1e-12})
    return res.fun


def test_diagonal_example():
    sol = sdp_solve_small(np.diag([2.0, 1.0]))
    assert sol.objective == pytest.approx(2.0, abs=1e-7)
    np.testing.assert_allclose(sol.matrix, np.diag([1.0, 0.0]), atol=1e-6)


def test_identity_example():
    sol = sdp_solve_small(np.eye(3), trace=1.0)
    assert sol.objective == pytest.approx(1.0, abs=1e-9)
    assert_feasible(sol, [])


def test_trace_scaling():
    rng = np.random.default_rng(1)
    a = rand_herm(rng, 4)
    s1 = sdp_solve_small(a, trace=1.0).objective
    s3 = sdp_solve_small(a, trace=3.0).objective
    assert s3 == pytest.approx(3 * s1, rel=1e-7)
    assert s1 == pytest.approx(np.linalg.eigvalsh(a)[-1], rel=1e-7)


def test_bad_trace():
    with pytest.raises(ValueError):
        sdp_solve_small(np.eye(2), trace=0.0)


def test_infeasible_raises():
    a = np.diag([1.0, 0.0])
    with pytest.raises(SdpInfeasibleError, match="infeasible balance constraint"):
        sdp_solve_small(np.eye(2), [(a, 2.0, 3.0)])


def test_matches_dual_oracle_one_constraint():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a0 = rand_herm(rng, 3)
        a1 = rand_herm(rng, 3)
        ev = np.linalg.eigvalsh(a1)
        lo = ev[0] + rng.uniform(0.2, 0.5) * (ev[-1] - ev[0])
        hi = lo + rng.uniform(0.01, 0.3) * (ev[-1] - ev[0])
        sol = sdp_solve_small(a0, [(a1, lo, hi)])
        assert_feasible(sol, [(a1, lo, hi)])
        d = dual_value(a0, a1, lo, hi)
        assert sol.objective == pytest.approx(d, rel=1e-5, abs=1e-7)


@pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
def test_matches_cvxpy_two_constraints():
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = 3
        a0 = rand_herm(rng, n)
        cons = []
        for _ in range(2):
            a = rand_herm(rng, n)
            ev = np.linalg.eigvalsh(a)
            mid = 0.5 * (ev[0] + ev[-1])
            cons.append((a, mid - 0.2 * (ev[-1] - ev[0]), mid + 0.1 * (ev[-1] - ev[0])))
        try:
            sol = sdp_solve_small(a0, cons)
        except SdpInfeasibleError:
            continue
        W = cp.Variable((n, n), hermitian=True)
        c = [W >> 0, cp.real(cp.trace(W)) == 1]
        for a, lo, hi in cons:
            v = cp.real(cp.trace(a @ W))
            c += [v >= lo, v <= hi]
        prob = cp.Problem(cp.Maximize(cp.real(cp.trace(a0 @ W))), c)
        prob.solve(solver=cp.CLARABEL)
        assert sol.objective == pytest.approx(prob.value, rel=1e-5, abs=1e-6)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_reduced_equals_full(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        c = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(3)]
        p = [np.outer(v, v.conj()) for v in c]
        a0 = p[0] + 0.7 * p[1] + 1.3 * p[2]
        pk = p[1] - 1.2 * p[2]
        ev = np.linalg.eigvalsh(pk)
        cons = [(pk, 0.0, 0.05 * ev[-1])]
        red = sdp_solve_small(a0, cons, reduce=True)
        full = sdp_solve_small(a0, cons, reduce=False)
        assert red.basis.shape[1] == 3
        assert red.objective == pytest.approx(full.objective, rel=1e-7)
        assert_feasible(red, cons)


def test_hermitian_basis_orthonormal():
    e = hermitian_basis(3)
    assert e.shape == (9, 3, 3)
    g = np.real(np.einsum("iab,jba->ij", e, e))
    np.testing.assert_allclose(g, np.eye(9), atol=1e-12)
    for m in e:
        np.testing.assert_allclose(m, m.conj().T)


def test_span_basis():
    v = np.array([1.0, 1j, 0, 0])
    q = span_basis([np.outer(v, v.conj())], 4)
    assert q.shape == (4, 1)
    assert span_basis([np.zeros((4, 4))], 4).shape == (4, 1)


@given(st.integers(0, 2**32 - 1))
def test_solution_feasible_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a0 = rand_herm(rng, 3)
    a1 = rand_herm(rng, 3)
    ev = np.linalg.eigvalsh(a1)
    lo = ev[0] + 0.3 * (ev[-1] - ev[0])
    hi = lo + 0.2 * (ev[-1] - ev[0])
    sol = sdp_solve_small(a0, [(a1, lo, hi)])
    assert_feasible(sol, [(a1, lo, hi)])
    # relaxation can never exceed the unconstrained bound
    assert sol.objective <= np.linalg.eigvalsh(a0)[-1] + 1e-9
    assert sol.gap <= 1e-7 * max(1.0, abs(sol.objective))
