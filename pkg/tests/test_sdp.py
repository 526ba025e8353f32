from math import sqrt

import numpy as np
import pytest

from etcert import sdp
from etcert.linalg import dm, min_eig, ptranspose
from etcert.sdp import SdpBuilder, herm_basis, psd_project, solve, svec, unsvec


def test_svec_isometry_and_roundtrip():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 5):
        for _ in range(5):
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            a = (a + a.conj().T) / 2
            b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            b = (b + b.conj().T) / 2
            assert np.allclose(unsvec(svec(a), n), a)
            assert abs(np.trace(a @ b).real - svec(a) @ svec(b)) < 1e-12


def test_herm_basis_orthonormal_and_svec_aligned():
    for n in (2, 3):
        mats = list(herm_basis(n))
        assert len(mats) == n * n
        for i, m in enumerate(mats):
            v = svec(m)
            want = np.zeros(n * n)
            want[i] = 1.0
            assert np.allclose(v, want)


def test_psd_project():
    assert np.allclose(psd_project(np.diag([2.0, -3.0])), np.diag([2.0, 0.0]))
    rng = np.random.default_rng(1)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    assert np.abs(psd_project(rho) - rho).max() < 1e-12
    pt = ptranspose(dm(np.array([0, 1, 1, 0]) / sqrt(2)), (2, 2), (1,))
    w = np.linalg.eigvalsh(psd_project(pt))
    assert np.allclose(sorted(w), [0.0, 0.5, 0.5, 0.5], atol=1e-12)
    proj = psd_project(pt)
    assert np.abs(psd_project(proj) - proj).max() < 1e-12


def _solve_simple(c_diag):
    # max tr(diag(c) X) s.t. tr X = 1, X >= 0
    b = SdpBuilder([len(c_diag)])
    b.set_objective(blocks={0: np.diag(c_diag).astype(complex)})
    b.add_constraint(blocks={0: np.eye(len(c_diag), dtype=complex)}, rhs=1.0)
    return solve(b.build())


def test_eigenvalue_maximization():
    sol = _solve_simple([1.0, 2.0])
    assert sol.optimal
    assert abs(sol.primal_objective - 2.0) < 1e-7
    assert abs(sol.dual_objective - 2.0) < 1e-6
    assert min_eig(sol.blocks[0]) > -1e-8


def test_smallest_eigenvalue_via_free_scalar():
    # max lam s.t. diag(1,-1) - lam I >= 0  ->  lam = -1
    b = SdpBuilder([2], n_scalars=1)
    b.set_objective(scalars={0: 1.0})
    for a, e in enumerate(herm_basis(2)):
        b.add_constraint(
            blocks={0: e}, scalars={0: np.trace(e).real},
            rhs=np.trace(e @ np.diag([1.0, -1.0])).real,
        )
    sol = solve(b.build())
    assert sol.optimal
    assert abs(sol.scalars[0] - (-1.0)) < 1e-7


def test_weak_duality_and_scaling_invariance():
    rng = np.random.default_rng(2)
    for trial in range(5):
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        c = (g + g.conj().T) / 2
        b = SdpBuilder([3])
        b.set_objective(blocks={0: c})
        b.add_constraint(blocks={0: np.eye(3, dtype=complex)}, rhs=1.0)
        sol = solve(b.build())
        assert sol.optimal
        assert sol.dual_objective >= sol.primal_objective - 1e-6
        b2 = SdpBuilder([3])
        b2.set_objective(blocks={0: 3.0 * c})
        b2.add_constraint(blocks={0: np.eye(3, dtype=complex)}, rhs=1.0)
        sol2 = solve(b2.build())
        assert abs(sol2.primal_objective - 3.0 * sol.primal_objective) < 1e-6
        assert np.abs(sol2.blocks[0] - sol.blocks[0]).max() < 1e-6


def test_residuals_meet_contract():
    sol = _solve_simple([0.3, -0.7, 1.1])
    rp, rd, gap = sol.residuals
    assert rp <= 1e-7 and rd <= 1e-7
    assert gap <= 1e-6 * (1 + abs(sol.primal_objective))


def test_infeasible_linear():
    b = SdpBuilder([2])
    b.set_objective(blocks={0: np.eye(2, dtype=complex)})
    b.add_constraint(blocks={0: np.eye(2, dtype=complex)}, rhs=1.0)
    b.add_constraint(blocks={0: np.eye(2, dtype=complex)}, rhs=2.0)
    sol = solve(b.build())
    assert sol.status == sdp.INFEASIBLE


def test_infeasible_cone():
    # X >= 0 with tr X = 1 and <diag(1,0), X> = 2 is affinely consistent
    # but cone-infeasible
    b = SdpBuilder([2])
    b.set_objective(blocks={0: np.eye(2, dtype=complex)})
    b.add_constraint(blocks={0: np.eye(2, dtype=complex)}, rhs=1.0)
    b.add_constraint(blocks={0: np.diag([1.0, 0.0]).astype(complex)}, rhs=2.0)
    sol = solve(b.build())
    assert sol.status == sdp.INFEASIBLE


def test_determinism():
    a = _solve_simple([0.2, 0.9, -0.4])
    b = _solve_simple([0.2, 0.9, -0.4])
    assert a.primal_objective == b.primal_objective
    assert a.iterations == b.iterations
    assert np.array_equal(a.blocks[0], b.blocks[0])


def test_max_iterations_status():
    # a cone-infeasible problem cannot converge, and 30 iterations is far
    # below the stall-detection window
    b = SdpBuilder([2])
    b.set_objective(blocks={0: np.eye(2, dtype=complex)})
    b.add_constraint(blocks={0: np.eye(2, dtype=complex)}, rhs=1.0)
    b.add_constraint(blocks={0: np.diag([1.0, 0.0]).astype(complex)}, rhs=2.0)
    sol = solve(b.build(), max_iters=30, polish=False)
    assert sol.status == sdp.MAX_ITERATIONS
