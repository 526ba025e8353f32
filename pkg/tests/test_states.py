from math import sqrt

import numpy as np
import pytest

from etcert.linalg import (
    DensityMatrix,
    dm,
    min_eig,
    ptrace,
    ptranspose,
    pure_fidelity,
    realign,
    trace_norm,
)
from etcert import states
from etcert.states import (
    bell_chain_marginals,
    bell_diagonal,
    cq_join,
    haar_pure,
    isotropic_parameter,
    isotropic_state,
    max_entangled,
    named_example,
    rho_n_gamma,
    rho_n_gamma_pt_min_eig,
    selfcomp_choi,
    selfcomp_extension,
    selfcomp_pt_min_eig,
    sym_projector,
    upb_members,
    upb_state,
    w_noisy_global,
    w_state,
    werner_parameter,
    werner_state,
)


def rand_unitary(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def test_werner_basics():
    singlet = np.array([0, 1, -1, 0], dtype=complex) / sqrt(2)
    assert np.abs(werner_state(2, 0.0).mat - dm(singlet)).max() < 1e-14
    for d in (2, 3, 4):
        w = werner_state(d, 0.5)
        assert abs(min_eig(ptranspose(w.mat, (d, d), (1,)))) < 1e-12  # boundary
        assert abs(np.trace(sym_projector(3) @ werner_state(3, 0.3).mat).real - 0.3) < 1e-13


def test_werner_uu_invariance():
    rng = np.random.default_rng(0)
    for d in (2, 3):
        w = werner_state(d, 0.7).mat
        for _ in range(5):
            u = rand_unitary(rng, d)
            uu = np.kron(u, u)
            assert np.abs(uu @ w @ uu.conj().T - w).max() < 1e-10


def test_isotropic_basics():
    for d in (2, 3):
        assert np.abs(isotropic_state(d, 1.0 / d**2).mat - np.eye(d * d) / d**2).max() < 1e-14
    assert np.abs(isotropic_state(2, 1.0).mat - dm(max_entangled(2))).max() < 1e-14
    # separability boundary p = 1/d: smallest PT eigenvalue 0
    iso = isotropic_state(3, 1.0 / 3.0)
    assert abs(min_eig(ptranspose(iso.mat, (3, 3), (1,)))) < 1e-12


def test_isotropic_conjugate_invariance():
    rng = np.random.default_rng(1)
    for d in (2, 3):
        rho = isotropic_state(d, 0.6).mat
        for _ in range(5):
            u = rand_unitary(rng, d)
            uu = np.kron(u, u.conj())
            assert np.abs(uu @ rho @ uu.conj().T - rho).max() < 1e-10


def test_twirl_parameters():
    for d in (2, 3):
        for v in (0.0, 0.25, 0.7, 1.0):
            assert abs(werner_parameter(werner_state(d, v)) - v) < 1e-12
        for p in (0.0, 0.3, 1.0):
            assert abs(isotropic_parameter(isotropic_state(d, p)) - p) < 1e-12
    assert abs(werner_parameter(DensityMatrix((3, 3), np.eye(9) / 9)) - (3 + 1) / 6) < 1e-13
    assert abs(werner_parameter(werner_state(2, 0.0))) < 1e-13
    # the singlet is orthogonal to |Phi_2>, so its entangled fraction is 0
    assert abs(isotropic_parameter(werner_state(2, 0.0))) < 1e-13
    assert abs(isotropic_parameter(DensityMatrix((3, 3), np.eye(9) / 9)) - 1 / 9) < 1e-14


def test_w_noisy_family():
    assert np.abs(w_noisy_global(3, 1.0).mat - dm(w_state(3))).max() < 1e-14
    got = ptrace(w_noisy_global(4, 0.5).mat, (2,) * 4, (0, 1))
    assert np.abs(got - rho_n_gamma(4, 0.5).mat).max() < 1e-13
    assert abs(pure_fidelity(w_noisy_global(3, 0.7).mat, w_state(3)) - 0.7) < 1e-13
    with pytest.raises(ValueError):
        w_noisy_global(2, 0.5)


def test_theorem1_marginal_consistency():
    # every pair marginal of the noisy-W state equals rho_n(gamma)
    from itertools import combinations

    for n in (3, 4, 5):
        for gamma in (0.25, 1.0):
            omega = w_noisy_global(n, gamma)
            want = rho_n_gamma(n, gamma).mat
            for pair in combinations(range(n), 2):
                got = ptrace(omega.mat, (2,) * n, pair)
                assert np.abs(got - want).max() < 1e-12


def test_rho_n_gamma_properties():
    for n in (3, 4, 7):
        for gamma in (0.1, 0.5, 1.0):
            rho = rho_n_gamma(n, gamma)
            assert abs(np.trace(rho.mat).real - 1.0) < 1e-13
            got = min_eig(ptranspose(rho.mat, (2, 2), (1,)))
            assert abs(got - rho_n_gamma_pt_min_eig(n, gamma)) < 1e-12
    near_zero = rho_n_gamma(3, 1e-9)
    assert abs(near_zero.mat[0, 0].real - 1.0) < 1e-8


def test_bell_diagonal():
    phi_plus = np.array([1, 0, 0, 1], dtype=complex) / sqrt(2)
    assert np.abs(bell_diagonal([1, 0, 0, 0]).mat - dm(phi_plus)).max() < 1e-14
    assert np.abs(bell_diagonal([0.25] * 4).mat - np.eye(4) / 4).max() < 1e-14
    with pytest.raises(ValueError):
        bell_diagonal([0.5, 0.5, 0.5, -0.5])
    # separable iff max weight <= 1/2 (check both sides via PPT = separable on 2x2)
    sep = bell_diagonal([0.5, 0.3, 0.1, 0.1])
    ent = bell_diagonal([0.6, 0.2, 0.1, 0.1])
    assert min_eig(ptranspose(sep.mat, (2, 2), (1,))) >= -1e-12
    assert min_eig(ptranspose(ent.mat, (2, 2), (1,))) < -1e-3


def test_bell_chain_tables():
    n, margs, target = bell_chain_marginals("chain4")
    assert n == 4 and target == (0, 3)
    want_ab = np.array([1363, 4552, 610, 3475]) / 1e4
    got = margs[(0, 1)]
    for w, bell in zip(want_ab, states.bell_basis()):
        assert abs(pure_fidelity(got.mat, bell) - w) < 1e-12
    # all chain marginals are separable Bell-diagonal states
    for which in ("chain4", "chain5a", "chain5b", "tree6", "tree7"):
        n, margs, target = bell_chain_marginals(which)
        assert all(max(s) <= n - 1 for s in margs)
        for sigma in margs.values():
            assert min_eig(ptranspose(sigma.mat, (2, 2), (1,))) >= -1e-12


def test_upb_states():
    for which in ("tiles", "pyramid"):
        vecs = upb_members(which)
        gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
        assert np.abs(gram - np.eye(5)).max() < 1e-12  # orthonormal product basis
        rho = upb_state(which)
        assert rho.dims == (3, 3)
        w = np.linalg.eigvalsh(rho.mat)
        assert np.sum(w > 1e-12) == 4  # rank 4
        assert min_eig(ptranspose(rho.mat, (3, 3), (1,))) >= -1e-9  # PPT
        for v in vecs:
            assert abs(pure_fidelity(rho.mat, v)) <= 1e-12
    # realignment detects the bound entanglement
    assert trace_norm(realign(upb_state("tiles").mat, (3, 3))) > 1.0 + 1e-3


def test_named_examples_valid():
    chi3 = named_example("chi3")
    assert chi3.dims == (2, 2, 2)
    assert abs(np.trace(chi3.mat).real - 1.0) < 1e-12
    for name in ("xi4", "chi4", "psi_gme4"):
        v = named_example(name)
        assert v.shape == (16,)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    margs = named_example("bell_chain4")
    assert set(margs) == {(0, 1), (1, 2), (2, 3)}
    with pytest.raises(KeyError):
        named_example("nope")


def test_chi3_marginals_ppt():
    chi3 = named_example("chi3")
    for pair in ((0, 1), (1, 2)):
        red = ptrace(chi3.mat, (2, 2, 2), pair)
        assert min_eig(ptranspose(red, (2, 2), (1,))) >= -1e-12


def test_xi4_marginals_ppt():
    rho = dm(named_example("xi4"))
    for pair in ((0, 1), (1, 2), (2, 3)):
        red = ptrace(rho, (2,) * 4, pair)
        assert min_eig(ptranspose(red, (2, 2), (1,))) >= -1e-12


def test_selfcomp_choi():
    assert np.abs(selfcomp_choi(1.0, 0.0, 0.0).mat - np.diag([1, 0, 0, 0.0])).max() < 1e-14
    rng = np.random.default_rng(2)
    for _ in range(25):
        raw = rng.standard_normal(3)
        a0, a1, b = raw / np.linalg.norm(raw)
        t = rng.uniform(0, 2 * np.pi)
        sigma = selfcomp_choi(a0, a1, b, t)
        got = min_eig(ptranspose(sigma.mat, (2, 2), (1,)))
        assert abs(got - selfcomp_pt_min_eig(a0, a1, b)) < 1e-12
    # |a0| = |a1| gives a separable (PPT 2x2) state
    a = 1 / sqrt(3)
    sigma = selfcomp_choi(a, a, 1 / sqrt(3), 0.3)
    assert min_eig(ptranspose(sigma.mat, (2, 2), (1,))) >= -1e-12
    with pytest.raises(ValueError):
        selfcomp_choi(1.0, 1.0, 1.0)


def test_selfcomp_extension_marginals():
    rng = np.random.default_rng(3)
    for _ in range(25):
        raw = rng.standard_normal(3)
        a0, a1, b = raw / np.linalg.norm(raw)
        t = rng.uniform(0, 2 * np.pi)
        psi = selfcomp_extension(a0, a1, b, t)
        sigma = selfcomp_choi(a0, a1, b, t).mat
        rho = dm(psi)
        assert np.abs(ptrace(rho, (2, 2, 2), (0, 1)) - sigma).max() < 1e-12
        assert np.abs(ptrace(rho, (2, 2, 2), (0, 2)) - sigma).max() < 1e-12


def test_selfcomp_bc_ppt_boundary():
    # BC marginal becomes PPT exactly at |b| = sqrt(2 |a0 a1|)
    a0, a1 = 0.6, 0.3
    b = sqrt(2 * a0 * a1)
    norm = sqrt(a0**2 + a1**2 + b**2)
    a0, a1, b = a0 / norm, a1 / norm, b / norm
    assert abs(b - sqrt(2 * a0 * a1)) < 1e-12  # scale-invariant condition
    psi = selfcomp_extension(a0, a1, b)
    bc = ptrace(dm(psi), (2, 2, 2), (1, 2))
    assert abs(min_eig(ptranspose(bc, (2, 2), (1,)))) < 1e-12
    # note (2,1,2)/3 sits exactly on the boundary: b^2 = 4/9 = 2 a0 a1
    psi = selfcomp_extension(2 / 3, 1 / 3, 2 / 3)
    bc = ptrace(dm(psi), (2, 2, 2), (1, 2))
    assert abs(min_eig(ptranspose(bc, (2, 2), (1,)))) < 1e-12
    # away from the boundary the BC marginal goes NPT
    b = sqrt(1 - 0.7**2 - 0.1**2)
    psi = selfcomp_extension(0.7, 0.1, b)
    bc = ptrace(dm(psi), (2, 2, 2), (1, 2))
    assert min_eig(ptranspose(bc, (2, 2), (1,))) < -1e-3


def test_haar_determinism_and_norm():
    a = haar_pure(3, 2, seed=42)
    b = haar_pure(3, 2, seed=42)
    assert np.array_equal(a, b)
    c = haar_pure(3, 2, seed=43)
    assert not np.array_equal(a, c)
    rng_norms = [abs(np.linalg.norm(haar_pure(2, 2, seed=s)) - 1) for s in range(200)]
    assert max(rng_norms) < 1e-12
    with pytest.raises(ValueError):
        haar_pure(15, 2, seed=0)


def test_haar_mean_marginal_purity():
    # E[tr rho_A^2] = (dA + dB)/(dA dB + 1) for a Haar bipartite pure state
    for n, d, want in [(2, 2, 4 / 5), (2, 3, 3 / 5)]:
        acc = 0.0
        trials = 800
        for s in range(trials):
            psi = haar_pure(n, d, seed=s)
            red = ptrace(dm(psi), (d,) * n, (0,))
            acc += float(np.real(np.trace(red @ red)))
        assert abs(acc / trials - want) < 0.012


def test_haar_rotation_invariance():
    # fixed-unitary rotation leaves the marginal-purity statistic unchanged
    from etcert.states import haar_unitary

    u = haar_unitary(4, seed=999)
    plain, rotated = 0.0, 0.0
    for s in range(400):
        psi = haar_pure(2, 2, seed=s)
        red = ptrace(dm(psi), (2, 2), (0,))
        plain += float(np.real(np.trace(red @ red)))
        psi2 = u @ psi
        red2 = ptrace(dm(psi2), (2, 2), (0,))
        rotated += float(np.real(np.trace(red2 @ red2)))
    assert abs(plain - rotated) / 400 < 0.03


def test_cq_join():
    rng = np.random.default_rng(4)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho_a = g @ g.conj().T
    rho_a /= np.trace(rho_a).real
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rho_c = g @ g.conj().T
    rho_c /= np.trace(rho_c).real
    zero = np.zeros((2, 2), dtype=complex)
    zero[0, 0] = 1.0
    sigma = DensityMatrix((2, 2), np.kron(rho_a, zero), validate=False)
    tau = DensityMatrix((2, 2), np.kron(zero, rho_c), validate=False)
    joint = cq_join(sigma, tau)
    want = np.kron(np.kron(rho_a, zero), rho_c)
    assert np.abs(joint.mat - want).max() < 1e-12

    # classically correlated inputs give the GHZ-diagonal classical state
    half = np.zeros((4, 4), dtype=complex)
    half[0, 0] = half[3, 3] = 0.5
    cc = DensityMatrix((2, 2), half)
    joint = cq_join(cc, cc)
    want = np.zeros((8, 8), dtype=complex)
    want[0, 0] = want[7, 7] = 0.5
    assert np.abs(joint.mat - want).max() < 1e-12
    assert np.abs(ptrace(joint.mat, (2, 2, 2), (0, 1)) - cc.mat).max() < 1e-9
    assert np.abs(ptrace(joint.mat, (2, 2, 2), (1, 2)) - cc.mat).max() < 1e-9
    # AC marginal of any join is separable: PPT suffices on 2x2
    ac = ptrace(joint.mat, (2, 2, 2), (0, 2))
    assert min_eig(ptranspose(ac, (2, 2), (1,))) >= -1e-12


def test_cq_join_rejects_bad_inputs():
    bell = dm(np.array([1, 0, 0, 1], dtype=complex) / sqrt(2))
    ent = DensityMatrix((2, 2), bell)
    with pytest.raises(ValueError):
        cq_join(ent, ent)  # not classical on B
    zero = np.zeros((2, 2), dtype=complex)
    zero[0, 0] = 1.0
    one = np.zeros((2, 2), dtype=complex)
    one[1, 1] = 1.0
    sigma = DensityMatrix((2, 2), np.kron(np.eye(2) / 2, zero), validate=False)
    tau = DensityMatrix((2, 2), np.kron(one, np.eye(2) / 2), validate=False)
    with pytest.raises(ValueError):
        cq_join(sigma, tau)  # mismatched B marginals


def test_cq_join_random_cq_states():
    rng = np.random.default_rng(5)
    for _ in range(10):
        pb = rng.dirichlet(np.ones(2))
        blocks_a, blocks_c = [], []
        for x in range(2):
            g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            m = g @ g.conj().T
            blocks_a.append(pb[x] * m / np.trace(m).real)
            g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            m = g @ g.conj().T
            blocks_c.append(pb[x] * m / np.trace(m).real)
        sig = np.zeros((4, 4), dtype=complex)
        tau = np.zeros((4, 4), dtype=complex)
        for x in range(2):
            exx = np.zeros((2, 2))
            exx[x, x] = 1.0
            sig += np.kron(blocks_a[x], exx)
            tau += np.kron(exx, blocks_c[x])
        joint = cq_join(DensityMatrix((2, 2), sig, validate=False),
                        DensityMatrix((2, 2), tau, validate=False))
        assert min_eig(joint.mat) >= -1e-12
        assert abs(np.trace(joint.mat).real - 1.0) < 1e-12
        assert np.abs(ptrace(joint.mat, (2, 2, 2), (0, 1)) - sig).max() < 1e-9
        assert np.abs(ptrace(joint.mat, (2, 2, 2), (1, 2)) - tau).max() < 1e-9
