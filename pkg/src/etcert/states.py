"""Constructors for the parametric families and explicit example states.

Entries transcribed from exact rational/algebraic data are kept as exact
expressions (fractions, sqrt) so normalization checks hit 1e-12.
"""

from __future__ import annotations

from math import prod, sqrt

import numpy as np

from .linalg import DensityMatrix, check_sites, dm, ket, ptrace

# ---------------------------------------------------------------------------
# two-qudit symmetric structures


def swap_op(d):
    """SWAP on C^d x C^d."""
    v = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            v[i * d + j, j * d + i] = 1.0
    return v.astype(complex)


def sym_projector(d):
    """Projector onto the symmetric subspace, rank d(d+1)/2."""
    return (np.eye(d * d, dtype=complex) + swap_op(d)) / 2


def antisym_projector(d):
    return (np.eye(d * d, dtype=complex) - swap_op(d)) / 2


def max_entangled(d):
    """|Phi_d> = sum_j |jj> / sqrt(d)."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / sqrt(d)
    return v


def werner_state(d, v):
    """Two-qudit U x U invariant family, weight v on the symmetric subspace.

    Entangled iff v < 1/2.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError("werner weight must be in [0, 1]")
    ps = sym_projector(d)
    pa = antisym_projector(d)
    mat = v * (2.0 / (d * (d + 1))) * ps + (1.0 - v) * (2.0 / (d * (d - 1))) * pa
    return DensityMatrix((d, d), mat, validate=False)


def isotropic_state(d, p):
    """Two-qudit U x conj(U) invariant family, fully entangled fraction p.

    Entangled iff p > 1/d.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("fully entangled fraction must be in [0, 1]")
    phi = dm(max_entangled(d))
    mat = p * phi + (1.0 - p) / (d * d - 1.0) * (np.eye(d * d) - phi)
    return DensityMatrix((d, d), mat, validate=False)


# ---------------------------------------------------------------------------
# noisy-W family


def w_state(n):
    """|W_n> = sum_j |0..1_j..0> / sqrt(n)."""
    v = np.zeros(2**n, dtype=complex)
    for j in range(n):
        v[1 << (n - 1 - j)] = 1.0 / sqrt(n)
    return v


def w_noisy_global(n, gamma):
    """gamma |W_n><W_n| + (1-gamma) |0^n><0^n|; rank <= 2."""
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    mat = gamma * dm(w_state(n)) + (1.0 - gamma) * dm(ket([0] * n, (2,) * n))
    return DensityMatrix((2,) * n, mat, validate=False)


def rho_n_gamma(n, gamma):
    """The common two-qubit reduction of the noisy-W family:
    ((n-2g)/n)|00><00| + (2g/n)|Psi+><Psi+| with |Psi+> = (|01>+|10>)/sqrt2.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    psi_plus = np.array([0, 1, 1, 0], dtype=complex) / sqrt(2)
    mat = ((n - 2.0 * gamma) / n) * dm(ket([0, 0], (2, 2))) + (
        2.0 * gamma / n
    ) * dm(psi_plus)
    return DensityMatrix((2, 2), mat, validate=False)


def rho_n_gamma_pt_min_eig(n, gamma):
    """Closed-form smallest eigenvalue of the partial transpose of
    rho_n_gamma: ((n-2g) - sqrt((n-2g)^2 + 4g^2)) / (2n)."""
    a = n - 2.0 * gamma
    return (a - sqrt(a * a + 4.0 * gamma * gamma)) / (2.0 * n)


# ---------------------------------------------------------------------------
# Bell-diagonal states and the chain weight tables


def bell_basis():
    """(Phi+, Phi-, Psi+, Psi-) in that order."""
    r = 1.0 / sqrt(2)
    return [
        np.array([r, 0, 0, r], dtype=complex),
        np.array([r, 0, 0, -r], dtype=complex),
        np.array([0, r, r, 0], dtype=complex),
        np.array([0, r, -r, 0], dtype=complex),
    ]


def bell_diagonal(weights):
    """Mixture of the four Bell states; separable iff max weight <= 1/2."""
    w = np.asarray(weights, dtype=float)
    if w.size != 4 or (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("need 4 convex weights summing to 1")
    mat = sum(wi * dm(b) for wi, b in zip(w, bell_basis()))
    return DensityMatrix((2, 2), mat, validate=False)


# weight tables for the separable-marginal chain examples (per 10^4)
BELL_W_AB = (1363, 4552, 610, 3475)
BELL_W_BC = (1819, 4153, 3957, 71)
BELL_W_CD = (4440, 3209, 2028, 323)

BELL_Q_AB = (566, 4203, 3933, 1298)
BELL_Q_BC = (3252, 4614, 2068, 66)
BELL_Q_CD = (4324, 3437, 323, 1916)
BELL_Q_DE = (818, 4430, 503, 4249)


def _bd(w):
    return bell_diagonal(np.array(w, dtype=float) / 1e4)


def bell_chain_marginals(which):
    """Marginal tables for the Bell-diagonal chain/tree examples.

    Returns (n_parties, {pair: DensityMatrix}, default_target).
    """
    if which == "chain4":
        return 4, {(0, 1): _bd(BELL_W_AB), (1, 2): _bd(BELL_W_BC),
                   (2, 3): _bd(BELL_W_CD)}, (0, 3)
    if which == "chain5a":
        return 5, {(0, 1): _bd(BELL_W_AB), (1, 2): _bd(BELL_W_BC),
                   (2, 3): _bd(BELL_W_BC), (3, 4): _bd(BELL_W_CD)}, (0, 4)
    if which == "chain5b":
        return 5, {(0, 1): _bd(BELL_Q_AB), (1, 2): _bd(BELL_Q_BC),
                   (2, 3): _bd(BELL_Q_CD), (3, 4): _bd(BELL_Q_DE)}, (0, 4)
    if which == "tree6":
        n, margs, tgt = bell_chain_marginals("chain5b")
        margs[(1, 5)] = _bd(BELL_Q_BC)
        return 6, margs, tgt
    if which == "tree7":
        n, margs, tgt = bell_chain_marginals("tree6")
        margs[(1, 6)] = _bd(BELL_Q_BC)
        return 7, margs, tgt
    raise KeyError(f"unknown bell chain {which!r}")


# ---------------------------------------------------------------------------
# bound entangled two-qutrit states from unextendible product bases


def upb_members(which):
    """The five orthonormal product vectors of the Tiles or Pyramid UPB."""
    if which.lower() == "tiles":
        k = lambda *b: ket(b, (3, 3))
        r = 1.0 / sqrt(2)
        vecs = [
            r * (k(0, 0) - k(0, 1)),
            r * (k(0, 2) - k(1, 2)),
            r * (k(2, 1) - k(2, 2)),
            r * (k(1, 0) - k(2, 0)),
            sum(k(i, j) for i in range(3) for j in range(3)) / 3.0,
        ]
        return vecs
    if which.lower() == "pyramid":
        scale = 2.0 / sqrt(5.0 + sqrt(5.0))
        h = sqrt(1.0 + sqrt(5.0)) / 2.0
        p = [
            scale
            * np.array(
                [np.cos(2 * np.pi * j / 5), np.sin(2 * np.pi * j / 5), h],
                dtype=complex,
            )
            for j in range(5)
        ]
        return [np.kron(p[j], p[(2 * j) % 5]) for j in range(5)]
    raise KeyError(f"unknown UPB {which!r}")


def upb_state(which):
    """Normalized projector onto the complement of the UPB: rank 4, PPT,
    bound entangled."""
    vecs = upb_members(which)
    mat = (np.eye(9, dtype=complex) - sum(dm(v) for v in vecs)) / 4.0
    return DensityMatrix((3, 3), mat, validate=False)


# ---------------------------------------------------------------------------
# explicit fixed examples (exact transcriptions)


def _chi3():
    s7, s5 = sqrt(7.0), sqrt(5.0)
    chi1 = np.array(
        [1 / 3, 1 / 12, -s7 / 12, 0.0, s7 / 12, -1 / 3, -3 / 4, 1 / 3],
        dtype=complex,
    )
    chi2 = np.array(
        [-1 / 2, s5 / 24, 1 / 6, 1 / 8, -1 / 3, -3 / 4, s5 / 24, 1 / 8],
        dtype=complex,
    )
    mat = 0.25 * dm(chi1) + 0.75 * dm(chi2)
    return DensityMatrix((2, 2, 2), mat, validate=False)


def _xi4():
    v = np.array(
        [
            1 / 45, -1 / 3, 1 / 3, 1 / 9, 2 / 9, -1 / 4, -2 / 5, 1 / 9,
            sqrt(10.0) / 36, 1 / 9, -1 / 9, -1 / 4, -1 / 2, 1 / 9, -1 / 9, 1 / 3,
        ],
        dtype=complex,
    )
    return v


def _chi4():
    v = np.array(
        [
            -1 / 5, -1 / 12, -1 / 93, -2 / 9, 3 / 10, 1 / 6, -1 / 4, -2 / 3,
            1 / 11, -3 / 11, 1 / 7, -1 / 6, -1 / 6, -1 / 4, 2 / 9, 1 / 7,
        ],
        dtype=complex,
    )
    # the normalization constant is left symbolic in the source data;
    # compute it from the transcribed entries
    return v / np.linalg.norm(v)


def _psi_gme4():
    v = np.array(
        [
            1 / 12, 1 / 9, 0.0, 1 / 6, 1 / 9, 1 / 9, 0.0, 0.0,
            0.0, sqrt(42.0) / 9, -1 / 3, -1 / 12, -1 / 4, -1 / 12, -1 / 3, 1 / 3,
        ],
        dtype=complex,
    )
    return v


NAMED_EXAMPLE_IDS = (
    "chi3", "xi4", "chi4", "bell_chain4", "bell_chain5a", "bell_chain5b",
    "psi_gme4",
)


def named_example(name):
    """Fixed example states/marginal tables by id.

    chi3 -> 3-qubit DensityMatrix; xi4 / chi4 / psi_gme4 -> 4-qubit state
    vectors; bell_chain* -> {pair: DensityMatrix} marginal tables.
    """
    if name == "chi3":
        return _chi3()
    if name == "xi4":
        return _xi4()
    if name == "chi4":
        return _chi4()
    if name == "psi_gme4":
        return _psi_gme4()
    if name in ("bell_chain4", "bell_chain5a", "bell_chain5b"):
        return bell_chain_marginals(name.removeprefix("bell_"))[1]
    raise KeyError(f"unknown example {name!r}; ids: {NAMED_EXAMPLE_IDS}")


# ---------------------------------------------------------------------------
# self-complementary Choi family and its symmetric extension


def selfcomp_params_valid(a0, a1, b, t=0.0):
    return abs(a0 * a0 + a1 * a1 + b * b - 1.0) <= 1e-12


def selfcomp_choi(a0, a1, b, t=0.0):
    """Two-qubit state sigma_AB = |phi0><phi0| + |phi1><phi1| with
    phi0 = a0|00> + (b/sqrt2)|11>, phi1 = a1 e^{it}|01> + (b/sqrt2)|10>.

    Requires a0^2 + a1^2 + b^2 = 1; entangled iff |b| in (0,1) and
    |a0| != |a1|.
    """
    if not selfcomp_params_valid(a0, a1, b, t):
        raise ValueError("parameters must satisfy a0^2 + a1^2 + b^2 = 1")
    r = b / sqrt(2)
    phi0 = np.array([a0, 0, 0, r], dtype=complex)
    phi1 = np.array([0, a1 * np.exp(1j * t), r, 0], dtype=complex)
    return DensityMatrix((2, 2), np.outer(phi0, phi0.conj()) + np.outer(phi1, phi1.conj()),
                         validate=False)


def selfcomp_pt_min_eig(a0, a1, b):
    """Closed-form smallest partial-transpose eigenvalue of selfcomp_choi:
    min over (i,j) in {(0,1),(1,0)} of
    (2 a_i^2 + b^2 - sqrt(4 a_i^4 + 8 a_j^2 b^2 - 4 a_i^2 b^2 + b^4)) / 4.
    """
    b2 = b * b

    def branch(ai, aj):
        ai2, aj2 = ai * ai, aj * aj
        rad = 4 * ai2 * ai2 + 8 * aj2 * b2 - 4 * ai2 * b2 + b2 * b2
        return (2 * ai2 + b2 - sqrt(max(rad, 0.0))) / 4.0

    return min(branch(a0, a1), branch(a1, a0))


def selfcomp_extension(a0, a1, b, t=0.0):
    """Three-qubit pure extension a0|000> + a1 e^{it}|011> + b|1>|Psi+>;
    both its AB and AC marginals equal selfcomp_choi(a0, a1, b, t)."""
    if not selfcomp_params_valid(a0, a1, b, t):
        raise ValueError("parameters must satisfy a0^2 + a1^2 + b^2 = 1")
    v = np.zeros(8, dtype=complex)
    v[0b000] = a0
    v[0b011] = a1 * np.exp(1j * t)
    v[0b101] = b / sqrt(2)
    v[0b110] = b / sqrt(2)
    return v


# ---------------------------------------------------------------------------
# Haar-random pure states

HAAR_MAX_DIM = 2**14


def haar_unitary(dim, seed):
    """Haar-random unitary: QR of a complex Ginibre matrix with the
    R-diagonal phase fix applied to Q's columns.  Philox keyed by the seed,
    so identical seeds give bitwise-identical output."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    ph = np.diagonal(r).copy()
    ph /= np.abs(ph)
    return q * ph


def haar_pure(n, d, seed):
    """Uniformly random pure state of n qudits: first column of a Haar
    unitary on d^n dimensions."""
    dim = d**n
    if dim > HAAR_MAX_DIM:
        raise ValueError(f"d^n = {dim} exceeds the {HAAR_MAX_DIM} memory guard")
    return haar_unitary(dim, seed)[:, 0].copy()


# ---------------------------------------------------------------------------
# classical-quantum join


def _basis_diagonal_blocks(mat, dims, slot, tol=1e-10):
    """Split a bipartite state by the computational basis of subsystem
    `slot` (0 or 1); raises if off-diagonal blocks in that slot exceed tol.

    Returns the list of d_slot diagonal blocks (operators on the other
    subsystem, untraced weights included).
    """
    da, db = dims
    t = np.asarray(mat).reshape(da, db, da, db)
    if slot == 0:
        off = max(
            np.abs(t[i, :, j, :]).max()
            for i in range(da) for j in range(da) if i != j
        )
        blocks = [t[i, :, i, :].copy() for i in range(da)]
    else:
        off = max(
            np.abs(t[:, i, :, j]).max()
            for i in range(db) for j in range(db) if i != j
        )
        blocks = [t[:, i, :, i].copy() for i in range(db)]
    if off > tol:
        raise ValueError("state is not classical on the shared subsystem")
    return blocks


def cq_join(sigma_ab, tau_bc):
    """Join two classical-quantum states that overlap in a classical B.

    sigma_ab must be B-diagonal in its second slot, tau_bc in its first,
    with matching B marginals; the returned tripartite state has
    tr_C = sigma_ab and tr_A = tau_bc, and its AC marginal is separable by
    construction.
    """
    da, db = sigma_ab.dims
    db2, dc = tau_bc.dims
    if db != db2:
        raise ValueError("shared subsystem dimensions differ")
    blocks_a = _basis_diagonal_blocks(sigma_ab.mat, sigma_ab.dims, 1)
    blocks_c = _basis_diagonal_blocks(tau_bc.mat, tau_bc.dims, 0)
    wa = np.array([np.trace(bl).real for bl in blocks_a])
    wc = np.array([np.trace(bl).real for bl in blocks_c])
    if np.abs(wa - wc).max() > 1e-9:
        raise ValueError("B marginals of the two inputs differ beyond 1e-9")
    out = np.zeros((da * db * dc,) * 2, dtype=complex)
    for x in range(db):
        if wa[x] <= 0.0:
            continue  # zero-probability symbol contributes nothing
        exx = np.zeros((db, db), dtype=complex)
        exx[x, x] = 1.0
        # beta^{ij}_x = beta^i_x * betat^j_x / rho_{B,x} collapses to the
        # normalized block product once summed over the i and j labels
        out += np.kron(np.kron(blocks_a[x], exx), blocks_c[x]) / wa[x]
    return DensityMatrix((da, db, dc), out, validate=False)


# ---------------------------------------------------------------------------
# parameter extraction (twirls)


def werner_parameter(rho):
    """tr(P_sym rho): the symmetric-subspace weight of the Werner twirl."""
    d1, d2 = rho.dims
    if d1 != d2:
        raise ValueError("werner parameter needs equal local dimensions")
    return float(np.real(np.trace(sym_projector(d1) @ rho.mat)))


def isotropic_parameter(rho):
    """<Phi_d| rho |Phi_d>: the fully entangled fraction kept by the
    conjugate twirl."""
    d1, d2 = rho.dims
    if d1 != d2:
        raise ValueError("isotropic parameter needs equal local dimensions")
    phi = max_entangled(d1)
    return float(np.real(phi.conj() @ rho.mat @ phi))
