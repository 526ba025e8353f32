"""Dense complex linear algebra on multipartite systems.

Conventions used throughout the package:

- subsystem 0 is the *most significant* tensor factor, i.e. the basis state
  |i1 i2 ... in> of a system with dimensions (d1, ..., dn) sits at flat
  index i1*d2*...*dn + i2*d3*...*dn + ... + in (row-major / big-endian),
- subsystem collections ("sites") are sorted tuples of 0-based positions,
- matrices are dense row-major complex ndarrays.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .config import TOL_EIG_RECON, TOL_HERM, TOL_PSD


def check_sites(sites, nsys):
    """Validate a subsystem index collection, returning it as a sorted tuple."""
    sites = tuple(sites)
    if len(sites) == 0:
        raise ValueError("empty subsystem set")
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate subsystem indices in {sites}")
    if any(not (0 <= s < nsys) for s in sites):
        raise IndexError(f"subsystem index out of range in {sites} (n={nsys})")
    return tuple(sorted(sites))


def kron(a, b):
    """Kronecker product; subsystem `a` becomes the more significant factor."""
    return np.kron(np.asarray(a), np.asarray(b))


def ptrace(mat, dims, keep):
    """Partial trace keeping the subsystems in `keep`.

    mat: square matrix over the full system with subsystem dimensions `dims`.
    Returns the reduced matrix over `keep` (in increasing subsystem order).
    """
    dims = tuple(dims)
    n = len(dims)
    keep = check_sites(keep, n)
    mat = np.asarray(mat)
    t = mat.reshape(dims + dims)
    ket = list(range(n))
    bra = []
    nxt = n
    for i in range(n):
        if i in keep:
            bra.append(nxt)
            nxt += 1
        else:
            bra.append(i)  # same label as ket axis -> contracted
    out = [ket[i] for i in keep] + [bra[i] for i in keep]
    dk = prod(dims[i] for i in keep)
    return np.einsum(t, ket + bra, out).reshape(dk, dk)


def ptranspose(mat, dims, part):
    """Partial transpose over the subsystems in `part`."""
    dims = tuple(dims)
    n = len(dims)
    part = check_sites(part, n)
    mat = np.asarray(mat)
    axes = list(range(2 * n))
    for i in part:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    side = mat.shape[0]
    return mat.reshape(dims + dims).transpose(axes).reshape(side, side)


def realign(mat, dims):
    """Realignment of a bipartite matrix: the (m x m) blocks become rows.

    For dims = (m, n) the result is m^2 x n^2 with
    R[j*m + i, l*n + k] = mat[i*n + k, j*n + l], so row (i, j) holds the
    column-stacked entries of block <i|_A mat |j>_A.  Any fixed row/column
    ordering gives the same singular values, which is all the CCNR
    criterion consumes.
    """
    dims = tuple(dims)
    if len(dims) != 2:
        raise ValueError("realign needs a bipartite dims pair")
    m, n = dims
    t = np.asarray(mat).reshape(m, n, m, n)  # axes (i, k, j, l)
    return t.transpose(2, 0, 3, 1).reshape(m * m, n * n)


def realign_adj(r, dims):
    """Adjoint (= inverse) of `realign`: maps an m^2 x n^2 matrix back."""
    m, n = dims
    t = np.asarray(r).reshape(m, m, n, n)  # axes (j, i, l, k)
    return t.transpose(1, 3, 0, 2).reshape(m * n, m * n)


def embed_op(op, sites, dims):
    """Lift an operator acting on `sites` to the full system (tensor identity).

    embed_op(B, sites, dims) @ rho traces against rho like B does against
    ptrace(rho, sites): tr[rho * embed_op(B)] == tr[ptrace(rho, sites) * B].
    """
    dims = tuple(dims)
    n = len(dims)
    sites = check_sites(sites, n)
    rest = [i for i in range(n) if i not in sites]
    d_rest = prod([dims[i] for i in rest]) if rest else 1
    full = np.kron(np.asarray(op), np.eye(d_rest))
    order = list(sites) + rest  # current slot -> original subsystem
    inv = np.argsort(order)
    tdims = tuple(dims[p] for p in order)
    t = full.reshape(tdims + tdims)
    perm = list(inv) + [n + i for i in inv]
    side = prod(dims)
    return t.transpose(perm).reshape(side, side)


def reorder_subsystems(mat, dims, order):
    """Permute subsystem slots of an operator: slot k of the output is
    subsystem order[k] of the input."""
    dims = tuple(dims)
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of all subsystems")
    t = np.asarray(mat).reshape(dims + dims)
    perm = list(order) + [n + i for i in order]
    side = prod(dims)
    return t.transpose(perm).reshape(side, side)


def herm_part(mat):
    """(M + M^dag)/2."""
    mat = np.asarray(mat)
    return (mat + mat.conj().T) / 2


def is_hermitian(mat, tol=TOL_HERM):
    mat = np.asarray(mat)
    return np.abs(mat - mat.conj().T).max() <= tol


def eigh(mat, check=True):
    """Eigendecomposition of a Hermitian matrix, ascending eigenvalues.

    The input is symmetrized before the solver call to absorb roundoff;
    if `check`, non-Hermitian input (beyond TOL_HERM) raises.
    """
    mat = np.asarray(mat)
    if check and not is_hermitian(mat):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(herm_part(mat))
    return w, v


def min_eig(mat):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(herm_part(np.asarray(mat)))[0])


def trace_norm(mat):
    """Sum of singular values."""
    return float(np.linalg.svd(np.asarray(mat), compute_uv=False).sum())


def pure_fidelity(rho, psi):
    """<psi| rho |psi> for a normalized state vector psi."""
    rho = np.asarray(rho)
    psi = np.asarray(psi).reshape(-1)
    if rho.shape != (psi.size, psi.size):
        raise ValueError("dimension mismatch between rho and psi")
    return float(np.real(psi.conj() @ rho @ psi))


def dm(psi):
    """Outer product |psi><psi| of a state vector."""
    psi = np.asarray(psi).reshape(-1)
    return np.outer(psi, psi.conj())


def ket(bits, dims):
    """Basis ket |i1 i2 ... in> for subsystem dimensions dims."""
    dims = tuple(dims)
    idx = 0
    for b, d in zip(bits, dims):
        if not 0 <= b < d:
            raise ValueError("basis label out of range")
        idx = idx * d + b
    v = np.zeros(prod(dims), dtype=complex)
    v[idx] = 1.0
    return v


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian PSD unit-trace matrix with attached subsystem dimensions.

    Validity (Hermitian within TOL_HERM, smallest eigenvalue >= -TOL_PSD,
    unit trace within 1e-9) is checked on construction; pass validate=False
    to skip, e.g. for matrices known valid by construction.
    """

    dims: tuple
    mat: np.ndarray = field(repr=False)
    validate: bool = True

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        side = prod(dims)
        if any(d < 2 for d in dims):
            raise ValueError("subsystem dimensions must be >= 2")
        if mat.shape != (side, side):
            raise ValueError(f"matrix side {mat.shape} != prod(dims) {side}")
        if self.validate:
            if not is_hermitian(mat):
                raise ValueError("density matrix is not Hermitian within 1e-12")
            if abs(np.trace(mat).real - 1.0) > 1e-9:
                raise ValueError("density matrix trace differs from 1 beyond 1e-9")
            if min_eig(mat) < -TOL_PSD:
                raise ValueError("density matrix has eigenvalue below -1e-9")

    @property
    def side(self):
        return prod(self.dims)

    def ptrace(self, keep):
        keep = check_sites(keep, len(self.dims))
        red = ptrace(self.mat, self.dims, keep)
        return DensityMatrix(tuple(self.dims[i] for i in keep), red, validate=False)

    def ptranspose(self, part):
        return ptranspose(self.mat, self.dims, part)

    def to_json(self):
        """Row-major real/imaginary split; exact round-trip through json."""
        return {
            "dims": list(self.dims),
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj, validate=True):
        mat = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        return cls(tuple(obj["dims"]), mat, validate=validate)

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json(), f)

    @classmethod
    def load(cls, path, validate=True):
        with open(path) as f:
            return cls.from_json(json.load(f), validate=validate)


def eig_reconstruction_error(mat, w, v):
    """Relative Frobenius reconstruction error of an eigendecomposition."""
    mat = np.asarray(mat)
    err = np.linalg.norm(mat - (v * w) @ v.conj().T)
    scale = max(np.linalg.norm(mat), 1e-300)
    return err / scale


def assert_valid_eigh(mat, w, v, tol=TOL_EIG_RECON):
    if eig_reconstruction_error(mat, w, v) > tol:
        raise ValueError("eigendecomposition reconstruction error too large")
