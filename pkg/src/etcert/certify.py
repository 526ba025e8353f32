"""The certification engine: marginal-constrained SDPs and verdicts.

Every certifier optimizes over the set of global states compatible with a
MarginalSpec and reports a Certificate.  A target marginal is *forced*
entangled when even the most favourable compatible joint state violates a
separability criterion:

- lambda_star: largest achievable smallest eigenvalue of the target's
  partial transpose; negative certifies entanglement (PPT witness),
- min_ccnr: smallest achievable realignment trace norm; > 1 certifies
  (catches some PPT-entangled targets),
- gme_minmax: smallest achievable PPT/CCNR averages M and N of a 3-party
  target; max(min M, min N) > (1+2d)/3 certifies genuine tripartite
  entanglement,
- min_fidelity: smallest achievable overlap with a candidate pure state;
  a value of 1 certifies the global state is unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

from . import sdp
from .config import EPS_CERT, TOL_PSD
from .linalg import (
    DensityMatrix,
    check_sites,
    dm,
    embed_op,
    herm_part,
    min_eig,
    ptrace,
    ptranspose,
    realign,
    realign_adj,
    reorder_subsystems,
    trace_norm,
)


class InfeasibleSpec(Exception):
    """No joint state is compatible with the given marginals."""


class SolverFailure(Exception):
    """The SDP solver could not certify optimality."""


@dataclass(frozen=True)
class MarginalSpec:
    """A set of (subsystem set -> reduced state) constraints on a joint state."""

    dims: tuple
    constraints: tuple  # of (sites, DensityMatrix)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        n = len(dims)
        seen = set()
        items = []
        for sites, sigma in self.constraints:
            sites = check_sites(sites, n)
            if sites in seen:
                raise ValueError(f"duplicate marginal on {sites}")
            if len(sites) == n:
                raise ValueError("the full system cannot be a marginal constraint")
            seen.add(sites)
            want = tuple(dims[i] for i in sites)
            if tuple(sigma.dims) != want:
                raise ValueError(f"marginal on {sites} has dims {sigma.dims}, want {want}")
            items.append((sites, sigma))
        object.__setattr__(self, "constraints", tuple(items))

    @property
    def n_parties(self):
        return len(self.dims)

    @property
    def side(self):
        return prod(self.dims)


def spec_from_state(state, site_groups):
    """Build a MarginalSpec from the reductions of a global state.

    state: DensityMatrix or a pure state vector plus dims via tuple input.
    """
    if not isinstance(state, DensityMatrix):
        raise TypeError("state must be a DensityMatrix")
    return MarginalSpec(
        state.dims,
        tuple((tuple(g), state.ptrace(g)) for g in site_groups),
    )


FLAG_ENTANGLED = "entangled"
FLAG_SEPARABLE = "separable"
FLAG_UNDECIDED = "ppt_undecided"

OUTCOME_TRANSITIVITY = "transitivity"
OUTCOME_METATRANSITIVITY = "metatransitivity"
OUTCOME_NOT_CERTIFIED = "not_certified"


@dataclass
class Certificate:
    kind: str  # lambda_star | witness | ccnr | gme_mn | uniqueness
    value: float
    joint_state: DensityMatrix
    duals: list | None  # Hermitian H_i per marginal (lambda_star / witness)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self, include_state=False):
        out = {
            "kind": self.kind,
            "value": self.value,
            "residuals": list(self.diagnostics.get("residuals", ())),
            "marginal_violation": self.diagnostics.get("marginal_violation"),
            "status": self.diagnostics.get("status"),
            "iterations": self.diagnostics.get("iterations"),
        }
        for key in ("min_m", "min_n", "bound", "dual_objective", "energy"):
            if key in self.diagnostics:
                out[key] = self.diagnostics[key]
        if include_state:
            out["joint_state"] = self.joint_state.to_json()
        return out


@dataclass
class TransitivityVerdict:
    target: tuple
    input_flags: list
    outcome: str
    certificate: Certificate

    def to_json(self, include_state=False):
        return {
            "target": list(self.target),
            "input_flags": list(self.input_flags),
            "outcome": self.outcome,
            "certificate": self.certificate.to_json(include_state),
        }


# ---------------------------------------------------------------------------
# constraint assembly


def marginal_rows(spec, builder, block=0):
    """Append the one-row-per-Hermitian-basis-element marginal constraints.

    The constraint count is sum_i (marginal side)^2 and, applied to any
    joint state, the rows reproduce its partial traces exactly.
    """
    for sites, sigma in spec.constraints:
        m = sigma.side
        rows = np.empty((m * m, builder.block_sides[block] ** 2))
        for a, basis_op in enumerate(sdp.herm_basis(m)):
            rows[a] = sdp.svec(embed_op(basis_op, sites, spec.dims))
        builder.add_rows(builder.block_rows(block, rows), sdp.svec(sigma.mat))


def build_marginal_map(spec):
    """The marginal constraints as real-linear data: (rows, rhs) acting on
    svec coordinates of the global state."""
    builder = sdp.SdpBuilder([spec.side])
    marginal_rows(spec, builder)
    prob = builder.build()
    return prob.a, prob.b


def _marginal_violation(spec, state_mat):
    """Largest per-marginal trace distance of a joint state."""
    worst = 0.0
    for sites, sigma in spec.constraints:
        diff = ptrace(state_mat, spec.dims, sites) - sigma.mat
        worst = max(worst, 0.5 * trace_norm(diff))
    return worst


def _finish(spec, sol, kind, value, duals=None, extra=None):
    if sol.status == sdp.INFEASIBLE:
        raise InfeasibleSpec("marginals admit no compatible joint state")
    if sol.status != sdp.OPTIMAL:
        raise SolverFailure(f"solver returned {sol.status} after {sol.iterations} iters")
    mat = herm_part(sol.blocks[0])
    tr = np.trace(mat).real
    if abs(tr - 1.0) > 1e-6 or min_eig(mat) < -1e-6:
        raise SolverFailure("solver state fails density-matrix sanity checks")
    state = DensityMatrix(spec.dims, mat / tr, validate=False)
    diag = dict(extra or {})
    diag.update(
        status=sol.status,
        residuals=sol.residuals,
        iterations=sol.iterations,
        polished=sol.polished,
        dual_objective=sol.dual_objective,
        marginal_violation=_marginal_violation(spec, mat),
    )
    return Certificate(kind, float(value), state, duals, diag)


def _split_duals(spec, duals):
    """Unpack raw row multipliers into one Hermitian H_i per marginal."""
    out = []
    pos = 0
    for sites, sigma in spec.constraints:
        m = sigma.side
        out.append(sdp.unsvec(duals[pos : pos + m * m], m))
        pos += m * m
    return out, pos


def _target_sites(spec, target):
    target = check_sites(target, spec.n_parties)
    if any(set(target) == set(s) for s, _ in spec.constraints):
        raise ValueError("target coincides with a constrained marginal")
    return target


def _solve(problem, opts):
    opts = dict(opts or {})
    return sdp.solve(problem, **opts)


# ---------------------------------------------------------------------------
# certifiers


def lambda_star(spec, target, cut=None, opts=None):
    """Maximize the smallest eigenvalue of the target's partial transpose
    over all compatible joint states.

    A negative optimum certifies that the target marginal is entangled for
    every compatible joint state.  `cut` picks the transposed side within
    the target (default: its last party); the optimal value's sign does
    not depend on that choice.
    """
    target = _target_sites(spec, target)
    tdims = tuple(spec.dims[i] for i in target)
    m = prod(tdims)
    cut_local = _local_cut(target, cut, default_last=True)

    builder = sdp.SdpBuilder([spec.side, m], n_scalars=1)
    builder.set_objective(scalars={0: 1.0})
    marginal_rows(spec, builder)
    rows = np.empty((m * m, builder.n_vars))
    rhs = np.zeros(m * m)
    for a, basis_op in enumerate(sdp.herm_basis(m)):
        lifted = embed_op(ptranspose(basis_op, tdims, cut_local), target, spec.dims)
        row = builder.block_rows(0, sdp.svec(lifted)[None, :])[0]
        row += builder.block_rows(1, -sdp.svec(basis_op)[None, :])[0]
        row[-1] = -np.trace(basis_op).real
        rows[a] = row
    builder.add_rows(rows, rhs)

    sol = _solve(builder.build(), opts)
    if sol.status == sdp.OPTIMAL:
        h_duals, pos = _split_duals(spec, sol.duals)
        eta = -sdp.unsvec(sol.duals[pos : pos + m * m], m)
        extra = {"eta": eta, "cut": cut_local}
    else:
        h_duals, extra = None, None
    return _finish(spec, sol, "lambda_star", sol.primal_objective, h_duals, extra)


def witness_opt(spec, target, w_t, opts=None):
    """Maximize tr[rho (W_T x I)] over compatible joint states.

    The dual multipliers populate one Hermitian H_i per marginal solving
    min sum_i tr(sigma_i H_i) subject to sum_i H_i x I - W_T x I >= 0; a
    negative optimum certifies the target entangled whenever W_T is an
    entanglement witness.
    """
    target = check_sites(target, spec.n_parties)
    w_t = np.asarray(w_t)
    builder = sdp.SdpBuilder([spec.side])
    builder.set_objective(blocks={0: embed_op(w_t, target, spec.dims)})
    marginal_rows(spec, builder)
    sol = _solve(builder.build(), opts)
    h_duals = _split_duals(spec, sol.duals)[0] if sol.status == sdp.OPTIMAL else None
    extra = {"energy": -sol.primal_objective}
    return _finish(spec, sol, "witness", sol.primal_objective, h_duals, extra)


def witness_zeta(spec, w_t, target, h_duals):
    """Assemble the dual certificate operator sum_i H_i x I - W_T x I."""
    zeta = -embed_op(np.asarray(w_t), check_sites(target, spec.n_parties), spec.dims)
    for (sites, _), h in zip(spec.constraints, h_duals):
        zeta = zeta + embed_op(h, sites, spec.dims)
    return zeta


def _local_cut(target, cut, default_last=False):
    """Convert global `cut` indices into positions within the target."""
    if cut is None:
        return (len(target) - 1,) if default_last else None
    cut = check_sites(cut, max(target) + 1)
    if not set(cut) <= set(target):
        raise ValueError("cut must pick parties of the target")
    return tuple(sorted(target.index(c) for c in cut))


def _tracenorm_blocks(builder, x_block, q_plus, q_minus, adjoint_rows, side):
    """Constraint rows Omega+ - Omega- = L(X) for a trace-norm epigraph.

    adjoint_rows(basis_op) must return the svec row of the functional
    <basis_op, L(X)> on the global block.
    """
    rows = np.empty((side * side, builder.n_vars))
    for a, basis_op in enumerate(sdp.herm_basis(side)):
        row = builder.block_rows(q_plus, sdp.svec(basis_op)[None, :])[0]
        row += builder.block_rows(q_minus, -sdp.svec(basis_op)[None, :])[0]
        row += builder.block_rows(x_block, -adjoint_rows(basis_op)[None, :])[0]
        rows[a] = row
    builder.add_rows(rows, np.zeros(side * side))


def min_ccnr(spec, target, cut=None, opts=None):
    """Minimize the realignment trace norm of the target marginal over all
    compatible joint states; a value above 1 certifies entanglement even
    for PPT targets."""
    target = _target_sites(spec, target)
    tdims = tuple(spec.dims[i] for i in target)
    if len(tdims) != 2:
        raise ValueError("CCNR certification needs a two-party target")
    cut_local = _local_cut(target, cut) or (0,)
    if cut_local == (1,):
        bip = (tdims[1], tdims[0])
        reorder = (1, 0)
    else:
        bip = tdims
        reorder = (0, 1)
    q = bip[0] ** 2 + bip[1] ** 2

    builder = sdp.SdpBuilder([spec.side, q, q])
    builder.set_objective(blocks={1: -0.5 * np.eye(q), 2: -0.5 * np.eye(q)})
    marginal_rows(spec, builder)

    m2 = bip[0] ** 2

    def adjoint_rows(basis_op):
        qblk = np.asarray(basis_op)[:m2, m2:]
        w = herm_part(2.0 * realign_adj(qblk, bip))
        w = reorder_subsystems(w, bip, reorder) if reorder != (0, 1) else w
        return sdp.svec(embed_op(w, target, spec.dims))

    _tracenorm_blocks(builder, 0, 1, 2, adjoint_rows, q)
    sol = _solve(builder.build(), opts)
    return _finish(spec, sol, "ccnr", -sol.primal_objective, None, {"cut": cut_local})


def _min_trace_norm_pt(spec, target, opts):
    """min over compatible states of (1/3) sum_k ||PT_k(rho_T)||_1."""
    target = _target_sites(spec, target)
    tdims = tuple(spec.dims[i] for i in target)
    m = prod(tdims)
    builder = sdp.SdpBuilder([spec.side] + [m] * 6)
    # ||H||_1 = tr(P) + tr(N) at the optimal Hermitian split H = P - N
    builder.set_objective(
        blocks={j: -np.eye(m) / 3.0 for j in range(1, 7)}
    )
    marginal_rows(spec, builder)
    for k in range(3):

        def adjoint_rows(basis_op, k=k):
            w = ptranspose(basis_op, tdims, (k,))
            return sdp.svec(embed_op(w, target, spec.dims))

        _tracenorm_blocks(builder, 0, 1 + 2 * k, 2 + 2 * k, adjoint_rows, m)
    sol = _solve(builder.build(), opts)
    return sol, -sol.primal_objective


def _min_trace_norm_realign(spec, target, opts):
    """min over compatible states of (1/3) sum_k ||realign_k(rho_T)||_1,
    realigning each party against the other two."""
    target = _target_sites(spec, target)
    tdims = tuple(spec.dims[i] for i in target)
    sides = []
    bips = []
    orders = []
    for k in range(3):
        rest = [i for i in range(3) if i != k]
        order = [k] + rest
        da = tdims[k]
        db = prod(tdims[i] for i in rest)
        bips.append((da, db))
        orders.append(order)
        sides.append(da * da + db * db)
    builder = sdp.SdpBuilder([spec.side] + [s for s in sides for _ in (0, 1)])
    # ||M||_1 = (tr Omega+ + tr Omega-)/2 at the optimal split of
    # [[0, M], [M^dag, 0]], whose eigenvalues are +-(singular values)
    builder.set_objective(
        blocks={1 + i: -np.eye(sides[i // 2]) / 6.0 for i in range(6)}
    )
    marginal_rows(spec, builder)
    for k in range(3):
        da, db = bips[k]
        m2 = da * da
        inv = list(np.argsort(orders[k]))

        def adjoint_rows(basis_op, k=k, da=da, db=db, m2=m2, inv=inv):
            qblk = np.asarray(basis_op)[:m2, m2:]
            w = herm_part(2.0 * realign_adj(qblk, (da, db)))
            w = reorder_subsystems(w, tuple(tdims[i] for i in orders[k]), inv)
            return sdp.svec(embed_op(w, target, spec.dims))

        _tracenorm_blocks(builder, 0, 1 + 2 * k, 2 + 2 * k, adjoint_rows, sides[k])
    sol = _solve(builder.build(), opts)
    return sol, -sol.primal_objective


def gme_minmax(spec, target, opts=None):
    """Certify genuine tripartite entanglement of a 3-party target.

    Minimizes the PT trace-norm average M and the realignment trace-norm
    average N separately over compatible joint states; the certificate
    value max(min M, min N) exceeds (1+2d)/3 only if every compatible
    target marginal is genuinely multipartite entangled.
    """
    target = check_sites(target, spec.n_parties)
    tdims = tuple(spec.dims[i] for i in target)
    if len(tdims) != 3 or len(set(tdims)) != 1:
        raise ValueError("GME criterion needs three equal-dimension target parties")
    d = tdims[0]
    sol_m, min_m = _min_trace_norm_pt(spec, target, opts)
    sol_n, min_n = _min_trace_norm_realign(spec, target, opts)
    sol = sol_m if min_m >= min_n else sol_n
    extra = {"min_m": min_m, "min_n": min_n, "bound": (1 + 2 * d) / 3.0}
    return _finish(spec, sol, "gme_mn", max(min_m, min_n), None, extra)


def min_fidelity(spec, psi, opts=None):
    """Minimize <psi|rho|psi> over compatible joint states.

    A value of 1 (within tolerance) certifies that |psi><psi| is the only
    compatible global state.
    """
    psi = np.asarray(psi).reshape(-1)
    if psi.size != spec.side:
        raise ValueError("candidate state has the wrong dimension")
    builder = sdp.SdpBuilder([spec.side])
    builder.set_objective(blocks={0: -dm(psi)})
    marginal_rows(spec, builder)
    sol = _solve(builder.build(), opts)
    return _finish(spec, sol, "uniqueness", -sol.primal_objective)


# ---------------------------------------------------------------------------
# flags and verdicts


def marginal_flag(sigma, ccnr_check=True):
    """Classify a bipartite state: entangled (NPT, or PPT with realignment
    trace norm > 1), separable (PPT on 2x2 / 2x3), else ppt_undecided."""
    if len(sigma.dims) != 2:
        raise ValueError("marginal flag needs a bipartite state")
    pt = ptranspose(sigma.mat, sigma.dims, (1,))
    if min_eig(pt) < -TOL_PSD:
        return FLAG_ENTANGLED
    if sorted(sigma.dims) in ([2, 2], [2, 3]):
        return FLAG_SEPARABLE
    if ccnr_check and trace_norm(realign(sigma.mat, sigma.dims)) > 1.0 + TOL_PSD:
        return FLAG_ENTANGLED
    return FLAG_UNDECIDED


def is_npt(sigma):
    """True when the partial transpose has an eigenvalue below -TOL_PSD."""
    return min_eig(ptranspose(sigma.mat, sigma.dims, (1,))) < -TOL_PSD


def verdict(spec, target, eps_cert=EPS_CERT, opts=None, ccnr_fallback=True):
    """Full (meta)transitivity verdict for a two-party target.

    Runs marginal_flag on every input, lambda_star on the target, and a
    min_ccnr fallback when the PPT route fails on a target large enough
    that PPT does not imply separability.
    """
    target = _target_sites(spec, target)
    flags = [marginal_flag(sigma) for _, sigma in spec.constraints]
    cert = lambda_star(spec, target, opts=opts)
    certified = cert.value < -eps_cert
    tdims = sorted(spec.dims[i] for i in target)
    if (
        not certified
        and ccnr_fallback
        and len(tdims) == 2
        and tdims not in ([2, 2], [2, 3])
    ):
        # the PPT optimum leaves a PPT-compatible target; the realignment
        # witness can still certify it on larger targets
        ccnr_cert = min_ccnr(spec, target, opts=opts)
        if ccnr_cert.value > 1.0 + eps_cert:
            cert = ccnr_cert
            certified = True
    if not certified:
        outcome = OUTCOME_NOT_CERTIFIED
    elif all(f == FLAG_ENTANGLED for f in flags):
        outcome = OUTCOME_TRANSITIVITY
    else:
        outcome = OUTCOME_METATRANSITIVITY
    return TransitivityVerdict(target, flags, outcome, cert)
