"""Dense semidefinite programming by operator splitting with a KKT polish.

Problems are stated over Hermitian PSD blocks X_1..X_m plus free real
scalars y:

    maximize   sum_j <C_j, X_j> + c_s . y
    subject to sum_j <F_kj, X_j> + g_k . y = b_k   (k = 1..K),  X_j >= 0.

Everything is carried in real "svec" coordinates: a Hermitian n x n matrix
maps isometrically to an n^2 real vector (diagonal, then sqrt(2) * real and
sqrt(2) * imaginary upper-triangle parts), so <H1, H2> = svec(H1).svec(H2)
and all constraint data is real.

The solver alternates projections onto the affine subspace {Ax=b} and the
product cone (PSD blocks x free scalars) with dual updates and
over-relaxation 1.5, then finishes with a polish step that re-solves the
KKT equations on the detected active eigenspace; the polish is accepted
only when it certifies itself (primal/dual feasibility and gap all within
tolerance), so a returned "optimal" is backed by a genuine dual bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iterations"
NUMERICAL_TROUBLE = "numerical_trouble"

# Residual levels a solution must reach to be labeled optimal.
OPT_RESID = 1e-7
OPT_GAP = 1e-6

# Infeasibility stall heuristic: primal residual pinned above this level
# with no relative progress over a full window.
STALL_LEVEL = 1e-5
STALL_WINDOW = 5000


def svec_len(n):
    return n * n


def svec(h):
    """Isometric real coordinates of a Hermitian matrix."""
    h = np.asarray(h)
    n = h.shape[0]
    iu = np.triu_indices(n, 1)
    off = h[iu]
    return np.concatenate(
        [h.diagonal().real, np.sqrt(2.0) * off.real, np.sqrt(2.0) * off.imag]
    )


def unsvec(v, n):
    """Inverse of svec."""
    v = np.asarray(v, dtype=float)
    iu = np.triu_indices(n, 1)
    k = iu[0].size
    h = np.zeros((n, n), dtype=complex)
    h[np.diag_indices(n)] = v[:n]
    h[iu] = (v[n : n + k] + 1j * v[n + k :]) / np.sqrt(2.0)
    h += np.tril(h.conj().T, -1)
    return h


def herm_basis(n):
    """Orthonormal Hermitian basis in svec coordinate order."""
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        yield e
    iu = np.triu_indices(n, 1)
    for i, j in zip(*iu):
        e = np.zeros((n, n), dtype=complex)
        e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
        yield e
    for i, j in zip(*iu):
        e = np.zeros((n, n), dtype=complex)
        e[i, j] = 1j / np.sqrt(2.0)
        e[j, i] = -1j / np.sqrt(2.0)
        yield e


def psd_project(h):
    """Projection onto the PSD cone by eigenvalue clipping; idempotent."""
    h = np.asarray(h)
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    wc = np.clip(w, 0.0, None)
    return (v * wc) @ v.conj().T


@dataclass
class SdpProblem:
    """Conic problem data in svec coordinates (maximization convention)."""

    block_sides: tuple
    n_scalars: int
    a: np.ndarray = field(repr=False)  # K x N
    b: np.ndarray = field(repr=False)  # K
    c: np.ndarray = field(repr=False)  # N

    def __post_init__(self):
        self.block_sides = tuple(int(s) for s in self.block_sides)
        self.a = np.ascontiguousarray(self.a, dtype=float)
        self.b = np.ascontiguousarray(self.b, dtype=float)
        self.c = np.ascontiguousarray(self.c, dtype=float)
        n = sum(s * s for s in self.block_sides) + self.n_scalars
        if self.a.shape != (self.b.size, n) or self.c.size != n:
            raise ValueError("inconsistent SDP data shapes")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(self.c))):
            raise ValueError("non-finite SDP data")

    @property
    def n_vars(self):
        return self.c.size

    def block_slices(self):
        out = []
        pos = 0
        for s in self.block_sides:
            out.append(slice(pos, pos + s * s))
            pos += s * s
        return out, slice(pos, pos + self.n_scalars)


class SdpBuilder:
    """Incremental assembly of an SdpProblem.

    Constraint functionals are supplied as Hermitian matrices per block plus
    scalar coefficients; rows pre-expressed in svec coordinates can be added
    in bulk with add_rows.
    """

    def __init__(self, block_sides, n_scalars=0):
        self.block_sides = tuple(int(s) for s in block_sides)
        self.n_scalars = int(n_scalars)
        self._offsets = []
        pos = 0
        for s in self.block_sides:
            self._offsets.append(pos)
            pos += s * s
        self._scalar_off = pos
        self.n_vars = pos + self.n_scalars
        self._c = np.zeros(self.n_vars)
        self._rows = []
        self._rhs = []

    def _fill(self, vec, blocks=None, scalars=None):
        for j, h in (blocks or {}).items():
            s = self.block_sides[j]
            vec[self._offsets[j] : self._offsets[j] + s * s] = svec(h)
        for k, coef in (scalars or {}).items():
            vec[self._scalar_off + k] = coef
        return vec

    def set_objective(self, blocks=None, scalars=None):
        self._c = self._fill(np.zeros(self.n_vars), blocks, scalars)

    def add_constraint(self, blocks=None, scalars=None, rhs=0.0):
        self._rows.append(self._fill(np.zeros(self.n_vars), blocks, scalars))
        self._rhs.append(float(rhs))

    def add_rows(self, rows, rhs):
        rows = np.asarray(rows, dtype=float)
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        if rows.shape != (rhs.size, self.n_vars):
            raise ValueError("bulk rows have wrong width")
        self._rows.extend(rows)
        self._rhs.extend(rhs.tolist())

    def block_rows(self, j, rows):
        """Expand rows given on block j's svec coordinates to full width."""
        rows = np.asarray(rows, dtype=float)
        s = self.block_sides[j]
        out = np.zeros((rows.shape[0], self.n_vars))
        out[:, self._offsets[j] : self._offsets[j] + s * s] = rows
        return out

    def build(self):
        a = np.vstack(self._rows) if self._rows else np.zeros((0, self.n_vars))
        return SdpProblem(self.block_sides, self.n_scalars, a,
                          np.array(self._rhs, dtype=float), self._c)


@dataclass
class SdpSolution:
    status: str
    blocks: list
    scalars: np.ndarray
    duals: np.ndarray  # one multiplier per constraint row
    primal_objective: float
    dual_objective: float
    residuals: tuple  # (primal, dual, gap)
    iterations: int
    polished: bool = False

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Cone:
    """Projection onto (PSD blocks) x (free scalars) in svec coordinates."""

    def __init__(self, problem):
        self.sides = problem.block_sides
        self.block_sl, self.scalar_sl = problem.block_slices()

    def project(self, x):
        out = x.copy()
        for s, sl in zip(self.sides, self.block_sl):
            out[sl] = svec(psd_project(unsvec(x[sl], s)))
        return out

    def min_eigs(self, x):
        return [
            float(np.linalg.eigvalsh(unsvec(x[sl], s))[0]) if s else 0.0
            for s, sl in zip(self.sides, self.block_sl)
        ]

    def blocks(self, x):
        return [unsvec(x[sl], s) for s, sl in zip(self.sides, self.block_sl)]


def _face_isometry(side, vecs):
    """Columns: svec(V E_a V^dag) for the reduced Hermitian basis E_a."""
    r = vecs.shape[1]
    cols = np.empty((side * side, r * r))
    for a, e in enumerate(herm_basis(r)):
        cols[:, a] = svec(vecs @ e @ vecs.conj().T)
    return cols


def _polish(problem, cone, z, y, ranks_list):
    """Re-solve the KKT system on candidate active faces.

    For each candidate per-block rank assignment, restrict the primal to
    X_j = V_j G_j V_j^dag (V_j spanning the detected positive eigenspace),
    solve the affine system for G anchored at the current iterate, solve
    the compressed dual equations for y, and keep the candidate iff the
    full KKT residuals certify it.
    """
    eigs = []
    for s, sl in zip(cone.sides, cone.block_sl):
        w, v = np.linalg.eigh(unsvec(z[sl], s))
        eigs.append((w, v))

    best = None
    for ranks in ranks_list:
        ts = []
        for (w, v), s, r in zip(eigs, cone.sides, ranks):
            vecs = v[:, ::-1][:, :r]  # top-r eigenvectors
            ts.append((vecs, _face_isometry(s, vecs) if r else
                       np.zeros((s * s, 0))))
        n_red = sum(t.shape[1] for _, t in ts) + problem.n_scalars
        t_full = np.zeros((problem.n_vars, n_red))
        pos = 0
        for (_, t), sl in zip(ts, cone.block_sl):
            t_full[sl, pos : pos + t.shape[1]] = t
            pos += t.shape[1]
        t_full[cone.scalar_sl, pos:] = np.eye(problem.n_scalars)

        a_red = problem.a @ t_full
        c_red = t_full.T @ problem.c

        # primal: solve A_red g = b anchored at the current iterate
        g0 = t_full.T @ z
        dg = np.linalg.lstsq(a_red, problem.b - a_red @ g0, rcond=None)[0]
        x_pol = t_full @ (g0 + dg)
        # dual: A_red^T y = c_red anchored at current duals
        dy = np.linalg.lstsq(a_red.T, c_red - a_red.T @ y, rcond=None)[0]
        y_pol = y + dy

        s_vec = problem.a.T @ y_pol - problem.c
        b_scale = 1.0 + np.linalg.norm(problem.b)
        c_scale = 1.0 + np.linalg.norm(problem.c)
        r_prim = np.linalg.norm(problem.a @ x_pol - problem.b) / b_scale
        r_prim = max(r_prim, max((-e for e in cone.min_eigs(x_pol)), default=0.0))
        r_dual = np.linalg.norm(t_full.T @ s_vec) / c_scale
        r_dual = max(r_dual, max((-e for e in cone.min_eigs(s_vec)), default=0.0))
        if problem.n_scalars:
            r_dual = max(r_dual, np.abs(s_vec[cone.scalar_sl]).max() / c_scale)
        pobj = float(problem.c @ x_pol)
        dobj = float(problem.b @ y_pol)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        score = max(r_prim, r_dual, gap)
        if best is None or score < best[0]:
            best = (score, x_pol, y_pol, (r_prim, r_dual, gap), pobj, dobj)
    return best


def _rank_candidates(cone, z):
    """Candidate per-block active ranks: threshold cuts and the largest
    spectral log-gap."""
    per_block = []
    for s, sl in zip(cone.sides, cone.block_sl):
        w = np.linalg.eigvalsh(unsvec(z[sl], s))[::-1]  # descending
        top = max(w[0], 0.0) if s else 0.0
        opts = set()
        for cut in (1e-4, 1e-6, 1e-8):
            opts.add(int(np.sum(w > max(cut * max(top, 1.0), 1e-12))))
        pos = w[w > 1e-13]
        if pos.size >= 2:
            gaps = np.diff(np.log(pos))
            k = int(np.argmin(gaps))  # most negative = biggest drop
            if gaps[k] < -2.0:
                opts.add(k + 1)
        per_block.append(sorted(opts))
    # combine: primary choice per block, then vary one block at a time
    primary = tuple(o[0] if o else 0 for o in per_block)
    cands = [primary]
    for j, opts in enumerate(per_block):
        for o in opts[1:]:
            c = list(primary)
            c[j] = o
            cands.append(tuple(c))
    seen, out = set(), []
    for c in cands:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out[:6]


def solve(problem, tol=1e-8, max_iters=200_000, rho=1.0, over_relax=1.5,
          check_every=50, polish=True, anderson_memory=10, log=None):
    """Solve an SdpProblem; deterministic for identical inputs and options.

    The iteration is over-relaxed Douglas-Rachford splitting between the
    affine subspace (tilted by the objective) and the product cone, sped
    up by safeguarded Anderson acceleration of the fixed-point map.

    Returns SdpSolution.  Status is `optimal` only when primal/dual
    residuals are <= 1e-7 and the relative gap <= 1e-6; `infeasible` when
    the affine system is inconsistent or the cone/affine distance stalls
    above 1e-5 for a full window; `max_iterations` when the budget runs
    out first.

    log, if given, is called as log(iteration, r_prim, r_dual, gap,
    objective) at every residual check (CSV-friendly positional fields).
    """
    cone = _Cone(problem)
    a, b, c = problem.a, problem.b, problem.c
    k, n = a.shape

    # row normalization (pure rescaling of multipliers, undone at the end)
    row_norms = np.linalg.norm(a, axis=1) if k else np.zeros(0)
    if k and (row_norms <= 0).any():
        bad = np.where(row_norms <= 0)[0]
        if np.abs(b[bad]).max(initial=0.0) > 1e-12:
            return _empty_solution(problem, cone, INFEASIBLE)
        keep = row_norms > 0
        a, b, row_norms = a[keep], b[keep], row_norms[keep]
        k = a.shape[0]
    d = 1.0 / row_norms if k else row_norms
    a_s = a * d[:, None]
    b_s = b * d

    b_scale = 1.0 + np.linalg.norm(b_s)
    c_scale = 1.0 + np.linalg.norm(c)

    if k:
        aat = a_s @ a_s.T
        ew, ev = np.linalg.eigh(aat)
        cut = ew.max() * 1e-13 if ew.size else 0.0
        inv_ew = np.where(ew > cut, 1.0 / np.maximum(ew, 1e-300), 0.0)

        def aff_dual(r):
            return ev @ (inv_ew * (ev.T @ r))

        # least-squares feasibility of the affine system itself
        x_ls = a_s.T @ aff_dual(b_s)
        lin_gap = np.linalg.norm(a_s @ x_ls - b_s) / b_scale
        if lin_gap > 1e-7:
            return _empty_solution(problem, cone, INFEASIBLE)
    else:
        x_ls = np.zeros(n)

        def aff_dual(r):
            return r

    def step(s_cur):
        """One splitting step from the Douglas-Rachford variable."""
        w0 = s_cur + c / rho
        if k:
            nu = aff_dual(a_s @ w0 - b_s)
            x = w0 - a_s.T @ nu
        else:
            nu = np.zeros(0)
            x = w0
        z = cone.project(2.0 * x - s_cur)
        return s_cur + over_relax * (z - x), x, z, nu

    s = cone.project(x_ls)
    g_s, x, z, nu = step(s)
    hist_s, hist_g = [], []
    aa_rejects = 0

    best_resid = np.inf
    stall_cur = np.inf
    stall_prev = np.inf
    stall_span_start = 0
    next_polish_at = 1e-3
    last_polish_it = 0
    rho_moves = 0
    it = 0
    status = MAX_ITERATIONS
    accepted = None

    while it < max_iters:
        it += 1
        g = g_s - s
        took_aa = False
        if anderson_memory > 1:
            hist_s.append(s)
            hist_g.append(g)
            if len(hist_s) > anderson_memory:
                hist_s.pop(0)
                hist_g.pop(0)
            if len(hist_s) >= 2:
                gm = np.stack(hist_g, axis=1)
                dgm = gm[:, 1:] - gm[:, :-1]
                gam = np.linalg.lstsq(dgm, g, rcond=None)[0]
                fm = np.stack(hist_s, axis=1) + gm  # G(s_i)
                s_acc = fm[:, -1] - (fm[:, 1:] - fm[:, :-1]) @ gam
                g_acc, x_acc, z_acc, nu_acc = step(s_acc)
                if np.linalg.norm(g_acc - s_acc) <= np.linalg.norm(g):
                    s, g_s, x, z, nu = s_acc, g_acc, x_acc, z_acc, nu_acc
                    took_aa = True
                    aa_rejects = 0
                else:
                    aa_rejects += 1
                    if aa_rejects >= 3:
                        hist_s.clear()
                        hist_g.clear()
                        aa_rejects = 0
        if not took_aa:
            s = g_s
            g_s, x, z, nu = step(s)

        if it % check_every and it != max_iters:
            continue

        y = rho * nu
        r_p = np.linalg.norm(a_s @ z - b_s) / b_scale
        r_d = rho * np.linalg.norm(x - z) / c_scale
        pobj = float(c @ z)
        dobj = float(b_s @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if log is not None:
            log(it, r_p, r_d, gap, pobj)
        if not (np.isfinite(r_p) and np.isfinite(r_d) and np.isfinite(pobj)):
            status = NUMERICAL_TROUBLE
            break
        resid = max(r_p, r_d, gap)
        best_resid = min(best_resid, resid)

        # infeasibility stall heuristic: when the two sets do not meet, the
        # fixed-point step g converges to a nonzero displacement instead
        # of vanishing; compare windowed minima so acceleration jitter
        # cannot mask the stall
        stall_cur = min(stall_cur, np.linalg.norm(g_s - s))
        if it - stall_span_start >= STALL_WINDOW:
            if (
                stall_cur >= stall_prev * 0.99
                and stall_cur > STALL_LEVEL
                and r_p > STALL_LEVEL
            ):
                status = INFEASIBLE
                break
            stall_prev = stall_cur
            stall_cur = np.inf
            stall_span_start = it

        want_polish = resid <= next_polish_at or resid <= tol or (
            resid <= 1e-2 and it - last_polish_it >= 5000
        )
        if polish and want_polish:
            next_polish_at = resid / 4.0
            last_polish_it = it
            cand = _polish(problem, cone, z, d * y if k else y,
                           _rank_candidates(cone, z))
            if cand is not None:
                score = cand[0]
                if score <= max(tol, 1e-9) and score <= resid:
                    accepted = cand
                    status = OPTIMAL
                    break
        if resid <= tol:
            status = OPTIMAL
            break

        # adaptive penalty: balance the residuals; the fixed-point map
        # changes, so remap s = z - u with the rescaled multiplier and
        # restart the acceleration history.  Capped: on infeasible
        # problems the imbalance never resolves and endless rescaling
        # would mask the stalled step detector.
        scale = None
        if rho_moves < 20:
            if r_p > 10 * r_d and rho < 1e6:
                scale = 2.0
            elif r_d > 10 * r_p and rho > 1e-6:
                scale = 0.5
        if scale is not None:
            rho_moves += 1
            s = z - (z - s) / scale
            rho *= scale
            hist_s.clear()
            hist_g.clear()
            stall_cur = np.inf
            stall_prev = np.inf
            stall_span_start = it
            g_s, x, z, nu = step(s)

    y = rho * nu
    if accepted is not None:
        _, x_fin, y_fin, resids, pobj, dobj = accepted
        blocks = cone.blocks(x_fin)
        scalars = x_fin[cone.scalar_sl].copy()
        polished = True
    else:
        r_p = np.linalg.norm(a_s @ z - b_s) / b_scale
        r_d = rho * np.linalg.norm(x - z) / c_scale
        pobj = float(c @ z)
        dobj = float(b_s @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        resids = (r_p, r_d, gap)
        y_fin = d * y if k else y
        blocks = cone.blocks(z)
        scalars = z[cone.scalar_sl].copy()
        polished = False
        if status == OPTIMAL and not (
            resids[0] <= OPT_RESID and resids[1] <= OPT_RESID
            and resids[2] <= OPT_GAP
        ):
            status = MAX_ITERATIONS

    if status == OPTIMAL and not (np.isfinite(pobj) and np.isfinite(dobj)):
        status = NUMERICAL_TROUBLE

    return SdpSolution(
        status=status,
        blocks=blocks,
        scalars=scalars,
        duals=y_fin,
        primal_objective=pobj,
        dual_objective=dobj,
        residuals=tuple(float(r) for r in resids),
        iterations=it,
        polished=polished,
    )


def _empty_solution(problem, cone, status):
    blocks = [np.zeros((s, s), dtype=complex) for s in problem.block_sides]
    return SdpSolution(
        status=status,
        blocks=blocks,
        scalars=np.zeros(problem.n_scalars),
        duals=np.zeros(problem.b.size),
        primal_objective=np.nan,
        dual_objective=np.nan,
        residuals=(np.inf, np.inf, np.inf),
        iterations=0,
    )
