"""Closed-form compatibility and (meta)transitivity geometry.

Werner-pair geometry (symmetric-subspace weights v in [0,1], entangled iff
v < 1/2): a triple (v_AB, v_AC, v_BC) is compatible iff it lies in the
bicone f >= g and 3 - f >= g with f the coordinate sum and
g = sqrt(3 (v_AC - v_AB)^2 + (2 v_BC - v_AB - v_AC)^2).  For qubits only
the nappe generated by the minus-sign cone survives, which adds f >= 3/2.
Squaring the two cone inequalities gives the v_BC windows

    [v_BC - (v_AB + v_AC)]^2        <= 4 v_AB v_AC,
    [(v_BC + 1) - (v_AB + v_AC)]^2  <= 4 (1 - v_AB)(1 - v_AC),

whose upper roots produce the largest compatible v_BC; the level set
max v_BC = 1/2 traces the two boundary parabolas
(v_AB + v_AC - 1/2)^2 = 4 v_AB v_AC and its mirror image along
v_AB + v_AC = 1, equivalently (v_AB - v_AC - 1/2)^2 = 2 (1 - v_AB).

Isotropic-pair geometry (fully entangled fractions p, entangled iff
p > 1/d): with P = d (p_AB + p_AC) and V = 2 v_BC - 2, a (p_AB, p_AC,
v_BC) point is compatible iff [P + (d-1) V]^2 <= 4 d^2 p_AB p_AC together
with the linear bound p_AB + p_AC - (2 v_BC - 1)/d <= 1 (all inside the
convex hull with the v_BC = 0 point, which never raises the maximal
v_BC).  The max v_BC = 1/2 boundary is the parabola
4 p_AB p_AC = (p_AB + p_AC - 1 + 1/d)^2.

Pair compatibility is the convex hull of the stated vertex points and a
quadratic-form ellipse; membership is decided exactly via the ellipse
sign test plus tangent-ray tests from each hull vertex (no sampling).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

INCOMPATIBLE = "incompatible"
TRANSITIVITY = "transitivity"
METATRANSITIVITY = "metatransitivity"
NO_TRANSITIVITY = "no_transitivity_certifiable"

REGION_LABEL_CODES = {
    INCOMPATIBLE: 0,
    TRANSITIVITY: 1,
    METATRANSITIVITY: 2,
    NO_TRANSITIVITY: 3,
}

_EPS = 1e-12


@dataclass(frozen=True)
class RegionVerdict:
    label: str
    max_v_bc: float | None
    marginal_entanglement: tuple  # (bool, bool)

    @property
    def code(self):
        return REGION_LABEL_CODES[self.label]


def _check_unit(*values):
    for v in values:
        if not -_EPS <= v <= 1 + _EPS:
            raise ValueError("parameters must lie in [0, 1]")


def _check_d(d):
    if d < 2:
        raise ValueError("local dimension must be >= 2")


# ---------------------------------------------------------------------------
# Werner triples and pairs


def werner_triple_compatible(d, v_ab, v_ac, v_bc):
    """Exact bicone membership; for d = 2 only the minus-sign nappe."""
    _check_d(d)
    _check_unit(v_ab, v_ac, v_bc)
    f = v_ab + v_ac + v_bc
    g = sqrt(3 * (v_ac - v_ab) ** 2 + (2 * v_bc - v_ab - v_ac) ** 2)
    minus = 3.0 - f >= g - _EPS
    if d == 2:
        return minus and f >= 1.5 - _EPS
    return minus and f >= g - _EPS


def _werner_vbc_window(d, v_ab, v_ac):
    """Feasible [lo, hi] interval of v_BC, or None when empty."""
    s = v_ab + v_ac
    r2 = 2.0 * sqrt(max((1.0 - v_ab) * (1.0 - v_ac), 0.0))
    lo2, hi2 = s - 1.0 - r2, s - 1.0 + r2
    if d == 2:
        lo, hi = max(lo2, 1.5 - s, 0.0), min(hi2, 1.0)
    else:
        r1 = 2.0 * sqrt(max(v_ab * v_ac, 0.0))
        lo, hi = max(s - r1, lo2, 0.0), min(s + r1, hi2, 1.0)
    if lo > hi + 1e-11:
        return None
    return lo, min(hi, 1.0)


def _ellipse_q_werner(v_ab, v_ac):
    return (v_ab + v_ac - 1.0) ** 2 + (v_ab - v_ac) ** 2 / 3.0


def _in_vertex_cone(qform, level, vertex, point):
    """Tangent-ray test: some point vertex + s*(p - vertex), s >= 1, lies in
    the ellipse {qform <= level}."""
    dx, dy = point[0] - vertex[0], point[1] - vertex[1]
    if dx == 0.0 and dy == 0.0:
        return True
    q0 = qform(*vertex)
    q1 = qform(vertex[0] + dx, vertex[1] + dy)
    q2 = qform(vertex[0] + 2 * dx, vertex[1] + 2 * dy)
    # quadratic q(s) = a s^2 + b s + c through s = 0, 1, 2
    c = q0
    a = (q2 - 2 * q1 + q0) / 2.0
    b = q1 - q0 - a
    s = 1.0 if a <= 0 else max(1.0, -b / (2 * a))
    return a * s * s + b * s + c <= level + _EPS


def werner_pair_compatible(d, v_ab, v_ac):
    """Membership in the convex hull of (1,1) (plus (0,0) when d >= 3) and
    the ellipse (v_AB + v_AC - 1)^2 + (v_AB - v_AC)^2 / 3 <= 1/4."""
    _check_d(d)
    _check_unit(v_ab, v_ac)
    p = (v_ab, v_ac)
    if _ellipse_q_werner(*p) <= 0.25 + _EPS:
        return True
    if _in_vertex_cone(_ellipse_q_werner, 0.25, (1.0, 1.0), p):
        return True
    if d >= 3 and _in_vertex_cone(_ellipse_q_werner, 0.25, (0.0, 0.0), p):
        return True
    return False


def werner_max_vbc(d, v_ab, v_ac):
    """Largest Werner weight v_BC compatible with the given pair, or None
    when the pair is incompatible."""
    _check_d(d)
    _check_unit(v_ab, v_ac)
    window = _werner_vbc_window(d, v_ab, v_ac)
    if window is None:
        return None
    return window[1]


def werner_classify(d, v_ab, v_ac):
    """Region label for a Werner marginal pair."""
    mx = werner_max_vbc(d, v_ab, v_ac)
    ent = (v_ab < 0.5, v_ac < 0.5)
    if mx is None:
        return RegionVerdict(INCOMPATIBLE, None, ent)
    if mx >= 0.5:
        # some compatible joint state has a separable (twirled) BC marginal
        return RegionVerdict(NO_TRANSITIVITY, mx, ent)
    label = TRANSITIVITY if all(ent) else METATRANSITIVITY
    return RegionVerdict(label, mx, ent)


# ---------------------------------------------------------------------------
# isotropic pairs


def _ellipse_q_isotropic(d):
    def q(p_ab, p_ac):
        return (p_ab + p_ac - 1.0) ** 2 + (p_ab - p_ac) ** 2 / (d * d - 1.0)

    return q


def isotropic_pair_compatible(d, p_ab, p_ac):
    """Membership in the convex hull of the origin and the ellipse
    (p_AB + p_AC - 1)^2 + (p_AB - p_AC)^2/(d^2-1) <= 1/d^2."""
    _check_d(d)
    _check_unit(p_ab, p_ac)
    q = _ellipse_q_isotropic(d)
    level = 1.0 / (d * d)
    p = (p_ab, p_ac)
    return q(*p) <= level + _EPS or _in_vertex_cone(q, level, (0.0, 0.0), p)


def _isotropic_vbc_window(d, p_ab, p_ac):
    big_p = d * (p_ab + p_ac)
    root = 2.0 * d * sqrt(max(p_ab * p_ac, 0.0))
    v_up = (-big_p + root) / (d - 1.0)
    v_lo = (-big_p - root) / (d - 1.0)
    hi = min(1.0 + v_up / 2.0, 1.0)
    lo = max(1.0 + v_lo / 2.0, 1.0 + (big_p - d - 1.0) / 2.0, 0.0)
    if lo > hi + 1e-11:
        return None
    return lo, hi


def isotropic_max_vbc(d, p_ab, p_ac):
    """Largest BC Werner weight compatible with two isotropic marginals,
    or None when the pair is incompatible.

    The hull point at v_BC = 0 only ever lowers v_BC, so the maximum comes
    from the cone's upper root V = (-P + 2 d sqrt(p_AB p_AC))/(d-1) mapped
    through v_BC = 1 + V/2, floored by the linear bound.
    """
    _check_d(d)
    _check_unit(p_ab, p_ac)
    window = _isotropic_vbc_window(d, p_ab, p_ac)
    if window is None:
        return None
    return window[1]


def isotropic_classify(d, p_ab, p_ac):
    """Region label for an isotropic marginal pair (entangled iff p > 1/d)."""
    mx = isotropic_max_vbc(d, p_ab, p_ac)
    ent = (p_ab > 1.0 / d, p_ac > 1.0 / d)
    if mx is None:
        return RegionVerdict(INCOMPATIBLE, None, ent)
    if mx >= 0.5:
        return RegionVerdict(NO_TRANSITIVITY, mx, ent)
    label = TRANSITIVITY if all(ent) else METATRANSITIVITY
    return RegionVerdict(label, mx, ent)


# ---------------------------------------------------------------------------
# boundary parabolas (the max v_BC = 1/2 level sets)


def werner_parabola_residuals(v_ab, v_ac):
    """Residuals of the two quoted boundary parabolas at a point:
    (v_AB + v_AC - 1/2)^2 - 4 v_AB v_AC and
    (v_AB - v_AC - 1/2)^2 - 2 (1 - v_AB)."""
    return (
        (v_ab + v_ac - 0.5) ** 2 - 4.0 * v_ab * v_ac,
        (v_ab - v_ac - 0.5) ** 2 - 2.0 * (1.0 - v_ab),
    )


def isotropic_parabola_residual(d, p_ab, p_ac):
    """Residual of 4 p_AB p_AC = (p_AB + p_AC - 1 + 1/d)^2."""
    return 4.0 * p_ab * p_ac - (p_ab + p_ac - 1.0 + 1.0 / d) ** 2


def werner_boundary_point(d, v_ab, branch):
    """Point (v_ab, v_ac) on the requested max-v_BC = 1/2 parabola.

    branch "lower": (v_AB + v_AC - 1/2)^2 = 4 v_AB v_AC with
    v_AB + v_AC <= 1/2; branch "upper": the mirrored parabola with
    v_AB + v_AC in [1, 3/2] so the point stays inside the compatible
    region for the requested d.
    """
    if branch == "lower":
        # solve (v_ab + x - 1/2)^2 = 4 v_ab x for x, root with s <= 1/2
        b = 2.0 * (v_ab - 0.5) - 4.0 * v_ab
        c = (v_ab - 0.5) ** 2
        disc = b * b - 4.0 * c
        x = (-b - sqrt(disc)) / 2.0
        return v_ab, x
    if branch == "upper":
        # solve (3/2 - v_ab - x)^2 = 4 (1-v_ab)(1-x), root with s <= 3/2
        u = 1.0 - v_ab
        b = 2.0 * (u - 0.5) - 4.0 * u
        c = (u - 0.5) ** 2
        disc = b * b - 4.0 * c
        x = (-b - sqrt(disc)) / 2.0
        return v_ab, 1.0 - x
    raise ValueError("branch must be 'lower' or 'upper'")


def isotropic_boundary_point(d, p_ab):
    """Point (p_ab, p_ac) on 4 p_AB p_AC = (p_AB + p_AC - 1 + 1/d)^2 on the
    branch with d (p_AB + p_AC) >= d - 1 (the metatransitivity-side root)."""
    k = 1.0 - 1.0 / d
    # (p_ab + x - k)^2 = 4 p_ab x
    b = 2.0 * (p_ab - k) - 4.0 * p_ab
    c = (p_ab - k) ** 2
    disc = b * b - 4.0 * c
    x = (-b - sqrt(disc)) / 2.0
    return p_ab, x


# ---------------------------------------------------------------------------
# rasterization


def region_grid(resolution):
    """Inclusive [0, 1] grid with `resolution` points per axis."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    return [i / (resolution - 1) for i in range(resolution)]


def werner_raster(d, resolution):
    """Rows (v_ab, v_ac, label_code, max_v_bc or '') over the grid."""
    grid = region_grid(resolution)
    for v_ab in grid:
        for v_ac in grid:
            verdict = werner_classify(d, v_ab, v_ac)
            yield v_ab, v_ac, verdict.code, verdict.max_v_bc


def isotropic_raster(d, resolution):
    grid = region_grid(resolution)
    for p_ab in grid:
        for p_ac in grid:
            verdict = isotropic_classify(d, p_ab, p_ac)
            yield p_ab, p_ac, verdict.code, verdict.max_v_bc
