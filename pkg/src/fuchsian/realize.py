"""Inverse realization: recover the convex Fuchsian polyhedron inducing a
given hyperbolic cone metric.

Damped Gauss-Newton in the chart coordinates, with homotopy continuation in
squared-edge-length space from the initial polyhedron's own metric to the
target; every intermediate blend must itself be a valid cone metric and
every accepted iterate a convex configuration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import conemetric as CM
from . import edgemap as EM
from . import groups as G
from . import polyhedra as P
from .errors import (CombinatoricsChange, DivergedStep, HomotopyBlocked,
                     FuchsianError)

DEFAULT_TOL = 1e-8
LAMBDA_MIN = 1e-12
LAMBDA_MAX = 1e3
STEP_FLOOR = 1e-6


@dataclass
class RealizationProblem:
    target: "CM.ConeMetricSurface"
    initial: "P.PolyhedronParams | None" = None
    tol: float = DEFAULT_TOL
    max_outer: int = 60
    max_inner: int = 30


@dataclass
class RealizationResult:
    params: "P.PolyhedronParams"
    residual: float
    iterations: int
    homotopy: list = field(default_factory=list)
    converged: bool = True


def default_initial(target, height=1.0, variant=0):
    """Convex starting polyhedron for the target's genus and vertex count.

    Z-V-C reference group, base points on a small grid at the polygon
    centroid, all heights equal (equal-height hulls are always convex).
    Variants rotate and scale the grid; the solver scans them when hunting
    for an initial whose hull matches the target combinatorics."""
    if target.cone_angles is None:
        CM.validate(target)
    n = target.n_cone_points
    genus = target.genus
    zvc = G.reference_zvc(genus)
    polygon = G.build_polygon(zvc, genus=genus)
    kc = G.klein2(polygon.centroid())
    scale = 0.045 * (1.0 + 0.35 * (variant % 4))
    ang = 0.4 * (variant // 4)
    rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    offsets = [rot @ np.array(o) for o in _grid_offsets(n, scale)]
    base = np.array([[kc[0] + du, kc[1] + dv] for du, dv in offsets])
    return P.PolyhedronParams(genus=genus, zvc=zvc, base_points=base,
                              heights=np.full(n, float(height)))


def _grid_offsets(n, h):
    cols = int(np.ceil(np.sqrt(n)))
    out = []
    for k in range(n):
        i, j = divmod(k, cols)
        out.append(((j - (cols - 1) / 2.0) * h, (i - (cols - 1) / 2.0) * h))
    return out


def metric_informed_initial(target, height=1.0, deficit_gain=0.0):
    """Starting polyhedron with base points trilaterated from the target.

    Plane separations of the cone points are estimated by inverting the
    equal-height chord law on the shortest inter-class edges; the points
    are laid out around the reference polygon centroid.  Pairs the
    triangulation never joins directly fall back to a default spacing.
    A nonzero deficit_gain tilts the heights along the standardized cone
    deficits (pointier vertices sit higher on equal-separation hulls)."""
    if target.cone_angles is None:
        CM.validate(target)
    n = target.n_cone_points
    genus = target.genus
    zvc = G.reference_zvc(genus)
    polygon = G.build_polygon(zvc, genus=genus)
    c2 = polygon.centroid()
    deficits = 2 * np.pi - target.cone_angles
    if n > 1 and deficit_gain != 0.0 and deficits.std() > 1e-12:
        heights = height + deficit_gain * (deficits - deficits.mean()) / deficits.std()
    else:
        heights = np.full(n, float(height))
    if n == 1:
        return P.PolyhedronParams(genus=genus, zvc=zvc,
                                  base_points=np.array([G.klein2(c2)]),
                                  heights=np.array([height]))

    best = {}
    for a, b in target.gluing:
        va, vb = target.slot_endpoints(a)
        if va == vb:
            continue
        i, j = min(va, vb), max(va, vb)
        L = target.slot_length(a)
        if (i, j) not in best or L < best[(i, j)]:
            best[(i, j)] = L

    def plane_sep(L):
        # invert arccosh(cosh^2 d cosh l - sinh^2 d) at d = height
        c = (np.cosh(L) + np.sinh(height) ** 2) / np.cosh(height) ** 2
        return float(np.arccosh(max(1.0, c)))

    sep = {k: plane_sep(v) for k, v in best.items()}
    fallback = 0.25
    pts2 = [c2]
    e1 = np.array([1.0, 0.0, 0.0])
    e1 = e1 + G.mink2(e1, c2) * c2
    e1 /= np.sqrt(G.mink2(e1, e1))
    if n >= 2:
        l01 = sep.get((0, 1), fallback)
        pts2.append(np.cosh(l01) * c2 + np.sinh(l01) * e1)
    if n >= 3:
        l01 = sep.get((0, 1), fallback)
        l02 = sep.get((0, 2), fallback)
        l12 = sep.get((1, 2), fallback)
        ca = (np.cosh(l01) * np.cosh(l02) - np.cosh(l12)) / (
            np.sinh(l01) * np.sinh(l02))
        alpha = float(np.arccos(np.clip(ca, -1.0, 1.0)))
        e2 = G.J3 @ np.cross(c2, e1)
        e2 /= np.sqrt(G.mink2(e2, e2))
        u = np.cos(alpha) * e1 + np.sin(alpha) * e2
        pts2.append(np.cosh(l02) * c2 + np.sinh(l02) * u)
    base = np.array([G.klein2(p) for p in pts2])
    base = base - base.mean(axis=0) + G.klein2(c2)
    return P.PolyhedronParams(genus=genus, zvc=zvc, base_points=base,
                              heights=heights)


# ---------------------------------------------------------------------------
# combinatorial alignment

def find_isomorphism(lab_from, lab_to):
    """Orientation-preserving isomorphism of labeled triangulations.

    Returns an edge-position permutation perm with
    aligned[p] = vector_from[perm[p]] expressing lab_from's canonical edge
    vector in lab_to's canonical order, or None."""
    if (len(lab_from.triangles) != len(lab_to.triangles)
            or len(lab_from.gluing) != len(lab_to.gluing)):
        return None
    f = len(lab_from.triangles)

    def partner(lab, slot):
        for a, b in lab.gluing:
            if a == slot:
                return b
            if b == slot:
                return a
        return None

    part_from = {}
    for a, b in lab_from.gluing:
        part_from[a] = b
        part_from[b] = a
    part_to = {}
    for a, b in lab_to.gluing:
        part_to[a] = b
        part_to[b] = a

    for t0 in range(f):
        for rho in range(3):
            tri_map = {0: (t0, rho)}
            vert_map = {}
            ok = True
            stack = [0]
            seen = {0}
            while stack and ok:
                t = stack.pop()
                tt, rr = tri_map[t]
                for s in range(3):
                    va = lab_from.triangles[t][s]
                    vb = lab_to.triangles[tt][(s + rr) % 3]
                    if vert_map.setdefault(va, vb) != vb:
                        ok = False
                        break
                    pa = part_from[(t, s)]
                    pb = part_to[(tt, (s + rr) % 3)]
                    u, r = pa
                    u2, r2 = pb
                    rot = (r2 - r) % 3
                    if u in tri_map:
                        if tri_map[u] != (u2, rot):
                            ok = False
                            break
                    else:
                        tri_map[u] = (u2, rot)
                        if u not in seen:
                            seen.add(u)
                            stack.append(u)
            if not ok or len(tri_map) != f:
                continue
            if len(set(v for _, v in tri_map.items())) != f:
                continue
            # edge permutation: lab_from canonical position -> lab_to position
            pos_to = {gi: p for p, gi in enumerate(lab_to.edge_order)}
            e_to_from = {}
            consistent = True
            for p_from, gi in enumerate(lab_from.edge_order):
                a, b = lab_from.gluing[gi]
                t, s = a
                tt, rr = tri_map[t]
                img = (tt, (s + rr) % 3)
                gi_to = None
                for gj, (aa, bb) in enumerate(lab_to.gluing):
                    if aa == img or bb == img:
                        gi_to = gj
                        break
                if gi_to is None:
                    consistent = False
                    break
                p_to = pos_to[gi_to]
                if p_to in e_to_from:
                    consistent = False
                    break
                e_to_from[p_to] = p_from
            if not consistent or len(e_to_from) != len(lab_from.edge_order):
                continue
            return np.array([e_to_from[p] for p in range(len(lab_from.edge_order))])
    return None


# ---------------------------------------------------------------------------

def _relative_residual(values, target):
    scale = np.maximum(np.abs(target), 1e-6)
    return float(np.max(np.abs(values - target) / scale))


def _blend_is_valid_metric(labeling, squared, genus):
    try:
        m = CM.metric_from_edge_vector(labeling, squared, genus=genus)
        CM.validate(m)
        return True
    except FuchsianError:
        return False


def solve(problem):
    """Follow the straight homotopy in squared-edge-length space.

    Levenberg-damped Gauss-Newton inner iterations; the blend step is halved
    whenever the blended vector stops being a valid cone metric
    (HomotopyBlocked at the floor) or the inner solve fails to converge
    (DivergedStep at the floor)."""
    target = problem.target
    if target.cone_angles is None:
        CM.validate(target)
    target_lab = CM.labeling_of(target)

    # alignment phase: the provided initial is used when its hull matches
    # the target combinatorics; otherwise the default-initial variants are
    # scanned for an aligned starting polyhedron
    candidates = []
    if problem.initial is not None:
        candidates.append(problem.initial)
    for gain in (0.0, 0.06, 0.12, -0.06, 0.18):
        try:
            candidates.append(metric_informed_initial(target, deficit_gain=gain))
        except FuchsianError:
            pass
    candidates.extend(default_initial(target, variant=v) for v in range(12))
    reference = perm = None
    for params in candidates:
        if params.zvc is None:
            raise CombinatoricsChange("the realizer needs a Z-V-C chart initial")
        try:
            ref_try = P.build(params)
        except FuchsianError:
            continue
        own_lab = CM.labeling_of(P.induced_metric(ref_try))
        perm_try = find_isomorphism(target_lab, own_lab)
        if perm_try is not None:
            reference, perm = ref_try, perm_try
            break
    if perm is None:
        raise CombinatoricsChange(
            "no starting polyhedron with the target combinatorics (tried "
            "the provided initial and the default-initial variants)")
    params = reference.params
    own_lab = CM.labeling_of(P.induced_metric(reference))
    v_target = CM.edge_vector(target)[perm]
    v0 = EM.evaluate(params, reference).values

    tol = problem.tol
    genus = params.genus
    record = []
    total_iter = 0

    t = 0.0
    step = 0.25
    vec = params.vector()
    J = None
    while t < 1.0:
        t_try = min(1.0, t + step)
        v_goal = (1.0 - t_try) * v0 + t_try * v_target
        if not _blend_is_valid_metric(own_lab, v_goal, genus):
            step *= 0.5
            if step < STEP_FLOOR:
                raise HomotopyBlocked(
                    f"blend at t = {t_try:.6f} is not a valid cone metric")
            continue

        ok, vec_new, iters, J = _gauss_newton(problem, reference, vec, v_goal, J)
        total_iter += iters
        if not ok:
            J = None
            step *= 0.5
            if step < STEP_FLOOR:
                raise DivergedStep(
                    f"Gauss-Newton failed to reach the blend at t = {t_try:.6f}")
            continue
        vec = vec_new
        t = t_try
        cur = EM.evaluate(params.replace_vector(vec), reference)
        res = _relative_residual(cur.values, v_goal)
        record.append({"t": t, "iterations": iters, "residual": res})
        step = min(2.0 * step, 1.0 - t if t < 1.0 else 1.0)
        if step == 0.0:
            break

    out_params = params.replace_vector(vec)
    final = EM.evaluate(out_params, reference)
    residual = _relative_residual(final.values, v_target)
    if residual > tol:
        raise DivergedStep(f"final residual {residual:.3e} exceeds {tol:.1e}")

    convex, witness = P.check_convexity(out_params)
    if not convex:
        raise DivergedStep(f"solution failed the convexity check: {witness}")
    rebuilt = P.build(out_params)
    re_lab = CM.labeling_of(P.induced_metric(rebuilt))
    if find_isomorphism(re_lab, own_lab) is None:
        raise CombinatoricsChange("solution hull differs from the reference "
                                  "combinatorics")
    return RealizationResult(params=out_params, residual=residual,
                             iterations=total_iter, homotopy=record)


def _gauss_newton(problem, reference, vec0, v_goal, J_init=None):
    """Levenberg-damped inner solve toward a fixed blend target.

    Returns (converged, vector, iterations, last_jacobian)."""
    params0 = reference.params
    tol = problem.tol
    vec = vec0.copy()
    try:
        cur = EM.evaluate(params0.replace_vector(vec), reference)
    except CombinatoricsChange:
        return False, vec0, 0, None
    r = cur.values - v_goal
    res = _relative_residual(cur.values, v_goal)
    lam = 1e-8
    J = J_init
    for it in range(problem.max_inner):
        if res < tol:
            return True, vec, it, J
        if J is None:
            try:
                J = EM.jacobian(params0.replace_vector(vec), reference).jacobian
            except CombinatoricsChange:
                return False, vec0, it, None
        accepted = False
        JtJ = J.T @ J
        Jtr = J.T @ r
        diag = np.diag(np.maximum(np.diag(JtJ), 1e-12))
        while lam <= LAMBDA_MAX:
            try:
                delta = np.linalg.solve(JtJ + lam * diag, -Jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            vec_try = vec + delta
            try:
                cand = EM.evaluate(params0.replace_vector(vec_try), reference)
            except (CombinatoricsChange, FuchsianError):
                lam *= 10.0
                continue
            res_try = _relative_residual(cand.values, v_goal)
            if res_try < res:
                vec = vec_try
                r = cand.values - v_goal
                res = res_try
                lam = max(LAMBDA_MIN, lam / 3.0)
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            return False, vec0, it + 1, None
        if lam > 1e-4 or res > 100 * tol:
            J = None      # stale Jacobian; recompute next round
    return res < tol, vec if res < tol else vec0, problem.max_inner, J