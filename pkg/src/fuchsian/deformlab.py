"""Numerical rigidity machinery: vertex links, the angle-monotonicity
inequality, Euclidean convex-cap deformation systems, the infinitesimal
Pogorelov map, and Fuchsian Killing field extension."""

from dataclasses import dataclass

import numpy as np

from . import groups as G
from .errors import (CenterSingularity, DegenerateTriangle, NotACap,
                     NotInfinitesimalIsometry)
from .hyperboloid import (J4, X_C, distance, klein_map, minkowski_dot,
                          project_to_plane, spherical_angle, tangent_norm,
                          tangent_toward)
from .polyhedra import triangulate

# ---------------------------------------------------------------------------
# vertex links


@dataclass
class LinkPolygon:
    """Spherical link of a polyhedron vertex, coned from the south pole.

    radii r_i: spherical distance from the downward vertical to the i-th
    edge direction; sides l_i: wedge angle between consecutive edges;
    betas: angles of the cone segments at the south pole."""

    radii: np.ndarray
    sides: np.ndarray
    betas: np.ndarray
    interior_angles: np.ndarray

    @property
    def n(self):
        return len(self.radii)

    def beta_sum(self):
        return float(np.sum(self.betas))

    def side_sum(self):
        return float(np.sum(self.sides))

    def is_convex(self, tol=1e-9):
        """Interior angles at most pi (additional edges may reach exactly pi)."""
        return bool(np.all(self.interior_angles <= np.pi + tol))


def link_from_radii_sides(radii, sides):
    """Assemble the link data from spherical radii and side lengths."""
    radii = np.asarray(radii, dtype=float)
    sides = np.asarray(sides, dtype=float)
    n = len(radii)
    betas = np.array([spherical_angle(sides[i], radii[i], radii[(i + 1) % n])
                      for i in range(n)])
    interior = np.empty(n)
    for i in range(n):
        # angles at z_i inside the two cone triangles meeting there
        a_prev = spherical_angle(radii[(i - 1) % n], radii[i], sides[(i - 1) % n])
        a_next = spherical_angle(radii[(i + 1) % n], radii[i], sides[i])
        interior[i] = a_prev + a_next
    return LinkPolygon(radii=radii, sides=sides, betas=betas,
                       interior_angles=interior)


def link_of_vertex(poly, vertex):
    """Link of a fundamental vertex of a built polyhedron.

    Edge directions are collected from the triangle wedges around the
    vertex, ordered by the corner walk; radii are measured from the
    downward vertical at the vertex."""
    triangulate(poly)
    x = poly.seeds[vertex]
    foot = project_to_plane(x)
    down = tangent_toward(x, foot)

    # corner walk around the vertex in gluing order
    glued = {}
    for e in poly.edges:
        a, b = e.slots
        glued[tuple(a)] = tuple(b)
        glued[tuple(b)] = tuple(a)
    corners = [(ti, c) for ti, t in enumerate(poly.triangles)
               for c in range(3) if t.labels[c][0] == vertex]
    corner_set = set(corners)
    walk = [corners[0]]
    while True:
        t, c = walk[-1]
        t2, s2 = glued[(t, c)]
        nxt = (t2, (s2 + 1) % 3)
        if nxt == walk[0]:
            break
        if nxt not in corner_set or len(walk) > len(corners):
            raise DegenerateTriangle("corner walk does not close at the vertex")
        walk.append(nxt)
    if len(walk) != len(corners):
        raise DegenerateTriangle("vertex corners split into several cycles")

    # wedge at corner (t, c) exits through slot c; keep only directions
    # along genuine polyhedron edges (fan diagonals are additional edges
    # of the subdivision and do not appear in the link)
    dirs = []
    group = poly.group
    for (t, c) in walk:
        tri = poly.triangles[t]
        if poly.edges[tri.edge_ids[c]].is_diagonal:
            continue
        s_out, w_out = tri.labels[c]
        s_nb, w_nb = tri.labels[(c + 1) % 3]
        M = G.word_matrix(G.word_reduce(G.word_inverse(w_out) + w_nb), group)
        nb = M @ poly.seeds[s_nb]
        nb /= np.sqrt(-minkowski_dot(nb, nb))
        dirs.append(tangent_toward(x, nb))
    n = len(dirs)
    radii = np.array([float(np.arccos(np.clip(minkowski_dot(down, u), -1, 1)))
                      for u in dirs])
    sides = np.array([float(np.arccos(np.clip(
        minkowski_dot(dirs[i], dirs[(i + 1) % n]), -1, 1))) for i in range(n)])
    return link_from_radii_sides(radii, sides)


def beta_from_radii(r_a, r_b, side):
    """Cone angle at the south pole over a link side."""
    return spherical_angle(side, r_a, r_b)


def monotonicity_check(r_prev, r_mid, r_next, l_prev, l_next, h=1e-6):
    """Central-difference estimate of d(beta_i + beta_{i+1})/dr_mid.

    Strictly negative for convex configurations."""
    def total(rm):
        return (spherical_angle(l_prev, r_prev, rm)
                + spherical_angle(l_next, rm, r_next))
    return float((total(r_mid + h) - total(r_mid - h)) / (2 * h))


def sample_convex_link_config(rng, r_lo=0.05, r_hi=np.pi / 2 - 0.05):
    """Random (r_prev, r_mid, r_next, l_prev, l_next) with the quadrilateral
    (south pole, z_prev, z_mid, z_next) convex."""
    for _ in range(1000):
        r = rng.uniform(r_lo, r_hi, size=3)
        lmax_p = min(r[0] + r[1], np.pi - 1e-3)
        lmax_n = min(r[1] + r[2], np.pi - 1e-3)
        l_prev = rng.uniform(abs(r[0] - r[1]) + 1e-2, lmax_p - 1e-2)
        l_next = rng.uniform(abs(r[1] - r[2]) + 1e-2, lmax_n - 1e-2)
        try:
            a_prev = spherical_angle(r[0], r[1], l_prev)
            a_next = spherical_angle(r[2], r[1], l_next)
        except DegenerateTriangle:
            continue
        if a_prev + a_next < np.pi - 1e-3:
            return r[0], r[1], r[2], l_prev, l_next
    raise DegenerateTriangle("failed to sample a convex link configuration")


# ---------------------------------------------------------------------------
# Euclidean convex caps


@dataclass
class CapDeformationSystem:
    """First-order isometric deformation system of a closed-up convex cap.

    Rows: one per edge (including the triangulated base disk), encoding
    <x_i - x_j, zdot_i - zdot_j> = 0, plus one vertical-pinning row per
    boundary vertex."""

    vertices: np.ndarray
    edges: list
    boundary: list
    matrix: np.ndarray
    n_edge_rows: int


def cap_system(vertices, faces, boundary):
    """Build the constraint system from cap surface faces.

    vertices: (m, 3) with the boundary ring in the z = 0 plane; faces:
    surface triangles (no base); boundary: indices of the ring in cyclic
    order.  The flat base disk is triangulated by a fan so the closed
    surface is a convex polytope."""
    V = np.asarray(vertices, dtype=float)
    m = len(V)
    boundary = list(boundary)
    if len(boundary) < 3:
        raise NotACap("boundary needs at least 3 vertices")
    if np.max(np.abs(V[boundary, 2])) > 1e-9:
        raise NotACap("boundary ring is not planar at z = 0")
    interior = [i for i in range(m) if i not in set(boundary)]
    if not interior:
        raise NotACap("cap has no interior vertex")
    if np.min(V[interior, 2]) <= 0:
        raise NotACap("interior vertices must lie strictly above the base")

    edges = set()
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            edges.add((min(a, b), max(a, b)))
    nb = len(boundary)
    for k in range(nb):
        edges.add(tuple(sorted((boundary[k], boundary[(k + 1) % nb]))))
    for k in range(2, nb - 1):
        edges.add(tuple(sorted((boundary[0], boundary[k]))))
    edges = sorted(edges)

    rows = np.zeros((len(edges) + nb, 3 * m))
    for r, (i, j) in enumerate(edges):
        d = V[i] - V[j]
        rows[r, 3 * i: 3 * i + 3] = d
        rows[r, 3 * j: 3 * j + 3] = -d
    for k, i in enumerate(boundary):
        rows[len(edges) + k, 3 * i + 2] = 1.0
    return CapDeformationSystem(vertices=V, edges=edges, boundary=boundary,
                                matrix=rows, n_edge_rows=len(edges))


def cap_rigidity_kernel(system, pin_boundary=True, threshold=1e-8):
    """Kernel of the deformation system by singular-value thresholding.

    Returns (dimension, basis); with boundary pinning a convex cap gives 3
    (horizontal translations and the vertical-axis rotation), without it
    the 6 ambient Killing fields."""
    A = system.matrix if pin_boundary else system.matrix[:system.n_edge_rows]
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    smax = s.max() if len(s) else 1.0
    rank = int(np.sum(s > threshold * smax))
    basis = vt[rank:].T
    return basis.shape[1], basis


def euclidean_killing_basis():
    """The 6 Killing fields of R^3 as functions x -> field(x)."""
    basis = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        basis.append(lambda x, e=e: np.broadcast_to(e, x.shape).copy())
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        basis.append(lambda x, e=e: np.cross(e, x))
    return basis


def killing_fields_with_flat_boundary(vertices, boundary, tol=1e-9):
    """Count the ambient Killing fields with zero vertical component on the
    boundary ring; the enumeration oracle for the cap kernel."""
    V = np.asarray(vertices, dtype=float)[list(boundary)]
    count = 0
    for field_fn in euclidean_killing_basis():
        vz = field_fn(V)[:, 2]
        if np.max(np.abs(vz)) < tol:
            count += 1
    return count


def random_cap(rng, n_boundary=8, n_interior=5, radius=1.0, height=0.6):
    """Random convex dome cap: ring on a circle at z = 0, interior points
    lifted to a paraboloid dome vanishing on the ring.

    Every lifted point is extreme, so the upper hull faces are the cap
    surface and the projection onto the base is bijective."""
    from scipy.spatial import ConvexHull

    angles = np.sort(rng.uniform(0, 2 * np.pi, n_boundary))
    if np.min(np.diff(angles, append=angles[0] + 2 * np.pi)) < 0.05:
        angles = np.linspace(0, 2 * np.pi, n_boundary, endpoint=False)
        angles += rng.uniform(0, 2 * np.pi)
    ring = radius * np.column_stack([np.cos(angles), np.sin(angles)])

    inner = []
    while len(inner) < n_interior:
        p = rng.uniform(-radius, radius, 2)
        if np.hypot(*p) < 0.75 * radius:
            ok = all(np.hypot(*(p - q)) > 0.12 * radius for q in inner)
            if ok:
                inner.append(p)
    pts2 = np.vstack([ring, np.array(inner)])

    z = height * (1.0 - (pts2[:, 0] ** 2 + pts2[:, 1] ** 2) / radius ** 2)
    z[:n_boundary] = 0.0
    V = np.column_stack([pts2, z])
    hull = ConvexHull(V)
    up = hull.equations[:, 2] > 1e-9
    faces = [list(map(int, s)) for s, u in zip(hull.simplices, up) if u]
    used = sorted({v for f in faces for v in f})
    if len(used) != len(V):
        raise NotACap("dome sampling produced a degenerate cap")
    return V, faces, list(range(n_boundary))


def pyramid_cap(rng, n_boundary=8, radius=1.0, height=0.8):
    """Convex pyramid cap: one apex above a random convex ring."""
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_boundary))
    if np.min(np.diff(angles, append=angles[0] + 2 * np.pi)) < 0.05:
        angles = np.linspace(0, 2 * np.pi, n_boundary, endpoint=False)
    radii = radius * rng.uniform(0.6, 1.0, n_boundary)
    ring = np.column_stack([radii * np.cos(angles), radii * np.sin(angles),
                            np.zeros(n_boundary)])
    apex = np.array([[0.0, 0.0, height * rng.uniform(0.6, 1.2)]])
    V = np.vstack([ring, apex])
    faces = [[k, (k + 1) % n_boundary, n_boundary] for k in range(n_boundary)]
    return V, faces, list(range(n_boundary))


# ---------------------------------------------------------------------------
# infinitesimal Pogorelov map


@dataclass
class VectorFieldSample:
    base: np.ndarray
    vector: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.vector = np.asarray(self.vector, dtype=float)
        if abs(minkowski_dot(self.base, self.vector)) > 1e-10 * max(
                1.0, float(np.max(np.abs(self.vector)))):
            raise NotInfinitesimalIsometry("vector is not tangent at its base")


def radial_direction(x):
    """Unit tangent at x pointing away from the model center."""
    mu = distance(X_C, x)
    if mu < 1e-12:
        raise CenterSingularity("radial direction undefined at the center")
    return -(X_C + minkowski_dot(X_C, x) * x) / np.sinh(mu)


def klein_differential(x, v):
    """d(klein_map) at x applied to tangent vector v."""
    x4 = x[3]
    return (v[:3] * x4 - x[:3] * v[3]) / (x4 * x4)


def pogorelov_map(sample):
    """Transport a tangent vector to the Klein model.

    The radial part keeps its direction and hyperbolic norm; the lateral
    part maps by the differential of the projective map (its Euclidean norm
    is the hyperbolic one divided by cosh of the distance to the center).
    At the exact center the map is the differential on the whole tangent
    space."""
    x, v = sample.base, sample.vector
    k = klein_map(x)
    mu = distance(X_C, x)
    if mu < 1e-12:
        return k, klein_differential(x, v)
    u_r = radial_direction(x)
    a = minkowski_dot(v, u_r)
    v_r = a * u_r
    v_l = v - v_r
    e_r = k / np.linalg.norm(k)
    return k, a * e_r + klein_differential(x, v_l)


def decompose(sample):
    """Radial/lateral and vertical/horizontal splits of a tangent vector.

    Returns a dict with keys radial, lateral, vertical, horizontal,
    radial_horizontal; raises CenterSingularity for the radial split at the
    model center."""
    x, v = sample.base, sample.vector
    mu = distance(X_C, x)
    if mu < 1e-12:
        raise CenterSingularity("radial split undefined at the center")
    u_r = radial_direction(x)
    v_r = minkowski_dot(v, u_r) * u_r
    y = project_to_plane(x)
    d = distance(x, y)
    s3 = 1.0 if x[2] >= 0 else -1.0
    # unit tangent pointing away from the plane on x's side
    w_v = np.sinh(d) * y + s3 * np.cosh(d) * np.array([0.0, 0.0, 1.0, 0.0])
    v_v = minkowski_dot(v, w_v) * w_v
    # radial direction of P_{H^2} at the projection, pushed to x
    ky = y[:3]
    if np.linalg.norm(ky[:2]) < 1e-14:
        u_rh = None
        v_rh = None
    else:
        r2 = (X_C + minkowski_dot(X_C, y) * y)
        nr = tangent_norm(r2)
        u_rh = -r2 / nr
        v_rh = minkowski_dot(v, u_rh) * u_rh
    return {
        "radial": v_r,
        "lateral": v - v_r,
        "vertical": v_v,
        "horizontal": v - v_v,
        "radial_horizontal": v_rh,
        "vertical_direction": w_v,
        "radial_direction": u_r,
        "radial_horizontal_direction": u_rh,
    }


def extend_fuchsian_killing(K3, base):
    """Fuchsian Killing field: the H^2 algebra element extended to H^3.

    The extension is the block embedding, which agrees with transporting
    the plane value along the umbilic-surface projections and has zero
    vertical component everywhere."""
    K3 = np.asarray(K3, dtype=float)
    if np.max(np.abs(K3.T @ G.J3 + G.J3 @ K3)) > 1e-10:
        raise NotInfinitesimalIsometry("not in the 2+1 Killing algebra")
    A = np.zeros((4, 4))
    A[np.ix_([0, 1, 3], [0, 1, 3])] = K3
    return VectorFieldSample(base=base, vector=A @ np.asarray(base, dtype=float))


def so31_basis():
    """Basis of the isometry algebra: 3 rotations and 3 boosts."""
    out = []
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        A = np.zeros((4, 4))
        A[i, j] = 1.0
        A[j, i] = -1.0
        out.append(A)
    for i in range(3):
        A = np.zeros((4, 4))
        A[i, 3] = 1.0
        A[3, i] = 1.0
        out.append(A)
    return out


def validate_algebra(A, tol=1e-10):
    A = np.asarray(A, dtype=float)
    if np.max(np.abs(A.T @ J4 + J4 @ A)) > tol:
        raise NotInfinitesimalIsometry("A^T J + J A != 0")
    return A


def _symmetrized_jacobian_residual(field_fn, cloud, h=1e-5):
    """Max over the cloud of the symmetrized Jacobian of a Euclidean field."""
    worst = 0.0
    for k in cloud:
        Jf = np.zeros((3, 3))
        for j in range(3):
            kp, km = k.copy(), k.copy()
            kp[j] += h
            km[j] -= h
            Jf[:, j] = (field_fn(kp) - field_fn(km)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(Jf + Jf.T))))
    return worst


def killing_transfer_check(A, n_points=500, radius=0.95, seed=0, h=1e-5):
    """Push the Killing field x -> A x through the Pogorelov map and measure
    the symmetrized Jacobian of the resulting Euclidean field."""
    A = validate_algebra(A)
    cloud = sample_klein_cloud(n_points, radius, seed)

    def field_fn(k):
        x = _unklein(k)
        v = A @ x
        _, w = pogorelov_map(VectorFieldSample(base=x, vector=v))
        return w

    return _symmetrized_jacobian_residual(field_fn, cloud, h=h)


def radial_control_field(k):
    """Non-Killing control: the hyperbolic radial field sinh(mu) d/dmu,
    pushed through the Pogorelov map."""
    x = _unklein(k)
    mu = distance(X_C, x)
    if mu < 1e-6:
        return np.zeros(3)
    v = np.sinh(mu) * radial_direction(x)
    _, w = pogorelov_map(VectorFieldSample(base=x, vector=v))
    return w


def control_field_residual(n_points=500, radius=0.95, seed=0, h=1e-5):
    cloud = sample_klein_cloud(n_points, radius, seed, r_min=0.1)
    return _symmetrized_jacobian_residual(radial_control_field, cloud, h=h)


def sample_klein_cloud(n_points, radius, seed, r_min=1e-3):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n_points:
        p = rng.uniform(-radius, radius, 3)
        r = np.linalg.norm(p)
        if r_min < r < radius:
            out.append(p)
    return np.array(out)


def _unklein(k):
    r2 = float(k @ k)
    x4 = 1.0 / np.sqrt(1.0 - r2)
    return np.array([k[0] * x4, k[1] * x4, k[2] * x4, x4])


def pogorelov_norm_relations(x, v):
    """Return (radial norms, lateral norms x cosh(mu)) for a sample; both
    pairs agree for the exact map."""
    s = VectorFieldSample(base=x, vector=v)
    mu = distance(X_C, x)
    u_r = radial_direction(x)
    v_r = minkowski_dot(v, u_r) * u_r
    v_l = v - v_r
    k, w = pogorelov_map(s)
    e_r = k / np.linalg.norm(k)
    w_r = (w @ e_r) * e_r
    w_l = w - w_r
    return ((tangent_norm(v_r), float(np.linalg.norm(w_r))),
            (tangent_norm(v_l), float(np.cosh(mu) * np.linalg.norm(w_l))))
