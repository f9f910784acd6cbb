"""Convex Fuchsian polyhedra as boundaries of orbit convex hulls.

The truncated orbit of the seed vertices is hulled in Klein coordinates
(the projective map sends convex sets to convex sets, so the Euclidean hull
is the hyperbolic one); the faces with upward normals form the polyhedral
cap, and the fundamental-domain cell complex is extracted by deduplicating
faces under the group action.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from . import groups as G
from .errors import (AngleOverflow, ChartViolation, CombinatoricsChange,
                     FuchsianError, InvalidPoint, NotConvex, TruncationUnstable)
from .hyperboloid import (hyperbolic_angle, klein_map, minkowski_dot,
                          tangent_toward)

DEFAULT_L0 = 3
DEFAULT_L_MAX = 12
NEIGHBORHOOD_RADIUS = 8.0     # hyperbolic reach of face-relevant orbit points
COPLANAR_TOL = 1e-10
UP_TOL = 1e-9


@dataclass
class PolyhedronParams:
    """Coordinates of a convex Fuchsian polyhedron with n vertices.

    base_points are Klein-disk coordinates in the invariant plane; heights
    are hyperbolic distances above it.  The group is either a Z-V-C chart
    point (zvc) or the regular 4g-gon preset.
    """

    genus: int
    base_points: np.ndarray
    heights: np.ndarray
    zvc: np.ndarray | None = None
    preset: str | None = None

    def __post_init__(self):
        self.base_points = np.atleast_2d(np.asarray(self.base_points, dtype=float))
        self.heights = np.atleast_1d(np.asarray(self.heights, dtype=float))
        if self.base_points.shape != (self.n_vertices, 2):
            raise ChartViolation("base_points must be an (n, 2) array")
        if np.any(self.heights <= 0):
            raise ChartViolation("heights must be positive")
        if (self.zvc is None) == (self.preset is None):
            raise ChartViolation("exactly one of zvc or preset must be given")
        if self.zvc is not None:
            self.zvc = np.asarray(self.zvc, dtype=float)

    @property
    def n_vertices(self):
        return len(self.heights)

    @property
    def dimension(self):
        return 6 * self.genus - 6 + 3 * self.n_vertices

    def vector(self):
        """Chart vector (zvc, base u,v pairs, heights) of length 6g-6+3n."""
        if self.zvc is None:
            raise ChartViolation("preset groups carry no chart vector")
        return np.concatenate([self.zvc, self.base_points.ravel(), self.heights])

    def replace_vector(self, vec):
        vec = np.asarray(vec, dtype=float)
        n_z = 6 * self.genus - 6
        n = self.n_vertices
        return PolyhedronParams(genus=self.genus,
                                zvc=vec[:n_z].copy(),
                                base_points=vec[n_z:n_z + 2 * n].reshape(n, 2),
                                heights=vec[n_z + 2 * n:].copy())

    def make_group(self, near=None):
        if self.preset == "regular":
            return G.regular_group(self.genus)
        return G.group_from_polygon(G.build_polygon(self.zvc, genus=self.genus, near=near))


def seed_points(params, group):
    """Lift base points to their heights; validates containment."""
    seeds = []
    for (u, v), d in zip(params.base_points, params.heights):
        if u * u + v * v >= 1.0:
            raise ChartViolation("base point outside the Klein disk")
        y2 = G.unklein2((u, v))
        if not group.contains_in_polygon(y2, margin=1e-9):
            raise ChartViolation(f"base point ({u}, {v}) not strictly inside "
                                 "the fundamental polygon")
        y4 = np.array([y2[0], y2[1], 0.0, y2[2]])
        seeds.append(np.cosh(d) * y4 + np.sinh(d) * np.array([0.0, 0.0, 1.0, 0.0]))
    return np.array(seeds)


def _merged_upper_faces(K):
    """Upward hull faces merged by supporting plane, cyclically ordered."""
    hull = ConvexHull(K)
    eq = hull.equations
    up = np.where(eq[:, 2] > UP_TOL)[0]
    key_groups = {}
    order = []
    for si in up:
        key = tuple(np.round(eq[si] / COPLANAR_TOL).astype(np.int64))
        if key not in key_groups:
            key_groups[key] = []
            order.append(key)
        key_groups[key].append(si)
    faces = []
    for key in order:
        sims = key_groups[key]
        vids = sorted({int(v) for si in sims for v in hull.simplices[si]})
        n = eq[sims[0]][:3].copy()
        n /= np.linalg.norm(n)
        pts = K[vids]
        c = pts.mean(axis=0)
        a1 = pts[0] - c
        a1 -= np.dot(a1, n) * n
        a1 /= np.linalg.norm(a1)
        a2 = np.cross(n, a1)
        ang = np.arctan2((pts - c) @ a2, (pts - c) @ a1)
        faces.append([vids[i] for i in np.argsort(ang)])
    return faces, hull


@dataclass
class QuotientFace:
    labels: list                     # [(seed, word string), ...] cyclic
    point_ids: list                  # indices into the build orbit points


@dataclass
class QuotientEdge:
    seed_a: int
    seed_b: int
    word: str                        # element moving seed_b's copy; "" for a
    length: float
    slots: list = field(default_factory=list)   # (triangle index, slot 0..2)
    is_diagonal: bool = False        # additional edge from the face fan


@dataclass
class QuotientTriangle:
    labels: list                     # corner labels [(seed, word) x3]
    edge_ids: list                   # edge class per slot: (0:(v0,v1), 1:(v1,v2), 2:(v2,v0))


@dataclass
class FuchsianPolyhedron:
    group: "G.FuchsianGroup"
    params: PolyhedronParams
    seeds: np.ndarray
    orbit: "G.OrbitPointSet"
    L_used: int
    faces: list                      # QuotientFace representatives
    star_point_ids: list             # hull faces incident to fundamental verts
    triangles: list | None = None
    edges: list | None = None
    cone_angles: np.ndarray | None = None
    support: dict | None = None

    @property
    def n_vertices(self):
        return self.params.n_vertices

    @property
    def triangulated(self):
        return self.triangles is not None

    def heights_range(self):
        return float(np.min(self.params.heights)), float(np.max(self.params.heights))


def _fundamental_point_ids(orbit):
    out = {}
    for pid, (si, ei) in enumerate(orbit.labels):
        if ei == 0:
            out[si] = pid
    return out


def _point_words(orbit):
    return [orbit.words[ei] for (si, ei) in orbit.labels]


def _star_faces(faces, fund_ids):
    fund = set(fund_ids.values())
    return [f for f in faces if any(v in fund for v in f)]


def _face_fingerprint(orbit, star):
    fp = set()
    for f in star:
        fp.add(frozenset((orbit.labels[v][0], orbit.words[orbit.labels[v][1]])
                         for v in f))
    return fp


def _face_orbit_key(orbit, face):
    """Canonical key of a face orbit: translate the face by each vertex's
    element inverse and take the least sorted (seed, element index) tuple.

    Element indices come from the orbit's own table, so equal orbits give
    exactly equal integer keys.  Vertices whose translate escapes the
    enumerated ball contribute no candidate; every star face has at least
    its fundamental-vertex candidate."""
    from .hyperboloid import isometry_inverse
    best = None
    for v in face:
        sv, ev = orbit.labels[v]
        Minv = isometry_inverse(orbit.matrices[ev])
        cand = []
        ok = True
        for u in face:
            su, eu = orbit.labels[u]
            idx = orbit.find_element(Minv @ orbit.matrices[eu])
            if idx < 0:
                ok = False
                break
            cand.append((su, idx))
        if not ok:
            continue
        key = tuple(sorted(cand))
        if best is None or key < best:
            best = key
    return best


def _same_face_orbit(orbit, P, f1, f2, tol=1e-7):
    """Geometric fallback test: is f2 a group translate of f1?"""
    if len(f1) != len(f2):
        return False
    c2 = P[f2]
    for v1 in f1:
        s1, e1 = orbit.labels[v1]
        M1inv = np.linalg.inv(orbit.matrices[e1])
        for v2 in f2:
            s2, e2 = orbit.labels[v2]
            if s1 != s2:
                continue
            h = orbit.matrices[e2] @ M1inv
            hc = P[f1] @ h.T
            used = [False] * len(f2)
            ok = True
            for row in hc:
                hit = False
                for j, q in enumerate(c2):
                    if not used[j] and np.max(np.abs(row - q)) < tol:
                        used[j] = True
                        hit = True
                        break
                if not hit:
                    ok = False
                    break
            if ok:
                return True
    return False


def _check_face_geometry(K, face, tol=1e-8):
    """Planarity and convexity of a hull face polygon in Klein coordinates."""
    pts = K[face]
    c = pts.mean(axis=0)
    u, s, vt = np.linalg.svd(pts - c)
    if s[-1] > tol:
        raise FuchsianError(f"face deviates from its plane by {s[-1]:.2e}")
    n = vt[2]
    if n[2] < 0:
        n = -n
    a1 = vt[0]
    a2 = np.cross(n, a1)
    xy = np.column_stack([(pts - c) @ a1, (pts - c) @ a2])
    m = len(xy)
    sign = 0.0
    for i in range(m):
        e1 = xy[(i + 1) % m] - xy[i]
        e2 = xy[(i + 2) % m] - xy[(i + 1) % m]
        cr = e1[0] * e2[1] - e1[1] * e2[0]
        if sign == 0.0 and abs(cr) > 1e-14:
            sign = np.sign(cr)
        elif cr * sign < -1e-12:
            raise FuchsianError("hull face polygon is not convex")


def _canonical_face(orbit, face):
    """Rotate the cycle so a fundamental vertex comes first."""
    labs = [(orbit.labels[v][0], orbit.words[orbit.labels[v][1]]) for v in face]
    fund_pos = [k for k, (s, w) in enumerate(labs) if w == ""]
    if not fund_pos:
        raise FuchsianError("face representative misses a fundamental vertex")
    k0 = min(fund_pos, key=lambda k: labs[k][0])
    return labs[k0:] + labs[:k0], face[k0:] + face[:k0]


def _dist4(p, q):
    return float(np.arccosh(max(1.0, -minkowski_dot(p, q))))


class _EdgeIndex:
    """Canonical edge classes keyed by translated endpoint identity.

    An edge is normalized by moving one endpoint onto its seed; the other
    endpoint is then identified as an enumerated group element, giving an
    exact integer key.  Geometry is the fallback for elements outside the
    enumerated ball."""

    def __init__(self, polyhedron):
        self.poly = polyhedron
        self.edges = []
        self._buckets = {}
        self._rep_points = []

    def _candidates(self, la, lb):
        group = self.poly.group
        orbit = self.poly.orbit
        out = []
        for (sa, wa), (sb, wb) in ((la, lb), (lb, la)):
            Ma_inv = G.word_matrix(G.word_inverse(wa), group)
            M = Ma_inv @ G.word_matrix(wb, group)
            idx = orbit.find_element(M)
            q = M @ self.poly.seeds[sb]
            q /= np.sqrt(-minkowski_dot(q, q))
            word = (orbit.words[idx] if idx >= 0
                    else G.word_reduce(G.word_inverse(wa) + wb))
            out.append((sa, sb, idx, q, word))
        return out

    def lookup(self, la, lb):
        ca, cb = self._candidates(la, lb)
        # side choice must be instance-independent: seed order first, then
        # coarse geometric cells (the two normalized endpoints of a class
        # are a systole apart, far beyond the cell size)
        if ca[0] != cb[0]:
            side = ca if ca[0] < cb[0] else cb
        else:
            ka = tuple(np.round(ca[3] / 1e-3).astype(np.int64))
            kb = tuple(np.round(cb[3] / 1e-3).astype(np.int64))
            side = ca if ka <= kb else cb
        sa, sb, idx, q, word = side
        if idx >= 0:
            eid = self._buckets.get((sa, sb, idx))
            if eid is not None:
                return eid
        scale = 1.0 + float(np.max(np.abs(q)))
        for eid, e in enumerate(self.edges):
            if (e.seed_a, e.seed_b) == (sa, sb):
                if np.max(np.abs(self._rep_points[eid] - q)) < 1e-8 * scale:
                    if idx >= 0:
                        self._buckets[(sa, sb, idx)] = eid
                    return eid
        eid = self._register(sa, sb, q, word)
        if idx >= 0:
            self._buckets[(sa, sb, idx)] = eid
        return eid

    def _register(self, sa, sb, q, word):
        eid = len(self.edges)
        q_word = G.word_matrix(word, self.poly.group) @ self.poly.seeds[sb]
        q_word /= np.sqrt(-minkowski_dot(q_word, q_word))
        self.edges.append(QuotientEdge(seed_a=sa, seed_b=sb, word=word,
                                       length=_dist4(self.poly.seeds[sa], q_word)))
        self._rep_points.append(q)
        return eid


def triangulate(poly):
    """Fan-subdivide each quotient face from its lowest-index vertex.

    No new vertices; the subdivision is done on orbit representatives, so it
    commutes with the group action.  Returns the same polyhedron with
    triangles, edges, and cone angles populated.
    """
    if poly.triangulated:
        return poly
    orbit = poly.orbit
    group = poly.group

    tris = []
    for qf in poly.faces:
        labs = qf.labels
        # apex: minimal (word length, word, seed)
        order = sorted(range(len(labs)),
                       key=lambda k: (len(labs[k][1]), labs[k][1], labs[k][0]))
        a = order[0]
        m = len(labs)
        rot_labs = labs[a:] + labs[:a]
        for k in range(1, m - 1):
            # fan diagonals are the additional edges of the subdivision
            tris.append((rot_labs[0], rot_labs[k], rot_labs[k + 1],
                         k > 1, False, k < m - 2))

    index = _EdgeIndex(poly)
    triangles = []
    for (l0, l1, l2, d01, d12, d20) in tris:
        e01 = index.lookup(l0, l1)
        index.edges[e01].is_diagonal |= d01
        e12 = index.lookup(l1, l2)
        index.edges[e12].is_diagonal |= d12
        e20 = index.lookup(l2, l0)
        index.edges[e20].is_diagonal |= d20
        t = QuotientTriangle(labels=[l0, l1, l2], edge_ids=[e01, e12, e20])
        triangles.append(t)
    for ti, t in enumerate(triangles):
        for slot, eid in enumerate(t.edge_ids):
            index.edges[eid].slots.append((ti, slot))

    for e in index.edges:
        if len(e.slots) != 2:
            raise FuchsianError(
                f"edge class ({e.seed_a},{e.seed_b},'{e.word}') glued "
                f"{len(e.slots)} times; quotient extraction is inconsistent")

    # recompute lengths through the extended-precision chain so the stored
    # metric agrees exactly with later chart-vector evaluations
    polygon = poly.group.polygon
    if polygon is not None and polygon.pairings_hp is not None:
        specs = [(e.seed_a, e.seed_b, e.word) for e in index.edges]
        hp = G.edge_lengths_hp(polygon, poly.params.base_points,
                               poly.params.heights, specs)
        for e, val in zip(index.edges, hp):
            e.length = float(val)

    n = poly.n_vertices
    g = poly.params.genus
    expected = 6 * g - 6 + 3 * n
    if len(index.edges) != expected:
        raise FuchsianError(f"fundamental triangulation has {len(index.edges)} "
                            f"edges, expected {expected}")
    chi = n - len(index.edges) + len(triangles)
    if chi != 2 - 2 * g:
        raise FuchsianError(f"Euler characteristic {chi} != {2 - 2 * g}")

    # cone angles from the hyperbolic law of cosines, per corner
    angles = np.zeros(n)
    for t in triangles:
        a = index.edges[t.edge_ids[1]].length   # opposite corner 0
        b = index.edges[t.edge_ids[2]].length   # opposite corner 1
        c = index.edges[t.edge_ids[0]].length   # opposite corner 2
        angles[t.labels[0][0]] += hyperbolic_angle(a, b, c)
        angles[t.labels[1][0]] += hyperbolic_angle(b, c, a)
        angles[t.labels[2][0]] += hyperbolic_angle(c, a, b)
    if np.any(angles >= 2 * np.pi):
        raise AngleOverflow(f"cone angle {angles.max():.6f} >= 2*pi")
    if np.any(angles <= 0):
        raise AngleOverflow("nonpositive cone angle")

    poly.triangles = triangles
    poly.edges = index.edges
    poly.cone_angles = angles
    return poly


def _locate_covering_face(K, hull_faces, k_seed):
    """Upward face whose projection contains the seed's Klein projection."""
    for f in hull_faces:
        pts = K[f][:, :2]
        m = len(pts)
        inside = True
        for i in range(m):
            e = pts[(i + 1) % m] - pts[i]
            if e[0] * (k_seed[1] - pts[i][1]) - e[1] * (k_seed[0] - pts[i][0]) < -1e-12:
                inside = False
                break
        if inside:
            return f
    return None


def build(params, L=None, r_keep=None, L_max=DEFAULT_L_MAX, near=None):
    """Boundary of the convex hull of the truncated orbit.

    The word length grows from L (default 3) until the faces incident to the
    fundamental vertices are identical for two consecutive lengths; the
    orbit is pruned to a neighborhood of the seeds, which the stability test
    protects (far orbit points accumulate at the boundary circle and cannot
    carve faces near the fundamental cell).
    """
    group = params.make_group(near=near)
    seeds = seed_points(params, group)
    n = params.n_vertices

    proj = seeds.copy()
    proj[:, 2] = 0.0
    proj /= np.sqrt(proj[:, 3] ** 2 - proj[:, 0] ** 2 - proj[:, 1] ** 2)[:, None]
    kc = np.mean(klein_map(proj)[:, :2], axis=0)
    c2 = G.unklein2(kc)
    center = np.array([c2[0], c2[1], 0.0, c2[2]])
    spread = max(_dist4(center, p) for p in proj)
    if r_keep is None:
        r_keep = spread + NEIGHBORHOOD_RADIUS

    L0 = DEFAULT_L0 if L is None else L
    prev_fp = None
    last_extract_error = None
    L_cur = L0
    while L_cur <= L_max:
        orbit = G.enumerate_orbit(group, seeds, L_cur, r_keep=r_keep, center=center)
        K = klein_map(orbit.points)
        fund_ids = _fundamental_point_ids(orbit)
        if len(fund_ids) != n:
            raise TruncationUnstable("fundamental vertices missing from the orbit")
        faces, hull = _merged_upper_faces(K)
        hull_vertices = set(int(v) for v in hull.vertices)
        for si, pid in fund_ids.items():
            if pid not in hull_vertices:
                f = _locate_covering_face(K, faces, K[pid][:2])
                witness = None
                if f is not None:
                    witness = tuple((orbit.labels[v][0], orbit.words[orbit.labels[v][1]])
                                    for v in f[:3]) + ((si, ""),)
                raise NotConvex(f"seed vertex {si} lies inside the hull of the "
                                "other orbit points", witness=witness)
        star = _star_faces(faces, fund_ids)
        fp = _face_fingerprint(orbit, star)
        if prev_fp is not None and fp == prev_fp:
            # incidence is stable; a failed extraction means it only looked
            # stable, so keep growing the truncation
            try:
                poly = _extract_complex(group, params, seeds, orbit, K, star,
                                        fund_ids, L_cur)
                return poly
            except (FuchsianError, NotConvex) as exc:
                if isinstance(exc, NotConvex):
                    raise
                last_extract_error = exc
        prev_fp = fp
        L_cur += 1
    if last_extract_error is not None:
        raise TruncationUnstable(
            f"extraction failed up to L = {L_max}: {last_extract_error}")
    raise TruncationUnstable(f"hull incidence did not stabilize by L = {L_max}")


def _extract_complex(group, params, seeds, orbit, K, star, fund_ids, L_cur):
    # orbit-deduplicate star faces: exact element keys settle equality fast,
    # the geometric matcher is the authority (keys can split an orbit when a
    # translate falls outside the enumerated ball)
    reps = []
    for f in star:
        key = _face_orbit_key(orbit, f)
        dup = False
        for rf, rkey in reps:
            if key is not None and rkey is not None and key == rkey:
                dup = True
                break
            if _same_face_orbit(orbit, orbit.points, rf, f):
                dup = True
                break
        if not dup:
            reps.append((f, key))
    reps = [rf for rf, _ in reps]

    qfaces = []
    for f in reps:
        _check_face_geometry(K, f)
        labs, pids = _canonical_face(orbit, f)
        qfaces.append(QuotientFace(labels=labs, point_ids=list(pids)))

    # degenerate coplanar seed: all incident wedges on one plane
    for si, pid in fund_ids.items():
        inc = [f for f in star if pid in f]
        normals = []
        for f in inc:
            pts = K[f]
            cc = pts.mean(axis=0)
            _, _, vt = np.linalg.svd(pts - cc)
            nrm = vt[2] if vt[2][2] > 0 else -vt[2]
            normals.append(nrm)
        normals = np.array(normals)
        if len(normals) > 1 and np.max(np.linalg.norm(normals - normals[0], axis=1)) < 1e-8:
            raise NotConvex(f"seed vertex {si} is coplanar with its star "
                            "(face angle sum 2*pi)", witness=(si,))

    poly = FuchsianPolyhedron(group=group, params=params, seeds=seeds,
                              orbit=orbit, L_used=L_cur, faces=qfaces,
                              star_point_ids=[list(f) for f in star])
    triangulate(poly)
    _build_support(poly)
    return poly


# ---------------------------------------------------------------------------
# support certificate: fast convexity/incidence verification without a hull

def _build_support(poly, reach=2.0):
    """Cache, per star face, the orbit points that could contest its plane."""
    K = klein_map(poly.orbit.points)
    support = {"faces": [], "candidates": []}
    for f in poly.star_point_ids:
        pts = poly.orbit.points[f]
        center = pts.mean(axis=0)
        center /= np.sqrt(-minkowski_dot(center, center))
        rad = max(_dist4(center, poly.orbit.points[v]) for v in f)
        cosr = np.cosh(rad + reach)
        dots = -(poly.orbit.points @ (np.diag([1.0, 1.0, 1.0, -1.0]) @ center))
        cand = np.where(dots <= cosr)[0]
        cand = [int(c) for c in cand if c not in f]
        support["faces"].append(list(f))
        support["candidates"].append(cand)
    poly.support = support


def support_check(poly, points, tol=1e-10):
    """Verify the reference star faces still support the orbit cloud.

    points: orbit point array under (possibly different) parameters, indexed
    like the reference orbit.  Raises CombinatoricsChange on violation."""
    K = points[:, :3] / points[:, 3:4]
    for f, cand in zip(poly.support["faces"], poly.support["candidates"]):
        pts = K[f]
        c = pts.mean(axis=0)
        _, s, vt = np.linalg.svd(pts - c)
        if len(f) > 3 and s[-1] > 1e-7:
            raise CombinatoricsChange("reference face no longer planar")
        nrm = vt[2] if vt[2][2] > 0 else -vt[2]
        d = (K[cand] - c) @ nrm
        if np.any(d > tol):
            raise CombinatoricsChange(
                f"orbit point rises {d.max():.2e} above a reference face")


def recompute_orbit_points(poly, params, near=None, group=None):
    """Orbit points of the reference labels under new parameters.

    Group and seeds are rebuilt; element matrices reuse the reference BFS
    tree, so the combinatorial labels keep their meaning."""
    if group is None:
        group = params.make_group(near=near)
    seeds = seed_points(params, group)
    mats = poly.orbit.recompute_matrices(group)
    label_arr = getattr(poly, "_label_arr", None)
    if label_arr is None:
        label_arr = np.array([[si, ei] for (si, ei) in poly.orbit.labels])
        poly._label_arr = label_arr
    pts = np.einsum("kij,kj->ki", mats[label_arr[:, 1]], seeds[label_arr[:, 0]])
    nrm = np.sqrt(pts[:, 3] ** 2 - pts[:, 0] ** 2 - pts[:, 1] ** 2 - pts[:, 2] ** 2)
    pts /= nrm[:, None]
    return group, seeds, mats, pts


def edge_lengths_for(poly, group, seeds, params=None):
    """Lengths of the labeled quotient edges.

    Z-V-C groups carry extended-precision pairings; lengths then come from
    the extended-precision chain (exact functions of the chart vector,
    which the finite-difference Jacobians need).  The float64 fallback
    renormalizes points onto the sheet."""
    polygon = group.polygon
    if polygon is not None and polygon.pairings_hp is not None and params is not None:
        specs = [(e.seed_a, e.seed_b, e.word) for e in poly.edges]
        return G.edge_lengths_hp(polygon, params.base_points, params.heights,
                                 specs)
    out = np.empty(len(poly.edges))
    for i, e in enumerate(poly.edges):
        q = G.word_matrix(e.word, group) @ seeds[e.seed_b]
        q /= np.sqrt(-minkowski_dot(q, q))
        out[i] = _dist4(seeds[e.seed_a], q)
    return out


# ---------------------------------------------------------------------------

def check_convexity(params, L=None, r_keep=None, near=None):
    """Paper determinant condition: every seed is extreme in the orbit hull.

    Returns (True, None) or (False, witness); the witness is the covering
    face triple together with the offending seed."""
    group = params.make_group(near=near)
    try:
        seeds = seed_points(params, group)
    except ChartViolation:
        raise
    n = params.n_vertices
    proj = seeds.copy()
    proj[:, 2] = 0.0
    proj /= np.sqrt(proj[:, 3] ** 2 - proj[:, 0] ** 2 - proj[:, 1] ** 2)[:, None]
    kc = np.mean(klein_map(proj)[:, :2], axis=0)
    c2 = G.unklein2(kc)
    center = np.array([c2[0], c2[1], 0.0, c2[2]])
    spread = max(_dist4(center, p) for p in proj)
    if r_keep is None:
        r_keep = spread + NEIGHBORHOOD_RADIUS
    L_cur = DEFAULT_L0 + 1 if L is None else L
    orbit = G.enumerate_orbit(group, seeds, L_cur, r_keep=r_keep, center=center)
    K = klein_map(orbit.points)
    fund_ids = _fundamental_point_ids(orbit)
    hull = ConvexHull(K)
    hull_vertices = set(int(v) for v in hull.vertices)
    for si in range(n):
        pid = fund_ids[si]
        if pid in hull_vertices:
            continue
        others = np.delete(np.arange(len(K)), pid)
        sub = ConvexHull(K[others])
        eq = sub.equations
        up = np.where(eq[:, 2] > UP_TOL)[0]
        faces = [[int(others[v]) for v in sub.simplices[s]] for s in up]
        f = _locate_covering_face(K, faces, K[pid][:2])
        witness = None
        if f is not None:
            witness = tuple((orbit.labels[v][0], orbit.words[orbit.labels[v][1]])
                            for v in f[:3]) + ((si, ""),)
        return False, witness
    return True, None


def convexity_determinant(face_points, x):
    """Signed volume of the paper's separation condition in Klein coordinates:
    positive iff x lies strictly above the face plane (away from P_{H^2})."""
    a, b, c = (np.asarray(p, dtype=float) for p in face_points)
    n = np.cross(b - a, c - a)
    if n[2] < 0:
        n = -n
    return float(np.dot(n, np.asarray(x) - a))


# ---------------------------------------------------------------------------

def induced_metric(poly):
    """Cone metric induced on the quotient surface (see conemetric)."""
    from .conemetric import ConeMetricSurface
    triangulate(poly)
    tris = [tuple(lab[0] for lab in t.labels) for t in poly.triangles]
    gluing = []
    lengths = {}
    for eid, e in enumerate(poly.edges):
        gluing.append((tuple(e.slots[0]), tuple(e.slots[1])))
        lengths[eid] = e.length
    slot_to_edge = {}
    for eid, e in enumerate(poly.edges):
        for s in e.slots:
            slot_to_edge[tuple(s)] = eid
    return ConeMetricSurface(genus=poly.params.genus, triangles=tris,
                             gluing=gluing, lengths=lengths,
                             slot_to_edge=slot_to_edge)


def export_obj(poly, copies=0):
    """Klein-model mesh of the fundamental faces and their images under
    words of length <= copies, as OBJ text (v/f records)."""
    lines = ["# fuchsian polyhedron, Klein ball coordinates"]
    verts = []
    faces_out = []

    elements = [(w, i) for i, w in enumerate(poly.orbit.words)
                if len(w) <= copies]
    for w, ei in elements:
        M = poly.orbit.matrices[ei]
        for qf in poly.faces:
            idxs = []
            for (si, word) in qf.labels:
                p = M @ G.word_matrix(word, poly.group) @ poly.seeds[si]
                p /= np.sqrt(-minkowski_dot(p, p))
                k = p[:3] / p[3]
                idxs.append(len(verts) + 1)
                verts.append(k)
            faces_out.append(idxs)
    for v in verts:
        lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for f in faces_out:
        lines.append("f " + " ".join(str(i) for i in f))
    return "\n".join(lines) + "\n"
