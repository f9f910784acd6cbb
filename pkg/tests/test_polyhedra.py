import numpy as np
import pytest

from fuchsian import groups as G
from fuchsian import polyhedra as P
from fuchsian.errors import ChartViolation, CombinatoricsChange, NotConvex
from fuchsian.hyperboloid import equal_height_chord, klein_map


def test_symmetric_build_shape(symmetric_poly):
    poly = symmetric_poly
    assert poly.L_used <= 6
    assert len(poly.faces) == 1 and len(poly.faces[0].labels) == 8
    assert len(poly.triangles) == 6
    assert len(poly.edges) == 9          # 6g-6+3n for g=2, n=1
    assert 0 < poly.cone_angles[0] < 2 * np.pi


def test_symmetric_equal_heights_on_umbilic(symmetric_poly):
    from fuchsian.hyperboloid import height
    h = height(symmetric_poly.orbit.points)
    assert np.max(np.abs(h - 1.0)) < 1e-9


def test_symmetric_chord_law(symmetric_poly):
    poly = symmetric_poly
    d = 1.0
    for e in poly.edges:
        if e.is_diagonal:
            continue
        # plane distance between the base points of the edge's endpoints
        q = G.word_matrix(e.word, poly.group) @ poly.seeds[e.seed_b]
        pa = P.klein_map(poly.seeds[e.seed_a])

        from fuchsian.hyperboloid import distance, project_to_plane
        ell = distance(project_to_plane(poly.seeds[e.seed_a]),
                       project_to_plane(q))
        assert e.length == pytest.approx(equal_height_chord(d, ell), abs=1e-9)


def test_edge_counts_scale_with_vertices(zvc_poly_n2):
    assert len(zvc_poly_n2.edges) == 12
    f = len(zvc_poly_n2.triangles)
    e = len(zvc_poly_n2.edges)
    n = zvc_poly_n2.n_vertices
    assert f == 2 * e / 3
    assert n - e + f == 2 - 2 * zvc_poly_n2.params.genus


def test_upper_envelope_normals(symmetric_poly):
    K = klein_map(symmetric_poly.orbit.points)
    for f in symmetric_poly.star_point_ids:
        pts = K[f]
        c = pts.mean(axis=0)
        _, _, vt = np.linalg.svd(pts - c)
        n = vt[2]
        assert abs(n[2]) > 1e-9


def test_faces_planar(symmetric_poly):
    K = klein_map(symmetric_poly.orbit.points)
    for qf in symmetric_poly.faces:
        pts = K[qf.point_ids]
        c = pts.mean(axis=0)
        _, s, _ = np.linalg.svd(pts - c)
        assert s[-1] < 1e-8


def test_generator_translate_of_face_is_supported(symmetric_poly):
    """Orbit equivariance: the image of a fundamental face under a generator
    is again a supported hull face of the same orbit cloud."""
    poly = symmetric_poly
    K = klein_map(poly.orbit.points)
    g = poly.group.generators[0]
    for qf in poly.faces:
        img = []
        for (si, w) in qf.labels:
            x = g @ G.word_matrix(w, poly.group) @ poly.seeds[si]
            img.append(x[:3] / x[3])
        img = np.array(img)
        c = img.mean(axis=0)
        _, _, vt = np.linalg.svd(img - c)
        n = vt[2] if vt[2][2] > 0 else -vt[2]
        d = (K - c) @ n
        assert d.max() < 1e-9


def test_height_bounds(zvc_poly_n2):
    from fuchsian.hyperboloid import height
    dmin, dmax = zvc_poly_n2.heights_range()
    hv = height(zvc_poly_n2.seeds)
    assert np.all(hv >= dmin - 1e-12) and np.all(hv <= dmax + 1e-12)


def test_check_convexity_true(zvc_poly_n2):
    ok, wit = P.check_convexity(zvc_poly_n2.params)
    assert ok and wit is None


def test_check_convexity_false_with_witness(zvc_group):
    kc = G.klein2(zvc_group.polygon.centroid())
    params = P.PolyhedronParams(
        genus=2, zvc=zvc_group.zvc,
        base_points=[[kc[0] - 0.02, kc[1]], [kc[0] + 0.03, kc[1] + 0.02]],
        heights=[0.04, 1.5])
    ok, wit = P.check_convexity(params)
    assert not ok
    assert wit is not None and wit[-1][0] == 0    # offending seed named


def test_build_raises_not_convex(zvc_group):
    kc = G.klein2(zvc_group.polygon.centroid())
    params = P.PolyhedronParams(
        genus=2, zvc=zvc_group.zvc,
        base_points=[[kc[0] - 0.02, kc[1]], [kc[0] + 0.03, kc[1] + 0.02]],
        heights=[0.04, 1.5])
    with pytest.raises(NotConvex):
        P.build(params)


def test_determinant_sign_group_invariant(symmetric_poly):
    poly = symmetric_poly
    qf = poly.faces[0]
    pts4 = [G.word_matrix(w, poly.group) @ poly.seeds[s]
            for (s, w) in qf.labels[:3]]
    x4 = poly.seeds[0] * np.cosh(0.3) + np.array([0, 0, 1, 0]) * np.sinh(0.3)
    base = P.convexity_determinant([p[:3] / p[3] for p in pts4], x4[:3] / x4[3])
    for g in poly.group.generators[:2]:
        moved = [g @ p for p in pts4]
        xm = g @ x4
        det = P.convexity_determinant([p[:3] / p[3] for p in moved],
                                      xm[:3] / xm[3])
        assert np.sign(det) == np.sign(base)


def test_base_point_containment_enforced(zvc_group):
    with pytest.raises(ChartViolation):
        P.PolyhedronParams(genus=2, zvc=zvc_group.zvc,
                           base_points=[[0.7, 0.7]], heights=[1.0]
                           ).make_group()
        P.seed_points(P.PolyhedronParams(genus=2, zvc=zvc_group.zvc,
                                         base_points=[[0.7, 0.7]],
                                         heights=[1.0]),
                      zvc_group)


def test_induced_metric_validates(zvc_poly_n2):
    from fuchsian import conemetric as CM
    m = CM.validate(P.induced_metric(zvc_poly_n2))
    assert np.max(np.abs(m.cone_angles - zvc_poly_n2.cone_angles)) < 1e-12


def test_isometry_invariant_edge_lengths(zvc_poly_n2):
    # distances between labeled representatives are unchanged by a global
    # isometry of the configuration
    from fuchsian.hyperboloid import distance
    poly = zvc_poly_n2
    rot = np.array([[np.cos(0.7), -np.sin(0.7), 0.0],
                    [np.sin(0.7), np.cos(0.7), 0.0],
                    [0.0, 0.0, 1.0]])
    boost = np.array([[np.cosh(0.4), 0.0, np.sinh(0.4)],
                      [0.0, 1.0, 0.0],
                      [np.sinh(0.4), 0.0, np.cosh(0.4)]])
    from fuchsian.hyperboloid import apply_isometry, normalize_point
    iso = G.extend_to_h3(rot @ boost)
    for e in poly.edges:
        q = normalize_point(G.word_matrix(e.word, poly.group) @ poly.seeds[e.seed_b])
        d0 = distance(poly.seeds[e.seed_a], q)
        d2 = distance(apply_isometry(iso, poly.seeds[e.seed_a]),
                      apply_isometry(iso, q))
        assert d2 == pytest.approx(d0, abs=1e-9)


def test_support_certificate_roundtrip(zvc_poly_n2):
    group, seeds, mats, pts = P.recompute_orbit_points(
        zvc_poly_n2, zvc_poly_n2.params)
    P.support_check(zvc_poly_n2, pts)


def test_support_certificate_detects_change(zvc_poly_n2):
    params = zvc_poly_n2.params
    vec = params.vector()
    vec = vec.copy()
    vec[-1] = 0.05          # drop one height drastically
    bad = params.replace_vector(vec)
    group, seeds, mats, pts = P.recompute_orbit_points(zvc_poly_n2, bad)
    with pytest.raises(CombinatoricsChange):
        P.support_check(zvc_poly_n2, pts)


def test_export_obj_fundamental(symmetric_poly):
    text = P.export_obj(symmetric_poly, copies=0)
    lines = text.strip().splitlines()
    vs = [l for l in lines if l.startswith("v ")]
    fs = [l for l in lines if l.startswith("f ")]
    assert len(fs) == len(symmetric_poly.faces)
    coords = np.array([[float(t) for t in l.split()[1:]] for l in vs])
    assert np.all(np.linalg.norm(coords, axis=1) < 1.0)
    # between the two half-ellipsoids of radii (1, 1, tanh d): pointwise the
    # scaled height z / sqrt(1 - x^2 - y^2) stays within [tanh dmin, tanh dmax]
    dmin, dmax = symmetric_poly.heights_range()
    scale = np.sqrt(1.0 - coords[:, 0] ** 2 - coords[:, 1] ** 2)
    ratio = coords[:, 2] / scale
    assert np.all(ratio <= np.tanh(dmax) + 1e-9)
    assert np.all(ratio >= np.tanh(dmin) - 1e-9)


def test_export_obj_copies_grow(symmetric_poly):
    t0 = P.export_obj(symmetric_poly, copies=0)
    t1 = P.export_obj(symmetric_poly, copies=1)
    assert t1.count("\nf ") > t0.count("\nf ")
