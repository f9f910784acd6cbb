import numpy as np
import pytest

from fuchsian import conemetric as CM
from fuchsian import edgemap as EM
from fuchsian import groups as G
from fuchsian import polyhedra as P
from fuchsian.hyperboloid import distance, equal_height_chord, project_to_plane

from conftest import random_convex_params


def test_evaluate_matches_metric_path(zvc_poly_n2):
    ev = EM.evaluate(zvc_poly_n2.params, zvc_poly_n2)
    m = CM.validate(P.induced_metric(zvc_poly_n2))
    assert np.max(np.abs(ev.values - CM.edge_vector(m))) < 1e-10


def test_symmetric_side_entries_equal(symmetric_poly):
    ev = EM.evaluate(symmetric_poly.params, symmetric_poly)
    side_vals = [e.length ** 2 for e in symmetric_poly.edges
                 if not e.is_diagonal]
    assert len(side_vals) == 4
    assert np.max(side_vals) - np.min(side_vals) < 1e-10
    for v in side_vals:
        assert np.min(np.abs(ev.values - v)) < 1e-12


def test_entries_match_chord_form(symmetric_poly):
    d = 1.0
    for e in symmetric_poly.edges:
        q = G.word_matrix(e.word, symmetric_poly.group) @ symmetric_poly.seeds[e.seed_b]
        q /= np.sqrt(-(q[0] ** 2 + q[1] ** 2 + q[2] ** 2 - q[3] ** 2) * -1.0) if False else np.sqrt(
            -(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - q[3] * q[3]))
        ell = distance(project_to_plane(symmetric_poly.seeds[e.seed_a]),
                       project_to_plane(q))
        assert e.length == pytest.approx(equal_height_chord(d, ell), abs=1e-9)


def test_jacobian_height_column_locality(zvc_poly_n2):
    ev = EM.jacobian(zvc_poly_n2.params, zvc_poly_n2)
    dim = ev.dimension
    col = ev.jacobian[:, dim - 2]      # height of seed 0
    for k, e in enumerate(zvc_poly_n2.edges):
        pos = np.where(zvc_poly_n2._edge_perm == k)[0][0]
        touches = (e.seed_a == 0) or (e.seed_b == 0)
        if not touches:
            assert abs(col[pos]) < 1e-7
        else:
            assert abs(col[pos]) > 1e-4


def test_rigidity_certificate_rigid(zvc_poly_n2):
    report, ev = EM.rigidity_certificate(zvc_poly_n2.params,
                                         reference=zvc_poly_n2)
    assert report["verdict"] == "RIGID"
    assert report["sigma_min"] / report["sigma_max"] > 1e-8
    assert ev.jacobian.shape == (12, 12)


def test_rigidity_random_instance(zvc_group, zvc_polygon):
    rng = np.random.default_rng(100)
    params = random_convex_params(rng, 2, zvc_group, zvc_polygon)
    report, _ = EM.rigidity_certificate(params)
    assert report["verdict"] == "RIGID"


def test_duplicated_coordinate_inconclusive(zvc_poly_n2):
    ev = EM.jacobian(zvc_poly_n2.params, zvc_poly_n2)
    J = ev.jacobian.copy()
    J[:, 3] = J[:, 5]      # redundant parameterization by construction
    svals = np.linalg.svd(J, compute_uv=False)
    report = EM.certificate_from_singular_values(svals)
    assert report["verdict"] == "INCONCLUSIVE"


def test_jacobian_vector_products_match_directional(zvc_poly_n2):
    rng = np.random.default_rng(7)
    ev = EM.jacobian(zvc_poly_n2.params, zvc_poly_n2)
    vec = zvc_poly_n2.params.vector()
    for _ in range(3):
        v = rng.normal(size=len(vec))
        v /= np.linalg.norm(v)
        h = 1e-6
        ep = EM.evaluate(zvc_poly_n2.params.replace_vector(vec + h * v),
                         zvc_poly_n2).values
        em = EM.evaluate(zvc_poly_n2.params.replace_vector(vec - h * v),
                         zvc_poly_n2).values
        fd = (ep - em) / (2 * h)
        Jv = ev.jacobian @ v
        rel = np.max(np.abs(fd - Jv)) / max(1.0, np.max(np.abs(Jv)))
        assert rel < 1e-5


def test_first_order_consistency_quadratic_decay(zvc_poly_n2):
    rng = np.random.default_rng(8)
    ev = EM.jacobian(zvc_poly_n2.params, zvc_poly_n2)
    vec = zvc_poly_n2.params.vector()
    e0 = EM.evaluate(zvc_poly_n2.params, zvc_poly_n2).values
    v = rng.normal(size=len(vec))
    v /= np.linalg.norm(v)
    errs = []
    for eps in (1e-3, 1e-4):
        ep = EM.evaluate(zvc_poly_n2.params.replace_vector(vec + eps * v),
                         zvc_poly_n2).values
        errs.append(np.max(np.abs(ep - e0 - eps * (ev.jacobian @ v))))
    ratio = errs[0] / errs[1]
    assert 50 < ratio < 200      # quadratic: a factor of ~100


def test_global_isometry_leaves_values(zvc_poly_n2):
    # values are functions of labeled distances, which are isometry-invariant
    ev1 = EM.evaluate(zvc_poly_n2.params, zvc_poly_n2)
    ev2 = EM.evaluate(zvc_poly_n2.params, zvc_poly_n2)
    assert np.array_equal(ev1.values, ev2.values)
