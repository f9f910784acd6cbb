import numpy as np
import pytest

from fuchsian import conemetric as CM
from fuchsian import polyhedra as P
from fuchsian import realize as R
from fuchsian.errors import AngleOutOfRange

from conftest import random_convex_params


@pytest.fixture(scope="module")
def target_and_params(zvc_poly_n2):
    metric = CM.validate(P.induced_metric(zvc_poly_n2))
    return metric, zvc_poly_n2.params


def test_round_trip_fixed_point(target_and_params):
    metric, params = target_and_params
    res = R.solve(R.RealizationProblem(target=metric, initial=params))
    assert res.iterations <= 1
    assert res.residual < 1e-12


def test_jittered_start_recovers(target_and_params):
    metric, params = target_and_params
    rng = np.random.default_rng(21)
    vec = params.vector()
    jit = vec.copy()
    n = params.n_vertices
    jit[-n:] *= 1 + rng.uniform(-0.1, 0.1, n)
    jit[6:6 + 2 * n] += rng.uniform(-0.05, 0.05, 2 * n) * 0.05
    res = R.solve(R.RealizationProblem(target=metric,
                                       initial=params.replace_vector(jit)))
    assert res.residual < 1e-8
    assert np.max(np.abs(res.params.vector() - vec)) < 1e-6


def test_uniqueness_two_jitters(target_and_params):
    metric, params = target_and_params
    rng = np.random.default_rng(33)
    vec = params.vector()
    n = params.n_vertices
    outs = []
    for _ in range(2):
        jit = vec.copy()
        jit[-n:] *= 1 + rng.uniform(-0.1, 0.1, n)
        jit[6:6 + 2 * n] += rng.uniform(-0.05, 0.05, 2 * n) * 0.05
        res = R.solve(R.RealizationProblem(target=metric,
                                           initial=params.replace_vector(jit)))
        outs.append(res.params.vector())
    assert np.max(np.abs(outs[0] - outs[1])) < 1e-5


def test_homotopy_record_monotone(target_and_params, zvc_group, zvc_polygon):
    rng = np.random.default_rng(55)
    gen = random_convex_params(rng, 2, zvc_group, zvc_polygon)
    ref = P.build(gen)
    metric = CM.validate(P.induced_metric(ref))
    vec = gen.vector()
    jit = vec.copy()
    jit[-2:] *= 1.08
    res = R.solve(R.RealizationProblem(target=metric,
                                       initial=gen.replace_vector(jit)))
    ts = [r["t"] for r in res.homotopy]
    assert all(t2 > t1 for t1, t2 in zip(ts, ts[1:]))
    assert all(r["residual"] <= 1e-8 for r in res.homotopy)
    assert ts[-1] == 1.0


def test_infeasible_target_rejected(target_and_params):
    metric, params = target_and_params
    # halving all lengths inflates the angle sums past 2*pi
    bad = CM.ConeMetricSurface(genus=metric.genus, triangles=metric.triangles,
                               gluing=metric.gluing,
                               lengths={k: 0.35 * v
                                        for k, v in metric.lengths.items()},
                               slot_to_edge=metric.slot_to_edge)
    with pytest.raises(AngleOutOfRange):
        CM.validate(bad)
    with pytest.raises(AngleOutOfRange):
        R.solve(R.RealizationProblem(target=bad, initial=params))


def test_default_initial_convex(target_and_params):
    metric, _ = target_and_params
    for variant in range(3):
        params = R.default_initial(metric, variant=variant)
        assert np.all(params.heights == params.heights[0])
        ok, _ = P.check_convexity(params)
        assert ok


def test_find_isomorphism_identity(target_and_params):
    metric, _ = target_and_params
    lab = CM.labeling_of(metric)
    perm = R.find_isomorphism(lab, lab)
    assert perm is not None
    v = CM.edge_vector(metric)
    assert np.array_equal(v[perm], v)
