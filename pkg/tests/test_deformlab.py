import numpy as np
import pytest

from fuchsian import deformlab as D
from fuchsian import groups as G
from fuchsian.errors import CenterSingularity, NotACap, NotInfinitesimalIsometry
from fuchsian.hyperboloid import X_C, distance, minkowski_dot


def tangent_at(rng, x):
    v = rng.normal(size=4)
    return v + minkowski_dot(v, x) * x


# ---------------------------------------------------------------------------
# links

def test_symmetric_link_betas(symmetric_poly):
    link = D.link_of_vertex(symmetric_poly, 0)
    assert link.n == 8
    assert np.max(np.abs(link.betas - np.pi / 4)) < 1e-10
    assert abs(link.beta_sum() - 2 * np.pi) < 1e-8


def test_link_side_sum_is_cone_angle(symmetric_poly, zvc_poly_n2):
    for poly in (symmetric_poly, zvc_poly_n2):
        for v in range(poly.n_vertices):
            link = D.link_of_vertex(poly, v)
            assert abs(link.beta_sum() - 2 * np.pi) < 1e-8
            assert abs(link.side_sum() - poly.cone_angles[v]) < 1e-8
            assert link.is_convex()


def test_synthetic_reflex_link_flagged():
    # a spiky radius profile forces a reflex interior angle
    radii = np.array([0.3, 1.2, 0.3, 0.8, 0.9, 0.8])
    sides = np.array([1.0, 1.0, 0.6, 0.25, 0.25, 0.6])
    link = D.link_from_radii_sides(radii, sides)
    assert not link.is_convex()


def test_beta_from_radii_equator():
    for l in (0.3, 0.7, 1.1):
        assert D.beta_from_radii(np.pi / 2, np.pi / 2, l) == pytest.approx(l, abs=1e-12)


def test_beta_from_radii_closed_form():
    got = D.beta_from_radii(np.pi / 4, np.pi / 4, np.pi / 4)
    want = np.arccos((np.cos(np.pi / 4) - 0.5) / 0.5)
    assert got == pytest.approx(want, abs=1e-12)


def test_beta_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(50):
        ra, rb = rng.uniform(0.2, 1.3, 2)
        l = rng.uniform(abs(ra - rb) + 1e-3, min(ra + rb, np.pi) - 1e-3)
        assert D.beta_from_radii(ra, rb, l) == pytest.approx(
            D.beta_from_radii(rb, ra, l), abs=1e-12)


def test_monotonicity_negative_on_convex():
    rng = np.random.default_rng(1)
    worst = -np.inf
    for _ in range(1000):
        cfg = D.sample_convex_link_config(rng)
        worst = max(worst, D.monotonicity_check(*cfg))
    assert worst < 0


def test_monotonicity_symmetric_partials_equal():
    r, l = 0.6, 0.5
    val = D.monotonicity_check(r, 0.7, r, l, l)
    assert val < 0
    h = 1e-6
    from fuchsian.hyperboloid import spherical_angle
    d_prev = (spherical_angle(l, r, 0.7 + h) - spherical_angle(l, r, 0.7 - h)) / (2 * h)
    d_next = (spherical_angle(l, 0.7 + h, r) - spherical_angle(l, 0.7 - h, r)) / (2 * h)
    assert d_prev == pytest.approx(d_next, abs=1e-6)


def test_monotonicity_degenerates_to_zero():
    # push the quadrilateral toward flat: the sum rises toward 0 from below
    vals = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        r = np.pi / 2 - eps
        vals.append(D.monotonicity_check(r, r, r, 0.05, 0.05))
    assert all(v < 0 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_proposition_no_uniform_up_motion():
    """Links cannot move all radii up to first order: the beta-sum derivative
    against any positive radial velocity is strictly negative."""
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(4, 9))
        radii = rng.uniform(0.3, np.pi / 2 - 0.3, n)
        sides = np.empty(n)
        ok = True
        for i in range(n):
            lo = abs(radii[i] - radii[(i + 1) % n]) + 1e-2
            hi = min(radii[i] + radii[(i + 1) % n], np.pi) - 1e-2
            if lo >= hi:
                ok = False
                break
            sides[i] = rng.uniform(lo, hi)
        if not ok:
            continue
        try:
            link = D.link_from_radii_sides(radii, sides)
        except Exception:
            continue
        if not link.is_convex():
            continue
        rdot = rng.uniform(0.2, 1.0, n)
        h = 1e-6
        lp = D.link_from_radii_sides(radii + h * rdot, sides)
        lm = D.link_from_radii_sides(radii - h * rdot, sides)
        dsum = (lp.beta_sum() - lm.beta_sum()) / (2 * h)
        assert dsum < 0


# ---------------------------------------------------------------------------
# caps

def test_cap_kernel_dimensions():
    rng = np.random.default_rng(3)
    for k in range(10):
        if k % 2 == 0:
            V, faces, bnd = D.random_cap(rng, n_boundary=int(rng.integers(6, 16)),
                                         n_interior=int(rng.integers(1, 8)))
        else:
            V, faces, bnd = D.pyramid_cap(rng, n_boundary=int(rng.integers(7, 39)))
        sys_ = D.cap_system(V, faces, bnd)
        dim_pinned, basis = D.cap_rigidity_kernel(sys_, pin_boundary=True)
        dim_free, _ = D.cap_rigidity_kernel(sys_, pin_boundary=False)
        oracle = D.killing_fields_with_flat_boundary(V, bnd)
        assert dim_pinned == 3 == oracle
        assert dim_free == 6
        assert basis.shape == (3 * len(V), 3)


def test_cap_kernel_contains_horizontal_translations():
    rng = np.random.default_rng(4)
    V, faces, bnd = D.random_cap(rng)
    sys_ = D.cap_system(V, faces, bnd)
    tx = np.zeros(3 * len(V))
    tx[0::3] = 1.0
    assert np.max(np.abs(sys_.matrix @ tx)) < 1e-12


def test_single_triangle_not_a_cap():
    V = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(NotACap):
        D.cap_system(V, [[0, 1, 2]], [0, 1, 2])


def test_cap_rejects_nonplanar_boundary():
    rng = np.random.default_rng(5)
    V, faces, bnd = D.random_cap(rng)
    V = V.copy()
    V[bnd[0], 2] = 0.1
    with pytest.raises(NotACap):
        D.cap_system(V, faces, bnd)


# ---------------------------------------------------------------------------
# Pogorelov

def test_pogorelov_radial_norm_preserved():
    rng = np.random.default_rng(6)
    for _ in range(20):
        k = rng.uniform(-0.6, 0.6, 3)
        if np.linalg.norm(k) < 1e-2:
            continue
        x = D._unklein(k)
        v = np.sinh(0.7) * D.radial_direction(x)
        kp, w = D.pogorelov_map(D.VectorFieldSample(base=x, vector=v))
        from fuchsian.hyperboloid import tangent_norm
        assert np.linalg.norm(w) == pytest.approx(tangent_norm(v), abs=1e-10)


def test_pogorelov_lateral_scaling():
    rng = np.random.default_rng(7)
    for _ in range(20):
        k = rng.uniform(-0.6, 0.6, 3)
        if np.linalg.norm(k) < 1e-2:
            continue
        x = D._unklein(k)
        v = tangent_at(rng, x)
        u_r = D.radial_direction(x)
        v_lat = v - minkowski_dot(v, u_r) * u_r
        mu = distance(X_C, x)
        kp, w = D.pogorelov_map(D.VectorFieldSample(base=x, vector=v_lat))
        from fuchsian.hyperboloid import tangent_norm
        assert np.linalg.norm(w) == pytest.approx(
            tangent_norm(v_lat) / np.cosh(mu), abs=1e-10)


def test_pogorelov_zero_vector():
    x = D._unklein(np.array([0.2, 0.1, 0.3]))
    _, w = D.pogorelov_map(D.VectorFieldSample(base=x, vector=np.zeros(4)))
    assert np.allclose(w, 0.0)


def test_pogorelov_norm_relations_cloud():
    rng = np.random.default_rng(8)
    worst = 0.0
    for k in D.sample_klein_cloud(200, 0.95, 8, r_min=1e-3):
        x = D._unklein(k)
        v = tangent_at(rng, x)
        (a, b), (c, d) = D.pogorelov_norm_relations(x, v)
        worst = max(worst, abs(a - b), abs(c - d))
    assert worst < 1e-10


def test_killing_transfer_basis():
    worst = 0.0
    for A in D.so31_basis():
        worst = max(worst, D.killing_transfer_check(A, n_points=150, seed=1))
    assert worst < 1e-6


def test_killing_transfer_linear_combination():
    rng = np.random.default_rng(9)
    basis = D.so31_basis()
    A = sum(c * B for c, B in zip(rng.normal(size=6), basis))
    assert D.killing_transfer_check(A, n_points=150, seed=2) < 1e-6


def test_non_killing_control_fails():
    assert D.control_field_residual(n_points=150, seed=3) > 1e-2


def test_killing_transfer_rejects_non_algebra():
    with pytest.raises(NotInfinitesimalIsometry):
        D.killing_transfer_check(np.eye(4))


# ---------------------------------------------------------------------------
# Fuchsian Killing fields and decompositions

def _plane_boost():
    K3 = np.zeros((3, 3))
    K3[0, 2] = K3[2, 0] = 1.0
    return K3


def test_extension_restricts_to_plane_value():
    K3 = _plane_boost()
    y2 = G.unklein2((0.2, -0.1))
    base = np.array([y2[0], y2[1], 0.0, y2[2]])
    s = D.extend_fuchsian_killing(K3, base)
    k_val = K3 @ y2
    assert np.allclose(s.vector, [k_val[0], k_val[1], 0.0, k_val[2]], atol=1e-14)


def test_extension_has_zero_vertical_component():
    rng = np.random.default_rng(10)
    K3 = _plane_boost()
    for _ in range(30):
        y2 = G.unklein2(rng.uniform(-0.5, 0.5, 2))
        d = rng.uniform(0.05, 1.8)
        x = np.cosh(d) * np.array([y2[0], y2[1], 0.0, y2[2]]) \
            + np.sinh(d) * np.array([0.0, 0.0, 1.0, 0.0])
        s = D.extend_fuchsian_killing(K3, x)
        dec = D.decompose(s)
        assert np.max(np.abs(dec["vertical"])) < 1e-10


def test_extension_is_lift_differential():
    # the extension at height d is cosh(d) times the plane value,
    # which is the differential of the equidistant projection inverse
    K3 = _plane_boost()
    y2 = G.unklein2((0.15, 0.22))
    d = 0.9
    x = np.cosh(d) * np.array([y2[0], y2[1], 0.0, y2[2]]) \
        + np.sinh(d) * np.array([0.0, 0.0, 1.0, 0.0])
    s = D.extend_fuchsian_killing(K3, x)
    k_val = K3 @ y2
    expected = np.cosh(d) * np.array([k_val[0], k_val[1], 0.0, k_val[2]])
    assert np.allclose(s.vector, expected, atol=1e-12)


def test_decompose_identities():
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = rng.uniform(-0.7, 0.7, 3)
        if not 1e-2 < np.linalg.norm(k) < 0.93:
            continue
        x = D._unklein(k)
        v = tangent_at(rng, x)
        dec = D.decompose(D.VectorFieldSample(base=x, vector=v))
        assert np.max(np.abs(dec["radial"] + dec["lateral"] - v)) < 1e-12
        assert np.max(np.abs(dec["vertical"] + dec["horizontal"] - v)) < 1e-12
        # the paper-style identity across the two splits
        def rad(u):
            ur = dec["radial_direction"]
            return minkowski_dot(u, ur) * ur
        lhs = dec["radial"]
        rhs = rad(dec["horizontal"]) + rad(dec["vertical"])
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_decompose_axis_point_radial_is_vertical():
    x = np.array([0.0, 0.0, np.sinh(0.9), np.cosh(0.9)])
    rng = np.random.default_rng(12)
    v = tangent_at(rng, x)
    dec = D.decompose(D.VectorFieldSample(base=x, vector=v))
    assert np.max(np.abs(dec["radial"] - dec["vertical"])) < 1e-12


def test_decompose_vertical_at_plane_point():
    y2 = G.unklein2((0.3, 0.1))
    x = np.array([y2[0], y2[1], 0.0, y2[2]])
    v = np.array([0.0, 0.0, 1.0, 0.0])      # vertical direction at the plane
    dec = D.decompose(D.VectorFieldSample(base=x, vector=v))
    assert np.max(np.abs(dec["vertical"] - v)) < 1e-12
    assert np.max(np.abs(dec["horizontal"])) < 1e-12


def test_decompose_center_singularity():
    with pytest.raises(CenterSingularity):
        D.decompose(D.VectorFieldSample(base=X_C, vector=np.array([1.0, 0, 0, 0])))
