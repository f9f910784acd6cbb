import numpy as np
import pytest

from fuchsian import hyperboloid as H
from fuchsian.errors import DegenerateTriangle, InvalidPoint, OutsideBall


def random_point(rng, rmax=0.9):
    k = rng.uniform(-rmax, rmax, 3)
    while k @ k >= rmax * rmax:
        k = rng.uniform(-rmax, rmax, 3)
    return H.klein_unmap(k)


def klein_arc_length(k1, k2, n=20000):
    """Quadrature of the Klein-model line element along the straight chord.

    Independent oracle for the distance formula: ds^2 =
    ((1-|x|^2)|dx|^2 + (x.dx)^2) / (1-|x|^2)^2."""
    t = (np.arange(n) + 0.5) / n
    x = k1[None, :] + t[:, None] * (k2 - k1)[None, :]
    dx = (k2 - k1) / n
    r2 = np.sum(x * x, axis=1)
    xdx = x @ dx
    ds = np.sqrt(((1 - r2) * (dx @ dx) + xdx ** 2)) / (1 - r2)
    return float(np.sum(ds))


def test_distance_identity():
    assert H.distance(H.X_C, H.X_C) == 0.0


def test_distance_axis_param():
    p = H.point(0, 0, np.sinh(1.0), np.cosh(1.0))
    assert H.distance(H.X_C, p) == pytest.approx(1.0, abs=1e-14)


def test_distance_matches_arc_length_quadrature():
    rng = np.random.default_rng(1)
    for _ in range(5):
        p, q = random_point(rng, 0.8), random_point(rng, 0.8)
        d = H.distance(p, q)
        arc = klein_arc_length(H.klein_map(p), H.klein_map(q))
        assert d == pytest.approx(arc, abs=1e-8)


def test_distance_symmetric_positive():
    rng = np.random.default_rng(2)
    p, q = random_point(rng), random_point(rng)
    assert H.distance(p, q) == H.distance(q, p) > 0


def test_distance_rejects_off_sheet():
    with pytest.raises(InvalidPoint):
        H.distance(np.array([0.0, 0.0, 0.0, 1.1]), H.X_C)


def test_klein_center():
    assert np.allclose(H.klein_map(H.X_C), 0.0)


def test_klein_umbilic_radius():
    d = 0.7
    p = H.point(0, 0, np.sinh(d), np.cosh(d))
    assert H.klein_map(p)[2] == pytest.approx(np.tanh(d), abs=1e-15)


def test_klein_collinearity():
    rng = np.random.default_rng(3)
    p, q = random_point(rng), random_point(rng)
    u = H.tangent_toward(p, q)
    pts = [np.cosh(t) * p + np.sinh(t) * u for t in (0.3, 0.9, 1.4)]
    k = np.array([H.klein_map(x) for x in pts])
    cross = np.cross(k[1] - k[0], k[2] - k[0])
    assert np.linalg.norm(cross) < 1e-10


def test_klein_round_trip():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        k = rng.uniform(-0.57, 0.57, 3)
        worst = max(worst, float(np.max(np.abs(
            H.klein_map(H.klein_unmap(k)) - k))))
    assert worst < 1e-12


def test_klein_unmap_rejects_outside():
    with pytest.raises(OutsideBall):
        H.klein_unmap(np.array([0.8, 0.6, 0.2]))


def test_project_axis_and_plane_fixed():
    p = H.point(0, 0, np.sinh(1.2), np.cosh(1.2))
    assert np.allclose(H.project_to_plane(p), H.X_C, atol=1e-14)
    q = H.point(0.3, 0.1, 0.0, np.sqrt(1 + 0.09 + 0.01))
    assert np.allclose(H.project_to_plane(q), q, atol=1e-14)


def test_projection_minimizes_distance():
    rng = np.random.default_rng(5)
    for _ in range(10):
        p = random_point(rng)
        foot = H.project_to_plane(p)
        d0 = H.distance(p, foot)
        for _ in range(200):
            k = rng.uniform(-0.95, 0.95, 2)
            if k @ k >= 0.95 ** 2:
                continue
            q = H.klein_unmap(np.array([k[0], k[1], 0.0]))
            assert H.distance(p, q) >= d0 - 1e-12


def test_height_cases():
    assert H.height(H.X_C) == 0.0
    d = 0.8
    p = H.point(0, 0, np.sinh(d), np.cosh(d))
    assert H.height(p) == pytest.approx(d, abs=1e-14)


def test_hyperbolic_pythagoras():
    rng = np.random.default_rng(6)
    for _ in range(50):
        p = random_point(rng)
        lhs = np.cosh(H.distance(H.X_C, p))
        rhs = (np.cosh(H.height(p))
               * np.cosh(H.distance(H.X_C, H.project_to_plane(p))))
        assert abs(lhs - rhs) < 1e-10


def test_lift_contracts():
    assert np.allclose(H.lift_to_height(H.X_C, 0.0), H.X_C)
    d = 1.3
    assert np.allclose(H.lift_to_height(H.X_C, d),
                       [0, 0, np.sinh(d), np.cosh(d)], atol=1e-14)
    rng = np.random.default_rng(7)
    for _ in range(20):
        k = rng.uniform(-0.8, 0.8, 2)
        if k @ k >= 0.9:
            continue
        y = H.klein_unmap(np.array([k[0], k[1], 0.0]))
        d = rng.uniform(0.1, 2.0)
        x = H.lift_to_height(y, d)
        assert H.height(x) == pytest.approx(d, abs=1e-10)
        assert np.max(np.abs(H.project_to_plane(x) - y)) < 1e-10


def test_equal_height_chord_law():
    rng = np.random.default_rng(8)
    for _ in range(20):
        k1, k2 = rng.uniform(-0.7, 0.7, 2), rng.uniform(-0.7, 0.7, 2)
        y1 = H.klein_unmap(np.array([k1[0], k1[1], 0.0]))
        y2 = H.klein_unmap(np.array([k2[0], k2[1], 0.0]))
        ell = H.distance(y1, y2)
        if ell < 1e-6:
            continue
        d = rng.uniform(0.2, 1.5)
        got = H.distance(H.lift_to_height(y1, d), H.lift_to_height(y2, d))
        assert got == pytest.approx(H.equal_height_chord(d, ell), abs=1e-10)


def test_spherical_angle_octant():
    assert H.spherical_angle(np.pi / 2, np.pi / 2, np.pi / 2) == pytest.approx(np.pi / 2)


def test_spherical_angle_equilateral():
    # direct evaluation of the closed form at a = b = c = pi/3
    a = np.pi / 3
    expected = np.arccos((np.cos(a) - np.cos(a) ** 2) / np.sin(a) ** 2)
    assert H.spherical_angle(a, a, a) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(np.arccos(1.0 / 3.0), abs=1e-15)


def test_spherical_angle_flat():
    assert H.spherical_angle(1.2, 0.5, 0.7) == pytest.approx(np.pi, abs=1e-7)


def test_spherical_angle_degenerate():
    with pytest.raises(DegenerateTriangle):
        H.spherical_angle(2.0, 0.5, 0.7)


def test_isometry_preserves_form():
    from fuchsian import groups
    rng = np.random.default_rng(9)
    grp = groups.regular_group(2)
    for G in grp.generators:
        for _ in range(20):
            p, q = random_point(rng), random_point(rng)
            lhs = H.minkowski_dot(G @ p, G @ q)
            assert abs(lhs - H.minkowski_dot(p, q)) < 1e-10


def test_umbilic_surface_is_ellipsoid():
    rng = np.random.default_rng(10)
    d = 0.9
    r = np.tanh(d)
    for _ in range(200):
        k = rng.uniform(-0.9, 0.9, 2)
        if k @ k >= 0.95:
            continue
        y = H.klein_unmap(np.array([k[0], k[1], 0.0]))
        x = H.lift_to_height(y, d)
        a, b, c = H.klein_map(x)
        assert abs(a * a + b * b + c * c / r ** 2 - 1.0) < 1e-10


def test_center_distance_dominates_projection():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = random_point(rng)
        assert (H.distance(H.X_C, p)
                >= H.distance(H.X_C, H.project_to_plane(p)) - 1e-12)
