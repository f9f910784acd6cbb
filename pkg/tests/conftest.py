import numpy as np
import pytest

from fuchsian import groups, polyhedra


@pytest.fixture(scope="session")
def regular_g2():
    return groups.regular_group(2)


@pytest.fixture(scope="session")
def zvc_polygon():
    return groups.build_polygon(groups.reference_zvc(2), genus=2)


@pytest.fixture(scope="session")
def zvc_group(zvc_polygon):
    return groups.group_from_polygon(zvc_polygon)


@pytest.fixture(scope="session")
def symmetric_poly():
    """n=1 equal-height polyhedron over the regular genus-2 group."""
    params = polyhedra.PolyhedronParams(genus=2, preset="regular",
                                        base_points=[[0.0, 0.0]], heights=[1.0])
    return polyhedra.build(params)


@pytest.fixture(scope="session")
def zvc_poly_n2(zvc_group):
    kc = groups.klein2(zvc_group.polygon.centroid())
    params = polyhedra.PolyhedronParams(
        genus=2, zvc=zvc_group.zvc,
        base_points=[[kc[0] - 0.02, kc[1]], [kc[0] + 0.03, kc[1] + 0.02]],
        heights=[1.0, 1.1])
    return polyhedra.build(params)


def random_convex_params(rng, n, zvc_group, zvc_polygon, height_spread=0.15,
                         point_spread=0.12):
    """Random convex instance near the reference chart point."""
    kc = groups.klein2(zvc_group.polygon.centroid())
    while True:
        zvc = zvc_group.zvc + rng.uniform(-5e-3, 5e-3, len(zvc_group.zvc))
        pts = []
        tries = 0
        while len(pts) < n and tries < 200:
            tries += 1
            p = kc + rng.uniform(-point_spread, point_spread, 2)
            if all(np.hypot(*(p - q)) > 0.05 for q in pts):
                pts.append(p)
        if len(pts) < n:
            continue
        heights = 1.0 + rng.uniform(-height_spread, height_spread, n)
        params = polyhedra.PolyhedronParams(genus=2, zvc=zvc,
                                            base_points=np.array(pts),
                                            heights=heights)
        try:
            ok, _ = polyhedra.check_convexity(params, near=zvc_polygon)
        except Exception:
            continue
        if ok:
            return params
