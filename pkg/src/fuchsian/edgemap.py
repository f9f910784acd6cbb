"""The squared-edge-length map of a polyhedron chart and its rank certificate.

The map sends the 6g-6+3n chart coordinates (Z-V-C, base points, heights) to
the squared lengths of the fundamental-domain triangulation edges, in the
canonical edge order of the induced metric.  Full rank of its square Jacobian
is the numerical form of infinitesimal rigidity.
"""

from dataclasses import dataclass

import numpy as np

from . import polyhedra as P
from .conemetric import labeling_of
from .errors import CombinatoricsChange

RANK_THRESHOLD = 1e-8


@dataclass
class EdgeMapEvaluation:
    params: "P.PolyhedronParams"
    values: np.ndarray
    jacobian: np.ndarray | None = None
    singular_values: np.ndarray | None = None

    @property
    def dimension(self):
        return len(self.values)


def _canonical_permutation(reference):
    """Map canonical edge positions to the polyhedron's edge indices."""
    metric = P.induced_metric(reference)
    lab = labeling_of(metric)
    perm = []
    for gi in lab.edge_order:
        slot_a, _ = lab.gluing[gi]
        perm.append(metric.slot_to_edge[slot_a])
    return np.array(perm, dtype=int)


def evaluate(params, reference, check_support=True, group=None):
    """Squared edge lengths at params on the reference combinatorics.

    The reference polyhedron fixes the labeled triangulation; lengths are
    the distances d(x_i, W x_j) of the labeled edges under the rebuilt
    group.  Raises CombinatoricsChange if the reference faces stop
    supporting the orbit cloud (hull incidence would differ)."""
    near = reference.group.polygon
    if check_support:
        group, seeds, mats, pts = P.recompute_orbit_points(reference, params,
                                                           near=near, group=group)
        P.support_check(reference, pts)
    else:
        if group is None:
            group = params.make_group(near=near)
        seeds = P.seed_points(params, group)
    lengths = P.edge_lengths_for(reference, group, seeds, params=params)
    perm = getattr(reference, "_edge_perm", None)
    if perm is None:
        perm = _canonical_permutation(reference)
        reference._edge_perm = perm
    values = lengths[perm] ** 2
    return EdgeMapEvaluation(params=params, values=values)


def jacobian(params, reference, step=1e-6, max_halvings=6):
    """Central-difference Jacobian of the squared-edge-length map.

    The stencil uses a relative step; a combinatorics change at any stencil
    point halves the step, up to max_halvings, before failing."""
    base = evaluate(params, reference)
    vec = params.vector()
    dim = len(vec)
    if len(base.values) != dim:
        raise CombinatoricsChange(
            f"edge count {len(base.values)} != parameter dimension {dim}")
    n_zvc = 6 * params.genus - 6
    base_group = reference.group if params.zvc is not None else None
    if base_group is not None and np.max(np.abs(params.zvc - base_group.zvc)) > 0:
        base_group = None
    if base_group is None and params.zvc is not None:
        base_group = params.make_group(near=reference.group.polygon)
    J = np.empty((dim, dim))
    for j in range(dim):
        h = step * max(1.0, abs(vec[j]))
        # columns that leave the group untouched reuse the base group
        reuse = base_group if j >= n_zvc else None
        for attempt in range(max_halvings + 1):
            try:
                vp = vec.copy()
                vm = vec.copy()
                vp[j] += h
                vm[j] -= h
                ep = evaluate(params.replace_vector(vp), reference, group=reuse)
                em = evaluate(params.replace_vector(vm), reference, group=reuse)
                J[:, j] = (ep.values - em.values) / (2 * h)
                break
            except CombinatoricsChange:
                if attempt == max_halvings:
                    raise
                h *= 0.5
    svals = np.linalg.svd(J, compute_uv=False)
    return EdgeMapEvaluation(params=params, values=base.values, jacobian=J,
                             singular_values=svals)


def certificate_from_singular_values(svals, threshold=RANK_THRESHOLD):
    svals = np.asarray(svals, dtype=float)
    smin, smax = float(svals.min()), float(svals.max())
    ratio = smin / smax if smax > 0 else 0.0
    verdict = "RIGID" if ratio > threshold else "INCONCLUSIVE"
    return {"sigma_min": smin, "sigma_max": smax, "ratio": ratio,
            "verdict": verdict, "threshold": threshold}


def rigidity_certificate(params, reference=None, step=1e-6):
    """Run the Jacobian and report the rank verdict.

    RIGID when sigma_min / sigma_max exceeds the relative threshold; the
    rigidity theorem predicts this for every convex instance."""
    if reference is None:
        reference = P.build(params)
    ev = jacobian(params, reference, step=step)
    report = certificate_from_singular_values(ev.singular_values)
    report["dimension"] = ev.dimension
    return report, ev
