"""Hyperbolic cone metrics as gluings of geodesic triangles."""

from dataclasses import dataclass, field

import numpy as np

from .errors import (AngleOutOfRange, EulerMismatch, GluingMismatch,
                     LabelMismatch, TriangleInequality)
from .hyperboloid import hyperbolic_angle


@dataclass
class ConeMetricSurface:
    """Triangulated surface with hyperbolic edge lengths and cone points.

    triangles: vertex-label triples; slot s of triangle t is the edge from
    corner s to corner s+1.  gluing: pairs of slots, a fixed-point-free
    involution.  lengths: one hyperbolic length per edge class (edge classes
    are the gluing pairs, keyed by their canonical index).
    """

    genus: int
    triangles: list
    gluing: list
    lengths: dict
    slot_to_edge: dict = field(default=None, repr=False)
    cone_angles: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.triangles = [tuple(int(v) for v in t) for t in self.triangles]
        self.gluing = [tuple(sorted((tuple(a), tuple(b))))
                       for a, b in self.gluing]
        self.lengths = {int(k): float(v) for k, v in self.lengths.items()}
        if self.slot_to_edge is None:
            self.slot_to_edge = {}
            for eid, (a, b) in enumerate(self.gluing):
                self.slot_to_edge[a] = eid
                self.slot_to_edge[b] = eid
        else:
            self.slot_to_edge = {tuple(k): int(v)
                                 for k, v in self.slot_to_edge.items()}

    @property
    def n_cone_points(self):
        return len({v for t in self.triangles for v in t})

    def slot_endpoints(self, slot):
        t, s = slot
        tri = self.triangles[t]
        return tri[s], tri[(s + 1) % 3]

    def slot_length(self, slot):
        return self.lengths[self.slot_to_edge[tuple(slot)]]

    def triangle_sides(self, t):
        """Side lengths (l0, l1, l2) with ls the slot-s edge."""
        return tuple(self.slot_length((t, s)) for s in range(3))

    def triangle_angles(self, t):
        """Interior angles at corners 0, 1, 2."""
        l0, l1, l2 = self.triangle_sides(t)
        # corner s is bounded by slots s and s-1; the opposite side is s+1
        return (hyperbolic_angle(l1, l2, l0),
                hyperbolic_angle(l2, l0, l1),
                hyperbolic_angle(l0, l1, l2))


def validate(metric):
    """Check all surface invariants; returns the metric with cone angles set.

    Raises TriangleInequality, GluingMismatch, EulerMismatch, or
    AngleOutOfRange naming the offending simplex.
    """
    m = metric
    f = len(m.triangles)
    labels = sorted({v for t in m.triangles for v in t})
    n = len(labels)
    if labels != list(range(n)):
        raise GluingMismatch("vertex labels must be 0..n-1")

    for t in range(f):
        l0, l1, l2 = m.triangle_sides(t)
        for li in (l0, l1, l2):
            if not li > 0:
                raise TriangleInequality(f"triangle {t} has a nonpositive side")
        if l0 >= l1 + l2 or l1 >= l0 + l2 or l2 >= l0 + l1:
            raise TriangleInequality(
                f"triangle {t} sides ({l0:.6g}, {l1:.6g}, {l2:.6g}) violate "
                "the strict triangle inequality")

    all_slots = {(t, s) for t in range(f) for s in range(3)}
    seen = set()
    for a, b in m.gluing:
        if a == b:
            raise GluingMismatch(f"slot {a} glued to itself")
        for s in (a, b):
            if s not in all_slots:
                raise GluingMismatch(f"gluing references unknown slot {s}")
            if s in seen:
                raise GluingMismatch(f"slot {s} appears in two gluing pairs")
            seen.add(s)
        ea, eb = m.slot_endpoints(a), m.slot_endpoints(b)
        if ea != (eb[1], eb[0]):
            raise GluingMismatch(
                f"slots {a} and {b} glue endpoints {ea} to {eb}; an "
                "orientable gluing matches them head-to-tail")
    if seen != all_slots:
        missing = sorted(all_slots - seen)[:3]
        raise GluingMismatch(f"unglued slots, e.g. {missing}; surface not closed")

    e = len(m.gluing)
    chi = n - e + f
    if chi != 2 - 2 * m.genus:
        raise EulerMismatch(f"Euler characteristic {chi} != {2 - 2 * m.genus} "
                            f"(n={n}, e={e}, f={f})")

    # each vertex class must close into a single corner cycle
    glued = {}
    for a, b in m.gluing:
        glued[a] = b
        glued[b] = a
    corner_seen = set()
    cycles = 0
    for t0 in range(f):
        for c0 in range(3):
            if (t0, c0) in corner_seen:
                continue
            cycles += 1
            t, c = t0, c0
            label = m.triangles[t0][c0]
            while (t, c) not in corner_seen:
                corner_seen.add((t, c))
                if m.triangles[t][c] != label:
                    raise GluingMismatch(
                        f"corner walk at vertex {label} reaches label "
                        f"{m.triangles[t][c]}")
                # cross the slot leaving this corner
                t2, s2 = glued[(t, c)]
                t, c = t2, (s2 + 1) % 3
    if cycles != n:
        raise EulerMismatch(f"{cycles} corner cycles for {n} vertex labels; "
                            "the gluing does not close into a surface")

    angles = np.zeros(n)
    for t in range(f):
        a0, a1, a2 = m.triangle_angles(t)
        tri = m.triangles[t]
        angles[tri[0]] += a0
        angles[tri[1]] += a1
        angles[tri[2]] += a2
    for i, th in enumerate(angles):
        if not 0.0 < th < 2 * np.pi:
            raise AngleOutOfRange(f"cone angle {th:.6f} at vertex {i} outside "
                                  "(0, 2*pi)")
    m.cone_angles = angles
    return m


def total_area(metric):
    """Sum of triangle angle defects pi - alpha - beta - gamma."""
    s = 0.0
    for t in range(len(metric.triangles)):
        a0, a1, a2 = metric.triangle_angles(t)
        s += np.pi - a0 - a1 - a2
    return float(s)


def gauss_bonnet_area(metric):
    """2*pi*(2g-2) + sum of curvatures 2*pi - theta_i."""
    m = metric if metric.cone_angles is not None else validate(metric)
    return float(2 * np.pi * (2 * m.genus - 2)
                 + np.sum(2 * np.pi - m.cone_angles))


# ---------------------------------------------------------------------------
# triangulation labelings and edge vectors

@dataclass(frozen=True)
class TriangulationLabeling:
    """Canonical combinatorial form of a labeled triangulation.

    Edge classes are ordered lexicographically by (min endpoint label, max
    endpoint label, smallest incident slot); the edge vector follows this
    order."""

    genus: int
    triangles: tuple
    gluing: tuple
    edge_order: tuple          # gluing-pair index per canonical edge position

    @property
    def n_edges(self):
        return len(self.gluing)


def labeling_of(metric):
    tris = tuple(tuple(t) for t in metric.triangles)
    gluing = tuple(sorted(tuple(sorted((tuple(a), tuple(b))))
                          for a, b in metric.gluing))
    keys = []
    for gi, (a, b) in enumerate(gluing):
        va, vb = metric.slot_endpoints(a)
        keys.append(((min(va, vb), max(va, vb), min(a, b)), gi))
    keys.sort()
    return TriangulationLabeling(genus=metric.genus, triangles=tris,
                                 gluing=gluing,
                                 edge_order=tuple(gi for _, gi in keys))


def edge_vector(metric, labeling=None):
    """Squared edge lengths in the canonical edge order of the labeling."""
    if metric.cone_angles is None:
        validate(metric)
    own = labeling_of(metric)
    if labeling is None:
        labeling = own
    if (labeling.triangles, labeling.gluing) != (own.triangles, own.gluing):
        raise LabelMismatch("labeling does not match the surface combinatorics")
    out = np.empty(len(labeling.edge_order))
    for pos, gi in enumerate(labeling.edge_order):
        a, _ = labeling.gluing[gi]
        out[pos] = metric.slot_length(a) ** 2
    return out


def metric_from_edge_vector(labeling, squared, genus=None):
    """Inverse of edge_vector on a fixed labeling."""
    squared = np.asarray(squared, dtype=float)
    if np.any(squared <= 0):
        raise TriangleInequality("squared lengths must be positive")
    lengths = {}
    slot_to_edge = {}
    for pos, gi in enumerate(labeling.edge_order):
        a, b = labeling.gluing[gi]
        lengths[gi] = float(np.sqrt(squared[pos]))
        slot_to_edge[a] = gi
        slot_to_edge[b] = gi
    return ConeMetricSurface(genus=genus if genus is not None else labeling.genus,
                             triangles=list(labeling.triangles),
                             gluing=list(labeling.gluing), lengths=lengths,
                             slot_to_edge=slot_to_edge)
