"""Hyperboloid model of H^3 and the exact-model operations built on it.

Points live on the sheet x1^2 + x2^2 + x3^2 - x4^2 = -1, x4 > 0 of R^{3,1}.
The invariant plane P_{H^2} is the slice {x3 = 0}; the Klein model is the
central projection x -> (x1, x2, x3) / x4 onto the open unit ball.  All
lengths are intrinsic hyperbolic units, all angles radians.
"""

import numpy as np

from .errors import DegenerateTriangle, InvalidPoint, NotAnIsometry, OutsideBall

J4 = np.diag([1.0, 1.0, 1.0, -1.0])

X_C = np.array([0.0, 0.0, 0.0, 1.0])          # model center
E3 = np.array([0.0, 0.0, 1.0, 0.0])           # unit normal of P_{H^2} at x_c

SHEET_TOL = 1e-12
CLAMP_TOL = 1e-12


def minkowski_dot(p, q):
    """Bilinear form of signature (3,1); supports broadcasting on the last axis."""
    return (p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1]
            + p[..., 2] * q[..., 2] - p[..., 3] * q[..., 3])


def point(x1, x2, x3, x4):
    """Construct a validated point of H^3."""
    p = np.array([x1, x2, x3, x4], dtype=float)
    validate_point(p)
    return p


def validate_point(p, tol=SHEET_TOL):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 4:
        raise InvalidPoint(f"expected 4 coordinates, got shape {p.shape}")
    norm = minkowski_dot(p, p)
    if np.any(np.abs(norm + 1.0) > tol * np.maximum(1.0, np.abs(p[..., 3]) ** 2)):
        raise InvalidPoint(f"<x,x> = {norm} is not -1 within tolerance")
    if np.any(p[..., 3] <= 0):
        raise InvalidPoint("point not on the x4 > 0 sheet")
    return p


def normalize_point(p):
    """Rescale onto the sheet; bounds drift after long isometry words."""
    p = np.asarray(p, dtype=float)
    s = np.sqrt(-minkowski_dot(p, p))
    return p / s[..., np.newaxis] if p.ndim > 1 else p / s


def _safe_arccosh(c, tol=CLAMP_TOL):
    c = np.asarray(c, dtype=float)
    if np.any(c < 1.0 - tol * np.maximum(1.0, np.abs(c))):
        raise InvalidPoint(f"arccosh argument {c} below 1 beyond clamping window")
    return np.arccosh(np.maximum(c, 1.0))


def distance(p, q):
    """Hyperbolic distance arccosh(-<p,q>)."""
    validate_point(p)
    validate_point(q)
    return _safe_arccosh(-minkowski_dot(p, q))


def klein_map(p):
    """Central projection onto the Klein ball, (x1,x2,x3)/x4."""
    p = np.asarray(p, dtype=float)
    return p[..., :3] / p[..., 3:4]


def klein_unmap(k):
    """Inverse of klein_map; raises OutsideBall on ||k|| >= 1."""
    k = np.asarray(k, dtype=float)
    r2 = np.sum(k * k, axis=-1)
    if np.any(r2 >= 1.0):
        raise OutsideBall(f"squared norm {r2} not inside the open unit ball")
    x4 = 1.0 / np.sqrt(1.0 - r2)
    return np.concatenate([k * x4[..., np.newaxis] if k.ndim > 1 else k * x4,
                           np.atleast_1d(x4) if k.ndim == 1 else x4[..., np.newaxis]],
                          axis=-1)


def project_to_plane(p):
    """Foot of the orthogonal projection onto P_{H^2} = {x3 = 0}."""
    p = np.asarray(p, dtype=float)
    s = np.sqrt(p[..., 3] ** 2 - p[..., 0] ** 2 - p[..., 1] ** 2)
    out = p.copy()
    out[..., 2] = 0.0
    return out / s[..., np.newaxis] if p.ndim > 1 else out / s


def height(p):
    """Distance from p to its projection on P_{H^2} (arcsinh |x3|)."""
    p = np.asarray(p, dtype=float)
    return np.arcsinh(np.abs(p[..., 2]))


def lift_to_height(y, d):
    """Point at distance d above y in P_{H^2}, cosh(d) y + sinh(d) e3."""
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y[..., 2]) > 1e-12):
        raise InvalidPoint("lift base must lie on P_{H^2} (x3 = 0)")
    return np.cosh(d) * y + np.sinh(d) * E3


def spherical_angle(a, b, c, tol=CLAMP_TOL):
    """Angle opposite side a in a spherical triangle with sides a, b, c.

    Spherical law of cosines for sides, solved for the angle:
    cos a = cos b cos c + sin b sin c cos(alpha).
    """
    for s in (a, b, c):
        if not 0.0 < s < np.pi:
            raise DegenerateTriangle(f"side {s} outside (0, pi)")
    if a > b + c + tol or a < abs(b - c) - tol:
        raise DegenerateTriangle(f"triangle inequality fails for sides ({a}, {b}, {c})")
    arg = (np.cos(a) - np.cos(b) * np.cos(c)) / (np.sin(b) * np.sin(c))
    if arg > 1.0 + tol or arg < -1.0 - tol:
        raise DegenerateTriangle(f"cosine {arg} outside [-1,1] beyond clamping window")
    return float(np.arccos(np.clip(arg, -1.0, 1.0)))


def hyperbolic_angle(a, b, c):
    """Interior angle opposite side a of a hyperbolic triangle with sides a,b,c."""
    arg = (np.cosh(b) * np.cosh(c) - np.cosh(a)) / (np.sinh(b) * np.sinh(c))
    return float(np.arccos(np.clip(arg, -1.0, 1.0)))


def equal_height_chord(d, ell):
    """Distance between the height-d lifts of two plane points at distance ell."""
    return float(np.arccosh(np.cosh(d) ** 2 * np.cosh(ell) - np.sinh(d) ** 2))


# ---------------------------------------------------------------------------
# isometries

ISO_TOL = 1e-10


def validate_isometry(G, tol=ISO_TOL):
    """Orientation- and sheet-preserving Lorentz matrix."""
    G = np.asarray(G, dtype=float)
    if G.shape != (4, 4):
        raise NotAnIsometry(f"expected 4x4 matrix, got {G.shape}")
    scale = max(1.0, float(np.max(np.abs(G))) ** 2)
    if np.max(np.abs(G.T @ J4 @ G - J4)) > tol * scale:
        raise NotAnIsometry("G^T J G != J")
    if np.linalg.det(G) < 0:
        raise NotAnIsometry("det G != +1")
    if G[3, 3] <= 0:
        raise NotAnIsometry("G does not preserve the x4 > 0 sheet")
    return G


def isometry_inverse(G):
    """J G^T J, exact inverse for Lorentz matrices."""
    return J4 @ np.asarray(G).T @ J4


def apply_isometry(G, p):
    """Apply and renormalize onto the sheet."""
    return normalize_point(np.asarray(p) @ np.asarray(G).T)


# ---------------------------------------------------------------------------
# tangent-space helpers

def tangent_toward(p, q):
    """Unit tangent at p along the geodesic to q."""
    d = distance(p, q)
    if d < 1e-14:
        raise InvalidPoint("tangent direction undefined for coincident points")
    return (q + minkowski_dot(q, p) * p) / np.sinh(d)


def tangent_angle(u, v):
    """Angle between unit tangent vectors at a common base point."""
    return float(np.arccos(np.clip(minkowski_dot(u, v), -1.0, 1.0)))


def tangent_norm(v):
    """Norm of a tangent vector (the form is positive definite on tangent spaces)."""
    return float(np.sqrt(max(0.0, minkowski_dot(v, v))))


def project_tangent(p, v):
    """Component of ambient vector v tangent to the sheet at p."""
    return v + minkowski_dot(v, p) * p
