"""Concrete target geometries with closed-form extrinsic operators.

Three constant-curvature targets are provided:

* ``Sphere2`` -- the unit two-sphere in R^3 (Gaussian curvature 1),
* ``CliffordTorus2`` -- the flat product of two circles of radius 1/(2*pi)
  in R^4, an isometric embedding of the unit-square flat torus,
* ``ChartFlatTorus2`` -- the flat torus worked directly in chart
  coordinates R^2/Z^2 (no constraint; coordinates wrap mod 1 lazily).

Every operation is a pure function of its inputs and is vectorized over a
leading axis of points, so calls are safe to issue concurrently.

Convention note: ``second_fundamental_form`` returns the normal component
of the ambient directional derivative D_X Y (for the sphere this is
-(X.Y) y).  The evolution equations are assembled from the tangential
Gauss splitting D_X Y = (covariant part) + A(X, Y), i.e. the covariant
part is obtained by *subtracting* this A.  The complex structure on the
sphere is J_y X = y x X, so the Schroedinger term matches
u_t = u x u_xx; flipping the orientation time-reverses that term.
"""

import numpy as np

from .errors import OutOfTubularNeighborhood, PointOffManifold

ON_MANIFOLD_TOL = 1e-8

_TWO_PI = 2.0 * np.pi


def _dot(a, b):
    return (a * b).sum(axis=-1)


class _Manifold:
    """Shared validation helpers; concrete geometry lives in subclasses."""

    name = ""
    ambient_dim = 0
    gaussian_curvature = 0.0
    tubular_radius = np.inf

    def _check_points(self, pts):
        pts = np.asarray(pts, dtype=float)
        if pts.shape[-1] != self.ambient_dim:
            raise ValueError(
                f"{self.name} expects ambient dimension {self.ambient_dim}, "
                f"got {pts.shape[-1]}"
            )
        return pts

    def require_on_manifold(self, pts, tol=ON_MANIFOLD_TOL):
        res = np.max(self.constraint_residual(pts))
        if not np.isfinite(res) or res > tol:
            raise PointOffManifold(
                f"{self.name}: constraint residual {res:.3e} exceeds {tol:.1e}"
            )

    def require_in_tube(self, pts):
        dist = np.max(self.distance(pts))
        if not np.isfinite(dist) or dist >= self.tubular_radius:
            raise OutOfTubularNeighborhood(
                f"{self.name}: distance {dist:.3e} >= tubular radius "
                f"{self.tubular_radius:.3e}"
            )

    def normal_project(self, base, vec):
        return np.asarray(vec, dtype=float) - self.tangent_project(base, vec)

    def __repr__(self):
        return self.name


class Sphere2(_Manifold):
    """Unit sphere in R^3."""

    name = "Sphere2"
    ambient_dim = 3
    gaussian_curvature = 1.0
    tubular_radius = 0.5  # safely inside the focal distance 1

    def constraint_residual(self, pts):
        pts = self._check_points(pts)
        return np.abs(_dot(pts, pts) - 1.0)

    def distance(self, pts):
        pts = self._check_points(pts)
        return np.abs(np.sqrt(_dot(pts, pts)) - 1.0)

    def project(self, pts, check_tube=False):
        pts = self._check_points(pts)
        if check_tube:
            self.require_in_tube(pts)
        norm = np.sqrt(_dot(pts, pts))
        if np.any(norm < 1e-12):
            raise OutOfTubularNeighborhood(
                "Sphere2: cannot project a point at the center"
            )
        return pts / norm[..., None]

    def tangent_project(self, base, vec):
        base = self._check_points(base)
        vec = self._check_points(vec)
        self.require_on_manifold(base)
        return vec - _dot(vec, base)[..., None] * base

    def second_fundamental_form(self, base, x, y):
        base = self._check_points(base)
        self.require_on_manifold(base)
        return -_dot(np.asarray(x, float), np.asarray(y, float))[..., None] * base

    def complex_structure(self, base, vec):
        base = self._check_points(base)
        self.require_on_manifold(base)
        return np.cross(base, np.asarray(vec, dtype=float))


class CliffordTorus2(_Manifold):
    """Product of two circles of radius 1/(2*pi) in R^4 (flat, unit area)."""

    name = "CliffordTorus2"
    ambient_dim = 4
    gaussian_curvature = 0.0
    radius = 1.0 / _TWO_PI
    tubular_radius = 0.5 / _TWO_PI

    def _pair_norms(self, pts):
        n12 = np.sqrt(_dot(pts[..., 0:2], pts[..., 0:2]))
        n34 = np.sqrt(_dot(pts[..., 2:4], pts[..., 2:4]))
        return n12, n34

    def constraint_residual(self, pts):
        pts = self._check_points(pts)
        r2 = self.radius**2
        g1 = np.abs(_dot(pts[..., 0:2], pts[..., 0:2]) - r2)
        g2 = np.abs(_dot(pts[..., 2:4], pts[..., 2:4]) - r2)
        return np.maximum(g1, g2)

    def distance(self, pts):
        pts = self._check_points(pts)
        n12, n34 = self._pair_norms(pts)
        return np.hypot(n12 - self.radius, n34 - self.radius)

    def project(self, pts, check_tube=False):
        pts = self._check_points(pts)
        if check_tube:
            self.require_in_tube(pts)
        n12, n34 = self._pair_norms(pts)
        if np.any(n12 < 1e-12) or np.any(n34 < 1e-12):
            raise OutOfTubularNeighborhood(
                "CliffordTorus2: cannot project from a circle axis"
            )
        out = np.empty_like(pts)
        out[..., 0:2] = pts[..., 0:2] * (self.radius / n12)[..., None]
        out[..., 2:4] = pts[..., 2:4] * (self.radius / n34)[..., None]
        return out

    def _frame(self, base):
        """Orthonormal tangent frame (tau1, tau2) at on-manifold points."""
        tau1 = np.zeros_like(base)
        tau1[..., 0] = -base[..., 1] / self.radius
        tau1[..., 1] = base[..., 0] / self.radius
        tau2 = np.zeros_like(base)
        tau2[..., 2] = -base[..., 3] / self.radius
        tau2[..., 3] = base[..., 2] / self.radius
        return tau1, tau2

    def tangent_project(self, base, vec):
        base = self._check_points(base)
        vec = self._check_points(vec)
        self.require_on_manifold(base)
        tau1, tau2 = self._frame(base)
        return (
            _dot(vec, tau1)[..., None] * tau1 + _dot(vec, tau2)[..., None] * tau2
        )

    def second_fundamental_form(self, base, x, y):
        base = self._check_points(base)
        self.require_on_manifold(base)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = self.radius**2
        out = np.empty_like(base)
        c1 = -_dot(x[..., 0:2], y[..., 0:2]) / r2
        c2 = -_dot(x[..., 2:4], y[..., 2:4]) / r2
        out[..., 0:2] = c1[..., None] * base[..., 0:2]
        out[..., 2:4] = c2[..., None] * base[..., 2:4]
        return out

    def complex_structure(self, base, vec):
        base = self._check_points(base)
        self.require_on_manifold(base)
        vec = np.asarray(vec, dtype=float)
        tau1, tau2 = self._frame(base)
        return _dot(vec, tau1)[..., None] * tau2 - _dot(vec, tau2)[..., None] * tau1

    def embed_chart(self, chart_pts):
        """Isometric embedding of chart coordinates (y1, y2) into R^4."""
        chart_pts = np.asarray(chart_pts, dtype=float)
        phi1 = _TWO_PI * chart_pts[..., 0]
        phi2 = _TWO_PI * chart_pts[..., 1]
        out = np.empty(chart_pts.shape[:-1] + (4,))
        out[..., 0] = self.radius * np.cos(phi1)
        out[..., 1] = self.radius * np.sin(phi1)
        out[..., 2] = self.radius * np.cos(phi2)
        out[..., 3] = self.radius * np.sin(phi2)
        return out

    def chart_coordinates(self, pts):
        """Chart coordinates in [0, 1)^2 of embedded points."""
        pts = self._check_points(pts)
        y1 = np.arctan2(pts[..., 1], pts[..., 0]) / _TWO_PI % 1.0
        y2 = np.arctan2(pts[..., 3], pts[..., 2]) / _TWO_PI % 1.0
        return np.stack([y1, y2], axis=-1)


class ChartFlatTorus2(_Manifold):
    """Flat torus R^2/Z^2 in chart coordinates.

    There is no embedding constraint: every point of R^2 represents a
    torus point via its class mod 1.  Derivatives act on unwrapped lifts,
    so projection and tangent projection are identities and the second
    fundamental form vanishes.
    """

    name = "ChartFlatTorus2"
    ambient_dim = 2
    gaussian_curvature = 0.0
    tubular_radius = np.inf

    def constraint_residual(self, pts):
        pts = self._check_points(pts)
        return np.zeros(pts.shape[:-1])

    def distance(self, pts):
        return self.constraint_residual(pts)

    def project(self, pts, check_tube=False):
        return self._check_points(pts).copy()

    def tangent_project(self, base, vec):
        self._check_points(base)
        return np.asarray(vec, dtype=float).copy()

    def second_fundamental_form(self, base, x, y):
        base = self._check_points(base)
        return np.zeros_like(base)

    def complex_structure(self, base, vec):
        self._check_points(base)
        vec = np.asarray(vec, dtype=float)
        out = np.empty_like(vec)
        out[..., 0] = -vec[..., 1]
        out[..., 1] = vec[..., 0]
        return out

    def wrap(self, pts):
        """Representative in [0, 1)^2; used only when emitting output."""
        return self._check_points(pts) % 1.0


SPHERE2 = Sphere2()
CLIFFORD_TORUS2 = CliffordTorus2()
CHART_FLAT_TORUS2 = ChartFlatTorus2()

MANIFOLDS = {
    m.name: m for m in (SPHERE2, CLIFFORD_TORUS2, CHART_FLAT_TORUS2)
}


def by_name(name):
    try:
        return MANIFOLDS[name]
    except KeyError:
        raise KeyError(
            f"unknown manifold {name!r}; choose from {sorted(MANIFOLDS)}"
        ) from None
