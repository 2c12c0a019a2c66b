"""Discrete closed curves, covariant calculus along them, and identity checks.

A curve is a uniformly sampled periodic map into one of the concrete
targets.  Differentiation is spectral; the covariant derivative of a
tangent field is the pointwise tangential projection of its spectral
x-derivative.  On the chart torus the position samples may wind, so the
velocity is computed from the periodic deviation plus the integer winding
vector; all higher derivatives act on the (periodic) velocity.
"""

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import TangencyViolation
from .manifolds import CHART_FLAT_TORUS2, ON_MANIFOLD_TOL, by_name


@dataclass
class ClosedCurve:
    """Uniformly sampled closed curve with its target geometry.

    ``samples`` has shape (N, d) with N a power of two >= 16 and d the
    ambient dimension of ``manifold``.  Samples of chart-torus curves are
    stored as an unwrapped lift; wrapping happens only on output.
    """

    samples: np.ndarray
    manifold: object

    def __post_init__(self):
        if isinstance(self.manifold, str):
            self.manifold = by_name(self.manifold)
        self.samples = np.asarray(self.samples, dtype=float)
        n = self.samples.shape[0]
        if self.samples.ndim != 2 or self.samples.shape[1] != self.manifold.ambient_dim:
            raise ValueError(
                f"samples must have shape (N, {self.manifold.ambient_dim})"
            )
        if n < 16 or n & (n - 1):
            raise ValueError("grid size must be a power of two >= 16")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def n(self):
        return self.samples.shape[0]

    def with_samples(self, samples):
        return ClosedCurve(samples, self.manifold)

    def winding(self):
        """Integer winding vector of the unwrapped chart lift.

        Zero for embedded targets.  Recovery from samples assumes every
        step increment is below half a period, which holds for any
        resolved curve.
        """
        if self.manifold is not CHART_FLAT_TORUS2:
            return np.zeros(self.manifold.ambient_dim)
        return np.rint(self.samples[-1] - self.samples[0])

    def trend(self):
        """Linear winding part W*x of the samples (chart torus only)."""
        w = self.winding()
        if not w.any():
            return np.zeros_like(self.samples)
        return spectral.grid(self.n)[:, None] * w[None, :]

    def velocity(self):
        """Spectral first derivative of the position, winding-aware."""
        w = self.winding()
        if w.any():
            return w[None, :] + spectral.spectral_derivative(
                self.samples - self.trend()
            )
        return spectral.spectral_derivative(self.samples)

    def velocity_field(self):
        return TangentFieldOnCurve(self.velocity(), self, validate=False)

    def off_manifold(self):
        """Max constraint residual over the samples."""
        return float(np.max(self.manifold.constraint_residual(self.samples)))

    def require_on_manifold(self, tol=ON_MANIFOLD_TOL):
        self.manifold.require_on_manifold(self.samples, tol)

    def output_samples(self):
        """Samples as emitted to artifacts (chart coordinates wrapped)."""
        if self.manifold is CHART_FLAT_TORUS2:
            return self.manifold.wrap(self.samples)
        return self.samples.copy()


@dataclass
class TangentFieldOnCurve:
    """Per-sample ambient vectors tangent to the target along a curve."""

    vectors: np.ndarray
    base: ClosedCurve
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.shape != self.base.samples.shape:
            raise ValueError("field shape must match the base curve samples")
        if self.validate:
            res = tangency_residual(self.base, self.vectors)
            scale = np.max(np.abs(self.vectors)) or 1.0
            if res > ON_MANIFOLD_TOL * scale:
                raise TangencyViolation(
                    f"normal component {res:.3e} exceeds "
                    f"{ON_MANIFOLD_TOL:.0e} * {scale:.3e}"
                )


def tangency_residual(curve, vectors):
    """Largest pointwise normal component of an ambient field along a curve."""
    normal = curve.manifold.normal_project(curve.samples, vectors)
    return float(np.max(np.abs(normal)))


def _vectors(v):
    return v.vectors if isinstance(v, TangentFieldOnCurve) else np.asarray(v, float)


def covariant_derivative(curve, vfield):
    """Covariant derivative along the curve: tangential part of d/dx.

    For the velocity field this agrees with the extrinsic assembly
    v_xx - A(v)(v_x, v_x), where A is the second fundamental form.
    """
    if isinstance(vfield, TangentFieldOnCurve):
        arr = vfield.vectors
    else:
        arr = np.asarray(vfield, dtype=float)
        res = tangency_residual(curve, arr)
        scale = np.max(np.abs(arr)) or 1.0
        if res > ON_MANIFOLD_TOL * scale:
            raise TangencyViolation(
                f"input field has normal component {res:.3e}"
            )
    out = curve.manifold.tangent_project(
        curve.samples, spectral.spectral_derivative(arr)
    )
    return TangentFieldOnCurve(out, curve, validate=False)


def covariant_tower(curve, j):
    """[u_x, cov u_x, ..., cov^j u_x] by iterating the covariant derivative.

    Capped at j = 6: each level amplifies roundoff by one factor of the
    top retained frequency, and nothing in the lab needs more.
    """
    if not 0 <= j <= 6:
        raise ValueError("tower order must lie in [0, 6]")
    fields = [curve.velocity_field()]
    for _ in range(j):
        fields.append(covariant_derivative(curve, fields[-1]))
    return fields


def sobolev_norm(curve, m):
    """Bundle Sobolev norm (sum_{j<=m} ||cov^j u_x||_L2^2)^(1/2), m <= 5."""
    if not 0 <= m <= 5:
        raise ValueError("Sobolev order must lie in [0, 5]")
    tower = covariant_tower(curve, m)
    total = sum(spectral.l2_inner(f.vectors, f.vectors) for f in tower)
    return float(np.sqrt(total))


def curvature_apply(k_gauss, x, y, z):
    """Constant-curvature tensor R(X,Y)Z = K(g(Y,Z)X - g(X,Z)Y), pointwise."""
    bases = {id(v.base) for v in (x, y, z) if isinstance(v, TangentFieldOnCurve)}
    if len(bases) > 1:
        raise ValueError("curvature arguments must share one base curve")
    xv, yv, zv = _vectors(x), _vectors(y), _vectors(z)
    gyz = (yv * zv).sum(axis=-1, keepdims=True)
    gxz = (xv * zv).sum(axis=-1, keepdims=True)
    out = k_gauss * (gyz * xv - gxz * yv)
    base = next(
        (v.base for v in (x, y, z) if isinstance(v, TangentFieldOnCurve)), None
    )
    if base is not None:
        return TangentFieldOnCurve(out, base, validate=False)
    return out


def h1_distance(c1, c2):
    """Discrete H1 distance between two curves on the same target.

    Chart-torus lifts are aligned by removing the integer offset of their
    mean difference before comparing.
    """
    if c1.manifold is not c2.manifold or c1.n != c2.n:
        raise ValueError("curves must share manifold and grid")
    diff = c1.samples - c2.samples
    if c1.manifold is CHART_FLAT_TORUS2:
        diff = diff - np.rint(diff.mean(axis=0))[None, :]
    dvel = c1.velocity() - c2.velocity()
    return float(
        np.sqrt(spectral.l2_inner(diff, diff) + spectral.l2_inner(dvel, dvel))
    )


def resample(curve, n):
    """Spectral interpolation of a curve onto another power-of-two grid.

    Exact for band-limited curves; winding lifts are handled by
    detrending.  Upsampled points are re-projected to the target (the
    interpolant of on-manifold samples is off-manifold at truncation
    level).
    """
    if n == curve.n:
        return curve
    trend = curve.trend()
    coef = np.fft.rfft(curve.samples - trend, axis=0)
    out = np.zeros((n // 2 + 1, curve.samples.shape[1]), dtype=complex)
    m = min(coef.shape[0], out.shape[0])
    out[:m] = coef[:m] * (n / curve.n)
    dev = np.fft.irfft(out, n=n, axis=0)
    w = curve.winding()
    if w.any():
        dev += spectral.grid(n)[:, None] * w[None, :]
    else:
        dev = curve.manifold.project(dev)
    return ClosedCurve(dev, curve.manifold)


def sup_distance(c1, c2):
    """Largest pointwise distance between two curves (torus-aware)."""
    if c1.manifold is not c2.manifold or c1.n != c2.n:
        raise ValueError("curves must share manifold and grid")
    diff = c1.samples - c2.samples
    if c1.manifold is CHART_FLAT_TORUS2:
        diff = (diff + 0.5) % 1.0 - 0.5
    return float(np.max(np.sqrt((diff**2).sum(axis=-1))))


# ---------------------------------------------------------------------------
# Structural identity checks
# ---------------------------------------------------------------------------


@dataclass
class IdentityReport:
    """Residuals of the structural identities the energy arguments rely on.

    third_pairing[l]   |integral g(cov^{l+3} u_x, cov^l u_x)|   (zero by parts)
    j_pairing[l]       |integral g(cov^{l+1} J cov u_x, cov^l u_x)|
                       (zero by the parallel complex structure + antisymmetry)
    curvature_symmetry max |g(R(X,Y)Z,W) - g(R(W,Z)Y,X)| over random quadruples
    commutator[l]      L2 residual of the covariant t/x commutation rule,
                       approximated by centered differences along a family

    The ``*_rel`` variants divide by the L2 norms of the paired fields;
    those are the meaningful numbers, since the raw integrals of high
    towers are differences of huge cancelling values whose absolute floor
    is set by the ulp of the summands rather than by the discretization.
    Note that for l >= 1 the tower fields are pointwise tangent by
    construction and discrete integration by parts is exact, so the
    third-pairing residual sits at the roundoff floor at *every*
    resolution; only l = 0 (the raw velocity carries a truncation-level
    normal defect) and the J-pairings exhibit spectral decay.
    """

    third_pairing: dict
    j_pairing: dict
    third_pairing_rel: dict
    j_pairing_rel: dict
    curvature_symmetry: float
    commutator: dict


def _default_family(curve, seed=0, decay=1.0, amplitude=1.5):
    """Smooth one-parameter family of curves through ``curve`` at t = 0.

    The path is trigonometric in t (all t-derivatives present) so the
    O(h^2) term of the commutator check is nonzero even on flat targets,
    and the direction amplitude is deliberately large so that term sits
    far above the finite-difference noise floor.
    """
    rng = np.random.default_rng(seed)
    n, d = curve.samples.shape
    modes = np.arange(1, min(n // 2, 12))

    def draw():
        coef = np.zeros((n // 2 + 1, d), dtype=complex)
        coef[modes] = (
            rng.standard_normal((modes.size, d))
            + 1j * rng.standard_normal((modes.size, d))
        ) * np.exp(-decay * modes)[:, None]
        return np.fft.irfft(coef, n=n, axis=0) * n * amplitude

    dir1, dir2 = draw(), draw()
    manifold = curve.manifold

    def family(t):
        pts = curve.samples + np.sin(t) * dir1 + (1.0 - np.cos(t)) * dir2
        if manifold is not CHART_FLAT_TORUS2:
            pts = manifold.project(pts)
        return curve.with_samples(pts)

    return family


def identity_residuals(
    curve, l_max=2, seed=0, n_quadruples=16, family=None, fd_step=1e-4
):
    """Evaluate the discrete residuals of the structural identities.

    The pairing residuals vanish in the continuum by integration by parts;
    discretely they decay spectrally with resolution.  The curvature
    symmetry is algebraic and holds to roundoff.  The commutator residual
    uses second-order centered differences in the family parameter and is
    O(fd_step^2).
    """
    k_gauss = curve.manifold.gaussian_curvature
    tower = covariant_tower(curve, l_max + 3)

    third, third_rel = {}, {}
    for l in range(l_max + 1):
        a, b = tower[l + 3].vectors, tower[l].vectors
        third[l] = abs(spectral.l2_inner(a, b))
        third_rel[l] = third[l] / max(
            spectral.l2_norm(a) * spectral.l2_norm(b), 1e-300
        )

    j_field = curve.manifold.complex_structure(curve.samples, tower[1].vectors)
    j_tower = [TangentFieldOnCurve(j_field, curve, validate=False)]
    for _ in range(l_max + 1):
        j_tower.append(covariant_derivative(curve, j_tower[-1]))
    jpair, jpair_rel = {}, {}
    for l in range(l_max + 1):
        a, b = j_tower[l + 1].vectors, tower[l].vectors
        jpair[l] = abs(spectral.l2_inner(a, b))
        jpair_rel[l] = jpair[l] / max(
            spectral.l2_norm(a) * spectral.l2_norm(b), 1e-300
        )

    rng = np.random.default_rng(seed)
    sym = 0.0
    for _ in range(n_quadruples):
        raw = rng.standard_normal((4,) + curve.samples.shape)
        x, y, z, w = (
            curve.manifold.tangent_project(curve.samples, r) for r in raw
        )
        lhs = (curvature_apply(k_gauss, x, y, z) * w).sum(axis=-1)
        rhs = (curvature_apply(k_gauss, w, z, y) * x).sum(axis=-1)
        sym = max(sym, float(np.max(np.abs(lhs - rhs))))

    commutator = _commutator_residuals(curve, l_max, family, fd_step, seed)
    return IdentityReport(third, jpair, third_rel, jpair_rel, sym, commutator)


def _commutator_residuals(curve, l_max, family, h, seed):
    """L2 residuals of cov_t cov_x^l u_x = cov_x^{l+1} u_t + curvature terms."""
    if family is None:
        family = _default_family(curve, seed=seed)
    manifold = curve.manifold
    k_gauss = manifold.gaussian_curvature
    center = family(0.0)
    plus, minus = family(h), family(-h)

    def tangent(arr):
        return manifold.tangent_project(center.samples, arr)

    u_t = tangent((plus.samples - minus.samples) / (2.0 * h))
    ut_field = TangentFieldOnCurve(u_t, center, validate=False)

    tower_c = covariant_tower(center, l_max)
    tower_p = covariant_tower(plus, l_max)
    tower_m = covariant_tower(minus, l_max)

    ut_tower = [ut_field]
    for _ in range(l_max + 1):
        ut_tower.append(covariant_derivative(center, ut_tower[-1]))

    out = {}
    for l in range(1, l_max + 1):
        lhs = tangent(
            (tower_p[l].vectors - tower_m[l].vectors) / (2.0 * h)
        )
        rhs = ut_tower[l + 1].vectors.copy()
        for j in range(l):
            term = curvature_apply(
                k_gauss, ut_field, tower_c[0], tower_c[l - j - 1]
            )
            for _ in range(j):
                term = covariant_derivative(center, term)
            rhs += term.vectors
        out[l] = float(spectral.l2_norm(lhs - rhs))
    return out
