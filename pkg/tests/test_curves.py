import numpy as np
import pytest

from dcl import spectral
from dcl.curves import (
    ClosedCurve,
    TangentFieldOnCurve,
    covariant_derivative,
    covariant_tower,
    curvature_apply,
    h1_distance,
    resample,
    sobolev_norm,
    sup_distance,
)
from dcl.errors import TangencyViolation
from dcl.manifolds import CHART_FLAT_TORUS2, CLIFFORD_TORUS2, SPHERE2
from dcl.presets import great_circle, latitude_circle, random_smooth, torus_geodesic

TWO_PI = 2.0 * np.pi


def constant_curve(n=32):
    samples = np.tile(np.array([0.0, 0.0, 1.0]), (n, 1))
    return ClosedCurve(samples, SPHERE2)


# ---------------------------------------------------------------------------
# construction and velocity
# ---------------------------------------------------------------------------


def test_grid_size_must_be_power_of_two():
    with pytest.raises(ValueError):
        ClosedCurve(np.zeros((24, 3)), SPHERE2)
    with pytest.raises(ValueError):
        ClosedCurve(np.zeros((8, 3)), SPHERE2)


def test_chart_winding_recovery():
    for winding in ((1, 0), (2, 3), (-1, 1)):
        c = torus_geodesic(CHART_FLAT_TORUS2, *winding, n=64)
        assert np.array_equal(c.winding(), np.array(winding, dtype=float))


def test_chart_velocity_of_winding_line():
    c = torus_geodesic(CHART_FLAT_TORUS2, 1, 0, n=32)
    assert np.max(np.abs(c.velocity() - np.array([1.0, 0.0]))) <= 1e-12


def test_embedded_velocity_is_tangent():
    c = random_smooth(SPHERE2, 64, seed=0, decay=1.0, amplitude=0.3)
    vx = c.velocity()
    normal = SPHERE2.normal_project(c.samples, vx)
    assert np.max(np.abs(normal)) <= 1e-9 * np.max(np.abs(vx))


# ---------------------------------------------------------------------------
# covariant derivative
# ---------------------------------------------------------------------------


def test_great_circle_is_geodesic():
    c = great_circle(64)
    cov = covariant_derivative(c, c.velocity_field())
    assert np.max(np.abs(cov.vectors)) <= 1e-10


def test_chart_straight_line_is_geodesic():
    c = torus_geodesic(CHART_FLAT_TORUS2, 1, 0, n=32)
    cov = covariant_derivative(c, c.velocity_field())
    assert np.max(np.abs(cov.vectors)) <= 1e-12


def test_covariant_derivative_matches_pointwise_projection():
    # oracle: p(u) applied to the plain spectral derivative of u_x
    c = random_smooth(SPHERE2, 64, seed=1, decay=0.8, amplitude=0.3)
    vx = c.velocity()
    oracle = SPHERE2.tangent_project(
        c.samples, spectral.spectral_derivative(vx)
    )
    got = covariant_derivative(c, c.velocity_field()).vectors
    assert np.max(np.abs(got - oracle)) <= 1e-12


def test_covariant_matches_extrinsic_assembly():
    # v_xx - A(v_x, v_x) reproduces the covariant derivative of u_x
    for m, seed in ((SPHERE2, 2), (CLIFFORD_TORUS2, 3)):
        c = random_smooth(m, 64, seed=seed, decay=0.9, amplitude=0.25)
        vx = c.velocity()
        vxx = spectral.spectral_derivative(vx)
        extrinsic = vxx - m.second_fundamental_form(c.samples, vx, vx)
        got = covariant_derivative(c, c.velocity_field()).vectors
        scale = max(1.0, np.max(np.abs(got)))
        assert np.max(np.abs(got - extrinsic)) <= 1e-10 * scale


def test_latitude_covariant_norm_closed_form():
    # |cov u_x|^2 = (2*pi)^4 sin^2(theta) cos^2(theta), derived by expanding
    # p(u) u_xx for the latitude circle; cross-checked against the analytic
    # field W = (2*pi)^2 cos(theta) (e_z - cos(theta) u) at the samples
    theta = 0.7
    c = latitude_circle(theta, 128)
    cov = covariant_derivative(c, c.velocity_field()).vectors
    analytic = TWO_PI**2 * np.cos(theta) * (
        np.array([0.0, 0.0, 1.0])[None, :] - np.cos(theta) * c.samples
    )
    assert np.max(np.abs(cov - analytic)) <= 1e-9
    value = spectral.l2_inner(cov, cov)
    expected = TWO_PI**4 * np.sin(theta) ** 2 * np.cos(theta) ** 2
    assert abs(value - expected) <= 1e-10 * expected


def test_tangency_violation_raises():
    c = great_circle(32)
    bad = np.tile(np.array([0.0, 0.0, 1.0]), (32, 1)) + c.samples
    with pytest.raises(TangencyViolation):
        covariant_derivative(c, bad)


# ---------------------------------------------------------------------------
# tower and Sobolev norms
# ---------------------------------------------------------------------------


def test_tower_great_circle():
    # geodesic: parallel velocity, every higher level vanishes up to the
    # roundoff amplified by one factor of k_max per derivative
    c = great_circle(64)
    tower = covariant_tower(c, 3)
    assert len(tower) == 4
    assert np.max(np.abs(tower[0].vectors - c.velocity())) == 0.0
    k_max = TWO_PI * c.n / 2
    for j, f in enumerate(tower[1:], start=1):
        assert np.max(np.abs(f.vectors)) <= 1e-12 * k_max**j


def test_tower_constant_curve():
    tower = covariant_tower(constant_curve(), 3)
    for f in tower:
        assert np.max(np.abs(f.vectors)) <= 1e-14


def test_sobolev_examples():
    assert sobolev_norm(constant_curve(), 3) == 0.0
    assert abs(sobolev_norm(great_circle(64), 2) - TWO_PI) <= 1e-10
    theta = np.pi / 5
    expected = np.sqrt(
        TWO_PI**2 * np.sin(theta) ** 2
        + TWO_PI**4 * np.sin(theta) ** 2 * np.cos(theta) ** 2
    )
    assert abs(sobolev_norm(latitude_circle(theta, 128), 1) - expected) <= 1e-9


def test_sobolev_monotone_in_m():
    c = random_smooth(SPHERE2, 64, seed=4, decay=0.8, amplitude=0.3)
    norms = [sobolev_norm(c, m) for m in range(5)]
    assert all(b >= a for a, b in zip(norms, norms[1:]))


def test_chart_clifford_norm_consistency():
    # isometric embedding: covariant norms agree between chart and product
    chart = ClosedCurve(
        torus_geodesic(CHART_FLAT_TORUS2, 1, 2, n=128).samples
        + 0.05 * np.stack([np.sin(TWO_PI * spectral.grid(128)),
                           np.cos(2 * TWO_PI * spectral.grid(128))], axis=-1),
        CHART_FLAT_TORUS2,
    )
    embedded = ClosedCurve(CLIFFORD_TORUS2.embed_chart(chart.samples),
                           CLIFFORD_TORUS2)
    for m in (0, 1, 2, 3):
        a = sobolev_norm(chart, m)
        b = sobolev_norm(embedded, m)
        assert abs(a - b) <= 1e-8 * max(a, 1.0)


# ---------------------------------------------------------------------------
# curvature tensor
# ---------------------------------------------------------------------------


def _random_tangent_fields(curve, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        raw = rng.standard_normal(curve.samples.shape)
        out.append(
            TangentFieldOnCurve(
                curve.manifold.tangent_project(curve.samples, raw),
                curve,
                validate=False,
            )
        )
    return out


def test_curvature_antisymmetry_and_flat():
    c = great_circle(32)
    x, z = _random_tangent_fields(c, 2, 5)
    assert np.max(np.abs(curvature_apply(1.0, x, x, z).vectors)) == 0.0
    assert np.max(np.abs(curvature_apply(0.0, x, z, z).vectors)) == 0.0


def test_curvature_orthonormal_example():
    # X orthonormal to Z pointwise, Y = Z: R(X,Y)Z = K X
    c = great_circle(32)
    x = TangentFieldOnCurve(
        c.velocity() / TWO_PI, c, validate=False
    )
    z = TangentFieldOnCurve(
        np.cross(c.samples, x.vectors), c, validate=False
    )
    got = curvature_apply(1.0, x, z, z)
    assert np.max(np.abs(got.vectors - x.vectors)) <= 1e-12


def test_curvature_gauss_equation_cross_check():
    # oracle on the sphere: <R(X,Y)Z,W> = <A(X,W),A(Y,Z)> - <A(X,Z),A(Y,W)>
    c = random_smooth(SPHERE2, 32, seed=6, decay=1.0, amplitude=0.3)
    x, y, z, w = _random_tangent_fields(c, 4, 7)
    lhs = (curvature_apply(1.0, x, y, z).vectors * w.vectors).sum(-1)
    sff = SPHERE2.second_fundamental_form
    rhs = (
        sff(c.samples, x.vectors, w.vectors)
        * sff(c.samples, y.vectors, z.vectors)
    ).sum(-1) - (
        sff(c.samples, x.vectors, z.vectors)
        * sff(c.samples, y.vectors, w.vectors)
    ).sum(-1)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))


def test_curvature_base_mismatch():
    c1, c2 = great_circle(32), great_circle(64)
    x = c1.velocity_field()
    y = c2.velocity_field()
    with pytest.raises(ValueError):
        curvature_apply(1.0, x, y, x)


# ---------------------------------------------------------------------------
# distances and resampling
# ---------------------------------------------------------------------------


def test_h1_distance_chart_alignment():
    c1 = torus_geodesic(CHART_FLAT_TORUS2, 1, 0, n=32)
    shifted = c1.with_samples(c1.samples + np.array([3.0, -2.0]))
    assert h1_distance(c1, shifted) <= 1e-12


def test_sup_distance_torus_wraps():
    c1 = torus_geodesic(CHART_FLAT_TORUS2, 1, 0, n=32)
    c2 = c1.with_samples(c1.samples + np.array([0.999, 0.0]))
    assert sup_distance(c1, c2) <= 1e-3 + 1e-12


def test_resample_band_limited_exact():
    c = latitude_circle(0.9, 32)
    fine = resample(c, 128)
    exact = latitude_circle(0.9, 128)
    assert sup_distance(fine, exact) <= 1e-12
    back = resample(fine, 32)
    assert sup_distance(back, c) <= 1e-12


def test_resample_chart_keeps_winding():
    c = torus_geodesic(CHART_FLAT_TORUS2, 2, 1, n=32)
    fine = resample(c, 64)
    assert np.array_equal(fine.winding(), c.winding())
