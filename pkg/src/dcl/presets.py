"""Named initial conditions and the descriptor grammar used by manifests.

Descriptors:

* ``great_circle``                    equator of the sphere
* ``latitude:<theta>``               latitude circle at polar angle theta
* ``torus_geodesic:<m1>,<m2>``       winding geodesic on either torus
* ``random_smooth[:<seed>[,<decay>[,<amplitude>]]]``
                                      seeded curve with exponentially
                                      decaying spectrum
* ``file:<path>``                     JSON file with a ``samples`` array
"""

import json

import numpy as np

from . import spectral
from .curves import ClosedCurve
from .errors import ConfigError
from .manifolds import CHART_FLAT_TORUS2, CLIFFORD_TORUS2, SPHERE2

DEFAULT_DECAY = 0.5
DEFAULT_AMPLITUDE = 0.2


def great_circle(n=128):
    x = spectral.grid(n)
    phase = spectral.TWO_PI * x
    samples = np.stack(
        [np.cos(phase), np.sin(phase), np.zeros(n)], axis=-1
    )
    return ClosedCurve(samples, SPHERE2)


def latitude_circle(theta, n=128):
    if not 0 < theta < np.pi:
        raise ConfigError("latitude angle must lie strictly between 0 and pi")
    x = spectral.grid(n)
    phase = spectral.TWO_PI * x
    samples = np.stack(
        [
            np.sin(theta) * np.cos(phase),
            np.sin(theta) * np.sin(phase),
            np.full(n, np.cos(theta)),
        ],
        axis=-1,
    )
    return ClosedCurve(samples, SPHERE2)


def torus_geodesic(manifold, m1, m2, n=128):
    if (m1, m2) == (0, 0):
        raise ConfigError("torus geodesic needs a nonzero winding")
    x = spectral.grid(n)
    chart = np.stack([m1 * x, m2 * x], axis=-1)
    if manifold is CHART_FLAT_TORUS2:
        return ClosedCurve(chart, manifold)
    if manifold is CLIFFORD_TORUS2:
        return ClosedCurve(manifold.embed_chart(chart), manifold)
    raise ConfigError(f"torus_geodesic is not defined on {manifold.name}")


def _random_periodic_field(n, d, rng, decay):
    """Real periodic field with coefficient envelope exp(-decay*|k|)."""
    coef = np.zeros((n // 2 + 1, d), dtype=complex)
    modes = np.arange(1, n // 2)
    envelope = np.exp(-decay * modes)
    coef[modes] = (
        rng.standard_normal((modes.size, d))
        + 1j * rng.standard_normal((modes.size, d))
    ) * envelope[:, None]
    field = np.fft.irfft(coef, n=n, axis=0)
    scale = np.max(np.abs(field))
    return field / scale if scale else field


def random_smooth(manifold, n=128, seed=0, decay=DEFAULT_DECAY,
                  amplitude=DEFAULT_AMPLITUDE):
    """Seeded smooth curve: base state + spectral noise, projected twice.

    The perturbed base is projected to the target, re-smoothed once with
    the same exponential envelope (projection is pointwise and spreads the
    spectrum), and projected again.
    """
    rng = np.random.default_rng(seed)
    scale = 1.0
    if manifold is SPHERE2:
        base = great_circle(n).samples
    elif manifold is CLIFFORD_TORUS2:
        base = torus_geodesic(manifold, 1, 0, n).samples
        scale = manifold.radius  # amplitude is relative to the circle size
    elif manifold is CHART_FLAT_TORUS2:
        base = torus_geodesic(manifold, 1, 0, n).samples
    else:
        raise ConfigError(f"random_smooth is not defined on {manifold.name}")

    noise = amplitude * scale * _random_periodic_field(
        n, manifold.ambient_dim, rng, decay
    )
    if manifold is CHART_FLAT_TORUS2:
        return ClosedCurve(base + noise, manifold)

    rough = manifold.project(base + noise)
    k = spectral.wavenumbers(n)
    envelope = np.exp(-decay * np.maximum(k - 1.0, 0.0))
    coef = np.fft.rfft(rough, axis=0) * envelope[:, None]
    smooth = np.fft.irfft(coef, n=n, axis=0)
    return ClosedCurve(manifold.project(smooth), manifold)


def curve_from_file(path, manifold):
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    try:
        samples = np.asarray(payload["samples"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad curve file {path}: {exc}") from exc
    return ClosedCurve(samples, manifold)


def make_initial(descriptor, manifold, n, seed=0):
    """Resolve a descriptor string into a curve on ``manifold``."""
    if not isinstance(descriptor, str):
        raise ConfigError("initial-condition descriptor must be a string")
    name, _, arg = descriptor.partition(":")
    try:
        if name == "great_circle":
            if manifold is not SPHERE2:
                raise ConfigError("great_circle lives on Sphere2")
            return great_circle(n)
        if name == "latitude":
            if manifold is not SPHERE2:
                raise ConfigError("latitude lives on Sphere2")
            return latitude_circle(float(arg), n)
        if name == "torus_geodesic":
            m1, m2 = (int(v) for v in arg.split(","))
            return torus_geodesic(manifold, m1, m2, n)
        if name == "random_smooth":
            params = [v for v in arg.split(",") if v] if arg else []
            use_seed = int(params[0]) if params else seed
            decay = float(params[1]) if len(params) > 1 else DEFAULT_DECAY
            amplitude = (
                float(params[2]) if len(params) > 2 else DEFAULT_AMPLITUDE
            )
            return random_smooth(manifold, n, use_seed, decay, amplitude)
        if name == "file":
            return curve_from_file(arg, manifold)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad descriptor {descriptor!r}: {exc}") from exc
    raise ConfigError(f"unknown initial-condition preset {name!r}")
