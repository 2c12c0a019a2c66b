"""Fourier plumbing for periodic fields sampled on the uniform grid x_i = i/N.

All fields are real arrays whose first axis is the sample axis; trailing
axes (ambient components) are carried along unchanged.  Quadrature is the
uniform trapezoid rule, which on a periodic grid is the plain mean and is
exact for resolved modes.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def grid(n):
    """Sample locations i/N of the unit circle."""
    return np.arange(n) / float(n)


def wavenumbers(n):
    """Integer frequencies of the rfft layout: 0, 1, ..., n//2."""
    return np.fft.rfftfreq(n, d=1.0 / n)


def _col(mult, ndim):
    return np.asarray(mult).reshape((-1,) + (1,) * (ndim - 1))


def spectral_derivative(f, order=1):
    """Differentiate a periodic sampled field along axis 0.

    Exact for band-limited input.  The Nyquist mode is zeroed for odd
    orders (its derivative has no real representative on the grid).
    Orders above 4 never occur in the flow and are rejected.
    """
    if not 1 <= order <= 4:
        raise ValueError("derivative order must lie in [1, 4]")
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    coef = np.fft.rfft(f, axis=0)
    mult = (1j * TWO_PI * wavenumbers(n)) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0
    return np.fft.irfft(coef * _col(mult, f.ndim), n=n, axis=0)


def lowpass(f, keep):
    """Zero every mode with |frequency| > keep."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    coef = np.fft.rfft(f, axis=0)
    coef[wavenumbers(n) > keep] = 0.0
    return np.fft.irfft(coef, n=n, axis=0)


def dealias_keep(n):
    """Highest retained frequency under the cubic-product dealiasing rule."""
    return n // 4


def integrate(f):
    """Integral over one period by the trapezoid rule (mean of samples)."""
    return np.asarray(f).mean(axis=0)


def l2_inner(f, g):
    """L2 pairing of two sampled fields, summing ambient components."""
    prod = np.asarray(f) * np.asarray(g)
    if prod.ndim > 1:
        prod = prod.sum(axis=tuple(range(1, prod.ndim)))
    return prod.mean()


def l2_norm(f):
    return np.sqrt(l2_inner(f, f))


def heat4_multiplier(n, eps, t):
    """Fourier multiplier exp(-eps*t*(2*pi*k)^4) of the fourth-order heat semigroup."""
    k = wavenumbers(n)
    return np.exp(-eps * t * (TWO_PI * k) ** 4)


def semigroup_apply(eps, t, f):
    """Apply the fourth-order heat semigroup to a periodic sampled field.

    Multiplies mode k by exp(-eps*t*(2*pi*k)^4); t = 0 is the identity and
    every mode magnitude is nonincreasing in t.
    """
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    f = np.asarray(f, dtype=float)
    if t == 0 or eps == 0:
        return f.copy()
    n = f.shape[0]
    coef = np.fft.rfft(f, axis=0)
    coef *= _col(heat4_multiplier(n, eps, t), f.ndim)
    return np.fft.irfft(coef, n=n, axis=0)


def gauss_legendre(n, a, b):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def lagrange_matrix(nodes, targets):
    """Interpolation matrix L with L @ values(nodes) = values(targets).

    Plain Lagrange form; meant for a handful of Gauss nodes where it is
    perfectly conditioned.
    """
    nodes = np.asarray(nodes, dtype=float)
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    q = nodes.size
    out = np.empty((targets.size, q))
    for j in range(q):
        others = np.delete(nodes, j)
        num = np.prod(targets[:, None] - others[None, :], axis=1)
        den = np.prod(nodes[j] - others)
        out[:, j] = num / den
    return out
