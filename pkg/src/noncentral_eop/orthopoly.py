"""Classical Laguerre and Jacobi polynomials with complex parameters.

Evaluation goes through the three-term recurrence in :mod:`.kernels`.
Negative degree is accepted and returns zero, so formulas with ``m - 1`` or
``m - 2`` indices need no special cases at small ``m``.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels


def _as_points(x):
    arr = np.asarray(x, dtype=np.complex128)
    return arr, arr.shape


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(np.asarray(v, dtype=complex))):
            raise ValueError("non-finite polynomial parameter or argument")


def _reshape(vals, shape):
    return vals[0] if shape == () else vals.reshape(shape)


def laguerre_eval(n, a, x):
    """L_n^{(a)}(x); zero for ``n < 0``. Scalars in, complex scalar out."""
    _check_finite(a, x)
    pts, shape = _as_points(x)
    return _reshape(kernels.laguerre_array(n, a, pts), shape)


def jacobi_eval(n, a, b, z):
    """P_n^{(a,b)}(z); zero for ``n < 0``."""
    _check_finite(a, b, z)
    pts, shape = _as_points(z)
    return _reshape(kernels.jacobi_array(n, a, b, pts), shape)


def laguerre_derivative(n, a, x, order=1):
    """d^k/dx^k L_n^{(a)}(x) = (-1)^k L_{n-k}^{(a+k)}(x)."""
    return (-1) ** order * laguerre_eval(n - order, a + order, x)


def jacobi_derivative(n, a, b, z, order=1):
    """d^k/dz^k P_n^{(a,b)}(z) = 2^{-k} (n+a+b+1)_k P_{n-k}^{(a+k,b+k)}(z)."""
    if n - order < 0:
        return jacobi_eval(-1, a, b, z)
    scale = 1.0 + 0.0j
    for j in range(order):
        scale *= (n + a + b + 1 + j) / 2.0
    return scale * jacobi_eval(n - order, a + order, b + order, z)


@dataclass(frozen=True)
class CoeffPoly:
    """Polynomial stored as complex coefficients, lowest degree first."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128))
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficient")
        # trim exact trailing zeros so the leading coefficient is nonzero
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        acc = np.zeros_like(z) + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc

    def deriv(self, order=1):
        c = self.coeffs
        for _ in range(order):
            if len(c) == 1:
                return CoeffPoly([0.0])
            c = c[1:] * np.arange(1, len(c))
        return CoeffPoly(c)

    def scaled(self, factor):
        return CoeffPoly(self.coeffs * factor)

    def monic(self):
        return self.scaled(1.0 / self.coeffs[-1])

    def roots(self):
        if self.degree < 1:
            return np.zeros(0, dtype=np.complex128)
        return np.roots(self.coeffs[::-1])


def _gbinom(x, k):
    # generalized binomial coefficient C(x, k) for complex x, integer k >= 0
    out = 1.0 + 0.0j
    for j in range(k):
        out *= (x - j) / (j + 1.0)
    return out


def poly_coefficients(kind, n, *params):
    """Explicit coefficients of L_n^{(a)} (``kind='laguerre'``, params ``a``)
    or P_n^{(a,b)} (``kind='jacobi'``, params ``a, b``)."""
    if n < 0:
        return CoeffPoly([0.0])
    if kind == "laguerre":
        (a,) = params
        c = [_gbinom(n + a, n - k) * (-1.0) ** k / math.factorial(k) for k in range(n + 1)]
        return CoeffPoly(c)
    if kind == "jacobi":
        a, b = params
        out = np.zeros(n + 1, dtype=np.complex128)
        # sum_k C(n+a, n-k) C(n+a+b+k, k) ((z-1)/2)^k, expanded in z
        shift = np.array([1.0 + 0.0j])
        for k in range(n + 1):
            w = _gbinom(n + a, n - k) * _gbinom(n + a + b + k, k)
            out[: k + 1] += w * shift
            shift = np.convolve(shift, [-0.5, 0.5])
        return CoeffPoly(out)
    raise ValueError(f"unknown polynomial kind {kind!r}")
