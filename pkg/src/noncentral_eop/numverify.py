"""Finite-difference oracle for the separated 1D problems.

``-psi'' + V psi = lam psi`` is discretised with the 3-point second
difference and Dirichlet ends on a uniform grid. Spectra are computed on an
``N`` and a ``2N+1`` grid (exactly half the spacing) and Richardson
extrapolated. The error attached to the extrapolated value comes from a
third, roughly twice as coarse grid: the difference between the two
extrapolations. That bounds the coarser one, so it stays safe where the
``h^4`` asymptotics have not set in (singular endpoints). Without room for that grid
the fine-grid estimate ``|lam_fine - lam_coarse| / 3`` is used instead.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import extensions as ext
from . import kernels

RADIAL_EPS = 1e-4
ANGULAR_INSET = 1e-5


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    N: int

    def __post_init__(self):
        if self.N < 32:
            raise ValueError("grid needs N >= 32 interior points")
        if not self.b > self.a:
            raise ValueError("empty interval")

    @property
    def h(self):
        return (self.b - self.a) / (self.N + 1)

    def nodes(self):
        return self.a + self.h * np.arange(1, self.N + 1)

    def refined(self):
        """Same interval with half the spacing."""
        return Grid1D(self.a, self.b, 2 * self.N + 1)

    def coarsened(self):
        """Roughly twice the spacing, or None when that grid would be too small."""
        n = (self.N + 1) // 2 - 1
        return Grid1D(self.a, self.b, n) if n >= 32 else None


@dataclass(frozen=True)
class Tridiagonal:
    """Discrete ``-d^2/dx^2 + V``: main diagonal and (symmetric) off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    @property
    def is_complex(self):
        return np.iscomplexobj(self.diag)

    def to_dense(self):
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)


@dataclass
class GridSpectrum:
    eigenvalues: np.ndarray
    grid: Grid1D
    richardson_error: np.ndarray
    coarse: np.ndarray = field(repr=False, default=None)
    fine: np.ndarray = field(repr=False, default=None)
    coarser: np.ndarray = field(repr=False, default=None)
    sweeps: int = 0


def build_hamiltonian(V, grid):
    x = grid.nodes()
    v = np.asarray(V(x))
    if v.shape != x.shape:
        v = np.broadcast_to(v, x.shape)
    if not np.all(np.isfinite(v)):
        bad = x[~np.isfinite(v)][0]
        raise ValueError(f"potential is not finite at x={bad:g}; offset the grid from singular points")
    if np.iscomplexobj(v) and np.all(v.imag == 0):
        v = v.real
    h2 = grid.h**2
    diag = 2.0 / h2 + v
    off = np.full(grid.N - 1, -1.0 / h2)
    return Tridiagonal(diag, off)


def _lowest(mat, k):
    if not mat.is_complex and not kernels.USE_NUMBA:
        return kernels.sturm_lowest(mat.diag, mat.off, k), 0
    vals, sweeps = kernels.tridiag_eigvals(mat.diag, mat.off)
    order = np.argsort(vals.real, kind="stable")
    return vals[order[:k]], sweeps


def dense_lowest(mat, k):
    """Same as the tridiagonal path but through the general complex QR solver."""
    vals, sweeps = kernels.dense_eigvals(mat.to_dense())
    order = np.argsort(vals.real, kind="stable")
    return vals[order[:k]], sweeps


def numeric_spectrum(V, grid, k):
    """Lowest ``k`` eigenvalues (by real part) with Richardson error estimates."""
    if not 1 <= k <= 8:
        raise ValueError("k must be between 1 and 8")
    fgrid = grid.refined()
    coarse, s1 = _lowest(build_hamiltonian(V, grid), k)
    fine, s2 = _lowest(build_hamiltonian(V, fgrid), k)
    coarse = np.asarray(coarse, dtype=complex)
    fine = np.asarray(fine, dtype=complex)
    extrap = _extrapolate(coarse, fine, grid.h, fgrid.h)
    err = np.abs(fine - coarse) / 3.0
    coarser = None
    cgrid = grid.coarsened()
    if cgrid is not None:
        coarser, s3 = _lowest(build_hamiltonian(V, cgrid), k)
        coarser = np.asarray(coarser, dtype=complex)
        s2 = max(s2, s3)
        rough = _extrapolate(coarser, coarse, cgrid.h, grid.h)
        # eigensolver roundoff scales with the operator norm, about 4 / h^2
        floor = 8 * np.finfo(float).eps * (4.0 / fgrid.h**2 + np.abs(extrap))
        err = np.maximum(np.abs(rough - extrap), floor)
    return GridSpectrum(extrap, grid, err, coarse, fine, coarser, max(s1, s2))


def _extrapolate(lam_c, lam_f, hc, hf):
    """Remove the ``h^2`` term between two grids of spacing ``hc > hf``."""
    return (hc**2 * lam_f - hf**2 * lam_c) / (hc**2 - hf**2)


# ---------------------------------------------------------------------------
# sector plumbing


def sector_grid(variant, spec, N, k=4, n2=0, n3=0):
    """Dirichlet interval for a sector: angular ends inset, radial truncated."""
    if variant.sector == "radial":
        ch = ext.chain(spec, n2, n3)
        r_max = ext.radial_cutoff(ch.delta_t, spec.omega, k, spec.m1)
        return Grid1D(RADIAL_EPS, r_max, N)
    lo, hi = variant.domain(spec.p)
    return Grid1D(lo + ANGULAR_INSET, hi - ANGULAR_INSET, N)


def sector_spectrum(variant, spec, k=4, N=2000, n2=0, n3=0):
    V = ext.sector_potential(variant, spec, n2, n3)
    return numeric_spectrum(V, sector_grid(variant, spec, N, k, n2, n3), k)


# ---------------------------------------------------------------------------
# residuals and quadrature


def _second_derivative(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def residual_norm(solution, V=None, window=0.9, samples=1500):
    """``||-psi'' + V psi - lam psi|| / ||psi||`` on the central ``window`` of the support.

    Second derivatives use the 5-point stencil with one Richardson step; the
    step size comes from a geometric ladder, where the result is most stable.
    """
    V = solution.potential if V is None else V
    lo, hi = solution.support()
    if solution.variant.sector == "radial":
        hi = effective_radius(solution, lo, hi)
    pad = (1 - window) / 2 * (hi - lo)
    a, b = lo + pad, hi - pad
    x = np.linspace(a, b, samples)
    psi = solution.eval(x)
    L = hi - lo
    steps = L * np.geomspace(2e-2, 1e-4, 24)
    steps = steps[2 * steps < pad]
    # 5-point stencil at h and h/2, Richardson-combined to O(h^6); keep the
    # coarser step of the least-changing neighbour pair (rounding grows as h shrinks)
    d2 = [(16 * _second_derivative(solution.eval, x, h / 2) - _second_derivative(solution.eval, x, h)) / 15 for h in steps]
    diffs = [np.linalg.norm(d2[i] - d2[i + 1]) for i in range(len(d2) - 1)]
    best = d2[int(np.argmin(diffs))] if diffs else d2[0]
    res = -best + (V(x) - solution.eigenvalue) * psi
    return float(np.linalg.norm(res) / np.linalg.norm(psi))


def effective_radius(solution, lo, hi, rel=1e-10):
    """Radius beyond which the radial eigenfunction is below ``rel`` of its peak."""
    r = np.linspace(lo, hi, 4000)[1:]
    mag = np.abs(solution.eval(r))
    keep = np.flatnonzero(mag > rel * mag.max())
    return float(r[keep[-1]])


@lru_cache(maxsize=8)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n, a, b):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on ``[a, b]``."""
    t, w = _leggauss(n)
    half = (b - a) / 2
    return a + half * (t + 1), half * w


def inner_product(f, g, weight=None, grid=(-1.0, 1.0), nodes=200):
    """Unconjugated ``int f g w`` over ``grid`` (a Grid1D or an ``(a, b)`` pair)."""
    a, b = (grid.a, grid.b) if isinstance(grid, Grid1D) else grid
    x, w = gauss_legendre(nodes, a, b)
    vals = np.asarray(f(x)) * np.asarray(g(x))
    if weight is not None:
        vals = vals * np.asarray(weight(x))
    return complex(np.sum(w * vals))


def sign_changes(values, rel=1e-10):
    """Sign changes of a real sample sequence, ignoring near-zero samples."""
    v = np.asarray(values).real
    v = v[np.abs(v) > rel * np.max(np.abs(v))]
    return int(np.count_nonzero(np.signbit(v[1:]) != np.signbit(v[:-1])))
