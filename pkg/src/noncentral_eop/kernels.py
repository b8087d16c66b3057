"""Hot numerical kernels.

Each kernel has a numba-compiled form and a pure-numpy form. Which one the
public wrappers dispatch to is decided by :mod:`noncentral_eop._jit`
(``NONCENTRAL_EOP_JIT=0`` selects numpy).

Kernels
-------
* three-term recurrences for Jacobi and Laguerre polynomials on arrays of
  complex points,
* implicit QL eigenvalues of a (complex-)symmetric tridiagonal matrix,
* Hessenberg reduction plus shifted QR for a general complex matrix,
* Sturm-count bisection for real symmetric tridiagonal matrices (numpy only).
"""
import numpy as np

from ._jit import USE_NUMBA, jit

QL_MAX_SWEEPS = 500


class ConvergenceError(RuntimeError):
    """An iterative eigensolver hit its sweep cap."""


# ---------------------------------------------------------------------------
# polynomial recurrences


@jit
def _jacobi_series_nb(n, a, b, z):
    # sum_k C(n+a, n-k) C(n+a+b+k, k) ((z-1)/2)^k ; polynomial in a and b
    out = np.zeros(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        t = (z[i] - 1.0) / 2.0
        acc = 0.0 + 0.0j
        tk = 1.0 + 0.0j
        for k in range(n + 1):
            c1 = 1.0 + 0.0j
            for j in range(n - k):
                c1 *= (n + a - j) / (j + 1.0)
            c2 = 1.0 + 0.0j
            for j in range(k):
                c2 *= (n + a + b + k - j) / (j + 1.0)
            acc += c1 * c2 * tk
            tk *= t
        out[i] = acc
    return out


@jit
def _jacobi_nb(n, a, b, z):
    m = z.shape[0]
    out = np.zeros(m, dtype=np.complex128)
    if n < 0:
        return out
    if n == 0:
        out[:] = 1.0
        return out
    # a vanishing recurrence denominator sends us to the series form
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        if abs(c1) < 1e-12 * (1.0 + abs(s) ** 3):
            return _jacobi_series_nb(n, a, b, z)
    for i in range(m):
        p0 = 1.0 + 0.0j
        p1 = (a - b) / 2.0 + (a + b + 2.0) / 2.0 * z[i]
        for k in range(2, n + 1):
            s = 2.0 * k + a + b
            c1 = 2.0 * k * (k + a + b) * (s - 2.0)
            c2 = (s - 1.0) * (s * (s - 2.0) * z[i] + a * a - b * b)
            c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
            p0, p1 = p1, (c2 * p1 - c3 * p0) / c1
        out[i] = p1
    return out


@jit
def _laguerre_nb(n, a, x):
    m = x.shape[0]
    out = np.zeros(m, dtype=np.complex128)
    if n < 0:
        return out
    for i in range(m):
        p0 = 1.0 + 0.0j
        if n == 0:
            out[i] = p0
            continue
        p1 = 1.0 + a - x[i]
        for k in range(2, n + 1):
            p0, p1 = p1, ((2.0 * k - 1.0 + a - x[i]) * p1 - (k - 1.0 + a) * p0) / k
        out[i] = p1
    return out


def _jacobi_series_np(n, a, b, z):
    t = (z - 1.0) / 2.0
    acc = np.zeros_like(z)
    tk = np.ones_like(z)
    for k in range(n + 1):
        c1 = 1.0 + 0.0j
        for j in range(n - k):
            c1 *= (n + a - j) / (j + 1.0)
        c2 = 1.0 + 0.0j
        for j in range(k):
            c2 *= (n + a + b + k - j) / (j + 1.0)
        acc = acc + c1 * c2 * tk
        tk = tk * t
    return acc


def _jacobi_np(n, a, b, z):
    if n < 0:
        return np.zeros_like(z)
    p0 = np.ones_like(z)
    if n == 0:
        return p0
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        if abs(2.0 * k * (k + a + b) * (s - 2.0)) < 1e-12 * (1.0 + abs(s) ** 3):
            return _jacobi_series_np(n, a, b, z)
    p1 = (a - b) / 2.0 + (a + b + 2.0) / 2.0 * z
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        c2 = (s - 1.0) * (s * (s - 2.0) * z + a * a - b * b)
        c3 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p0, p1 = p1, (c2 * p1 - c3 * p0) / c1
    return p1


def _laguerre_np(n, a, x):
    if n < 0:
        return np.zeros_like(x)
    p0 = np.ones_like(x)
    if n == 0:
        return p0
    p1 = 1.0 + a - x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2.0 * k - 1.0 + a - x) * p1 - (k - 1.0 + a) * p0) / k
    return p1


def jacobi_array(n, a, b, z):
    """P_n^{(a,b)} at every point of the complex array ``z``."""
    z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    if USE_NUMBA:
        return _jacobi_nb(int(n), complex(a), complex(b), z)
    return _jacobi_np(int(n), complex(a), complex(b), z)


def laguerre_array(n, a, x):
    """L_n^{(a)} at every point of the complex array ``x``."""
    x = np.ascontiguousarray(x, dtype=np.complex128).ravel()
    if USE_NUMBA:
        return _laguerre_nb(int(n), complex(a), x)
    return _laguerre_np(int(n), complex(a), x)


# ---------------------------------------------------------------------------
# tridiagonal implicit QL (eigenvalues only)


def _tql_core(d, e, max_sweeps):
    """Implicit QL with Wilkinson-type shifts, in place on ``d``.

    ``e[i]`` couples ``d[i]`` and ``d[i+1]``; ``e[-1]`` is ignored. Works for
    real symmetric and complex symmetric (``A == A.T``) input: the rotations
    are complex orthogonal, not unitary. Returns the largest sweep count used
    for any eigenvalue, or -1 when the cap was hit.
    """
    n = d.shape[0]
    e[n - 1] = 0.0
    eps = 2.220446049250313e-16
    worst = 0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_sweeps:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.sqrt(g * g + 1.0)
            if abs(g - r) > abs(g + r):
                r = -r
            g = d[m] - d[l] + e[l] / (g + r)
            s = 1.0 + 0.0 * g
            c = 1.0 + 0.0 * g
            p = 0.0 * g
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.sqrt(f * f + g * g)
                e[i + 1] = r
                if abs(r) == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
        if it > worst:
            worst = it
    return worst


_tql_nb = jit(_tql_core)


def tridiag_eigvals(diag, off, max_sweeps=QL_MAX_SWEEPS):
    """Eigenvalues of the symmetric tridiagonal matrix (``diag``, ``off``).

    ``off`` has length ``len(diag) - 1``. Complex input is treated as complex
    symmetric. Returned unsorted together with the sweep count.
    """
    diag = np.asarray(diag)
    dtype = np.complex128 if np.iscomplexobj(diag) or np.iscomplexobj(off) else np.float64
    d = np.array(diag, dtype=dtype)
    e = np.zeros(d.shape[0], dtype=dtype)
    e[:-1] = off
    core = _tql_nb if USE_NUMBA else _tql_core
    sweeps = core(d, e, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"tridiagonal QL exceeded {max_sweeps} sweeps")
    return d, sweeps


# ---------------------------------------------------------------------------
# dense general complex matrices: Householder -> Hessenberg -> shifted QR


def _hessenberg_qr_core(a, max_sweeps):
    n = a.shape[0]
    # Householder reduction to upper Hessenberg form
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = np.sqrt(np.sum(np.abs(x) ** 2))
        if alpha == 0.0:
            continue
        if abs(x[0]) != 0.0:
            phase = x[0] / abs(x[0])
        else:
            phase = 1.0 + 0.0j
        v = x
        v[0] = x[0] + phase * alpha
        vn = np.sqrt(np.sum(np.abs(v) ** 2))
        v = v / vn
        # A <- H A H with H = I - 2 v v^H
        block = np.ascontiguousarray(a[k + 1:, :])
        w = np.conj(v) @ block
        a[k + 1:, :] = block - 2.0 * np.outer(v, w)
        block = np.ascontiguousarray(a[:, k + 1:])
        w = block @ v
        a[:, k + 1:] = block - 2.0 * np.outer(w, np.conj(v))
        for i in range(k + 2, n):
            a[i, k] = 0.0
    eig = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    sweeps = 0
    total = 0
    eps = 2.220446049250313e-16
    while hi >= 0:
        if hi == 0:
            eig[0] = a[0, 0]
            break
        # find active block [lo, hi]
        lo = hi
        while lo > 0:
            s = abs(a[lo, lo]) + abs(a[lo - 1, lo - 1])
            if s == 0.0:
                s = 1.0
            if abs(a[lo, lo - 1]) <= eps * s:
                a[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = a[hi, hi]
            hi -= 1
            sweeps = 0
            continue
        sweeps += 1
        total += 1
        if sweeps > max_sweeps:
            return eig, -1
        # Wilkinson shift from trailing 2x2
        p = a[hi - 1, hi - 1]
        q = a[hi - 1, hi]
        r = a[hi, hi - 1]
        t = a[hi, hi]
        tr = p + t
        det = p * t - q * r
        disc = np.sqrt(tr * tr / 4.0 - det)
        mu1 = tr / 2.0 + disc
        mu2 = tr / 2.0 - disc
        mu = mu1 if abs(mu1 - t) < abs(mu2 - t) else mu2
        if sweeps % 11 == 0:
            # exceptional shift breaks rare cycles
            mu = t + abs(a[hi, hi - 1]) * (0.75 + 0.5j)
        # QR step on the active block via Givens rotations (RQ accumulation)
        m = hi - lo + 1
        cs = np.zeros(m - 1, dtype=np.complex128)
        sn = np.zeros(m - 1, dtype=np.complex128)
        for i in range(lo, hi + 1):
            a[i, i] -= mu
        for k in range(lo, hi):
            x = a[k, k]
            y = a[k + 1, k]
            nrm = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if nrm == 0.0:
                c = 1.0 + 0.0j
                s = 0.0 + 0.0j
            else:
                c = x / nrm
                s = y / nrm
            cs[k - lo] = c
            sn[k - lo] = s
            for j in range(k, hi + 1):
                u = a[k, j]
                w = a[k + 1, j]
                a[k, j] = np.conj(c) * u + np.conj(s) * w
                a[k + 1, j] = -s * u + c * w
        for k in range(lo, hi):
            c = cs[k - lo]
            s = sn[k - lo]
            top = min(k + 2, hi) + 1
            for i in range(lo, top):
                u = a[i, k]
                w = a[i, k + 1]
                a[i, k] = c * u + s * w
                a[i, k + 1] = -np.conj(s) * u + np.conj(c) * w
        for i in range(lo, hi + 1):
            a[i, i] += mu
    return eig, total


_hessenberg_qr_nb = jit(_hessenberg_qr_core)


def dense_eigvals(matrix, max_sweeps=QL_MAX_SWEEPS):
    """Eigenvalues of a general complex square matrix (unsorted)."""
    a = np.array(matrix, dtype=np.complex128, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128), 0
    core = _hessenberg_qr_nb if USE_NUMBA else _hessenberg_qr_core
    eig, total = core(a, max_sweeps)
    if total < 0:
        raise ConvergenceError(f"Hessenberg QR exceeded {max_sweeps} sweeps on one eigenvalue")
    return eig, total


# ---------------------------------------------------------------------------
# Sturm bisection (numpy path for real symmetric tridiagonal spectra)


def sturm_lowest(diag, off, k, tol=1e-13):
    """The ``k`` smallest eigenvalues of a real symmetric tridiagonal matrix.

    Bisection on the Sturm count, vectorised over the ``k`` target indices.
    """
    diag = np.asarray(diag, dtype=float)
    off2 = np.asarray(off, dtype=float) ** 2
    n = diag.shape[0]
    radius = np.abs(np.concatenate(([0.0], np.abs(off)))) + np.abs(np.concatenate((np.abs(off), [0.0])))
    lo = np.full(k, np.min(diag - radius))
    hi = np.full(k, np.max(diag + radius))
    target = np.arange(1, k + 1)
    # pivot guard as in LAPACK's dstebz: small enough not to bias the count, large enough not to overflow
    pivmin = np.finfo(float).tiny * max(1.0, float(np.max(off2, initial=0.0)))
    span = max(abs(lo[0]), abs(hi[0]), 1.0)
    # relative stop, floored at the resolution of the Sturm count itself
    floor = 8 * np.finfo(float).eps * span
    while np.any(hi - lo > np.maximum(tol * np.abs(lo + hi) / 2, floor)):
        mid = 0.5 * (lo + hi)
        count = np.zeros(k, dtype=np.int64)
        q = np.zeros(k)
        for i in range(n):
            q = diag[i] - mid - (off2[i - 1] / q if i else 0.0)
            q = np.where(np.abs(q) < pivmin, -pivmin, q)
            count += q < 0
        below = count >= target
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)
