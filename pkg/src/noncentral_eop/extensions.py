"""Rational extensions of the separated radial, polar and azimuthal problems.

Every sector reduces to one of three one-dimensional families:

``jacobi``
    trigonometric Poschl-Teller/Scarf type in ``z = cos(k x)``; seed
    (denominator) polynomial ``P_m^{(-a-1, b-1)}(z)``. Used by theta forms
    I, II, PT2 and phi forms I, II, PT1.
``eckart``
    PT-symmetric trigonometric Eckart type in ``z = i cot(k x)``; seed
    ``q_m = P_m^{(alpha_m, beta_m)}(z)``. Used by theta PT1 and the 2D-only
    phi PT2.
``laguerre``
    radial oscillator in ``z = omega r^2 / 2``; seed
    ``L_m^{(delta_t - 1)}(-z)``.

The sector potentials are written in terms of the physical parameters
(C, D, G, F, omega, delta, p); the eigenvalues and eigenfunctions use the
derived exponents. The numerical oracle in :mod:`.numverify` compares the two.

Eckart-type levels carry the label ``j`` of the closed form
``(A - 1 + j)^2 + B^2 / (A - 1 + j)^2``; the label ``j == m`` has no
eigenfunction (its ``y`` polynomial vanishes identically), for ``m = 0``
included.
"""
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .orthopoly import CoeffPoly, jacobi_eval, laguerre_eval, poly_coefficients

FORMS = ("I", "II", "PT1", "PT2")
SECTORS = ("radial", "theta", "phi")
COMPLEX_FORMS = ("PT1", "PT2")

REALITY_TOL = 1e-10


class AdmissibilityError(ValueError):
    """Parameters violate a precondition (nonreal exponent, nodal seed, ...)."""


class SingularDenominatorError(AdmissibilityError):
    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class ParityError(ValueError):
    """A phi form that needs odd ``p`` was given an even one."""


class DegenerateError(ValueError):
    """A closed form divides by zero at these parameters."""


class MissingLevelError(DegenerateError):
    """Eckart-type label ``j == m``: the closed-form eigenfunction vanishes."""


class RankError(RuntimeError):
    """Collocation nullspace is not one-dimensional."""


# ---------------------------------------------------------------------------
# variants and parameters


@dataclass(frozen=True)
class SectorVariant:
    sector: str
    form: str = "I"
    dimension: int = 3

    def __post_init__(self):
        if self.sector not in SECTORS:
            raise ValueError(f"unknown sector {self.sector!r}")
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}")
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if self.sector == "radial" and self.form != "I":
            raise ValueError("the radial sector has a single form")
        if self.sector == "theta" and self.dimension == 2:
            raise ValueError("no theta sector in two dimensions")
        if self.sector == "phi" and self.form == "PT2" and self.dimension != 2:
            raise ValueError("phi form PT2 exists only in two dimensions")

    @property
    def family(self):
        if self.sector == "radial":
            return "laguerre"
        if (self.sector, self.form) in (("theta", "PT1"), ("phi", "PT2")):
            return "eckart"
        return "jacobi"

    @property
    def is_complex(self):
        return self.form in COMPLEX_FORMS

    def needs_odd_p(self):
        return self.sector == "phi" and self.form != "I"

    def scale(self, p=1):
        """Angular frequency ``k`` of the variable map (``z = cos(k x)`` or ``i cot(k x)``)."""
        if self.sector == "radial":
            return 1.0
        if self.sector == "theta":
            return 2.0 if self.form == "I" else 1.0
        return 2.0 * p if self.form == "I" else float(p)

    def domain(self, p=1):
        if self.sector == "radial":
            return (0.0, np.inf)
        return (0.0, np.pi / self.scale(p))

    def label(self):
        return f"{self.sector}:{self.form}" + ("" if self.dimension == 3 else "@2d")


@dataclass(frozen=True)
class PotentialSpec:
    """Six continuous and four discrete parameters plus the chosen forms."""

    omega: float = 1.0
    delta: float = 0.0
    C: float = 0.0
    D: float = 0.0
    G: float = 0.0
    F: float = 0.0
    p: int = 1
    m1: int = 0
    m2: int = 0
    m3: int = 0
    theta_form: str = "I"
    phi_form: str = "I"
    dimension: int = 3

    def __post_init__(self):
        if not self.omega > 0:
            raise AdmissibilityError("omega must be positive")
        if not self.delta >= 0:
            raise AdmissibilityError("delta must be non-negative")
        for name in ("omega", "delta", "C", "D", "G", "F"):
            if not np.isfinite(getattr(self, name)):
                raise AdmissibilityError(f"{name} must be finite")
        if int(self.p) != self.p or self.p < 1:
            raise AdmissibilityError("p must be a positive integer")
        for name in ("m1", "m2", "m3"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise AdmissibilityError(f"{name} must be a non-negative integer")
        # constructing the variants validates form/dimension combinations
        self.phi_variant()
        if self.dimension == 3:
            self.theta_variant()
        if self.phi_variant().needs_odd_p() and self.p % 2 == 0:
            raise ParityError(f"phi form {self.phi_form} requires odd p, got p={self.p}")

    def radial_variant(self):
        return SectorVariant("radial", "I", self.dimension)

    def theta_variant(self):
        return SectorVariant("theta", self.theta_form, 3)

    def phi_variant(self):
        return SectorVariant("phi", self.phi_form, self.dimension)

    def with_m(self, m1=None, m2=None, m3=None):
        return replace(
            self,
            m1=self.m1 if m1 is None else m1,
            m2=self.m2 if m2 is None else m2,
            m3=self.m3 if m3 is None else m3,
        )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


@dataclass(frozen=True)
class DerivedParams:
    """Exponents and constants of one sector.

    Jacobi-type sectors fill ``alpha``/``beta`` (theta) or ``alpha_t``/
    ``beta_t`` (phi), with ``alpha`` always attached to the ``z = +1`` end.
    Eckart-type sectors fill ``A``/``B`` in the paper's own units; for the
    2D phi sector those are ``p`` times the per-radian values. PT-Jacobi
    forms also report ``A``/``B`` as the real and imaginary parts of
    ``alpha + 1/2`` (times ``p`` for phi).
    """

    alpha: Optional[complex] = None
    beta: Optional[complex] = None
    alpha_t: Optional[complex] = None
    beta_t: Optional[complex] = None
    A: Optional[float] = None
    B: Optional[float] = None
    p: int = 1
    msq: Optional[complex] = None
    ellsq: Optional[complex] = None
    delta_t: Optional[float] = None
    omega: Optional[float] = None

    def _scaled_AB(self):
        return self.A / self.p, self.B / self.p

    def alpha_n(self, n):
        """Eckart exponent ``-(A-1+n) + B/(A-1+n)`` (per-radian units)."""
        a, b = self._scaled_AB()
        t = a - 1 + n
        if t == 0:
            raise DegenerateError(f"A - 1 + n vanishes at n={n}")
        return -t + b / t

    def beta_n(self, n):
        a, b = self._scaled_AB()
        t = a - 1 + n
        if t == 0:
            raise DegenerateError(f"A - 1 + n vanishes at n={n}")
        return -t - b / t


def _sqrt_real(value, what):
    value = complex(value)
    if abs(value.imag) > 0:
        raise AdmissibilityError(f"{what}: complex argument {value}")
    if value.real < 0:
        raise AdmissibilityError(f"{what}: sqrt of negative value {value.real:g} (nonreal exponent)")
    return float(np.sqrt(value.real))


def _realify(value, what):
    value = complex(value)
    if abs(value.imag) > REALITY_TOL * max(1.0, abs(value.real)):
        raise AdmissibilityError(f"{what} is not real: {value}")
    return value.real


def derive_phi_params(form, G, F, p, dimension=3):
    """Exponents of the azimuthal sector."""
    SectorVariant("phi", form, dimension)
    if form != "I" and p % 2 == 0:
        raise ParityError(f"phi form {form} requires odd p, got p={p}")
    g, f = G / p**2, F / p**2
    if form == "I":
        at = 0.5 * _sqrt_real(1 + 4 * g, "alpha_t")
        bt = 0.5 * _sqrt_real(1 + 4 * f, "beta_t")
        return DerivedParams(alpha_t=at, beta_t=bt, p=p)
    if form == "II":
        at = 0.5 * _sqrt_real(1 + 4 * (g + f), "alpha_t")
        bt = 0.5 * _sqrt_real(1 + 4 * (g - f), "beta_t")
        return DerivedParams(alpha_t=at, beta_t=bt, p=p)
    if form == "PT1":
        at = 0.5 * np.sqrt(complex(1 + 4 * g, 4 * f))
        bt = 0.5 * np.sqrt(complex(1 + 4 * g, -4 * f))
        return DerivedParams(alpha_t=at, beta_t=bt, A=p * (at.real + 0.5), B=p * at.imag, p=p)
    # PT2, 2D only: per-radian A/p solves s(s-1) = G/p^2, B/p = F/(2 p^2)
    s = 0.5 + 0.5 * _sqrt_real(1 + 4 * g, "A/p")
    return DerivedParams(A=p * s, B=F / (2.0 * p), p=p)


def derive_theta_params(form, C, D, msq):
    """Exponents of the polar sector given the azimuthal eigenvalue ``msq``."""
    SectorVariant("theta", form, 3)
    c = _realify(C + msq, "C + m^2")
    if form == "I":
        return DerivedParams(alpha=_sqrt_real(c, "alpha"), beta=0.5 * _sqrt_real(1 + 4 * D, "beta"), msq=msq)
    if form == "II":
        return DerivedParams(alpha=_sqrt_real(c + D, "alpha"), beta=_sqrt_real(c - D, "beta"), msq=msq)
    if form == "PT1":
        return DerivedParams(A=0.5 + _sqrt_real(c, "A"), B=D / 2.0, msq=msq)
    a = np.sqrt(complex(c, D))
    b = np.sqrt(complex(c, -D))
    return DerivedParams(alpha=a, beta=b, A=a.real + 0.5, B=a.imag, msq=msq)


def eigen_msq(form, n3, p, derived):
    """Azimuthal eigenvalue for label ``n3``."""
    if n3 < 0:
        raise ValueError("n3 must be non-negative")
    if form == "I":
        return complex(p**2 * (2 * n3 + derived.alpha_t + derived.beta_t + 1) ** 2)
    if form in ("II", "PT1"):
        return complex(p**2 * (n3 + (derived.alpha_t + derived.beta_t + 1) / 2) ** 2)
    return _eckart_level(derived.A / p, derived.B / p, n3, p)


def eigen_ellsq(form, n2, derived):
    """Polar eigenvalue for label ``n2``."""
    if n2 < 0:
        raise ValueError("n2 must be non-negative")
    if form == "I":
        return complex((2 * n2 + derived.alpha + derived.beta + 1) ** 2)
    if form in ("II", "PT2"):
        return complex((n2 + (derived.alpha + derived.beta + 1) / 2) ** 2)
    return _eckart_level(derived.A, derived.B, n2, 1)


def _eckart_level(a, b, n, k):
    t = a - 1 + n
    if t == 0:
        raise DegenerateError(f"A - 1 + n vanishes at n={n}")
    return complex(k**2 * (t**2 + b**2 / t**2))


def eigen_E(n1, omega, delta_t):
    """Radial energy ``omega (2 n1 + 1 + delta_t)``."""
    if n1 < 0:
        raise ValueError("n1 must be non-negative")
    if not delta_t > 0:
        raise AdmissibilityError(f"delta_t must be positive, got {delta_t}")
    return omega * (2 * n1 + 1 + delta_t)


# ---------------------------------------------------------------------------
# rational terms


def _ratio(num, den, z):
    den = np.asarray(den)
    if np.any(den == 0) or not np.all(np.isfinite(den)):
        bad = np.asarray(z).ravel()[np.flatnonzero(np.asarray(den).ravel() == 0)[:1]]
        raise SingularDenominatorError("seed polynomial vanishes", z=bad[0] if bad.size else None)
    return num / den


def jacobi_bracket(m, a, b, z):
    """Bracket of the X_m Jacobi rational term; multiply by ``k^2``."""
    z = np.asarray(z, dtype=np.complex128)
    if m == 0:
        return np.zeros_like(z)
    r = _ratio(jacobi_eval(m - 1, -a, b, z), jacobi_eval(m, -a - 1, b - 1, z), z)
    c = a - b - m + 1
    return -2 * m * c - c * (a + b + (a - b + 1) * z) * r + c**2 * (1 - z**2) / 2 * r**2


def eckart_bracket(m, a, b, x):
    """Eckart rational term in per-radian units at angle ``x``; multiply by ``k^2``."""
    x = np.asarray(x, dtype=float)
    if m == 0:
        return np.zeros(x.shape, dtype=np.complex128)
    t = a - 1 + m
    if t == 0:
        raise DegenerateError("A - 1 + m vanishes")
    am, bm = -t + b / t, -t - b / t
    cot = np.cos(x) / np.sin(x)
    z = 1j * cot
    q = jacobi_eval(m, am, bm, z)
    d1 = _ratio(_jd(m, am, bm, z, 1), q, z)
    d2 = _ratio(_jd(m, am, bm, z, 2), q, z)
    csc2 = 1.0 / np.sin(x) ** 2
    return -2 * csc2 * (2j * cot * d1 - csc2 * (d2 - d1**2) - m)


def _jd(n, a, b, z, order):
    from .orthopoly import jacobi_derivative

    return jacobi_derivative(n, a, b, z, order)


def radial_rational(m1, delta_t, omega, r):
    """Rational part of the extended radial oscillator."""
    if not delta_t > 0:
        raise AdmissibilityError(f"delta_t must be positive, got {delta_t}")
    r = np.asarray(r, dtype=float)
    if m1 == 0:
        return np.zeros(r.shape)
    y = -omega * r**2 / 2
    den = laguerre_eval(m1, delta_t - 1, y).real
    if np.any(den == 0):
        raise SingularDenominatorError("Laguerre seed vanishes")
    l2 = laguerre_eval(m1 - 2, delta_t + 1, y).real / den
    l1 = laguerre_eval(m1 - 1, delta_t, y).real / den
    return (
        -2 * m1 * omega
        - omega**2 * r**2 * l2
        + omega * (omega * r**2 + 2 * (delta_t - 1)) * l1
        + 2 * omega**2 * r**2 * l1**2
    )


def theta_rational(form, m2, derived, theta):
    """Rational part of the polar potential for ``form``."""
    var = SectorVariant("theta", form, 3)
    theta = np.asarray(theta, dtype=float)
    if var.family == "eckart":
        return eckart_bracket(m2, derived.A, derived.B, theta)
    k = var.scale()
    out = k**2 * jacobi_bracket(m2, derived.alpha, derived.beta, np.cos(k * theta))
    return out.real if form in ("I", "II") else out


def phi_rational(form, m3, derived, p, phi, dimension=None):
    """Rational part of the azimuthal potential for ``form``."""
    if form != "I" and p % 2 == 0:
        raise ParityError(f"phi form {form} requires odd p, got p={p}")
    var = SectorVariant("phi", form, 2 if form == "PT2" else (dimension or 3))
    phi = np.asarray(phi, dtype=float)
    if var.family == "eckart":
        return p**2 * eckart_bracket(m3, derived.A / p, derived.B / p, p * phi)
    k = var.scale(p)
    out = k**2 * jacobi_bracket(m3, derived.alpha_t, derived.beta_t, np.cos(k * phi))
    return out.real if form in ("I", "II") else out


# ---------------------------------------------------------------------------
# one-dimensional models


@dataclass(frozen=True)
class _Model:
    """Everything needed to build or check one sector's closed form."""

    family: str
    k: float
    m: int
    a: complex = 0.0  # jacobi: alpha; eckart: A per radian; laguerre: delta_t
    b: complex = 0.0  # jacobi: beta; eckart: B per radian; laguerre: omega
    domain: tuple = (0.0, np.pi)

    # variable map -------------------------------------------------------
    def zmap(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "jacobi":
            k = self.k
            return np.cos(k * x) + 0j, -k * np.sin(k * x) + 0j, -(k**2) * np.cos(k * x) + 0j
        if self.family == "eckart":
            k = self.k
            s = np.sin(k * x)
            cot = np.cos(k * x) / s
            csc2 = 1.0 / s**2
            return 1j * cot, -1j * k * csc2, 2j * k**2 * csc2 * cot
        w = self.b.real
        return w * x**2 / 2 + 0j, w * x + 0j, np.full(x.shape, w, dtype=complex)

    # seed / denominator ---------------------------------------------------
    def seed(self):
        if self.family == "jacobi":
            return poly_coefficients("jacobi", self.m, -self.a - 1, self.b - 1)
        if self.family == "eckart":
            if self.m == 0:
                return CoeffPoly([1.0])
            t = self.a - 1 + self.m
            return poly_coefficients("jacobi", self.m, -t + self.b / t, -t - self.b / t)
        c = poly_coefficients("laguerre", self.m, self.a - 1).coeffs
        return CoeffPoly(c * (-1.0) ** np.arange(len(c)))

    def exponents(self, n):
        """Powers of ``(1 - z)`` and ``(1 + z)`` (laguerre: power of ``z``)."""
        if self.family == "jacobi":
            return self.a / 2 + 0.25, self.b / 2 + 0.25
        if self.family == "eckart":
            t = self.a - 1 + n
            if t == 0:
                raise DegenerateError(f"A - 1 + n vanishes at n={n}")
            return (-t + self.b / t) / 2, (-t - self.b / t) / 2
        return (self.a + 0.5) / 2, 0.0

    def degree(self, n):
        if self.family == "eckart":
            if n == self.m:
                raise MissingLevelError(f"label n={n} equals m={self.m}: no eigenfunction")
            return n + self.m - 1
        return n + self.m

    def eigenvalue(self, n):
        if self.family == "jacobi":
            return self.k**2 / 4 * (2 * n + self.a + self.b + 1) ** 2
        if self.family == "eckart":
            return _eckart_level(self.a, self.b, n, self.k)
        return self.b.real * (2 * n + 1 + self.a.real)

    def potential(self, x):
        """The sector potential written through the exponents."""
        x = np.asarray(x, dtype=float)
        k = self.k
        if self.family == "jacobi":
            a, b = self.a, self.b
            conv = k**2 / 4 * ((a * a - 0.25) / np.sin(k * x / 2) ** 2 + (b * b - 0.25) / np.cos(k * x / 2) ** 2)
            return conv + k**2 * jacobi_bracket(self.m, a, b, np.cos(k * x))
        if self.family == "eckart":
            a, b = self.a, self.b
            s = np.sin(k * x)
            conv = a * (a - 1) / s**2 + 2j * b * np.cos(k * x) / s
            return k**2 * (conv + eckart_bracket(self.m, a, b, k * x))
        dt, w = self.a.real, self.b.real
        return w**2 * x**2 / 4 + (dt**2 - 0.25) / x**2 + radial_rational(self.m, dt, w, x)

    def log_derivs(self, z, n):
        """First and second z-derivatives of log(prefactor / seed)."""
        seed = self.seed()
        d0, d1, d2 = seed(z), seed.deriv(1)(z), seed.deriv(2)(z)
        r1 = d1 / d0
        r2 = d2 / d0 - r1**2
        e1, e2 = self.exponents(n)
        if self.family == "laguerre":
            l1 = e1 / z - 0.5 - r1
            ll = -e1 / z**2 - r2
        else:
            l1 = -e1 / (1 - z) + e2 / (1 + z) - r1
            ll = -e1 / (1 - z) ** 2 - e2 / (1 + z) ** 2 - r2
        return l1, ll

    def prefactor(self, z, n):
        e1, e2 = self.exponents(n)
        seed = self.seed()(z)
        if self.family == "laguerre":
            pre = np.exp(e1 * np.log(z) - z / 2)
        else:
            pre = np.exp(e1 * np.log(1 - z) + e2 * np.log(1 + z))
        return pre / seed

    def collocation(self, count):
        """``count`` interior abscissae in the sector variable."""
        u = np.cos(np.pi * (np.arange(count) + 0.5) / count)
        if self.family == "jacobi":
            return np.arccos(0.9 * u) / self.k
        if self.family == "eckart":
            return (np.pi / 2 + 0.9 * np.arctan(u)) / self.k
        w = self.b.real
        hi = count + self.a.real + 2
        xs = 0.05 + (hi - 0.05) * (u + 1) / 2
        return np.sqrt(2 * xs / w)


def _model_from_derived(variant, m, derived):
    fam = variant.family
    if fam == "laguerre":
        return _Model("laguerre", 1.0, m, complex(derived.delta_t), complex(derived.omega), (0.0, np.inf))
    p = derived.p
    k = variant.scale(p)
    dom = variant.domain(p)
    if fam == "eckart":
        return _Model("eckart", k, m, complex(derived.A / p), complex(derived.B / p), dom)
    if variant.sector == "theta":
        return _Model("jacobi", k, m, complex(derived.alpha), complex(derived.beta), dom)
    return _Model("jacobi", k, m, complex(derived.alpha_t), complex(derived.beta_t), dom)


# ---------------------------------------------------------------------------
# closed-form polynomials


NULL_TOL = 1e-9


def _chebyshev_columns(s, deg):
    """T_j(s), T_j'(s), T_j''(s) for j = 0..deg as (len(s), deg+1) arrays."""
    t = np.zeros((s.size, deg + 1), dtype=complex)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    t[:, 0] = 1.0
    if deg >= 1:
        t[:, 1] = s
        d1[:, 1] = 1.0
    for j in range(1, deg):
        t[:, j + 1] = 2 * s * t[:, j] - t[:, j - 1]
        d1[:, j + 1] = 2 * t[:, j] + 2 * s * d1[:, j] - d1[:, j - 1]
        d2[:, j + 1] = 4 * d1[:, j] + 2 * s * d2[:, j] - d2[:, j - 1]
    return t, d1, d2


def _chebyshev_to_power(coef, center, half):
    """Monomial coefficients in z of sum_j c_j T_j((z - center) / half)."""
    power_s = np.polynomial.chebyshev.cheb2poly(coef)
    lin = np.array([-center / half, 1.0 / half])
    out = np.zeros(1, dtype=complex)
    for c in power_s[::-1]:
        out = np.polynomial.polynomial.polymul(out, lin)
        out[0] += c
    return out


def _nullspace_poly(model, n, extra_checks=4):
    deg = model.degree(n)
    lam = model.eigenvalue(n)
    npts = deg + 2
    xs = model.collocation(npts + extra_checks)
    fit, check = xs[:npts], xs[npts:]
    # Chebyshev basis on the affine image of the sampled z segment (real or
    # imaginary), which keeps the collocation matrix well conditioned
    zs = model.zmap(xs)[0]
    center = (zs.real.min() + zs.real.max()) / 2 + 1j * (zs.imag.min() + zs.imag.max()) / 2
    half = (zs.real.max() - zs.real.min()) / 2 + 1j * (zs.imag.max() - zs.imag.min()) / 2
    half = half if half != 0 else 1.0

    def rows(x):
        z, dz, d2z = model.zmap(x)
        l1, ll = model.log_derivs(z, n)
        l2 = ll + l1**2
        v = model.potential(x)
        tj, tj1, tj2 = _chebyshev_columns(((z - center) / half).real if half.imag == 0 else ((z - center) / half).real, deg)
        tj1 = tj1 / half
        tj2 = tj2 / half**2
        dz2 = (dz**2)[:, None]
        mat = -(dz2 * (tj2 + 2 * l1[:, None] * tj1 + l2[:, None] * tj) + d2z[:, None] * (tj1 + l1[:, None] * tj))
        mat = mat + (v - lam)[:, None] * tj
        # row scale from the individual terms, not their (cancelling) sum
        size = np.abs(dz**2) * (1 + np.abs(l1) + np.abs(l2)) + np.abs(d2z) * (1 + np.abs(l1)) + np.abs(v) + abs(lam)
        return mat / size[:, None]

    mat = rows(fit)
    _, sv, vh = np.linalg.svd(mat)
    # rows are scaled to O(1), so an absolute threshold is meaningful
    nullity = int(np.sum(sv < NULL_TOL)) + (mat.shape[1] - len(sv))
    if nullity != 1:
        raise RankError(f"collocation nullspace has dimension {nullity} (singular values {sv})")
    vec = np.conj(vh[-1])
    cmat = rows(check)
    if np.max(np.abs(cmat @ vec)) > 1e-6 * np.linalg.norm(vec):
        raise RankError("null vector fails the ODE at check points")
    return CoeffPoly(_chebyshev_to_power(vec, center, half)).monic()


def exceptional_poly_from_ode(sector, n, m, derived):
    """Monic numerator polynomial solving the sector ODE at label ``n``.

    Undetermined coefficients: substitute prefactor / seed * y into the 1D
    Schrodinger equation, collocate, and take the one-dimensional nullspace.
    """
    model = _model_from_derived(sector, m, derived)
    return _nullspace_poly(model, n)


def y_polynomial(n2, m2, A, B):
    """The Eckart-sector numerator ``y_{n+m-1, m}`` built from classical Jacobi pieces."""
    t_n = A - 1 + n2
    if t_n == 0:
        raise DegenerateError("A - 1 + n vanishes")
    an, bn = -t_n + B / t_n, -t_n - B / t_n
    p_n1 = poly_coefficients("jacobi", n2 - 1, an, bn).coeffs if n2 >= 1 else np.zeros(1)
    if m2 == 0:
        # q_0 = 1 and q_{-1} = 0: only the classical piece survives, up to scale
        return CoeffPoly(np.asarray(p_n1, dtype=np.complex128))
    den_n = 2 * n2 + an + bn
    if den_n == 0:
        raise DegenerateError("2n + alpha_n + beta_n vanishes")
    c_n = 2 * (n2 + an) * (n2 + bn) / den_n
    t_m = A - 1 + m2
    if t_m == 0:
        raise DegenerateError("A - 1 + m vanishes")
    am, bm = -t_m + B / t_m, -t_m - B / t_m
    den_m = 2 * m2 + am + bm
    if den_m == 0:
        raise DegenerateError("2m + alpha_m + beta_m vanishes")
    c_m = 2 * (m2 + am) * (m2 + bm) / den_m
    q_m = poly_coefficients("jacobi", m2, am, bm).coeffs
    # q_{m-1}^{(A+1,B)} carries the same exponents as q_m
    q_m1 = poly_coefficients("jacobi", m2 - 1, am, bm).coeffs
    p_n = poly_coefficients("jacobi", n2, an, bn).coeffs
    first = c_n * np.convolve(q_m, p_n1)
    second = c_m * np.convolve(q_m1, p_n)
    size = max(len(first), len(second))
    out = np.zeros(size, dtype=np.complex128)
    out[: len(first)] += first
    out[: len(second)] -= second
    return CoeffPoly(out)


# ---------------------------------------------------------------------------
# admissibility


def seed_zero_on_domain(model, samples=10_000):
    """A real-domain zero of the seed polynomial, or ``None``.

    Roots are located exactly and filtered by domain; a dense sign/modulus
    scan backs that up for the real case.
    """
    seed = model.seed()
    if seed.degree < 1:
        return None
    roots = seed.roots()
    scale = max(1.0, float(np.max(np.abs(roots))))
    for r in roots:
        if model.family == "jacobi":
            if abs(r.imag) < 1e-9 * scale and -1 < r.real < 1:
                return r
        elif model.family == "eckart":
            if abs(r.real) < 1e-9 * scale:
                return r
        else:
            if abs(r.imag) < 1e-9 * scale and r.real > 0:
                return r
    lo, hi = model.domain
    hi = hi if np.isfinite(hi) else 50.0
    xs = np.linspace(lo, hi, samples + 2)[1:-1]
    z, _, _ = model.zmap(xs)
    vals = seed(z)
    if np.all(np.abs(vals.imag) <= 1e-12 * np.abs(vals.real)):
        sign = np.sign(vals.real)
        flip = np.flatnonzero(sign[1:] * sign[:-1] <= 0)
        if flip.size:
            return z[flip[0]]
    return None


def check_admissible(model):
    if model.family == "jacobi":
        if model.a.real <= 0 or model.b.real <= 0:
            raise AdmissibilityError(f"exponents must have positive real part, got {model.a}, {model.b}")
    bad = seed_zero_on_domain(model)
    if bad is not None:
        raise SingularDenominatorError(f"seed polynomial has a zero on the domain near z={bad}", z=bad)


# ---------------------------------------------------------------------------
# assembled sector solutions


@dataclass
class SectorSolution:
    """One separated closed-form eigenfunction with its eigenvalue."""

    variant: SectorVariant
    quantum_number: int
    m: int
    eigenvalue: complex
    domain: tuple
    derived: DerivedParams
    polynomial: CoeffPoly
    denominator: CoeffPoly
    potential: Callable = field(repr=False)
    _model: _Model = field(repr=False, default=None)
    scale: complex = 1.0

    def eval(self, x):
        """Unnormalized eigenfunction (times ``scale``) on the open domain."""
        x = np.asarray(x, dtype=float)
        z, _, _ = self._model.zmap(x)
        return self.scale * self._model.prefactor(z, self.quantum_number) * self.polynomial(z)

    __call__ = eval

    def support(self):
        """Finite interval holding the eigenfunction (radial: truncated)."""
        lo, hi = self.domain
        if np.isfinite(hi):
            return lo, hi
        return lo, radial_cutoff(self.derived.delta_t, self.derived.omega, self.quantum_number, self.m)

    def norm(self, nodes=200):
        from .numverify import gauss_legendre

        lo, hi = self.support()
        x, w = gauss_legendre(nodes, lo, hi)
        return float(np.sqrt(np.sum(w * np.abs(self.eval(x)) ** 2)))

    def normalized(self, nodes=200):
        return replace(self, scale=self.scale / self.norm(nodes))


def radial_cutoff(delta_t, omega, n, m):
    """Truncation radius ``12 sqrt(2 (delta_t + 2n + 2m) / omega)``."""
    return 12.0 * np.sqrt(2.0 * (delta_t + 2 * n + 2 * m) / omega)


@dataclass(frozen=True)
class Chain:
    """Derived parameters of all sectors for one set of outer labels."""

    phi: DerivedParams
    msq: float
    theta: Optional[DerivedParams]
    ellsq: Optional[float]
    delta_t: float


def chain(spec, n2=0, n3=0):
    """phi -> theta -> radial cascade of derived parameters."""
    phi = derive_phi_params(spec.phi_form, spec.G, spec.F, spec.p, spec.dimension)
    msq = _realify(eigen_msq(spec.phi_form, n3, spec.p, phi), "m^2")
    phi = replace(phi, msq=msq)
    theta = ellsq = None
    if spec.dimension == 3:
        theta = derive_theta_params(spec.theta_form, spec.C, spec.D, msq)
        ellsq = _realify(eigen_ellsq(spec.theta_form, n2, theta), "l^2")
        theta = replace(theta, ellsq=ellsq)
        inner = spec.delta + ellsq
    else:
        inner = spec.delta + msq
    if not inner > 0:
        raise AdmissibilityError(f"delta + l^2 (or m^2) must be positive, got {inner}")
    return Chain(phi=phi, msq=msq, theta=theta, ellsq=ellsq, delta_t=float(np.sqrt(inner)))


def conventional_theta(form, C, D, msq, theta):
    """Non-rational polar potential including the ``(m^2 - 1/4) cosec^2`` term."""
    theta = np.asarray(theta, dtype=float)
    s = np.sin(theta)
    out = (C + msq - 0.25) / s**2
    if form == "I":
        return out + D / np.cos(theta) ** 2
    if form == "II":
        return out + D * np.cos(theta) / s**2
    if form == "PT1":
        return out + 1j * D * np.cos(theta) / s
    return out + 1j * D * np.cos(theta) / s**2


def conventional_phi(form, G, F, p, phi):
    phi = np.asarray(phi, dtype=float)
    s = np.sin(p * phi)
    c = np.cos(p * phi)
    if form == "I":
        return G / s**2 + F / c**2
    if form == "II":
        return G / s**2 + F * c / s**2
    if form == "PT1":
        return G / s**2 + 1j * F * c / s**2
    return G / s**2 + 1j * F * c / s


def sector_potential(variant, spec, n2=0, n3=0):
    """The separated 1D potential of ``variant`` written in physical parameters."""
    ch = chain(spec, n2, n3)
    if variant.sector == "phi":
        form, p = variant.form, spec.p

        def v(x):
            return conventional_phi(form, spec.G, spec.F, p, x) + phi_rational(form, spec.m3, ch.phi, p, x, spec.dimension)

    elif variant.sector == "theta":
        form = variant.form

        def v(x):
            return conventional_theta(form, spec.C, spec.D, ch.msq, x) + theta_rational(form, spec.m2, ch.theta, x)

    else:
        lam = ch.ellsq if spec.dimension == 3 else ch.msq

        def v(r):
            r = np.asarray(r, dtype=float)
            return spec.omega**2 * r**2 / 4 + (spec.delta + lam - 0.25) / r**2 + radial_rational(spec.m1, ch.delta_t, spec.omega, r)

    return v


def sector_derived(variant, spec, n2=0, n3=0):
    ch = chain(spec, n2, n3)
    if variant.sector == "phi":
        return ch.phi
    if variant.sector == "theta":
        return ch.theta
    return DerivedParams(delta_t=ch.delta_t, omega=spec.omega, msq=ch.msq, ellsq=ch.ellsq)


def sector_m(variant, spec):
    return {"radial": spec.m1, "theta": spec.m2, "phi": spec.m3}[variant.sector]


def sector_model(variant, spec, n2=0, n3=0):
    derived = sector_derived(variant, spec, n2, n3)
    model = _model_from_derived(variant, sector_m(variant, spec), derived)
    return model, derived


def sector_solution(sector, form, spec, quantum_number, n2=0, n3=0, check=True):
    """Closed-form eigenfunction and eigenvalue of one sector.

    ``n2``/``n3`` select the outer levels feeding the cascade (theta needs the
    azimuthal level, radial needs both).
    """
    variant = SectorVariant(sector, form, spec.dimension)
    model, derived = sector_model(variant, spec, n2, n3)
    if check:
        check_admissible(model)
    n = quantum_number
    if model.family == "eckart":
        a, b = model.a.real, model.b.real
        poly = y_polynomial(n, model.m, a, b)
        if poly.degree < 0 or np.all(poly.coeffs == 0):
            raise MissingLevelError(f"label n={n} has no eigenfunction for m={model.m}")
        if n == model.m:
            raise MissingLevelError(f"label n={n} equals m={model.m}: no eigenfunction")
        poly = poly.monic()
    else:
        poly = _nullspace_poly(model, n)
    return SectorSolution(
        variant=variant,
        quantum_number=n,
        m=model.m,
        eigenvalue=complex(model.eigenvalue(n)),
        domain=model.domain,
        derived=derived,
        polynomial=poly,
        denominator=model.seed(),
        potential=sector_potential(variant, spec, n2, n3),
        _model=model,
    )


def level_labels(variant, m, count):
    """The first ``count`` valid labels of a sector, in label order."""
    if variant.family == "eckart":
        return [j for j in range(count + 1) if j != m][:count]
    return list(range(count))


def analytic_levels(variant, spec, count, n2=0, n3=0):
    """Closed-form eigenvalues of the lowest ``count`` levels, sorted by real part."""
    model, _ = sector_model(variant, spec, n2, n3)
    if variant.family != "eckart":
        return [complex(model.eigenvalue(j)) for j in range(count)]
    labels = [j for j in range(count + model.m + 60) if j != model.m and model.a - 1 + j != 0]
    vals = sorted((complex(model.eigenvalue(j)) for j in labels), key=lambda v: v.real)
    return vals[:count]
