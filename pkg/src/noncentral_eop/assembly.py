"""Full 3D and 2D potentials, energies and product wavefunctions.

The sectors are solved in the order phi -> theta -> r because the derived
parameters cascade: ``m^2`` enters the polar exponents and ``l^2`` (or
``m^2`` in 2D) enters ``delta_t = sqrt(delta + l^2)``.
"""
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import extensions as ext

THETA_FORMS = ("I", "II", "PT1", "PT2")
PHI_FORMS_3D = ("I", "II", "PT1")
PHI_FORMS_2D = ("I", "II", "PT1", "PT2")


@dataclass(frozen=True)
class VariantId:
    phi_form: str
    theta_form: Optional[str] = None
    dimension: int = 3

    def __post_init__(self):
        if self.dimension == 3:
            if self.theta_form not in THETA_FORMS or self.phi_form not in PHI_FORMS_3D:
                raise ValueError(f"invalid 3D variant {self.theta_form}:{self.phi_form}")
        elif self.dimension == 2:
            if self.theta_form is not None or self.phi_form not in PHI_FORMS_2D:
                raise ValueError(f"invalid 2D variant {self.phi_form}")
        else:
            raise ValueError("dimension must be 2 or 3")

    @property
    def reality(self):
        forms = (self.phi_form,) if self.dimension == 2 else (self.theta_form, self.phi_form)
        return "pt_complex" if any(f in ext.COMPLEX_FORMS for f in forms) else "real"

    @property
    def label(self):
        return self.phi_form if self.dimension == 2 else f"{self.theta_form}:{self.phi_form}"

    @classmethod
    def parse(cls, text, dimension=3):
        """``THETA:PHI`` in 3D, ``PHI`` (or ``:PHI``) in 2D."""
        parts = [p.strip() for p in str(text).split(":")]
        if dimension == 2:
            return cls(phi_form=parts[-1], dimension=2)
        if len(parts) != 2:
            raise ValueError(f"expected THETA:PHI, got {text!r}")
        return cls(phi_form=parts[1], theta_form=parts[0], dimension=3)


def list_variants(dimension):
    if dimension in (3, "3", "three"):
        return [VariantId(p, t, 3) for t in THETA_FORMS for p in PHI_FORMS_3D]
    if dimension in (2, "2", "two"):
        return [VariantId(p, None, 2) for p in PHI_FORMS_2D]
    raise ValueError(f"unknown dimension {dimension!r}")


def with_variant(spec, variant):
    if variant.dimension == 3:
        return replace(spec, theta_form=variant.theta_form, phi_form=variant.phi_form, dimension=3)
    return replace(spec, phi_form=variant.phi_form, dimension=2)


# ---------------------------------------------------------------------------
# potentials


def _extended_theta(spec, ch):
    """C/D part plus rational term, without the (m^2 - 1/4) cosec^2 separation term."""
    form = spec.theta_form

    def v(theta):
        theta = np.asarray(theta, dtype=float)
        # msq = 1/4 cancels the -1/4 of the separated problem, leaving C cosec^2
        conv = ext.conventional_theta(form, spec.C, spec.D, 0.25, theta)
        return conv + ext.theta_rational(form, spec.m2, ch.theta, theta)

    return v


def _extended_phi(spec, ch):
    form, p = spec.phi_form, spec.p

    def u(phi):
        return ext.conventional_phi(form, spec.G, spec.F, p, phi) + ext.phi_rational(form, spec.m3, ch.phi, p, phi, spec.dimension)

    return u


def _extended_radial(spec, ch):
    def u(r):
        r = np.asarray(r, dtype=float)
        return spec.omega**2 * r**2 / 4 + spec.delta / r**2 + ext.radial_rational(spec.m1, ch.delta_t, spec.omega, r)

    return u


def potential_3d(spec, variant, n2=0, n3=0):
    """``U(r) + V(theta)/r^2 + U(phi)/(r^2 sin^2 theta)``.

    The rational terms depend on the levels feeding the cascade, chosen by
    ``n2`` and ``n3``.
    """
    spec = with_variant(spec, variant)
    ch = ext.chain(spec, n2, n3)
    ur, vt, up = _extended_radial(spec, ch), _extended_theta(spec, ch), _extended_phi(spec, ch)

    def V(r, theta, phi):
        r, theta, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r, theta, phi)))
        return ur(r) + vt(theta) / r**2 + up(phi) / (r**2 * np.sin(theta) ** 2)

    return V


def potential_2d(spec, variant, n3=0):
    """``U(r) + U(phi)/r^2``."""
    spec = with_variant(spec, variant)
    ch = ext.chain(spec, 0, n3)
    ur, up = _extended_radial(spec, ch), _extended_phi(spec, ch)

    def V(r, phi):
        r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
        return ur(r) + up(phi) / r**2

    return V


# ---------------------------------------------------------------------------
# solutions


@dataclass
class FullSolution:
    E: float
    quantum_numbers: tuple
    sectors: dict
    psi: Callable
    msq: float
    ellsq: Optional[float]
    delta_t: float


def _energy(spec, ch, n1):
    return ext.eigen_E(n1, spec.omega, ch.delta_t)


def solve_3d(spec, variant, n1, n2, n3, normalize=True):
    spec = with_variant(spec, variant)
    ch = ext.chain(spec, n2, n3)
    phi = ext.sector_solution("phi", spec.phi_form, spec, n3, n2, n3)
    theta = ext.sector_solution("theta", spec.theta_form, spec, n2, n2, n3)
    rad = ext.sector_solution("radial", "I", spec, n1, n2, n3)
    if normalize:
        phi, theta, rad = phi.normalized(), theta.normalized(), rad.normalized()

    def psi(r, th, ph):
        r, th, ph = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r, th, ph)))
        return rad.eval(r) / r * theta.eval(th) / np.sqrt(np.sin(th)) * phi.eval(ph)

    return FullSolution(
        E=_energy(spec, ch, n1),
        quantum_numbers=(n1, n2, n3),
        sectors={"radial": rad, "theta": theta, "phi": phi},
        psi=psi,
        msq=ch.msq,
        ellsq=ch.ellsq,
        delta_t=ch.delta_t,
    )


def solve_2d(spec, variant, n1, n3, normalize=True):
    spec = with_variant(spec, variant)
    ch = ext.chain(spec, 0, n3)
    phi = ext.sector_solution("phi", spec.phi_form, spec, n3, 0, n3)
    rad = ext.sector_solution("radial", "I", spec, n1, 0, n3)
    if normalize:
        phi, rad = phi.normalized(), rad.normalized()

    def psi(r, ph):
        r, ph = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(ph, dtype=float))
        return rad.eval(r) / np.sqrt(r) * phi.eval(ph)

    return FullSolution(
        E=_energy(spec, ch, n1),
        quantum_numbers=(n1, n3),
        sectors={"radial": rad, "phi": phi},
        psi=psi,
        msq=ch.msq,
        ellsq=None,
        delta_t=ch.delta_t,
    )


def energy(spec, variant, n1, n2=0, n3=0):
    """Closed-form energy without building eigenfunctions."""
    spec = with_variant(spec, variant)
    return _energy(spec, ext.chain(spec, n2, n3), n1)


def pt_image_3d(r, theta, phi):
    """Parity in spherical coordinates: (r, pi - theta, phi + pi)."""
    return r, np.pi - np.asarray(theta), np.asarray(phi) + np.pi


def pt_image_2d(r, phi):
    return r, np.pi - np.asarray(phi)
