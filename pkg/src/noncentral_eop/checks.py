"""Verification suites run by ``noncentral-eop verify``.

Each suite yields :class:`CheckResult` records; a record passes when the
measured quantity is strictly below its tolerance, so a zero tolerance fails
everything.
"""
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from . import assembly as asm
from . import extensions as ext
from . import numverify as nv
from .orthopoly import poly_coefficients

DEFAULT_SPEC = ext.PotentialSpec(omega=1.0, delta=1.0, C=1.0, D=1.25, G=3.0, F=1.0, p=1)
# larger couplings keep X_m seeds nodeless up to m = 6
RESIDUAL_SPEC = ext.PotentialSpec(omega=1.0, delta=1.0, C=15.0, D=40.0, G=30.0, F=20.0, p=1)

TOLERANCES = {
    "chain": 1e-12,
    "isospectral": 5e-6,
    "residual": 1e-8,
    "sensitivity": 1e-2,
    "reality": 1e-7,
    "x1": 1e-10,
    "ypoly": 1e-8,
    "reduction": 1e-12,
    "orthogonality": 1e-8,
    "nodes": 0.5,
}
SUITES = tuple(TOLERANCES)


@dataclass
class CheckResult:
    suite: str
    name: str
    measured: float
    tolerance: float
    passed: bool
    runtime: float = 0.0
    detail: str = ""
    variant: Optional[str] = None

    def to_dict(self):
        return asdict(self)


def _result(suite, name, measured, tol, t0, detail="", variant=None, invert=False):
    measured = float(measured)
    ok = (measured > tol and tol > 0) if invert else measured < tol
    if not math.isfinite(measured):
        ok = False
    return CheckResult(suite, name, measured, tol, bool(ok), time.perf_counter() - t0, detail, variant)


def _error_result(suite, name, exc, tol, t0, variant=None):
    return CheckResult(suite, name, float("nan"), tol, False, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}", variant)


def _variants(dims=(3, 2)):
    return [v for d in dims for v in asm.list_variants(d)]


def _spec_for(base, variant):
    return asm.with_variant(base, variant)


def _sectors(variant):
    if variant.dimension == 3:
        return ("phi", "theta", "radial")
    return ("phi", "radial")


def _form(spec, sector):
    return {"phi": spec.phi_form, "theta": spec.theta_form, "radial": "I"}[sector]


# ---------------------------------------------------------------------------
# closed-form references


def ell_squared_closed(n2, n3, C, D, G, F, p):
    """Form I/I polar eigenvalue written out in one expression."""
    m = math.sqrt(F + p * p / 4) + math.sqrt(G + p * p / 4) + p * (2 * n3 + 1)
    return ((2 * n2 + 1) + math.sqrt(D + 0.25) + math.sqrt(C + m * m)) ** 2


def radial_x1(delta_t, omega, r):
    u = omega * r**2 + 2 * delta_t
    return 4 * omega / u - 16 * omega * delta_t / u**2


def theta_x1(alpha, beta, theta):
    s, d = alpha + beta, beta - alpha
    u = s - d * np.cos(2 * theta)
    return 8 * s / u - 8 * (s * s - d * d) / u**2


def phi_x1(alpha_t, beta_t, p, phi):
    s, d = alpha_t + beta_t, beta_t - alpha_t
    u = s - d * np.cos(2 * p * phi)
    return 4 * p * p * (2 * s / u - 2 * (s * s - d * d) / u**2)


# ---------------------------------------------------------------------------
# suites


def check_chain(tol, rng, draws=20):
    """Closed-form l^2 and E against the phi -> theta -> radial cascade (I/I)."""
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(draws):
        C, D, G, F = rng.uniform(0.1, 5.0, 4)
        omega, delta = rng.uniform(0.3, 3.0), rng.uniform(0.0, 5.0)
        p = int(rng.integers(1, 4))
        m1, m2, m3 = (int(x) for x in rng.integers(0, 3, 3))
        spec = ext.PotentialSpec(omega=omega, delta=delta, C=C, D=D, G=G, F=F, p=p, m1=m1, m2=m2, m3=m3)
        for n2 in range(3):
            for n3 in range(3):
                ch = ext.chain(spec, n2, n3)
                ref = ell_squared_closed(n2, n3, C, D, G, F, p)
                worst = max(worst, abs(ch.ellsq - ref) / ref)
                for n1 in range(3):
                    E = ext.eigen_E(n1, omega, ch.delta_t)
                    E_ref = omega * (2 * n1 + 1 + math.sqrt(delta + ref))
                    worst = max(worst, abs(E - E_ref) / E_ref)
    return [_result("chain", "closed form vs phi->theta->radial cascade (I/I)", worst, tol, t0, f"{draws} draws x 27 label triples")]


def _sector_spectra(variant, base, m, N, k=4):
    spec = _spec_for(base, variant).with_m(m, m, m)
    out = {}
    for sector in _sectors(variant):
        sv = ext.SectorVariant(sector, _form(spec, sector), spec.dimension)
        an = np.array(ext.analytic_levels(sv, spec, k))
        an0 = np.array(ext.analytic_levels(sv, spec.with_m(0, 0, 0), k))
        num = nv.sector_spectrum(sv, spec, k, N)
        out[sector] = (an, an0, num)
    return out


def check_isospectral(tol, variants, base, N=2000, reality_tol=None, ms=(0, 1, 2)):
    """Numeric sector spectra vs closed forms and vs the m = 0 levels."""
    results = []
    for v in variants:
        for m in ms:
            t0 = time.perf_counter()
            name = f"m={m}"
            try:
                spectra = _sector_spectra(v, base, m, N)
            except Exception as exc:  # recorded, suite continues
                results.append(_error_result("isospectral", name, exc, tol, t0, _vlabel(v)))
                continue
            for sector, (an, an0, num) in spectra.items():
                allow = np.maximum(tol * np.abs(an), num.richardson_error)
                excess = float(np.max(np.abs(num.eigenvalues - an) / allow)) * tol
                results.append(_result("isospectral", f"{sector} numeric vs closed form, {name}", excess, tol, t0, _levels(an), _vlabel(v)))
                allow0 = np.maximum(tol * np.abs(an0), num.richardson_error)
                excess0 = float(np.max(np.abs(num.eigenvalues - an0) / allow0)) * tol
                results.append(_result("isospectral", f"{sector} numeric vs m=0 levels, {name}", excess0, tol, t0, _levels(an0), _vlabel(v)))
                if reality_tol is not None and ext.SectorVariant(sector, _form(_spec_for(base, v), sector), v.dimension).is_complex:
                    im = float(np.max(np.abs(num.eigenvalues.imag)))
                    results.append(_result("reality", f"{sector} max |Im lambda|, {name}", im, reality_tol, t0, "", _vlabel(v)))
    return results


def check_reality_closed(tol, variants, base):
    """Closed-form PT eigenvalues carry no imaginary part."""
    results = []
    for v in variants:
        if v.reality != "pt_complex":
            continue
        t0 = time.perf_counter()
        spec = _spec_for(base, v)
        phi = ext.derive_phi_params(spec.phi_form, spec.G, spec.F, spec.p, spec.dimension)
        worst = 0.0
        for n3 in range(4):
            msq = ext.eigen_msq(spec.phi_form, n3, spec.p, phi)
            worst = max(worst, abs(msq.imag))
            if v.dimension == 3:
                th = ext.derive_theta_params(spec.theta_form, spec.C, spec.D, msq.real)
                for n2 in range(1, 5):
                    worst = max(worst, abs(ext.eigen_ellsq(spec.theta_form, n2, th).imag))
        results.append(_result("reality", "closed-form |Im| of m^2, l^2", worst, 1e-12 if tol > 0 else tol, t0, "", _vlabel(v)))
    return results


def check_residual(tol, variants, base=RESIDUAL_SPEC, max_total=6, sens_tol=None):
    results = []
    for v in variants:
        for m in range(max_total + 1):
            spec = _spec_for(base, v).with_m(m, m, m)
            for sector in _sectors(v):
                form = _form(spec, sector)
                t0 = time.perf_counter()
                worst, count = 0.0, 0
                try:
                    for n in range(max_total - m + 1):
                        try:
                            sol = ext.sector_solution(sector, form, spec, n)
                        except ext.MissingLevelError:
                            continue
                        worst = max(worst, nv.residual_norm(sol))
                        count += 1
                except Exception as exc:
                    results.append(_error_result("residual", f"{sector} m={m}", exc, tol, t0, _vlabel(v)))
                    continue
                results.append(_result("residual", f"{sector} m={m} max residual over {count} states", worst, tol, t0, "", _vlabel(v)))
    if sens_tol is not None:
        t0 = time.perf_counter()
        spec = base.with_m(1, 1, 1)
        sol = ext.sector_solution("radial", "I", spec, 0)
        shifted = replace(sol, eigenvalue=sol.eigenvalue + 0.1)
        results.append(_result("sensitivity", "radial lambda+0.1 residual", nv.residual_norm(shifted), sens_tol, t0, "must exceed", None, invert=True))
    return results


def check_x1(tol, rng, points=1000):
    results = []
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        dt, w = rng.uniform(0.5, 5.0), rng.uniform(0.3, 3.0)
        r = rng.uniform(1e-3, 10.0, points // 5)
        ref = radial_x1(dt, w, r)
        got = ext.radial_rational(1, dt, w, r)
        worst = max(worst, float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300))))
    results.append(_result("x1", "radial m1=1 vs explicit X1 form", worst, tol, t0))
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        a, b = rng.uniform(0.6, 5.0, 2)
        th = rng.uniform(1e-3, np.pi / 2 - 1e-3, points // 5)
        got = ext.theta_rational("I", 1, ext.DerivedParams(alpha=a, beta=b), th)
        ref = theta_x1(a, b, th)
        worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
    results.append(_result("x1", "theta form I m2=1 vs explicit X1 form", worst, tol, t0))
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        a, b = rng.uniform(0.6, 5.0, 2)
        p = int(rng.integers(1, 4))
        ph = rng.uniform(1e-3, np.pi / (2 * p) - 1e-3, points // 5)
        got = ext.phi_rational("I", 1, ext.DerivedParams(alpha_t=a, beta_t=b, p=p), p, ph)
        ref = phi_x1(a, b, p, ph)
        worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
    results.append(_result("x1", "phi form I m3=1 vs explicit X1 form", worst, tol, t0))
    return results


def check_ypoly(tol, params=((2.5, 1.5), (4.6, 0.625), (3.2, 2.0)), top=4):
    results = []
    for A, B in params:
        t0 = time.perf_counter()
        worst = 0.0
        d = ext.DerivedParams(A=A, B=B)
        z = 1j * np.linspace(-3, 3, 41)
        try:
            for m in range(1, top + 1):
                for n in range(top + 1):
                    if n == m:
                        continue
                    y = ext.y_polynomial(n, m, A, B)
                    ns = ext.exceptional_poly_from_ode(ext.SectorVariant("theta", "PT1"), n, m, d)
                    ratio = y(z) / ns(z)
                    worst = max(worst, float(np.max(np.abs(ratio / ratio[len(z) // 2] - 1))))
        except Exception as exc:
            results.append(_error_result("ypoly", f"A={A}, B={B}", exc, tol, t0))
            continue
        results.append(_result("ypoly", f"y vs collocation nullspace, A={A}, B={B}", worst, tol, t0))
    return results


def check_reduction(tol, variants, base, top=6):
    results = []
    for v in variants:
        spec = _spec_for(base, v).with_m(0, 0, 0)
        t0 = time.perf_counter()
        worst_pot, worst_poly = 0.0, 0.0
        try:
            for sector in _sectors(v):
                sv = ext.SectorVariant(sector, _form(spec, sector), spec.dimension)
                model, derived = ext.sector_model(sv, spec)
                lo, hi = sv.domain(spec.p)
                hi = 8.0 if not np.isfinite(hi) else hi
                x = np.linspace(lo, hi, 203)[1:-1]
                if sector == "phi":
                    rat = ext.phi_rational(sv.form, 0, derived, spec.p, x, spec.dimension)
                elif sector == "theta":
                    rat = ext.theta_rational(sv.form, 0, derived, x)
                else:
                    rat = ext.radial_rational(0, derived.delta_t, spec.omega, x)
                worst_pot = max(worst_pot, float(np.max(np.abs(rat))))
                if sv.family == "eckart":
                    labels = range(1, top + 1)
                else:
                    labels = range(top + 1)
                for n in labels:
                    sol = ext.sector_solution(sector, sv.form, spec, n)
                    worst_poly = max(worst_poly, _classical_mismatch(model, n, sol.polynomial))
        except Exception as exc:
            results.append(_error_result("reduction", "m=0", exc, tol, t0, _vlabel(v)))
            continue
        results.append(_result("reduction", "m=0 rational terms", worst_pot, tol, t0, "max |rational term|", _vlabel(v)))
        results.append(_result("reduction", "m=0 polynomials vs classical", worst_poly, tol, t0, "coefficient-norm relative", _vlabel(v)))
    return results


def _classical_mismatch(model, n, poly):
    if model.family == "laguerre":
        ref = poly_coefficients("laguerre", n, model.a)
    elif model.family == "jacobi":
        ref = poly_coefficients("jacobi", n, model.a, model.b)
    else:
        t = model.a - 1 + n
        ref = poly_coefficients("jacobi", n - 1, -t + model.b / t, -t - model.b / t)
    ref = ref.monic().coeffs
    got = poly.coeffs
    if len(got) != len(ref):
        return float("inf")
    return float(np.linalg.norm(got - ref) / np.linalg.norm(ref))


def check_orthogonality(tol, variants, base, top=5):
    """Real-form sectors: L2 orthogonality (n, n' <= 3) and node counts (n <= top)."""
    results = []
    for v in variants:
        for m in (0, 1, 2):
            spec = _spec_for(base, v).with_m(m, m, m)
            for sector in _sectors(v):
                form = _form(spec, sector)
                if form in ext.COMPLEX_FORMS:
                    continue
                t0 = time.perf_counter()
                try:
                    sols = [ext.sector_solution(sector, form, spec, n).normalized() for n in range(top + 1)]
                    lo, hi = sols[0].support()
                    worst = 0.0
                    for i in range(4):
                        for j in range(i + 1, 4):
                            ip = nv.inner_product(sols[i].eval, sols[j].eval, grid=(lo, hi) if np.isfinite(hi) else sols[max(i, j)].support())
                            worst = max(worst, abs(ip))
                    bad_nodes = 0
                    for n, sol in enumerate(sols):
                        a, b = sol.support()
                        if sector == "radial":
                            b = nv.effective_radius(sol, a, b)
                        x = np.linspace(a, b, 20001)[1:-1]
                        vals = sol.eval(x).real
                        bad_nodes = max(bad_nodes, abs(nv.sign_changes(vals) - n))
                except Exception as exc:
                    results.append(_error_result("orthogonality", f"{sector}:{form} m={m}", exc, tol, t0, _vlabel(v)))
                    continue
                results.append(_result("orthogonality", f"{sector}:{form} m={m} max |<n|n'>|", worst, tol, t0, "n,n' <= 3", _vlabel(v)))
                results.append(_result("nodes", f"{sector}:{form} m={m} node-count mismatch", bad_nodes, TOLERANCES["nodes"] if tol > 0 else 0.0, t0, f"n <= {top}", _vlabel(v)))
    return results


def _vlabel(v):
    return f"{v.dimension}d:{v.label}"


def _levels(vals):
    return " ".join(f"{complex(x).real:.10g}" for x in vals)


def match_variant(v, pattern):
    """``theta:PT1`` / ``phi:II`` select by sector form, ``I:PT1`` / ``2d:PT2`` by label."""
    if pattern is None:
        return True
    text = pattern.strip()
    low = text.lower()
    if low.startswith("theta:"):
        return v.dimension == 3 and v.theta_form == text[6:]
    if low.startswith("phi:"):
        return v.phi_form == text[4:]
    if low in ("2d", "3d"):
        return v.dimension == int(low[0])
    if low[:3] in ("2d:", "3d:"):
        return v.dimension == int(low[0]) and v.label == text[3:]
    return v.label == text


def default_workers():
    env = os.environ.get("NONCENTRAL_EOP_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cap))
        except ValueError:
            pass
    return cap


def run_suites(only=None, variant=None, tol=None, seed=0, base=None, N=2000, residual_base=None, workers=None):
    """Run the selected suites; ``tol`` (if given) overrides every tolerance.

    Per-variant work fans out over a thread pool; results keep a fixed order.
    """
    rng = np.random.default_rng(seed)
    base = DEFAULT_SPEC if base is None else base
    residual_base = RESIDUAL_SPEC if residual_base is None else residual_base
    tols = {k: (tol if tol is not None else v) for k, v in TOLERANCES.items()}
    chosen = set(SUITES if not only else only)
    unknown = chosen - set(SUITES)
    if unknown:
        raise ValueError(f"unknown check(s): {sorted(unknown)}; choose from {', '.join(SUITES)}")
    variants = [v for v in _variants() if match_variant(v, variant)]
    if not variants:
        raise ValueError(f"no variant matches {variant!r}")

    def per_variant(v):
        out = []
        if chosen & {"isospectral", "reality"}:
            iso = check_isospectral(tols["isospectral"], [v], base, N, reality_tol=tols["reality"])
            out += [r for r in iso if r.suite in chosen]
        if "reality" in chosen:
            out += check_reality_closed(tols["reality"], [v], base)
        if "residual" in chosen:
            out += check_residual(tols["residual"], [v], residual_base)
        if "reduction" in chosen:
            out += check_reduction(tols["reduction"], [v], base)
        if chosen & {"orthogonality", "nodes"}:
            orth = check_orthogonality(tols["orthogonality"], [v], base)
            out += [r for r in orth if r.suite in chosen]
        return out

    out = []
    if "chain" in chosen:
        out += check_chain(tols["chain"], rng)
    if "x1" in chosen:
        out += check_x1(tols["x1"], rng)
    if "ypoly" in chosen:
        out += check_ypoly(tols["ypoly"])
    if "sensitivity" in chosen:
        out += check_residual(tols["residual"], [], residual_base, sens_tol=tols["sensitivity"])
    with ThreadPoolExecutor(max_workers=workers or default_workers()) as pool:
        for chunk in pool.map(per_variant, variants):
            out += chunk
    return out
