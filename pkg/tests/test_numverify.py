import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest
from numpy.testing import assert_allclose

from noncentral_eop import extensions as ext
from noncentral_eop import kernels
from noncentral_eop import numverify as nv
from noncentral_eop.extensions import PotentialSpec, SectorVariant
from noncentral_eop.orthopoly import jacobi_eval


def box(x):
    return np.zeros_like(x)


def test_grid_invariants():
    g = nv.Grid1D(0.0, 1.0, 99)
    assert g.h == pytest.approx(0.01)
    assert g.nodes()[0] == pytest.approx(0.01)
    assert g.nodes()[-1] == pytest.approx(0.99)
    assert g.refined().h == pytest.approx(g.h / 2)
    with pytest.raises(ValueError):
        nv.Grid1D(0.0, 1.0, 31)
    with pytest.raises(ValueError):
        nv.Grid1D(1.0, 1.0, 64)


def test_hamiltonian_structure():
    g = nv.Grid1D(0, np.pi, 40)
    mat = nv.build_hamiltonian(lambda x: np.cos(x), g)
    dense = mat.to_dense()
    assert_allclose(dense, dense.T)
    assert not mat.is_complex
    cmat = nv.build_hamiltonian(lambda x: 1j * np.cos(x), g)
    assert cmat.is_complex
    # complex symmetric, not Hermitian
    assert_allclose(cmat.to_dense(), cmat.to_dense().T)
    assert not np.allclose(cmat.to_dense(), cmat.to_dense().conj().T)


def test_hamiltonian_rejects_singular_samples():
    with pytest.raises(ValueError, match="not finite"):
        nv.build_hamiltonian(lambda x: np.where(x > 0.5, np.inf, 0.0), nv.Grid1D(0, 1, 63))


def test_box_spectrum():
    spec = nv.numeric_spectrum(box, nv.Grid1D(0, np.pi, 999), 3)
    assert_allclose(spec.eigenvalues.real, [1, 4, 9], rtol=1e-5)
    assert np.all(spec.richardson_error < 1e-6)
    assert np.all(spec.eigenvalues.imag == 0)


@pytest.mark.parametrize(
    "V,grid,exact",
    [
        (box, nv.Grid1D(0, np.pi, 400), [1, 4, 9, 16]),
        (lambda x: x**2, nv.Grid1D(-10, 10, 1000), [1, 3, 5, 7]),
        (lambda x: 2 / x**2 + x**2, nv.Grid1D(0, 10, 1000), [5, 9, 13, 17]),
    ],
)
def test_error_bar_covers_true_error(V, grid, exact):
    spec = nv.numeric_spectrum(V, grid, 4)
    actual = np.abs(spec.eigenvalues - exact)
    assert np.all(actual <= 2 * spec.richardson_error)
    # and it is not vacuous: far below the fine-grid error
    assert np.all(spec.richardson_error < 0.1 * np.abs(spec.fine - exact))


def test_error_bar_without_coarser_grid():
    spec = nv.numeric_spectrum(box, nv.Grid1D(0, np.pi, 40), 2)
    assert spec.coarser is None
    assert_allclose(spec.richardson_error, np.abs(spec.fine - spec.coarse) / 3)


def test_grid_convergence_ratio():
    spec = nv.numeric_spectrum(box, nv.Grid1D(0, np.pi, 200), 4)
    exact = np.array([1, 4, 9, 16])
    ratio = (spec.coarse.real - exact) / (spec.fine.real - exact)
    assert np.all((3.5 <= ratio) & (ratio <= 4.5))


def test_radial_oscillator_ground_state():
    dt = 2.0
    V = lambda r: r**2 / 4 + (dt**2 - 0.25) / r**2  # noqa: E731
    spec = nv.numeric_spectrum(V, nv.Grid1D(1e-4, 20, 4000), 1)
    assert spec.eigenvalues[0].real == pytest.approx(1 + dt, rel=1e-5)


def test_k_bounds():
    g = nv.Grid1D(0, np.pi, 64)
    with pytest.raises(ValueError):
        nv.numeric_spectrum(box, g, 9)
    with pytest.raises(ValueError):
        nv.numeric_spectrum(box, g, 0)


def test_dense_vs_tridiagonal_complex():
    g = nv.Grid1D(0.05, np.pi - 0.05, 120)
    mat = nv.build_hamiltonian(lambda x: 3 / np.sin(x) ** 2 + 2j * np.cos(x) / np.sin(x), g)
    tri, _ = nv._lowest(mat, 5)
    dense, sweeps = nv.dense_lowest(mat, 5)
    assert sweeps <= kernels.QL_MAX_SWEEPS * mat.diag.size
    assert_allclose(tri, dense, rtol=1e-10)


def test_complex_path_on_real_matrix():
    g = nv.Grid1D(0.01, 3.0, 300)
    mat = nv.build_hamiltonian(lambda x: x**2 + 1 / x, g)
    real_vals, _ = kernels.tridiag_eigvals(mat.diag, mat.off)
    cplx_vals, _ = kernels.tridiag_eigvals(mat.diag + 0j, mat.off + 0j)
    assert_allclose(np.sort(cplx_vals.real), np.sort(real_vals), rtol=1e-10)
    assert np.max(np.abs(cplx_vals.imag)) < 1e-10 * np.max(np.abs(real_vals))
    ref = np.linalg.eigvalsh(mat.to_dense())
    assert_allclose(np.sort(real_vals), ref, rtol=1e-10)
    sturm = kernels.sturm_lowest(mat.diag, mat.off, 4)
    assert_allclose(sturm, ref[:4], rtol=1e-11)


def test_dense_against_numpy(rng):
    a = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
    vals, _ = kernels.dense_eigvals(a)
    ref = np.linalg.eigvals(a)
    key = lambda v: (np.round(v.real, 8), np.round(v.imag, 8))  # noqa: E731
    assert_allclose(sorted(vals, key=key), sorted(ref, key=key), rtol=1e-9, atol=1e-9)


def test_iteration_cap_reported():
    g = nv.Grid1D(0, 1, 64)
    mat = nv.build_hamiltonian(lambda x: 1j * x, g)
    with pytest.raises(kernels.ConvergenceError):
        kernels.tridiag_eigvals(mat.diag, mat.off, max_sweeps=1)


def test_numpy_backend_agrees():
    code = textwrap.dedent(
        """
        import numpy as np
        from noncentral_eop import numverify as nv, backend
        g = nv.Grid1D(0.05, np.pi - 0.05, 200)
        r = nv.numeric_spectrum(lambda x: 2 / np.sin(x) ** 2, g, 4)
        c = nv.numeric_spectrum(lambda x: 2 / np.sin(x) ** 2 + 1j * np.cos(x), g, 4)
        print(backend(), *r.eigenvalues.real, *c.eigenvalues.real, *c.eigenvalues.imag)
        """
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, NONCENTRAL_EOP_JIT=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, *vals = res.stdout.split()
        out[flag] = (name, np.array(vals, dtype=float))
    assert out["0"][0] == "numpy"
    assert_allclose(out["0"][1], out["1"][1], rtol=1e-9, atol=1e-10)


# ---------------------------------------------------------------------------
# sector spectra


def test_extended_radial_matches_conventional():
    spec0 = PotentialSpec(omega=1, delta=1, C=1, D=1.25, G=3, F=1)
    sv = SectorVariant("radial", "I")
    s0 = nv.sector_spectrum(sv, spec0, 4, 2000)
    s2 = nv.sector_spectrum(sv, spec0.with_m(2, 0, 0), 4, 2000)
    tol = np.maximum(5e-6 * np.abs(s0.eigenvalues), s0.richardson_error + s2.richardson_error)
    assert np.all(np.abs(s2.eigenvalues - s0.eigenvalues) <= tol)
    ref = np.array(ext.analytic_levels(sv, spec0, 4))
    assert np.all(np.abs(s2.eigenvalues - ref) <= np.maximum(5e-6 * np.abs(ref), s2.richardson_error))


def test_pt1_theta_spectrum_real():
    # G = F = 0 -> m^2 = 4, so A = 1/2 + 2 = 2.5 and B = D/2 = 1.5
    spec = PotentialSpec(omega=1, delta=1, C=0, D=3, G=0, F=0, theta_form="PT1")
    sv = spec.theta_variant()
    model, _ = ext.sector_model(sv, spec)
    assert (model.a.real, model.b.real) == pytest.approx((2.5, 1.5))
    num = nv.sector_spectrum(sv, spec, 4, 2000)
    ref = np.array([(2.5 - 1 + n) ** 2 + 1.5**2 / (2.5 - 1 + n) ** 2 for n in range(1, 5)])
    assert np.max(np.abs(num.eigenvalues.imag)) < 1e-7
    assert_allclose(num.eigenvalues.real, ref, rtol=5e-6)


@pytest.mark.parametrize(
    "sector, form, dim, m",
    [("phi", "I", 3, 2), ("phi", "II", 3, 1), ("phi", "PT1", 3, 2), ("theta", "I", 3, 2), ("theta", "II", 3, 2),
     ("theta", "PT2", 3, 1), ("phi", "PT2", 2, 1), ("radial", "I", 2, 2)],
)
def test_sector_matches_closed_form(default_spec, sector, form, dim, m):
    kw = default_spec.to_dict()
    kw.update(dimension=dim, m1=m, m2=m, m3=m)
    if sector == "theta":
        kw["theta_form"] = form
    if sector == "phi":
        kw["phi_form"] = form
    spec = PotentialSpec(**kw)
    sv = SectorVariant(sector, form, dim)
    num = nv.sector_spectrum(sv, spec, 4, 2000)
    ref = np.array(ext.analytic_levels(sv, spec, 4))
    assert np.all(np.abs(num.eigenvalues - ref) <= np.maximum(5e-6 * np.abs(ref), num.richardson_error))
    assert np.max(np.abs(num.eigenvalues.imag)) < 1e-7


def test_eckart_level_deleted(default_spec):
    # the extended Eckart sector loses the level with label m and gains label 0
    spec = PotentialSpec(**{**default_spec.to_dict(), "theta_form": "PT1", "m2": 1})
    sv = spec.theta_variant()
    model, _ = ext.sector_model(sv, spec)
    num = nv.sector_spectrum(sv, spec, 4, 2000).eigenvalues.real
    labels = [0, 2, 3, 4]
    assert_allclose(num, sorted(model.eigenvalue(j).real for j in labels), rtol=5e-6)
    assert all(abs(v - model.eigenvalue(1).real) > 1e-3 for v in num)


# ---------------------------------------------------------------------------
# residuals and quadrature


def test_residual_conventional_radial():
    spec = PotentialSpec(omega=1, delta=1)
    sol = ext.sector_solution("radial", "I", spec, 0)
    assert nv.residual_norm(sol) < 1e-9


def test_residual_x1_and_sensitivity():
    spec = PotentialSpec(omega=1, delta=1, m1=1)
    sol = ext.sector_solution("radial", "I", spec, 0)
    assert nv.residual_norm(sol) < 1e-8
    wrong = ext.SectorSolution(**{**sol.__dict__, "eigenvalue": sol.eigenvalue + 0.1})
    assert nv.residual_norm(wrong) > 1e-2


def test_residual_eckart_states(default_spec):
    spec = PotentialSpec(**{**default_spec.to_dict(), "C": 15, "D": 40, "theta_form": "PT1", "m2": 2})
    for n in (0, 1, 3, 4):
        assert nv.residual_norm(ext.sector_solution("theta", "PT1", spec, n)) < 1e-8


def test_inner_product_legendre():
    val = nv.inner_product(lambda z: jacobi_eval(1, 0, 0, z), lambda z: jacobi_eval(2, 0, 0, z))
    assert abs(val) < 1e-12
    assert nv.inner_product(lambda z: z, lambda z: z) == pytest.approx(2 / 3)


def test_inner_product_theta_states():
    spec = PotentialSpec(C=3, D=2, G=0, F=0, m2=1)
    s0 = ext.sector_solution("theta", "I", spec, 0)
    s1 = ext.sector_solution("theta", "I", spec, 1)
    dom = s0.support()
    val = nv.inner_product(s0.eval, s1.eval, grid=dom)
    assert abs(val) < 1e-8 * s0.norm() * s1.norm()
    assert s1.normalized().norm() == pytest.approx(1, abs=1e-8)


def test_gauss_legendre_exact_for_polynomials():
    x, w = nv.gauss_legendre(20, 0.0, 2.0)
    assert np.sum(w * x**7) == pytest.approx(2**8 / 8)


def test_sign_changes():
    x = np.linspace(0, np.pi, 1001)[1:-1]
    assert nv.sign_changes(np.sin(3 * x)) == 2
    assert nv.sign_changes(np.ones(5)) == 0


def test_sector_grid_offsets(default_spec):
    g = nv.sector_grid(SectorVariant("theta", "I"), default_spec, 100)
    assert g.a == pytest.approx(nv.ANGULAR_INSET)
    assert g.b == pytest.approx(np.pi / 2 - nv.ANGULAR_INSET)
    r = nv.sector_grid(SectorVariant("radial", "I"), default_spec, 100)
    assert r.a == nv.RADIAL_EPS
    assert r.b == pytest.approx(ext.radial_cutoff(ext.chain(default_spec).delta_t, 1.0, 4, 0))


def test_radial_truncation_converged(default_spec):
    # doubling the cutoff leaves the lowest levels unchanged at this resolution
    sv = SectorVariant("radial", "I")
    spec = default_spec.with_m(1, 0, 0)
    V = ext.sector_potential(sv, spec)
    g = nv.sector_grid(sv, spec, 1500)
    a = nv.numeric_spectrum(V, g, 4).eigenvalues
    b = nv.numeric_spectrum(V, nv.Grid1D(g.a, 2 * g.b, 3001), 4).eigenvalues
    assert_allclose(a, b, rtol=1e-6)
