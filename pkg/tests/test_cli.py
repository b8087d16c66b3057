import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from noncentral_eop import assembly as asm
from noncentral_eop import cli
from noncentral_eop import extensions as ext

from conftest import DEFAULTS


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


# --- list -------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv,count",
    [((), 16), (("--dim", "3", "--reality", "real"), 4), (("--dim", "2"), 4), (("--dim", "3"), 12)],
)
def test_list_counts(capsys, argv, count):
    code, out, _ = run(capsys, "list", *argv)
    assert code == 0
    assert len(rows_of(out)) == count


def test_list_json(capsys):
    code, out, _ = run(capsys, "list", "--format", "json", "--reality", "pt_complex")
    assert code == 0
    variants = json.loads(out)["variants"]
    assert len(variants) == 10
    assert all(v["reality"] == "pt_complex" for v in variants)


# --- spectrum ---------------------------------------------------------------


@pytest.fixture(scope="module")
def spectrum_rows():
    out = {}
    for m in ((0, 0, 0), (1, 1, 1), (2, 0, 1)):
        cfg = cli.RunConfig(m1=m[0], m2=m[1], m3=m[2], grid_n=300)
        out[m] = rows_of(cli.cmd_spectrum(cfg))
    return out


def test_spectrum_rows_and_isospectrality(spectrum_rows):
    ref = spectrum_rows[(0, 0, 0)]
    assert len(ref) == 27
    assert "E[energy]" in ref[0] and "E_err[energy]" in ref[0]
    for m, rows in spectrum_rows.items():
        assert len(rows) == 27
        assert all(int(r["m1"]) == m[0] for r in rows)
        e = np.array([float(r["E[energy]"]) for r in rows])
        assert_allclose(e, [float(r["E[energy]"]) for r in ref], rtol=1e-12)


def test_spectrum_numeric_columns_track_closed_form(spectrum_rows):
    for rows in spectrum_rows.values():
        for key, err in (("msq", "msq_err"), ("ellsq", "ellsq_err")):
            exact = np.array([float(r[key]) for r in rows])
            num = np.array([float(r[key + "_numeric"]) for r in rows])
            assert_allclose(num, exact, rtol=1e-4)
            assert all(float(r[err]) >= 0 for r in rows)


def test_spectrum_pt_imaginary_columns():
    cfg = cli.RunConfig(variant="PT1:PT1", m2=1, m3=1, nmax=1, grid_n=400)
    rows = rows_of(cli.cmd_spectrum(cfg))
    assert len(rows) == 8
    for r in rows:
        for col in ("msq_numeric_im", "ellsq_numeric_im", "E_numeric_im[energy]"):
            assert abs(float(r[col])) < 1e-7


def test_spectrum_2d_drops_theta_columns():
    cfg = cli.RunConfig(dim=2, variant="PT2", m3=1, nmax=1, grid_n=300)
    rows = rows_of(cli.cmd_spectrum(cfg))
    assert len(rows) == 4
    assert not any(k.startswith(("n2", "m2", "ellsq")) for k in rows[0])
    # label 1 is deleted at m3 = 1: labels run 0, 2
    assert sorted({int(r["n3"]) for r in rows}) == [0, 2]


def test_spectrum_inadmissible_exit_code(capsys):
    code, out, err = run(capsys, "spectrum", "--delta", "-1")
    assert code == 2 and out == ""
    assert "delta" in err


def test_spectrum_bad_variant_exit_code(capsys):
    code, _, err = run(capsys, "spectrum", "--variant", "I:PT2")
    assert code == 2 and "variant" in err


def test_spectrum_output_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["spectrum", "--nmax", "1", "--N", "200", "--m2", "1"]
    assert run(capsys, *argv, "--out", str(a))[0] == 0
    assert run(capsys, *argv, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert not [p for p in os.listdir(tmp_path) if p not in ("a.csv", "b.csv")]


# --- sample -----------------------------------------------------------------


def sample(**kw):
    kw.setdefault("points", 50)
    return rows_of(cli.cmd_sample(cli.RunConfig(**kw)))


def test_sample_columns():
    rows = sample()
    assert list(rows[0]) == ["r[length]", "theta[rad]", "phi[rad]", "re_V[energy]", "im_V[energy]", "re_psi", "im_psi"]
    assert len(rows) == 50
    rows2 = sample(dim=2, variant="II", cut="phi")
    assert list(rows2[0])[:2] == ["r[length]", "phi[rad]"]


def test_sample_radial_rational_decay():
    conventional = asm.potential_3d(ext.PotentialSpec(**DEFAULTS), asm.VariantId("I", "I"))
    for m1 in (1, 2):
        rows = sample(m1=m1, points=200)
        r, th, ph, v = (np.array([float(x[k]) for x in rows]) for k in ("r[length]", "theta[rad]", "phi[rad]", "re_V[energy]"))
        rational = v - conventional(r, th, ph)
        far = r > 0.5 * r[-1]
        # r^2 U_rat creeps up to 4 m from below
        scaled = np.abs(rational[far]) * r[far] ** 2
        assert np.all(scaled <= 4 * m1 + 1e-9)
        assert abs(rational[-1]) < abs(rational[far][0])


def test_sample_pt1_theta_complex():
    rows = sample(variant="PT1:I", cut="theta", m2=1)
    im = np.array([float(x["im_V[energy]"]) for x in rows])
    assert np.max(np.abs(im)) > 1e-3


@pytest.mark.parametrize("variant,dim", [("I:I", 3), ("II:II", 3), ("I", 2), ("II", 2)])
def test_sample_real_forms_m0(variant, dim):
    for cut in ("radial", "phi"):
        rows = sample(variant=variant, dim=dim, cut=cut)
        assert all(float(x["im_V[energy]"]) == 0.0 for x in rows)


def test_sample_json(capsys):
    code, out, _ = run(capsys, "sample", "--format", "json", "--points", "5", "--cut", "phi")
    assert code == 0
    data = json.loads(out)
    assert len(data["rows"]) == 5 and data["config"]["cut"] == "phi"
    want = asm.energy(ext.PotentialSpec(**DEFAULTS), asm.VariantId("I", "I"), 0, 0, 0)
    assert data["E"] == pytest.approx(want, rel=1e-15)
    assert data["quantum_numbers"] == [0, 0, 0]


# --- config -----------------------------------------------------------------


def test_config_round_trip():
    cfg = cli.RunConfig(C=2.5, m2=1, variant="PT2:PT1", only=["chain", "x1"], tol=1e-9)
    again = cli.RunConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_config_rejects_unknown_and_invalid():
    with pytest.raises(cli.ConfigError):
        cli.RunConfig.from_dict({"omgea": 1.0})
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(dim=2, cut="theta")
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(tol=-1.0)


def test_config_file_with_flag_override(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"C": 4.0, "D": 2.0, "nmax": 0, "grid_n": 100, "format": "json"}))
    code, out, _ = run(capsys, "spectrum", "--config", str(path), "--D", "3.0")
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg["C"] == 4.0 and cfg["D"] == 3.0 and cfg["nmax"] == 0
    assert len(json.loads(out)["rows"]) == 1


def test_bad_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text("[1, 2]")
    assert run(capsys, "spectrum", "--config", str(path))[0] == 2
    assert run(capsys, "spectrum", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_number_format_round_trips():
    x = 0.1 + 0.2
    assert float(cli.fmt(x)) == x
    assert cli.fmt(3) == "3"


def test_write_atomic_replaces(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    cli.write_atomic(str(path), "new\n")
    assert path.read_text() == "new\n"
    assert os.listdir(tmp_path) == ["out.txt"]


# --- verify -----------------------------------------------------------------


def test_verify_subset(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--only", "x1,chain", "--format", "json", "--out", str(out_path))
    assert code == 0
    assert "x1" in out and "chain" in out
    report = json.loads(out_path.read_text())
    names = {r["suite"] for r in report["checks"]}
    assert names == {"x1", "chain"}
    assert all(r["passed"] for r in report["checks"])


def test_verify_variant_filter(capsys):
    code, out, _ = run(capsys, "verify", "--only", "reduction", "--variant", "theta:PT1", "--format", "json")
    assert code == 0
    report = json.loads(out[out.index("{"):])
    variants = {r["variant"] for r in report["checks"]}
    assert variants and all("PT1:" in v for v in variants)


def test_verify_zero_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--only", "chain,x1", "--tol", "0")
    assert code == 1
    assert "passed" in out


def test_console_entry_point_exit_codes():
    cmd = [sys.executable, "-m", "noncentral_eop.cli"]
    ok = subprocess.run(cmd + ["list", "--dim", "2"], capture_output=True, text=True)
    assert ok.returncode == 0 and len(ok.stdout.strip().splitlines()) == 5
    bad = subprocess.run(cmd + ["spectrum", "--omega", "0"], capture_output=True, text=True)
    assert bad.returncode == 2 and "omega" in bad.stderr


def test_verify_csv_report_parses(tmp_path, capsys):
    out_path = tmp_path / "report.csv"
    code, _, _ = run(capsys, "verify", "--only", "ypoly", "--out", str(out_path))
    assert code == 0
    rows = rows_of(out_path.read_text())
    assert rows and all(r["passed"] == "true" for r in rows)
    assert any("," in r["name"] for r in rows)
