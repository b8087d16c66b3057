"""``noncentral-eop {list|spectrum|sample|verify}``.

Exit codes: 0 success, 1 verification failure, 2 invalid config or spec.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import assembly as asm
from . import checks
from . import extensions as ext
from . import numverify as nv

SPEC_KEYS = ("omega", "delta", "C", "D", "G", "F", "p", "m1", "m2", "m3")
CUTS = ("radial", "theta", "phi")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    omega: float = 1.0
    delta: float = 1.0
    C: float = 1.0
    D: float = 1.25
    G: float = 3.0
    F: float = 1.0
    p: int = 1
    m1: int = 0
    m2: int = 0
    m3: int = 0
    dim: int = 3
    variant: str = "I:I"
    nmax: int = 2
    grid_n: int = 2000
    out: Optional[str] = None
    format: str = "csv"
    only: list = field(default_factory=list)
    seed: int = 0
    tol: Optional[float] = None
    cut: str = "radial"
    points: int = 400
    n1: int = 0
    n2: Optional[int] = None
    n3: Optional[int] = None

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigError("dim must be 2 or 3")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.cut not in CUTS or (self.dim == 2 and self.cut == "theta"):
            raise ConfigError(f"cut must be one of {CUTS} (no theta cut in 2D)")
        if self.nmax < 0 or self.grid_n < 32 or self.points < 2:
            raise ConfigError("need nmax >= 0, grid_n >= 32, points >= 2")
        if self.tol is not None and not self.tol >= 0:
            raise ConfigError("tol must be non-negative")
        self.variant_id()

    def variant_id(self):
        try:
            return asm.VariantId.parse(self.variant, self.dim)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def spec(self):
        v = self.variant_id()
        base = ext.PotentialSpec(**{k: getattr(self, k) for k in SPEC_KEYS})
        return asm.with_variant(base, v)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        data = dict(data)
        if data.get("only") is None:
            data["only"] = []
        elif isinstance(data["only"], str):
            data["only"] = [s for s in data["only"].split(",") if s]
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# output


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def _json_value(x):
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x if math.isfinite(x) else "null"
    return json.dumps(x)


def to_json_text(obj):
    """JSON with every float written to 17 significant digits."""
    return _json_value(obj) + "\n"


def to_csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows([fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(cfg, text):
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


def table_text(columns, rows, cfg, extra=None):
    if cfg.format == "json":
        payload = {"config": cfg.to_dict(), "columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows]}
        if extra:
            payload.update(extra)
        return to_json_text(payload)
    return to_csv_text(columns, rows)


# ---------------------------------------------------------------------------
# commands


def cmd_list(dim=None, reality=None, fmt_name="csv"):
    dims = (3, 2) if dim is None else (dim,)
    rows = []
    for d in dims:
        for v in asm.list_variants(d):
            if reality and v.reality != reality:
                continue
            rows.append((d, v.label, v.theta_form or "", v.phi_form, v.reality))
    cols = ("dim", "variant", "theta_form", "phi_form", "reality")
    if fmt_name == "json":
        return to_json_text({"variants": [dict(zip(cols, r)) for r in rows]})
    return to_csv_text(cols, rows)


def _rank(variant, spec, label, n2=0, n3=0, count=8):
    """Position of ``label`` in the real-part ordering of the sector's levels."""
    if variant.family != "eckart":
        return label
    model, _ = ext.sector_model(variant, spec, n2, n3)
    target = complex(model.eigenvalue(label))
    levels = ext.analytic_levels(variant, spec, count, n2, n3)
    dist = [abs(v - target) for v in levels]
    best = int(np.argmin(dist))
    return best if dist[best] <= 1e-12 * max(1.0, abs(target)) else None


class _Numeric:
    """Cached sector spectra for the spectrum table."""

    def __init__(self, spec, N):
        self.spec, self.N = spec, N
        self.cache = {}

    def level(self, variant, rank, n2=0, n3=0, k=4):
        if rank is None or rank >= 8:
            return complex("nan"), float("nan")
        k = min(8, max(k, rank + 1))
        key = (variant.sector, n2, n3, k)
        if key not in self.cache:
            self.cache[key] = nv.sector_spectrum(variant, self.spec, k, self.N, n2, n3)
        s = self.cache[key]
        return complex(s.eigenvalues[rank]), float(s.richardson_error[rank])


def _labels(variant, m, nmax):
    return ext.level_labels(variant, m, nmax + 1)


def cmd_spectrum(cfg):
    spec = cfg.spec()
    v = cfg.variant_id()
    for sv in _sector_variants(spec):
        model, _ = ext.sector_model(sv, spec)
        ext.check_admissible(model)
    num = _Numeric(spec, cfg.grid_n)
    complex_variant = v.reality == "pt_complex"
    rsv, psv = spec.radial_variant(), spec.phi_variant()
    tsv = spec.theta_variant() if spec.dimension == 3 else None
    n3s = _labels(psv, spec.m3, cfg.nmax)
    n2s = _labels(tsv, spec.m2, cfg.nmax) if tsv else [0]
    k = cfg.nmax + 1
    rows = []
    for n1 in range(cfg.nmax + 1):
        for n2 in n2s:
            for n3 in n3s:
                ch = ext.chain(spec, n2, n3)
                E = ext.eigen_E(n1, spec.omega, ch.delta_t)
                msq_n, msq_e = num.level(psv, _rank(psv, spec, n3), k=k)
                if tsv:
                    ell_n, ell_e = num.level(tsv, _rank(tsv, spec, n2, n3=n3), n3=n3, k=k)
                else:
                    ell_n, ell_e = complex("nan"), float("nan")
                E_n, E_e = num.level(rsv, n1, n2, n3, k=k)
                row = [n1, n2 if tsv else None, n3, spec.m1, spec.m2, spec.m3, ch.msq, ch.ellsq, E,
                       msq_n.real, msq_e, ell_n.real, ell_e, E_n.real, E_e]
                if complex_variant:
                    row += [msq_n.imag, ell_n.imag, E_n.imag]
                rows.append(row)
    cols = ["n1", "n2", "n3", "m1", "m2", "m3", "msq", "ellsq", "E[energy]",
            "msq_numeric", "msq_err", "ellsq_numeric", "ellsq_err", "E_numeric[energy]", "E_err[energy]"]
    if complex_variant:
        cols += ["msq_numeric_im", "ellsq_numeric_im", "E_numeric_im[energy]"]
    if spec.dimension == 2:
        keep = [i for i, c in enumerate(cols) if not c.startswith(("n2", "m2", "ellsq"))]
        cols = [cols[i] for i in keep]
        rows = [[r[i] for i in keep] for r in rows]
    return table_text(cols, rows, cfg)


def _sector_variants(spec):
    out = [spec.phi_variant()]
    if spec.dimension == 3:
        out.append(spec.theta_variant())
    return out + [spec.radial_variant()]


def _open_samples(lo, hi, points, inset=1e-3):
    pad = inset * (hi - lo)
    return np.linspace(lo + pad, hi - pad, points)


def cmd_sample(cfg):
    spec = cfg.spec()
    v = cfg.variant_id()
    # unspecified labels default to the lowest valid one of their sector
    n3 = _labels(spec.phi_variant(), spec.m3, 0)[0] if cfg.n3 is None else cfg.n3
    if spec.dimension == 3:
        n2 = _labels(spec.theta_variant(), spec.m2, 0)[0] if cfg.n2 is None else cfg.n2
        sol = asm.solve_3d(spec, v, cfg.n1, n2, n3)
        V = asm.potential_3d(spec, v, n2, n3)
    else:
        sol = asm.solve_2d(spec, v, cfg.n1, n3)
        V = asm.potential_2d(spec, v, n3)
    th_lo, th_hi = spec.theta_variant().domain(spec.p) if spec.dimension == 3 else (0.0, np.pi)
    ph_lo, ph_hi = spec.phi_variant().domain(spec.p)
    r = np.full(cfg.points, 1.0)
    th = np.full(cfg.points, (th_lo + th_hi) / 2)
    ph = np.full(cfg.points, (ph_lo + ph_hi) / 2)
    if cfg.cut == "radial":
        r = np.linspace(0.05, sol.sectors["radial"].support()[1] / 3, cfg.points)
    elif cfg.cut == "theta":
        th = _open_samples(th_lo, th_hi, cfg.points)
    else:
        ph = _open_samples(ph_lo, ph_hi, cfg.points)
    if spec.dimension == 3:
        vals, psi = V(r, th, ph), sol.psi(r, th, ph)
        coords, cols = [r, th, ph], ["r[length]", "theta[rad]", "phi[rad]"]
    else:
        vals, psi = V(r, ph), sol.psi(r, ph)
        coords, cols = [r, ph], ["r[length]", "phi[rad]"]
    vals = np.asarray(vals, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    cols += ["re_V[energy]", "im_V[energy]", "re_psi", "im_psi"]
    data = np.column_stack(coords + [vals.real, vals.imag, psi.real, psi.imag])
    rows = [[float(x) for x in row] for row in data]
    extra = {"E": sol.E, "quantum_numbers": list(sol.quantum_numbers)}
    return table_text(cols, rows, cfg, extra)


def cmd_verify(cfg, variant_filter=None, base=None, workers=None):
    results = checks.run_suites(
        only=cfg.only or None,
        variant=variant_filter,
        tol=cfg.tol,
        seed=cfg.seed,
        base=base,
        N=cfg.grid_n,
        workers=workers,
    )
    return results


def verify_summary(results):
    lines = []
    suites = []
    for r in results:
        if r.suite not in suites:
            suites.append(r.suite)
    for s in suites:
        rs = [r for r in results if r.suite == s]
        npass = sum(r.passed for r in rs)
        worst = max((r.measured for r in rs if math.isfinite(r.measured)), default=float("nan"))
        lines.append(f"{s:14s} {npass:4d}/{len(rs):<4d} passed  max measured {worst:.3g}  tol {rs[0].tolerance:.3g}")
    for r in results:
        if not r.passed:
            where = f"[{r.variant}] " if r.variant else ""
            lines.append(f"FAIL {r.suite}: {where}{r.name}: measured {r.measured:.3g} tol {r.tolerance:.3g} {r.detail}".rstrip())
    total = sum(r.passed for r in results)
    lines.append(f"{total}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"


def verify_report_text(cfg, results):
    if cfg.format == "json":
        payload = {
            "config": cfg.to_dict(),
            "passed": all(r.passed for r in results),
            "checks": [r.to_dict() for r in results],
        }
        return to_json_text(payload)
    cols = ["suite", "variant", "name", "measured", "tolerance", "passed", "runtime[s]", "detail"]
    rows = [[r.suite, r.variant or "", r.name, r.measured, r.tolerance, r.passed, r.runtime, r.detail] for r in results]
    return to_csv_text(cols, rows)


# ---------------------------------------------------------------------------
# argument handling


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat JSON config; flags override its values")
    common.add_argument("--dim", type=int, choices=(2, 3))
    common.add_argument("--variant", metavar="THETA:PHI", help="3D THETA:PHI, 2D PHI (verify also accepts theta:FORM / phi:FORM)")
    for name in ("m1", "m2", "m3", "p", "nmax", "seed", "n1", "n2", "n3", "points"):
        common.add_argument(f"--{name}", type=int)
    for name in ("omega", "delta", "C", "D", "G", "F", "tol"):
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--N", dest="grid_n", type=int, help="interior grid points of the coarse grid")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--only", action="append", metavar="CHECK", help="restrict verify to these suites (repeat or comma-separate)")
    common.add_argument("--cut", choices=CUTS)

    parser = argparse.ArgumentParser(prog="noncentral-eop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    lp = sub.add_parser("list", parents=[common], help="enumerate the registered variants")
    lp.add_argument("--reality", choices=("real", "pt_complex"))
    sub.add_parser("spectrum", parents=[common], help="closed-form and numeric levels per (n1, n2, n3)")
    sub.add_parser("sample", parents=[common], help="potential and wavefunction along a coordinate cut")
    sub.add_parser("verify", parents=[common], help="run the verification suites")
    return parser


def resolve_config(args):
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat JSON object")
    names = {f.name for f in fields(RunConfig)}
    for name in names:
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    if isinstance(data.get("only"), list):
        data["only"] = [s for item in data["only"] for s in str(item).split(",") if s]
    raw = dict(data)
    dim = int(data.get("dim", 3))
    variant = data.get("variant")
    if args.command == "verify":
        raw["_filter"] = variant
        if variant is not None and (_is_filter(variant) or dim == 3 and ":" not in str(variant)):
            data.pop("variant")
    if data.get("variant") is None:
        data["variant"] = "I:I" if dim == 3 else "I"
    return RunConfig.from_dict(data), raw


def _is_filter(text):
    low = str(text).lower()
    return low.startswith(("theta:", "phi:", "2d:", "3d:"))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            fmt_name = args.format or "csv"
            text = cmd_list(args.dim, args.reality, fmt_name)
            if args.out:
                write_atomic(args.out, text)
            else:
                sys.stdout.write(text)
            return 0
        cfg, raw = resolve_config(args)
        if args.command == "spectrum":
            emit(cfg, cmd_spectrum(cfg))
            return 0
        if args.command == "sample":
            emit(cfg, cmd_sample(cfg))
            return 0
        spec_given = any(k in raw for k in SPEC_KEYS)
        base = ext.PotentialSpec(**{k: getattr(cfg, k) for k in SPEC_KEYS}) if spec_given else None
        results = cmd_verify(cfg, _verify_filter(raw.get("_filter"), raw.get("dim")), base)
    except (ConfigError, ext.AdmissibilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(verify_summary(results))
    if cfg.out:
        write_atomic(cfg.out, verify_report_text(cfg, results))
    elif cfg.format == "json":
        sys.stdout.write(verify_report_text(cfg, results))
    return 0 if results and all(r.passed for r in results) else 1


def _verify_filter(text, dim):
    """Variant filter for verify; ``dim`` is only applied when given explicitly."""
    if text is None:
        return f"{dim}d" if dim else None
    if _is_filter(text) or not dim:
        return text
    return f"{dim}d:{text}"


if __name__ == "__main__":
    sys.exit(main())
