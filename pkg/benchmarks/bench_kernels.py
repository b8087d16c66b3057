"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the switch
(``NONCENTRAL_EOP_JIT``) is read at import time. Timings are the best of
``--repeat`` runs after one warm-up call (which absorbs JIT compilation).

    python benchmarks/bench_kernels.py [--repeat 5] [--N 2000] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    out = fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def worker(repeat, N):
    from noncentral_eop import _jit, kernels
    from noncentral_eop import numverify as nv

    rng = np.random.default_rng(7)
    z = rng.uniform(-1, 1, 200_000)
    x = rng.uniform(0, 20, 200_000)
    zc = 1j * rng.uniform(-3, 3, 50_000)
    grid = nv.Grid1D(1e-3, 12.0, N)
    H = nv.build_hamiltonian(lambda r: r**2 / 4 + 2.0 / r**2, grid)
    small = nv.Grid1D(0.05, np.pi - 0.05, max(32, N // 8))
    Hc = nv.build_hamiltonian(lambda t: (6 - 0.25) / np.sin(t) ** 2 + 3j * np.cos(t) / np.sin(t), small)

    cases = {
        "jacobi P_6 (200k real pts)": lambda: kernels.jacobi_array(6, 1.5, -0.5, z),
        "jacobi P_5 (50k complex pts)": lambda: kernels.jacobi_array(5, 0.5 + 1j, 0.5 - 1j, zc),
        "laguerre L_6 (200k pts)": lambda: kernels.laguerre_array(6, 2.5, x),
        f"lowest 4 eigenvalues, real N={N}": lambda: nv._lowest(H, 4)[0],
        f"complex tridiagonal QL N={small.N}": lambda: np.sort_complex(kernels.tridiag_eigvals(Hc.diag, Hc.off)[0])[:4],
    }
    report = {"backend": _jit.backend(), "cases": {}}
    for name, fn in cases.items():
        best, out = _best(fn, repeat)
        out = np.asarray(out)
        report["cases"][name] = {"seconds": best, "sample": [[float(v.real), float(v.imag)] for v in np.ravel(out)[:4]]}
    print(json.dumps(report))


def run_backend(flag, repeat, N):
    env = dict(os.environ, NONCENTRAL_EOP_JIT=flag)
    cmd = [sys.executable, __file__, "--worker", "--repeat", str(repeat), "--N", str(N)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--json", metavar="PATH")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        worker(args.repeat, args.N)
        return 0

    jit, ref = run_backend("1", args.repeat, args.N), run_backend("0", args.repeat, args.N)
    if jit["backend"] != "numba":
        print("numba is not importable; both runs used numpy")
    print(f"{'case':40s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max rel diff':>13s}")
    rows = []
    for name, a in jit["cases"].items():
        b = ref["cases"][name]
        sa = np.array([complex(*v) for v in a["sample"]])
        sb = np.array([complex(*v) for v in b["sample"]])
        diff = float(np.max(np.abs(sa - sb) / np.maximum(np.abs(sb), 1e-300)))
        speed = b["seconds"] / a["seconds"]
        rows.append({"case": name, "numba_s": a["seconds"], "numpy_s": b["seconds"], "speedup": speed, "max_rel_diff": diff})
        print(f"{name:40s} {1e3 * a['seconds']:11.3f} {1e3 * b['seconds']:11.3f} {speed:8.1f} {diff:13.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"N": args.N, "repeat": args.repeat, "rows": rows}, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
