"""Compare the compiled and numpy kernels on coupled-model operator applications.

Usage::

    python3 benchmarks/bench_apply.py [--repeat 20] [--box 50] [--json out.json]

For each case the operator is built once, then applied ``--repeat`` times with
each backend.  The script also checks that both backends give the same vector.
"""

import argparse
import json
import time

import numpy as np

from cavityed import model as M
from cavityed.experiments import COARSE
from cavityed.linop import backend


def cases(box):
    yield "shin_metiu length (real)", M.shin_metiu_model(electron_box=box, **COARSE)
    yield "shin_metiu coulomb (complex)", M.shin_metiu_model(electron_box=box, gauge="coulomb", **COARSE)
    yield "rydberg length (real)", M.screened_hydrogen_model(box=200)
    yield "rydberg coulomb (complex)", M.screened_hydrogen_model(box=200, gauge="coulomb")


def time_matvec(spec, vec, repeat):
    out = np.empty(spec.size, dtype=spec.dtype)
    spec.matvec(vec, out=out)  # warm-up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        spec.matvec(vec, out=out)
        best = min(best, time.perf_counter() - t0)
    return best, out.copy()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--box", type=float, default=50.0, help="Shin-Metiu electron box in angstrom")
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args()

    names = backend.available()
    if "cython" not in names:
        print("compiled kernels not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    results = []
    print(f"{'case':32s} {'size':>9s} " + " ".join(f"{n + ' ms':>11s}" for n in names) + "  speedup")
    for label, model in cases(args.box):
        spec = M.build_hamiltonian(model)
        vec = rng.standard_normal(spec.size).astype(spec.dtype)
        times, outs = {}, {}
        for name in names:
            backend.set_backend(name)
            times[name], outs[name] = time_matvec(spec, vec, args.repeat)
        backend.set_backend(None)
        diff = max(float(np.max(np.abs(outs[n] - outs[names[-1]]))) for n in names)
        speed = times["numpy"] / times["cython"] if "cython" in times else 1.0
        print(f"{label:32s} {spec.size:9d} " + " ".join(f"{1e3 * times[n]:11.2f}" for n in names)
              + f"  {speed:6.2f}x  (max diff {diff:.1e})")
        results.append({"case": label, "size": spec.size, "seconds": times, "speedup": speed, "max_diff": diff})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
