#!/usr/bin/env python3
"""Benchmark the compiled (numba) kernels against the pure-Python fallback.

Runs the same workload twice in subprocesses, once per kernel path, and
reports wall times and the speedup.  The workload is a short quantum
collision scan plus a classical trajectory, sized so the fallback finishes
in minutes.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = """
import json
import time
from rotcool._kernels import numba_enabled
from rotcool.params import lookup
from rotcool.rotor import CollisionOptions, propagate_collision
from rotcool.trajectory import propagate_trajectory
from rotcool.units import ev_to_hartree

s = lookup("H2+")
E = ev_to_hartree(1.5)
opts = CollisionOptions(J_max=8, auto_escalate=False)

# warm-up triggers compilation on the numba path
propagate_collision(s, E, 20.0, opts)
propagate_trajectory(E, 20.0, s.mu, n_samples=201)

t0 = time.perf_counter()
exc = [propagate_collision(s, E, b, opts).excitation
       for b in (0.0, 5.0, 10.0, 20.0, 40.0)]
t_quantum = time.perf_counter() - t0

t0 = time.perf_counter()
for b in (0.0, 5.0, 10.0, 20.0, 40.0):
    propagate_trajectory(E, b, s.mu, n_samples=2001)
t_classical = time.perf_counter() - t0

print(json.dumps({"numba": numba_enabled(), "t_quantum": t_quantum,
                  "t_classical": t_classical, "checksum": sum(exc)}))
"""


def run_once(no_numba):
    env = dict(os.environ)
    env["ROTCOOL_NO_NUMBA"] = "1" if no_numba else ""
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1,
                    help="repetitions per path; best time is reported")
    args = ap.parse_args()

    results = {}
    for label, flag in (("numba", False), ("fallback", True)):
        best = None
        for _ in range(args.repeat):
            r = run_once(flag)
            if best is None or r["t_quantum"] < best["t_quantum"]:
                best = r
        results[label] = best
        print(f"{label:9s} quantum {best['t_quantum']:8.3f} s   "
              f"classical {best['t_classical']:8.3f} s   "
              f"(numba_enabled={best['numba']})")

    if results["numba"]["numba"]:
        for key in ("t_quantum", "t_classical"):
            ratio = results["fallback"][key] / results["numba"][key]
            print(f"speedup {key[2:]:9s} {ratio:6.1f}x")
        drift = abs(results["fallback"]["checksum"]
                    - results["numba"]["checksum"])
        print(f"checksum difference {drift:.3e}")
    else:
        print("numba not active in the first run; no speedup to report")


if __name__ == "__main__":
    main()
