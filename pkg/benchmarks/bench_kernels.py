"""Throughput comparison of the stepping-kernel lanes.

Runs the same planar front problem through the pure-numpy kernel and,
when built, the compiled extension, and reports steps per second plus
the max deviation between the final states (they should agree to near
machine precision).

    python3 benchmarks/bench_kernels.py [--nv 48] [--nx 8001] [--steps 200]
"""

import argparse
import time

import numpy as np

from kinfront.models import preset
from kinfront.sim import SimConfig, initial_front_state
from kinfront.sim.kernels import available_backends, get_backend


def run_lane(backend, state0, n_steps, dt):
    g = state0.g.copy()
    g1 = np.empty_like(g)
    rho = np.empty(g.shape[1])
    rho1 = np.empty(g.shape[1])
    nu_half = state0.v_nodes * (0.5 * dt / state0.dx)
    kern = get_backend(backend)
    t0 = time.perf_counter()
    for _ in range(n_steps):
        kern.strang_step(g, g1, rho, rho1, nu_half, state0.v_weights, state0.r, dt, 1.0, 0.0)
    elapsed = time.perf_counter() - t0
    return g, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nv", type=int, default=48)
    ap.add_argument("--nx", type=int, default=8001)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--model", default="uniform-1d")
    ap.add_argument("--r", type=float, default=1.0)
    args = ap.parse_args()

    model = preset(args.model)
    config = SimConfig(dx=40.0 / (args.nx - 1), length=40.0, nv=args.nv)
    state = initial_front_state(model, args.r, config=config)
    vmax = float(np.max(np.abs(state.v_nodes)))
    dt = config.cfl * config.dx / vmax

    lanes = available_backends()
    print("problem: nv=%d nx=%d steps=%d model=%s" % (state.g.shape[0], state.g.shape[1], args.steps, args.model))
    results = {}
    for lane in lanes:
        g, elapsed = run_lane(lane, state, args.steps, dt)
        results[lane] = g
        print("%-8s %8.1f steps/s  (%.3f s total)" % (lane, args.steps / elapsed, elapsed))
    if len(results) == 2:
        dev = float(np.max(np.abs(results["cython"] - results["python"])))
        print("max |cython - python| after %d steps: %.3e" % (args.steps, dev))
    else:
        print("compiled lane not built; benchmarked the numpy lane only")


if __name__ == "__main__":
    main()
