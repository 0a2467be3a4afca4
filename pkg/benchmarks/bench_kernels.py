"""Timing comparison of the numpy and numba kernel backends.

Runs the state evaluation and the adaptive advance loop on a family of
subdivided octahedra and prints one table row per (size, kernel) pair.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 5] [--levels 4] [--steps 200]
"""

import argparse
import math
import time

import numpy as np

import calabiflow as cf
from calabiflow import _kernels


def subdivide(t: cf.Triangulation) -> cf.Triangulation:
    """Midpoint refinement: one new vertex per edge, 4 faces per face."""
    mid = {tuple(e): t.n_vertices + k for k, e in enumerate(t.edges)}

    def m(a, b):
        return mid[(a, b) if a < b else (b, a)]

    faces = []
    for a, b, c in t.faces:
        ab, bc, ca = m(a, b), m(b, c), m(c, a)
        faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return cf.Triangulation(t.n_vertices + t.n_edges, faces)


def arrays(t, rng):
    r = rng.uniform(0.5, 2.0, t.n_vertices)
    cphi = np.cos(rng.uniform(0.0, math.pi / 2, t.n_edges))
    return r, t.faces, t.face_edges, t.edges[:, 0], t.edges[:, 1], cphi


def time_call(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_state(impl, args_state, repeats):
    return time_call(lambda: impl["state"](*args_state), repeats)


def bench_advance(impl, t, r, fv, fe, ea, eb, cphi, steps, repeats):
    target = np.full(t.n_vertices, 2.0 * math.pi * t.chi / t.n_vertices)
    u0 = np.log(r)
    _, _, _, K, B, kn, err = impl["state"](np.exp(u0), fv, fe, ea, eb, cphi)
    assert err == _kernels.ERR_OK
    energy = float(np.sum((K - target) ** 2))

    def run():
        impl["advance"](
            u0.copy(), 1e-2, 0.0, 0, steps,
            fv, fe, ea, eb, cphi, target, True,
            u0.copy(), 1e-10, 50.0, 1e12, 60, 1.2, 10, 4,
            K.copy(), B.copy(), kn.copy(), energy,
        )

    return time_call(run, repeats)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--levels", type=int, default=4,
                    help="number of octahedron subdivisions (max mesh size)")
    ap.add_argument("--steps", type=int, default=200,
                    help="accepted steps per advance call")
    opts = ap.parse_args()

    backends = list(_kernels.IMPLS)
    print(f"backends: {', '.join(backends)} (active: {cf.active_backend()})")
    if "numba" not in backends:
        print("note: numba unavailable, timing the numpy path only")

    meshes = [cf.parse_mesh(cf.mesh_text("octahedron"))]
    for _ in range(opts.levels):
        meshes.append(subdivide(meshes[-1]))

    rng = np.random.default_rng(0)
    header = f"{'N':>6} {'kernel':<10}" + "".join(f" {b + ' (ms)':>12}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)
    for t in meshes:
        r, fv, fe, ea, eb, cphi = arrays(t, rng)
        args_state = (r, fv, fe, ea, eb, cphi)
        for kernel in ("state", "advance"):
            times = []
            for name in backends:
                impl = _kernels.IMPLS[name]
                if kernel == "state":
                    impl["state"](*args_state)  # warm-up / JIT compile
                    times.append(bench_state(impl, args_state, opts.repeats))
                else:
                    times.append(
                        bench_advance(
                            impl, t, r, fv, fe, ea, eb, cphi, opts.steps, opts.repeats
                        )
                    )
            row = f"{t.n_vertices:>6} {kernel:<10}" + "".join(
                f" {1e3 * v:>12.3f}" for v in times
            )
            if len(times) == 2:
                row += f" {times[0] / times[1]:>8.1f}x"
            print(row)


if __name__ == "__main__":
    main()
