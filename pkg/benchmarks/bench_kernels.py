"""Compare the compiled cone kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 200] [--blocks 40] [--solves 20]

Part one times each kernel on a point with ``--blocks`` second-order cone
blocks of mixed size (plus an orthant part).  Part two solves the same
MM-style power-minimization SOCPs end to end under each backend and checks
that both give the same objectives.
"""
import argparse
import sys
import timeit

import numpy as np

from nomacast.channel import preset_geometry, sample_channels
from nomacast.cones import kernels
from nomacast.powermin import PowerMinSpec, _noma_problem


def cone_point(rng, l, sizes):
    qd = np.asarray(sizes, dtype=np.int_)
    qs = (l + np.concatenate([[0], np.cumsum(qd)[:-1]])).astype(np.int_)
    m = l + int(qd.sum())

    def interior():
        x = rng.standard_normal(m)
        x[:l] = np.abs(x[:l]) + 0.1
        for a, d in zip(qs, qd):
            x[a] = np.linalg.norm(x[a + 1:a + d]) + 0.5
        return x

    return interior(), interior(), l, qs, qd


def time_kernels(repeat, blocks, seed=0):
    rng = np.random.default_rng(seed)
    s, z, l, qs, qd = cone_point(rng, 20, rng.integers(3, 12, size=blocks))
    dx = rng.standard_normal(s.size)
    G = rng.standard_normal((s.size, 30))
    rows = []
    for name in kernels.available_backends():
        kernels.use_backend(name)
        d, beta, v, lam = kernels.nt_scaling(s, z, l, qs, qd)
        cases = {
            "min_eig": lambda: kernels.min_eig(s, l, qs, qd),
            "soc_jnorms": lambda: kernels.soc_jnorms(s, l, qs, qd),
            "nt_scaling": lambda: kernels.nt_scaling(s, z, l, qs, qd),
            "apply_w": lambda: kernels.apply_w(dx, d, beta, v, l, qs, qd, False),
            "apply_w_mat": lambda: kernels.apply_w_mat(G, d, beta, v, l, qs, qd, True),
            "jprod": lambda: kernels.jprod(s, z, l, qs, qd),
            "jdiv": lambda: kernels.jdiv(lam, dx, l, qs, qd),
            "max_step": lambda: kernels.max_step(lam, dx, l, qs, qd),
        }
        for kname, fn in cases.items():
            t = min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat
            rows.append((kname, name, t))
    return rows


def solver_programs(count, seed=0):
    geo = preset_geometry("A", antennas=8, users=3)
    progs = []
    for k in range(count):
        rz = sample_channels(geo, seed + k)
        prob = _noma_problem(PowerMinSpec.from_rates(rz, 2.0))
        status, W, _ = prob.initial()
        if status == "ok":
            progs.append(prob._program(prob.rows(W)))
    return progs


def time_solver(progs):
    from nomacast import cones
    out = {}
    for name in kernels.available_backends():
        kernels.use_backend(name)
        objs = []
        t0 = timeit.default_timer()
        for p in progs:
            objs.append(cones.solve(p).pcost)
        out[name] = (timeit.default_timer() - t0, np.array(objs))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--blocks", type=int, default=40)
    ap.add_argument("--solves", type=int, default=20)
    args = ap.parse_args(argv)
    original = kernels.BACKEND
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")

    rows = time_kernels(args.repeat, args.blocks)
    by = {(k, b): t for k, b, t in rows}
    print(f"\n{'kernel':12s} " + " ".join(f"{b:>12s}" for b in backends)
          + ("     speedup" if len(backends) > 1 else ""))
    for k in dict.fromkeys(k for k, _, _ in rows):
        line = f"{k:12s} " + " ".join(f"{by[k, b] * 1e6:10.2f}us" for b in backends)
        if len(backends) > 1:
            line += f" {by[k, 'python'] / by[k, 'cython']:10.2f}x"
        print(line)

    progs = solver_programs(args.solves)
    res = time_solver(progs)
    print(f"\nend-to-end: {len(progs)} SOCP solves")
    for b, (t, _) in res.items():
        print(f"  {b:8s} {t:8.3f} s")
    if len(res) > 1:
        a, b = (res[n][1] for n in backends[:2])
        diff = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))
        print(f"  max relative objective difference {diff:.2e}")
    kernels.use_backend(original)
    return 0


if __name__ == "__main__":
    sys.exit(main())
