"""Time the numba and numpy schedule kernels on random feasible schedules.

    python benchmarks/bench_kernels.py [--sizes 10x20,100x100,...] [--repeat 5]

Schedules are built by random non-colliding walks on a grid, so the
feasibility scan runs to the end instead of stopping at an early
violation. The first numba call in a fresh process also pays for loading
(or compiling) machine code; that cost is reported separately.
"""

import argparse
import random
import statistics
import time

import numpy as np

from mapfma import _kernels
from mapfma.instances import grid_graph


def random_walks(side, n_agents, turns, seed):
    g = grid_graph(side, side)
    rng = random.Random(seed)
    cur = rng.sample(range(g.n), n_agents)
    rows = [cur[:]]
    for _ in range(turns):
        taken = set(cur)
        nxt = cur[:]
        for a in rng.sample(range(n_agents), n_agents):
            options = [v for v in g.adjacency[cur[a]] if v not in taken]
            if options and rng.random() < 0.7:
                # only move into vertices that were empty, which rules out swaps
                v = rng.choice(options)
                taken.add(v)
                nxt[a] = v
        cur = nxt
        rows.append(cur[:])
    pos = np.array(rows, dtype=np.int64).T.copy()
    return g, pos


def timed(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="4x10,20x50,100x100,300x300,1000x500")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    t0 = time.perf_counter()
    nk = _kernels._numba()
    g, pos = random_walks(4, 2, 3, 0)
    ip, ix = g.csr()
    nk._scan_numba(pos, pos[:, 0].copy(), pos[:, -1].copy(), ip, ix, g.n)
    nk._spells_numba(pos, g.n)
    print(f"numba import + first call: {time.perf_counter() - t0:.3f} s")
    print(f"{'agents x turns':>15} {'cells':>9} {'scan numpy':>11} {'scan numba':>11} {'spells numpy':>13} {'spells numba':>13}")
    for size in args.sizes.split(","):
        n_agents, turns = (int(x) for x in size.split("x"))
        side = max(4, int(np.ceil(np.sqrt(n_agents * 3))))
        g, pos = random_walks(side, n_agents, turns, 1)
        ip, ix = g.csr()
        src, tgt = pos[:, 0].copy(), pos[:, -1].copy()
        row = []
        for use in (False, True):
            res = _kernels.feasibility_scan(pos, src, tgt, ip, ix, g.n, use_numba=use)
            assert res[0] == _kernels.OK, res
            row.append(timed(lambda: _kernels.feasibility_scan(pos, src, tgt, ip, ix, g.n, use_numba=use), args.repeat))
        for use in (False, True):
            row.append(timed(lambda: _kernels.spell_counts(pos, g.n, use_numba=use), args.repeat))
        print(f"{size:>15} {pos.size:>9} " + " ".join(f"{x * 1e3:>10.2f}ms" for x in row[:2]) + " " + " ".join(f"{x * 1e3:>12.2f}ms" for x in row[2:]))


if __name__ == "__main__":
    main()
