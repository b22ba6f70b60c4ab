#!/usr/bin/env python3
"""Compare the plain and cache-assisted membership drivers head to head.

Draws random dense instances, half with the target planted inside the image
set and half pushed outside, runs both drivers on each, and tabulates
iterations and eigen-oracle engagements.  The cache driver trades weaker
steps for cheaper ones; this script measures how that trade lands at a given
size and tolerance.
"""

import argparse
import time
from dataclasses import dataclass

import numpy as np

from spectrahull import (
    FEASIBLE,
    ShmInstance,
    SpectraplexPoint,
    image,
    solve_shm,
    solve_shm_cached,
)


@dataclass
class BenchConfig:
    cases: int = 40
    n: int = 8
    m: int = 6
    epsilon: float = 1e-4
    seed: int = 0


def random_instance(rng, cfg, inside):
    mats = []
    for _ in range(cfg.m):
        g = rng.uniform(-1.0, 1.0, size=(cfg.n, cfg.n))
        mats.append(np.triu(g) + np.triu(g, 1).T)
    shell = ShmInstance(tuple(mats), np.zeros(cfg.m))
    terms = int(rng.integers(1, cfg.n + 1))
    v = rng.standard_normal((terms, cfg.n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    b = image(shell, SpectraplexPoint(rng.dirichlet(np.ones(terms)), v))
    if not inside:
        d = rng.standard_normal(cfg.m)
        b = b + shell.radius_bound * rng.uniform(0.3, 1.0) * d / np.linalg.norm(d)
    return ShmInstance(tuple(mats), b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, default=40)
    ap.add_argument("--n", type=int, default=8, help="matrix order")
    ap.add_argument("--m", type=int, default=6, help="constraint count")
    ap.add_argument("--epsilon", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    cfg = BenchConfig(a.cases, a.n, a.m, a.epsilon, a.seed)

    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(cfg.cases):
        inst = random_instance(rng, cfg, inside=(i % 2 == 0))
        t0 = time.perf_counter()
        plain = solve_shm(inst, cfg.epsilon)
        t_plain = time.perf_counter() - t0
        t0 = time.perf_counter()
        cached = solve_shm_cached(inst, cfg.epsilon)
        t_cached = time.perf_counter() - t0
        rows.append((i, plain, cached, t_plain, t_cached))

    print(
        f"{'case':>4} {'verdict':>9} {'it(plain)':>9} {'it(cache)':>9}"
        f" {'eig(plain)':>10} {'eig(cache)':>10} {'s(plain)':>9} {'s(cache)':>9}"
    )
    disagreements = 0
    for i, plain, cached, tp, tc in rows:
        if plain.kind != cached.kind:
            disagreements += 1
        print(
            f"{i:4d} {plain.kind:>9} {plain.iterations:9d} {cached.iterations:9d}"
            f" {plain.oracle_calls:10d} {cached.oracle_calls:10d} {tp:9.3f} {tc:9.3f}"
        )

    feas = [r for r in rows if r[1].kind == FEASIBLE]
    total = lambda k: sum(getattr(r[k], "oracle_calls") for r in rows)
    print(f"\nverdict disagreements: {disagreements}")
    print(f"feasible cases: {len(feas)} of {len(rows)}")
    print(f"total eigen engagements: plain {total(1)}, cached {total(2)}")
    print(
        "total wall seconds: plain "
        f"{sum(r[3] for r in rows):.2f}, cached {sum(r[4] for r in rows):.2f}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
