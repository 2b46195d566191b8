"""Compare the numba and numpy subset-enumeration kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each case is run through both paths; results must agree exactly.
"""
import argparse
import time

import numpy as np

from design_gradcode import _kernels, code_from_design, placement_graph, projective_geometry
from design_gradcode.gradcode import custom_code


def _best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def neighborhood_cases():
    for q, eta in ((3, 4), (5, 3), (5, 4), (7, 4)):
        code = code_from_design(projective_geometry(2, q))
        yield f"min_neighborhood PG(2,{q}) eta={eta}", _kernels.pack_rows(code.E != 0), eta


def expansion_cases():
    fano = placement_graph(code_from_design(projective_geometry(2, 2)))
    rng = np.random.default_rng(0)
    yield "min_expansion Fano (14 vertices)", fano, 14
    for n in (16, 20):
        E = (rng.random((n // 2, n // 2)) < 0.4).astype(np.int64)
        np.fill_diagonal(E, 1)
        yield f"min_expansion random bipartite ({n} vertices)", placement_graph(custom_code(E)), n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    # compile once so the timings exclude JIT
    _kernels.min_neighborhood_numba(_kernels.pack_rows(np.eye(3, dtype=bool)), 2)
    _kernels.min_expansion_numba(np.array([0]), np.array([1]), 2)

    print(f"{'case':48s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}")
    for name, masks, eta in neighborhood_cases():
        t_np, r_np = _best_time(lambda: _kernels.min_neighborhood_numpy(masks, eta), args.repeat)
        t_nb, r_nb = _best_time(lambda: _kernels.min_neighborhood_numba(masks, eta), args.repeat)
        assert r_np == r_nb, (name, r_np, r_nb)
        print(f"{name:48s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}x")
    for name, graph, n in expansion_cases():
        eu = np.array([j for j, _ in graph.edges], dtype=np.int64)
        ev = np.array([graph.n_workers + i for _, i in graph.edges], dtype=np.int64)
        t_np, r_np = _best_time(lambda: _kernels.min_expansion_numpy(eu, ev, n), args.repeat)
        t_nb, r_nb = _best_time(lambda: _kernels.min_expansion_numba(eu, ev, n), args.repeat)
        assert r_np == r_nb, (name, r_np, r_nb)
        print(f"{name:48s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
