"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json]
"""

import argparse
import logging
import json
import time

import numpy as np

from contextacert import canonical, exgraph, experiment
from contextacert.kernels import available_backends


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    for n in (12, 24, 48):
        a = rng.standard_normal((n, n))
        a = a + a.T
        yield f"jacobi_eigh n={n}", "jacobi_eigh", (a, 1e-15, 60)

    for n, p in ((30, 0.3), (40, 0.2), (40, 0.1)):
        edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < p]
        g = exgraph.from_edge_list(n, edges)
        masks = g.neighbor_masks()
        yield f"max_independent_set G({n},{p})", "max_independent_set", (masks, n)

    for n in (7, 11, 15):
        ref = experiment.QuantumRealization.from_ensemble(canonical.antihole_vectors(n))
        vecs = ref.projectors + 0.02 * rng.standard_normal(ref.projectors.shape)
        vecs /= np.linalg.norm(vecs, axis=1)[:, None]
        pairs = np.array([(i - 1, j - 1) for i, j in ref.graph.edges], dtype=np.int64)
        yield f"orthogonalize_pairs ~C{n}", "orthogonalize_pairs", (vecs, pairs, 1e-12, 100)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    logging.getLogger("contextacert").setLevel(logging.ERROR)

    backends = available_backends()
    rows = []
    for label, name, call_args in _cases(np.random.default_rng(args.seed)):
        row = {"case": label}
        for bname, mod in backends.items():
            fn = getattr(mod, name)
            row[bname] = _best_of(lambda: fn(*call_args), args.repeat)
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)

    if args.json:
        print(json.dumps(rows, indent=2))
        return
    names = list(backends)
    print(f"{'case':38s}" + "".join(f"{b:>12s}" for b in names) + ("     speedup" if "cython" in names else ""))
    for row in rows:
        line = f"{row['case']:38s}" + "".join(f"{row[b] * 1e3:10.3f}ms" for b in names)
        if "speedup" in row:
            line += f"{row['speedup']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
