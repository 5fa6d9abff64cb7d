#!/usr/bin/env python3
"""Benchmark the compiled CSR kernel against the numpy fallback.

Times the raw sparse matvec on probe blocks and a short moment run, on
generated graphs of increasing size. Usage:

    python benchmarks/bench_spmv.py [--cols 20] [--moments 10] [--repeat 5]
"""

import argparse
import time

import numpy as np

from netdos import dos_moments, make_probes
from netdos._kernels import BACKEND, _csr_py
from netdos.pipeline import scaled_operator_for
from netdos.probes import ProbeKind
from netdos.testkit import erdos_renyi

try:
    from netdos._kernels import _spmv
except ImportError:
    _spmv = None


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_matvec(g, cols, repeat):
    sop = scaled_operator_for(g, "normalized-adjacency")
    base = sop.base
    x = np.ascontiguousarray(np.random.default_rng(0).standard_normal((g.n, cols)))
    out = np.empty_like(x)
    rows = {}
    rows["numpy"] = _time(
        lambda: _csr_py.csr_matvec(base.indptr, base.indices, base.data, x, out),
        repeat)
    if _spmv is not None:
        rows["cython"] = _time(
            lambda: _spmv.csr_matvec(base.indptr, base.indices, base.data, x, out, 1),
            repeat)
    return rows


def bench_moments(g, cols, m_max, repeat):
    import netdos._kernels as kern

    sop = scaled_operator_for(g, "normalized-adjacency")
    probes = make_probes(g.n, cols, ProbeKind.HADAMARD, seed=1)
    rows = {}
    impls = [("numpy", _csr_py)]
    if _spmv is not None:
        impls.append(("cython", _spmv))
    saved = kern._impl
    try:
        for name, impl in impls:
            kern._impl = impl
            rows[name] = _time(lambda: dos_moments(sop, probes, m_max), repeat)
    finally:
        kern._impl = saved
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cols", type=int, default=20)
    ap.add_argument("--moments", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="2000,20000,100000",
                    help="comma list of node counts (avg degree 10)")
    args = ap.parse_args()

    print(f"active backend: {BACKEND}"
          + ("" if _spmv is not None else " (extension not built)"))
    header = f"{'n':>8} {'nnz':>10} {'kernel':>8} {'matvec':>10} {'per-moment':>11} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in (int(s) for s in args.sizes.split(",")):
        g = erdos_renyi(n, min(1.0, 10.0 / n), seed=7)
        mv = bench_matvec(g, args.cols, args.repeat)
        mm = bench_moments(g, args.cols, args.moments, args.repeat)
        base = mv["numpy"]
        for name in mv:
            speed = base / mv[name]
            print(f"{n:>8} {g.nnz:>10} {name:>8} {mv[name]*1e3:>9.2f}ms "
                  f"{mm[name]/args.moments*1e3:>10.2f}ms {speed:>7.1f}x")


if __name__ == "__main__":
    main()
