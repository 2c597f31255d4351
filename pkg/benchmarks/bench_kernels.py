"""Compare the compiled kernels with the numpy fallback.

Kernel timings run both modules in this process on identical inputs.
The end-to-end timings build and verify a table in a fresh interpreter
per backend, since the backend is chosen at import.

    python3 benchmarks/bench_kernels.py [--repeat N] [--level L]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from crossed_site import kernels
from crossed_site.finite_site import Site, SiteId
from crossed_site.standard_families import StabilizedPermGroup, all_signed_perms, weyl_table

END_TO_END = """
import json, sys, time
t = time.perf_counter()
from crossed_site import kernels
from crossed_site.crossed_core import verify_crossed_axioms
from crossed_site.standard_families import weyl_table
W = weyl_table("nabla", {level})
built = time.perf_counter()
ok = verify_crossed_axioms(W).passed
done = time.perf_counter()
json.dump({{"backend": kernels.BACKEND, "build": built - t, "verify": done - built, "ok": ok}}, sys.stdout)
"""


def kernel_cases(W):
    """``name -> callable(module)`` on inputs shared by both backends."""
    S = Site(SiteId.NABLA)
    n = W.max_level
    N = n + 2
    perms, signs = all_signed_perms(N)
    stable = StabilizedPermGroup(SiteId.NABLA, n + 1).flags
    probes = np.ascontiguousarray(S.hom_array(n + 1, n), dtype=np.int32)
    wp, ws = (np.ascontiguousarray(v) for v in W.signed[n])
    lookup = np.full(int(kernels.signed_keys(wp, ws).max()) + 1, -1, dtype=np.int32)
    lookup[kernels.signed_keys(wp, ws)] = np.arange(len(wp), dtype=np.int32)
    images = np.ascontiguousarray(S.hom_array(n, n)[len(S.homs(n, n)) // 2], dtype=np.int32)
    b = n - 1
    mul = np.ascontiguousarray(W.groups[n].mul, dtype=np.int32)
    mul_t = (np.ascontiguousarray(W.groups[n].mul_t, dtype=np.int32),
             np.ascontiguousarray(W.groups[b].mul_t, dtype=np.int32))
    restr = np.ascontiguousarray(W.restriction[(b, n)], dtype=np.int32)
    act = np.ascontiguousarray(W.action[(b, n)], dtype=np.int32)

    def members(K):
        alive = np.ones(len(perms), np.uint8)
        K.weyl_members_level(perms, signs, alive, probes, N, stable)

    return {
        f"weyl_members_level N={N}": members,
        f"signed_mul_table |W|={len(wp)}": lambda K: K.signed_mul_table(wp, ws, lookup),
        f"weyl_restrict |W|={len(wp)}": lambda K: K.weyl_restrict(images, N, wp, ws),
        f"signed_keys {len(perms)} perms": lambda K: K.signed_keys(perms, signs),
        f"action_check ({n}<-{b})": lambda K: K.action_check(mul, act, 10 ** 6),
        f"cgii_check ({n}<-{b})": lambda K: K.cgii_check(*mul_t, restr, act, 10 ** 6),
    }


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(level, backend):
    env = dict(os.environ)
    if backend == "python":
        env["CROSSED_SITE_BACKEND"] = "python"
    else:
        env.pop("CROSSED_SITE_BACKEND", None)
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(level=level)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--level", type=int, default=3, help="Nabla level for the kernel inputs")
    ap.add_argument("--e2e-level", type=int, default=4, help="truncation for the end-to-end run")
    args = ap.parse_args(argv)

    try:
        C = kernels.backend_module("compiled")
    except ImportError:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    P = kernels.backend_module("python")

    W = weyl_table("nabla", args.level)
    print(f"{'kernel':<34}{'compiled ms':>12}{'python ms':>12}{'speedup':>9}")
    for name, fn in kernel_cases(W).items():
        tc = best_of(lambda: fn(C), args.repeat)
        tp = best_of(lambda: fn(P), args.repeat)
        print(f"{name:<34}{tc * 1e3:>12.2f}{tp * 1e3:>12.2f}{tp / tc:>8.1f}x")

    print(f"\nend to end: build and verify W on nabla up to level {args.e2e_level}")
    for backend in ("compiled", "python"):
        r = end_to_end(args.e2e_level, backend)
        print(f"  {r['backend']:<9} build {r['build']:7.2f} s  verify {r['verify']:7.2f} s  passed {r['ok']}")


if __name__ == "__main__":
    main()
