"""Time the compiled kernel against the interpreted one.

Each backend runs in its own interpreter (``LFCALC_PURE=1`` forces the
pure-Python module), so import-time selection is exercised exactly as users
see it.

    python3 benchmarks/bench_kernel.py [--repeat N] [--quick]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = {
    "quick": ["Phi Phi", "G G", "X X"],
    "full": ["Phi Phi", "G G", "X X", "K M", "X M", "M M"],
}


def _child(pairs, repeat):
    from lfcalc import COMPILED, cdr, engine

    t0 = time.perf_counter()
    S = cdr.build_sections("+")
    timings = {"build sections": time.perf_counter() - t0}
    for pair in pairs:
        a, b = (getattr(S, n) for n in pair.split())
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            engine.bracket(a, b)
            best = min(best, time.perf_counter() - t)
        timings[f"[{pair}]"] = best
    print(json.dumps({"compiled": COMPILED, "timings": timings}))


def _run(pure: bool, pairs, repeat):
    env = dict(os.environ)
    env.pop("LFCALC_PURE", None)
    if pure:
        env["LFCALC_PURE"] = "1"
    cmd = [sys.executable, __file__, "--child", "--repeat", str(repeat), "--pairs", ",".join(pairs)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="skip the large [K M], [X M], [M M] brackets")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    ap.add_argument("--pairs", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.child:
        _child(args.pairs.split(","), args.repeat)
        return 0

    pairs = WORKLOADS["quick" if args.quick else "full"]
    fast = _run(False, pairs, args.repeat)
    slow = _run(True, pairs, args.repeat)
    if not fast["compiled"]:
        print("note: compiled kernel not built; both columns use the pure-Python module")
    print(f"{'workload':<16}{'compiled s':>12}{'pure s':>10}{'speedup':>9}")
    for key, tp in slow["timings"].items():
        tc = fast["timings"][key]
        print(f"{key:<16}{tc:>12.3f}{tp:>10.3f}{tp / tc:>8.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
