"""Compare the compiled kernels with the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``PINDEX_DISABLE_NUMBA``.

    python3 benchmarks/bench_kernels.py [--p 16] [--repeats 20]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
import pindex
from pindex.dgp import generate_dataset, preset
from pindex.subset import best_rss_per_size
from pindex.study import run_replications

p, repeats = int(sys.argv[1]), int(sys.argv[2])
r = np.random.default_rng(0)
X = r.standard_normal((200, p))
y = X[:, :3] @ [2.0, 1.0, 0.5] + r.standard_normal(200)
ds = pindex.Dataset(y, X)
best_rss_per_size(ds, p)  # compile / warm up
t0 = time.perf_counter()
for _ in range(repeats):
    best_rss_per_size(ds, p)
search = (time.perf_counter() - t0) / repeats
t0 = time.perf_counter()
s = run_replications(preset("example7"), 20, base_seed=1)
study = time.perf_counter() - t0
print(json.dumps({"backend": pindex.backend_name(), "search_ms": 1e3 * search,
                  "example7_20reps_s": study, "selected": s.records[0].selected}))
"""


def run(disable: bool, p: int, repeats: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["PINDEX_DISABLE_NUMBA"] = "1"
    else:
        env.pop("PINDEX_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", WORKER, str(p), str(repeats)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=16)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    rows = [run(False, args.p, args.repeats), run(True, args.p, args.repeats)]
    print(f"{'backend':8s} {'search (ms)':>12s} {'example7 x20 (s)':>17s}")
    for row in rows:
        print(f"{row['backend']:8s} {row['search_ms']:12.2f} {row['example7_20reps_s']:17.2f}")
    assert rows[0]["selected"] == rows[1]["selected"], "backends disagree"
    print(f"speedup {rows[1]['search_ms'] / rows[0]['search_ms']:.0f}x on the p={args.p} search")


if __name__ == "__main__":
    main()
