"""Compare the compiled kernels with their fallbacks.

    python benchmarks/bench_kernels.py [--max-seeds 9] [--depth 6] [--repeat 3]

The endgame solver has a vectorised numpy path selectable in-process. Search
kernels have no separate implementation, so the fallback timing runs a child
interpreter with AYO_NUMBA=0, where the same kernels execute as plain Python.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

SEARCH_SNIPPET = """
import json, sys, time
from ayo._accel import backend_name
from ayo.rules import new_game
from ayo.search import minimax
depth, repeat = int(sys.argv[1]), int(sys.argv[2])
minimax(new_game(), 1)  # compile outside the timed region
best = float("inf")
for _ in range(repeat):
    t0 = time.perf_counter()
    r = minimax(new_game(), depth)
    best = min(best, time.perf_counter() - t0)
print(json.dumps({"backend": backend_name(), "seconds": best, "nodes": r.nodes, "value": r.value}))
"""


def time_search(depth: int, repeat: int, numba: bool) -> dict:
    env = dict(os.environ, AYO_NUMBA="1" if numba else "0")
    out = subprocess.run([sys.executable, "-c", SEARCH_SNIPPET, str(depth), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def time_solve(max_seeds: int, repeat: int, backend: str) -> float:
    from ayo.endgame.solver import solve_values
    from ayo.rules import StalemateRule

    solve_values(3, StalemateRule.CANCELLED, backend=backend)  # warm-up / compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        solve_values(max_seeds, StalemateRule.CANCELLED, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-seeds", type=int, default=9)
    ap.add_argument("--depth", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rows = []
    for backend in ("numba", "numpy"):
        rows.append((f"solve <= {args.max_seeds} seeds", backend, time_solve(args.max_seeds, args.repeat, backend), ""))
    for numba in (True, False):
        r = time_search(args.depth, args.repeat, numba)
        label = "numba" if numba else "python (AYO_NUMBA=0)"
        rows.append((f"minimax depth {args.depth}", label, r["seconds"], f"{r['nodes']} nodes"))

    print(f"{'task':<24}{'backend':<24}{'seconds':>10}  note")
    for task, backend, secs, note in rows:
        print(f"{task:<24}{backend:<24}{secs:>10.3f}  {note}")
    for i in (0, 2):
        print(f"speed-up {rows[i][0]}: {rows[i + 1][2] / rows[i][2]:.1f}x")


if __name__ == "__main__":
    main()
