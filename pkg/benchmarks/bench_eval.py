"""Condition-VM benchmark: compiled extension vs pure-Python fallback.

Two workloads:
  expr   - tight loop over representative compiled condition programs
  session- full batch runs of the ordering fixture end to end

Usage:
    python benchmarks/bench_eval.py [--exprs N] [--sessions N]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from dbpsim import Session, load_scenario  # noqa: E402
from dbpsim.context import ContextSnapshot  # noqa: E402
from dbpsim.rules import parse_expr  # noqa: E402
from dbpsim.rules import _vm as pure_vm  # noqa: E402
from dbpsim.rules.compile import compile_expr  # noqa: E402

try:
    from dbpsim.rules import _vmext as ext_vm
except ImportError:
    ext_vm = None

EXPR_SOURCES = [
    "orderOpen and stockChecked and stock >= orderQty",
    "orderOpen and stockChecked and stock < orderQty and supplierAvailable",
    "money / pricePerUnit >= 5 or executedCount(ReplenishStock) > 2",
    "not orderOpen and (ordersFulfilled + 1) * 2 > elapsed()",
    'lastExecuted() == "ShipOrder" and stock - orderQty >= 0',
]

BINDINGS = {
    "orderOpen": True,
    "stockChecked": True,
    "stock": 10.0,
    "orderQty": 3.0,
    "supplierAvailable": True,
    "money": 10.0,
    "pricePerUnit": 5.0,
    "ordersFulfilled": 1.0,
}


def bench_exprs(runner, iterations: int) -> float:
    programs = [compile_expr(parse_expr(src)) for src in EXPR_SOURCES]
    counts = {"ReplenishStock": 1, "ShipOrder": 2}
    start = time.perf_counter()
    for _ in range(iterations):
        for program in programs:
            runner(program, BINDINGS, counts, 7.0, "ShipOrder")
    return time.perf_counter() - start


def bench_sessions(n: int) -> float:
    scenario = load_scenario((ROOT / "fixtures" / "ordering.scenario.json").read_bytes())
    Session(scenario, seed=0).run(max_steps=100)  # warm caches
    start = time.perf_counter()
    for seed in range(n):
        Session(scenario, seed=seed).run(max_steps=100)
    return time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--exprs", type=int, default=200_000,
                        help="iterations of the 5-program expression loop")
    parser.add_argument("--sessions", type=int, default=3000,
                        help="full fixture runs for the session workload")
    args = parser.parse_args()

    print(f"expression workload: {args.exprs} x {len(EXPR_SOURCES)} programs")
    pure = bench_exprs(pure_vm.run_program, args.exprs)
    rate = args.exprs * len(EXPR_SOURCES) / pure
    print(f"  pure-python  {pure:7.3f}s  ({rate / 1e6:.2f} M evals/s)")
    if ext_vm is not None:
        compiled = bench_exprs(ext_vm.run_program, args.exprs)
        rate = args.exprs * len(EXPR_SOURCES) / compiled
        print(f"  compiled     {compiled:7.3f}s  ({rate / 1e6:.2f} M evals/s)")
        print(f"  speedup      {pure / compiled:7.2f}x")
    else:
        print("  compiled     (extension not built)")

    print(f"session workload: {args.sessions} fixture runs")
    import os

    from dbpsim.rules import evaluator

    t = bench_sessions(args.sessions)
    print(f"  {evaluator.BACKEND:<12} {t:7.3f}s  ({args.sessions / t:.0f} runs/s)")
    if evaluator.BACKEND == "compiled":
        print("  (re-run with DBPSIM_PURE_PYTHON=1 for the fallback number)")
    elif not os.environ.get("DBPSIM_PURE_PYTHON") and ext_vm is None:
        print("  (build the extension for the compiled number: "
              "python setup.py build_ext --inplace)")


if __name__ == "__main__":
    main()
