"""
reproduce_experiments.py

Runs the three experiment configurations on the smart-vehicle scenario and
prints their comparison tables:

  a: CP with device change penalties 1.0 to 2.0
  b: CP (penalty 1.25), GA, CRRB, RANDOM and LOCAL at full CPU
  c: the strategies of b with every worker's CPU halved

followed by the exact solver scaling run. Everything is written under
out/experiments/ (or the directory given as first argument).
"""
import json
import logging
import sys
from pathlib import Path

from src.cli import CPU_FACTORS, SWEEP_PENALTIES, cmd_scale, cmd_sweep
from src.metrics import METRIC_FIELDS
from src.solvers import Strategy

SCENARIO = Path(__file__).resolve().parent / "scenarios" / "smart_vehicle.json"
STRATEGIES = [Strategy.CP, Strategy.GA, Strategy.CRRB, Strategy.RANDOM, Strategy.LOCAL]
SEEDS = range(25)
SHOWN = ("min_path_rate", "last_event_throughput", "max_raw_delay_ms", "placement_changes")


def print_table(path: Path) -> None:
    """Print mean (std) of the headline metrics of a table_*.json file"""
    doc = json.loads(path.read_text())
    print(f"{'label':<18}" + "".join(f"{m:>28}" for m in SHOWN))
    for label, row in doc.items():
        cells = [f"{row['metrics'][m]['mean']:.2f} ({row['metrics'][m]['std']:.2f})" for m in SHOWN]
        print(f"{label:<18}" + "".join(f"{c:>28}" for c in cells))


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out") / "experiments"
    assert set(SHOWN) <= set(METRIC_FIELDS)

    code = cmd_sweep(SCENARIO, out / "sweep", STRATEGIES, SEEDS, SWEEP_PENALTIES, CPU_FACTORS, jobs=4)
    if code:
        sys.exit(code)

    # --- Penalty sweep ---
    print("\n--- a: CP device change penalties ---")
    print_table(out / "sweep" / "table_a.json")

    # --- Strategy comparison ---
    print("\n--- b: strategies at full CPU ---")
    print_table(out / "sweep" / "table_b.json")

    # --- Halved CPU ---
    print("\n--- c: strategies at full and halved CPU ---")
    print_table(out / "sweep" / "table_c.json")

    print("\n--- Exact solver scaling ---")
    code = cmd_scale(25, 25, 60_000, out / "scale")
    print((out / "scale" / "scale_summary.csv").read_text())
    sys.exit(code)
