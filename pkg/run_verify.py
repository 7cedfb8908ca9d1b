#!/usr/bin/env python3
from __future__ import annotations

"""
Runner: pass one or more run configs to compute the predicted coefficients and run the
acceptance checks on each model.

Usage (from project root, with PYTHONPATH=src or via .venv):
  python run_verify.py                                   # every config under configs/
  python run_verify.py configs/s3_w1m1.json
  .venv/bin/python run_verify.py configs/s5_w1m10.json

For each config:
  1. Predicted b0, b1 (closed form, local assembly, orbit route) at the zero point
  2. Acceptance checks -> JSON report under the config's output dir

Exits 1 if any model fails a check.
"""

import sys
from pathlib import Path

# Project root (run_verify.py lives here)
_PROJECT_ROOT = Path(__file__).resolve().parent

# Ensure src on path
if str(_PROJECT_ROOT / "src") not in sys.path:
    sys.path.insert(0, str(_PROJECT_ROOT / "src"))

try:
    from dotenv import load_dotenv
    load_dotenv(_PROJECT_ROOT / ".env")
except ImportError:
    pass

from mpmath import mp

from equiszego.coefficients import predicted_coefficients
from equiszego.config import load_run_config, working_precision
from equiszego.errors import ConfigError, EquiszegoError, InvalidModel
from equiszego.models.sphere import SphereModel, SpherePoint, find_zero_point
from equiszego.tables import write_report
from equiszego.verify import run_checks


def _run_one(path: Path) -> bool:
    cfg = load_run_config(path)
    print(f"\n== {cfg.name}: n={cfg.n} W={cfg.weights} k={cfg.k_values} ({cfg.precision_bits} bits)")
    with working_precision(cfg.precision_bits):
        model = SphereModel.from_config(cfg.n, cfg.weights)
        point = SpherePoint.from_moduli(cfg.point) if cfg.point else find_zero_point(model)
        print(f"  zero point |z|^2 = {[mp.nstr(x, 12) for x in point.moduli_squared]}")
        for k in cfg.k_values:
            predicted = predicted_coefficients(model, k, point)
            print(f"  k={k}: b0={mp.nstr(predicted['b0'], 12)}  b1_global={mp.nstr(predicted['b1_global'], 12)}"
                  f"  b1_orbit={mp.nstr(predicted['b1_orbit'], 12)}"
                  f"  defect/b0={mp.nstr(predicted['closed_form_defect'] / predicted['b0'], 8)}")

        print("  Running acceptance checks...")
        result = run_checks(cfg)
        report = write_report(cfg.output_dir / f"verify_{cfg.name}.json", result)
    for r in result["checks"]:
        if not r["passed"]:
            print(f"  FAIL {r['check']} [{r['case']}] error={r['error']} tolerance={r['tolerance']}")
    for e in result["errors"]:
        print(f"  Error in {e['check']}: {e['error']}", file=sys.stderr)
    passed = sum(1 for r in result["checks"] if r["passed"])
    print(f"  {passed}/{len(result['checks'])} cases passed; report: {report}")
    return result["passed"]


def main() -> None:
    paths = [Path(p) for p in sys.argv[1:]] or sorted((_PROJECT_ROOT / "configs").glob("*.json"))
    if not paths:
        print("No configs given and none under configs/.", file=sys.stderr)
        sys.exit(2)

    ok = True
    for path in paths:
        try:
            ok = _run_one(path) and ok
        except (ConfigError, InvalidModel) as e:
            print(f"Error in {path.name}: {e}", file=sys.stderr)
            sys.exit(2)
        except EquiszegoError as e:
            print(f"Error in {path.name}: {type(e).__name__}: {e}", file=sys.stderr)
            ok = False

    print("\nDone." if ok else "\nDone, with failures.")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
