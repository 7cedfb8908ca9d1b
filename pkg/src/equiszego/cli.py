"""Command-line entry point.

CLI:
    python -m equiszego kernel --config configs/s3_w1m1.json          # exact S_km(p,p) table (CSV)
    python -m equiszego fit --config ... [--input table.csv]          # fitted b_j + Richardson
    python -m equiszego coeffs --config ...                           # invariants, b0, both b1 routes
    python -m equiszego expand --config ...                           # stationary-phase demo
    python -m equiszego report --config ...                           # fitted vs predicted, geometry, timings
    python -m equiszego verify --config ... [--tolerance-scale 0.1]   # acceptance checks, exit 0/1

Exit codes: 0 success, 1 failed check or library error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable

from mpmath import mp

from equiszego.algebra.jets import Jet
from equiszego.asymptotics.fit import ExpansionSamples, fit_coefficients, richardson_sequence
from equiszego.asymptotics.stationary_phase import build_phase, sp_expand
from equiszego.coefficients import model_geometry, predicted_coefficients
from equiszego.config import DEFAULT_CONFIG, RunConfig, load_run_config, working_precision
from equiszego.errors import ConfigError, EquiszegoError, InvalidModel
from equiszego.models.sphere import SphereModel, SpherePoint, find_zero_point, kernel_table
from equiszego.tables import KernelTable, read_kernel_csv, sample_parity, write_kernel_csv, write_report
from equiszego.verify import expansion_report, run_checks

log = logging.getLogger("equiszego.cli")


def _k_tag(k: tuple[int, ...]) -> str:
    return "k" + "_".join(str(v) for v in k)


def _model_and_point(cfg: RunConfig) -> tuple[SphereModel, SpherePoint]:
    model = SphereModel.from_config(cfg.n, cfg.weights)
    point = SpherePoint.from_moduli(cfg.point) if cfg.point else find_zero_point(model)
    return model, point


def _table(cfg: RunConfig, model: SphereModel, point: SpherePoint, k: tuple[int, ...]) -> KernelTable:
    rows = kernel_table(model, k, range(cfg.m_min, cfg.m_max + 1), point, cfg.workers)
    return KernelTable(rows=rows, exponent_base=model.exponent_base, precision_bits=mp.prec, k=k,
                       parity=sample_parity([m for m, _ in rows]))


def cmd_kernel(cfg: RunConfig, args: argparse.Namespace) -> dict[str, Any]:
    model, point = _model_and_point(cfg)
    files, errors = [], []
    for k in cfg.k_values:
        try:
            table = _table(cfg, model, point, k)
            if not table.rows:
                print(f"warning: every weight-{k} slice in m=[{cfg.m_min}, {cfg.m_max}] is empty", file=sys.stderr)
            path = write_kernel_csv(cfg.output_dir / f"kernel_{cfg.name}_{_k_tag(k)}.csv", table)
            files.append(str(path))
            print(f"  {k}: {len(table.rows)} rows -> {path}")
        except EquiszegoError as e:
            errors.append(f"{k}: {e}")
            print(f"    error: {e}", file=sys.stderr)
    return {"files_written": files, "errors": errors}


def _fit_table(cfg: RunConfig, table: KernelTable) -> dict[str, Any]:
    samples = ExpansionSamples.build(table.rows, table.exponent_base, table.parity)
    fit = fit_coefficients(samples, cfg.fit_terms)
    return {
        "k": list(table.k),
        "m_range": [samples.degrees[0], samples.degrees[-1]],
        "samples": len(samples.entries),
        "exponent_base": table.exponent_base,
        "coeffs": fit.coeffs,
        "uncertainties": fit.uncertainties,
        "residual": fit.residual,
        "condition": fit.condition,
        "stability": fit.stability,
        "unstable": fit.unstable,
        "richardson": richardson_sequence(samples),
    }


def cmd_fit(cfg: RunConfig, args: argparse.Namespace) -> dict[str, Any]:
    fits, errors = [], []
    if args.input:
        tables = [read_kernel_csv(path) for path in args.input]
    else:
        model, point = _model_and_point(cfg)
        tables = [_table(cfg, model, point, k) for k in cfg.k_values]
    for table in tables:
        try:
            with working_precision(table.precision_bits):
                fits.append(_fit_table(cfg, table))
            print(f"  {table.k}: b0={mp.nstr(fits[-1]['coeffs'][0], 15)}"
                  + ("  UNSTABLE" if fits[-1]["unstable"] else ""))
        except EquiszegoError as e:
            errors.append(f"{table.k}: {e}")
            print(f"    error: {e}", file=sys.stderr)
    result = {"fits": fits, "errors": errors}
    result["json_path"] = str(write_report(cfg.output_dir / f"fit_{cfg.name}.json", result))
    return result


def cmd_coeffs(cfg: RunConfig, args: argparse.Namespace) -> dict[str, Any]:
    model, point = _model_and_point(cfg)
    entries, errors = [], []
    for k in cfg.k_values:
        try:
            geometry = model_geometry(model, k, point)
            predicted = predicted_coefficients(model, k, point, geometry)
            entries.append({"k": list(k), **geometry.dump(), **predicted})
            print(f"  {k}: b0={mp.nstr(predicted['b0'], 15)} b1_global={mp.nstr(predicted['b1_global'], 15)} "
                  f"b1_orbit={mp.nstr(predicted['b1_orbit'], 15)}")
        except EquiszegoError as e:
            errors.append(f"{k}: {e}")
            print(f"    error: {e}", file=sys.stderr)
    result = {"model": {"n": cfg.n, "weights": cfg.weights, "point_moduli": point.moduli_squared},
              "coefficients": entries, "errors": errors}
    result["json_path"] = str(write_report(cfg.output_dir / f"coeffs_{cfg.name}.json", result))
    return result


def parse_coefficient(value: Any) -> mp.mpc:
    """A number, a decimal string, a Python complex literal like "0.5j", or a [re, im] pair."""
    try:
        if isinstance(value, list) and len(value) == 2:
            return mp.mpc(mp.mpf(str(value[0])), mp.mpf(str(value[1])))
        if isinstance(value, str) and "j" in value:
            return mp.mpc(complex(value))
        if isinstance(value, (int, float, str)) and not isinstance(value, bool):
            return mp.mpc(mp.mpf(str(value)))
    except ValueError as e:
        raise ConfigError(f"bad coefficient {value!r}: {e}") from e
    raise ConfigError(f"bad coefficient {value!r}")


def parse_terms(terms: Any, num_vars: int, order: int, where: str) -> Jet:
    """[[multi-index, coefficient], ...] as a jet."""
    if not isinstance(terms, list) or not terms:
        raise ConfigError(f"expand.{where}: expected a non-empty list of [multi-index, coefficient]")
    pairs = []
    for term in terms:
        if not isinstance(term, list) or len(term) != 2 or not isinstance(term[0], list) or len(term[0]) != num_vars:
            raise ConfigError(f"expand.{where}: bad term {term!r} for {num_vars} variables")
        pairs.append((tuple(int(a) for a in term[0]), parse_coefficient(term[1])))
    return Jet.from_terms(num_vars, order, pairs)


def _expand_int(spec: dict[str, Any], key: str, default: int, minimum: int) -> int:
    value = spec.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"expand.{key} must be an integer >= {minimum}, got {value!r}")
    return value


def cmd_expand(cfg: RunConfig, args: argparse.Namespace) -> dict[str, Any]:
    spec = cfg.expand
    if not spec:
        raise ConfigError("config has no 'expand' section")
    num_vars = spec.get("num_vars")
    if not isinstance(num_vars, int) or num_vars < 1:
        raise ConfigError(f"expand.num_vars must be a positive integer, got {num_vars!r}")
    jmax = _expand_int(spec, "jmax", 2, minimum=0)
    order = _expand_int(spec, "order", 2 * jmax + 2, minimum=2)
    degrees = spec.get("m", [])
    if not isinstance(degrees, list) or any(not isinstance(m, int) or isinstance(m, bool) or m < 1 for m in degrees):
        raise ConfigError(f"expand.m must be a list of positive integers, got {degrees!r}")
    F = parse_terms(spec.get("phase"), num_vars, order, "phase")
    u = parse_terms(spec.get("amplitude", [[[0] * num_vars, 1]]), num_vars, order, "amplitude")
    expansion = sp_expand(build_phase(F), u, jmax)
    evaluations = [{"m": m, "value": expansion.evaluate(m)} for m in degrees]
    for j, term in enumerate(expansion.terms):
        print(f"  L_{j} u = {mp.nstr(term, 15)}")
    result = {
        "prefactor_power": expansion.prefactor_power,
        "prefactor_const": expansion.prefactor_const,
        "phase0": expansion.phase0,
        "terms": expansion.terms,
        "evaluations": evaluations,
        "errors": [],
    }
    result["json_path"] = str(write_report(cfg.output_dir / f"expand_{cfg.name}.json", result))
    return result


def cmd_verify(cfg: RunConfig, args: argparse.Namespace) -> dict[str, Any]:
    only = set(args.check) if args.check else None
    result = run_checks(cfg, only=(lambda name: name in only) if only else None)
    result["json_path"] = str(write_report(cfg.output_dir / f"verify_{cfg.name}.json", result))

    # Console summary: every check, every error.
    for r in result["checks"]:
        status = "ok  " if r["passed"] else "FAIL"
        error = "" if r["error"] is None else f" err={mp.nstr(r['error'], 3)} tol={r['tolerance']}"
        print(f"  {status} {r['check']:<20} {r['case']:<28} measured={mp.nstr(mp.mpmathify(r['measured']), 12)}{error}")
    for e in result["errors"]:
        print(f"  error in {e['check']}: {e['error']}", file=sys.stderr)
    print(f"\n{'PASSED' if result['passed'] else 'FAILED: ' + ', '.join(result['failed'])}  -> {result['json_path']}")
    return result


def cmd_report(cfg: RunConfig, args: argparse.Namespace) -> dict[str, Any]:
    result = expansion_report(cfg)
    result["json_path"] = str(write_report(cfg.output_dir / f"report_{cfg.name}.json", result))
    for entry in result["expansions"]:
        fit, rel = entry["fit"], entry["relative_errors"]
        print(f"  k={entry['k']}: c0={mp.nstr(fit['coeffs'][0], 15)} (b0 rel err {mp.nstr(rel['b0'], 3)}) "
              f"c1 rel err global={mp.nstr(rel['b1_global'], 3)} orbit={mp.nstr(rel['b1_orbit'], 3)}")
    for e in result["errors"]:
        print(f"  error for k={e['k']}: {e['error']}", file=sys.stderr)
    print("  timings: " + ", ".join(f"{stage}={seconds:.2f}s" for stage, seconds in result["timings"].items()))
    return result


COMMANDS: dict[str, tuple[Callable[[RunConfig, argparse.Namespace], dict[str, Any]], str]] = {
    "kernel": (cmd_kernel, "Exact S_km(p,p) over the configured m range, written as CSV"),
    "fit": (cmd_fit, "Fit b_j from a kernel table (or an in-process one) and report Richardson estimates"),
    "coeffs": (cmd_coeffs, "Geometric invariants and predicted b0, b1 at the configured point"),
    "expand": (cmd_expand, "Stationary-phase expansion of the phase/amplitude in the config"),
    "report": (cmd_report, "Fitted against predicted coefficients with geometry, timings and the config echo"),
    "verify": (cmd_verify, "Run the acceptance checks; exit 1 if any fails"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="equiszego", description="Equivariant Szego kernel expansions on sphere models.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", default=str(DEFAULT_CONFIG), help="Run config (JSON)")
        sp.add_argument("--precision-bits", type=int, default=None, help="mpmath working precision")
        sp.add_argument("--k", default=None, help="Character weight(s): '1', '1,0' or '0;1;2'")
        sp.add_argument("--m-min", type=int, default=None)
        sp.add_argument("--m-max", type=int, default=None)
        sp.add_argument("--fit-terms", type=int, default=None, help="Number J of fitted coefficients")
        sp.add_argument("--out", default=None, help="Output directory")
        sp.add_argument("--workers", type=int, default=None, help="Processes for kernel tables")
        sp.add_argument("--tolerance-scale", type=float, default=None, help="Multiply every check tolerance")
        sp.add_argument("--verbose", "-v", action="store_true")
        if name == "fit":
            sp.add_argument("--input", nargs="+", default=None, help="Kernel CSV(s) written by 'kernel'")
        if name == "verify":
            sp.add_argument("--check", action="append", default=None, help="Run only the named check (repeatable)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    overrides = {
        "precision_bits": args.precision_bits,
        "k": args.k,
        "m_min": args.m_min,
        "m_max": args.m_max,
        "fit_terms": args.fit_terms,
        "output_dir": args.out,
        "workers": args.workers,
        "tolerance_scale": args.tolerance_scale,
    }
    try:
        cfg = load_run_config(args.config, overrides)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2

    handler, _ = COMMANDS[args.command]
    print(f"{args.command}: {cfg.name} (n={cfg.n}, W={cfg.weights}, k={cfg.k_values}, {cfg.precision_bits} bits)")
    try:
        with working_precision(cfg.precision_bits):
            result = handler(cfg, args)
    except (ConfigError, InvalidModel) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except EquiszegoError as e:
        print(f"Error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if "json_path" in result:
        print(f"Wrote {result['json_path']}")
    if result.get("errors"):
        return 1
    return 0 if result.get("passed", True) else 1


if __name__ == "__main__":
    sys.exit(main())
