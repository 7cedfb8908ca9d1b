"""Load configuration from environment (EQUISZEGO_PRECISION_BITS, EQUISZEGO_OUTPUT_DIR, EQUISZEGO_WORKERS)."""

from __future__ import annotations

import json
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterator

from mpmath import mp

from equiszego.errors import ConfigError

try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

# Resolve project root (parent of src) so relative output paths land inside the project.
_PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent

# Working precision of every mpmath computation (binary significand bits).
PRECISION_BITS = int(os.environ.get("EQUISZEGO_PRECISION_BITS", "128").strip() or 128)
if PRECISION_BITS < 64:
    raise ValueError(f"EQUISZEGO_PRECISION_BITS must be >= 64, got {PRECISION_BITS}")
mp.prec = PRECISION_BITS

# Reports and kernel tables (default relative to project root).
_OUTPUT_DIR = os.environ.get("EQUISZEGO_OUTPUT_DIR", "data/runs").strip()
OUTPUT_DIR = Path(_OUTPUT_DIR) if Path(_OUTPUT_DIR).is_absolute() else (_PROJECT_ROOT / _OUTPUT_DIR)

# Process count for kernel tables (1 = in-process).
WORKERS = max(1, int(os.environ.get("EQUISZEGO_WORKERS", "1").strip() or 1))

DEFAULT_CONFIG = _PROJECT_ROOT / "configs" / "s3_w1m1.json"

# Bumped whenever a report field is renamed or removed.
REPORT_VERSION = 1


@contextmanager
def working_precision(bits: int | None) -> Iterator[int]:
    """Run a block at `bits` of precision (None keeps the current setting)."""
    if bits is None:
        yield mp.prec
        return
    if bits < 64:
        raise ValueError(f"precision_bits must be >= 64, got {bits}")
    with mp.workprec(bits):
        yield bits


def tolerance(fraction: float = 0.65):
    """Absolute tolerance 2^-(fraction * prec); about 1e-25 at 128 bits."""
    return mp.mpf(2) ** (-int(fraction * mp.prec))


def digits_for_roundtrip(bits: int | None = None) -> int:
    """Significant decimal digits that parse back to the same binary value."""
    bits = mp.prec if bits is None else bits
    return math.ceil(bits * math.log10(2)) + 1


@dataclass
class RunConfig:
    """One run of the pipeline on one model, loaded from a JSON file plus CLI overrides."""

    n: int
    weights: list[list[int]]
    k_values: list[tuple[int, ...]]
    m_min: int = 50
    m_max: int = 400
    fit_terms: int = 5
    precision_bits: int = PRECISION_BITS
    point: list[str] | None = None          # |z_l|^2 as decimal strings; None = max-entropy zero
    expected_defect: Fraction = Fraction(0)  # (b1 - b1_global) / b0
    tolerance_scale: float = 1.0
    tolerances: dict[str, float] = field(default_factory=dict)
    workers: int = WORKERS
    output_dir: Path = OUTPUT_DIR
    expand: dict[str, Any] = field(default_factory=dict)
    name: str = "run"

    @property
    def k(self) -> tuple[int, ...]:
        return self.k_values[0]


def _as_weight(value: Any, d: int, where: str) -> tuple[int, ...]:
    vec = [value] if isinstance(value, int) else value
    if not isinstance(vec, list) or len(vec) != d or not all(isinstance(v, int) for v in vec):
        raise ConfigError(f"{where}: expected {d} integers, got {value!r}")
    return tuple(vec)


def _require_int(raw: dict, key: str, default: int | None = None, minimum: int = 1) -> int:
    value = raw.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"'{key}' must be an integer >= {minimum}, got {value!r}")
    return value


def parse_k(text: str, d: int) -> list[tuple[int, ...]]:
    """'1' or '1,0' or '0;1;2' (semicolons separate several weights) for --k."""
    try:
        values = [tuple(int(v) for v in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"--k: cannot parse {text!r}") from e
    if not values or any(len(v) != d for v in values):
        raise ConfigError(f"--k: every weight needs {d} components, got {text!r}")
    return values


def load_run_config(path: str | Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Read and validate a run config; `overrides` (non-None entries) replace file values."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"config not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed JSON: {e}") from e
    if not isinstance(raw, dict) or not isinstance(raw.get("model"), dict):
        raise ConfigError(f"{path}: expected an object with a 'model' section")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    model = raw["model"]
    n = _require_int(model, "n")
    weights = model.get("weights")
    if isinstance(weights, list) and weights and all(isinstance(w, int) for w in weights):
        weights = [weights]
    if (not isinstance(weights, list) or not weights
            or any(not isinstance(row, list) or len(row) != n + 1 for row in weights)):
        raise ConfigError(f"{path}: model.weights must be d rows of {n + 1} integers")
    d = len(weights)

    k_text = overrides.pop("k", None)
    k_raw = raw.get("k", [[0] * d])
    if isinstance(k_raw, list) and k_raw and not isinstance(k_raw[0], list) and d > 1:
        k_raw = [k_raw]
    if not isinstance(k_raw, list):
        k_raw = [k_raw]
    k_values = parse_k(k_text, d) if k_text else [_as_weight(v, d, "k") for v in k_raw]
    if not k_values:
        raise ConfigError("at least one weight k is required")

    m_range = raw.get("m_range", {})
    merged = {
        "m_min": overrides.get("m_min", m_range.get("min", 50)),
        "m_max": overrides.get("m_max", m_range.get("max", 400)),
        "fit_terms": overrides.get("fit_terms", raw.get("fit_terms", 5)),
        "precision_bits": overrides.get("precision_bits", raw.get("precision_bits", PRECISION_BITS)),
        "workers": overrides.get("workers", raw.get("workers", WORKERS)),
    }
    m_min = _require_int(merged, "m_min")
    m_max = _require_int(merged, "m_max")
    if m_max <= m_min:
        raise ConfigError(f"m_range: max {m_max} must exceed min {m_min}")
    bits = _require_int(merged, "precision_bits", minimum=64)

    point = raw.get("point")
    if point is not None and (not isinstance(point, list) or len(point) != n + 1):
        raise ConfigError(f"point: expected {n + 1} squared moduli, got {point!r}")
    try:
        if point is not None and any(Fraction(str(v)) < 0 for v in point):
            raise ConfigError(f"point: squared moduli must be nonnegative, got {point!r}")
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"point: {e}") from e

    try:
        defect = Fraction(str(raw.get("expected_defect", "0")))
        scale = float(overrides.get("tolerance_scale", raw.get("tolerance_scale", 1.0)))
        tolerances = {str(k): float(v) for k, v in raw.get("tolerances", {}).items()}
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"{path}: {e}") from e
    if scale <= 0:
        raise ConfigError(f"tolerance_scale must be positive, got {scale}")

    out = overrides.get("output_dir") or raw.get("output", {}).get("dir")
    output_dir = OUTPUT_DIR if not out else Path(out)
    if not output_dir.is_absolute():
        output_dir = _PROJECT_ROOT / output_dir
    expand = raw.get("expand", {})
    if not isinstance(expand, dict):
        raise ConfigError("'expand' must be an object")

    return RunConfig(
        n=n,
        weights=[[int(w) for w in row] for row in weights],
        k_values=k_values,
        m_min=m_min,
        m_max=m_max,
        fit_terms=_require_int(merged, "fit_terms"),
        precision_bits=bits,
        point=[str(v) for v in point] if point is not None else None,
        expected_defect=defect,
        tolerance_scale=scale,
        tolerances=tolerances,
        workers=_require_int(merged, "workers"),
        output_dir=output_dir,
        expand=expand,
        name=str(raw.get("name", path.stem)),
    )
