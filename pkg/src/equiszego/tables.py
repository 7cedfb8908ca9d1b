"""Kernel tables (CSV through pandas) and JSON reports.

Numbers are written as decimal strings with enough digits to parse back to the
same binary value at the recorded precision, so a table written by one process
and fitted by another reproduces the in-process result exactly.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import pandas as pd
from mpmath import mp

from equiszego.config import REPORT_VERSION, digits_for_roundtrip
from equiszego.errors import ConfigError

log = logging.getLogger("equiszego.tables")

KERNEL_COLUMNS = ["m", "S_km_exact", "S_km_scaled"]
_HEADER_PREFIX = "# equiszego"
_HEADER_FIELD = re.compile(r"(\w+)=(\S+)")


@dataclass(frozen=True, eq=False)
class KernelTable:
    rows: list[tuple[int, mp.mpf]]
    exponent_base: Fraction
    precision_bits: int
    k: tuple[int, ...]
    parity: int | None = None


def render_number(value: Any, digits: int | None = None) -> Any:
    """mpf/mpc to full-precision strings; containers recursively; everything else unchanged."""
    digits = digits or digits_for_roundtrip()
    if isinstance(value, mp.mpf):
        return mp.nstr(value, digits, strip_zeros=False)
    if isinstance(value, mp.mpc):
        return {"re": mp.nstr(value.real, digits, strip_zeros=False),
                "im": mp.nstr(value.imag, digits, strip_zeros=False)}
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): render_number(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [render_number(v, digits) for v in value]
    return value


def sample_parity(degrees: Sequence[int]) -> int | None:
    """The common parity of `degrees`, or None when both occur."""
    parities = {m % 2 for m in degrees}
    return parities.pop() if len(parities) == 1 else None


def write_kernel_csv(path: str | Path, table: KernelTable) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    digits = digits_for_roundtrip(table.precision_bits)
    base = table.exponent_base
    power = mp.mpf(base.numerator) / base.denominator
    df = pd.DataFrame(
        [(m, mp.nstr(v, digits, strip_zeros=False), mp.nstr(v * mp.mpf(m) ** (-power), digits, strip_zeros=False))
         for m, v in table.rows],
        columns=KERNEL_COLUMNS,
    )
    k = ",".join(str(v) for v in table.k)
    parity = "none" if table.parity is None else str(table.parity)
    header = (f"{_HEADER_PREFIX} precision_bits={table.precision_bits} exponent_base={base} "
              f"k={k} parity={parity}\n")
    with path.open("w", encoding="utf-8") as f:
        f.write(header)
        df.to_csv(f, index=False)
    log.info("wrote %d kernel rows to %s", len(df), path)
    return path


def _read_header(path: Path) -> dict[str, str]:
    with path.open(encoding="utf-8") as f:
        first = f.readline().strip()
    if not first.startswith(_HEADER_PREFIX):
        raise ConfigError(f"{path}: missing '{_HEADER_PREFIX} ...' header line")
    return dict(_HEADER_FIELD.findall(first))


def read_kernel_csv(path: str | Path) -> KernelTable:
    """Parse a table written by `write_kernel_csv`; values are parsed at the recorded precision."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"kernel table not found: {path}")
    header = _read_header(path)
    try:
        bits = int(header["precision_bits"])
        base = Fraction(header["exponent_base"])
        k = tuple(int(v) for v in header["k"].split(",") if v)
        parity = None if header.get("parity", "none") == "none" else int(header["parity"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"{path}: malformed header {header}: {e}") from e
    df = pd.read_csv(path, comment="#", dtype=str)
    missing = [c for c in KERNEL_COLUMNS if c not in df.columns]
    if missing:
        raise ConfigError(f"{path}: missing columns {missing}")
    with mp.workprec(bits):
        rows = [(int(m), mp.mpf(v)) for m, v in zip(df["m"], df["S_km_exact"])]
    return KernelTable(rows=rows, exponent_base=base, precision_bits=bits, k=k, parity=parity)


def write_report(path: str | Path, result: dict[str, Any]) -> Path:
    """JSON report with `report_version` first and every mpmath number rendered."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"report_version": REPORT_VERSION, **render_number(result)}
    path.write_text(json.dumps(payload, indent=2, default=str), encoding="utf-8")
    log.info("wrote report %s", path)
    return path
