import json
from fractions import Fraction

import pytest
from mpmath import mp

from equiszego.config import REPORT_VERSION
from equiszego.errors import ConfigError
from equiszego.tables import KernelTable, read_kernel_csv, render_number, sample_parity, write_kernel_csv, write_report


def test_kernel_csv_preserves_every_bit(tmp_path):
    rows = [(m, mp.sqrt(m) / mp.pi ** 3 + mp.mpf(1) / 3) for m in (51, 53, 55)]
    table = KernelTable(rows=rows, exponent_base=Fraction(1, 2), precision_bits=mp.prec, k=(1,), parity=1)
    path = write_kernel_csv(tmp_path / "kernel.csv", table)
    assert path.read_text().startswith("# equiszego precision_bits=128 exponent_base=1/2 k=1 parity=1")

    back = read_kernel_csv(path)
    assert back.k == (1,)
    assert back.parity == 1
    assert back.exponent_base == Fraction(1, 2)
    assert back.precision_bits == 128
    assert back.rows == rows


def test_kernel_csv_without_parity(tmp_path):
    table = KernelTable(rows=[(4, mp.mpf(2)), (5, mp.mpf(3))], exponent_base=Fraction(3, 2),
                        precision_bits=128, k=(0, 1))
    back = read_kernel_csv(write_kernel_csv(tmp_path / "t.csv", table))
    assert back.parity is None
    assert back.k == (0, 1)


def test_read_rejects_foreign_csv(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("m,S_km_exact\n1,2\n")
    with pytest.raises(ConfigError):
        read_kernel_csv(path)
    with pytest.raises(ConfigError):
        read_kernel_csv(tmp_path / "missing.csv")


def test_sample_parity():
    assert sample_parity([51, 53, 99]) == 1
    assert sample_parity([50, 52]) == 0
    assert sample_parity([50, 51]) is None


def test_render_number():
    rendered = render_number({"a": mp.mpf(1) / 3, "b": [mp.mpc(1, -2)], "c": Fraction(1, 16), "d": 7})
    assert rendered["a"].startswith("0.333333333333333333333333333333333333")
    assert mp.mpf(rendered["b"][0]["im"]) == -2
    assert rendered["c"] == "1/16"
    assert rendered["d"] == 7


def test_report_version_first(tmp_path):
    path = write_report(tmp_path / "out" / "r.json", {"value": mp.pi})
    payload = json.loads(path.read_text())
    assert list(payload)[0] == "report_version"
    assert payload["report_version"] == REPORT_VERSION
    assert abs(mp.mpf(payload["value"]) - mp.pi) < mp.mpf(10) ** -35
