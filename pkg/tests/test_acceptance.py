"""The shipped run configs pass their acceptance checks.

The fast subset runs by default; the full suite (kernel fits over m in [50, 400] and
the quadrature slopes) runs with `pytest --runslow`.
"""

from fractions import Fraction
from pathlib import Path

import pytest
from mpmath import mp

from equiszego.config import load_run_config
from equiszego.models.sphere import SphereModel, find_zero_point, szego_km_diag
from equiszego.verify import CHECKS, off_zero_point, run_checks

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
FAST = {"b1_local_global", "b1_local_measured", "orbit_coefficients", "haar_identity",
        "character_laplacian", "sp_gaussian", "off_zero_decay"}


def _config(name, tmp_path):
    return load_run_config(CONFIGS / name, {"output_dir": str(tmp_path)})


@pytest.mark.parametrize("name", ["s3_w1m1.json", "s5_w1m10.json"])
def test_fast_checks_pass(name, tmp_path):
    cfg = _config(name, tmp_path)
    with mp.workprec(cfg.precision_bits):
        result = run_checks(cfg, only=lambda check: check in FAST)
    assert result["errors"] == []
    assert {c["check"] for c in result["checks"]} == FAST
    assert result["passed"], result["failed"]


def test_s5_without_defect_fails_closed_form_check(tmp_path):
    cfg = _config("s5_w1m10.json", tmp_path)
    cfg.expected_defect = Fraction(0)
    with mp.workprec(cfg.precision_bits):
        result = run_checks(cfg, only=lambda check: check == "orbit_coefficients")
    failing = [c["case"] for c in result["checks"] if not c["passed"]]
    assert failing == ["b1 k=(0,)", "b1 k=(1,)", "b1 k=(2,)"]


def test_off_zero_point_matches_three_quarters():
    model = SphereModel.from_config(1, [1, -1])
    p = find_zero_point(model)
    q = off_zero_point(model, p)
    assert abs(q.moduli_squared[0] - mp.mpf(3) / 4) < mp.mpf(10) ** -30
    ratio = szego_km_diag(model, (0,), 200, q) / szego_km_diag(model, (0,), 200, p)
    assert abs(ratio / mp.mpf("0.75") ** 100 - 1) < mp.mpf(10) ** -25


@pytest.mark.slow
@pytest.mark.parametrize("name", ["s3_w1m1.json", "s5_w1m10.json"])
def test_every_check_passes(name, tmp_path):
    cfg = _config(name, tmp_path)
    with mp.workprec(cfg.precision_bits):
        result = run_checks(cfg)
    assert result["errors"] == []
    assert {c["check"] for c in result["checks"]} == {c["name"] for c in CHECKS}
    assert result["passed"], result["failed"]


def test_character_laplacian_covers_both_tori(tmp_path):
    cfg = _config("s3_w1m1.json", tmp_path)
    with mp.workprec(cfg.precision_bits):
        result = run_checks(cfg, only=lambda check: check == "character_laplacian")
    cases = {c["case"]: c for c in result["checks"]}
    assert {label.split()[0] for label in cases} == {"standard", "effective"}
    assert all(c["passed"] for c in cases.values())
    effective = [c for label, c in cases.items() if label.startswith("effective")]
    k1 = next(c for c in effective if c["case"] == "effective k=(1,)")
    assert abs(k1["measured"] + mp.pi ** 2) < 1e-25
