import json

import pytest
from mpmath import mp

from equiszego.cli import main, parse_coefficient, parse_terms
from equiszego.errors import ConfigError


@pytest.fixture
def s3_config(tmp_path):
    payload = {
        "name": "tiny_s3",
        "model": {"n": 1, "weights": [[1, -1]]},
        "k": [0, 1],
        "m_range": {"min": 20, "max": 100},
        "fit_terms": 5,
        "precision_bits": 128,
        "expand": {"num_vars": 1, "jmax": 2, "phase": [[[2], [0, 1]], [[4], [0, 1]]], "m": [50]},
        "output": {"dir": str(tmp_path / "out")},
    }
    path = tmp_path / "tiny_s3.json"
    path.write_text(json.dumps(payload))
    return path


def _report(path):
    return json.loads(path.read_text())


def test_missing_config_exits_2(tmp_path):
    assert main(["coeffs", "--config", str(tmp_path / "absent.json")]) == 2


def test_bad_k_override_exits_2(s3_config):
    assert main(["coeffs", "--config", str(s3_config), "--k", "1,0"]) == 2


def test_kernel_then_fit_from_csv(s3_config, tmp_path):
    assert main(["kernel", "--config", str(s3_config), "--k", "1"]) == 0
    csv = tmp_path / "out" / "kernel_tiny_s3_k1.csv"
    assert csv.exists()

    assert main(["fit", "--config", str(s3_config), "--input", str(csv)]) == 0
    report = _report(tmp_path / "out" / "fit_tiny_s3.json")
    fit = report["fits"][0]
    assert fit["k"] == [1]
    assert fit["exponent_base"] == "1/2"
    b0 = mp.mpf(fit["coeffs"][0])
    assert abs(b0 / (1 / (mp.sqrt(2) * mp.pi ** mp.mpf(2.5))) - 1) < 1e-6


def test_coeffs_report(s3_config, tmp_path):
    assert main(["coeffs", "--config", str(s3_config)]) == 0
    report = _report(tmp_path / "out" / "coeffs_tiny_s3.json")
    assert report["report_version"] == 1
    entry = report["coefficients"][1]
    assert entry["k"] == [1]
    assert entry["stabilizer_order"] == 2
    assert abs(mp.mpf(entry["b1_global"]) / mp.mpf(entry["b0"]) - mp.mpf(1) / 4) < 1e-20


def test_expand_report(s3_config, tmp_path, capsys):
    assert main(["expand", "--config", str(s3_config)]) == 0
    report = _report(tmp_path / "out" / "expand_tiny_s3.json")
    assert abs(mp.mpf(report["terms"][1]["re"]) + mp.mpf(3) / 4) < 1e-25
    assert report["prefactor_power"] == "-1/2"
    assert "L_1 u" in capsys.readouterr().out


def test_verify_selected_checks(s3_config, tmp_path):
    assert main(["verify", "--config", str(s3_config), "--check", "sp_gaussian",
                 "--check", "b1_local_global"]) == 0
    report = _report(tmp_path / "out" / "verify_tiny_s3.json")
    assert report["passed"] is True
    assert {c["check"] for c in report["checks"]} == {"sp_gaussian", "b1_local_global"}
    assert len(report["methodology"]["checks"]) >= 16


def test_verify_failure_exits_1(s3_config, tmp_path):
    # finite differences cannot reach a tolerance of 1e-38
    assert main(["verify", "--config", str(s3_config), "--check", "character_laplacian",
                 "--tolerance-scale", "1e-30"]) == 1
    report = _report(tmp_path / "out" / "verify_tiny_s3.json")
    assert report["failed"] == ["character_laplacian"]


def test_parse_coefficient():
    assert parse_coefficient(2) == 2
    assert parse_coefficient("0.5j") == mp.mpc(0, 0.5)
    assert parse_coefficient([0, 1]) == mp.j
    with pytest.raises(ConfigError):
        parse_coefficient({"re": 1})


def test_parse_terms_rejects_wrong_arity():
    with pytest.raises(ConfigError):
        parse_terms([[[2, 0], 1]], 1, 4, "phase")
    with pytest.raises(ConfigError):
        parse_terms([], 1, 4, "phase")


def _config_with(tmp_path, **model_fields):
    payload = {"name": "bad", "model": {"n": 2, "weights": [[1, 1, 1], [2, 2, 2]]}, "k": [[0, 0]],
               "m_range": {"min": 20, "max": 40}, "output": {"dir": str(tmp_path / "out")}}
    payload.update(model_fields)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    return path


@pytest.mark.parametrize("command", ["coeffs", "kernel", "verify", "report"])
def test_rank_deficient_weights_exit_2(tmp_path, command, capsys):
    assert main([command, "--config", str(_config_with(tmp_path))]) == 2
    assert "full rank" in capsys.readouterr().err


def test_torus_larger_than_sphere_exits_2(tmp_path):
    path = _config_with(tmp_path, model={"n": 1, "weights": [[1, -1], [1, 0]]}, k=[[0, 0]])
    assert main(["coeffs", "--config", str(path)]) == 2


def test_point_off_sphere_exits_2(tmp_path):
    path = _config_with(tmp_path, model={"n": 1, "weights": [[1, -1]]}, k=[0], point=["0.5", "0.75"])
    assert main(["coeffs", "--config", str(path)]) == 2


@pytest.mark.parametrize("expand", [
    {"num_vars": 1, "jmax": "two", "phase": [[[2], [0, 1]]]},
    {"num_vars": 1, "jmax": -1, "phase": [[[2], [0, 1]]]},
    {"num_vars": 1, "jmax": 1, "order": 1, "phase": [[[2], [0, 1]]]},
    {"num_vars": 1, "jmax": 1, "phase": [[[2], [0, 1]]], "m": [10, "x"]},
])
def test_bad_expand_section_exits_2(s3_config, expand):
    payload = json.loads(s3_config.read_text())
    payload["expand"] = expand
    s3_config.write_text(json.dumps(payload))
    assert main(["expand", "--config", str(s3_config)]) == 2


def test_expansion_report_reads_back(s3_config, tmp_path):
    assert main(["report", "--config", str(s3_config)]) == 0
    report = _report(tmp_path / "out" / "report_tiny_s3.json")
    assert report["report_version"] == 1
    assert report["errors"] == []
    assert report["exponent_base"] == "1/2"
    assert report["config"]["name"] == "tiny_s3"
    assert report["config"]["k_values"] == [[0], [1]]
    assert report["config"]["output_dir"] == str(tmp_path / "out")
    assert set(report["timings"]) == {"setup", "geometry", "predicted", "fit"}
    assert all(seconds >= 0 for seconds in report["timings"].values())

    entry = report["expansions"][1]
    assert entry["k"] == [1]
    fit, predicted = entry["fit"], entry["predicted"]
    assert len(fit["coeffs"]) == len(fit["uncertainties"]) == 5
    assert mp.mpf(entry["relative_errors"]["b0"]) < 1e-6
    assert mp.mpf(entry["relative_errors"]["b1_global"]) < 1e-2
    assert abs(mp.mpf(predicted["b1_global"]) / mp.mpf(predicted["b0"]) - mp.mpf(1) / 4) < 1e-20

    geometry = entry["geometry"]
    assert geometry["stabilizer_order"] == 2
    assert abs(mp.mpf(geometry["invariants"]["V_eff"]) - mp.pi) < 1e-30
    assert abs(mp.mpf(geometry["invariants"]["R"]) - 2) < 1e-30
    assert abs(mp.mpf(geometry["invariants"]["lap_char"]) + mp.pi ** 2) < 1e-25
