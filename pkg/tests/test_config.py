import json
from fractions import Fraction

import pytest

from mpmath import mp

from equiszego.config import digits_for_roundtrip, load_run_config, parse_k, working_precision
from equiszego.errors import ConfigError


def _write(tmp_path, payload):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(payload))
    return path


BASE = {"name": "tiny", "model": {"n": 2, "weights": [1, -1, 0]}, "k": [0, 2],
        "m_range": {"min": 20, "max": 100}, "expected_defect": "1/16"}


def test_load_minimal(tmp_path):
    cfg = load_run_config(_write(tmp_path, BASE))
    assert cfg.name == "tiny"
    assert cfg.weights == [[1, -1, 0]]
    assert cfg.k_values == [(0,), (2,)]
    assert cfg.k == (0,)
    assert cfg.expected_defect == Fraction(1, 16)
    assert (cfg.m_min, cfg.m_max, cfg.fit_terms) == (20, 100, 5)


def test_overrides_replace_file_values(tmp_path):
    cfg = load_run_config(_write(tmp_path, BASE),
                          {"k": "1;3", "m_max": 200, "precision_bits": 192, "output_dir": str(tmp_path / "o")})
    assert cfg.k_values == [(1,), (3,)]
    assert cfg.m_max == 200
    assert cfg.precision_bits == 192
    assert cfg.output_dir == tmp_path / "o"


def test_relative_output_dir_resolves_under_project(tmp_path):
    cfg = load_run_config(_write(tmp_path, {**BASE, "output": {"dir": "data/runs/tiny"}}))
    assert cfg.output_dir.is_absolute()
    assert cfg.output_dir.parts[-3:] == ("data", "runs", "tiny")


@pytest.mark.parametrize("patch", [
    {"model": {"n": 2, "weights": [1, -1]}},
    {"model": {"n": 0, "weights": [1]}},
    {"m_range": {"min": 100, "max": 50}},
    {"k": [[0, 1]]},
    {"precision_bits": 32},
    {"expected_defect": "one"},
    {"tolerance_scale": -1},
    {"point": ["0.5", "0.5"]},
    {"point": ["-0.25", "0.75", "0.5"]},
    {"point": ["half", "0.5", "0"]},
    {"expand": []},
])
def test_schema_violations(tmp_path, patch):
    with pytest.raises(ConfigError):
        load_run_config(_write(tmp_path, {**BASE, **patch}))


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_run_config(bad)


def test_parse_k():
    assert parse_k("1", 1) == [(1,)]
    assert parse_k("1,0", 2) == [(1, 0)]
    assert parse_k("0;1;2", 1) == [(0,), (1,), (2,)]
    with pytest.raises(ConfigError):
        parse_k("1,0", 1)
    with pytest.raises(ConfigError):
        parse_k("x", 1)


def test_working_precision_floor():
    with pytest.raises(ValueError):
        with working_precision(32):
            pass


def test_roundtrip_digits_are_minimal():
    assert digits_for_roundtrip(53) == 17
    assert digits_for_roundtrip(128) == 40
    assert digits_for_roundtrip(256) == 79


@pytest.mark.parametrize("bits", [53, 64, 113, 128, 200, 256])
def test_roundtrip_digits_recover_every_bit(bits):
    with mp.workprec(bits):
        digits = digits_for_roundtrip()
        for seed in range(1, 40):
            x = mp.mpf(seed) / 7 + mp.mpf(seed) ** 3 * mp.pi
            assert mp.mpf(mp.nstr(x, digits, strip_zeros=False)) == x
