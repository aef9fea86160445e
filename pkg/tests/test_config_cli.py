import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosserat_shell import __version__, cli
from cosserat_shell.config import (RunConfig, SurfaceConfig, config_hash, parse_config, parse_config_text,
                                   serialize)
from cosserat_shell.errors import ConfigError
from cosserat_shell.material import MaterialParams

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
MINIMAL = "[material]\nmu = 1\nlam = 0.5\n"


def test_minimal_config_fills_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.surface.name == "plate" and cfg.material.h == 0.1 and cfg.run.seed == 0
    assert cfg.integrate.n_gauss_x3 == 8


def test_negative_mu_names_the_field():
    with pytest.raises(ConfigError, match="mu must be positive"):
        parse_config_text("[material]\nmu = -1\nlam = 1\n")


@pytest.mark.parametrize("text,match", [
    (MINIMAL + "muu = 2\n", r":4: unknown key 'muu'"),
    (MINIMAL + "[extras]\n", r":4: unknown section"),
    ("[material]\nmu = 1\nlam\n", r":3: parse error"),
    (MINIMAL + "h = nan\n", "finite"),
    (MINIMAL + "[surface]\nname = torus\n", "surface.name"),
    (MINIMAL + "[run]\nsamples = many\n", r"run.samples"),
    ("[surface]\nname = plate\n", "material"),
    (MINIMAL + "[integrate]\nn_gauss_x3 = 4\n", "n_gauss_x3"),
])
def test_bad_configs(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text, "run.ini")


def test_shipped_configs_parse():
    for p in sorted(CONFIGS.glob("*.ini")):
        cfg = parse_config(p)
        assert parse_config_text(serialize(cfg)) == cfg


pos = st.floats(0.01, 100, allow_nan=False)


@given(mu=pos, lam=pos, mu_c=st.floats(0, 10), h=st.floats(1e-3, 0.4), seed=st.integers(0, 2**63),
       name=st.sampled_from(["plate", "cylinder", "sphere", "hyperbolic_paraboloid"]),
       hs=st.lists(st.floats(1e-4, 0.1), min_size=1, max_size=4), tol=st.none() | pos)
def test_serialize_round_trip(mu, lam, mu_c, h, seed, name, hs, tol):
    from cosserat_shell.config import IntegrateOptions, RunOptions
    cfg = RunConfig(surface=SurfaceConfig(name=name), material=MaterialParams(mu=mu, lam=lam, mu_c=mu_c, h=h),
                    run=RunOptions(seed=seed, tol=tol), integrate=IntegrateOptions(h_list=tuple(hs)))
    back = parse_config_text(serialize(cfg))
    assert back == cfg and config_hash(back) == config_hash(cfg)


def test_polynomial_coefficients_round_trip():
    cfg = parse_config_text(MINIMAL + "[surface]\nname = polynomial\ncoeffs = 2 0 0.5; 1 1 -0.25\n")
    assert cfg.surface.coeffs == ((2, 0, 0.5), (1, 1, -0.25))
    assert parse_config_text(serialize(cfg)) == cfg


def _run(tmp_path, command, config, *extra):
    out = tmp_path / command
    code = cli.main([command, "--config", str(CONFIGS / config), "--out", str(out), *extra])
    return code, out


def test_verify_on_plate(tmp_path):
    code, out = _run(tmp_path, "verify", "plate.ini")
    assert code == 0
    doc = json.loads((out / "verify.json").read_text())
    assert doc["pass"] and doc["header"].startswith(f"cosserat_shell {__version__}")
    assert all(s["pass"] for s in doc["suites"])


def test_verify_fails_with_impossible_tolerance(tmp_path, capsys):
    code, _ = _run(tmp_path, "verify", "plate.ini", "--tol", "1e-40")
    assert code == 1
    assert "worst sample at x" in capsys.readouterr().err


def test_integrate_on_cylinder_and_sphere(tmp_path):
    code, out = _run(tmp_path, "integrate", "cylinder.ini")
    doc = json.loads((out / "integrate.json").read_text())
    assert code == 0 and doc["status"] == "pass" and 6.3 <= doc["slope"] <= 7.7
    code, out = _run(tmp_path, "integrate", "sphere.ini")
    assert code == 0 and json.loads((out / "integrate.json").read_text())["status"] == "exact"


def test_compare_with_zero_couple_modulus(tmp_path):
    code, out = _run(tmp_path, "compare", "compare_muc0.ini")
    lines = (out / "compare.csv").read_text().splitlines()
    assert code == 0 and lines[0].startswith("# cosserat_shell")
    cols = lines[1].split(",")
    row = dict(zip(cols, lines[2].split(",")))
    assert row["alpha2"] == row["alpha3"] and float(row["mu_c_drill"]) == 0.0


def test_reduce_and_solve_outputs(tmp_path):
    code, out = _run(tmp_path, "reduce", "sphere.ini")
    assert code == 0 and len((out / "reduce.csv").read_text().splitlines()) == 2 + 64
    code, out = _run(tmp_path, "solve", "cantilever.ini")
    report = json.loads((out / "report.json").read_text())
    assert code == 0 and report["converged"] and report["breakdown"]["total"] < 0
    assert len((out / "solution.csv").read_text().splitlines()) == 2 + 13 * 9


def test_outputs_are_byte_identical(tmp_path):
    a = cli.main(["verify", "--config", str(CONFIGS / "sphere.ini"), "--out", str(tmp_path / "a"), "--threads", "1"])
    b = cli.main(["verify", "--config", str(CONFIGS / "sphere.ini"), "--out", str(tmp_path / "b"), "--threads", "3"])
    assert a == b == 0
    assert (tmp_path / "a" / "verify.json").read_bytes() == (tmp_path / "b" / "verify.json").read_bytes()


def test_seed_changes_samples(tmp_path):
    cli.main(["reduce", "--config", str(CONFIGS / "sphere.ini"), "--out", str(tmp_path / "a"), "--seed", "1"])
    cli.main(["reduce", "--config", str(CONFIGS / "sphere.ini"), "--out", str(tmp_path / "b"), "--seed", "2"])
    assert (tmp_path / "a" / "reduce.csv").read_text() != (tmp_path / "b" / "reduce.csv").read_text()


def test_missing_config_exits_two(tmp_path, capsys):
    assert cli.main(["verify", "--config", str(tmp_path / "nope.ini")]) == 2
    assert "not found" in capsys.readouterr().err
