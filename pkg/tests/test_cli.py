import json

import numpy as np
import pytest

from waveheat import cli


def run_cli(tmp_path, subcommand, toml=None, tag="t", extra=()):
    argv = [subcommand, "--output-dir", str(tmp_path / "out"), "--tag", tag, *extra]
    if toml is not None:
        cfg = tmp_path / "run.toml"
        cfg.write_text(toml)
        argv += ["--config", str(cfg)]
    return cli.main(argv)


def read_manifest(tmp_path, subcommand, tag="t"):
    return json.loads((tmp_path / "out" / f"{subcommand}-{tag}-manifest.json").read_text())


def test_simulate_zero_initial_data(tmp_path):
    code = run_cli(tmp_path, "simulate",
                   "[simulate]\nn1 = 8\nn2 = 8\ninitial = 'zero'\nt_end = 0.1\ndt = 0.01\nstride = 1\n")
    assert code == 0
    rows = (tmp_path / "out" / "simulate-t.csv").read_text().splitlines()
    assert rows[0] == "t,E,dissipation_cum,balance_residual"
    assert all(float(r.split(",")[1]) == 0.0 for r in rows[1:])
    assert len(rows) == 12


def test_spectrum_decoupled_heat(tmp_path):
    code = run_cli(tmp_path, "spectrum",
                   "[spectrum]\nn1 = 100\nn2 = 8\ncoupling = 'decoupled'\nblock = 'heat'\n")
    assert code == 0
    rows = (tmp_path / "out" / "spectrum-t.csv").read_text().splitlines()[1:6]
    re = np.array([float(r.split(",")[0]) for r in rows])
    np.testing.assert_allclose(re, -(np.arange(1, 6) * np.pi / 0.5) ** 2, rtol=0.01)


def test_malformed_gamma(tmp_path, capsys):
    code = run_cli(tmp_path, "spectrum", "[spectrum]\ngamma = 1.0\nlength = 1.0\n")
    assert code == cli.EXIT_CONFIG
    err = capsys.readouterr().err.strip()
    assert err.count("\n") == 0
    assert err.startswith("error: kind=config field=gamma ")


@pytest.mark.parametrize("toml, field", [
    ("[simulate]\nbogus = 1\n", "bogus"),
    ("[simulate]\nn1 = 2.5\n", "n1"),
    ("[simulate]\nscheme = 'rk4'\n", "scheme"),
    ("[simulate]\ndt = -1.0\n", "dt"),
    ("[simulate\n", "config"),
])
def test_config_errors(tmp_path, capsys, toml, field):
    assert run_cli(tmp_path, "simulate", toml) == cli.EXIT_CONFIG
    assert f"field={field} " in capsys.readouterr().err


def test_weight_config_error(tmp_path, capsys):
    assert run_cli(tmp_path, "classify", "[classify]\nalpha = 2.0\n") == cli.EXIT_CONFIG
    assert "field=alpha" in capsys.readouterr().err


def test_numerical_failure_exit(tmp_path, capsys, monkeypatch):
    from waveheat.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("eigenvalues", "forced")
    monkeypatch.setattr(cli.spectral, "eigenvalues", boom)
    assert run_cli(tmp_path, "spectrum", "[spectrum]\nn1 = 4\nn2 = 4\n") == cli.EXIT_NUMERICAL
    assert "operation=eigenvalues" in capsys.readouterr().err


def test_manifest_lists_every_default(tmp_path):
    assert run_cli(tmp_path, "resolvent", "[resolvent]\nn1 = 10\nn2 = 10\ncount = 5\n") == 0
    man = read_manifest(tmp_path, "resolvent")
    fields = {f.name for f in cli.dataclasses.fields(cli.ResolventConfig)}
    assert set(man["config"]) == fields
    assert man["config"]["mu_max"] == 100.0 and man["config"]["method"] == "lanczos"
    for name in man["artifacts"]:
        assert (tmp_path / "out" / name).exists()
    assert np.isfinite(man["results"]["envelope_slope"])


def test_auto_beta_recorded(tmp_path):
    assert run_cli(tmp_path, "classify", "[classify]\nsamples = 50\n") == 0
    man = read_manifest(tmp_path, "classify")
    assert man["config"]["M"] == man["results"]["beta_selection"]["M"] > 0


def test_default_tag_is_deterministic(tmp_path):
    out = tmp_path / "out"
    argv = ["classify", "--output-dir", str(out), "--config", str(tmp_path / "c.toml")]
    (tmp_path / "c.toml").write_text("[classify]\nsamples = 40\nM = 5.0\nseed = 3\n")
    assert cli.main(argv) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert cli.main(argv) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first
    assert len(first) == 2


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "envout"))
    assert cli.main(["classify", "--tag", "e", "--config", str(tmp_path / "x.toml")]) == 2
    (tmp_path / "x.toml").write_text("[classify]\nsamples = 10\nM = 5.0\n")
    assert cli.main(["classify", "--tag", "e", "--config", str(tmp_path / "x.toml")]) == 0
    assert (tmp_path / "envout" / "classify-e.csv").exists()


def test_probe_and_carleman_check_small(tmp_path):
    toml = ("[probe]\nM = 4.5\nnx = 32\nny = 33\nbumps = 3\nmu_count = 3\n"
            "[carleman-check]\nM = 5.0\ninterface_samples = 50\nregion_samples = 200\n")
    assert run_cli(tmp_path, "probe", toml) == 0
    assert read_manifest(tmp_path, "probe")["results"]["min_ratio"] > 0
    assert run_cli(tmp_path, "carleman-check", toml) == 0
    res = read_manifest(tmp_path, "carleman-check")["results"]
    assert res["h1"]["passed"]
    assert all(v["disagreements"] == 0 for v in res["root_signs"].values())
