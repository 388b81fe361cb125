import json

import pytest

from autocov_spectra import cli


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestConfigLoading:
    def test_missing_file(self, tmp_path, capsys):
        status = cli.run("esd", str(tmp_path / "nope.json"))
        assert status == cli.EXIT_CONFIG
        assert "not found" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert cli.run("esd", str(path)) == cli.EXIT_CONFIG
        assert "not valid JSON" in capsys.readouterr().err

    def test_missing_key_named(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 16, "N": 16, "k": 1, "trials": 1})
        assert cli.run("esd", cfg) == cli.EXIT_CONFIG
        assert "seed" in capsys.readouterr().err

    def test_unknown_subcommand(self, tmp_path):
        cfg = write_config(tmp_path, {})
        assert cli.run("frobnicate", cfg) == cli.EXIT_CONFIG

    def test_set_override(self, tmp_path):
        cfg = cli.load_config(write_config(tmp_path, {"n": 16}),
                              overrides=["n=32", "grid.step=0.5"])
        assert cfg["n"] == 32
        assert cfg["grid"]["step"] == 0.5

    def test_env_override_and_set_precedence(self, tmp_path):
        path = write_config(tmp_path, {"n": 16, "grid": {"step": 0.1}})
        cfg = cli.load_config(
            path, overrides=["n=64"],
            env={"AUTOCOV_N": "32", "AUTOCOV_GRID__STEP": "0.2"})
        assert cfg["n"] == 64  # --set wins over environment
        assert cfg["grid"]["step"] == 0.2

    def test_malformed_override(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            cli.load_config(write_config(tmp_path, {}), overrides=["oops"])


class TestParseComplex:
    def test_forms(self):
        assert cli._parse_complex(2) == 2 + 0j
        assert cli._parse_complex([1, -2]) == 1 - 2j
        assert cli._parse_complex("1+1j") == 1 + 1j
        assert cli._parse_complex("1+1i") == 1 + 1j

    def test_garbage(self):
        with pytest.raises(cli.ConfigError):
            cli._parse_complex("spam")


class TestLimitLawTable:
    def test_table_shape_and_endpoint(self, tmp_path):
        cfg = write_config(tmp_path, {
            "gamma0": 1.0,
            "grid": {"start": 0.0, "stop": 2.0 ** 0.5, "step": 0.01},
        })
        out = tmp_path / "out"
        assert cli.main(["limit-law-table", cfg, "--output-dir", str(out)]) == cli.EXIT_OK
        lines = (out / "limit_law_cdf.csv").read_text().strip().splitlines()
        assert len(lines) == 143  # header + 142 rows
        assert float(lines[-1].split(",")[1]) == pytest.approx(1.0, abs=1e-12)

    def test_manifest_written(self, tmp_path):
        cfg = write_config(tmp_path, {
            "gamma0": 2.0,
            "grid": {"start": 0.0, "stop": 6.0 ** 0.5, "step": 0.1},
        })
        out = tmp_path / "out"
        assert cli.run("limit-law-table", cfg, output_dir=str(out)) == cli.EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "limit-law-table"
        assert manifest["outputs"] == ["limit_law_cdf.csv"]
        assert manifest["config"]["gamma0"] == 2.0

    def test_grid_keys_required(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"gamma0": 1.0, "grid": {"start": 0.0}})
        assert cli.run("limit-law-table", cfg, output_dir=str(tmp_path / "o")) == cli.EXIT_CONFIG
        assert "stop" in capsys.readouterr().err


class TestEsdRun:
    def test_reproducible_outputs(self, tmp_path):
        cfg = write_config(tmp_path, {
            "n": 48, "N": 48, "k": 1, "seed": 21, "trials": 1,
            "thresholds": {"radial_ks": 0.5},
        })
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert cli.run("esd", cfg, output_dir=str(out1)) == cli.EXIT_OK
        assert cli.run("esd", cfg, output_dir=str(out2)) == cli.EXIT_OK
        for name in ("eigenvalues.csv", "radial_cdf.csv", "esd_report.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert len(manifest["resolved_seeds"]) == 1


class TestFixedPointRun:
    def test_prediction_only(self, tmp_path):
        cfg = write_config(tmp_path, {
            "gamma0": 1.0, "gamma1": 0.5,
            "z_list": [1.0, [1.0, 1.0]], "t_list": [0.5, 1.0],
        })
        out = tmp_path / "out"
        assert cli.run("fixed-point", cfg, output_dir=str(out)) == cli.EXIT_OK
        lines = (out / "fixed_point.csv").read_text().strip().splitlines()
        assert len(lines) == 5  # header + 2 z * 2 t


class TestLawDiagnostics:
    def test_c2_violation_exits_two(self, tmp_path):
        cfg = write_config(tmp_path, {
            "law": "real-gaussian", "n": 64, "seed": 1, "sample_count": 20000,
        })
        assert cli.run("law-diagnostics", cfg, output_dir=str(tmp_path / "o")) == cli.EXIT_ASSERTION

    def test_ok_law(self, tmp_path):
        cfg = write_config(tmp_path, {
            "law": "complex-gaussian", "n": 64, "seed": 1, "sample_count": 20000,
        })
        assert cli.run("law-diagnostics", cfg, output_dir=str(tmp_path / "o")) == cli.EXIT_OK

    def test_unknown_law(self, tmp_path):
        cfg = write_config(tmp_path, {"law": "cauchy", "n": 64, "seed": 1})
        assert cli.run("law-diagnostics", cfg, output_dir=str(tmp_path / "o")) == cli.EXIT_CONFIG


class TestLargeKRun:
    def test_small_lag_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "n": 64, "N": 64, "k": 1, "seed": 1, "trials": 1,
            "z_list": [1.0], "t_list": [0.5],
        })
        assert cli.run("large-k", cfg, output_dir=str(tmp_path / "o")) == cli.EXIT_CONFIG
        assert "k >= n/2" in capsys.readouterr().err
