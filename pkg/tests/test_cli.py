import csv
import json
import math

import numpy as np
import pytest

from kljn.cli import main
from kljn.core import SystemConfig
from kljn.fileio import load_config, parse_config_text, read_trace_csv
from kljn.noise import estimate_psd, NoiseTrace
from kljn._validation import ConfigurationError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestConfigFile:
    def test_parse(self):
        text = "# comment\nr0 = 1000\n\nbeta = 0.3  # trailing\n"
        assert parse_config_text(text) == {"r0": 1000.0, "beta": 0.3}

    @pytest.mark.parametrize("text", ["r0 1000", "colour = 3", "beta = high"])
    def test_bad_lines(self, text):
        with pytest.raises(ConfigurationError):
            parse_config_text(text)

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("gamma = 64\nbeta = 0.3\n")
        cfg = load_config(path, {"beta": 0.2, "delta": None})
        assert (cfg.gamma, cfg.beta, cfg.delta) == (64.0, 0.2, SystemConfig().delta)


class TestPredict:
    def test_default_row(self, capsys):
        code, out, _ = run(capsys, "predict", "--beta", "0.5", "--gamma", "100")
        assert code == 0
        row = list(csv.DictReader(out.splitlines()))[0]
        assert float(row["eps_rice"]) == pytest.approx(1.11454821520929e-3, rel=1e-12)
        assert float(row["eps_tail"]) == pytest.approx(2.03476008722479e-4, rel=1e-12)

    def test_doubled_gamma_row(self, capsys):
        code, out, _ = run(capsys, "predict", "--beta", "0.5", "--gamma", "200", "--json")
        rows = json.loads(out)
        assert rows[0]["eps_rice"] == pytest.approx(2.15158421207599e-6, rel=1e-12)

    def test_zero_beta_warns(self, capsys):
        code, out, err = run(capsys, "predict", "--beta", "0", "--gamma", "100")
        assert code == 0 and "warning" in err
        assert float(list(csv.DictReader(out.splitlines()))[0]["eps_rice"]) == pytest.approx(0.5773502692)

    def test_grid_and_files(self, capsys, tmp_path):
        code, _, _ = run(capsys, "predict", "--beta", "0.3,0.5", "--gamma", "16 32 64", "--out", str(tmp_path))
        rows = read_csv(tmp_path / "predict.csv")
        assert len(rows) == 6
        man = json.loads((tmp_path / "manifest.json").read_text())
        assert man["subcommand"] == "predict" and man["args"]["beta"] == [0.3, 0.5]

    @pytest.mark.parametrize("argv", [["--beta", "1.5"], ["--gamma", "-3"]])
    def test_invalid_ranges(self, capsys, argv):
        code, _, err = run(capsys, "predict", *argv)
        assert code == 2 and "error" in err


class TestSimulate:
    def test_fixed_00(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--gamma", "16", "--beta", "0.4", "--situation", "00",
                         "--trials", "3000", "--seed", "7", "--out", str(tmp_path))
        assert code == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        eps = summary["eps_00"]
        assert eps["ci_low"] <= eps["p_hat"] <= eps["ci_high"]
        assert 0.08 < eps["p_hat"] < 0.2
        assert summary["eps_11"] == "insufficient-data"
        man = json.loads((tmp_path / "manifest.json").read_text())
        assert man["config"]["gamma"] == 16.0 and man["seed"] == 7
        assert sorted(p.split("/")[-1] for p in man["outputs"]) == ["summary.json", "tally.csv"]

    def test_fixed_01_has_no_eps00(self, capsys):
        code, out, _ = run(capsys, "simulate", "--situation", "01", "--trials", "50")
        assert code == 0
        assert json.loads(out)["eps_00"] == "insufficient-data"

    def test_byte_identical(self, capsys, tmp_path):
        for d in ("a", "b"):
            run(capsys, "simulate", "--trials", "300", "--gamma", "16", "--beta", "0.4",
                "--seed", "42", "--out", str(tmp_path / d))
        assert (tmp_path / "a" / "tally.csv").read_bytes() == (tmp_path / "b" / "tally.csv").read_bytes()

    def test_band_violation(self, capsys):
        code, _, err = run(capsys, "simulate", "--beta", "0.7", "--trials", "10")
        assert code == 2 and "0.636" in err

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "k.cfg"
        cfg.write_text("gamma = 16\nbeta = 0.4\nr1 = 8000\n")
        code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--trials", "20", "--json")
        assert code == 0 and json.loads(out)["n_total"] == 20

    def test_io_error(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run(capsys, "simulate", "--trials", "5", "--out", str(blocker / "sub"))
        assert code == 3 and "I/O" in err


class TestSweep:
    def test_rows(self, capsys, tmp_path):
        code, _, _ = run(capsys, "sweep", "--gamma-list", "8,16,32", "--beta-list", "0.4",
                         "--trials-per-cell", "4000", "--out", str(tmp_path))
        assert code == 0
        rows = read_csv(tmp_path / "sweep.csv")
        emp = [float(r["eps_empirical"]) for r in rows]
        assert emp[0] > emp[1] > emp[2]
        for r in rows:
            beta, gamma = float(r["beta"]), float(r["gamma"])
            assert math.log(math.sqrt(3) * float(r["eps_rice"])) == pytest.approx(-beta ** 2 * gamma / 4, rel=1e-12)

    def test_empty_list(self, capsys):
        code, _, _ = run(capsys, "sweep", "--gamma-list", "", "--beta-list", "0.4")
        assert code == 2


class TestTrace:
    def test_row_count_and_header(self, capsys, tmp_path):
        code, _, _ = run(capsys, "trace", "--situation", "00", "--out", str(tmp_path))
        assert code == 0
        cfg = SystemConfig()
        lines = (tmp_path / "u_ch.csv").read_text().splitlines()
        assert lines[0] == "t_seconds,value"
        assert len(lines) - 1 == round(cfg.tau * cfg.sample_rate)
        assert (tmp_path / "i_ch.csv").exists()

    def test_full_precision(self, capsys, tmp_path):
        run(capsys, "trace", "--out", str(tmp_path))
        value = (tmp_path / "u_ch.csv").read_text().splitlines()[5].split(",")[1]
        assert len(value.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) >= 15

    def test_swap_symmetry(self, capsys, tmp_path):
        run(capsys, "trace", "--situation", "01", "--seed", "3", "--out", str(tmp_path / "a"))
        run(capsys, "trace", "--situation", "10", "--seed", "3", "--swap-generators", "--out", str(tmp_path / "b"))
        _, ua = read_trace_csv(tmp_path / "a" / "u_ch.csv")
        _, ub = read_trace_csv(tmp_path / "b" / "u_ch.csv")
        assert np.array_equal(ua, ub)

    def test_exported_psd_flat(self, capsys, tmp_path):
        run(capsys, "trace", "--situation", "00", "--gamma", "20000", "--out", str(tmp_path))
        t, u = read_trace_csv(tmp_path / "u_ch.csv")
        cfg = SystemConfig()
        f, p = estimate_psd(NoiseTrace(u, t[1] - t[0]), n_segments=78)
        level_00 = 1.0  # V^2 for the default loop
        density = level_00 / cfg.bandwidth
        in_band = (f > 50) & (f < 950)
        assert np.mean(p[in_band]) == pytest.approx(density, rel=0.2)
        assert np.all(np.abs(p[in_band] / density - 1) < 0.6)


class TestLevels:
    def test_default(self, capsys):
        code, out, _ = run(capsys, "levels", "--json")
        table = json.loads(out)
        assert table["threshold_bound"] == pytest.approx(0.6363636363636364, rel=1e-15)
        v = table["voltage_V2"]
        assert v["level_00"] < v["level_mid"] < v["level_11"]
        assert v["delta_1"] == 0.5 * v["level_00"]

    def test_human_table(self, capsys):
        code, out, _ = run(capsys, "levels")
        assert code == 0 and "bound" in out and "0.636364" in out
