import csv
import json
import math
import os
import re
import shutil
import textwrap
from pathlib import Path

import numpy as np
import pytest

from gaussheat import BrownianMotion, Interval, fit_power_law
from gaussheat.cli import (
    COLUMNS,
    FIT_COLUMNS,
    VERIFY_DEFAULTS,
    csv_text,
    load_config,
    main,
)
from gaussheat.errors import ConfigError
from gaussheat.plots import Figure, Series, render

GOLDEN = Path(__file__).parent / "golden"

BM_SHC = """
[process]
family = bm
variance_rate = 1

[domain]
kind = interval
a = 0
b = 1

[run]
mode = estimate-shc
t_max = 1e-2
n_t = 3
grid_size = 256
n_paths = 3000
seed = 7
bias_control = bridge
"""


def write_config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def clean_env(monkeypatch):
    for key in list(os.environ):
        if key.startswith("GHC_"):
            monkeypatch.delenv(key)
    return monkeypatch


class TestGolden:
    def test_predict_matches_golden(self, tmp_path, clean_env):
        out = tmp_path / "out"
        assert main(["--config", str(GOLDEN / "predict_bm.ini"), "--out", str(out)]) == 0
        assert (out / "results.csv").read_bytes() == (GOLDEN / "predict_bm.csv").read_bytes()
        assert (out / "deficit.svg").read_bytes() == \
            (GOLDEN / "predict_bm_deficit.svg").read_bytes()

    def test_predict_values(self, tmp_path, clean_env):
        out = tmp_path / "out"
        main(["--config", str(GOLDEN / "predict_bm.ini"), "--out", str(out)])
        rows = read_rows(out / "results.csv")
        assert rows[0] == COLUMNS["predict"]
        t = np.array([float(r[0]) for r in rows[1:]])
        pred = np.array([float(r[2]) for r in rows[1:]])
        assert t == pytest.approx(np.geomspace(1e-4, 1e-1, 4), rel=1e-15)
        # BM(v=2) on (0,1): 2 mu_t = 2 sqrt(4t/pi)
        assert pred == pytest.approx(4 * np.sqrt(t / np.pi), rel=1e-14)

    def test_metadata(self, tmp_path, clean_env):
        out = tmp_path / "out"
        main(["--config", str(GOLDEN / "predict_bm.ini"), "--out", str(out)])
        meta = json.loads((out / "run_metadata.json").read_text())
        assert meta["mode"] == "predict"
        assert meta["columns"] == COLUMNS["predict"]
        assert meta["config"]["process"]["family"] == "bm"
        assert set(meta["versions"]) == {"gaussheat", "python", "numpy", "scipy"}


class TestConfigErrors:
    @pytest.mark.parametrize("text", [
        "[process]\nfamily = bm\n",
        "not an ini file",
        BM_SHC.replace("family = bm", "family = levy"),
        BM_SHC.replace("t_max = 1e-2", "t_max = 2"),
        BM_SHC.replace("n_paths = 3000", "n_paths = 0"),
        BM_SHC.replace("mode = estimate-shc", "mode = guess"),
        BM_SHC.replace("kind = interval", "kind = ball\ndim = 2"),
    ])
    def test_exit_two_without_output(self, tmp_path, clean_env, text, capsys):
        out = tmp_path / "out"
        assert main(["--config", write_config(tmp_path, text), "--out", str(out)]) == 2
        assert not (out / "results.csv").exists()
        assert "config error" in capsys.readouterr().err

    def test_missing_config(self, clean_env):
        assert main([]) == 2

    def test_bridge_on_ball(self, tmp_path):
        text = BM_SHC.replace("kind = interval", "kind = ball\ndim = 2\nradius = 1")
        with pytest.raises(ConfigError, match="bridge"):
            load_config(write_config(tmp_path, text))

    def test_bridge_needs_brownian_increments(self, tmp_path):
        text = BM_SHC.replace("family = bm", "family = fbm\nhurst = 0.75")
        with pytest.raises(ConfigError):
            load_config(write_config(tmp_path, text))

    def test_grid_warning(self, tmp_path):
        text = BM_SHC.replace("grid_size = 256", "grid_size = 300")
        with pytest.warns(UserWarning, match="power of two"):
            load_config(write_config(tmp_path, text))

    def test_verify_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path, BM_SHC))
        assert cfg.verify["rhc_ratio_tol"] == float(VERIFY_DEFAULTS["rhc_ratio_tol"])
        assert cfg.verify["shc_times"] == []

    def test_default_ladder(self, tmp_path):
        cfg = load_config(write_config(tmp_path, BM_SHC))
        assert cfg.times == pytest.approx([2.5e-3, 5e-3, 1e-2])


class TestEstimate:
    def test_bit_identical_reruns(self, tmp_path, clean_env):
        config = write_config(tmp_path, BM_SHC)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["--config", config, "--out", str(a)]) == 0
        assert main(["--config", config, "--out", str(b), "--threads", "2"]) == 0
        for name in ("results.csv", "deficit.svg", "ratio.svg"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_changes_output(self, tmp_path, clean_env):
        config = write_config(tmp_path, BM_SHC)
        a, b = tmp_path / "a", tmp_path / "b"
        main(["--config", config, "--out", str(a)])
        main(["--config", config, "--out", str(b), "--seed", "8"])
        assert (a / "results.csv").read_bytes() != (b / "results.csv").read_bytes()

    def test_columns_and_snapping(self, tmp_path, clean_env):
        out = tmp_path / "out"
        main(["--config", write_config(tmp_path, BM_SHC), "--out", str(out)])
        rows = read_rows(out / "results.csv")
        assert rows[0] == COLUMNS["estimate-shc"]
        step = 1e-2 / 256
        for r in rows[1:]:
            t = float(r[0])
            assert t / step == pytest.approx(round(t / step), abs=1e-9)
            assert float(r[rows[0].index("limit")]) == 2.0

    def test_estimate_rhc_exact_column(self, tmp_path, clean_env):
        text = BM_SHC.replace("mode = estimate-shc", "mode = estimate-rhc") \
            .replace("n_paths = 3000", "n_paths = 4000")
        out = tmp_path / "out"
        assert main(["--config", write_config(tmp_path, text), "--out", str(out)]) == 0
        rows = read_rows(out / "results.csv")
        cols = rows[0]
        assert cols == COLUMNS["estimate-rhc"]
        for r in rows[1:]:
            deficit = float(r[cols.index("deficit")])
            exact = float(r[cols.index("exact_deficit")])
            se = float(r[cols.index("h_stderr")])
            assert abs(deficit - exact) <= 5 * se


class TestOverrides:
    def test_env_overrides(self, tmp_path, clean_env):
        out = tmp_path / "env_out"
        clean_env.setenv("GHC_CONFIG", str(GOLDEN / "predict_bm.ini"))
        clean_env.setenv("GHC_OUT", str(out))
        assert main([]) == 0
        assert (out / "results.csv").exists()

    def test_flags_beat_env(self, tmp_path, clean_env):
        config = write_config(tmp_path, BM_SHC)
        clean_env.setenv("GHC_MODE", "estimate-rhc")
        clean_env.setenv("GHC_SEED", "3")
        clean_env.setenv("GHC_OUT", str(tmp_path / "env_out"))
        out = tmp_path / "flag_out"
        assert main(["--config", config, "--mode", "predict", "--out", str(out)]) == 0
        meta = json.loads((out / "run_metadata.json").read_text())
        assert meta["mode"] == "predict"
        assert meta["seed"] == 3
        assert not (tmp_path / "env_out").exists()


class TestVerify:
    VERIFY = BM_SHC.replace("mode = estimate-shc", "mode = verify") \
        .replace("n_paths = 3000", "n_paths = 20000") \
        .replace("grid_size = 256", "grid_size = 1024")

    def test_pass(self, tmp_path, clean_env, capsys):
        out = tmp_path / "out"
        text = self.VERIFY + "\n[verify]\nshc_ratio_tol = 0.15\n"
        assert main(["--config", write_config(tmp_path, text), "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "PASS rhc_ratio" in printed and "FAIL" not in printed
        meta = json.loads((out / "run_metadata.json").read_text())
        assert meta["passed"] is True
        assert meta["tolerances"]["shc_ratio_tol"] == 0.15
        assert meta["tolerances"]["ci_k"] == float(VERIFY_DEFAULTS["ci_k"])
        rows = read_rows(out / "results.csv")
        assert rows[0] == COLUMNS["verify"]
        assert {r[0] for r in rows[1:]} >= {"rhc_error_below_bound", "rhc_ratio",
                                            "shc_ratio", "q_below_h", "q_monotone"}

    def test_impossible_tolerance_fails(self, tmp_path, clean_env, capsys):
        out = tmp_path / "out"
        text = self.VERIFY + "\n[verify]\nrhc_ratio_tol = 1e-300\n"
        assert main(["--config", write_config(tmp_path, text), "--out", str(out)]) == 1
        assert "FAIL rhc_ratio" in capsys.readouterr().out
        assert json.loads((out / "run_metadata.json").read_text())["passed"] is False


class TestSweep:
    def test_twelve_point_rhc_sweep(self, tmp_path, clean_env):
        text = """
        [process]
        family = fbm
        hurst = 0.75

        [domain]
        kind = interval

        [run]
        mode = sweep
        target = rhc
        t_min = 1e-4
        t_max = 1e-2
        n_t = 12
        """
        out = tmp_path / "out"
        assert main(["--config", write_config(tmp_path, text), "--out", str(out)]) == 0
        rows = read_rows(out / "results.csv")
        assert rows[0] == COLUMNS["sweep"]
        t = [float(r[0]) for r in rows[1:]]
        assert len(t) == 12 and all(b > a for a, b in zip(t, t[1:]))
        fit = read_rows(out / "fit.csv")
        assert fit[0] == FIT_COLUMNS
        assert float(fit[1][1]) == pytest.approx(0.75, abs=0.01)
        assert float(fit[1][6]) == 0.75

    def test_shc_sweep(self, tmp_path, clean_env):
        text = BM_SHC.replace("mode = estimate-shc", "mode = sweep")
        out = tmp_path / "out"
        assert main(["--config", write_config(tmp_path, text), "--out", str(out)]) == 0
        fit = read_rows(out / "fit.csv")
        assert fit[1][0] == "shc_deficit"
        assert float(fit[1][1]) == pytest.approx(0.5, abs=0.15)


class TestOutputHelpers:
    def test_empty_rows_header_only(self):
        assert csv_text(["a", "b"], []) == "a,b\n"

    def test_full_precision(self):
        text = csv_text(["x"], [[1 / 3], [True], [7]])
        assert text.splitlines()[1:] == ["0.33333333333333331", "1", "7"]
        assert float(text.splitlines()[1]) == 1 / 3

    def test_nan_roundtrip(self):
        assert math.isnan(float(csv_text(["x"], [[math.nan]]).splitlines()[1]))

    def test_slope_annotation_matches_fit(self, tmp_path, clean_env):
        out = tmp_path / "out"
        main(["--config", str(GOLDEN / "predict_bm.ini"), "--out", str(out)])
        svg = (out / "deficit.svg").read_text()
        rows = read_rows(out / "results.csv")[1:]
        fit = fit_power_law([(float(r[0]), float(r[2])) for r in rows])
        m = re.search(r"fitted slope (-?[0-9.]+)", svg)
        assert m and float(m.group(1)) == pytest.approx(fit.exponent, abs=5e-5)
        assert m.group(1) == "0.5000"

    def test_render_deterministic(self):
        x = np.geomspace(1e-3, 1e-1, 5)
        fig = Figure("power law", "t", "y")
        fig.series.append(Series("y", x, 2 * x ** 0.5))
        assert render(fig) == render(fig)
        assert render(fig).startswith("<svg")

    def test_io_error(self, tmp_path, clean_env):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        config = str(GOLDEN / "predict_bm.ini")
        assert main(["--config", config, "--out", str(blocker / "sub")]) == 3
