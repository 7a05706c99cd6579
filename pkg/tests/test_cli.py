"""End-to-end harness runs, CSV schemas, determinism, exit codes."""

import csv
import subprocess
import sys

import numpy as np
import pytest

from ksvfair.cli import (
    ConfigError,
    compare_runs,
    load_config,
    main,
    run_experiment,
)

SMALL_CONFIG = """\
[run]
algo = {algo}
env = synthetic
t = 1000000
rounds = {rounds}
seeds = {seeds}
out_dir = {out}

[algo]
r = 4
l = 2

[env]
m = 5
k = 2
means = 0.2,0.35,0.5,0.7,0.9
noise_stds = 0.1,0.15,0.2,0.25,0.3
lambda = 0.25
"""


def write_config(tmp_path, algo="ksvfair", rounds=25, seeds="1,2", name="cfg.ini", out=None):
    out = out or str(tmp_path / f"out_{algo}")
    path = tmp_path / name
    path.write_text(SMALL_CONFIG.format(algo=algo, rounds=rounds, seeds=seeds, out=out))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        assert cfg.algo == "ksvfair"
        assert cfg.M == 5 and cfg.K == 2
        assert cfg.seeds == (1, 2)
        assert cfg.curvature == 0.25

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")

    def test_unknown_algo(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text(SMALL_CONFIG.format(algo="sarsa", rounds=5, seeds="1", out="o"))
        with pytest.raises(ConfigError, match="algo"):
            load_config(p)

    def test_means_length_mismatch(self, tmp_path):
        p = tmp_path / "bad.ini"
        text = SMALL_CONFIG.format(algo="ksvfair", rounds=5, seeds="1", out="o")
        p.write_text(text.replace("0.2,0.35,0.5,0.7,0.9", "0.2,0.35"))
        with pytest.raises(ConfigError, match="means"):
            load_config(p)

    def test_graph_path_validated(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text(
            "[run]\nalgo = ksvfair\nenv = cascade\nt = 1000\nseeds = 1\n"
            "[algo]\nr = 2\nl = 1\n"
            "[env]\nm = 8\nk = 2\ngraph_path = missing.edges\n"
        )
        with pytest.raises(ConfigError, match="graph_path"):
            load_config(p)


class TestRunExperiment:
    def test_files_and_schema(self, tmp_path):
        out = run_experiment(write_config(tmp_path))
        assert sorted(p.name for p in out.iterdir()) == [
            "aggregate.csv",
            "arms_seed1.csv",
            "arms_seed2.csv",
            "run_seed1.csv",
            "run_seed2.csv",
        ]
        rows = read_rows(out / "run_seed1.csv")
        assert len(rows) == 25
        expected_cols = (
            ["round", "pulls_cum", "l1_to_pistar", "fr_cum"]
            + [f"pi_{a}" for a in range(5)]
            + [f"sel_{a}" for a in range(5)]
        )
        assert list(rows[0].keys()) == expected_cols
        # cumulative regret never decreases and selections have size K
        fr = [float(r["fr_cum"]) for r in rows]
        assert all(b >= a for a, b in zip(fr, fr[1:]))
        for r in rows:
            assert sum(int(r[f"sel_{a}"]) for a in range(5)) == 2

        arm_rows = read_rows(out / "arms_seed1.csv")
        assert list(arm_rows[0].keys()) == ["arm", "true_phi", "est_phi", "count", "merit_sel_ratio"]
        assert len(arm_rows) == 5

        agg = read_rows(out / "aggregate.csv")
        assert list(agg[0].keys()) == ["algo", "round", "fr_mean", "fr_var"]
        assert len(agg) == 25
        assert agg[0]["algo"] == "ksvfair"

    def test_fr_accumulation_consistent(self, tmp_path):
        out = run_experiment(write_config(tmp_path, seeds="3"))
        rows = read_rows(out / "run_seed3.csv")
        total = 0.0
        for r in rows:
            total += float(r["l1_to_pistar"])
            assert float(r["fr_cum"]) == pytest.approx(total, abs=1e-9)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, rounds=15)
        out1 = run_experiment(cfg, out_dir=tmp_path / "a")
        out2 = run_experiment(cfg, out_dir=tmp_path / "b")
        for name in ("run_seed1.csv", "arms_seed2.csv", "aggregate.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_offset(self, tmp_path):
        cfg = write_config(tmp_path, seeds="1")
        out = run_experiment(cfg, seed_offset=100, out_dir=tmp_path / "shifted")
        assert (out / "run_seed101.csv").exists()

    def test_parallel_workers_match_serial(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, rounds=12)
        serial = run_experiment(cfg, out_dir=tmp_path / "serial")
        monkeypatch.setattr("os.cpu_count", lambda: 4)
        monkeypatch.setenv("KSV_THREADS", "2")
        parallel = run_experiment(cfg, out_dir=tmp_path / "parallel")
        for name in ("run_seed1.csv", "run_seed2.csv", "aggregate.csv"):
            assert (serial / name).read_bytes() == (parallel / name).read_bytes()

    def test_all_algorithms_run(self, tmp_path):
        for algo in ("muras", "uniform", "etcg"):
            out = run_experiment(write_config(tmp_path, algo=algo, rounds=20, name=f"{algo}.ini"))
            assert (out / "aggregate.csv").exists()

    def test_cascade_env_runs(self, tmp_path):
        p = tmp_path / "cascade.ini"
        p.write_text(
            "[run]\nalgo = ksvfair\nenv = cascade\nt = 500000\nrounds = 12\nseeds = 1\n"
            f"out_dir = {tmp_path / 'casc'}\n"
            "[algo]\nr = 2\nl = 1\n"
            "[env]\nm = 8\nk = 2\ngraph_path = data/toy_8.edges\n"
            "activation_p = 0.3\npistar_sims = 200\n"
        )
        out = run_experiment(p)
        assert len(read_rows(out / "run_seed1.csv")) == 12

    def test_cascade_truth_tagged_as_estimate(self, tmp_path):
        from ksvfair.cli import build_env, true_shapley

        p = tmp_path / "cascade.ini"
        p.write_text(
            "[run]\nalgo = ksvfair\nenv = cascade\nt = 500000\nrounds = 5\nseeds = 1\n"
            f"out_dir = {tmp_path / 'c'}\n"
            "[algo]\nr = 2\nl = 1\n"
            "[env]\nm = 8\nk = 2\ngraph_path = data/toy_8.edges\n"
            "activation_p = 0.3\npistar_sims = 400\n"
        )
        cfg = load_config(p)
        phi = true_shapley(cfg, build_env(cfg))
        assert phi.kind == "estimated"
        assert phi.stderr is not None and np.all(phi.stderr > 0)


class TestCompare:
    def test_joined_table_and_ordering(self, tmp_path):
        a = run_experiment(write_config(tmp_path, algo="ksvfair", rounds=30, name="a.ini"))
        b = run_experiment(write_config(tmp_path, algo="uniform", rounds=30, name="b.ini"))
        fr_path, arms_path = compare_runs([a, b], out_prefix=str(tmp_path / "cmp"))
        rows = read_rows(fr_path)
        assert list(rows[0].keys()) == [
            "round",
            "fr_mean_ksvfair",
            "fr_std_ksvfair",
            "fr_mean_uniform",
            "fr_std_uniform",
        ]
        assert len(rows) == 30
        arm_rows = read_rows(arms_path)
        assert list(arm_rows[0].keys()) == ["arm", "ratio_ksvfair", "ratio_uniform"]

    def test_identical_inputs_zero_difference(self, tmp_path):
        a = run_experiment(write_config(tmp_path, rounds=20, name="a.ini", out=str(tmp_path / "oa")))
        b = run_experiment(write_config(tmp_path, rounds=20, name="b.ini", out=str(tmp_path / "ob")))
        fr_path, _ = compare_runs([a, b], out_prefix=str(tmp_path / "cmp2"))
        for r in read_rows(fr_path):
            assert r["fr_mean_ksvfair"] == r["fr_mean_ksvfair2"]

    def test_mismatched_grids_rejected(self, tmp_path):
        a = run_experiment(write_config(tmp_path, rounds=20, name="a.ini"))
        b = run_experiment(write_config(tmp_path, algo="uniform", rounds=25, name="b.ini"))
        with pytest.raises(ValueError, match="grid"):
            compare_runs([a, b], out_prefix=str(tmp_path / "cmp3"))


class TestMainEntry:
    def test_run_and_exact_shapley_exit_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, rounds=10)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
        assert main(["exact-shapley", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        assert "arm,true_phi,pi_star" in out

    def test_config_error_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[run]\nalgo = nope\n")
        assert main(["run", "--config", str(bad)]) == 2

    def test_runtime_error_exit_one(self, tmp_path):
        # budget passes validation but cannot cover the uniform phase
        cfg = tmp_path / "c.ini"
        text = SMALL_CONFIG.format(algo="muras", rounds=30, seeds="1", out=tmp_path / "o")
        cfg.write_text(text.replace("t = 1000000", "t = 50"))
        assert main(["run", "--config", cfg.as_posix()]) == 1

    def test_console_script_invocation(self, tmp_path):
        cfg = write_config(tmp_path, rounds=8)
        proc = subprocess.run(
            [sys.executable, "-m", "ksvfair.cli", "run", "--config", str(cfg), "--out", str(tmp_path / "o")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
