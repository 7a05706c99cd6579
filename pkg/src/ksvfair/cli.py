"""Config-driven experiment harness.

Subcommands:

* ``run --config cfg.ini [--seed-offset N] [--out DIR]`` executes one
  algorithm on one environment across the configured seeds and writes
  per-seed round/arm CSVs plus a seed-aggregated regret CSV.
* ``compare DIR...`` joins the aggregates of several finished runs into
  one table per quantity.
* ``exact-shapley --config cfg.ini`` prints the environment's true values
  and the fair selection probabilities.

Configs are flat INI text: a ``[run]`` block (algo, env, budget, seeds,
output), an ``[algo]`` block (estimation and policy knobs) and an
``[env]`` block (environment parameters); lists are comma-separated.
Every run is fully determined by (config, seed); reruns are byte-identical.
The ``KSV_THREADS`` environment variable caps how many seeds run in
parallel workers.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .envs import CascadeEnv, SyntheticEnv, load_edge_list
from .games import ShapleyVector, exact_k_shapley, sampled_k_shapley
from .metrics import FairnessLedger, fair_policy, merit_to_selection
from .policies import PolicyConfig, RunRecord, etcg_baseline, muras_run, run_ksvfair, uniform_baseline

ALGOS = ("ksvfair", "muras", "uniform", "etcg")
ENVS = ("synthetic", "cascade")
EXIT_CONFIG = 2
EXIT_RUNTIME = 1

_RUNNERS = {
    "ksvfair": run_ksvfair,
    "muras": muras_run,
    "uniform": uniform_baseline,
    "etcg": etcg_baseline,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    algo: str
    env: str
    T: int
    M: int
    K: int
    R: int
    L: int
    seeds: tuple[int, ...]
    out_dir: str
    delta1: float = 0.05
    delta2: float = 0.05
    rounds: int | None = None
    radius_mode: str = "adaptive"
    reuse_prefix: bool = False
    explore_pulls: int = 20
    means: tuple[float, ...] = ()
    noise_stds: tuple[float, ...] = ()
    curvature: float = 1.0
    graph_path: str = ""
    activation_p: float = 0.1
    pistar_sims: int = 10_000
    pistar_samples: int = 4_000
    max_exact_arms: int = 20
    max_exact_budget: int = 8

    def policy_config(self) -> PolicyConfig:
        return PolicyConfig(
            T=self.T,
            M=self.M,
            K=self.K,
            R=self.R,
            L=self.L,
            delta1=self.delta1,
            delta2=self.delta2,
            rounds=self.rounds,
            radius_mode=self.radius_mode,
            reuse_prefix=self.reuse_prefix,
            explore_pulls=self.explore_pulls,
        )


def _parse_floats(raw: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"key '{key}': expected comma-separated numbers, got {raw!r}") from exc


def _parse_ints(raw: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"key '{key}': expected comma-separated integers, got {raw!r}") from exc


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    try:
        run = parser["run"]
        algo = run.get("algo", "")
        env = run.get("env", "")
        if algo not in ALGOS:
            raise ConfigError(f"key 'algo' must be one of {ALGOS}, got {algo!r}")
        if env not in ENVS:
            raise ConfigError(f"key 'env' must be one of {ENVS}, got {env!r}")
        seeds = _parse_ints(run.get("seeds", ""), "seeds")
        if not seeds:
            raise ConfigError("key 'seeds' must list at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("key 'seeds' contains duplicates")
        algo_sec = parser["algo"] if parser.has_section("algo") else {}
        env_sec = parser["env"] if parser.has_section("env") else {}

        def geti(sec, key, default=None):
            if key not in sec:
                if default is None:
                    raise ConfigError(f"missing required key '{key}'")
                return default
            try:
                return int(sec[key])
            except ValueError as exc:
                raise ConfigError(f"key '{key}': expected integer, got {sec[key]!r}") from exc

        def getf(sec, key, default):
            if key not in sec:
                return default
            try:
                return float(sec[key])
            except ValueError as exc:
                raise ConfigError(f"key '{key}': expected number, got {sec[key]!r}") from exc

        def getb(sec, key, default):
            if key not in sec:
                return default
            val = str(sec[key]).strip().lower()
            if val in ("true", "1", "yes", "on"):
                return True
            if val in ("false", "0", "no", "off"):
                return False
            raise ConfigError(f"key '{key}': expected boolean, got {sec[key]!r}")

        cfg = RunConfig(
            algo=algo,
            env=env,
            T=geti(run, "t"),
            M=geti(env_sec, "m"),
            K=geti(env_sec, "k"),
            R=geti(algo_sec, "r", 50),
            L=geti(algo_sec, "l", 20),
            seeds=seeds,
            out_dir=run.get("out_dir", "results"),
            delta1=getf(algo_sec, "delta1", 0.05),
            delta2=getf(algo_sec, "delta2", 0.05),
            rounds=geti(run, "rounds", 0) or None,
            radius_mode=str(algo_sec.get("radius_mode", "adaptive")),
            reuse_prefix=getb(algo_sec, "reuse_prefix", False),
            explore_pulls=geti(algo_sec, "explore_pulls", 20),
            means=_parse_floats(env_sec.get("means", ""), "means"),
            noise_stds=_parse_floats(env_sec.get("noise_stds", ""), "noise_stds"),
            curvature=getf(env_sec, "lambda", 1.0),
            graph_path=str(env_sec.get("graph_path", "")),
            activation_p=getf(env_sec, "activation_p", 0.1),
            pistar_sims=geti(env_sec, "pistar_sims", 10_000),
            pistar_samples=geti(env_sec, "pistar_samples", 4_000),
            max_exact_arms=geti(env_sec, "max_exact_arms", 20),
            max_exact_budget=geti(env_sec, "max_exact_budget", 8),
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"missing config section {exc}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.T <= cfg.K:
        raise ConfigError(f"key 't': budget {cfg.T} must exceed k={cfg.K}")
    if not 1 <= cfg.K <= cfg.M:
        raise ConfigError(f"keys 'k'/'m': need 1 <= k <= m, got k={cfg.K}, m={cfg.M}")
    for name, d in (("delta1", cfg.delta1), ("delta2", cfg.delta2)):
        if not 0.0 < d < 1.0:
            raise ConfigError(f"key '{name}' must lie in (0, 1), got {d}")
    if cfg.env == "synthetic":
        if len(cfg.means) != cfg.M:
            raise ConfigError(f"key 'means' must list m={cfg.M} values, got {len(cfg.means)}")
        if cfg.noise_stds and len(cfg.noise_stds) != cfg.M:
            raise ConfigError(
                f"key 'noise_stds' must list m={cfg.M} values, got {len(cfg.noise_stds)}"
            )
        if any(not 0.0 < x <= 1.0 for x in cfg.means):
            raise ConfigError("key 'means': values must lie in (0, 1]")
        if any(x < 0 for x in cfg.noise_stds):
            raise ConfigError("key 'noise_stds': values must be nonnegative")
        if cfg.curvature < 0:
            raise ConfigError("key 'lambda' must be nonnegative")
    else:
        if not cfg.graph_path:
            raise ConfigError("key 'graph_path' is required for the cascade environment")
        if not Path(cfg.graph_path).is_file():
            raise ConfigError(f"key 'graph_path': file not found: {cfg.graph_path}")
        if not 0.0 <= cfg.activation_p <= 1.0:
            raise ConfigError("key 'activation_p' must lie in [0, 1]")


def build_env(cfg: RunConfig):
    allow_extra = cfg.algo == "muras" and cfg.K < cfg.M
    if cfg.env == "synthetic":
        return SyntheticEnv(
            cfg.means,
            cfg.noise_stds if cfg.noise_stds else None,
            budget=cfg.K,
            curvature=cfg.curvature,
            allow_extra_query=allow_extra,
        )
    graph = load_edge_list(cfg.graph_path)
    if graph.n_nodes != cfg.M:
        raise ConfigError(
            f"key 'm': graph has {graph.n_nodes} nodes but config says m={cfg.M}"
        )
    return CascadeEnv(
        graph,
        cfg.activation_p,
        budget=cfg.K,
        exact_sims=cfg.pistar_sims,
        allow_extra_query=allow_extra,
    )


def true_shapley(cfg: RunConfig, oracle) -> ShapleyVector:
    """Ground-truth values from the environment's exact backdoor.

    Uses full enumeration within the guard, otherwise the uniform-coalition
    Monte-Carlo estimator.  On cascade environments even the enumerated
    values rest on simulated coalition worths, so they are tagged as
    estimates with a conservative per-arm standard error: each value is a
    fixed combination of independent coalition estimates whose signed
    weights total 1 on each side, giving se <= 1 / sqrt(2 * pistar_sims).
    """
    game = oracle.restricted_game()
    if cfg.M <= cfg.max_exact_arms and cfg.K <= cfg.max_exact_budget:
        phi = exact_k_shapley(game, max_arms=cfg.max_exact_arms, max_budget=cfg.max_exact_budget)
        if cfg.env == "cascade":
            se = 1.0 / np.sqrt(2 * cfg.pistar_sims)
            return ShapleyVector(
                phi.values,
                "estimated",
                samples=cfg.pistar_sims,
                stderr=np.full(cfg.M, se),
            )
        return phi
    rng = np.random.default_rng(0)
    return sampled_k_shapley(game.value, cfg.M, cfg.K, cfg.pistar_samples, rng)


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _run_one(cfg: RunConfig, seed: int) -> RunRecord:
    oracle = build_env(cfg)
    rng = np.random.default_rng(seed)
    return _RUNNERS[cfg.algo](cfg.policy_config(), oracle, rng, seed=seed)


def write_round_csv(path, record: RunRecord, pi_star: np.ndarray) -> FairnessLedger:
    ledger = FairnessLedger.from_run(pi_star, record.pi)
    fr = ledger.fr_cum
    pulls_cum = record.pulls_cum
    M = record.pi.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["round", "pulls_cum", "l1_to_pistar", "fr_cum"]
            + [f"pi_{a}" for a in range(M)]
            + [f"sel_{a}" for a in range(M)]
        )
        for t in range(record.n_rounds):
            w.writerow(
                [t + 1, int(pulls_cum[t]), _fmt(ledger.l1[t]), _fmt(fr[t])]
                + [_fmt(x) for x in record.pi[t]]
                + [int(x) for x in record.selected[t]]
            )
    return ledger


def write_arms_csv(path, record: RunRecord, true_phi: np.ndarray) -> None:
    ratios = merit_to_selection(true_phi, record.counts, record.n_rounds)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arm", "true_phi", "est_phi", "count", "merit_sel_ratio"])
        for a in range(len(true_phi)):
            w.writerow(
                [a, _fmt(true_phi[a]), _fmt(record.est_phi[a]), int(record.counts[a]), _fmt(ratios[a])]
            )


def write_aggregate_csv(path, algo: str, ledgers: list[FairnessLedger]) -> None:
    n = min(l.n_rounds for l in ledgers)
    fr = np.stack([l.fr_cum[:n] for l in ledgers])
    mean = fr.mean(axis=0)
    var = fr.var(axis=0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algo", "round", "fr_mean", "fr_var"])
        for t in range(n):
            w.writerow([algo, t + 1, _fmt(mean[t]), _fmt(var[t])])


def _worker_count(n_seeds: int) -> int:
    workers = min(n_seeds, os.cpu_count() or 1)
    cap = os.environ.get("KSV_THREADS", "")
    if cap.strip():
        workers = min(workers, max(1, int(cap)))
    return workers


def run_experiment(config_path, seed_offset: int = 0, out_dir=None) -> Path:
    """Execute the configured runs and write all CSVs; returns the output dir."""
    cfg = load_config(config_path)
    if seed_offset:
        cfg = RunConfig(**{**cfg.__dict__, "seeds": tuple(s + seed_offset for s in cfg.seeds)})
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    oracle = build_env(cfg)
    phi = true_shapley(cfg, oracle)
    pi_star = fair_policy(phi, cfg.K).probs

    workers = _worker_count(len(cfg.seeds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, [cfg] * len(cfg.seeds), cfg.seeds))
    else:
        records = [_run_one(cfg, s) for s in cfg.seeds]

    ledgers = []
    for seed, record in zip(cfg.seeds, records):
        ledgers.append(write_round_csv(out / f"run_seed{seed}.csv", record, pi_star))
        write_arms_csv(out / f"arms_seed{seed}.csv", record, phi.values)
    write_aggregate_csv(out / "aggregate.csv", cfg.algo, ledgers)
    return out


def _read_aggregate(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty aggregate")
    algo = rows[0]["algo"]
    rounds = np.array([int(r["round"]) for r in rows])
    mean = np.array([float(r["fr_mean"]) for r in rows])
    var = np.array([float(r["fr_var"]) for r in rows])
    return algo, rounds, mean, var


def _read_arm_ratios(run_dir: Path) -> np.ndarray:
    files = sorted(run_dir.glob("arms_seed*.csv"))
    if not files:
        raise ValueError(f"{run_dir}: no per-arm summaries found")
    per_seed = []
    for f in files:
        with open(f, newline="") as fh:
            rows = list(csv.DictReader(fh))
        per_seed.append([float(r["merit_sel_ratio"]) for r in rows])
    return np.nanmean(np.array(per_seed), axis=0)


def compare_runs(run_dirs, out_prefix="comparison") -> tuple[Path, Path]:
    """Join >= 2 finished run directories into side-by-side tables."""
    if len(run_dirs) < 2:
        raise ValueError("need at least two run directories to compare")
    loaded = []
    for d in run_dirs:
        d = Path(d)
        algo, rounds, mean, var = _read_aggregate(d / "aggregate.csv")
        loaded.append((d, algo, rounds, mean, var))
    base_rounds = loaded[0][2]
    for d, _, rounds, _, _ in loaded[1:]:
        if len(rounds) != len(base_rounds) or np.any(rounds != base_rounds):
            raise ValueError(f"{d}: round grid does not match {loaded[0][0]}")
    labels = []
    for _, algo, *_ in loaded:
        label = algo
        k = 2
        while label in labels:
            label = f"{algo}{k}"
            k += 1
        labels.append(label)

    fr_path = Path(f"{out_prefix}.csv")
    with open(fr_path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["round"]
        for label in labels:
            header += [f"fr_mean_{label}", f"fr_std_{label}"]
        w.writerow(header)
        for t in range(len(base_rounds)):
            row = [int(base_rounds[t])]
            for _, _, _, mean, var in loaded:
                row += [_fmt(mean[t]), _fmt(np.sqrt(var[t]))]
            w.writerow(row)

    arms_path = Path(f"{out_prefix}_arms.csv")
    ratios = [_read_arm_ratios(d) for d, *_ in loaded]
    n_arms = len(ratios[0])
    if any(len(r) != n_arms for r in ratios):
        raise ValueError("per-arm tables disagree on arm count")
    with open(arms_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arm"] + [f"ratio_{label}" for label in labels])
        for a in range(n_arms):
            w.writerow([a] + [_fmt(r[a]) for r in ratios])
    return fr_path, arms_path


def print_exact_shapley(config_path, file=None) -> None:
    file = file if file is not None else sys.stdout
    cfg = load_config(config_path)
    oracle = build_env(cfg)
    phi = true_shapley(cfg, oracle)
    pi_star = fair_policy(phi, cfg.K).probs
    print(f"# env={cfg.env} M={cfg.M} K={cfg.K} kind={phi.kind}", file=file)
    print("arm,true_phi,pi_star", file=file)
    for a in range(cfg.M):
        print(f"{a},{_fmt(phi.values[a])},{_fmt(pi_star[a])}", file=file)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ksvfair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute the configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed-offset", type=int, default=0)
    p_run.add_argument("--out", default=None)
    p_cmp = sub.add_parser("compare", help="join finished run directories")
    p_cmp.add_argument("run_dirs", nargs="+")
    p_cmp.add_argument("--out-prefix", default="comparison")
    p_ex = sub.add_parser("exact-shapley", help="print true values and the fair policy")
    p_ex.add_argument("--config", required=True)
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            out = run_experiment(args.config, seed_offset=args.seed_offset, out_dir=args.out)
            print(f"wrote results to {out}")
        elif args.command == "compare":
            fr, arms = compare_runs(args.run_dirs, out_prefix=args.out_prefix)
            print(f"wrote {fr} and {arms}")
        else:
            print_exact_shapley(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures get a distinct exit status
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
