"""Command-line front door: run experiments, sweep grids, verify
invariants, and print theoretical bounds.

Subcommands
-----------
run     one experiment (optionally coupled with the MWU reference process);
        writes one per-round CSV per seed plus a summary CSV.
sweep   Cartesian grid over n / m / T / beta / sigma; per-cell summary rows.
verify  execute the numerical invariant suite (quick or full tier).
bound   print the closed-form regret bounds and the mass-survival horizon.

Exit codes: 0 success, 1 runtime or check failure, 2 usage/config error.

The config is one JSON document with a flat key set (see README); flag
overrides use dotted paths, e.g. ``--set reward.noise_sd=2``.  Identical
(config, seed) pairs produce byte-identical CSVs.  The environment
variable GOSSIP_BANDITS_THREADS caps the worker pool used for sweeps and
seed replications.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import copy
import hashlib
import itertools
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .errors import GossipBanditsError, InvalidParameterError
from .metrics import (
    BoundInputs,
    convex_error,
    coupling_error_sum,
    mass_survival_horizon,
    mwu_regret_bound,
    population_regret,
)
from .mwu import run_coupled
from .population import run_trajectory
from .potentials import make_family
from .rewards import (
    AdversarialScript,
    ConvexFunctionSpec,
    GradientOracle,
    LeaderPunishing,
    StationaryBernoulli,
    StationaryScaledBernoulli,
    three_arm_benchmark,
)
from .verify import run_suite

REQUIRED_KEYS = ("n", "m", "T", "algorithm", "beta", "reward")
DEFAULTS = {
    "tau": 0,  # 0 means single epoch (tau = T) when coupling
    "seed": 0,
    "seeds": 1,
    "sigma": 1.0,
    "mode": "auto",
    "couple": False,
    "output": "runs",
}
GRID_AXES = ("n", "m", "T", "beta", "sigma")


class ConfigError(Exception):
    """Raised for malformed configs; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Config handling


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    """Apply --set key=value pairs; dotted keys descend into sub-objects."""
    out = copy.deepcopy(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings allowed without quotes
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {key!r} crosses a non-object")
        node[parts[-1]] = value
    return out


def validate_config(cfg: dict) -> dict:
    merged = {**DEFAULTS, **cfg}
    for key in REQUIRED_KEYS:
        if key not in merged:
            raise ConfigError(f"missing required key: {key}")
    if not isinstance(merged["reward"], dict) or "kind" not in merged["reward"]:
        raise ConfigError("missing required key: reward.kind")
    for key in ("n", "m", "T", "tau", "seed", "seeds"):
        try:
            merged[key] = int(merged[key])
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} must be an integer, got {merged[key]!r}")
    for key in ("beta", "sigma"):
        try:
            merged[key] = float(merged[key])
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} must be a number, got {merged[key]!r}")
    if merged["n"] < 1:
        raise ConfigError("n must be >= 1")
    if merged["seeds"] < 1:
        raise ConfigError("seeds must be >= 1")
    if merged["seed"] < 0:
        raise ConfigError("seed must be >= 0 (substreams are derived from it)")
    if merged["m"] < 2:
        raise ConfigError("m must be >= 2")
    if merged["T"] < 1:
        raise ConfigError("T must be >= 1")
    if merged["mode"] not in ("auto", "aggregate", "per-agent", "mean-field"):
        raise ConfigError(f"unknown mode {merged['mode']!r}")
    if merged["couple"]:
        tau = merged["tau"] or merged["T"]
        if merged["T"] % tau != 0:
            raise ConfigError(f"T={merged['T']} must be divisible by tau={tau}")
    return merged


def config_hash(cfg: dict) -> str:
    """Short id of the experiment itself (the output destination is not part
    of the experiment's identity)."""
    scrubbed = {k: v for k, v in cfg.items() if k != "output"}
    canon = json.dumps(scrubbed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _resolve_means(reward: dict, m: int) -> np.ndarray:
    if "means" in reward:
        means = np.asarray(reward["means"], dtype=float)
        if means.shape != (m,):
            raise ConfigError(f"reward.means has {means.size} entries but m={m}")
        return means
    if "mean_range" in reward:
        rng = reward["mean_range"]
        if not isinstance(rng, (list, tuple)) or len(rng) != 2:
            raise ConfigError("reward.mean_range must be a [hi, lo] pair")
        return np.linspace(float(rng[0]), float(rng[1]), m)
    raise ConfigError("missing required key: reward.means (or reward.mean_range)")


def build_reward_model(cfg: dict):
    reward = cfg["reward"]
    kind = reward["kind"]
    m = cfg["m"]
    sigma = float(cfg["sigma"])
    if kind == "bernoulli":
        return StationaryBernoulli(_resolve_means(reward, m))
    if kind == "scaled-bernoulli":
        return StationaryScaledBernoulli(_resolve_means(reward, m), sigma)
    if kind == "adversarial-script":
        if "schedule" not in reward:
            raise ConfigError("missing required key: reward.schedule")
        return AdversarialScript(
            np.asarray(reward["schedule"], dtype=float),
            noise_halfwidth=float(reward.get("noise_halfwidth", 0.0)),
            sigma=sigma,
        )
    if kind == "leader-punishing":
        return LeaderPunishing(
            noise_halfwidth=float(reward.get("noise_halfwidth", 0.0)), sigma=sigma
        )
    if kind == "gradient-oracle":
        fn = reward.get("fn", "three-arm-benchmark")
        if fn == "three-arm-benchmark":
            spec = three_arm_benchmark()
        elif isinstance(fn, dict) and "quad" in fn and "linear" in fn:
            spec = ConvexFunctionSpec(
                np.asarray(fn["quad"], dtype=float),
                np.asarray(fn["linear"], dtype=float),
                float(fn.get("constant", 0.0)),
            )
        else:
            raise ConfigError("reward.fn must be 'three-arm-benchmark' or {quad, linear[, constant]}")
        if spec.m != m:
            raise ConfigError(f"reward.fn has {spec.m} coordinates but m={m}")
        return GradientOracle(
            spec,
            noise_sd=float(reward.get("noise_sd", 0.0)),
            clip=float(reward.get("clip", 10.0)),
        )
    raise ConfigError(f"unknown reward.kind {kind!r}")


def build_family(cfg: dict):
    return make_family(cfg["algorithm"], float(cfg["beta"]), float(cfg["sigma"]))


# ---------------------------------------------------------------------------
# Running and CSV output


def _fmt(x: float) -> str:
    return repr(float(x))


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_run_csv(path: Path, run_id: str, seed: int, traj, coupled: bool):
    """Per-round CSV.  Columns: run_id, seed, t, p_0..p_{m-1},
    q_0..q_{m-1} (empty when not coupled), reward_dot_p, inst_regret,
    cum_regret, l1_pq.  Row T carries the final shares with empty reward
    fields.  inst_regret is against the round's best mean; cum_regret is
    the prefix regret against the best fixed arm so far."""
    m = traj.m
    T = traj.T
    header = (
        ["run_id", "seed", "t"]
        + [f"p_{j}" for j in range(m)]
        + [f"q_{j}" for j in range(m)]
        + ["reward_dot_p", "inst_regret", "cum_regret", "l1_pq"]
    )
    realized = np.einsum("tj,tj->t", traj.p[:T], traj.g) if T else np.zeros(0)
    cum_realized = np.cumsum(realized)
    cum_best = np.cumsum(traj.mu, axis=0).max(axis=1) if T else np.zeros(0)
    lines = [",".join(header)]
    for t in range(T + 1):
        row = [run_id, str(seed), str(t)]
        row += [_fmt(v) for v in traj.p[t]]
        if coupled:
            row += [_fmt(v) for v in traj.q[t]]
        else:
            row += [""] * m
        if t < T:
            inst = float(traj.mu[t].max() - realized[t])
            cum = float(cum_best[t] - cum_realized[t])
            row += [_fmt(realized[t]), _fmt(inst), _fmt(cum)]
        else:
            row += ["", "", ""]
        row.append(_fmt(traj.l1_pq[t]) if coupled else "")
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


SUMMARY_HEADER = (
    "config_hash,n,m,T,beta,algorithm,mean_avg_regret,q1,q3,mean_coupling_sum,mean_convex_err"
)


def run_one_seed(cfg: dict, seed: int, out_dir: str) -> dict:
    """One seed replication: simulate, write the per-round CSV, and return
    the per-seed statistics.  Top level so worker pools can pickle it."""
    out = Path(out_dir)
    run_id = config_hash(cfg)
    family = build_family(cfg)
    model = build_reward_model(cfg)
    couple = bool(cfg["couple"])
    tau = int(cfg["tau"]) or int(cfg["T"])
    if couple:
        traj = run_coupled(
            model, family, n=int(cfg["n"]), m=int(cfg["m"]), T=int(cfg["T"]),
            tau=tau, seed=seed, mode=cfg["mode"],
        )
    else:
        traj = run_trajectory(
            model, family, n=int(cfg["n"]), m=int(cfg["m"]), T=int(cfg["T"]),
            seed=seed, mode=cfg["mode"],
        )
    write_run_csv(out / f"{run_id}_seed{seed}.csv", run_id, seed, traj, couple)
    stats = {"avg_regret": population_regret(traj).cumulative_regret / traj.T}
    if couple:
        stats["coupling_sum"] = coupling_error_sum(traj)
    if cfg["reward"]["kind"] == "gradient-oracle":
        stats["convex_err"] = convex_error(traj, model.fn)
    return stats


def execute_run(cfg: dict, out_dir: str, workers: int = 1) -> dict:
    """Run all seed replications of one validated config; returns the
    summary row fields."""
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    run_id = config_hash(cfg)
    seeds = list(range(int(cfg["seed"]), int(cfg["seed"]) + int(cfg["seeds"])))
    if workers > 1 and len(seeds) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            futures = [pool.submit(run_one_seed, cfg, s, out_dir) for s in seeds]
            per_seed = [f.result() for f in futures]
    else:
        per_seed = [run_one_seed(cfg, s, out_dir) for s in seeds]
    avg_regrets = [st["avg_regret"] for st in per_seed]
    coupling_sums = [st["coupling_sum"] for st in per_seed if "coupling_sum" in st]
    convex_errs = [st["convex_err"] for st in per_seed if "convex_err" in st]
    avg = np.asarray(avg_regrets)
    q1, q3 = np.quantile(avg, 0.25), np.quantile(avg, 0.75)
    return {
        "config_hash": run_id,
        "n": cfg["n"],
        "m": cfg["m"],
        "T": cfg["T"],
        "beta": cfg["beta"],
        "algorithm": cfg["algorithm"],
        "mean_avg_regret": float(avg.mean()),
        "q1": float(q1),
        "q3": float(q3),
        "mean_coupling_sum": float(np.mean(coupling_sums)) if coupling_sums else None,
        "mean_convex_err": float(np.mean(convex_errs)) if convex_errs else None,
    }


def _summary_line(row: dict) -> str:
    return ",".join(
        [
            row["config_hash"],
            str(row["n"]),
            str(row["m"]),
            str(row["T"]),
            _fmt(row["beta"]),
            row["algorithm"],
            _fmt(row["mean_avg_regret"]),
            _fmt(row["q1"]),
            _fmt(row["q3"]),
            "" if row["mean_coupling_sum"] is None else _fmt(row["mean_coupling_sum"]),
            "" if row["mean_convex_err"] is None else _fmt(row["mean_convex_err"]),
        ]
    )


def write_summary_csv(path: Path, rows: list[dict]):
    _atomic_write(path, "\n".join([SUMMARY_HEADER] + [_summary_line(r) for r in rows]) + "\n")


def _max_workers() -> int:
    env = os.environ.get("GOSSIP_BANDITS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_cells(cells: list[dict], out_dir: str) -> list[dict]:
    workers = min(_max_workers(), len(cells))
    if workers <= 1 or len(cells) <= 1:
        return [execute_run(cfg, out_dir) for cfg in cells]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(execute_run, cfg, out_dir) for cfg in cells]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Subcommands


def cmd_run(args) -> int:
    cfg = validate_config(apply_overrides(load_config(args.config), args.set))
    out_dir = args.output or cfg["output"]
    row = execute_run(cfg, out_dir, workers=_max_workers())
    write_summary_csv(Path(out_dir) / f"{row['config_hash']}_summary.csv", [row])
    print(f"run {row['config_hash']}: mean avg regret {row['mean_avg_regret']:.6g}")
    return 0


def cmd_sweep(args) -> int:
    base = apply_overrides(load_config(args.config), args.set)
    grid = base.pop("grid", None)
    if not grid:
        raise ConfigError("sweep config needs a non-empty 'grid' object")
    axes = []
    for key, values in grid.items():
        if key not in GRID_AXES:
            raise ConfigError(f"grid axis {key!r} not supported (use {GRID_AXES})")
        if not isinstance(values, list) or not values:
            raise ConfigError(f"grid axis {key!r} must be a non-empty list")
        axes.append((key, values))
    cells = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        cfg = copy.deepcopy(base)
        for (key, _), value in zip(axes, combo):
            cfg[key] = value
        cells.append(validate_config(cfg))
    out_dir = args.output or base.get("output", DEFAULTS["output"])
    rows = _run_cells(cells, out_dir)
    write_summary_csv(Path(out_dir) / "sweep_summary.csv", rows)
    print(f"swept {len(cells)} cells -> {out_dir}/sweep_summary.csv")
    return 0


def cmd_verify(args) -> int:
    results = run_suite(args.tier)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_bound(args) -> int:
    stationary = mwu_regret_bound(
        BoundInputs(args.alpha1, args.alpha2, 0.0, args.rho, args.gamma, args.T, True)
    )
    adversarial = mwu_regret_bound(
        BoundInputs(args.alpha1, args.alpha2, args.delta, args.rho, args.gamma, args.T, False)
    )
    print(f"stationary_bound={stationary:.6g}")
    print(f"adversarial_bound={adversarial:.6g}")
    if args.n is not None and args.m is not None:
        print(f"mass_survival_horizon={mass_survival_horizon(args.n, args.m)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gossip-bandits", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_run.add_argument("--output", default=None, help="output directory")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a Cartesian grid of configs")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p_sweep.add_argument("--output", default=None)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the numerical invariant suite")
    p_verify.add_argument("--tier", choices=("quick", "full"), default="quick")
    p_verify.set_defaults(fn=cmd_verify)

    p_bound = sub.add_parser("bound", help="print closed-form regret bounds")
    p_bound.add_argument("--alpha1", type=float, required=True)
    p_bound.add_argument("--alpha2", type=float, default=None)
    p_bound.add_argument("--delta", type=float, default=0.0)
    p_bound.add_argument("--rho", type=float, required=True)
    p_bound.add_argument("--gamma", type=float, default=0.0)
    p_bound.add_argument("--T", type=int, default=1)
    p_bound.add_argument("--n", type=int, default=None)
    p_bound.add_argument("--m", type=int, default=None)
    p_bound.set_defaults(fn=cmd_bound)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "alpha2", None) is None and args.command == "bound":
        args.alpha2 = args.alpha1
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except GossipBanditsError as e:
        print(f"error: {e}", file=sys.stderr)
        # parameter/validation problems are usage errors; runtime ones are not
        return 2 if isinstance(e, InvalidParameterError) else 1
    except Exception as e:  # pragma: no cover - unexpected failure
        print(f"internal error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
