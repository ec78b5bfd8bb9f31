"""Command-line entry point wiring scenario generation, training, planning
and evaluation.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every subcommand
takes ``--seed`` and ``--out`` and writes only under ``--out``. Training
options come from a JSON config file plus flag overrides (flags win);
``TELEPLAN_SCORER_URL`` overrides the remote scorer endpoint.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .coverage import RadioConfig, grid_to_raster
from .errors import (
    ContractViolation,
    PreconditionError,
    SchemaError,
    TrainingDiverged,
    ValidationError,
)
from .evaluation import (
    ComparisonReport,
    compare_runs,
    evaluate_plans,
    export_geojson,
    plan_grid,
    random_plan,
)
from .policy import StateBuilder, greedy_decode, load_params, rollout, save_params
from .rewards import RewardEvaluator
from .scenario import (
    Scenario,
    generate_scenario,
    load_scenario,
    normalize_features,
    save_scenario,
    validate_scenario,
)
from .training import TRAINERS, TrainConfig, load_history_csv, make_scorer


def _limit_threads(n: int | None) -> None:
    if not n:
        return
    os.environ["OMP_NUM_THREADS"] = str(n)
    os.environ["OPENBLAS_NUM_THREADS"] = str(n)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        pass


def _load_train_config(args) -> TrainConfig:
    base = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            base = json.load(f)
    config = TrainConfig.from_dict(base)
    overrides = {}
    for flag, name in [
        ("seed", "seed"),
        ("group_size", "group_size"),
        ("lr", "learning_rate"),
        ("iterations", "max_iterations"),
        ("stage_cap", "stage_iteration_cap"),
        ("stage_window", "stage_window"),
        ("scorer", "scorer"),
        ("scorer_url", "scorer_url"),
        ("optimizer", "optimizer"),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "no_sft", False):
        overrides["use_sft"] = False
    if overrides:
        config = TrainConfig.from_dict({**config.to_dict(), **overrides})
    return config


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"{what} not found: {p}")
    return p


def cmd_gen(args) -> int:
    scenario = generate_scenario(args.seed, args.n, args.k, args.profile)
    problems = validate_scenario(scenario)
    if problems:
        raise ValidationError("; ".join(problems))
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    save_scenario(scenario, out)
    print(f"wrote {scenario.n_sites} sites (k={scenario.select_count}) to {out}")
    return 0


def cmd_train(args) -> int:
    _limit_threads(args.threads)
    scenario = load_scenario(_require_file(args.scenario, "scenario file"))
    config = _load_train_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def checkpoint(stage: int, params) -> None:
        save_params(params, out / f"ckpt_stage{stage}.npz")

    trainer = TRAINERS[args.algo]
    params, history = trainer(scenario, config, on_stage_transition=checkpoint)
    save_params(params, out / "ckpt_final.npz")
    history.write(out / "history.csv")
    print(
        f"{args.algo}: {len(history.records)} iterations, "
        f"final mean reward {history.final_window_mean(config.stage_window):.4f}"
    )
    return 0


def _decode_plan(checkpoint_path, scenario: Scenario, sample: bool, seed: int):
    params = load_params(checkpoint_path)
    normalized = normalize_features(scenario)
    builder = StateBuilder(normalized)
    if sample:
        traj = rollout(params, normalized, np.random.default_rng(seed), builder)
        actions = traj.actions
    else:
        actions = greedy_decode(params, builder)
    return [scenario.sites[a].id for a in actions], normalized


def cmd_plan(args) -> int:
    _limit_threads(args.threads)
    scenario = load_scenario(_require_file(args.scenario, "scenario file"))
    ckpt = _require_file(args.checkpoint, "checkpoint")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ids, normalized = _decode_plan(ckpt, scenario, args.sample, args.seed)
    evaluator = RewardEvaluator(
        normalized, make_scorer(TrainConfig()), TrainConfig().weights
    )
    breakdown = evaluator.evaluate(normalized.indices_for(ids), 3)

    baseline_ids = random_plan(scenario, args.seed)
    baseline = evaluator.evaluate(normalized.indices_for(baseline_ids), 3)

    with open(out / "plan.json", "w", encoding="utf-8") as f:
        json.dump(
            {
                "selected_ids": ids,
                "decoding": "sample" if args.sample else "argmax",
                "checkpoint": str(ckpt),
                "stage3_reward": breakdown.r,
                "combined_reward": breakdown.combined,
            },
            f, indent=1,
        )
        f.write("\n")
    with open(out / "baseline_random.json", "w", encoding="utf-8") as f:
        json.dump(
            {
                "selected_ids": baseline_ids,
                "decoding": "random",
                "seed": args.seed,
                "stage3_reward": baseline.r,
                "combined_reward": baseline.combined,
            },
            f, indent=1,
        )
        f.write("\n")
    export_geojson(ids, scenario, out / "plan.geojson")
    print(f"plan of {len(ids)} sites written to {out} "
          f"(stage-3 reward {breakdown.r:.4f}, random baseline {baseline.r:.4f})")
    return 0


def _load_plan_file(path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if isinstance(data, dict):
        return list(data["selected_ids"])
    return list(data)


def cmd_eval(args) -> int:
    _limit_threads(args.threads)
    scenario = load_scenario(_require_file(args.scenario, "scenario file"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    plans = {}
    for p in args.plan or []:
        path = _require_file(p, "plan file")
        plans[path.stem] = _load_plan_file(path)
    if args.checkpoint:
        ckpt = _require_file(args.checkpoint, "checkpoint")
        ids, _ = _decode_plan(ckpt, scenario, sample=False, seed=args.seed)
        plans["checkpoint_argmax"] = ids

    histories = {}
    for h in args.history or []:
        path = _require_file(h, "history file")
        meta_path = Path(str(path) + ".meta.json")
        meta = {}
        if meta_path.is_file():
            with open(meta_path, encoding="utf-8") as f:
                meta = json.load(f)
        histories[path.stem + "_" + str(len(histories))] = {
            "algo": meta.get("algo", path.stem),
            "seed": meta.get("seed", 0),
            "rows": load_history_csv(path),
        }

    if not plans and len(histories) < 2:
        raise PreconditionError(
            "nothing to evaluate: pass --plan/--checkpoint or at least 2 --history files"
        )
    radio = RadioConfig()
    if len(histories) >= 2:
        report = compare_runs(
            histories, plans, scenario, window=args.window,
            radio=radio, cell_size_m=args.cell_size,
        )
    else:
        report = ComparisonReport()
        report.plans = evaluate_plans(plans, scenario, radio, args.cell_size)

    for entry in report.plans:
        grid = plan_grid(entry["ids"], scenario, radio, args.cell_size)
        grid_to_raster(grid, out / f"grid_{entry['label']}.rsrp")
    report.to_json(out / "report.json")
    report.write_tables(out / "runs.csv", out / "plans.csv")
    for entry in report.plans:
        if scenario.reference_set():
            print(f"plan {entry['label']}: overlap {entry['overlap']:.4f}")
        print(
            f"plan {entry['label']}: frac>-80dBm "
            f"{entry['coverage']['frac_above_m80dbm']:.4f}, frac>-60dBm "
            f"{entry['coverage']['frac_above_m60dbm']:.4f}"
        )
    print(f"report written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleplan",
        description="Multi-objective base-station site selection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("gen", help="generate a synthetic scenario file",
                       formatter_class=fmt)
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--n", type=int, required=True, help="number of candidate sites")
    p.add_argument("--k", type=int, required=True, help="number of sites to select")
    p.add_argument("--profile", choices=["uniform", "urban-cluster"],
                   default="urban-cluster", help="spatial/feature profile")
    p.add_argument("-o", "--out", required=True, help="output CSV (or .json) path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a selection policy",
                       formatter_class=fmt)
    p.add_argument("--scenario", required=True, help="scenario CSV/JSON file")
    p.add_argument("--algo", choices=sorted(TRAINERS), default="grpo",
                   help="training algorithm")
    p.add_argument("--config", help="JSON training config (flags override it)")
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="training seed (default 0)")
    p.add_argument("--iterations", type=int, default=None,
                   help="overall iteration budget (default 3x stage cap)")
    p.add_argument("--group-size", dest="group_size", type=int, default=None,
                   help="trajectories per group (default 8)")
    p.add_argument("--lr", type=float, default=None,
                   help="learning rate (default 3e-4)")
    p.add_argument("--stage-cap", dest="stage_cap", type=int, default=None,
                   help="iterations per curriculum stage cap (default 400)")
    p.add_argument("--stage-window", dest="stage_window", type=int, default=None,
                   help="plateau window W (default 50)")
    p.add_argument("--optimizer", choices=["sgd", "adam"], default=None,
                   help="ascent rule (default sgd)")
    p.add_argument("--scorer", choices=["mock", "remote"], default=None,
                   help="semantic scorer (default mock)")
    p.add_argument("--scorer-url", dest="scorer_url", default=None,
                   help="remote scorer endpoint (TELEPLAN_SCORER_URL overrides)")
    p.add_argument("--no-sft", dest="no_sft", action="store_true",
                   help="skip reference pretraining even when ground truth exists")
    p.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("plan", help="decode a site plan from a checkpoint",
                       formatter_class=fmt)
    p.add_argument("--scenario", required=True, help="scenario CSV/JSON file")
    p.add_argument("--checkpoint", required=True, help="policy checkpoint (.npz)")
    p.add_argument("--out", default="plans", help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for --sample decoding and the random baseline")
    p.add_argument("--sample", action="store_true",
                   help="sample instead of argmax decoding")
    p.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("eval", help="evaluate plans and training runs",
                       formatter_class=fmt)
    p.add_argument("--scenario", required=True, help="scenario CSV/JSON file")
    p.add_argument("--plan", nargs="*", default=[], help="plan JSON files")
    p.add_argument("--history", nargs="*", default=[], help="history CSV files")
    p.add_argument("--checkpoint", default=None,
                   help="also evaluate the argmax plan of this checkpoint")
    p.add_argument("--out", default="reports", help="output directory")
    p.add_argument("--seed", type=int, default=0, help="decode seed")
    p.add_argument("--window", type=int, default=50,
                   help="final-reward averaging window")
    p.add_argument("--cell-size", dest="cell_size", type=float, default=None,
                   help="coverage grid cell size in meters (default: extent/96)")
    p.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PreconditionError, SchemaError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDiverged, ContractViolation, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
