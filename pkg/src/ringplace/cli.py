"""Command-line front end.

Subcommands: generate, train, eval, compare, render, gradcheck. All are
deterministic given their flags; the seed defaults to DEFAULT_SEED rather
than entropy so reruns reproduce results. Exit codes: 0 success, 1 usage
error, 2 validation error, 3 runtime abort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

from .agents import (
    OracleScaleError,
    SaConfig,
    TrainConfig,
    TrainingDivergedError,
    brute_force_oracle,
    run_sa,
    save_curve,
    train_a2c,
    train_dqn,
)
from .board import (
    InstanceFormatError,
    PASSIVE_MODE,
    PASSIVE_NET_MODE,
    Placement,
    PcbInstance,
    ValidationError,
    load_instance,
    load_placement,
    save_instance,
    save_placement,
)
from .generate import (
    GenerationInfeasibleError,
    PRESETS,
    generate_preset,
    generate_synthetic,
)
from .metrics import IncompletePlacementError, evaluate_placement
from .nn import (
    CheckpointFormatError,
    NonFiniteGradientError,
    gradient_check_report,
    save_checkpoint,
)
from .render import RenderStyle, render_svg
from .report import emit_report, save_metrics_csv
from .reward import RewardConfig, build_gamma, save_gamma

DEFAULT_SEED = 0
GRADCHECK_THRESHOLD = 1e-4

METHOD_MODES = {
    "dqn": PASSIVE_MODE,
    "dqnnet": PASSIVE_NET_MODE,
    "a2c": PASSIVE_MODE,
}
ALL_METHODS = ("sa", "dqn", "dqnnet", "a2c")

_TRAIN_FIELDS = {f.name for f in fields(TrainConfig)}
_SA_FIELDS = {f.name for f in fields(SaConfig)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: error: {message}")


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config must be an object")
    unknown = set(data) - _TRAIN_FIELDS - _SA_FIELDS - {"mode"}
    if unknown:
        raise ValidationError(
            f"{path}: unknown config fields: {', '.join(sorted(unknown))}"
        )
    return data


def _train_config(mode: str, seed: int, file_cfg: dict, overrides: dict) -> TrainConfig:
    values: dict = {k: v for k, v in file_cfg.items() if k in _TRAIN_FIELDS}
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["mode"] = mode
    values["seed"] = seed
    if "hidden_dims" in values and not isinstance(values["hidden_dims"], tuple):
        values["hidden_dims"] = tuple(int(d) for d in values["hidden_dims"])
    return TrainConfig(**values)


def _sa_config(seed: int, file_cfg: dict, overrides: dict) -> SaConfig:
    values: dict = {k: v for k, v in file_cfg.items() if k in _SA_FIELDS}
    values.update({k: v for k, v in overrides.items() if v is not None})
    values["seed"] = seed
    return SaConfig(**values)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    out = _out_dir(args)
    if args.like is None and None in (args.passives, args.nets, args.actions):
        raise UsageError(
            "ringplace generate: error: give --like PRESET or all of "
            "--passives/--nets/--actions"
        )
    paths = []
    for i in range(args.count):
        seed = args.seed + i
        base = args.name or (args.like or f"gen-m{args.passives}")
        name = base if args.count == 1 else f"{base}-s{seed}"
        if args.like is not None:
            instance = generate_preset(
                args.like, name=name, seed=seed, board_size=args.board
            )
        else:
            instance = generate_synthetic(
                name=name,
                num_passives=args.passives,
                num_nets=args.nets,
                num_actions=args.actions,
                board_size=args.board,
                disparity=args.disparity,
                seed=seed,
                max_dim=args.max_dim,
            )
        path = out / f"{name}.pcb"
        save_instance(instance, path)
        paths.append(path)
        print(path)
    return 0


def _train_result(instance: PcbInstance, method: str, config: TrainConfig | SaConfig):
    if method == "sa":
        return run_sa(instance, config)
    if method == "a2c":
        return train_a2c(instance, config)
    return train_dqn(instance, config)


def cmd_train(args) -> int:
    out = _out_dir(args)
    instance = load_instance(args.instance)
    mode = METHOD_MODES[args.method]
    file_cfg = _load_config_file(args.config)
    overrides = {
        "gamma": args.gamma,
        "lr": args.lr,
        "minibatch": args.minibatch,
        "epsilon_start": args.epsilon_start,
        "epsilon_end": args.epsilon_end,
        "epsilon_horizon": args.epsilon_horizon,
        "target_update_period": args.target_update_period,
        "alpha": args.alpha,
        "k": args.k,
        "max_episodes": args.episodes,
        "hidden_dims": _parse_dims(args.hidden_dims),
    }
    config = _train_config(mode, args.seed, file_cfg, overrides)

    if args.export_gamma:
        table = build_gamma(instance, config.reward_config())
        save_gamma(table, out / f"{instance.name}-gamma.txt")

    started = time.perf_counter()
    try:
        result = _train_result(instance, args.method, config)
    except TrainingDivergedError as exc:
        save_curve(exc.curve, out / "curves.csv")
        print(f"error: {exc}", file=sys.stderr)
        return 3
    seconds = time.perf_counter() - started

    prefix = f"{instance.name}-{args.method}"
    save_curve(result.curve, out / "curves.csv")
    save_checkpoint(result.policy_net, out / f"{prefix}.ckpt")
    save_placement(
        instance,
        result.placement,
        out / f"{prefix}.place",
        tewl=result.metrics.tewl,
        overlaps=result.metrics.overlap_pairs,
    )
    save_metrics_csv(
        [(instance.name, args.method, result.metrics, seconds)],
        out / "metrics.csv",
    )
    print(
        f"{instance.name} {args.method}: tewl={result.metrics.tewl:g} "
        f"overlap_pairs={result.metrics.overlap_pairs} "
        f"crossing_count={result.metrics.crossing_count} "
        f"({seconds:.1f}s, {len(result.curve)} episodes)"
    )
    return 0


def cmd_eval(args) -> int:
    out = _out_dir(args)
    instance = load_instance(args.instance)
    placement = load_placement(instance, args.placement)
    started = time.perf_counter()
    metrics = evaluate_placement(instance, placement)
    seconds = time.perf_counter() - started
    save_metrics_csv(
        [(instance.name, args.method, metrics, seconds)], out / "metrics.csv"
    )
    print(
        f"tewl={metrics.tewl:g} overlap_pairs={metrics.overlap_pairs} "
        f"crossing_count={metrics.crossing_count}"
    )
    return 0


def cmd_render(args) -> int:
    out = _out_dir(args)
    instance = load_instance(args.instance)
    placement = None
    if args.placement is not None:
        placement = load_placement(instance, args.placement)
    style = RenderStyle(scale=args.scale, labels=not args.no_labels)
    path = out / f"{instance.name}.svg"
    path.write_text(render_svg(instance, placement, style), encoding="utf-8")
    print(path)
    return 0


def _compare_cell(job: dict) -> dict:
    """One (instance, method, seed) run; executed in a worker process."""
    started = time.perf_counter()
    result: dict = {
        "path": job["path"],
        "method": job["method"],
        "seed": job["seed"],
        "assignment": None,
        "error": None,
    }
    try:
        instance = load_instance(job["path"])
        if job["method"] == "sa":
            config = _sa_config(job["seed"], job["file_cfg"], job["sa_overrides"])
        else:
            config = _train_config(
                METHOD_MODES[job["method"]],
                job["seed"],
                job["file_cfg"],
                job["train_overrides"],
            )
        out = _train_result(instance, job["method"], config)
        result["assignment"] = [
            out.placement.assignment[s] for s in range(instance.num_passives)
        ]
    except Exception as exc:
        result["error"] = f"{type(exc).__name__}: {exc}"
    result["seconds"] = time.perf_counter() - started
    return result


def cmd_compare(args) -> int:
    out = _out_dir(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ALL_METHODS:
            raise UsageError(
                f"ringplace compare: error: unknown method {m!r} "
                f"(choose from {', '.join(ALL_METHODS)})"
            )
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    except ValueError:
        raise UsageError(
            f"ringplace compare: error: --seeds must be comma-separated "
            f"integers, got {args.seeds!r}"
        ) from None
    if not methods or not seeds or not args.instances:
        raise UsageError("ringplace compare: error: need instances, methods, seeds")

    file_cfg = _load_config_file(args.config)
    train_overrides = {
        "alpha": args.alpha,
        "k": args.k,
        "max_episodes": args.episodes,
    }
    sa_overrides = {"iterations": args.sa_iterations}

    instances = {path: load_instance(path) for path in args.instances}
    jobs = [
        {
            "path": path,
            "method": method,
            "seed": seed,
            "file_cfg": file_cfg,
            "train_overrides": train_overrides,
            "sa_overrides": sa_overrides,
        }
        for path in args.instances
        for method in methods
        for seed in seeds
    ]

    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_compare_cell, jobs))
    else:
        outcomes = [_compare_cell(job) for job in jobs]

    failed = []
    best_cells: dict[tuple[str, str], tuple[float, Placement]] = {}
    for outcome in outcomes:
        instance = instances[outcome["path"]]
        if outcome["error"] is not None:
            failed.append(
                f"{instance.name}/{outcome['method']}/seed{outcome['seed']}: "
                f"{outcome['error']}"
            )
            continue
        placement = Placement.from_mapping(
            instance, dict(enumerate(outcome["assignment"]))
        )
        metrics = evaluate_placement(instance, placement)
        svg = out / f"{instance.name}-{outcome['method']}-s{outcome['seed']}.svg"
        svg.write_text(render_svg(instance, placement), encoding="utf-8")
        key = (instance.name, outcome["method"])
        if key not in best_cells or metrics.tewl < best_cells[key][0]:
            best_cells[key] = (metrics.tewl, placement)

    rows = []
    for path in args.instances:
        instance = instances[path]
        for method in methods:
            key = (instance.name, method)
            if key in best_cells:
                _, placement = best_cells[key]
                rows.append(
                    (
                        instance.name,
                        method,
                        evaluate_placement(instance, placement),
                        instance.gt_tewl,
                    )
                )
            else:
                rows.append((instance.name, method, None, instance.gt_tewl))
        if args.oracle:
            try:
                assignment, _ = brute_force_oracle(instance)
                placement = Placement.from_mapping(
                    instance, dict(enumerate(assignment))
                )
                rows.append(
                    (
                        instance.name,
                        "oracle",
                        evaluate_placement(instance, placement),
                        instance.gt_tewl,
                    )
                )
            except OracleScaleError as exc:
                print(f"oracle skipped for {instance.name}: {exc}", file=sys.stderr)

    csv_text, table_text = emit_report(rows)
    (out / "report.csv").write_text(csv_text, encoding="utf-8")
    (out / "report.txt").write_text(table_text, encoding="utf-8")
    print(table_text, end="")
    for line in failed:
        print(f"failed: {line}", file=sys.stderr)
    return 3 if failed else 0


def cmd_gradcheck(args) -> int:
    report = gradient_check_report(seed=args.seed, corrupt=args.corrupt)
    ok = True
    for name in ("dqn", "ac"):
        err = report[name]
        ok = ok and err < GRADCHECK_THRESHOLD
        print(f"{name} loss max relative error: {err:.3e}")
    print("PASS" if ok else f"FAIL (threshold {GRADCHECK_THRESHOLD:g})")
    return 0 if ok else 3


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _parse_dims(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        dims = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValidationError(f"invalid hidden dims {text!r}") from exc
    if not dims:
        raise ValidationError(f"invalid hidden dims {text!r}")
    return dims


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--gamma", type=float, default=None, help="discount factor")
    sub.add_argument("--lr", type=float, default=None, help="learning rate")
    sub.add_argument("--minibatch", type=int, default=None)
    sub.add_argument("--epsilon-start", type=float, default=None)
    sub.add_argument("--epsilon-end", type=float, default=None)
    sub.add_argument("--epsilon-horizon", type=int, default=None)
    sub.add_argument("--target-update-period", type=int, default=None)
    sub.add_argument("--alpha", type=float, default=None, help="reward blend weight")
    sub.add_argument("--k", type=int, default=None, help="proximity Top-K size")
    sub.add_argument("--episodes", type=int, default=None, help="episode budget")
    sub.add_argument("--hidden-dims", default=None, help="e.g. 128,64,64")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ringplace",
        description="Place passives on a slot ring around a main component.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic instance files")
    p.add_argument("--like", choices=sorted(PRESETS), default=None,
                   help="preset with the statistics of one evaluation board")
    p.add_argument("--passives", type=int, default=None)
    p.add_argument("--nets", type=int, default=None)
    p.add_argument("--actions", type=int, default=None)
    p.add_argument("--board", type=float, default=100.0, help="square board side")
    p.add_argument("--disparity", type=float, default=1.0,
                   help="min/max passive dimension ratio in (0, 1]")
    p.add_argument("--max-dim", type=float, default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("-o", "--out", default=".")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one method on one instance")
    p.add_argument("instance")
    p.add_argument("--method", choices=sorted(METHOD_MODES), default="dqn")
    p.add_argument("--config", default=None, help="JSON config file; flags win")
    _add_train_flags(p)
    p.add_argument("--export-gamma", action="store_true",
                   help="also write the proximity reward table")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("-o", "--out", default=".")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a placement file")
    p.add_argument("instance")
    p.add_argument("placement")
    p.add_argument("--method", default="eval", help="method label for the CSV row")
    p.add_argument("-o", "--out", default=".")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="run methods x seeds over instances")
    p.add_argument("instances", nargs="+")
    p.add_argument("--methods", default=",".join(ALL_METHODS))
    p.add_argument("--seeds", default=str(DEFAULT_SEED))
    p.add_argument("--workers", type=int, default=None,
                   help="parallel worker processes (default: CPU count)")
    p.add_argument("--oracle", action="store_true",
                   help="add exhaustive-optimum rows where tractable")
    p.add_argument("--config", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--sa-iterations", type=int, default=None)
    p.add_argument("-o", "--out", default=".")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="draw an instance or placement as SVG")
    p.add_argument("instance")
    p.add_argument("--placement", default=None)
    p.add_argument("--scale", type=float, default=8.0)
    p.add_argument("--no-labels", action="store_true")
    p.add_argument("-o", "--out", default=".")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gradcheck", help="finite-difference audit of both losses")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--corrupt", action="store_true",
                   help="negative control: bias one gradient entry")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return code if isinstance(code, int) else 0
    except (
        InstanceFormatError,
        ValidationError,
        GenerationInfeasibleError,
        IncompletePlacementError,
        CheckpointFormatError,
        OracleScaleError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDivergedError, NonFiniteGradientError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
