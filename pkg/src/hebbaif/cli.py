"""
Command line entry point.

    python -m hebbaif train --seed 1 --out runs/default
    python -m hebbaif train --replay --out runs/replay
    python -m hebbaif sweep --param m_q --values 2,8,64 --out runs/mq
    python -m hebbaif baseline q --seeds 10 --out runs/q
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import harness
from .baselines import QConfig
from .config import ExperimentConfig, coerce, load_config


def _assignment(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = (part.strip() for part in text.split("=", 1))
    return key, value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--set", dest="overrides", type=_assignment, action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override one config entry (repeatable)")

    parser = argparse.ArgumentParser(prog="hebbaif", description=__doc__.split("\n")[1])
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", parents=[common], help="run all seeds of one config")
    train.add_argument("--replay", action="store_true", help="replay one stored episode "
                       "after each real episode")

    sw = sub.add_parser("sweep", parents=[common], help="one curve per parameter value")
    sw.add_argument("--param", required=True)
    sw.add_argument("--values", required=True, help="comma separated values")

    base = sub.add_parser("baseline", help="comparison methods")
    base_sub = base.add_subparsers(dest="method", required=True)
    q = base_sub.add_parser("q", parents=[common], help="tabular Q-learning")
    q.add_argument("--seeds", type=int, default=10)
    q.add_argument("--episodes", type=int, default=QConfig.episodes)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    updates = {key: coerce(key, value) for key, value in args.overrides}
    if getattr(args, "replay", False):
        updates["replay"] = True
    return replace(cfg, **updates)


def cmd_train(args) -> None:
    cfg = resolve_config(args)
    out = harness.ensure_dir(args.out)
    (out / "config.txt").write_text(cfg.to_text())
    results, agents = harness.run_seeds(cfg, args.seed, return_agents=True)
    stats = harness.aggregate(results, cfg.ma_window)
    stats.write_csv(out / "curve.csv")
    harness.write_runs_csv(out / "runs.csv", results)
    for i, agent in enumerate(agents):
        harness.save_checkpoint(out / f"checkpoint_{i}.npz", agent)
    print(f"final mean success {stats.final_mean(cfg.ma_window):.3f} -> {out}")


def cmd_sweep(args) -> None:
    cfg = resolve_config(args)
    spec = harness.SweepSpec(args.param, args.values.split(","), cfg)
    out = harness.ensure_dir(args.out)
    for value, stats in harness.sweep(spec, args.seed):
        path = out / f"curve_{args.param}={value}.csv"
        stats.write_csv(path)
        print(f"{args.param}={value}: final mean success {stats.final_mean():.3f}")


def cmd_q(args) -> None:
    if args.config or args.overrides:
        raise ValueError("the Q-learning baseline takes no config entries")
    out = harness.ensure_dir(args.out)
    stats = harness.q_learning_curves(QConfig(episodes=args.episodes), args.seeds, args.seed)
    stats.write_csv(out / "curve.csv")
    print(f"final mean success {stats.final_mean():.3f} -> {out}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            cmd_train(args)
        elif args.command == "sweep":
            cmd_sweep(args)
        else:
            cmd_q(args)
    except (OSError, KeyError, ValueError) as err:
        print(f"hebbaif: error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
