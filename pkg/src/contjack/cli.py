"""``contjack`` command line.

    contjack tables KIND N_MAX [--c C] [--out PATH] [--format csv|json]
    contjack figure-data [--out PATH] [--n-max N]
    contjack simulate --config PATH [--out PATH] [--seed S] [--jobs J] [--format json|csv] [--roundlog PATH]
    contjack experiment --config PATH [--out PATH] [--curve PATH] [--jobs J]

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 I/O failure.
``CONTJACK_LOG`` sets the log level (e.g. ``INFO``, ``DEBUG``).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .benchmarking import CURVE_FIELDS, convergence_rows, default_window, metrics_from_rewards
from .config import ConfigError, TournamentConfig
from .engine import RoundLogWriter, run_tournament
from .equilibrium import KINDS, nash_thresholds, rational_upper_bound, simple_threshold_upper_bound, threshold_table
from .numerics import NumericalError
from .strategies import BanditStrategy, ModelFreeStrategy

log = logging.getLogger("contjack")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3
FIGURE_FIELDS = ("n", "alpha", "beta", "gamma")


class RunFailed(RuntimeError):
    """A tournament stopped early; the partial result was still written."""


@contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="") as fh:
        yield fh


def seed_path(path: Optional[str], seed: int, multi: bool) -> Optional[str]:
    """``rounds.csv`` -> ``rounds.seed7.csv`` when several seeds share one setting."""
    if path is None or not multi:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}.seed{seed}{p.suffix}"))


def cmd_tables(args) -> int:
    if args.kind == "stable_upper" and args.c is None:
        raise ConfigError("--c", "stable_upper needs the stability constant")
    if args.n_max < 1:
        raise ConfigError("n_max", "must be >= 1")
    table = threshold_table(args.kind, args.n_max, args.c)
    with _output(args.out) as fh:
        if args.format == "json":
            json.dump({"kind": table.kind, "c": table.c, "tol": table.tol, "values": list(table.values)}, fh, indent=2)
            fh.write("\n")
        else:
            table.write_csv(fh)
    return EXIT_OK


def figure_rows(n_max: int = 14) -> list[dict]:
    a, b, g = nash_thresholds(n_max), simple_threshold_upper_bound(n_max), rational_upper_bound(n_max)
    return [{"n": n, "alpha": a[n], "beta": b[n], "gamma": g[n]} for n in range(1, n_max + 1)]


def cmd_figure_data(args) -> int:
    with _output(args.out) as fh:
        w = csv.DictWriter(fh, fieldnames=FIGURE_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in figure_rows(args.n_max):
            w.writerow({k: (f"{v:.10f}" if k != "n" else v) for k, v in row.items()})
    return EXIT_OK


def export_models(players, model_dir: Optional[str], seed: int, multi: bool) -> list[str]:
    if not model_dir:
        return []
    base = Path(model_dir) / (f"seed{seed}" if multi else "")
    base.mkdir(parents=True, exist_ok=True)
    written = []
    for pid, strat in enumerate(players):
        if isinstance(strat, ModelFreeStrategy):
            path = base / f"player{pid}_model.csv"
            with open(path, "w", newline="") as fh:
                strat.model.write_csv(fh)
        elif isinstance(strat, BanditStrategy):
            path = base / f"player{pid}_bandit.json"
            with open(path, "w") as fh:
                strat.export_json(fh)
        else:
            continue
        written.append(str(path))
    return written


def run_seed(cfg: TournamentConfig, seed: int, roundlog: Optional[str], model_dir: Optional[str], multi: bool):
    """One tournament, plus its round log and model exports. Also runs in worker processes."""
    players = cfg.build_players()
    echo = dict(cfg.resolved(), seed=seed)
    path = seed_path(roundlog, seed, multi)
    if path:
        with _output(path) as fh:
            result = run_tournament(
                players, cfg.rounds, seed, seating=cfg.seating, on_round=RoundLogWriter(fh),
                log_every=cfg.log_every, config=echo,
            )
    else:
        result = run_tournament(players, cfg.rounds, seed, seating=cfg.seating, config=echo)
    export_models(players, model_dir, seed, multi)
    log.info("seed %d: %d/%d rounds, means %s", seed, result.completed, cfg.rounds, result.mean_rewards.tolist())
    return result


def _run_all(cfg: TournamentConfig, seeds: list[int], jobs: int, roundlog, model_dir):
    multi = len(seeds) > 1
    if jobs > 1 and multi:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_seed, cfg, s, roundlog, model_dir, multi) for s in seeds]
            return [f.result() for f in futures]
    return [run_seed(cfg, s, roundlog, model_dir, multi) for s in seeds]


def _load(args) -> TournamentConfig:
    cfg = TournamentConfig.load(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed, seeds=None)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load(args)
    seeds = cfg.run_seeds()
    results = _run_all(cfg, seeds, args.jobs, args.roundlog or cfg.output.get("roundlog"), cfg.output.get("models"))
    out = args.out or cfg.output.get("result")
    with _output(out) as fh:
        if args.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["seed", "player_id", "name", "completed", "total", "mean"])
            for res in results:
                for pid, name in enumerate(res.player_names):
                    w.writerow([res.seed, pid, name, res.completed, repr(float(res.totals[pid])), repr(float(res.mean_rewards[pid]))])
        elif len(results) == 1:
            results[0].write_json(fh)
        else:
            json.dump({"config": cfg.resolved(), "runs": [r.to_json_dict() for r in results]}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _raise_if_partial(results)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _load(args)
    seeds = cfg.run_seeds()
    exp = cfg.experiment
    results = _run_all(cfg, seeds, args.jobs, None, cfg.output.get("models"))
    names = [spec["kind"] for spec in cfg.player_specs()]
    ne = names.index("nash") if "nash" in names else None
    ref = names.index("uniform") if "uniform" in names else None
    reports, curves = [], []
    for res in results:
        rewards = res.rewards[: res.completed]
        window = default_window(res.completed, exp.get("window_fraction", 0.1))
        reports.append(metrics_from_rewards(rewards, res.player_names, window, ne, ref, res.seed).to_json_dict())
        for row in convergence_rows(rewards, exp.get("curve_every", 1000), exp.get("curve_window", 10000), ne, ref):
            curves.append(dict(seed=res.seed, **row))
    with _output(args.out or cfg.output.get("result")) as fh:
        json.dump({"config": dict(cfg.resolved(), experiment=exp), "reports": reports}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    curve_path = args.curve or cfg.output.get("curve")
    if curve_path:
        with _output(curve_path) as fh:
            w = csv.DictWriter(fh, fieldnames=("seed",) + CURVE_FIELDS, lineterminator="\n")
            w.writeheader()
            w.writerows(curves)
    _raise_if_partial(results)
    return EXIT_OK


def _raise_if_partial(results) -> None:
    partial = [r for r in results if r.aborted]
    if partial:
        raise RunFailed("; ".join(f"seed {r.seed}: {r.aborted}" for r in partial))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contjack", description="Continuous blackjack workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="solve a threshold table")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("n_max", type=int)
    p.add_argument("--c", type=float, default=None, help="stability constant (stable_upper only)")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("figure-data", help="alpha, beta, gamma side by side")
    p.add_argument("--out", default=None)
    p.add_argument("--n-max", type=int, default=14)
    p.set_defaults(func=cmd_figure_data)

    for name, func, help_text in (
        ("simulate", cmd_simulate, "run a tournament from a config file"),
        ("experiment", cmd_experiment, "run a tournament and report metrics"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None, help="override the config seed(s)")
        p.add_argument("--jobs", type=int, default=1)
        if name == "simulate":
            p.add_argument("--format", choices=("json", "csv"), default="json")
            p.add_argument("--roundlog", default=None, help="write per-round CSV here")
        else:
            p.add_argument("--curve", default=None, help="write convergence CSV here")
        p.set_defaults(func=func)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("CONTJACK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; that code means numerical failure here
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, RunFailed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
