"""Command line: ``lipidforge blocks build | generate | train | eval | report``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from ..blocks.build import build_dataset
from ..blocks.dataset import save_dataset
from ..blocks.filters import TailFilterConfig
from ..policy.network import PolicyNetwork, WeightFileError, load_weights
from ..predictors.scoring import RuleBasedScorer
from ..search.records import read_generations, write_jsonl
from .config import ConfigError, RunConfig, load_config, split_overrides
from .evaluation import EmptyLogError, EvalReport, comparison_table, evaluate, read_reports, write_report, write_series
from .pipeline import RunLayout, StageError, generate, initial_network, open_workspace, run_directory, train_loop

log = logging.getLogger("lipidforge")


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = split_overrides(getattr(args, "overrides", []) or [])
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    if getattr(args, "out", None) is not None:
        overrides["out"] = args.out
    if getattr(args, "run_id", None) is not None:
        overrides["run_id"] = args.run_id
    return load_config(args.config, overrides)


def cmd_blocks_build(args: argparse.Namespace) -> int:
    for p in filter(None, (args.heads, args.lipids, args.tails)):
        if not Path(p).exists():
            print(f"error: input file {p} not found", file=sys.stderr)
            return 2
    tail_config = TailFilterConfig(mode=args.tail_mode, theta_sim=args.theta_sim, ged_limit=args.ged_limit)
    ds, report = build_dataset(args.heads, args.lipids, args.tails, tail_config=tail_config,
                               tail_distance=args.tail_distance)
    for line in report.lines():
        print(line)
    if not ds.heads and not ds.tails:
        print("warning: no building blocks survived the filters", file=sys.stderr)
        return 1
    path = save_dataset(ds, args.out)
    print(f"wrote {len(ds.heads)} heads and {len(ds.tails)} tails to {path}")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    ws = open_workspace(cfg)
    net: PolicyNetwork | None = None
    if cfg.engine == "guided":
        net = initial_network(cfg)
        if cfg.weights:
            net = load_weights(cfg.weights, expect_dims=net.dims)
    result = generate(ws, net)
    layout = run_directory(cfg).create(cfg)
    save_dataset(ws.train, layout.blocks / "train.tsv")
    write_jsonl(result.generations, layout.logs / f"{cfg.engine}.generations.jsonl")
    if cfg.engine != "random":
        write_jsonl(result.visits, layout.logs / f"{cfg.engine}.visits.jsonl")
    if not result.generations:
        print("no products generated", file=sys.stderr)
        return 1
    report = evaluate(result.generations, cfg.engine, lipid_threshold=cfg.lipid_threshold)
    write_report([report], layout.reports, "eval")
    print(f"run directory: {layout.root}")
    print(f"products: {report.n_products}  unique: {report.n_unique}  "
          f"unique ionizable rate: {report.unique_ionizable_rate:.4f}")
    if getattr(result, "exhausted", False):
        print("warning: attempt budget exhausted before reaching the requested count", file=sys.stderr)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.resume:
        layout = RunLayout(Path(args.resume))
        if not layout.root.is_dir():
            raise ConfigError(f"no run directory at {layout.root}")
    else:
        layout = run_directory(cfg).create(cfg)
    ws = open_workspace(cfg)
    outcomes = train_loop(ws, layout, resume=bool(args.resume))
    print(f"run directory: {layout.root}")
    for o in outcomes:
        test = f"  test rate {o.test_report.unique_ionizable_rate:.4f}" if o.test_report else ""
        print(f"iteration {o.iteration}: unique {o.report.n_unique}  "
              f"rate {o.report.unique_ionizable_rate:.4f}  pairs {o.pairs}{test}")
    return 0


def cmd_eval(args: argparse.Namespace) -> EvalReport | list[EvalReport]:
    scorer = RuleBasedScorer()
    reports = []
    for path in args.logs:
        records = read_generations(path)
        label = Path(path).name.split(".")[0]
        reports.append(evaluate(records, label, scorer=scorer))
    print(comparison_table(reports), end="")
    if args.out:
        table, lines = write_report(reports, args.out, args.stem)
        print(f"wrote {table} and {lines}")
    return reports[0] if len(reports) == 1 else reports


def cmd_report(args: argparse.Namespace) -> int:
    series = []
    for path in args.reports:
        for rep in read_reports(path):
            points = list(rep.series)
            if not points:
                # one report without a series contributes a single point
                points = [(len(series) + 1, rep.unique_ionizable_rate)]
            series.append((rep.label, points))
    csv_path, svg_path = write_series(series, args.out, args.stem)
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipidforge", description="Ionizable lipid design by guided tree search.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    blocks = sub.add_parser("blocks", help="building-block datasets")
    bsub = blocks.add_subparsers(dest="blocks_command", required=True)
    build = bsub.add_parser("build", help="filter corpora into a head/tail dataset")
    build.add_argument("--heads-in", dest="heads", required=True, help="SMILES file of head candidates")
    build.add_argument("--lipids-in", dest="lipids", required=True, help="SMILES file of reference lipids")
    build.add_argument("--tails-in", dest="tails", help="SMILES file of tail candidates (default: the head corpus)")
    build.add_argument("--tail-distance", type=int, default=2, help="hydrophilic-proximity radius")
    build.add_argument("--theta-sim", type=float, default=0.9, help="Tanimoto acceptance threshold")
    build.add_argument("--ged-limit", type=int, default=64, help="largest tail candidate, in heavy atoms")
    build.add_argument("--tail-mode", choices=("either", "ged", "fingerprint"), default="either")
    build.add_argument("--out", required=True, help="output file or directory")
    build.set_defaults(func=cmd_blocks_build)

    def run_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output root directory")
        p.add_argument("--run-id", help="run directory name (default: config hash + timestamp)")
        p.add_argument("overrides", nargs="*", metavar="KEY=VALUE", help="config overrides")

    gen = sub.add_parser("generate", help="run one engine and log its products")
    run_options(gen)
    gen.set_defaults(func=cmd_generate)

    tr = sub.add_parser("train", help="iterative search + policy training")
    run_options(tr)
    tr.add_argument("--resume", metavar="RUN_DIR", help="continue a run after its newest snapshot")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="rate generation logs (several logs give a comparison table)")
    ev.add_argument("logs", nargs="+")
    ev.add_argument("--out", help="directory for the text table and JSON lines")
    ev.add_argument("--stem", default="eval")
    ev.set_defaults(func=cmd_eval)

    rep = sub.add_parser("report", help="rate-per-iteration CSV and SVG from eval reports")
    rep.add_argument("reports", nargs="+", help="JSON-lines report files")
    rep.add_argument("--out", required=True)
    rep.add_argument("--stem", default="series")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args)
    except (ConfigError, EmptyLogError, WeightFileError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error in stage {exc}", file=sys.stderr)
        return 3
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
