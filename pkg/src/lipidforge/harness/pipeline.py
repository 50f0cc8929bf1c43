"""Run directories, engine runs and the iterative policy-training loop."""

from __future__ import annotations

import json
import logging
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..blocks.dataset import BlockDataset, load_dataset, save_dataset
from ..blocks.toy import toy_dataset
from ..chemrules.templates import TemplateRegistry, default_registry, load_templates
from ..policy.core import FeatureCache, PolicyPrior, make_training_pairs, train
from ..policy.network import PolicyNetwork, load_weights
from ..predictors.scoring import RuleBasedScorer
from ..search.engines import GuidedMCTS, SearchConfig, SearchResult, random_generate, run_mcts
from ..search.records import GenerationRecord, VisitRecord, write_jsonl
from ..search.space import ReactionSpace, derive_seed
from .config import RunConfig
from .evaluation import EvalReport, evaluate, write_report, write_series

log = logging.getLogger(__name__)

SNAPSHOT = re.compile(r"iter(\d+)\.lfpn$")


class StageError(RuntimeError):
    """A pipeline failure tagged with the stage (and iteration) it happened in."""

    def __init__(self, stage: str, cause: BaseException, iteration: int | None = None):
        where = stage if iteration is None else f"{stage} (iteration {iteration})"
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.iteration = iteration


@dataclass
class RunLayout:
    root: Path

    @property
    def blocks(self) -> Path:
        return self.root / "blocks"

    @property
    def logs(self) -> Path:
        return self.root / "logs"

    @property
    def weights(self) -> Path:
        return self.root / "weights"

    @property
    def reports(self) -> Path:
        return self.root / "reports"

    def create(self, config: RunConfig) -> "RunLayout":
        for d in (self.blocks, self.logs, self.weights, self.reports):
            d.mkdir(parents=True, exist_ok=True)
        (self.root / "config.snapshot").write_text(config.to_text(exclude=("out", "run_id")), encoding="utf-8")
        return self

    def snapshot(self, iteration: int) -> Path:
        return self.weights / f"iter{iteration:02d}.lfpn"

    def latest_snapshot(self) -> tuple[int, Path] | None:
        found = [(int(m.group(1)), p) for p in self.weights.glob("iter*.lfpn") if (m := SNAPSHOT.search(p.name))]
        return max(found) if found else None


def run_directory(config: RunConfig) -> RunLayout:
    run_id = config.run_id or f"{config.digest()}-{time.strftime('%Y%m%d-%H%M%S')}"
    return RunLayout(Path(config.out) / run_id)


@dataclass
class Workspace:
    """Everything a run needs besides the network."""

    config: RunConfig
    train: BlockDataset
    test: BlockDataset | None
    registry: TemplateRegistry
    scorer: RuleBasedScorer
    space: ReactionSpace = field(init=False)
    test_space: ReactionSpace | None = field(init=False)

    def __post_init__(self) -> None:
        self.space = ReactionSpace(self.train, self.registry, self.scorer)
        self.test_space = ReactionSpace(self.test, self.registry, self.scorer) if self.test else None


def open_workspace(config: RunConfig) -> Workspace:
    config.validate_paths()
    test = None
    if config.dataset == "toy":
        got = toy_dataset(config.seed, config.toy_heads, config.toy_tails, config.toy_test_heads)
        train_ds, test = got if isinstance(got, tuple) else (got, None)
    else:
        train_ds = load_dataset(config.dataset)
    if config.test_dataset:
        test = load_dataset(config.test_dataset)
    registry = load_templates(config.templates) if config.templates else default_registry()
    return Workspace(config, train_ds, test, registry, RuleBasedScorer(config.ionization()))


def initial_network(config: RunConfig) -> PolicyNetwork:
    return PolicyNetwork.create(config.hidden, seed=derive_seed(config.seed, "init") % 2**32,
                                dropout=config.dropout)


def _search_config(config: RunConfig, iteration: int, run: int, stream: str = "search",
                   simulations: int | None = None) -> SearchConfig:
    return SearchConfig(
        engine="guided" if stream == "test" else config.engine,
        simulations=simulations if simulations is not None else config.simulations,
        c=config.c, max_expand=config.max_expand,
        seed=derive_seed(config.seed, stream, iteration) % 2**63,
        iteration=iteration, run=run,
    )


def generate(ws: Workspace, net: PolicyNetwork | None = None) -> SearchResult:
    """One configured engine run (all ``runs_per_iteration`` trees for MCTS), logs merged in order."""
    cfg = ws.config
    if cfg.engine == "random":
        rng = random.Random(derive_seed(cfg.seed, "random"))
        return random_generate(ws.space, cfg.random_count, rng)
    prior = PolicyPrior(net) if (cfg.engine == "guided" and net is not None) else None
    merged = SearchResult()
    for run in range(cfg.runs_per_iteration):
        res = run_mcts(_search_config(cfg, 0, run), ws.space, prior)
        merged.generations += res.generations
        merged.visits += res.visits
        merged.path_lengths += res.path_lengths
    return merged


@dataclass
class IterationOutcome:
    iteration: int
    report: EvalReport
    test_report: EvalReport | None
    pairs: int
    epoch_losses: list[float]


def _stage(name: str, iteration: int, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage attached
        raise StageError(name, exc, iteration) from exc


def run_iteration(ws: Workspace, net: PolicyNetwork, iteration: int, layout: RunLayout,
                  features: FeatureCache | None = None) -> IterationOutcome:
    """Search with the current snapshot, train on the pooled visits, save the next snapshot.

    Every random stream is derived from (master seed, stream name, iteration),
    so an iteration depends only on the snapshot it starts from.
    """
    cfg = ws.config
    features = features or FeatureCache()
    prior = PolicyPrior(net)
    gens: list[GenerationRecord] = []
    visits: list[VisitRecord] = []
    for run in range(cfg.runs_per_iteration):
        res = _stage("search", iteration, GuidedMCTS(ws.space, _search_config(cfg, iteration, run), prior).run)
        gens += res.generations
        visits += res.visits
    tag = f"iter{iteration:02d}"
    write_jsonl(gens, layout.logs / f"{tag}.generations.jsonl")
    write_jsonl(visits, layout.logs / f"{tag}.visits.jsonl")
    report = _stage("evaluate", iteration, evaluate, gens, f"train {tag}",
                    lipid_threshold=cfg.lipid_threshold)

    pairs = make_training_pairs(visits, cfg.tau, cfg.pairs_per_state, cfg.eps_smooth,
                                random.Random(derive_seed(cfg.seed, "pairs", iteration)))
    if pairs:
        tr = _stage("train", iteration, train, net, pairs, cfg.epochs, cfg.lr,
                    random.Random(derive_seed(cfg.seed, "shuffle", iteration)), cfg.batch_size, cfg.loss,
                    derive_seed(cfg.seed, "dropout", iteration), features)
        losses = tr.epoch_losses
    else:
        log.warning("iteration %d produced no training pairs; weights carried over", iteration)
        losses = []
    _stage("snapshot", iteration, net.save, layout.snapshot(iteration))

    test_report = None
    if ws.test_space is not None and cfg.test_simulations > 0:
        tcfg = _search_config(cfg, iteration, 0, stream="test", simulations=cfg.test_simulations)
        tres = _stage("test", iteration, GuidedMCTS(ws.test_space, tcfg, PolicyPrior(net)).run)
        write_jsonl(tres.generations, layout.logs / f"{tag}.test.generations.jsonl")
        if tres.generations:
            test_report = evaluate(tres.generations, f"test {tag}", lipid_threshold=cfg.lipid_threshold)

    outcome = IterationOutcome(iteration, report, test_report, len(pairs), losses)
    reports = [report] + ([test_report] if test_report else [])
    write_report(reports, layout.reports, tag)
    (layout.reports / f"{tag}.train.json").write_text(
        json.dumps({"iteration": iteration, "pairs": len(pairs), "epoch_losses": losses}, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return outcome


def train_loop(ws: Workspace, layout: RunLayout, resume: bool = False) -> list[IterationOutcome]:
    """``iterations`` rounds of search -> pooled visits -> training.

    Visit data are reset at every iteration. With ``resume`` the loop picks
    up after the newest snapshot in the run directory.
    """
    cfg = ws.config
    start, net = 1, initial_network(cfg)
    if resume:
        latest = layout.latest_snapshot()
        if latest is not None:
            start = latest[0] + 1
            net = load_weights(latest[1], expect_dims=net.dims)
            log.info("resuming after snapshot %s", latest[1].name)
    if start == 1:
        save_dataset(ws.train, layout.blocks / "train.tsv")
        if ws.test is not None:
            save_dataset(ws.test, layout.blocks / "test.tsv")
    features = FeatureCache()
    outcomes = []
    for it in range(start, cfg.iterations + 1):
        outcome = run_iteration(ws, net, it, layout, features)
        log.info("iteration %d: unique ionizable rate %.4f over %d unique products",
                 it, outcome.report.unique_ionizable_rate, outcome.report.n_unique)
        outcomes.append(outcome)
    write_series(collect_series(layout), layout.reports)
    return outcomes


def collect_series(layout: RunLayout) -> list[tuple[str, list[tuple[int, float]]]]:
    """Rate-per-iteration series rebuilt from the per-iteration report files."""
    train_pts, test_pts = [], []
    for path in sorted(layout.reports.glob("iter*.jsonl")):
        it = int(path.name[4:6])
        for line in path.read_text(encoding="utf-8").splitlines():
            rep = EvalReport.from_dict(json.loads(line))
            (test_pts if rep.label.startswith("test") else train_pts).append((it, rep.unique_ionizable_rate))
    series = [("train heads", train_pts)]
    if test_pts:
        series.append(("test heads", test_pts))
    return series
