"""Generation and visit records, their JSONL form, and path replay."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from ..blocks.dataset import BlockDataset
from ..chemrules.react import enumerate_products
from ..chemrules.templates import TemplateRegistry
from ..predictors.scoring import PropertyScore


@dataclass(frozen=True)
class PathStep:
    block_id: str
    template_id: str | None
    product_smiles: str

    def to_list(self) -> list:
        return [self.block_id, self.template_id, self.product_smiles]


@dataclass(frozen=True)
class GenerationRecord:
    product_smiles: str
    path: tuple[PathStep, ...]
    score: PropertyScore
    engine: str
    simulation_index: int
    iteration: int = 0
    run: int = 0
    terminal: bool = True

    def to_json(self) -> str:
        return json.dumps({
            "product_smiles": self.product_smiles,
            "path": [s.to_list() for s in self.path],
            "score": self.score.to_dict(),
            "engine": self.engine,
            "simulation_index": self.simulation_index,
            "iteration": self.iteration,
            "run": self.run,
            "terminal": self.terminal,
        }, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationRecord":
        return cls(
            product_smiles=d["product_smiles"],
            path=tuple(PathStep(*step) for step in d["path"]),
            score=PropertyScore.from_dict(d["score"]),
            engine=d["engine"],
            simulation_index=int(d["simulation_index"]),
            iteration=int(d.get("iteration", 0)),
            run=int(d.get("run", 0)),
            terminal=bool(d.get("terminal", True)),
        )


@dataclass(frozen=True)
class VisitRecord:
    state_smiles: str
    action_smiles: str
    visit_count: int
    siblings_total: int

    def __post_init__(self) -> None:
        if self.visit_count < 0 or self.visit_count > self.siblings_total:
            raise ValueError("visit count must lie in [0, siblings_total]")

    def to_json(self) -> str:
        return json.dumps({
            "state_smiles": self.state_smiles,
            "action_smiles": self.action_smiles,
            "visit_count": self.visit_count,
            "siblings_total": self.siblings_total,
        }, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "VisitRecord":
        return cls(d["state_smiles"], d["action_smiles"], int(d["visit_count"]), int(d["siblings_total"]))


def write_jsonl(records: Iterable, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
    return path


def _read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc.msg}") from None


def read_generations(path: str | Path) -> list[GenerationRecord]:
    return [GenerationRecord.from_dict(d) for d in _read_jsonl(path)]


def read_visits(path: str | Path) -> list[VisitRecord]:
    return [VisitRecord.from_dict(d) for d in _read_jsonl(path)]


def replay(record: GenerationRecord, ds: BlockDataset, registry: TemplateRegistry) -> bool:
    """Re-run the logged reactions and confirm every intermediate and the product."""
    if not record.path:
        return False
    first = record.path[0]
    try:
        state = ds.block(first.block_id).molecule
    except KeyError:
        return False
    if state.canonical_smiles != first.product_smiles:
        return False
    for step in record.path[1:]:
        try:
            block = ds.block(step.block_id).molecule
        except KeyError:
            return False
        hit = None
        for entry in enumerate_products(registry, state, block):
            if entry.template_id == step.template_id and entry.smiles == step.product_smiles:
                hit = entry.molecule
                break
        if hit is None:
            return False
        state = hit
    return state.canonical_smiles == record.product_smiles
