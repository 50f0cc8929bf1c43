"""Building-block datasets: construction, persistence and sampling."""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Literal, Sequence

from ..molgraph.descriptors import FunctionalGroupReport, functional_groups
from ..molgraph.fingerprint import Fingerprint, morgan_fingerprint
from ..molgraph.molecule import Molecule
from ..molgraph.smiles import parse_smiles

log = logging.getLogger(__name__)

Kind = Literal["head", "tail"]
DATASET_FILE = "blocks.tsv"
PROVENANCE_SUFFIX = ".provenance.json"


@dataclass(frozen=True)
class BuildingBlock:
    id: str
    smiles: str
    kind: Kind

    @classmethod
    def from_molecule(cls, ident: str, mol: Molecule, kind: Kind) -> "BuildingBlock":
        block = cls(ident, mol.canonical_smiles, kind)
        block.__dict__["molecule"] = mol
        return block

    @cached_property
    def molecule(self) -> Molecule:
        return parse_smiles(self.smiles)

    @property
    def groups(self) -> FunctionalGroupReport:
        return functional_groups(self.molecule)

    @property
    def fingerprint(self) -> Fingerprint:
        return morgan_fingerprint(self.molecule)


@dataclass
class BlockDataset:
    heads: list[BuildingBlock] = field(default_factory=list)
    tails: list[BuildingBlock] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for kind, blocks in (("head", self.heads), ("tail", self.tails)):
            seen = set()
            for b in blocks:
                if b.kind != kind:
                    raise ValueError(f"block {b.id} of kind {b.kind} listed as {kind}")
                if b.smiles in seen:
                    raise ValueError(f"duplicate {kind} {b.smiles}")
                seen.add(b.smiles)

    @cached_property
    def by_id(self) -> dict[str, BuildingBlock]:
        return {b.id: b for b in (*self.heads, *self.tails)}

    def block(self, ident: str) -> BuildingBlock:
        return self.by_id[ident]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockDataset):
            return NotImplemented
        key = lambda bs: sorted((b.id, b.smiles) for b in bs)  # noqa: E731
        return key(self.heads) == key(other.heads) and key(self.tails) == key(other.tails)

    def digest(self) -> str:
        h = hashlib.sha256()
        for b in sorted((*self.heads, *self.tails), key=lambda b: (b.kind, b.id)):
            h.update(f"{b.kind}\t{b.id}\t{b.smiles}\n".encode())
        return h.hexdigest()


@dataclass
class LoadStats:
    lines: int = 0
    loaded: int = 0
    duplicates: int = 0
    malformed: int = 0


def dedupe(blocks: Iterable[BuildingBlock]) -> tuple[list[BuildingBlock], int]:
    out, seen, dropped = [], set(), 0
    for b in blocks:
        if b.smiles in seen:
            dropped += 1
            continue
        seen.add(b.smiles)
        out.append(b)
    return out, dropped


def save_dataset(ds: BlockDataset, path: str | Path, extra: dict | None = None) -> Path:
    """Write ``kind<TAB>id<TAB>smiles`` lines plus a JSON provenance sidecar."""
    path = Path(path)
    if path.is_dir() or path.suffix == "":
        path.mkdir(parents=True, exist_ok=True)
        path = path / DATASET_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{b.kind}\t{b.id}\t{b.smiles}\n" for b in (*ds.heads, *ds.tails)]
    path.write_text("".join(lines), encoding="utf-8")
    provenance = dict(ds.provenance)
    provenance.update(extra or {})
    provenance.update({"dataset_digest": ds.digest(), "heads": len(ds.heads), "tails": len(ds.tails)})
    Path(str(path) + PROVENANCE_SUFFIX).write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n")
    return path


def load_dataset(paths: str | Path | Sequence[str | Path], stats: LoadStats | None = None) -> BlockDataset:
    if isinstance(paths, (str, Path)):
        paths = [paths]
    stats = stats if stats is not None else LoadStats()
    heads, tails = [], []
    provenance: dict = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            p = p / DATASET_FILE
        side = Path(str(p) + PROVENANCE_SUFFIX)
        if side.exists():
            provenance = json.loads(side.read_text())
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            stats.lines += 1
            parts = line.split("\t")
            if len(parts) != 3 or parts[0] not in ("head", "tail") or not parts[2]:
                log.warning("%s:%d: malformed dataset line skipped", p, lineno)
                stats.malformed += 1
                continue
            kind, ident, smiles = parts
            try:
                mol = parse_smiles(smiles)
            except ValueError as exc:
                log.warning("%s:%d: %s", p, lineno, exc)
                stats.malformed += 1
                continue
            block = BuildingBlock.from_molecule(ident, mol, kind)  # type: ignore[arg-type]
            (heads if kind == "head" else tails).append(block)
    heads, dh = dedupe(heads)
    tails, dt = dedupe(tails)
    stats.duplicates += dh + dt
    stats.loaded = len(heads) + len(tails)
    if dh + dt:
        log.info("dropped %d duplicate blocks", dh + dt)
    return BlockDataset(heads, tails, provenance)


def sample_subsets(ds: BlockDataset, head_n: int, tail_n: int, seed: int,
                   test_heads: int = 0) -> BlockDataset | tuple[BlockDataset, BlockDataset]:
    """Seeded sample without replacement.

    With ``test_heads`` > 0 a second dataset of held-out heads (disjoint from
    the training heads, same tails) is returned as well.
    """
    if head_n + test_heads > len(ds.heads):
        raise ValueError(f"requested {head_n + test_heads} heads from {len(ds.heads)}")
    if tail_n > len(ds.tails):
        raise ValueError(f"requested {tail_n} tails from {len(ds.tails)}")
    rng = random.Random(seed)
    heads = rng.sample(ds.heads, head_n + test_heads)
    tails = rng.sample(ds.tails, tail_n)
    meta = dict(ds.provenance, sample_seed=seed)
    train = BlockDataset(heads[:head_n], tails, meta)
    if test_heads:
        return train, BlockDataset(heads[head_n:], list(tails), dict(meta, split="test"))
    return train
