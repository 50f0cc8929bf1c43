"""End-to-end dataset construction from raw SMILES corpora."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from ..molgraph.io import SmilesRecord, read_smiles_file
from .dataset import BlockDataset, BuildingBlock, dedupe
from .filters import (
    HeadFilterConfig,
    TailFilterConfig,
    extract_tails,
    filter_head,
    filter_tail,
    longest_acyclic_carbon_chain,
)

MIN_TAIL_CHAIN = 4


@dataclass
class BuildReport:
    head_candidates: int = 0
    head_rejections: Counter = field(default_factory=Counter)
    lipids: int = 0
    lipids_without_head: int = 0
    reference_tails: int = 0
    tail_candidates: int = 0
    tail_rejections: Counter = field(default_factory=Counter)
    unparsed: int = 0
    duplicates: int = 0

    def lines(self) -> list[str]:
        out = [f"head candidates: {self.head_candidates}"]
        out += [f"  rejected ({reason}): {n}" for reason, n in sorted(self.head_rejections.items())]
        out.append(f"reference lipids: {self.lipids} (no head found: {self.lipids_without_head})")
        out.append(f"reference tails: {self.reference_tails}")
        out.append(f"tail candidates: {self.tail_candidates}")
        out += [f"  rejected ({reason}): {n}" for reason, n in sorted(self.tail_rejections.items())]
        out.append(f"unparsed lines: {self.unparsed}; duplicates dropped: {self.duplicates}")
        return out


def _digest(paths: Sequence[Path]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def build_dataset(
    heads_in: str | Path,
    lipids_in: str | Path,
    tails_in: str | Path | None = None,
    head_config: HeadFilterConfig | None = None,
    tail_config: TailFilterConfig | None = None,
    tail_distance: int = 2,
) -> tuple[BlockDataset, BuildReport]:
    """Filter heads, extract reference tails from lipids and screen tail candidates.

    Tail candidates default to the head corpus, which plays the role of the
    purchasable screening library.
    """
    head_config = head_config or HeadFilterConfig()
    tail_config = tail_config or TailFilterConfig()
    report = BuildReport()
    tails_in = tails_in or heads_in

    seen: dict[Path, list[SmilesRecord]] = {}

    def parsed(path) -> list[SmilesRecord]:
        key = Path(path).resolve()
        if key not in seen:
            recs = read_smiles_file(path)
            report.unparsed += sum(r.molecule is None for r in recs)
            seen[key] = [r for r in recs if r.molecule is not None]
        return seen[key]

    heads = []
    for rec in parsed(heads_in):
        report.head_candidates += 1
        verdict = filter_head(rec.molecule)
        if verdict:
            heads.append(BuildingBlock.from_molecule(rec.ident or f"H{rec.line:06d}", rec.molecule, "head"))
        else:
            report.head_rejections[verdict.reason] += 1

    references = {}
    for rec in parsed(lipids_in):
        report.lipids += 1
        found = extract_tails(rec.molecule, tail_distance)
        if not found:
            report.lipids_without_head += 1
        for t in found:
            references.setdefault(t.canonical_smiles, t)
    ref_list = [references[k] for k in sorted(references)]
    report.reference_tails = len(ref_list)

    tails = []
    for rec in parsed(tails_in):
        report.tail_candidates += 1
        mol = rec.molecule
        if longest_acyclic_carbon_chain(mol) < MIN_TAIL_CHAIN:
            report.tail_rejections["short_chain"] += 1
            continue
        if len(mol.atoms) > tail_config.ged_limit:
            report.tail_rejections["size"] += 1
            continue
        verdict = filter_tail(mol, ref_list, tail_config)
        if verdict:
            tails.append(BuildingBlock.from_molecule(rec.ident or f"T{rec.line:06d}", mol, "tail"))
        else:
            report.tail_rejections[verdict.reason] += 1

    heads, dh = dedupe(sorted(heads, key=lambda b: b.smiles))
    tails, dt = dedupe(sorted(tails, key=lambda b: b.smiles))
    report.duplicates = dh + dt
    config_blob = json.dumps(
        {"head": asdict(head_config), "tail": asdict(tail_config), "tail_distance": tail_distance},
        sort_keys=True,
    )
    provenance = {
        "source_digest": _digest([Path(heads_in), Path(lipids_in), Path(tails_in)]),
        "config_hash": hashlib.sha256(config_blob.encode()).hexdigest()[:16],
        "filter_config": json.loads(config_blob),
    }
    return BlockDataset(heads, tails, provenance), report
