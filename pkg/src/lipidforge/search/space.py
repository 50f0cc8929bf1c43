"""The combinatorial action space: blocks, reactions and memoised lookups."""

from __future__ import annotations

import hashlib
import random

from ..blocks.dataset import BlockDataset, BuildingBlock
from ..chemrules.react import ProductEntry, can_react, enumerate_products
from ..chemrules.templates import TemplateRegistry
from ..molgraph.molecule import Molecule
from ..predictors.scoring import PropertyScore, PropertyScorer
from .tree import EMPTY


def derive_seed(seed: int, *parts: object) -> int:
    text = "|".join([str(seed), *map(str, parts)])
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


class ReactionSpace:
    """Dataset + templates + scorer, with caches keyed by canonical SMILES."""

    def __init__(self, ds: BlockDataset, registry: TemplateRegistry, scorer: PropertyScorer):
        self.ds = ds
        self.registry = registry
        self.scorer = scorer
        self.heads = sorted(ds.heads, key=lambda b: b.smiles)
        self.tails = sorted(ds.tails, key=lambda b: b.smiles)
        self._reactive: dict[str, list[BuildingBlock]] = {}
        self._products: dict[tuple[str, str], list[ProductEntry]] = {}

    def block(self, ident: str) -> BuildingBlock:
        return self.ds.block(ident)

    def score(self, mol: Molecule) -> PropertyScore:
        return self.scorer.score(mol)

    def reactive_tails(self, state: Molecule) -> list[BuildingBlock]:
        key = state.canonical_smiles
        hit = self._reactive.get(key)
        if hit is None:
            hit = [t for t in self.tails if can_react(self.registry, state, t.molecule)]
            self._reactive[key] = hit
        return hit

    def products(self, state: Molecule, block: BuildingBlock) -> list[ProductEntry]:
        key = (state.canonical_smiles, block.id)
        hit = self._products.get(key)
        if hit is None:
            hit = enumerate_products(self.registry, state, block.molecule)
            self._products[key] = hit
        return hit

    def successor(self, state: Molecule, block: BuildingBlock) -> ProductEntry | None:
        found = self.products(state, block)
        return found[0] if found else None

    def consumes_tail(self, template_id: str, block: BuildingBlock) -> bool:
        return block.kind == "tail" and self.registry[template_id].tail_consuming

    def next_building_blocks(self, state: Molecule | None, tails_attached: int,
                             max_expand: int, seed: int) -> list[BuildingBlock]:
        """Candidate actions for a state, sampled reproducibly per state.

        The empty state draws from the heads; a partial product draws from
        the tails that can react with it; a two-tail product has none.
        """
        if state is None:
            pool, key = self.heads, EMPTY
        elif tails_attached >= 2:
            return []
        else:
            pool, key = self.reactive_tails(state), state.canonical_smiles
        if len(pool) <= max_expand:
            return list(pool)
        picked = random.Random(derive_seed(seed, key)).sample(range(len(pool)), max_expand)
        return [pool[i] for i in sorted(picked)]
