"""Policy-guided MCTS, naive property-guided MCTS and the random baseline."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from ..molgraph.molecule import Molecule
from .records import GenerationRecord, PathStep, VisitRecord
from .space import ReactionSpace, derive_seed
from .tree import SearchNode, backpropagate, best_child, ucb_guided, ucb_naive

ENGINES = ("guided", "naive", "random")
DEFAULT_C = {"guided": 20.0, "naive": 10.0}


class PriorModel(Protocol):
    def priors(self, state: Molecule | None, actions: Sequence[Molecule]) -> Sequence[float]: ...


class UniformPrior:
    def priors(self, state, actions):
        return [1.0 / len(actions)] * len(actions)


@dataclass(frozen=True)
class SearchConfig:
    engine: str = "guided"
    simulations: int = 10000
    c: float | None = None
    max_expand: int = 2000
    seed: int = 0
    iteration: int = 0
    run: int = 0

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.simulations < 0:
            raise ValueError("simulations must be >= 0")
        if self.max_expand < 1:
            raise ValueError("max_expand must be >= 1")
        if self.c is not None and self.c < 0:
            raise ValueError("c must be >= 0")

    @property
    def exploration(self) -> float:
        return self.c if self.c is not None else DEFAULT_C.get(self.engine, 0.0)


@dataclass
class SearchResult:
    generations: list[GenerationRecord] = field(default_factory=list)
    visits: list[VisitRecord] = field(default_factory=list)
    root: SearchNode | None = None
    path_lengths: list[int] = field(default_factory=list)
    exhausted: bool = False


def _steps(nodes: Sequence[SearchNode]) -> list[PathStep]:
    return [
        PathStep(n.action, n.template_id, n.molecules[0].canonical_smiles)
        for n in nodes
        if len(n.molecules) == 1 and n.action is not None
    ]


def visit_records(root: SearchNode) -> list[VisitRecord]:
    out = []
    for node in root.iter_nodes():
        if not node.children or node.dead:
            continue
        kids = node.ordered_children()
        total = sum(ch.N for ch in kids)
        for ch in kids:
            out.append(VisitRecord(node.state_smiles, ch.action_smiles, ch.N, total))
    return out


class GuidedMCTS:
    """Tree search whose edge priors come from a policy over (state, action)."""

    def __init__(self, space: ReactionSpace, config: SearchConfig, prior_model: PriorModel | None = None):
        self.space = space
        self.config = config
        self.prior_model = prior_model or UniformPrior()
        self.root = SearchNode()
        self.rollout_rng = random.Random(derive_seed(config.seed, "rollout", config.run))
        self.c = config.exploration

    # -- the four phases --------------------------------------------------

    def select(self, root: SearchNode) -> tuple[SearchNode, list[SearchNode]]:
        node, path = root, []
        while node.children:
            kids = node.ordered_children()
            child = best_child(kids, [ucb_guided(node, ch, self.c) for ch in kids])
            if not child.materialized:
                self._materialize(node, child)
            path.append(child)
            node = child
        return node, path

    def _materialize(self, parent: SearchNode, child: SearchNode) -> None:
        child.materialized = True
        block = self.space.block(child.action)
        if parent.state is None:
            child.molecules = (block.molecule,)
            return
        entry = self.space.successor(parent.state, block)
        if entry is None:
            child.dead = True
            return
        child.molecules = (entry.molecule,)
        child.template_id = entry.template_id
        child.tails_attached = parent.tails_attached + int(self.space.consumes_tail(entry.template_id, block))

    def expand(self, leaf: SearchNode) -> None:
        leaf.expanded = True
        actions = self.space.next_building_blocks(
            leaf.state, leaf.tails_attached, self.config.max_expand, derive_seed(self.config.seed, self.config.run)
        )
        if not actions:
            leaf.dead = True
            return
        actions = sorted(actions, key=lambda b: b.smiles)
        priors = self.prior_model.priors(leaf.state, [b.molecule for b in actions])
        for block, p in zip(actions, priors):
            leaf.children[block.id] = SearchNode(
                action=block.id, action_smiles=block.smiles, parent=leaf, depth=leaf.depth + 1,
                tails_attached=leaf.tails_attached, P=float(p), materialized=False,
            )

    def rollout(self, leaf: SearchNode) -> tuple[float, Molecule | None, list[PathStep]]:
        state, tails, steps = leaf.state, leaf.tails_attached, []
        rng = self.rollout_rng
        while state is None or tails < 2:
            pool = self.space.next_building_blocks(state, tails, self.config.max_expand,
                                                   derive_seed(self.config.seed, self.config.run))
            if not pool:
                return 0.0, None, steps
            block = pool[rng.randrange(len(pool))]
            if state is None:
                state = block.molecule
                steps.append(PathStep(block.id, None, block.smiles))
                continue
            entry = self.space.successor(state, block)
            if entry is None:
                return 0.0, None, steps
            state = entry.molecule
            tails += int(self.space.consumes_tail(entry.template_id, block))
            steps.append(PathStep(block.id, entry.template_id, entry.smiles))
        return self.space.score(state).total, state, steps

    # -- driver -------------------------------------------------------------

    def simulate(self, index: int, result: SearchResult) -> None:
        leaf, path = self.select(self.root)
        value = 0.0
        if leaf.dead:
            pass
        elif leaf.terminal:
            product = leaf.state
            score = self.space.score(product)
            value = score.total
            # only products reached inside the tree are generations; rollouts just value leaves
            result.generations.append(GenerationRecord(
                product.canonical_smiles, tuple(_steps(path)), score,
                "guided", index, self.config.iteration, self.config.run, True,
            ))
        else:
            if not leaf.expanded:
                self.expand(leaf)
            if not leaf.dead:
                value = self.rollout(leaf)[0]
        result.path_lengths.append(len(path))
        backpropagate(value, path, self.root)

    def run(self) -> SearchResult:
        result = SearchResult(root=self.root)
        if self.config.simulations == 0:
            return result
        self.expand(self.root)
        for i in range(self.config.simulations):
            self.simulate(i, result)
        result.visits = visit_records(self.root)
        return result


class NaiveMCTS:
    """Property-score-guided search over building-block combinations.

    Nodes alternate between single molecules and (molecule, block) pairs; a
    pair expands into every product of the two. Node priors are property
    scores, averaged over the members of a pair.
    """

    def __init__(self, space: ReactionSpace, config: SearchConfig):
        self.space = space
        self.config = config
        self.root = SearchNode()
        self.c = config.exploration

    def _p(self, mols: Sequence[Molecule]) -> float:
        return sum(self.space.score(m).total for m in mols) / len(mols)

    def expand(self, node: SearchNode) -> None:
        node.expanded = True
        if len(node.molecules) == 2:
            state, block = node.molecules[0], self.space.block(node.action)
            entries = self.space.products(state, block)
            for entry in entries:
                node.children[entry.smiles] = SearchNode(
                    molecules=(entry.molecule,), action=node.action, action_smiles=entry.smiles,
                    template_id=entry.template_id, parent=node, depth=node.depth + 1,
                    tails_attached=node.tails_attached + int(self.space.consumes_tail(entry.template_id, block)),
                    P=self._p([entry.molecule]),
                )
        else:
            actions = self.space.next_building_blocks(
                node.state, node.tails_attached, self.config.max_expand,
                derive_seed(self.config.seed, self.config.run),
            )
            for block in sorted(actions, key=lambda b: b.smiles):
                if node.state is None:
                    mols, tails = (block.molecule,), 0
                else:
                    mols, tails = (node.state, block.molecule), node.tails_attached
                node.children[block.id] = SearchNode(
                    molecules=mols, action=block.id, action_smiles=block.smiles, parent=node,
                    depth=node.depth + 1, tails_attached=tails, P=self._p(mols),
                )
        if not node.children:
            node.dead = True

    def simulate(self, index: int, result: SearchResult) -> None:
        node, path, value = self.root, [], 0.0
        while True:
            if node.terminal:
                value = self.space.score(node.state).total
                break
            if not node.expanded:
                self.expand(node)
            if node.dead:
                break
            kids = node.ordered_children()
            n = sum(ch.N for ch in kids)
            node = best_child(kids, [ucb_naive(ch, n, self.c) for ch in kids])
            path.append(node)
            if len(node.molecules) == 1 and node.template_id is not None:
                result.generations.append(GenerationRecord(
                    node.state.canonical_smiles, tuple(_steps(path)), self.space.score(node.state),
                    "naive", index, self.config.iteration, self.config.run, node.terminal,
                ))
        result.path_lengths.append(len(path))
        backpropagate(value, path, self.root)

    def run(self) -> SearchResult:
        result = SearchResult(root=self.root)
        for i in range(self.config.simulations):
            self.simulate(i, result)
        result.visits = visit_records(self.root)
        return result


def random_generate(space: ReactionSpace, count: int, rng: random.Random,
                    max_attempts: int | None = None, iteration: int = 0) -> SearchResult:
    """Random head + tail + tail combinations until ``count`` unique products.

    Sets ``exhausted`` when the attempt budget runs out first.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    budget = max_attempts if max_attempts is not None else 50 * count + 1000
    result = SearchResult()
    seen: set[str] = set()
    attempts = 0
    while len(seen) < count and attempts < budget:
        attempts += 1
        if not space.heads:
            break
        head = space.heads[rng.randrange(len(space.heads))]
        state, tails = head.molecule, 0
        steps = [PathStep(head.id, None, head.smiles)]
        while tails < 2:
            pool = space.reactive_tails(state)
            if not pool:
                state = None
                break
            block = pool[rng.randrange(len(pool))]
            entry = space.successor(state, block)
            state = entry.molecule
            tails += int(space.consumes_tail(entry.template_id, block))
            steps.append(PathStep(block.id, entry.template_id, entry.smiles))
        if state is None:
            continue
        smiles = state.canonical_smiles
        if smiles in seen:
            continue
        seen.add(smiles)
        result.generations.append(GenerationRecord(
            smiles, tuple(steps), space.score(state), "random", len(result.generations), iteration, 0, True,
        ))
    result.exhausted = len(seen) < count
    return result


def run_mcts(config: SearchConfig, space: ReactionSpace, prior_model: PriorModel | None = None) -> SearchResult:
    if config.engine == "guided":
        return GuidedMCTS(space, config, prior_model).run()
    if config.engine == "naive":
        return NaiveMCTS(space, config).run()
    raise ValueError("run_mcts handles the tree engines; use random_generate for the baseline")
