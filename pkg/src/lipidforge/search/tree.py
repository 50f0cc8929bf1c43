"""Search-tree nodes and the two UCB selection scores."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..molgraph.molecule import Molecule

EMPTY = "EMPTY"


@dataclass(eq=False)
class SearchNode:
    """One tree node; N, W and P describe the edge from the parent.

    ``molecules`` holds the node state: empty for the root, one molecule for
    ordinary states, and (naive engine only) a molecule plus the building
    block it is about to react with.
    """

    molecules: tuple[Molecule, ...] = ()
    action: str | None = None
    action_smiles: str | None = None
    template_id: str | None = None
    parent: "SearchNode | None" = field(default=None, repr=False)
    depth: int = 0
    tails_attached: int = 0
    N: int = 0
    W: float = 0.0
    P: float = 0.0
    children: dict[str, "SearchNode"] = field(default_factory=dict, repr=False)
    expanded: bool = False
    dead: bool = False
    materialized: bool = True

    @property
    def state(self) -> Molecule | None:
        return self.molecules[0] if len(self.molecules) == 1 else None

    @property
    def state_smiles(self) -> str:
        if not self.molecules:
            return EMPTY
        return ".".join(m.canonical_smiles for m in self.molecules)

    @property
    def is_root(self) -> bool:
        return self.parent is None

    @property
    def terminal(self) -> bool:
        return self.tails_attached >= 2 and len(self.molecules) == 1

    @property
    def Q(self) -> float:
        return self.W / self.N if self.N else 0.0

    def ordered_children(self) -> list["SearchNode"]:
        return list(self.children.values())

    def path_from_root(self) -> list["SearchNode"]:
        out = []
        node: SearchNode | None = self
        while node is not None and node.parent is not None:
            out.append(node)
            node = node.parent
        return out[::-1]

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.ordered_children()))


def ucb_guided(parent: SearchNode, child: SearchNode, c: float) -> float:
    """Q + c * P * sqrt(N_parent) / (1 + N_child), with Q = 0 for unvisited children."""
    q = child.W / child.N if child.N else 0.0
    return q + c * child.P * math.sqrt(parent.N) / (1 + child.N)


def ucb_naive(node: SearchNode, sibling_visits: int, c: float) -> float:
    """Q + c * P * sqrt(1 + n) / (1 + N), where n counts visits among siblings."""
    q = node.W / node.N if node.N else 0.0
    return q + c * node.P * math.sqrt(1 + sibling_visits) / (1 + node.N)


def best_child(children: list[SearchNode], scores: list[float]) -> SearchNode:
    """argmax score; ties go to the larger prior, then the smaller action SMILES."""
    best, best_key = None, None
    for child, s in zip(children, scores):
        key = (s, child.P)
        if best is None or key > best_key or (key == best_key and child.action_smiles < best.action_smiles):
            best, best_key = child, key
    assert best is not None
    return best


def backpropagate(value: float, path: list[SearchNode], root: SearchNode) -> None:
    """Add one visit and ``value`` to every node on the path.

    The root gains one visit per path node, not one per simulation.
    """
    for node in path:
        node.N += 1
        node.W += value
        root.N += 1
