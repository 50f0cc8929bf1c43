"""Tree search engines over building blocks and reactions."""

from .engines import (
    DEFAULT_C,
    GuidedMCTS,
    NaiveMCTS,
    PriorModel,
    SearchConfig,
    SearchResult,
    UniformPrior,
    random_generate,
    run_mcts,
    visit_records,
)
from .records import GenerationRecord, PathStep, VisitRecord, read_generations, read_visits, replay, write_jsonl
from .space import ReactionSpace, derive_seed
from .tree import EMPTY, SearchNode, backpropagate, best_child, ucb_guided, ucb_naive

__all__ = [
    "DEFAULT_C", "EMPTY", "GenerationRecord", "GuidedMCTS", "NaiveMCTS", "PathStep", "PriorModel",
    "ReactionSpace", "SearchConfig", "SearchNode", "SearchResult", "UniformPrior", "VisitRecord",
    "backpropagate", "best_child", "derive_seed", "random_generate", "read_generations", "read_visits",
    "replay", "run_mcts", "ucb_guided", "ucb_naive", "visit_records", "write_jsonl",
]
