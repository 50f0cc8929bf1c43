from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from lipidforge.molgraph.io import read_smiles_file

settings.register_profile(
    "repo", deadline=None, max_examples=50, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def corpus():
    return [r.molecule for r in read_smiles_file(DATA / "corpus.smi")]


@pytest.fixture(scope="session")
def toy_space():
    from lipidforge.blocks.toy import toy_dataset
    from lipidforge.chemrules import default_registry
    from lipidforge.predictors.scoring import RuleBasedScorer
    from lipidforge.search import ReactionSpace

    return ReactionSpace(toy_dataset(0), default_registry(), RuleBasedScorer())


@pytest.fixture(scope="session")
def small_space():
    """At most five heads and four tails."""
    from lipidforge.blocks import pool_dataset, sample_subsets
    from lipidforge.chemrules import default_registry
    from lipidforge.predictors.scoring import RuleBasedScorer
    from lipidforge.search import ReactionSpace

    return ReactionSpace(sample_subsets(pool_dataset(), 5, 4, seed=11), default_registry(), RuleBasedScorer())
