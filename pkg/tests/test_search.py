import json
import math
import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from lipidforge.search import (
    EMPTY,
    GuidedMCTS,
    SearchConfig,
    SearchNode,
    VisitRecord,
    backpropagate,
    best_child,
    random_generate,
    read_generations,
    read_visits,
    replay,
    run_mcts,
    ucb_guided,
    ucb_naive,
    write_jsonl,
)
from lipidforge.search import engines as engines_mod

from oracles import argmax_prior, greedy_q_path


def node(N=0, W=0.0, P=0.0, smiles="C", **kw):
    return SearchNode(N=N, W=W, P=P, action=smiles, action_smiles=smiles, **kw)


# -- UCB -----------------------------------------------------------------------

def test_guided_ucb_examples():
    assert ucb_guided(node(N=100), node(P=0.1), 20) == pytest.approx(20.0)
    assert ucb_guided(node(N=37), node(N=4, W=6.0), 20) == 1.5
    assert ucb_guided(node(N=50), node(N=4, W=6.0, P=0.9), 0) == 1.5


def test_naive_ucb_examples():
    assert ucb_naive(node(P=1.2), 0, 10) == pytest.approx(12.0)
    assert ucb_naive(node(N=3, W=4.5), 17, 10) == 1.5
    a, b = node(N=2, W=1.0, P=0.5, smiles="CC"), node(N=2, W=1.0, P=0.5, smiles="CN")
    assert ucb_naive(a, 4, 10) == ucb_naive(b, 4, 10)


@given(st.integers(0, 10_000), st.integers(0, 1000), st.floats(0, 2), st.floats(0, 1), st.floats(0, 50))
def test_guided_ucb_matches_formula(parent_n, n, q, p, c):
    child = node(N=n, W=q * n, P=p)
    expected = (q * n / n if n else 0.0) + c * p * math.sqrt(parent_n) / (1 + n)
    assert ucb_guided(node(N=parent_n), child, c) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_best_child_ties_prefer_prior_then_smiles():
    a, b, c = node(P=0.2, smiles="CCO"), node(P=0.3, smiles="CCN"), node(P=0.3, smiles="CC")
    assert best_child([a, b, c], [1.0, 1.0, 1.0]) is c
    assert best_child([a, b, c], [2.0, 1.0, 1.0]) is a


# -- backpropagation -----------------------------------------------------------

def test_backpropagate_examples():
    root = SearchNode()
    path = [node(), node(), node()]
    backpropagate(2.0, path, root)
    assert [n.N for n in path] == [1, 1, 1]
    assert [n.W for n in path] == [2.0, 2.0, 2.0]
    assert root.N == 3
    backpropagate(0.0, path, root)
    assert [n.W for n in path] == [2.0, 2.0, 2.0] and path[0].N == 2


def test_repeated_unit_values_give_unit_q():
    root, path = SearchNode(), [node(), node()]
    backpropagate(1.0, path, root)
    backpropagate(1.0, path, root)
    assert [n.Q for n in path] == [1.0, 1.0]


# -- action space --------------------------------------------------------------

def test_next_blocks_for_empty_terminal_and_capped(toy_space):
    heads = toy_space.next_building_blocks(None, 0, 2000, seed=0)
    assert len(heads) == len(toy_space.heads)
    capped = toy_space.next_building_blocks(None, 0, 7, seed=3)
    assert len(capped) == 7 == len({b.id for b in capped})
    assert capped == toy_space.next_building_blocks(None, 0, 7, seed=3)
    assert set(b.id for b in capped) <= {b.id for b in toy_space.heads}
    state = toy_space.heads[0].molecule
    assert toy_space.next_building_blocks(state, 2, 2000, seed=0) == []
    assert toy_space.next_building_blocks(state, 0, 2000, seed=0) == toy_space.reactive_tails(state)


def test_state_without_reactive_tails_has_no_actions(toy_space):
    from lipidforge.molgraph import parse_smiles
    assert toy_space.next_building_blocks(parse_smiles("CCCC"), 0, 2000, seed=0) == []


# -- guided engine phases --------------------------------------------------------

def test_expansion_with_uniform_prior(small_space):
    eng = GuidedMCTS(small_space, SearchConfig(simulations=1))
    eng.expand(eng.root)
    ps = [ch.P for ch in eng.root.ordered_children()]
    assert len(ps) == len(small_space.heads)
    assert ps == [1 / len(ps)] * len(ps)
    smiles = [ch.action_smiles for ch in eng.root.ordered_children()]
    assert smiles == sorted(smiles)


def test_expanding_a_state_with_no_actions_kills_it(small_space):
    from lipidforge.molgraph import parse_smiles
    eng = GuidedMCTS(small_space, SearchConfig(simulations=1))
    leaf = SearchNode(molecules=(parse_smiles("CCCC"),), parent=eng.root, depth=1)
    eng.expand(leaf)
    assert leaf.dead and not leaf.children
    assert eng.rollout(leaf)[0] == 0.0


def test_fresh_tree_selects_argmax_prior(small_space):
    eng = GuidedMCTS(small_space, SearchConfig(simulations=1))
    eng.expand(eng.root)
    rng = random.Random(0)
    for ch in eng.root.ordered_children():
        ch.P = rng.random()
    eng.root.N = 1
    leaf, path = eng.select(eng.root)
    assert path == [argmax_prior(eng.root)]
    assert leaf.state.canonical_smiles == leaf.action_smiles  # head materialises as itself


def test_select_prefers_higher_q_at_equal_u(small_space):
    eng = GuidedMCTS(small_space, SearchConfig(simulations=1))
    eng.expand(eng.root)
    kids = eng.root.ordered_children()
    for ch in kids:
        ch.N, ch.W, ch.P = 2, 0.2, 0.0
    kids[1].W, kids[3].W = 3.0, 1.0
    eng.root.N = 10
    assert eng.select(eng.root)[1][0] is kids[1]


def test_forced_chain_is_followed(small_space):
    eng = GuidedMCTS(small_space, SearchConfig(simulations=1))
    eng.expand(eng.root)
    first = eng.root.ordered_children()[0]
    eng.root.children = {first.action: first}
    leaf, path = eng.select(eng.root)
    assert path == [first]
    eng.expand(leaf)
    only = leaf.ordered_children()[0]
    leaf.children = {only.action: only}
    leaf2, path2 = eng.select(eng.root)
    assert path2 == [first, only] and leaf2 is only
    assert only.state is not None and only.template_id is not None


def test_rollout_of_terminal_leaf_is_its_score(small_space):
    eng = GuidedMCTS(small_space, SearchConfig(simulations=60, seed=2))
    res = eng.run()
    terminal = next(n for n in eng.root.iter_nodes() if n.terminal)
    value, product, steps = eng.rollout(terminal)
    assert steps == [] and product is terminal.state
    assert value == small_space.score(terminal.state).total
    assert res.generations


def test_rollouts_are_seeded(small_space):
    def roll(seed):
        eng = GuidedMCTS(small_space, SearchConfig(simulations=1, seed=seed))
        eng.expand(eng.root)
        leaf, _ = eng.select(eng.root)
        return [eng.rollout(leaf)[2] for _ in range(5)]

    assert roll(4) == roll(4)


def test_zero_simulations_give_empty_outputs(small_space):
    for engine in ("guided", "naive"):
        res = run_mcts(SearchConfig(engine=engine, simulations=0), small_space)
        assert res.generations == [] and res.visits == []


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(engine="beam")
    with pytest.raises(ValueError):
        SearchConfig(simulations=-1)
    with pytest.raises(ValueError):
        SearchConfig(c=-1.0)
    assert SearchConfig(engine="guided").exploration == 20.0
    assert SearchConfig(engine="naive").exploration == 10.0


# -- whole-run invariants ------------------------------------------------------

def _recorded_run(space, config, monkeypatch):
    """Run an engine while counting, per node, how many simulation paths included it."""
    included = Counter()
    original = engines_mod.backpropagate

    def spy(value, path, root):
        included.update(id(n) for n in path)
        original(value, path, root)

    monkeypatch.setattr(engines_mod, "backpropagate", spy)
    res = run_mcts(config, space)
    return res, included


@pytest.mark.parametrize("engine", ["guided", "naive"])
def test_visit_counts_and_root_overcount(engine, small_space, monkeypatch):
    res, included = _recorded_run(small_space, SearchConfig(engine=engine, simulations=150, seed=5), monkeypatch)
    root = res.root
    assert root.N == sum(res.path_lengths)
    assert len(res.path_lengths) == 150
    for n in root.iter_nodes():
        if n is root:
            continue
        assert n.N == included[id(n)]
        if n.N:
            assert n.W / n.N <= 2.0 + 1e-12
        assert len(n.children) == len(set(n.children))


def test_tails_attached_counts_tail_consuming_steps(small_space):
    res = run_mcts(SearchConfig(simulations=150, seed=1), small_space)
    for n in res.root.iter_nodes():
        if n.is_root or not n.materialized or n.dead:
            continue
        steps = [m for m in n.path_from_root() if m.template_id is not None]
        expected = sum(small_space.consumes_tail(m.template_id, small_space.block(m.action)) for m in steps)
        assert n.tails_attached == expected


def test_guided_logs_only_terminal_products(small_space):
    res = run_mcts(SearchConfig(simulations=200, seed=1), small_space)
    assert res.generations and all(g.terminal and g.engine == "guided" for g in res.generations)
    assert all(len(g.path) == 3 for g in res.generations)


def test_naive_logs_intermediates(small_space):
    res = run_mcts(SearchConfig(engine="naive", simulations=200, seed=1), small_space)
    kinds = Counter(g.terminal for g in res.generations)
    assert kinds[True] > 0 and kinds[False] > 0
    for n in res.root.iter_nodes():
        if n.is_root:
            continue
        mean = sum(small_space.score(m).total for m in n.molecules) / len(n.molecules)
        assert n.P == pytest.approx(mean)


@pytest.mark.parametrize("engine", ["guided", "naive"])
def test_runs_are_deterministic(engine, small_space):
    cfg = SearchConfig(engine=engine, simulations=120, seed=9)
    a, b = run_mcts(cfg, small_space), run_mcts(cfg, small_space)
    assert [g.to_json() for g in a.generations] == [g.to_json() for g in b.generations]
    assert a.visits == b.visits


def test_every_logged_path_replays(small_space, toy_space):
    from lipidforge.chemrules import default_registry
    runs = [
        (small_space, run_mcts(SearchConfig(simulations=150, seed=3), small_space).generations),
        (small_space, run_mcts(SearchConfig(engine="naive", simulations=150, seed=3), small_space).generations),
        (toy_space, random_generate(toy_space, 100, random.Random(0)).generations),
    ]
    for space, gens in runs:
        assert gens
        assert all(replay(g, space.ds, default_registry()) for g in gens)


def test_replay_detects_tampering(small_space):
    from dataclasses import replace
    from lipidforge.chemrules import default_registry
    g = run_mcts(SearchConfig(simulations=100, seed=3), small_space).generations[0]
    assert not replay(replace(g, product_smiles="CCO"), small_space.ds, default_registry())
    bad_step = replace(g.path[-1], template_id="sulfonamide")
    assert not replay(replace(g, path=g.path[:-1] + (bad_step,)), small_space.ds, default_registry())


def test_visit_records_are_consistent(small_space):
    res = run_mcts(SearchConfig(simulations=150, seed=2), small_space)
    by_state = {}
    for v in res.visits:
        by_state.setdefault(v.state_smiles, []).append(v)
        assert v.visit_count <= v.siblings_total
    for state, group in by_state.items():
        assert {v.siblings_total for v in group} == {sum(v.visit_count for v in group)}
    root_group = by_state[EMPTY]
    assert len(root_group) == len(small_space.heads)


def test_brute_force_greedy_path_oracle(small_space):
    rng = random.Random(1)
    for trial in range(5):
        eng = GuidedMCTS(small_space, SearchConfig(simulations=80, seed=trial, c=0.0))
        eng.run()
        for n in eng.root.iter_nodes():
            if not n.is_root:
                n.N = rng.randint(1, 9)
                n.W = rng.randint(0, 2 * n.N) / 1.0
        _, path = eng.select(eng.root)
        assert path == greedy_q_path(eng.root)


# -- random baseline -----------------------------------------------------------

def test_random_generate_counts_and_uniqueness(toy_space):
    one = random_generate(toy_space, 1, random.Random(0))
    assert len(one.generations) == 1 and not one.exhausted
    many = random_generate(toy_space, 200, random.Random(0))
    smiles = [g.product_smiles for g in many.generations]
    assert len(smiles) == len(set(smiles)) == 200
    assert all(g.terminal and len(g.path) == 3 for g in many.generations)
    with pytest.raises(ValueError):
        random_generate(toy_space, 0, random.Random(0))


def test_random_generate_flags_exhaustion(small_space):
    res = random_generate(small_space, 10_000, random.Random(0), max_attempts=3000)
    assert res.exhausted
    assert 0 < len(res.generations) < 10_000


# -- records ---------------------------------------------------------------------

def test_records_round_trip(tmp_path, small_space):
    res = run_mcts(SearchConfig(simulations=100, seed=4), small_space)
    gpath = write_jsonl(res.generations, tmp_path / "g.jsonl")
    vpath = write_jsonl(res.visits, tmp_path / "v.jsonl")
    assert read_generations(gpath) == res.generations
    assert read_visits(vpath) == res.visits
    first = json.loads(gpath.read_text().splitlines()[0])
    assert set(first) >= {"product_smiles", "path", "score", "engine", "simulation_index", "iteration"}


def test_visit_record_invariant():
    with pytest.raises(ValueError):
        VisitRecord("EMPTY", "CCO", 3, 2)


def test_bad_jsonl_line_reports_position(tmp_path):
    p = tmp_path / "g.jsonl"
    p.write_text("{not json}\n")
    with pytest.raises(ValueError, match=":1:"):
        read_generations(p)
