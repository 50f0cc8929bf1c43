import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lipidforge.molgraph import parse_smiles
from lipidforge.molgraph.fingerprint import morgan_fingerprint
from lipidforge.policy import (
    Adam,
    FeatureCache,
    PolicyNetwork,
    PolicyPrior,
    TrainingDiverged,
    TrainingPair,
    WeightFileError,
    batch_loss_and_grads,
    featurize,
    featurize_batch,
    load_weights,
    make_training_pairs,
    pairwise_loss,
    priors,
    save_weights,
    search_probabilities,
    softmax,
    train,
)
from lipidforge.search import EMPTY, VisitRecord

from oracles import gradient_check, mlp_forward, softmax as softmax_oracle

M = parse_smiles
HEADS = ["NCCO", "CN(C)CCO", "NCCN", "OCCNCCO"]


def small_net(seed=0, zero_output=False, dropout=0.0, hidden=(8, 8, 8)):
    return PolicyNetwork.create(hidden, seed=seed, dropout=dropout, zero_output=zero_output)


# -- features ------------------------------------------------------------------

def test_featurize_layout():
    a, s = M("NCCO"), M("CCCCCCCCBr")
    v = featurize(None, a)
    assert v.shape == (2048,)
    assert not v[:1024].any()
    assert np.array_equal(v[1024:], morgan_fingerprint(a, 2, 1024).to_array(np.float64))
    assert np.array_equal(featurize(s, a), featurize(s, a))
    same = featurize(a, a)
    assert np.array_equal(same[:1024], same[1024:])
    batch = featurize_batch(s, [a, M("NCCN")])
    assert np.array_equal(batch[0], featurize(s, a))


def test_feature_cache_matches_featurize():
    cache = FeatureCache()
    pair = TrainingPair("NCCO", "CCCCCCCCBr", "CCCCCCCCC=O", 0.3)
    x1, x2, t = cache.pair_features([pair])
    assert np.array_equal(x1[0], featurize(M("NCCO"), M("CCCCCCCCBr")))
    assert np.array_equal(x2[0], featurize(M("NCCO"), M("CCCCCCCCC=O")))
    e1, _, _ = cache.pair_features([TrainingPair(EMPTY, "NCCO", "NCCN", 0.0)])
    assert not e1[0, :1024].any()


# -- network ---------------------------------------------------------------------

def test_forward_matches_independent_mlp():
    net = small_net(3)
    rng = np.random.default_rng(3)
    for b in net.biases:
        b[:] = rng.normal(0, 0.3, b.shape)
    x = (rng.random((5, 2048)) < 0.05).astype(np.float64)
    expected, _ = mlp_forward([w.astype(np.float64) for w in net.weights],
                              [b.astype(np.float64) for b in net.biases], x)
    assert np.allclose(net.forward(x), expected, rtol=1e-5, atol=1e-5)


def test_zero_weights_give_zero_logits():
    net = small_net()
    for p in net.parameters():
        p[...] = 0
    assert np.array_equal(net.forward(np.ones((3, 2048))), np.zeros(3))


def test_eval_mode_is_deterministic_and_dropout_is_seeded():
    net = small_net(dropout=0.5)
    x = (np.random.default_rng(0).random((6, 2048)) < 0.05).astype(float)
    assert np.array_equal(net.forward(x), net.forward(x))
    m1 = net.dropout_masks(6, np.random.default_rng(7))
    m2 = net.dropout_masks(6, np.random.default_rng(7))
    assert all(np.array_equal(a, b) for a, b in zip(m1, m2))
    assert np.array_equal(net.forward(x, m1), net.forward(x, m2))
    assert set(np.unique(m1[0])) <= {0.0, 2.0}


def test_width_mismatch_is_rejected():
    with pytest.raises(ValueError, match="width"):
        small_net().forward(np.zeros((1, 100)))


def test_default_architecture():
    net = PolicyNetwork.create()
    assert net.dims == [2048, 512, 256, 128, 1]
    assert net.dtype == np.float32
    assert not net.weights[-1].any()


# -- priors ----------------------------------------------------------------------

def test_fresh_network_gives_uniform_priors():
    p = priors(PolicyNetwork.create((16, 8, 4)), None, [M(s) for s in HEADS])
    assert np.allclose(p, [0.25] * 4, atol=0)


def test_softmax_examples():
    assert np.allclose(softmax([math.log(2), 0.0]), [2 / 3, 1 / 3], atol=1e-12)
    assert softmax([5.0]).tolist() == [1.0]
    assert np.allclose(softmax([1000.0, 999.0]), softmax([1.0, 0.0]))


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=30), st.floats(-1e3, 1e3))
def test_softmax_properties(logits, shift):
    p = softmax(logits)
    assert abs(p.sum() - 1.0) <= 1e-9
    assert ((p > 0) & (p <= 1)).all()
    assert np.allclose(p, softmax_oracle(logits), atol=1e-12)
    assert np.allclose(p, softmax([x + shift for x in logits]), atol=1e-9)


def test_priors_need_actions():
    with pytest.raises(ValueError):
        priors(small_net(), None, [])


def test_policy_prior_adapter():
    net = small_net(1)
    mols = [M(s) for s in HEADS]
    assert np.array_equal(PolicyPrior(net).priors(None, mols), priors(net, None, mols))


# -- search probabilities -----------------------------------------------------

def test_search_probability_examples():
    assert search_probabilities([2, 2], 1.0) == [0.5, 0.5]
    assert search_probabilities([8, 2], 1.0) == [0.8, 0.2]
    hot = search_probabilities([8, 2], 1000.0)
    direct = 8 ** 0.001 / (8 ** 0.001 + 2 ** 0.001)
    assert hot == pytest.approx([direct, 1 - direct], abs=1e-12)
    assert 0.5 < hot[0] < 0.501
    assert search_probabilities([0, 3], 0.5) == [0.0, 1.0]


def test_search_probability_errors():
    for counts, tau in (([0, 0], 1.0), ([1, -1], 1.0), ([1, 2], 0.0)):
        with pytest.raises(ValueError):
            search_probabilities(counts, tau)


@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=20).filter(any))
def test_unit_temperature_is_exact_proportion(counts):
    total = sum(counts)
    assert search_probabilities(counts, 1.0) == [c / total for c in counts]


@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=20).filter(any), st.floats(0.05, 100))
def test_search_probabilities_normalise(counts, tau):
    p = search_probabilities(counts, tau)
    assert abs(sum(p) - 1) < 1e-9
    assert all((pi == 0) == (c == 0) for pi, c in zip(p, counts))


# -- training pairs ------------------------------------------------------------

def visits(state, counts):
    total = sum(counts.values())
    return [VisitRecord(state, a, n, total) for a, n in counts.items()]


def test_pair_target_example():
    (pair,) = make_training_pairs(visits("S", {"a": 10, "b": 1}), tau=1.0, eps_smooth=0.0)
    sign = 1 if pair.action_1 == "a" else -1
    assert pair.target == pytest.approx(sign * math.log(10), abs=1e-12)


def test_equal_counts_and_single_action():
    (pair,) = make_training_pairs(visits("S", {"a": 4, "b": 4}))
    assert pair.target == 0.0
    assert make_training_pairs(visits("S", {"a": 4})) == []


def test_smoothing_makes_zero_visits_usable():
    (pair,) = make_training_pairs(visits("S", {"a": 3, "b": 0}), tau=0.5)
    assert abs(pair.target) == pytest.approx(math.log(4) / 0.5)


def test_pair_sampling_budget_and_determinism():
    recs = visits("S", {f"a{i}": i for i in range(30)})
    a = make_training_pairs(recs, pairs_per_state=64, rng=random.Random(1))
    b = make_training_pairs(recs, pairs_per_state=64, rng=random.Random(1))
    assert a == b and len(a) == 64
    assert len({frozenset((p.action_1, p.action_2)) for p in a}) == 64
    small = make_training_pairs(visits("S", {f"a{i}": i for i in range(6)}), pairs_per_state=64)
    assert len(small) == 15


def test_visits_from_several_trees_are_pooled():
    recs = visits("S", {"a": 2, "b": 1}) + visits("S", {"a": 3, "b": 0})
    (pair,) = make_training_pairs(recs, eps_smooth=0.0)
    assert abs(pair.target) == pytest.approx(math.log(5))


def test_pair_needs_two_actions():
    with pytest.raises(ValueError):
        TrainingPair("S", "a", "a", 0.0)


@given(st.dictionaries(st.sampled_from("abcdefgh"), st.integers(0, 50), min_size=2), st.floats(0.1, 5))
def test_pair_targets_follow_smoothed_log_ratio(counts, tau):
    for p in make_training_pairs(visits("S", counts), tau=tau, rng=random.Random(0)):
        expected = (math.log(counts[p.action_1] + 1) - math.log(counts[p.action_2] + 1)) / tau
        assert p.target == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert p.action_1 != p.action_2 and p.state == "S"


# -- loss and gradients ----------------------------------------------------------

def _pair():
    return TrainingPair("NCCO", "CCCCCCCCBr", "CCCCCCCCCCCCN=C=O", 0.7)


def test_zero_network_loss_is_target_squared():
    net = PolicyNetwork.create((8, 8, 8))
    value, grads = pairwise_loss(net, _pair())
    assert value == pytest.approx(0.49, rel=1e-6)
    assert pairwise_loss(net, _pair(), loss="mae")[0] == pytest.approx(0.7, rel=1e-6)


def test_matching_difference_has_zero_loss_and_gradient():
    net = small_net(2).astype(np.float64)
    x1, x2, _ = FeatureCache().pair_features([_pair()])
    delta = net.forward(x1) - net.forward(x2)
    value, grads = batch_loss_and_grads(net, x1, x2, delta)
    assert value < 1e-30
    assert all(np.abs(g).max() < 1e-14 for g in grads)


def test_loss_is_shift_invariant():
    net = small_net(4).astype(np.float64)
    x1, x2, t = FeatureCache().pair_features([_pair()])
    before = batch_loss_and_grads(net, x1, x2, t)[0]
    net.biases[-1] += 3.25
    assert batch_loss_and_grads(net, x1, x2, t)[0] == pytest.approx(before, abs=1e-12)


def test_masks_come_in_pairs():
    net = small_net(dropout=0.5)
    x1, x2, t = FeatureCache().pair_features([_pair()])
    with pytest.raises(ValueError):
        batch_loss_and_grads(net, x1, x2, t, masks1=net.dropout_masks(1, np.random.default_rng(0)))


def test_unknown_loss():
    with pytest.raises(ValueError):
        pairwise_loss(small_net(), _pair(), loss="huber")


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(5)
    net = small_net(5).astype(np.float64)
    for b in net.biases:
        b[:] = rng.normal(0, 0.5, b.shape)
    x1 = (rng.random((6, 2048)) < 0.05).astype(float)
    x2 = (rng.random((6, 2048)) < 0.05).astype(float)
    worst, checked, skipped = gradient_check(net, x1, x2, rng.normal(0, 1, 6))
    assert worst < 1e-4
    assert checked > 0.99 * (checked + skipped)


def test_adam_first_step_moves_by_lr():
    p = [np.array([1.0, -2.0])]
    Adam(lr=0.1).step(p, [np.array([0.5, -3.0])])
    assert np.allclose(p[0], [0.9, -1.9], atol=1e-6)


# -- training --------------------------------------------------------------------

def synthetic_pairs(n=48, seed=0):
    rng = random.Random(seed)
    from lipidforge.blocks.toy import HEAD_POOL, TAIL_POOL
    out = []
    for _ in range(n):
        s = rng.choice(HEAD_POOL)
        a1, a2 = rng.sample(TAIL_POOL, 2)
        out.append(TrainingPair(s, a1, a2, (len(a1) - len(a2)) / 10))
    return out


def test_training_reduces_loss():
    net = small_net(0, hidden=(32, 16, 8), zero_output=True, dropout=0.0)
    report = train(net, synthetic_pairs(), epochs=30, lr=1e-2, rng=random.Random(0), batch_size=16)
    assert len(report.epoch_losses) == 30 and report.pairs == 48
    assert report.final < 0.2 * report.initial


def test_training_is_reproducible():
    runs = []
    for _ in range(2):
        net = small_net(0, dropout=0.5)
        rep = train(net, synthetic_pairs(), epochs=3, rng=random.Random(1), dropout_seed=5)
        runs.append((rep.epoch_losses, [p.copy() for p in net.parameters()]))
    assert runs[0][0] == runs[1][0]
    assert all(np.array_equal(a, b) for a, b in zip(runs[0][1], runs[1][1]))


def test_zero_learning_rate_leaves_weights_unchanged():
    net = small_net(0, dropout=0.5)
    before = [p.copy() for p in net.parameters()]
    train(net, synthetic_pairs(), epochs=2, lr=0.0)
    assert all(np.array_equal(a, b) for a, b in zip(before, net.parameters()))


def test_single_pair_overfits():
    net = small_net(0, zero_output=True)
    report = train(net, [_pair()], epochs=300, lr=1e-2, batch_size=1)
    assert report.final < 1e-6


def test_training_errors():
    with pytest.raises(ValueError):
        train(small_net(), [])
    net = small_net(0)
    net.weights[0][...] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises(TrainingDiverged):
        train(net, synthetic_pairs(4), epochs=1)


# -- weight files --------------------------------------------------------------

def test_weights_round_trip_bit_exact(tmp_path):
    net = small_net(9, dropout=0.25)
    path = save_weights(net, tmp_path / "w.lfpn")
    back = load_weights(path, expect_dims=net.dims)
    assert all(np.array_equal(a, b) for a, b in zip(net.parameters(), back.parameters()))
    assert back.dropout == 0.25
    x = (np.random.default_rng(0).random((4, 2048)) < 0.05).astype(float)
    assert np.array_equal(net.forward(x), back.forward(x))
    assert save_weights(back, tmp_path / "again.lfpn").read_bytes() == path.read_bytes()


def test_weight_file_errors(tmp_path):
    path = save_weights(small_net(), tmp_path / "w.lfpn")
    with pytest.raises(WeightFileError, match="do not match"):
        load_weights(path, expect_dims=[2048, 16, 8, 8, 1])
    empty = tmp_path / "empty.lfpn"
    empty.write_bytes(b"")
    with pytest.raises(WeightFileError):
        load_weights(empty)
    cut = tmp_path / "cut.lfpn"
    cut.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(WeightFileError, match="bytes"):
        load_weights(cut)
    bad = bytearray(path.read_bytes())
    bad[4] = 9
    (tmp_path / "v.lfpn").write_bytes(bytes(bad))
    with pytest.raises(WeightFileError, match="version"):
        load_weights(tmp_path / "v.lfpn")
