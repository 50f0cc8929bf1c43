"""Features, priors, visit-count targets and the pairwise training objective."""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Literal, Sequence

import numpy as np

from ..molgraph.fingerprint import morgan_fingerprint
from ..molgraph.molecule import Molecule
from ..molgraph.smiles import parse_smiles
from ..search.records import VisitRecord
from ..search.tree import EMPTY
from .network import PolicyNetwork

HALF_WIDTH = 1024


def _fp_array(mol: Molecule) -> np.ndarray:
    key = ("fp_array", HALF_WIDTH)
    hit = mol.memo.get(key)
    if hit is None:
        hit = morgan_fingerprint(mol, 2, HALF_WIDTH).to_array(np.float64)
        hit.setflags(write=False)
        mol.memo[key] = hit
    return hit


def featurize(state: Molecule | None, action: Molecule) -> np.ndarray:
    """State fingerprint followed by action fingerprint; an empty state is all zeros."""
    left = np.zeros(HALF_WIDTH) if state is None else _fp_array(state)
    return np.concatenate([left, _fp_array(action)])


def featurize_batch(state: Molecule | None, actions: Sequence[Molecule]) -> np.ndarray:
    out = np.zeros((len(actions), 2 * HALF_WIDTH))
    if state is not None:
        out[:, :HALF_WIDTH] = _fp_array(state)
    for i, a in enumerate(actions):
        out[i, HALF_WIDTH:] = _fp_array(a)
    return out


def softmax(logits: Sequence[float]) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def priors(net: PolicyNetwork, state: Molecule | None, actions: Sequence[Molecule]) -> np.ndarray:
    if not actions:
        raise ValueError("priors need at least one action")
    return softmax(net.forward(featurize_batch(state, actions)))


class PolicyPrior:
    """Adapter exposing a network as the search engine's prior model."""

    def __init__(self, net: PolicyNetwork):
        self.net = net

    def priors(self, state, actions):
        return priors(self.net, state, actions)


def search_probabilities(visit_counts: Sequence[float], tau: float = 1.0) -> list[float]:
    """N^(1/tau) normalised; zero counts stay at zero probability."""
    if tau <= 0:
        raise ValueError("temperature must be positive")
    counts = [float(c) for c in visit_counts]
    if any(c < 0 for c in counts):
        raise ValueError("visit counts must be non-negative")
    if not any(counts):
        raise ValueError("visit counts are all zero")
    if tau == 1.0:
        total = sum(counts)
        return [c / total for c in counts]
    # work in log space so that large 1/tau does not overflow
    logs = [math.log(c) / tau if c > 0 else -math.inf for c in counts]
    top = max(logs)
    powered = [math.exp(v - top) if v != -math.inf else 0.0 for v in logs]
    total = sum(powered)
    return [p / total for p in powered]


@dataclass(frozen=True)
class TrainingPair:
    state: str
    action_1: str
    action_2: str
    target: float

    def __post_init__(self) -> None:
        if self.action_1 == self.action_2:
            raise ValueError("a training pair needs two different actions")


def aggregate_visits(records: Iterable[VisitRecord]) -> dict[str, dict[str, int]]:
    """state -> action -> summed visit count (records from several trees merge)."""
    table: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for r in records:
        table[r.state_smiles][r.action_smiles] += r.visit_count
    return {s: dict(a) for s, a in table.items()}


def make_training_pairs(records: Iterable[VisitRecord], tau: float = 1.0, pairs_per_state: int = 64,
                        eps_smooth: float = 1.0, rng: random.Random | None = None,
                        min_visits: int = 1) -> list[TrainingPair]:
    """Pairs (s, a1, a2) with target (log(N1 + eps) - log(N2 + eps)) / tau.

    States whose actions were visited fewer than ``min_visits`` times in total
    carry no signal and are skipped, as are states with a single action.
    """
    rng = rng or random.Random(0)
    out: list[TrainingPair] = []
    table = aggregate_visits(records)
    for state in sorted(table):
        actions = table[state]
        if len(actions) < 2 or sum(actions.values()) < min_visits:
            continue
        names = sorted(actions)
        n = len(names)
        total_pairs = n * (n - 1) // 2
        if total_pairs <= pairs_per_state:
            chosen = list(combinations(range(n), 2))
        else:
            picked = rng.sample(range(total_pairs), pairs_per_state)
            chosen = [_unrank_pair(k, n) for k in sorted(picked)]
        for i, j in chosen:
            a1, a2 = names[i], names[j]
            if rng.random() < 0.5:
                a1, a2 = a2, a1
            n1, n2 = actions[a1] + eps_smooth, actions[a2] + eps_smooth
            if n1 <= 0 or n2 <= 0:
                continue
            out.append(TrainingPair(state, a1, a2, (math.log(n1) - math.log(n2)) / tau))
    return out


def _unrank_pair(k: int, n: int) -> tuple[int, int]:
    """k-th pair (i < j) in lexicographic order."""
    i = 0
    while k >= n - 1 - i:
        k -= n - 1 - i
        i += 1
    return i, i + 1 + k


LossKind = Literal["mse", "mae"]


class FeatureCache:
    """SMILES -> fingerprint half-vector, parsed once."""

    def __init__(self):
        self._mols: dict[str, Molecule] = {}

    def half(self, smiles: str) -> np.ndarray:
        if smiles == EMPTY:
            return np.zeros(HALF_WIDTH)
        mol = self._mols.get(smiles)
        if mol is None:
            mol = self._mols[smiles] = parse_smiles(smiles)
        return _fp_array(mol)

    def pair_features(self, pairs: Sequence[TrainingPair]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x1 = np.zeros((len(pairs), 2 * HALF_WIDTH))
        x2 = np.zeros((len(pairs), 2 * HALF_WIDTH))
        for k, p in enumerate(pairs):
            s = self.half(p.state)
            x1[k, :HALF_WIDTH] = s
            x2[k, :HALF_WIDTH] = s
            x1[k, HALF_WIDTH:] = self.half(p.action_1)
            x2[k, HALF_WIDTH:] = self.half(p.action_2)
        targets = np.array([p.target for p in pairs], dtype=np.float64)
        return x1, x2, targets


def batch_loss_and_grads(net: PolicyNetwork, x1: np.ndarray, x2: np.ndarray, targets: np.ndarray,
                         loss: LossKind = "mse", masks1=None, masks2=None) -> tuple[float, list[np.ndarray]]:
    """Mean pairwise loss over a batch and its exact gradient.

    Both members of every pair go through one stacked forward pass; the
    shared weights receive the two gradient halves with opposite signs.
    """
    n = len(targets)
    targets = np.asarray(targets, dtype=net.dtype)
    masks = None
    if masks1 is not None or masks2 is not None:
        if masks1 is None or masks2 is None:
            raise ValueError("dropout masks must be given for both members of the pair")
        masks = [np.concatenate([a, b]) for a, b in zip(masks1, masks2)]
    logits, cache = net.forward(np.concatenate([x1, x2]), masks, keep_cache=True)
    diff = logits[:n] - logits[n:] - targets
    if loss == "mse":
        value = float(np.mean(diff ** 2))
        g = 2.0 * diff / n
    elif loss == "mae":
        value = float(np.mean(np.abs(diff)))
        g = np.sign(diff) / n
    else:
        raise ValueError(f"unknown loss {loss!r}")
    return value, net.backward(cache, np.concatenate([g, -g]).astype(net.dtype), masks)


def pairwise_loss(net: PolicyNetwork, pair: TrainingPair, features: FeatureCache | None = None,
                  loss: LossKind = "mse") -> tuple[float, list[np.ndarray]]:
    """Loss of one pair in eval mode, ``(f(s,a1) - f(s,a2) - target)^2`` by default."""
    x1, x2, t = (features or FeatureCache()).pair_features([pair])
    return batch_loss_and_grads(net, x1, x2, t, loss)


@dataclass
class Adam:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.step_count += 1
        t = self.step_count
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            denom = np.sqrt(v / (1 - self.beta2 ** t))
            denom += self.eps
            p -= (self.lr / (1 - self.beta1 ** t)) * m / denom


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainReport:
    epoch_losses: list[float]
    pairs: int

    @property
    def initial(self) -> float:
        return self.epoch_losses[0] if self.epoch_losses else float("nan")

    @property
    def final(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else float("nan")


def train(net: PolicyNetwork, pairs: Sequence[TrainingPair], epochs: int = 20, lr: float = 1e-3,
          rng: random.Random | None = None, batch_size: int = 64, loss: LossKind = "mse",
          dropout_seed: int = 0, features: FeatureCache | None = None) -> TrainReport:
    """Adam on the pairwise objective with per-epoch seeded shuffling and dropout."""
    if not pairs:
        raise ValueError("no training pairs")
    rng = rng or random.Random(0)
    features = features or FeatureCache()
    x1, x2, targets = (a.astype(net.dtype) for a in features.pair_features(pairs))
    mask_rng = np.random.default_rng(dropout_seed)
    opt = Adam(lr=lr)
    params = net.parameters()
    losses = []
    order = list(range(len(pairs)))
    for epoch in range(epochs):
        rng.shuffle(order)
        total = 0.0
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            m1 = net.dropout_masks(len(idx), mask_rng)
            m2 = net.dropout_masks(len(idx), mask_rng)
            value, grads = batch_loss_and_grads(net, x1[idx], x2[idx], targets[idx], loss, m1, m2)
            if not math.isfinite(value):
                raise TrainingDiverged(f"non-finite loss at epoch {epoch}, batch starting {start}")
            total += value * len(idx)
            if lr > 0:
                opt.step(params, grads)
        losses.append(total / len(order))
    return TrainReport(losses, len(pairs))
