"""Head filtering, tail extraction from reference lipids and tail similarity."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Literal, Sequence

from ..molgraph.descriptors import MissingAtomTypeError, functional_groups, log_p, molecular_weight
from ..molgraph.fingerprint import morgan_fingerprint, tanimoto
from ..molgraph.isomorphism import MAX_GED_ATOMS, SizeLimitError, ged_le_one
from ..molgraph.molecule import Molecule

HYDROPHILIC = frozenset({"N", "O", "P", "S"})
MAX_RING_SUBSET_SYSTEMS = 8


@dataclass(frozen=True)
class FilterResult:
    accepted: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class HeadFilterConfig:
    max_mw: float = 500.0
    max_logp: float = 0.0


def filter_head(mol: Molecule, config: HeadFilterConfig | None = None) -> FilterResult:
    """Accept small, polar, amine-bearing reactive molecules.

    Criteria are checked in a fixed order and the first failure is reported:
    ``mw``, ``ammonium``, ``logp``, ``amine``, ``reactive``. A molecule whose
    logP cannot be estimated (an atom type missing from the table) fails ``logp``.
    """
    cfg = config or HeadFilterConfig()
    if molecular_weight(mol) >= cfg.max_mw:
        return FilterResult(False, "mw")
    groups = functional_groups(mol)
    if groups.has_quaternary:
        return FilterResult(False, "ammonium")
    try:
        if log_p(mol) >= cfg.max_logp:
            return FilterResult(False, "logp")
    except MissingAtomTypeError:
        return FilterResult(False, "logp")
    if groups.amine_count < 1:
        return FilterResult(False, "amine")
    if groups.carboxyl_count + groups.hydroxyl_count + groups.amine_count < 1:
        return FilterResult(False, "reactive")
    return FilterResult(True)


def _head_candidates(mol: Molecule, distance: int):
    hydrophilic = [i for i, a in enumerate(mol.atoms) if a.element in HYDROPHILIC]
    if not hydrophilic:
        return
    dist = mol.distances_from(hydrophilic)
    base = {
        i for i, a in enumerate(mol.atoms)
        if a.element != "C" or mol.in_ring(i) or dist[i] <= distance
    }
    systems = list(mol.ring_systems)
    # systems that carry no hydrophilic atom may be pruned; try smallest changes first
    optional = [s for s in systems if not (s & set(hydrophilic))][:MAX_RING_SUBSET_SYSTEMS]
    for size in range(len(optional) + 1):
        for pruned in combinations(optional, size):
            drop = set().union(*pruned) if pruned else set()
            yield base - drop


def extract_tails(lipid: Molecule, distance: int = 2) -> list[Molecule]:
    """Split a lipid into its polar head and hydrophobic tail fragments.

    Acyclic carbons further than ``distance`` bonds from every N/O/P/S are
    pruned; when the remainder is one connected fragment with negative logP
    it is taken as the head and the pruned components are returned as tails.
    """
    n = len(lipid.atoms)
    for keep in _head_candidates(lipid, distance):
        if not keep or len(keep) == n:
            continue
        if len(lipid.components(keep)) != 1:
            continue
        head = lipid.subgraph(keep)
        if log_p(head) >= 0:
            continue
        rest = [i for i in range(n) if i not in keep]
        tails = [lipid.subgraph(comp) for comp in lipid.components(rest)]
        return sorted(tails, key=lambda m: (-len(m.atoms), m.canonical_smiles))
    return []


TailMode = Literal["ged", "fingerprint", "either"]


@dataclass(frozen=True)
class TailFilterConfig:
    mode: TailMode = "either"
    theta_sim: float = 0.9
    ged_limit: int = MAX_GED_ATOMS


def filter_tail(candidate: Molecule, reference_tails: Sequence[Molecule],
                config: TailFilterConfig | None = None) -> FilterResult:
    cfg = config or TailFilterConfig()
    if cfg.mode not in ("ged", "fingerprint", "either"):
        raise ValueError(f"unknown tail filter mode {cfg.mode!r}")
    if len(candidate.atoms) > cfg.ged_limit:
        raise SizeLimitError(f"candidate has {len(candidate.atoms)} heavy atoms (limit {cfg.ged_limit})")
    fp = morgan_fingerprint(candidate)
    for ref in reference_tails:
        if cfg.mode in ("ged", "either") and len(ref.atoms) <= cfg.ged_limit and ged_le_one(candidate, ref):
            return FilterResult(True, "ged")
        if cfg.mode in ("fingerprint", "either") and tanimoto(fp, morgan_fingerprint(ref)) >= cfg.theta_sim:
            return FilterResult(True, "fingerprint")
    return FilterResult(False, "dissimilar")


def longest_acyclic_carbon_chain(mol: Molecule) -> int:
    carbons = [i for i, a in enumerate(mol.atoms) if a.element == "C" and not a.aromatic and not mol.in_ring(i)]
    best = 0
    for comp in mol.components(carbons):
        members = set(comp)
        start = comp[0]
        for _ in range(2):
            far, depth = start, 1
            stack = [(start, -1, 1)]
            while stack:
                i, parent, d = stack.pop()
                if d > depth:
                    far, depth = i, d
                stack.extend((j, i, d + 1) for j in mol.neighbors(i) if j != parent and j in members)
            start = far
        best = max(best, depth)
    return best
