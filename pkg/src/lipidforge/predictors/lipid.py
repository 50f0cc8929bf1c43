"""Rule-based lipid-likeness surrogate.

A molecule looks like a lipid when it carries long acyclic hydrocarbon
chains anchored to a polar head. Chains are maximal sets of connected
acyclic, non-aromatic carbons that are not carbonyl carbons; a chain is
*anchored* when it touches a heteroatom or a carbonyl carbon.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..molgraph.descriptors import molecular_weight
from ..molgraph.molecule import BondOrder, Molecule


@dataclass(frozen=True)
class LipidRuleConfig:
    min_chain: int = 6
    min_mw: float = 400.0
    max_mw: float = 1200.0
    two_chain_outside_window: float = 0.75
    one_chain: float = 0.5


@dataclass(frozen=True)
class Chain:
    atoms: frozenset[int]
    length: int
    anchored: bool


def _is_chain_carbon(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    if atom.element != "C" or atom.aromatic or mol.in_ring(i):
        return False
    return not any(o is not BondOrder.SINGLE and mol.atoms[j].element != "C" for j, o in mol.adjacency[i])


def _longest_path(mol: Molecule, atoms: set[int]) -> int:
    """Atom count of the longest simple path inside an acyclic atom set."""

    def farthest(start: int) -> tuple[int, int]:
        best, far = 1, start
        stack = [(start, -1, 1)]
        while stack:
            i, parent, d = stack.pop()
            if d > best:
                best, far = d, i
            for j in mol.neighbors(i):
                if j != parent and j in atoms:
                    stack.append((j, i, d + 1))
        return far, best

    end, _ = farthest(min(atoms))
    return farthest(end)[1]


def find_chains(mol: Molecule) -> list[Chain]:
    carbons = [i for i in range(len(mol.atoms)) if _is_chain_carbon(mol, i)]
    chains = []
    for comp in mol.components(carbons):
        members = set(comp)
        anchored = any(
            j not in members and (mol.atoms[j].element != "C" or _is_carbonyl(mol, j))
            for i in members for j in mol.neighbors(i)
        )
        chains.append(Chain(frozenset(members), _longest_path(mol, members), anchored))
    chains.sort(key=lambda c: (-c.length, min(c.atoms)))
    return chains


def _is_carbonyl(mol: Molecule, i: int) -> bool:
    return mol.atoms[i].element == "C" and any(
        o is BondOrder.DOUBLE and mol.atoms[j].element in ("O", "S", "N") for j, o in mol.adjacency[i]
    )


def lipid_likeness(mol: Molecule, config: LipidRuleConfig | None = None) -> float:
    """Score in [0, 1]; 1.0 for two anchored long chains in the lipid mass window."""
    cfg = config or LipidRuleConfig()
    chains = find_chains(mol)
    tails = [c for c in chains if c.anchored and c.length >= cfg.min_chain]
    if len(tails) >= 2:
        mw = molecular_weight(mol)
        return 1.0 if cfg.min_mw <= mw <= cfg.max_mw else cfg.two_chain_outside_window
    if len(tails) == 1:
        return cfg.one_chain
    longest = max((c.length for c in chains), default=0)
    ratio = (longest - 2) / (cfg.min_chain - 2)
    return cfg.one_chain * min(1.0, max(0.0, ratio))
