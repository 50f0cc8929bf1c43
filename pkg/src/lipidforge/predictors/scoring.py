"""Combined property score used as the search reward."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from ..molgraph.molecule import Molecule
from .ionization import IonizationConfig, PkaRules, is_ionizable
from .lipid import LipidRuleConfig, lipid_likeness

MAX_SCORE = 2.0


@dataclass(frozen=True)
class PropertyScore:
    lipid_score: float
    ionizable: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.lipid_score <= 1.0:
            raise ValueError(f"lipid score {self.lipid_score} outside [0, 1]")

    @property
    def total(self) -> float:
        return self.lipid_score + (1.0 if self.ionizable else 0.0)

    def is_ionizable_lipid(self, lipid_threshold: float = 0.5) -> bool:
        return self.ionizable and self.lipid_score >= lipid_threshold

    def to_dict(self) -> dict:
        return {"lipid_score": self.lipid_score, "ionizable": self.ionizable, "total": self.total}

    @classmethod
    def from_dict(cls, d: dict) -> "PropertyScore":
        return cls(float(d["lipid_score"]), bool(d["ionizable"]))


class PropertyScorer(Protocol):
    def score(self, mol: Molecule) -> PropertyScore: ...


@dataclass
class RuleBasedScorer:
    """Lipid-likeness surrogate plus rule-table ionizability, memoised by SMILES."""

    ionization: IonizationConfig = field(default_factory=IonizationConfig)
    lipid: LipidRuleConfig = field(default_factory=LipidRuleConfig)
    rules: PkaRules | None = None
    _cache: dict[str, PropertyScore] = field(default_factory=dict, repr=False)

    def score(self, mol: Molecule) -> PropertyScore:
        key = mol.canonical_smiles
        hit = self._cache.get(key)
        if hit is None:
            hit = PropertyScore(lipid_likeness(mol, self.lipid), is_ionizable(mol, self.ionization, self.rules))
            self._cache[key] = hit
        return hit


def property_score(mol: Molecule, scorer: PropertyScorer | None = None) -> PropertyScore:
    return (scorer or RuleBasedScorer()).score(mol)
