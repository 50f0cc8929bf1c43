"""Ionizability and lipid-likeness predictors."""

from .ionization import (
    IonizableSite,
    IonizationConfig,
    PkaRules,
    assign_pka,
    default_pka_rules,
    is_ionizable,
    load_pka_rules,
    net_charge,
)
from .lipid import LipidRuleConfig, find_chains, lipid_likeness
from .scoring import MAX_SCORE, PropertyScore, PropertyScorer, RuleBasedScorer, property_score

__all__ = [
    "IonizableSite", "IonizationConfig", "LipidRuleConfig", "MAX_SCORE", "PkaRules", "PropertyScore",
    "PropertyScorer", "RuleBasedScorer", "assign_pka", "default_pka_rules", "find_chains", "is_ionizable",
    "lipid_likeness", "load_pka_rules", "net_charge", "property_score",
]
