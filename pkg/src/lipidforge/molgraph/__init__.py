"""Molecular graphs: parsing, canonical SMILES, descriptors and fingerprints."""

from .descriptors import (
    FunctionalGroupReport,
    MissingAtomTypeError,
    functional_groups,
    log_p,
    molecular_weight,
)
from .fingerprint import Fingerprint, morgan_fingerprint, tanimoto
from .io import SmilesRecord, read_smiles_file
from .isomorphism import SizeLimitError, ged_le_one, is_isomorphic
from .molecule import Atom, Bond, BondOrder, Molecule, MoleculeError, UnsupportedElementError, ValenceError
from .pattern import Pattern, PatternError, find_matches, has_match, parse_pattern
from .smiles import SmilesError, canonical_smiles, parse_smiles, to_smiles

__all__ = [
    "Atom", "Bond", "BondOrder", "Fingerprint", "FunctionalGroupReport", "MissingAtomTypeError",
    "Molecule", "MoleculeError", "Pattern", "PatternError", "SizeLimitError", "SmilesError",
    "SmilesRecord", "UnsupportedElementError", "ValenceError", "canonical_smiles", "find_matches",
    "functional_groups", "ged_le_one", "has_match", "is_isomorphic", "log_p", "molecular_weight",
    "morgan_fingerprint", "parse_pattern", "parse_smiles", "read_smiles_file", "tanimoto", "to_smiles",
]
