"""Scalar descriptors: molecular weight, logP and functional-group counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .molecule import ATOMIC_WEIGHT, BondOrder, Molecule
from .pattern import Pattern, _embed, parse_pattern

LOGP_TABLE = "crippen_logp.tsv"


class MissingAtomTypeError(LookupError):
    pass


def molecular_weight(mol: Molecule) -> float:
    """Average molecular mass in g/mol, implicit hydrogens included."""
    h = sum(a.implicit_h for a in mol.atoms)
    return sum(ATOMIC_WEIGHT[a.element] for a in mol.atoms) + h * ATOMIC_WEIGHT["H"]


@dataclass(frozen=True)
class LogPTable:
    heavy: tuple[tuple[Pattern, float], ...]
    hydrogen: tuple[tuple[Pattern, float], ...]
    source: str = ""


def load_logp_table(path: str | Path | None = None) -> LogPTable:
    if path is None:
        text = resources.files("lipidforge.molgraph").joinpath("data").joinpath(LOGP_TABLE).read_text()
        source = LOGP_TABLE
    else:
        text = Path(path).read_text()
        source = str(path)
    heavy, hydrogen = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            pattern, value = line.split("\t")
            contribution = float(value)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: expected pattern<TAB>contribution") from exc
        if pattern.startswith("H:"):
            hydrogen.append((parse_pattern(pattern[2:]), contribution))
        else:
            heavy.append((parse_pattern(pattern), contribution))
    return LogPTable(tuple(heavy), tuple(hydrogen), source)


@lru_cache(maxsize=1)
def default_logp_table() -> LogPTable:
    return load_logp_table()


def _first_match(rows, mol: Molecule, i: int) -> float | None:
    for pat, value in rows:
        if next(_embed(pat, mol, i), None) is not None:
            return value
    return None


def log_p(mol: Molecule, table: LogPTable | None = None) -> float:
    """Additive atom-contribution estimate of the octanol/water logP."""
    table = table or default_logp_table()
    key = ("logp", table.source)
    if key in mol.memo:
        return mol.memo[key]
    total = 0.0
    for i, atom in enumerate(mol.atoms):
        value = _first_match(table.heavy, mol, i)
        if value is None:
            env = ",".join(sorted(mol.atoms[j].element for j in mol.neighbors(i)))
            raise MissingAtomTypeError(
                f"no logP contribution for atom {i} ({atom.element}, charge "
                f"{atom.formal_charge}, H{atom.implicit_h}, neighbours [{env}])"
            )
        total += value
        if atom.implicit_h:
            hvalue = _first_match(table.hydrogen, mol, i)
            if hvalue is None:
                raise MissingAtomTypeError(f"no hydrogen contribution for atom {i} ({atom.element})")
            total += hvalue * atom.implicit_h
    mol.memo[key] = total
    return total


@dataclass(frozen=True)
class FunctionalGroupReport:
    carboxyl_sites: tuple[int, ...] = ()
    hydroxyl_sites: tuple[int, ...] = ()
    amine_sites: tuple[int, ...] = ()
    excluded_amine_sites: tuple[tuple[int, str], ...] = field(default=())

    @property
    def carboxyl_count(self) -> int:
        return len(self.carboxyl_sites)

    @property
    def hydroxyl_count(self) -> int:
        return len(self.hydroxyl_sites)

    @property
    def amine_count(self) -> int:
        return len(self.amine_sites)

    @property
    def has_quaternary(self) -> bool:
        return any(reason == "quaternary" for _, reason in self.excluded_amine_sites)


def _carbonyl_like(mol: Molecule, c: int) -> bool:
    return mol.atoms[c].element == "C" and any(
        order is BondOrder.DOUBLE and mol.atoms[j].element in ("O", "S")
        for j, order in mol.adjacency[c]
    )


def functional_groups(mol: Molecule) -> FunctionalGroupReport:
    """Count carboxyl, hydroxyl and reactive amine groups.

    Amines are nitrogens bonded only to carbon and hydrogen through single
    bonds. Nitrogens next to a carbonyl carbon, bonded to another nitrogen,
    or carrying a positive charge / four substituents are reported as
    excluded with the reason.
    """
    if "groups" in mol.memo:
        return mol.memo["groups"]
    carboxyl, acid_oxygens = [], set()
    for i, atom in enumerate(mol.atoms):
        if atom.element != "C" or atom.aromatic:
            continue
        has_carbonyl = any(
            order is BondOrder.DOUBLE and mol.atoms[j].element == "O" for j, order in mol.adjacency[i]
        )
        if not has_carbonyl:
            continue
        hydroxy = [
            j for j, order in mol.adjacency[i]
            if order is BondOrder.SINGLE and mol.atoms[j].element == "O"
            and mol.atoms[j].implicit_h >= 1 and mol.atoms[j].formal_charge == 0
        ]
        if hydroxy:
            carboxyl.append(i)
            acid_oxygens.update(hydroxy[:1])
    hydroxyl = []
    for i, atom in enumerate(mol.atoms):
        if (atom.element == "O" and atom.implicit_h >= 1 and atom.formal_charge == 0
                and i not in acid_oxygens and mol.degree(i) == 1
                and mol.atoms[mol.neighbors(i)[0]].element == "C"):
            hydroxyl.append(i)
    amines, excluded = [], []
    for i, atom in enumerate(mol.atoms):
        if atom.element != "N":
            continue
        nbrs = mol.adjacency[i]
        if atom.formal_charge > 0 or len(nbrs) == 4:
            excluded.append((i, "quaternary"))
        elif any(mol.atoms[j].element == "N" for j, _ in nbrs):
            excluded.append((i, "n_n_linked"))
        elif any(order not in (BondOrder.SINGLE, BondOrder.AROMATIC) for _, order in nbrs):
            continue
        elif not all(mol.atoms[j].element == "C" for j, _ in nbrs):
            continue
        elif any(_carbonyl_like(mol, j) for j, _ in nbrs):
            excluded.append((i, "amide_adjacent"))
        elif atom.aromatic:
            excluded.append((i, "aromatic_ring"))
        else:
            amines.append(i)
    report = FunctionalGroupReport(tuple(carboxyl), tuple(hydroxyl), tuple(amines), tuple(excluded))
    mol.memo["groups"] = report
    return report
