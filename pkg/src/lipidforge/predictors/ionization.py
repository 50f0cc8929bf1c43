"""Site pKa assignment from a rule table and Henderson-Hasselbalch charge."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal

from ..molgraph.descriptors import functional_groups
from ..molgraph.molecule import BondOrder, Molecule

PKA_MIN, PKA_MAX = 0.5, 13.5


@dataclass(frozen=True)
class IonizableSite:
    atom_index: int
    kind: Literal["acidic", "basic"]
    pka: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("acidic", "basic"):
            raise ValueError(f"unknown site kind {self.kind!r}")
        if not 0.0 < self.pka < 14.0:
            raise ValueError(f"pKa {self.pka} outside (0, 14)")


@dataclass(frozen=True)
class PkaRules:
    base: dict[str, tuple[str, float]]
    shifts: dict[str, float]
    source: str = ""

    def value(self, label: str) -> float:
        return self.base[label][1]

    def shift(self, label: str) -> float:
        return self.shifts.get(label, 0.0)


def load_pka_rules(path: str | Path | None = None) -> PkaRules:
    if path is None:
        text = resources.files("lipidforge.predictors").joinpath("data").joinpath("pka_rules.tsv").read_text()
        source = "pka_rules.tsv"
    else:
        text, source = Path(path).read_text(), str(path)
    base, shifts = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{source}:{lineno}: expected class<TAB>kind<TAB>value")
        label, kind, value = (p.strip() for p in parts)
        try:
            number = float(value)
        except ValueError:
            raise ValueError(f"{source}:{lineno}: bad number {value!r}") from None
        if kind == "shift":
            shifts[label] = number
        elif kind in ("acidic", "basic"):
            base[label] = (kind, number)
        else:
            raise ValueError(f"{source}:{lineno}: unknown kind {kind!r}")
    for required in ("primary_amine", "secondary_amine", "tertiary_amine", "aromatic_amine", "carboxylic_acid"):
        if required not in base:
            raise ValueError(f"{source}: missing rule {required!r}")
    return PkaRules(base, shifts, source)


@lru_cache(maxsize=1)
def default_pka_rules() -> PkaRules:
    return load_pka_rules()


def _amine_class(mol: Molecule, n: int) -> str:
    nbrs = mol.neighbors(n)
    if any(mol.atoms[j].aromatic for j in nbrs):
        return "aromatic_amine"
    return ("primary_amine", "secondary_amine", "tertiary_amine")[min(len(nbrs), 3) - 1] if nbrs else "primary_amine"


def _is_sp3_oxygen(mol: Molecule, i: int) -> bool:
    atom = mol.atoms[i]
    return atom.element == "O" and not atom.aromatic and all(o is BondOrder.SINGLE for _, o in mol.adjacency[i])


def _is_carbonyl_carbon(mol: Molecule, i: int) -> bool:
    return mol.atoms[i].element == "C" and any(
        o is BondOrder.DOUBLE and mol.atoms[j].element == "O" for j, o in mol.adjacency[i]
    )


def _environment_shift(mol: Molecule, n: int, rules: PkaRules) -> float:
    dist = mol.distances_from([n])
    total = 0.0
    for i, d in enumerate(dist):
        if d == 3 and _is_sp3_oxygen(mol, i):
            total += rules.shift("oxygen_3_bonds")
        elif d == 4 and _is_sp3_oxygen(mol, i):
            total += rules.shift("oxygen_4_bonds")
        elif d == 2 and _is_carbonyl_carbon(mol, i):
            total += rules.shift("carbonyl_2_bonds")
        elif d == 3 and _is_carbonyl_carbon(mol, i):
            total += rules.shift("carbonyl_3_bonds")
    return total


def _clamp(pka: float) -> float:
    return min(PKA_MAX, max(PKA_MIN, pka))


def assign_pka(mol: Molecule, rules: PkaRules | None = None) -> list[IonizableSite]:
    """Basic sites for every reactive-class amine, acidic sites for carboxyls.

    Amines are protonated in order of decreasing intrinsic pKa; each later
    amine is penalised for every earlier one within four bonds.
    """
    rules = rules or default_pka_rules()
    key = ("pka", rules.source)
    if key in mol.memo:
        return list(mol.memo[key])
    groups = functional_groups(mol)
    basic = []
    for n in groups.amine_sites:
        label = _amine_class(mol, n)
        pka = rules.value(label)
        if label != "aromatic_amine":
            pka += _environment_shift(mol, n, rules)
        basic.append((pka, n, label))
    basic.sort(key=lambda t: (-t[0], t[1]))
    sites: list[IonizableSite] = []
    placed: list[int] = []
    for pka, n, label in basic:
        dist = mol.distances_from([n])
        for other in placed:
            d = dist[other]
            if 2 <= d <= 3:
                pka += rules.shift("cation_2_3_bonds")
            elif d == 4:
                pka += rules.shift("cation_4_bonds")
        placed.append(n)
        sites.append(IonizableSite(n, "basic", round(_clamp(pka), 6), label))
    kind, acid_pka = rules.base["carboxylic_acid"]
    for c in groups.carboxyl_sites:
        sites.append(IonizableSite(c, kind, acid_pka, "carboxylic_acid"))
    sites.sort(key=lambda s: s.atom_index)
    mol.memo[key] = tuple(sites)
    return sites


def net_charge(sites: Iterable[IonizableSite], ph: float) -> float:
    """Expected net charge: protonated fraction of bases minus deprotonated fraction of acids."""
    q = 0.0
    for site in sites:
        if site.kind == "basic":
            q += 1.0 / (1.0 + 10.0 ** (ph - site.pka))
        else:
            q -= 1.0 / (1.0 + 10.0 ** (site.pka - ph))
    return q


@dataclass(frozen=True)
class IonizationConfig:
    ph_neutral: float = 7.4
    ph_acidic: float = 5.0
    tau_neutral: float = 0.5
    tau_positive: float = 0.5

    def __post_init__(self) -> None:
        for name in ("ph_neutral", "ph_acidic"):
            if not 0.0 <= getattr(self, name) <= 14.0 or math.isnan(getattr(self, name)):
                raise ValueError(f"{name} must lie in [0, 14]")


def is_ionizable(mol: Molecule, config: IonizationConfig | None = None, rules: PkaRules | None = None) -> bool:
    """Near-neutral at physiological pH and cationic in the acidic compartment."""
    cfg = config or IonizationConfig()
    sites = assign_pka(mol, rules)
    if not sites:
        return False
    return (abs(net_charge(sites, cfg.ph_neutral)) < cfg.tau_neutral
            and net_charge(sites, cfg.ph_acidic) >= cfg.tau_positive)
