"""Matching templates against reactants and applying their graph edits."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Iterator, NamedTuple, Sequence

from ..molgraph.molecule import Atom, Bond, BondOrder, Molecule, MoleculeError, ValenceError, allowed_valences
from ..molgraph.pattern import find_matches
from .templates import ReactionTemplate, TemplateRegistry


class ReactionError(ValueError):
    """A template application produced an invalid molecule and was rejected."""


@dataclass(frozen=True)
class Binding:
    template_id: str
    # one tuple of (map number, atom index) pairs per reactant slot
    slots: tuple[tuple[tuple[int, int], ...], ...]

    def atom_for(self, map_number: int) -> tuple[int, int]:
        for k, pairs in enumerate(self.slots):
            for m, atom in pairs:
                if m == map_number:
                    return k, atom
        raise KeyError(map_number)


class ProductEntry(NamedTuple):
    template_id: str
    molecule: Molecule

    @property
    def smiles(self) -> str:
        return self.molecule.canonical_smiles


def _slot_bindings(template: ReactionTemplate, k: int, mol: Molecule) -> list[tuple[tuple[int, int], ...]]:
    pat = template.patterns[k]
    seen: dict[tuple, None] = {}
    for emb in find_matches(pat, mol):
        key = tuple(sorted((m, emb[idx]) for idx, m in enumerate(pat.maps) if m is not None))
        seen.setdefault(key, None)
    return list(seen)


def iter_matches(template: ReactionTemplate, reactants: Sequence[Molecule]) -> Iterator[Binding]:
    if len(reactants) != template.arity:
        raise ValueError(f"template {template.id!r} takes {template.arity} reactants, got {len(reactants)}")
    per_slot = [_slot_bindings(template, k, mol) for k, mol in enumerate(reactants)]
    for combo in cartesian(*per_slot):
        yield Binding(template.id, tuple(combo))


def matches(template: ReactionTemplate, reactants: Sequence[Molecule]) -> list[Binding]:
    """Distinct embeddings, deduplicated on the mapped atoms only."""
    return list(iter_matches(template, reactants))


def apply(template: ReactionTemplate, reactants: Sequence[Molecule], binding: Binding) -> Molecule:
    if binding.template_id != template.id or len(binding.slots) != len(reactants):
        raise ValueError("binding does not belong to this template/reactant set")
    offsets, total = [], 0
    for mol in reactants:
        offsets.append(total)
        total += len(mol.atoms)
    atom_of = {}
    for k, pairs in enumerate(binding.slots):
        for m, idx in pairs:
            atom_of[m] = offsets[k] + idx

    elements, charges, hs, arom = [], [], [], []
    bonds: dict[tuple[int, int], BondOrder] = {}
    for mol, off in zip(reactants, offsets):
        for a in mol.atoms:
            elements.append(a.element)
            charges.append(a.formal_charge)
            hs.append(a.implicit_h)
            arom.append(a.aromatic)
        for b in mol.bonds:
            bonds[(min(b.a, b.b) + off, max(b.a, b.b) + off)] = b.order

    def key(m1: int, m2: int) -> tuple[int, int]:
        i, j = atom_of[m1], atom_of[m2]
        return (min(i, j), max(i, j))

    leaving = {atom_of[m] for m in template.leaving}
    for (i, j), order in list(bonds.items()):
        if (i in leaving) != (j in leaving):
            keep = j if i in leaving else i
            hs[keep] += order.valence
            del bonds[(i, j)]

    for edit in template.edits:
        k = key(edit.a, edit.b)
        old = bonds.get(k)
        if edit.kind == "add":
            if old is not None:
                raise ReactionError(f"{template.id}: atoms already bonded")
            bonds[k] = edit.order
            delta = -edit.order.valence
        elif edit.kind == "remove":
            if old is None:
                raise ReactionError(f"{template.id}: no bond to break")
            del bonds[k]
            delta = old.valence
        else:
            if old is None:
                raise ReactionError(f"{template.id}: no bond to re-order")
            bonds[k] = edit.order
            delta = old.valence - edit.order.valence
        for i in k:
            hs[i] += delta
            if hs[i] < 0:
                raise ReactionError(f"{template.id}: atom {i} has no hydrogen to give up")

    kept = [i for i in range(total) if i not in leaving]
    index = {old: new for new, old in enumerate(kept)}
    try:
        product = Molecule(
            tuple(Atom(elements[i], charges[i], hs[i], arom[i]) for i in kept),
            tuple(Bond(index[i], index[j], order) for (i, j), order in sorted(bonds.items())
                  if i in index and j in index),
        )
        product.check_valence()
    except (ValenceError, MoleculeError) as exc:
        raise ReactionError(f"{template.id}: {exc}") from None
    for i, atom in enumerate(product.atoms):
        if product.bond_valence(i) + atom.implicit_h not in allowed_valences(atom.element, atom.formal_charge) \
                and not atom.aromatic:
            raise ReactionError(f"{template.id}: atom {i} ({atom.element}) ends with a non-standard valence")
    if not product.is_connected:
        raise ReactionError(f"{template.id}: product is disconnected")
    return product


def leaving_elements(template: ReactionTemplate, reactants: Sequence[Molecule], binding: Binding) -> Counter:
    out: Counter = Counter()
    for m in template.leaving:
        k, idx = binding.atom_for(m)
        out[reactants[k].atoms[idx].element] += 1
    return out


def conservation_violation(
    template: ReactionTemplate, reactants: Sequence[Molecule], binding: Binding, product: Molecule
) -> str | None:
    """Describe a heavy-atom bookkeeping error, or return None if balanced."""
    before: Counter = Counter()
    for mol in reactants:
        before.update(a.element for a in mol.atoms)
    after = Counter(a.element for a in product.atoms) + leaving_elements(template, reactants, binding)
    if before != after:
        return f"{template.id}: reactants {dict(before)} != product+leaving {dict(after)}"
    return None


def _orientations(state: Molecule, block: Molecule) -> tuple[tuple[Molecule, Molecule], ...]:
    return ((state, block), (block, state))


def _products(registry: TemplateRegistry, state: Molecule, block: Molecule) -> Iterator[ProductEntry]:
    for template in registry:
        if template.arity != 2:
            continue
        for pair in _orientations(state, block):
            for binding in iter_matches(template, pair):
                try:
                    yield ProductEntry(template.id, apply(template, pair, binding))
                except ReactionError:
                    continue


def enumerate_products(registry: TemplateRegistry, state: Molecule, block: Molecule) -> list[ProductEntry]:
    """All distinct products of ``state`` + ``block``.

    Sorted by template order, then canonical SMILES; a product reachable by
    several templates is listed once under the earliest one.
    """
    seen: set[str] = set()
    out: list[ProductEntry] = []
    by_template: dict[str, list[ProductEntry]] = {}
    for entry in _products(registry, state, block):
        by_template.setdefault(entry.template_id, []).append(entry)
    for template in registry:
        for entry in sorted(by_template.get(template.id, ()), key=lambda e: e.smiles):
            if entry.smiles in seen:
                continue
            seen.add(entry.smiles)
            out.append(entry)
    return out


def can_react(registry: TemplateRegistry, state: Molecule, block: Molecule) -> bool:
    return next(_products(registry, state, block), None) is not None
