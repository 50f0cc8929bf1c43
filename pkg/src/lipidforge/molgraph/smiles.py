"""SMILES reading and writing.

Supported dialect: organic subset, bracket atoms with charge and hydrogen
count, branches, ring closures (including ``%nn``), bond symbols ``- = # :``
and aromatic lowercase atoms. Stereo marks (``@``, ``/``, ``\\``) and atom
classes are read and discarded. Kekulé input is aromatized with a simple
Hückel rule so that both spellings of an aromatic ring canonicalize alike.
"""

from __future__ import annotations

import logging
import random
from collections import Counter

from .molecule import (
    ATOMIC_NUMBER,
    SUPPORTED_ELEMENTS,
    Atom,
    Bond,
    BondOrder,
    Molecule,
    MoleculeError,
    UnsupportedElementError,
    ValenceError,
    allowed_valences,
    default_hydrogens,
)

log = logging.getLogger(__name__)

_BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE,
                 ":": BondOrder.AROMATIC, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE}
_AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}


class SmilesError(MoleculeError):
    """Malformed SMILES; ``position`` is the 0-based offending character."""

    def __init__(self, message: str, position: int | None = None, text: str = ""):
        self.position = position
        self.text = text
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}" + (f" in {text!r}" if text else ""))


class _Builder:
    def __init__(self, text: str):
        self.text = text
        self.elements: list[str] = []
        self.charges: list[int] = []
        self.hcount: list[int | None] = []
        self.aromatic: list[bool] = []
        self.bonds: dict[tuple[int, int], BondOrder | None] = {}
        self.warned_stereo = False

    def add_atom(self, element: str, aromatic: bool, charge: int = 0, h: int | None = None) -> int:
        self.elements.append(element)
        self.charges.append(charge)
        self.hcount.append(h)
        self.aromatic.append(aromatic)
        return len(self.elements) - 1

    def add_bond(self, a: int, b: int, order: BondOrder | None, pos: int) -> None:
        key = (min(a, b), max(a, b))
        if a == b or key in self.bonds:
            raise SmilesError("duplicate or self bond", pos, self.text)
        self.bonds[key] = order

    def stereo(self) -> None:
        if not self.warned_stereo:
            log.warning("stereochemistry in %r ignored", self.text)
            self.warned_stereo = True


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a :class:`Molecule`."""
    text = text.strip()
    if not text:
        raise SmilesError("empty SMILES")
    b = _Builder(text)
    prev: int | None = None
    pending_bond: BondOrder | None = None
    pending_pos = 0
    branch_stack: list[int | None] = []
    open_rings: dict[int, tuple[int, BondOrder | None, int]] = {}
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesError("unclosed bracket atom", i, text)
            atom = _parse_bracket(text, i + 1, end, b)
            i = end + 1
        elif ch in "BCNOPSFI":
            two = text[i:i + 2]
            if two in ("Cl", "Br"):
                atom = b.add_atom(two, False)
                i += 2
            else:
                atom = b.add_atom(ch, False)
                i += 1
        elif ch in _AROMATIC_SYMBOLS:
            atom = b.add_atom(_AROMATIC_SYMBOLS[ch], True)
            i += 1
        elif ch in _BOND_SYMBOLS:
            if pending_bond is not None or prev is None:
                raise SmilesError(f"unexpected bond symbol {ch!r}", i, text)
            if ch in "/\\":
                b.stereo()
            pending_bond = _BOND_SYMBOLS[ch]
            pending_pos = i
            i += 1
            continue
        elif ch == "(":
            if prev is None:
                raise SmilesError("branch before any atom", i, text)
            branch_stack.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not branch_stack:
                raise SmilesError("unmatched ')'", i, text)
            if pending_bond is not None:
                raise SmilesError("bond symbol before ')'", i, text)
            prev = branch_stack.pop()
            i += 1
            continue
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesError("ring closure before any atom", i, text)
            if ch == "%":
                digits = text[i + 1:i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesError("malformed %nn ring closure", i, text)
                num = int(digits)
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in open_rings:
                other, order, opos = open_rings.pop(num)
                if order is not None and pending_bond is not None and order != pending_bond:
                    raise SmilesError(f"conflicting bond orders on ring closure {num}", opos, text)
                b.add_bond(other, prev, pending_bond or order, i - 1)
            else:
                open_rings[num] = (prev, pending_bond, i - 1)
            pending_bond = None
            continue
        elif ch == ".":
            if pending_bond is not None:
                raise SmilesError("bond symbol before '.'", i, text)
            prev = None
            i += 1
            continue
        else:
            if ch == "*":
                raise UnsupportedElementError(f"wildcard atom at position {i} in {text!r}")
            raise SmilesError(f"unexpected character {ch!r}", i, text)
        if prev is not None:
            b.add_bond(prev, atom, pending_bond, pending_pos)
        elif pending_bond is not None:
            raise SmilesError("bond without a preceding atom", pending_pos, text)
        pending_bond = None
        prev = atom
    if pending_bond is not None:
        raise SmilesError("dangling bond symbol", pending_pos, text)
    if branch_stack:
        raise SmilesError("unclosed branch", n, text)
    if open_rings:
        num, (_, _, pos) = next(iter(open_rings.items()))
        raise SmilesError(f"unmatched ring closure {num}", pos, text)
    return _finish(b)


def _parse_bracket(text: str, start: int, end: int, b: _Builder) -> int:
    body = text[start:end]
    j = 0
    while j < len(body) and body[j].isdigit():
        j += 1  # isotope, discarded
    rest = body[j:]
    if rest[:2] in ("Cl", "Br"):
        element, aromatic, j = rest[:2], False, j + 2
    elif rest[:1] and rest[0].isupper():
        element, aromatic = rest[0], False
        j += 1
        if len(rest) > 1 and rest[1].islower() and rest[1] not in "h":
            element = rest[:2]
            j += 1
    elif rest[:1] in _AROMATIC_SYMBOLS:
        element, aromatic = _AROMATIC_SYMBOLS[rest[0]], True
        j += 1
    else:
        raise SmilesError("bad bracket atom", start, text)
    if element != "H" and element not in SUPPORTED_ELEMENTS:
        raise UnsupportedElementError(f"unsupported element {element!r} at position {start} in {text!r}")
    if body[j:j + 1] == "@":
        b.stereo()
        while body[j:j + 1] == "@":
            j += 1
        if body[j:j + 2] in ("TH", "AL", "SP", "TB", "OH"):
            j += 2
            while body[j:j + 1].isdigit():
                j += 1
    h = 0
    if body[j:j + 1] == "H":
        j += 1
        k = j
        while body[j:j + 1].isdigit():
            j += 1
        h = int(body[k:j]) if j > k else 1
    charge = 0
    if body[j:j + 1] in ("+", "-"):
        sign = 1 if body[j] == "+" else -1
        j += 1
        k = j
        while body[j:j + 1].isdigit():
            j += 1
        if j > k:
            charge = sign * int(body[k:j])
        else:
            charge = sign
            while body[j:j + 1] == body[k - 1]:
                charge += sign
                j += 1
    if body[j:j + 1] == ":":
        j += 1
        while body[j:j + 1].isdigit():
            j += 1
    if j != len(body):
        raise SmilesError(f"unparsed bracket content {body[j:]!r}", start + j, text)
    return b.add_atom(element, aromatic, charge, h)


def _finish(b: _Builder) -> Molecule:
    n = len(b.elements)
    # fold explicit [H] atoms into their heavy neighbour
    hydrogens = {i for i in range(n) if b.elements[i] == "H"}
    extra_h = Counter()
    for (x, y) in list(b.bonds):
        if x in hydrogens or y in hydrogens:
            if x in hydrogens and y in hydrogens:
                raise MoleculeError("molecular hydrogen is not supported")
            heavy = y if x in hydrogens else x
            extra_h[heavy] += 1
            del b.bonds[(x, y)]
    keep = [i for i in range(n) if i not in hydrogens]
    if not keep:
        raise MoleculeError("no heavy atoms")
    index = {old: new for new, old in enumerate(keep)}
    for old in keep:
        if b.aromatic[old] and b.elements[old] not in _AROMATIC_SYMBOLS.values():
            raise SmilesError(f"element {b.elements[old]} cannot be aromatic")

    def resolve(order, x, y):
        if order is not None:
            return order
        return BondOrder.AROMATIC if b.aromatic[x] and b.aromatic[y] else BondOrder.SINGLE

    bonds = [Bond(index[x], index[y], resolve(o, x, y)) for (x, y), o in sorted(b.bonds.items())]
    for bond in bonds:
        if bond.order is BondOrder.AROMATIC and not (b.aromatic[keep[bond.a]] and b.aromatic[keep[bond.b]]):
            raise SmilesError("aromatic bond between non-aromatic atoms")
    # aromatic bonds outside rings are single (e.g. biphenyl written without '-')
    skeleton = Molecule(tuple(Atom(b.elements[o]) for o in keep),
                        tuple(Bond(x.a, x.b, BondOrder.SINGLE) for x in bonds))
    ring_bonds = skeleton.ring_bonds
    bonds = [
        Bond(x.a, x.b, BondOrder.SINGLE)
        if x.order is BondOrder.AROMATIC and (min(x.a, x.b), max(x.a, x.b)) not in ring_bonds
        else x
        for x in bonds
    ]
    for new, old in enumerate(keep):
        if b.aromatic[old] and new not in skeleton.ring_atoms:
            raise SmilesError(f"non-ring atom {new} marked aromatic")
    valence = [0] * len(keep)
    for bond in bonds:
        valence[bond.a] += bond.order.valence
        valence[bond.b] += bond.order.valence
    atoms = []
    for new, old in enumerate(keep):
        element, charge, arom = b.elements[old], b.charges[old], b.aromatic[old]
        if b.hcount[old] is None:
            h = default_hydrogens(element, charge, arom, valence[new] + extra_h[old])
            if h is None:
                raise ValenceError(
                    f"atom {new} ({element}) exceeds allowed valence with {valence[new]} bonds"
                )
            h += extra_h[old]
        else:
            h = b.hcount[old] + extra_h[old]
            if valence[new] + h > max(allowed_valences(element, charge)):
                raise ValenceError(f"atom {new} ([{element}]) exceeds allowed valence")
        atoms.append(Atom(element, charge, h, arom))
    return perceive_aromaticity(Molecule(tuple(atoms), tuple(bonds)))


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Mark Kekulé rings satisfying the 4n+2 rule as aromatic.

    Rings already written in aromatic form are left untouched.
    """
    if not any(b.order is BondOrder.DOUBLE for b in mol.bonds) or not mol.rings:
        return mol
    aromatic_rings = []
    for ring in mol.rings:
        if any(mol.atoms[i].aromatic for i in ring):
            continue
        electrons = 0
        for i in ring:
            e = _pi_electrons(mol, i)
            if e is None:
                break
            electrons += e
        else:
            if electrons % 4 == 2:
                aromatic_rings.append(ring)
    if not aromatic_rings:
        return mol
    arom_atoms = set()
    arom_bonds = set()
    for ring in aromatic_rings:
        arom_atoms.update(ring)
        for k in range(len(ring)):
            u, v = ring[k], ring[(k + 1) % len(ring)]
            arom_bonds.add((min(u, v), max(u, v)))
    atoms = tuple(
        Atom(a.element, a.formal_charge, a.implicit_h, a.aromatic or i in arom_atoms)
        for i, a in enumerate(mol.atoms)
    )
    bonds = tuple(
        Bond(x.a, x.b, BondOrder.AROMATIC) if (min(x.a, x.b), max(x.a, x.b)) in arom_bonds else x
        for x in mol.bonds
    )
    return Molecule(atoms, bonds)


def _pi_electrons(mol: Molecule, i: int) -> int | None:
    atom = mol.atoms[i]
    if atom.element not in _AROMATIC_SYMBOLS.values():
        return None
    ring_double = False
    for j, order in mol.adjacency[i]:
        if order in (BondOrder.DOUBLE, BondOrder.TRIPLE):
            if order is BondOrder.DOUBLE and mol.is_ring_bond(i, j):
                ring_double = True
            else:
                return None
    if ring_double:
        return 1
    connections = mol.bond_valence(i) + atom.implicit_h
    if atom.formal_charge == 0:
        if atom.element in ("N", "P") and connections == 3:
            return 2
        if atom.element in ("O", "S") and connections == 2:
            return 2
    if atom.element == "C" and atom.formal_charge == -1 and connections == 3:
        return 2
    return None


# -- writing ----------------------------------------------------------------


def _atom_symbol(mol: Molecule, i: int) -> str:
    atom = mol.atoms[i]
    sym = atom.element.lower() if atom.aromatic else atom.element
    if atom.formal_charge == 0:
        if default_hydrogens(atom.element, 0, atom.aromatic, mol.bond_valence(i)) == atom.implicit_h:
            return sym
    out = "[" + sym
    if atom.implicit_h:
        out += "H" if atom.implicit_h == 1 else f"H{atom.implicit_h}"
    q = atom.formal_charge
    if q:
        out += ("+" if q > 0 else "-") + (str(abs(q)) if abs(q) > 1 else "")
    return out + "]"


def _bond_symbol(mol: Molecule, i: int, j: int, order: BondOrder) -> str:
    if order is BondOrder.SINGLE:
        return "-" if mol.atoms[i].aromatic and mol.atoms[j].aromatic else ""
    if order is BondOrder.DOUBLE:
        return "="
    if order is BondOrder.TRIPLE:
        return "#"
    return ""


def write_smiles(mol: Molecule, ranks: list[int]) -> str:
    """Write SMILES visiting atoms in ``ranks`` order (lowest first)."""
    parts = []
    for comp in mol.components():
        start = min(comp, key=lambda k: ranks[k])
        parts.append(_write_component(mol, ranks, start))
    return ".".join(sorted(parts))


def _write_component(mol: Molecule, ranks: list[int], start: int) -> str:
    parent: dict[int, int | None] = {start: None}
    discovery: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    closures: dict[int, list[tuple[int, BondOrder, bool]]] = {}
    on_stack: set[int] = set()
    seen_edges: set[tuple[int, int]] = set()

    stack = [(start, iter(sorted(mol.adjacency[start], key=lambda x: ranks[x[0]])))]
    discovery[start] = 0
    children[start] = []
    on_stack.add(start)
    while stack:
        i, it = stack[-1]
        for j, order in it:
            if j == parent[i]:
                continue
            edge = (min(i, j), max(i, j))
            if j in discovery:
                if j in on_stack and edge not in seen_edges:
                    seen_edges.add(edge)
                    closures.setdefault(j, []).append((i, order, True))
                    closures.setdefault(i, []).append((j, order, False))
                continue
            seen_edges.add(edge)
            parent[j] = i
            discovery[j] = len(discovery)
            children[i].append(j)
            children[j] = []
            on_stack.add(j)
            stack.append((j, iter(sorted(mol.adjacency[j], key=lambda x: ranks[x[0]]))))
            break
        else:
            stack.pop()
            on_stack.discard(i)

    digits: dict[tuple[int, int], int] = {}
    in_use: set[int] = set()
    out: list[str] = []

    def ring_label(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    # iterative emission: items are atoms to emit or literal strings
    work: list[tuple[int, int | None] | str] = [(start, None)]
    while work:
        item = work.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        i, via = item
        if via is not None:
            out.append(_bond_symbol(mol, via, i, mol.bond_order(via, i)))
        out.append(_atom_symbol(mol, i))
        entries = sorted(closures.get(i, ()), key=lambda e: discovery[e[0]])
        for partner, order, opening in entries:
            if opening:
                d = 1
                while d in in_use:
                    d += 1
                in_use.add(d)
                digits[(i, partner)] = d
                out.append(_bond_symbol(mol, i, partner, order) + ring_label(d))
        for partner, order, opening in entries:
            if not opening:
                d = digits.pop((partner, i))
                in_use.discard(d)
                out.append(ring_label(d))
        kids = children[i]
        pending: list[tuple[int, int | None] | str] = []
        for k in kids[:-1]:
            pending.extend(["(", (k, i), ")"])
        if kids:
            pending.append((kids[-1], i))
        work.extend(reversed(pending))
    return "".join(out)


# -- canonical ranking ------------------------------------------------------


def _dense_rank(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    n_classes = len(set(ranks))
    adj = mol.adjacency
    while True:
        keys = [
            (ranks[i], tuple(sorted((ranks[j], int(order)) for j, order in adj[i])))
            for i in range(len(ranks))
        ]
        ranks = _dense_rank(keys)
        count = len(set(ranks))
        if count == n_classes:
            return ranks
        n_classes = count


def canonical_ranks(mol: Molecule) -> list[int]:
    """Canonical atom ranking by iterative neighbourhood refinement.

    Initial invariant is (element, degree, charge, hydrogens, aromatic,
    ring membership). Remaining ties after refinement are broken by
    promoting the lowest-index member of the lowest tied class.
    """
    invariants = [
        (ATOMIC_NUMBER[a.element], mol.degree(i), a.formal_charge, a.implicit_h,
         a.aromatic, i in mol.ring_atoms)
        for i, a in enumerate(mol.atoms)
    ]
    ranks = _refine(mol, _dense_rank(invariants))
    n = len(ranks)
    while len(set(ranks)) < n:
        counts = Counter(ranks)
        tied = min(r for r, c in counts.items() if c > 1)
        pick = min(i for i in range(n) if ranks[i] == tied)
        ranks = [2 * r + (0 if i == pick or r != tied else 1) for i, r in enumerate(ranks)]
        ranks = _refine(mol, _dense_rank(ranks))
    return ranks


def canonical_smiles(mol: Molecule) -> str:
    return write_smiles(mol, canonical_ranks(mol))


def to_smiles(mol: Molecule, seed: int | None = None) -> str:
    """Non-canonical SMILES; a seed gives a random but valid atom ordering."""
    if seed is None:
        return canonical_smiles(mol)
    ranks = list(range(len(mol.atoms)))
    random.Random(seed).shuffle(ranks)
    return write_smiles(mol, ranks)
