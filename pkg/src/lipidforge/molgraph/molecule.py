"""Core molecular graph types.

A :class:`Molecule` is an immutable, hydrogen-suppressed graph. Hydrogens
are carried as per-atom counts; bonds reference atoms by index. Derived
structure (adjacency, ring membership, smallest rings) is computed lazily
and cached on the instance, which is safe to share between threads because
every cached value is a pure function of the frozen fields.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Sequence


class MoleculeError(ValueError):
    """Base class for invalid molecule construction."""


class ValenceError(MoleculeError):
    pass


class UnsupportedElementError(MoleculeError):
    pass


ORGANIC_SUBSET = ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I")
SUPPORTED_ELEMENTS = frozenset(ORGANIC_SUBSET)
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S"})
HYDROPHILIC_ELEMENTS = frozenset({"N", "O", "P", "S"})

ATOMIC_NUMBER = {"B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "P": 15, "S": 16,
                 "Cl": 17, "Br": 35, "I": 53}

# IUPAC 2021 standard atomic weights (abridged/conventional values).
ATOMIC_WEIGHT = {"H": 1.008, "B": 10.81, "C": 12.011, "N": 14.007, "O": 15.999,
                 "F": 18.998, "P": 30.974, "S": 32.06, "Cl": 35.45,
                 "Br": 79.904, "I": 126.904}

_NEUTRAL_VALENCES = {
    "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}

_CHARGED_VALENCES = {
    ("B", -1): (4,), ("C", -1): (3,), ("C", 1): (3,),
    ("N", 1): (4,), ("N", -1): (2,), ("O", 1): (3,), ("O", -1): (1,),
    ("P", 1): (4,), ("P", -1): (2, 4), ("S", 1): (3, 5), ("S", -1): (1, 3, 5),
    ("F", -1): (0,), ("Cl", -1): (0,), ("Br", -1): (0,), ("I", -1): (0,),
    ("O", -2): (0,), ("S", -2): (0,), ("N", 2): (5,),
}


def allowed_valences(element: str, charge: int) -> tuple[int, ...]:
    if charge == 0:
        return _NEUTRAL_VALENCES[element]
    try:
        return _CHARGED_VALENCES[(element, charge)]
    except KeyError:
        return (max(0, _NEUTRAL_VALENCES[element][0] - abs(charge)),)


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> int:
        """Contribution to atom valence; aromatic bonds count as one."""
        return 1 if self is BondOrder.AROMATIC else int(self)


@dataclass(frozen=True, slots=True)
class Atom:
    element: str
    formal_charge: int = 0
    implicit_h: int = 0
    aromatic: bool = False


@dataclass(frozen=True, slots=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a


def default_hydrogens(element: str, charge: int, aromatic: bool, bond_valence: int) -> int | None:
    """Implicit hydrogen count implied by standard valence.

    Returns ``None`` when the bonds already exceed every allowed valence of
    an aliphatic atom. Aromatic atoms of type C/N/B/P donate one valence to
    the pi system; aromatic O and S donate a lone pair instead.
    """
    used = bond_valence
    if aromatic and element in ("B", "C", "N", "P"):
        used += 1
    for v in allowed_valences(element, charge):
        if v >= used:
            return v - used
    return 0 if aromatic else None


@dataclass(frozen=True)
class Molecule:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.atoms)
        seen = set()
        for atom in self.atoms:
            if atom.element not in SUPPORTED_ELEMENTS:
                raise UnsupportedElementError(f"unsupported element {atom.element!r}")
            if atom.implicit_h < 0:
                raise MoleculeError(f"negative hydrogen count on {atom.element}")
            if abs(atom.formal_charge) > 2:
                raise MoleculeError(f"formal charge {atom.formal_charge} out of range")
        for bond in self.bonds:
            if not (0 <= bond.a < n and 0 <= bond.b < n):
                raise MoleculeError(f"bond ({bond.a}, {bond.b}) references a missing atom")
            if bond.a == bond.b:
                raise MoleculeError(f"self-bond on atom {bond.a}")
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if key in seen:
                raise MoleculeError(f"duplicate bond between atoms {key}")
            seen.add(key)
            if bond.order is BondOrder.AROMATIC and not (
                self.atoms[bond.a].aromatic and self.atoms[bond.b].aromatic
            ):
                raise MoleculeError(f"aromatic bond {key} joins a non-aromatic atom")

    # -- basic structure -------------------------------------------------

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def heavy_atom_count(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, BondOrder], ...], ...]:
        adj: list[list[tuple[int, BondOrder]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def _bond_index(self) -> dict[tuple[int, int], BondOrder]:
        out = {}
        for bond in self.bonds:
            out[(bond.a, bond.b)] = bond.order
            out[(bond.b, bond.a)] = bond.order
        return out

    def bond_order(self, i: int, j: int) -> BondOrder | None:
        return self._bond_index.get((i, j))

    def neighbors(self, i: int) -> list[int]:
        return [j for j, _ in self.adjacency[i]]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def bond_valence(self, i: int) -> int:
        return sum(order.valence for _, order in self.adjacency[i])

    def total_h(self, i: int) -> int:
        return self.atoms[i].implicit_h

    @cached_property
    def is_connected(self) -> bool:
        if not self.atoms:
            return True
        return len(self.component_of(0)) == len(self.atoms)

    def component_of(self, start: int, allowed: set[int] | None = None) -> set[int]:
        seen = {start}
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j, _ in self.adjacency[i]:
                if j not in seen and (allowed is None or j in allowed):
                    seen.add(j)
                    queue.append(j)
        return seen

    def components(self, atoms: Iterable[int] | None = None) -> list[list[int]]:
        """Connected components of the induced subgraph, each sorted."""
        pool = set(range(len(self.atoms)) if atoms is None else atoms)
        out = []
        while pool:
            start = min(pool)
            comp = self.component_of(start, pool)
            pool -= comp
            out.append(sorted(comp))
        return out

    def distances_from(self, sources: Iterable[int]) -> list[int]:
        """BFS graph distance to the nearest source; -1 if unreachable."""
        dist = [-1] * len(self.atoms)
        queue = deque()
        for s in sources:
            if dist[s] < 0:
                dist[s] = 0
                queue.append(s)
        while queue:
            i = queue.popleft()
            for j, _ in self.adjacency[i]:
                if dist[j] < 0:
                    dist[j] = dist[i] + 1
                    queue.append(j)
        return dist

    @cached_property
    def distance_matrix(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.distances_from([i])) for i in range(len(self.atoms)))

    # -- rings -----------------------------------------------------------

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        """Bonds that lie on at least one cycle (non-bridges), as sorted pairs."""
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridges = set()
        timer = 0
        for root in range(n):
            if disc[root] >= 0:
                continue
            disc[root] = low[root] = timer
            timer += 1
            stack = [(root, -1, iter(self.adjacency[root]))]
            while stack:
                v, parent, it = stack[-1]
                advanced = False
                for w, _ in it:
                    if w == parent:
                        continue
                    if disc[w] < 0:
                        disc[w] = low[w] = timer
                        timer += 1
                        stack.append((w, v, iter(self.adjacency[w])))
                        advanced = True
                        break
                    low[v] = min(low[v], disc[w])
                if advanced:
                    continue
                stack.pop()
                if parent >= 0:
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        bridges.add((min(v, parent), max(v, parent)))
        return frozenset(
            (min(b.a, b.b), max(b.a, b.b)) for b in self.bonds
        ) - bridges

    def is_ring_bond(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.ring_bonds

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(i for pair in self.ring_bonds for i in pair)

    def in_ring(self, i: int) -> bool:
        return i in self.ring_atoms

    @cached_property
    def rings(self) -> tuple[tuple[int, ...], ...]:
        """Smallest set of smallest rings, each as an ordered atom cycle."""
        if not self.ring_bonds:
            return ()
        candidates = {}
        ring_adj: dict[int, list[int]] = {}
        for a, b in self.ring_bonds:
            ring_adj.setdefault(a, []).append(b)
            ring_adj.setdefault(b, []).append(a)
        for a, b in sorted(self.ring_bonds):
            path = _shortest_path_avoiding(ring_adj, a, b)
            if path is not None:
                key = frozenset(path)
                if key not in candidates or len(path) < len(candidates[key]):
                    candidates[key] = path
        edge_ids = {e: k for k, e in enumerate(sorted(self.ring_bonds))}
        n_rings = len(self.ring_bonds) - len(self.ring_atoms) + len(
            self.components(self.ring_atoms)
        )
        basis: list[int] = []
        chosen = []
        for path in sorted(candidates.values(), key=lambda p: (len(p), sorted(p))):
            vec = 0
            for k in range(len(path)):
                u, v = path[k], path[(k + 1) % len(path)]
                vec ^= 1 << edge_ids[(min(u, v), max(u, v))]
            for b in basis:
                vec = min(vec, vec ^ b)
            if vec:
                basis.append(vec)
                basis.sort(reverse=True)
                chosen.append(tuple(path))
                if len(chosen) == n_rings:
                    break
        return tuple(chosen)

    @cached_property
    def ring_systems(self) -> tuple[frozenset[int], ...]:
        """Fused/spiro ring systems: components of the ring-bond graph."""
        adj: dict[int, set[int]] = {}
        for a, b in self.ring_bonds:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        systems = []
        pool = set(adj)
        while pool:
            start = min(pool)
            seen = {start}
            queue = deque([start])
            while queue:
                i = queue.popleft()
                for j in adj[i]:
                    if j not in seen:
                        seen.add(j)
                        queue.append(j)
            pool -= seen
            systems.append(frozenset(seen))
        return tuple(systems)

    @cached_property
    def memo(self) -> dict:
        """Per-instance scratch cache for pure derived values."""
        return {}

    # -- derived forms ---------------------------------------------------

    @cached_property
    def canonical_smiles(self) -> str:
        from .smiles import canonical_smiles

        return canonical_smiles(self)

    def __str__(self) -> str:
        return self.canonical_smiles

    def permuted(self, order: Sequence[int]) -> "Molecule":
        """Renumber atoms so that new atom ``k`` is old atom ``order[k]``."""
        inverse = {old: new for new, old in enumerate(order)}
        atoms = tuple(self.atoms[old] for old in order)
        bonds = tuple(
            Bond(inverse[b.a], inverse[b.b], b.order) for b in self.bonds
        )
        return Molecule(atoms, bonds)

    def subgraph(self, keep: Iterable[int], cap_hydrogens: bool = True) -> "Molecule":
        """Induced subgraph; severed bonds are capped with hydrogens.

        Aromatic atoms that lose their ring are demoted to aliphatic.
        """
        keep = sorted(set(keep))
        index = {old: new for new, old in enumerate(keep)}
        bonds = [
            Bond(index[b.a], index[b.b], b.order)
            for b in self.bonds
            if b.a in index and b.b in index
        ]
        atoms = []
        for old in keep:
            atom = self.atoms[old]
            extra = 0
            if cap_hydrogens:
                extra = sum(order.valence for j, order in self.adjacency[old] if j not in index)
            atoms.append(Atom(atom.element, atom.formal_charge, atom.implicit_h + extra, atom.aromatic))
        return _demote_broken_aromatics(atoms, bonds)

    def check_valence(self, atoms: Iterable[int] | None = None) -> None:
        for i in range(len(self.atoms)) if atoms is None else atoms:
            atom = self.atoms[i]
            used = self.bond_valence(i) + atom.implicit_h
            limit = max(allowed_valences(atom.element, atom.formal_charge))
            if used > limit:
                raise ValenceError(
                    f"atom {i} ({atom.element}, charge {atom.formal_charge}) has valence "
                    f"{used} > {limit}"
                )


def _shortest_path_avoiding(adj: dict[int, list[int]], a: int, b: int) -> list[int] | None:
    """Shortest path a..b in ``adj`` that does not use the direct edge a-b."""
    prev = {a: None}
    queue = deque([a])
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if i == a and j == b:
                continue
            if j in prev:
                continue
            prev[j] = i
            if j == b:
                path = [b]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(j)
    return None


def _demote_broken_aromatics(atoms: list[Atom], bonds: list[Bond]) -> Molecule:
    provisional = Molecule(
        tuple(Atom(a.element, a.formal_charge, a.implicit_h, False) for a in atoms),
        tuple(Bond(b.a, b.b, BondOrder.SINGLE if b.order is BondOrder.AROMATIC else b.order)
              for b in bonds),
    )
    ring_bonds = provisional.ring_bonds
    new_bonds = []
    for b in bonds:
        if b.order is BondOrder.AROMATIC and (min(b.a, b.b), max(b.a, b.b)) not in ring_bonds:
            new_bonds.append(Bond(b.a, b.b, BondOrder.SINGLE))
        else:
            new_bonds.append(b)
    aromatic_atoms = {i for b in new_bonds if b.order is BondOrder.AROMATIC for i in (b.a, b.b)}
    new_atoms = tuple(
        Atom(a.element, a.formal_charge, a.implicit_h, a.aromatic and i in aromatic_atoms)
        for i, a in enumerate(atoms)
    )
    return Molecule(new_atoms, tuple(new_bonds))
