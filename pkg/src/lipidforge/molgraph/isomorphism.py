"""Graph isomorphism and the "at most one edit apart" test."""

from __future__ import annotations

from collections import Counter

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from .molecule import BondOrder, Molecule

MAX_GED_ATOMS = 64


class SizeLimitError(ValueError):
    pass


def _label(mol: Molecule, i: int) -> tuple:
    a = mol.atoms[i]
    return (a.element, a.formal_charge)


def to_graph(mol: Molecule, skip_atom: int | None = None, skip_bond: tuple[int, int] | None = None) -> nx.Graph:
    g = nx.Graph()
    for i in range(len(mol.atoms)):
        if i != skip_atom:
            g.add_node(i, label=_label(mol, i))
    for b in mol.bonds:
        if skip_atom in (b.a, b.b) or skip_bond == (min(b.a, b.b), max(b.a, b.b)):
            continue
        g.add_edge(b.a, b.b, order=int(b.order))
    return g


def _node_match(x, y) -> bool:
    return x["label"] == y["label"]


def _edge_match(x, y) -> bool:
    return x["order"] == y["order"]


def _graphs_isomorphic(g: nx.Graph, h: nx.Graph) -> bool:
    if g.number_of_nodes() != h.number_of_nodes() or g.number_of_edges() != h.number_of_edges():
        return False
    if Counter(d["label"] for _, d in g.nodes(data=True)) != Counter(d["label"] for _, d in h.nodes(data=True)):
        return False
    if sorted(d for _, d in g.degree()) != sorted(d for _, d in h.degree()):
        return False
    return GraphMatcher(g, h, node_match=_node_match, edge_match=_edge_match).is_isomorphic()


def is_isomorphic(a: Molecule, b: Molecule) -> bool:
    """Heavy-atom graph isomorphism respecting element, charge and bond order.

    Hydrogen counts follow from these for valence-normal atoms, so they are
    compared separately only as a multiset.
    """
    if Counter((_label(a, i), a.atoms[i].implicit_h) for i in range(len(a.atoms))) != Counter(
        (_label(b, i), b.atoms[i].implicit_h) for i in range(len(b.atoms))
    ):
        return False
    return _graphs_isomorphic(to_graph(a), to_graph(b))


def _relabel_graph(g: nx.Graph, node: int, label: tuple) -> nx.Graph:
    h = g.copy()
    h.nodes[node]["label"] = label
    return h


def ged_le_one(a: Molecule, b: Molecule) -> bool:
    """True when ``a`` and ``b`` are isomorphic or differ by exactly one edit.

    Edits: add/remove a terminal atom with its bond, add/remove a bond,
    change an element, change a bond order.
    """
    for m in (a, b):
        if len(m.atoms) > MAX_GED_ATOMS:
            raise SizeLimitError(f"ged_le_one supports at most {MAX_GED_ATOMS} heavy atoms, got {len(m.atoms)}")
    na, nb = len(a.atoms), len(b.atoms)
    ea, eb = len(a.bonds), len(b.bonds)
    if abs(na - nb) > 1 or abs(ea - eb) > 1:
        return False
    ga, gb = to_graph(a), to_graph(b)
    if na == nb and ea == eb and _graphs_isomorphic(ga, gb):
        return True
    if na != nb:
        big, small = (a, gb) if na > nb else (b, ga)
        for i in range(len(big.atoms)):
            if big.degree(i) > 1:
                continue
            if _graphs_isomorphic(to_graph(big, skip_atom=i), small):
                return True
        return False
    if ea != eb:
        big, small = (a, gb) if ea > eb else (b, ga)
        for bond in big.bonds:
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            if _graphs_isomorphic(to_graph(big, skip_bond=key), small):
                return True
        return False
    # same size: one relabel or one order change
    la = Counter(d["label"] for _, d in ga.nodes(data=True))
    lb = Counter(d["label"] for _, d in gb.nodes(data=True))
    if la != lb:
        missing = list((lb - la).elements())
        if len(missing) != 1:
            return False
        target = missing[0]
        surplus = (la - lb)
        return any(
            _graphs_isomorphic(_relabel_graph(ga, i, target), gb)
            for i, d in ga.nodes(data=True) if surplus[d["label"]]
        )
    for u, v in ga.edges():
        for order in BondOrder:
            if order == ga.edges[u, v]["order"]:
                continue
            h = ga.copy()
            h.edges[u, v]["order"] = int(order)
            if _graphs_isomorphic(h, gb):
                return True
    return False
