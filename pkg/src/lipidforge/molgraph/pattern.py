"""A small SMARTS subset for substructure patterns.

Atom primitives (inside ``[...]``): element symbols (``C``, ``Cl``; lower
case for aromatic), ``#n``, ``*``, ``a``, ``A``, ``H<n>``, ``D<n>``,
``X<n>``, ``R``/``R0``, charges ``+``, ``-``, ``+<n>``, ``-<n>``, ``+0``,
and recursive ``$(...)``. Logical operators ``!``, ``&``, ``,`` and ``;``
follow SMARTS precedence. A trailing ``:<n>`` sets the atom map number.

Bonds: ``-``, ``=``, ``#``, ``:``, ``~``; an unspecified bond matches
single or aromatic. Branches and ring closures work as in SMILES.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .molecule import ATOMIC_NUMBER, BondOrder, Molecule

_ELEMENTS_BY_Z = {z: e for e, z in ATOMIC_NUMBER.items()}
_AROMATIC = {"c": "C", "n": "N", "o": "O", "s": "S", "p": "P", "b": "B"}
_BARE = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")

ANY_BOND = frozenset(BondOrder)
DEFAULT_BOND = frozenset({BondOrder.SINGLE, BondOrder.AROMATIC})
_BOND_SYMBOLS = {
    "-": frozenset({BondOrder.SINGLE}),
    "=": frozenset({BondOrder.DOUBLE}),
    "#": frozenset({BondOrder.TRIPLE}),
    ":": frozenset({BondOrder.AROMATIC}),
    "~": ANY_BOND,
}


class PatternError(ValueError):
    pass


@dataclass
class Pattern:
    text: str
    atoms: list[tuple] = field(default_factory=list)
    maps: list[int | None] = field(default_factory=list)
    parent: list[int | None] = field(default_factory=list)
    parent_bond: list[frozenset | None] = field(default_factory=list)
    closures: list[list[tuple[int, frozenset]]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def map_index(self) -> dict[int, int]:
        return {m: k for k, m in enumerate(self.maps) if m is not None}

    def bonds(self) -> Iterator[tuple[int, int, frozenset]]:
        for k, p in enumerate(self.parent):
            if p is not None:
                yield p, k, self.parent_bond[k]
        for k, items in enumerate(self.closures):
            for other, bond in items:
                yield other, k, bond


def parse_pattern(text: str) -> Pattern:
    pat = Pattern(text)
    i = 0
    prev: int | None = None
    bond: frozenset | None = None
    branches: list[int | None] = []
    rings: dict[int, tuple[int, frozenset | None]] = {}
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            end = _matching(text, i, "[", "]")
            expr, amap = _parse_bracket(text[i + 1:end], text)
            i = end + 1
        elif text.startswith(("Cl", "Br"), i):
            expr, amap = ("elem", text[i:i + 2], False), None
            i += 2
        elif ch in "BCNOPSFI":
            expr, amap = ("elem", ch, False), None
            i += 1
        elif ch in _AROMATIC:
            expr, amap = ("elem", _AROMATIC[ch], True), None
            i += 1
        elif ch == "*":
            expr, amap = ("any",), None
            i += 1
        elif ch == "a":
            expr, amap = ("arom", True), None
            i += 1
        elif ch == "A":
            expr, amap = ("arom", False), None
            i += 1
        elif ch in _BOND_SYMBOLS:
            if bond is not None or prev is None:
                raise PatternError(f"unexpected bond {ch!r} at {i} in {text!r}")
            bond = _BOND_SYMBOLS[ch]
            i += 1
            continue
        elif ch == "(":
            branches.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not branches:
                raise PatternError(f"unmatched ')' in {text!r}")
            prev = branches.pop()
            i += 1
            continue
        elif ch.isdigit():
            num = int(ch)
            i += 1
            if prev is None:
                raise PatternError(f"ring closure before atom in {text!r}")
            if num in rings:
                other, b0 = rings.pop(num)
                pat.closures[prev].append((other, bond or b0 or DEFAULT_BOND))
            else:
                rings[num] = (prev, bond)
            bond = None
            continue
        else:
            raise PatternError(f"unexpected character {ch!r} at {i} in {text!r}")
        k = len(pat.atoms)
        pat.atoms.append(expr)
        pat.maps.append(amap)
        pat.parent.append(prev)
        pat.parent_bond.append((bond or DEFAULT_BOND) if prev is not None else None)
        pat.closures.append([])
        if prev is None and k > 0:
            raise PatternError(f"disconnected pattern {text!r}")
        prev = k
        bond = None
    if rings or branches or bond is not None:
        raise PatternError(f"incomplete pattern {text!r}")
    if not pat.atoms:
        raise PatternError("empty pattern")
    return pat


def _matching(text: str, start: int, open_ch: str, close_ch: str) -> int:
    depth = 0
    for j in range(start, len(text)):
        if text[j] == open_ch:
            depth += 1
        elif text[j] == close_ch:
            depth -= 1
            if depth == 0:
                return j
    raise PatternError(f"unbalanced {open_ch!r} in {text!r}")


def _parse_bracket(body: str, whole: str) -> tuple[tuple, int | None]:
    amap = None
    # a map number is a trailing ':<digits>' outside any recursive group
    depth = 0
    for j in range(len(body) - 1, -1, -1):
        c = body[j]
        if c == ")":
            depth += 1
        elif c == "(":
            depth -= 1
        elif c == ":" and depth == 0 and body[j + 1:].isdigit() and body[j + 1:]:
            amap = int(body[j + 1:])
            body = body[:j]
            break
        elif not c.isdigit():
            break
    parser = _ExprParser(body, whole)
    expr = parser.low()
    if parser.pos != len(body):
        raise PatternError(f"unparsed bracket content {body[parser.pos:]!r} in {whole!r}")
    return expr, amap


class _ExprParser:
    def __init__(self, body: str, whole: str):
        self.s = body
        self.pos = 0
        self.whole = whole

    def peek(self) -> str:
        return self.s[self.pos:self.pos + 1]

    def low(self) -> tuple:
        items = [self.mid()]
        while self.peek() == ";":
            self.pos += 1
            items.append(self.mid())
        return items[0] if len(items) == 1 else ("and", tuple(items))

    def mid(self) -> tuple:
        items = [self.high()]
        while self.peek() == ",":
            self.pos += 1
            items.append(self.high())
        return items[0] if len(items) == 1 else ("or", tuple(items))

    def high(self) -> tuple:
        items = [self.unary()]
        while self.peek() and self.peek() not in ";,":
            if self.peek() == "&":
                self.pos += 1
            items.append(self.unary())
        return items[0] if len(items) == 1 else ("and", tuple(items))

    def unary(self) -> tuple:
        if self.peek() == "!":
            self.pos += 1
            return ("not", self.unary())
        return self.primitive()

    def _number(self, default: int | None = None) -> int:
        start = self.pos
        while self.peek().isdigit():
            self.pos += 1
        if start == self.pos:
            if default is None:
                raise PatternError(f"expected number in {self.whole!r}")
            return default
        return int(self.s[start:self.pos])

    def primitive(self) -> tuple:
        s, p = self.s, self.pos
        c = s[p:p + 1]
        if not c:
            raise PatternError(f"truncated bracket atom in {self.whole!r}")
        if s.startswith("$(", p):
            end = _matching(s, p + 1, "(", ")")
            inner = parse_pattern(s[p + 2:end])
            self.pos = end + 1
            return ("recursive", inner)
        if s.startswith(("Cl", "Br"), p):
            self.pos += 2
            return ("elem", s[p:p + 2], False)
        self.pos += 1
        if c in "CNOSPFIB":
            return ("elem", c, False)
        if c in _AROMATIC:
            return ("elem", _AROMATIC[c], True)
        if c == "#":
            z = self._number()
            if z not in _ELEMENTS_BY_Z:
                return ("never",)
            return ("elem", _ELEMENTS_BY_Z[z], None)
        if c == "*":
            return ("any",)
        if c == "a":
            return ("arom", True)
        if c == "A":
            return ("arom", False)
        if c == "H":
            return ("H", self._number(1))
        if c == "D":
            return ("D", self._number(1))
        if c == "X":
            return ("X", self._number(1))
        if c == "R":
            if self.peek().isdigit():
                return ("ring", self._number() > 0)
            return ("ring", True)
        if c in "+-":
            sign = 1 if c == "+" else -1
            if self.peek().isdigit():
                return ("charge", sign * self._number())
            q = sign
            while self.peek() == c:
                self.pos += 1
                q += sign
            return ("charge", q)
        raise PatternError(f"unknown primitive {c!r} in {self.whole!r}")


def atom_matches(expr: tuple, mol: Molecule, i: int) -> bool:
    kind = expr[0]
    atom = mol.atoms[i]
    if kind == "elem":
        return atom.element == expr[1] and (expr[2] is None or atom.aromatic == expr[2])
    if kind == "and":
        return all(atom_matches(e, mol, i) for e in expr[1])
    if kind == "or":
        return any(atom_matches(e, mol, i) for e in expr[1])
    if kind == "not":
        return not atom_matches(expr[1], mol, i)
    if kind == "H":
        return atom.implicit_h == expr[1]
    if kind == "charge":
        return atom.formal_charge == expr[1]
    if kind == "arom":
        return atom.aromatic == expr[1]
    if kind == "D":
        return mol.degree(i) == expr[1]
    if kind == "X":
        return mol.degree(i) + atom.implicit_h == expr[1]
    if kind == "ring":
        return (i in mol.ring_atoms) == expr[1]
    if kind == "any":
        return True
    if kind == "recursive":
        key = ("recursive", expr[1].text, i)
        memo = mol.memo
        if key not in memo:
            memo[key] = next(_embed(expr[1], mol, i), None) is not None
        return memo[key]
    if kind == "never":
        return False
    raise PatternError(f"bad expression {expr!r}")


def _embed(pat: Pattern, mol: Molecule, anchor: int | None = None) -> Iterator[tuple[int, ...]]:
    n = len(pat.atoms)
    mapping: list[int] = [-1] * n
    used: set[int] = set()

    def candidates(k: int):
        if k == 0:
            return [anchor] if anchor is not None else range(len(mol.atoms))
        base = mapping[pat.parent[k]]
        allowed = pat.parent_bond[k]
        return [j for j, order in mol.adjacency[base] if order in allowed]

    def rec(k: int) -> Iterator[tuple[int, ...]]:
        if k == n:
            yield tuple(mapping)
            return
        for c in candidates(k):
            if c in used or not atom_matches(pat.atoms[k], mol, c):
                continue
            ok = True
            for other, allowed in pat.closures[k]:
                order = mol.bond_order(c, mapping[other])
                if order is None or order not in allowed:
                    ok = False
                    break
            if not ok:
                continue
            mapping[k] = c
            used.add(c)
            yield from rec(k + 1)
            used.discard(c)
            mapping[k] = -1

    return rec(0)


def find_matches(pat: Pattern, mol: Molecule, anchor: int | None = None) -> list[tuple[int, ...]]:
    """All embeddings of ``pat`` in ``mol`` (pattern atom k -> molecule atom)."""
    if anchor is not None:
        return list(_embed(pat, mol, anchor))
    key = ("matches", pat.text)
    memo = mol.memo
    if key not in memo:
        memo[key] = list(_embed(pat, mol))
    return memo[key]


def has_match(pat: Pattern, mol: Molecule) -> bool:
    return bool(find_matches(pat, mol))
