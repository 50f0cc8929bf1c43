"""Circular (Morgan / ECFP-style) fingerprints and Tanimoto similarity."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .molecule import ATOMIC_NUMBER, Molecule

DEFAULT_RADIUS = 2
DEFAULT_NBITS = 1024


@dataclass(frozen=True)
class Fingerprint:
    """Fixed-length bit vector stored as a Python int (bit k set = feature k)."""

    bits: int
    nbits: int = DEFAULT_NBITS
    radius: int = DEFAULT_RADIUS

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> self.nbits:
            raise ValueError("bits out of range for nbits")

    @property
    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def on_bits(self) -> list[int]:
        out, b, k = [], self.bits, 0
        while b:
            if b & 1:
                out.append(k)
            b >>= 1
            k += 1
        return out

    def to_array(self, dtype=np.float32) -> np.ndarray:
        arr = np.zeros(self.nbits, dtype=dtype)
        arr[self.on_bits()] = 1
        return arr

    @classmethod
    def from_on_bits(cls, on: list[int], nbits: int = DEFAULT_NBITS, radius: int = DEFAULT_RADIUS) -> "Fingerprint":
        bits = 0
        for k in on:
            bits |= 1 << k
        return cls(bits, nbits, radius)


def _hash(*values: int) -> int:
    payload = struct.pack(f"<{len(values)}q", *values)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=4).digest(), "little")


def atom_identifiers(mol: Molecule, radius: int = DEFAULT_RADIUS) -> list[set[int]]:
    """Environment identifiers per iteration (index 0 = initial invariants).

    Environments that cover exactly the same bond set as an earlier one are
    dropped, as in ECFP.
    """
    n = len(mol.atoms)
    ids = [
        _hash(
            ATOMIC_NUMBER[a.element], mol.degree(i), a.implicit_h,
            a.formal_charge, int(mol.in_ring(i)), int(a.aromatic),
        )
        for i, a in enumerate(mol.atoms)
    ]
    covered: list[frozenset] = [frozenset() for _ in range(n)]
    seen_envs: set[frozenset] = set()
    rounds = [set(ids)]
    for r in range(1, radius + 1):
        new_ids, new_cov = [], []
        this_round: dict[frozenset, int] = {}
        for i in range(n):
            nbrs = sorted((int(order), ids[j]) for j, order in mol.adjacency[i])
            flat = [r, ids[i]]
            for order, nid in nbrs:
                flat.extend((order, nid))
            ident = _hash(*flat)
            cov = set(covered[i])
            for j, _ in mol.adjacency[i]:
                cov |= covered[j]
                cov.add((min(i, j), max(i, j)))
            cov = frozenset(cov)
            new_ids.append(ident)
            new_cov.append(cov)
            if cov and cov not in seen_envs:
                prev = this_round.get(cov)
                this_round[cov] = ident if prev is None else min(prev, ident)
        seen_envs.update(this_round)
        rounds.append(set(this_round.values()))
        ids, covered = new_ids, new_cov
    return rounds


def morgan_fingerprint(mol: Molecule, radius: int = DEFAULT_RADIUS, nbits: int = DEFAULT_NBITS) -> Fingerprint:
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if nbits < 64 or nbits & (nbits - 1):
        raise ValueError("nbits must be a power of two >= 64")
    key = ("morgan", radius, nbits)
    if key in mol.memo:
        return mol.memo[key]
    bits = 0
    for identifiers in atom_identifiers(mol, radius):
        for ident in identifiers:
            bits |= 1 << (ident % nbits)
    fp = Fingerprint(bits, nbits, radius)
    mol.memo[key] = fp
    return fp


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.nbits != b.nbits:
        raise ValueError(f"fingerprint length mismatch: {a.nbits} vs {b.nbits}")
    union = bin(a.bits | b.bits).count("1")
    if union == 0:
        raise ValueError("tanimoto undefined for two empty fingerprints")
    return bin(a.bits & b.bits).count("1") / union
