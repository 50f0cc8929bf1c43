"""Reading molecules from plain SMILES files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .molecule import Molecule
from .smiles import SmilesError, parse_smiles


@dataclass(frozen=True)
class SmilesRecord:
    line: int
    smiles: str
    ident: str | None
    molecule: Molecule | None
    error: str | None = None


def iter_smiles_file(path: str | Path, strict: bool = False) -> Iterator[SmilesRecord]:
    """Yield one record per non-comment line: ``SMILES[<TAB>ID]``.

    Without a tab the first whitespace splits SMILES from ID, which covers
    the space-separated ZINC layout.

    Unparseable lines are yielded with ``molecule=None`` and the error text,
    unless ``strict`` is set, in which case the error is raised with the
    line number prepended.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t") if "\t" in line else line.split(None, 1)
            smiles = fields[0].strip()
            ident = fields[1].strip() if len(fields) > 1 and fields[1].strip() else None
            try:
                mol = parse_smiles(smiles)
            except SmilesError as exc:
                if strict:
                    raise SmilesError(f"{path}:{lineno}: {exc}") from exc
                yield SmilesRecord(lineno, smiles, ident, None, str(exc))
                continue
            except ValueError as exc:
                if strict:
                    raise
                yield SmilesRecord(lineno, smiles, ident, None, str(exc))
                continue
            yield SmilesRecord(lineno, smiles, ident, mol)


def read_smiles_file(path: str | Path, strict: bool = False) -> list[SmilesRecord]:
    return list(iter_smiles_file(path, strict=strict))
