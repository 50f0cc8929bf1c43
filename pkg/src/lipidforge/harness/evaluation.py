"""Unique-ionizable-lipid metrics, comparison tables and rate charts."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ..molgraph.smiles import parse_smiles
from ..predictors.scoring import PropertyScore, PropertyScorer, RuleBasedScorer
from ..search.records import GenerationRecord


@dataclass(frozen=True)
class EvalReport:
    label: str
    n_products: int
    n_unique: int
    n_unique_ionizable: int
    series: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.n_unique_ionizable <= self.n_unique <= self.n_products:
            raise ValueError("expected n_unique_ionizable <= n_unique <= n_products")

    @property
    def unique_ionizable_rate(self) -> float:
        return self.n_unique_ionizable / self.n_unique if self.n_unique else 0.0

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n_products": self.n_products,
            "n_unique": self.n_unique,
            "n_unique_ionizable": self.n_unique_ionizable,
            "unique_ionizable_rate": self.unique_ionizable_rate,
            "series": [[it, rate] for it, rate in self.series],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        report = cls(d["label"], int(d["n_products"]), int(d["n_unique"]), int(d["n_unique_ionizable"]),
                     tuple((int(it), float(r)) for it, r in d.get("series", ())))
        if abs(report.unique_ionizable_rate - float(d["unique_ionizable_rate"])) > 1e-12:
            raise ValueError(f"report {report.label!r}: stored rate disagrees with its counts")
        return report


class EmptyLogError(ValueError):
    pass


def _unique_terminal(records: Iterable[GenerationRecord], scorer: PropertyScorer | None,
                     canonicalize: bool) -> tuple[int, dict[str, PropertyScore]]:
    n, unique = 0, {}
    for rec in records:
        if not rec.terminal:
            continue
        n += 1
        if canonicalize or scorer is not None:
            mol = parse_smiles(rec.product_smiles)
            key = mol.canonical_smiles
            if key not in unique:
                unique[key] = scorer.score(mol) if scorer is not None else rec.score
        else:
            unique.setdefault(rec.product_smiles, rec.score)
    return n, unique


def evaluate(records: Sequence[GenerationRecord], label: str = "", scorer: PropertyScorer | None = None,
             lipid_threshold: float = 0.5, canonicalize: bool = True) -> EvalReport:
    """Count terminal products, dedupe them by canonical SMILES and rate the unique ones.

    With a ``scorer`` the property scores are recomputed rather than trusted
    from the log. The per-iteration series groups records by ``iteration``.
    """
    if not records:
        raise EmptyLogError(f"no generation records for {label or 'evaluation'}")
    n, unique = _unique_terminal(records, scorer, canonicalize)
    hits = sum(s.is_ionizable_lipid(lipid_threshold) for s in unique.values())
    by_iter: dict[int, list[GenerationRecord]] = defaultdict(list)
    for rec in records:
        by_iter[rec.iteration].append(rec)
    series = []
    if len(by_iter) > 1:
        for it in sorted(by_iter):
            _, u = _unique_terminal(by_iter[it], scorer, canonicalize)
            rate = sum(s.is_ionizable_lipid(lipid_threshold) for s in u.values()) / len(u) if u else 0.0
            series.append((it, rate))
    return EvalReport(label, n, len(unique), hits, tuple(series))


def comparison_table(reports: Sequence[EvalReport]) -> str:
    header = ("run", "products", "unique", "unique ionizable", "rate")
    rows = [(r.label, str(r.n_products), str(r.n_unique), str(r.n_unique_ionizable),
             f"{r.unique_ionizable_rate:.4f}") for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" if i == 0 else f"{{:>{w}}}" for i, w in enumerate(widths))
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in rows]
    return "\n".join(lines) + "\n"


def write_report(reports: Sequence[EvalReport], out_dir: str | Path, stem: str = "eval") -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = out / f"{stem}.txt"
    table.write_text(comparison_table(reports), encoding="utf-8")
    lines = out / f"{stem}.jsonl"
    lines.write_text("".join(r.to_json() + "\n" for r in reports), encoding="utf-8")
    return table, lines


def read_reports(path: str | Path) -> list[EvalReport]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(EvalReport.from_dict(json.loads(line)))
    return out


Series = tuple[str, Sequence[tuple[int, float]]]


def series_csv(series: Sequence[Series]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "iteration", "unique_ionizable_rate"])
    for label, points in series:
        for it, rate in points:
            writer.writerow([label, it, f"{rate:.6f}"])
    return buf.getvalue()


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def series_svg(series: Sequence[Series], width: int = 480, height: int = 300) -> str:
    """A plain line chart of rate (0..1) against iteration."""
    left, right, top, bottom = 50, 20, 20, 40
    iters = [it for _, pts in series for it, _ in pts] or [1]
    lo, hi = min(iters), max(iters)
    span = hi - lo or 1
    pw, ph = width - left - right, height - top - bottom

    def xy(it: int, rate: float) -> tuple[float, float]:
        x = left + (it - lo) / span * pw if hi != lo else left + pw / 2
        return round(x, 2), round(top + (1.0 - rate) * ph, 2)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#999"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        _, y = xy(lo, tick)
        parts.append(f'<text x="{left - 6}" y="{y + 4}" font-size="10" text-anchor="end">{tick:.2f}</text>')
    for it in sorted(set(iters)):
        x, _ = xy(it, 0.0)
        parts.append(f'<text x="{x}" y="{top + ph + 14}" font-size="10" text-anchor="middle">{it}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 6}" font-size="11" text-anchor="middle">iteration</text>')
    for k, (label, points) in enumerate(series):
        colour = _COLOURS[k % len(_COLOURS)]
        coords = [xy(it, rate) for it, rate in sorted(points)]
        if len(coords) > 1:
            pts = " ".join(f"{x},{y}" for x, y in coords)
            parts.append(f'<polyline class="series" fill="none" stroke="{colour}" stroke-width="2" points="{pts}"/>')
        for x, y in coords:
            parts.append(f'<circle cx="{x}" cy="{y}" r="3" fill="{colour}"/>')
        parts.append(f'<text x="{left + 8}" y="{top + 14 + 13 * k}" font-size="11" fill="{colour}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_series(series: Sequence[Series], out_dir: str | Path, stem: str = "series") -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = out / f"{stem}.csv", out / f"{stem}.svg"
    csv_path.write_text(series_csv(series), encoding="utf-8")
    svg_path.write_text(series_svg(series), encoding="utf-8")
    return csv_path, svg_path
