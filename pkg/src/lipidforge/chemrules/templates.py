"""Reaction template definitions and the plain-text template format."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterator

from ..molgraph.molecule import BondOrder
from ..molgraph.pattern import Pattern, PatternError, parse_pattern

log = logging.getLogger(__name__)

DEFAULT_TEMPLATE_FILE = "default_templates.txt"


class TemplateSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = ""):
        where = f"{source}:{line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


class TemplateValidationError(ValueError):
    def __init__(self, template_id: str, message: str):
        super().__init__(f"template {template_id!r}: {message}")
        self.template_id = template_id


@dataclass(frozen=True)
class BondEdit:
    kind: str  # "add", "remove" or "order"
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE


@dataclass(frozen=True)
class ReactionTemplate:
    id: str
    name: str
    patterns: tuple[Pattern, ...]
    edits: tuple[BondEdit, ...] = ()
    leaving: tuple[int, ...] = ()
    tail_consuming: bool = True

    @property
    def arity(self) -> int:
        return len(self.patterns)

    def slot_of(self, map_number: int) -> int:
        for k, pat in enumerate(self.patterns):
            if map_number in pat.maps:
                return k
        raise KeyError(map_number)

    def validate(self) -> None:
        seen: dict[int, int] = {}
        for k, pat in enumerate(self.patterns):
            for m in pat.maps:
                if m is None:
                    continue
                if m in seen:
                    raise TemplateValidationError(self.id, f"map number {m} used twice")
                seen[m] = k
        referenced = set(self.leaving)
        for e in self.edits:
            referenced.update((e.a, e.b))
            if e.a == e.b:
                raise TemplateValidationError(self.id, f"edit {e.kind} joins map {e.a} to itself")
        missing = referenced - set(seen)
        if missing:
            raise TemplateValidationError(self.id, f"edits reference unmapped atoms {sorted(missing)}")
        for e in self.edits:
            if e.kind == "add" and self.arity == 2 and seen[e.a] == seen[e.b]:
                raise TemplateValidationError(self.id, "bond + must join the two reactants")
        if self.arity == 2 and not any(e.kind == "add" for e in self.edits):
            raise TemplateValidationError(self.id, "bimolecular template forms no bond")


@dataclass(frozen=True)
class TemplateRegistry:
    templates: tuple[ReactionTemplate, ...] = ()
    source: str = ""
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        for k, t in enumerate(self.templates):
            if t.id in self._index:
                raise TemplateValidationError(t.id, "duplicate template id")
            self._index[t.id] = k

    def __len__(self) -> int:
        return len(self.templates)

    def __iter__(self) -> Iterator[ReactionTemplate]:
        return iter(self.templates)

    def __getitem__(self, template_id: str) -> ReactionTemplate:
        return self.templates[self._index[template_id]]

    def order_of(self, template_id: str) -> int:
        return self._index[template_id]

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.templates]


def _ints(tokens: list[str], lineno: int, source: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise TemplateSyntaxError(f"expected integers, got {' '.join(tokens)!r}", lineno, source) from None


def parse_templates(text: str, source: str = "<string>") -> TemplateRegistry:
    templates: list[ReactionTemplate] = []
    ids: set[str] = set()
    current: dict | None = None
    start_line = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "template":
            if current is not None:
                raise TemplateSyntaxError("'template' inside an open block (missing 'end')", lineno, source)
            if not rest or len(rest.split()) != 1:
                raise TemplateSyntaxError("template needs a single id", lineno, source)
            if rest in ids:
                raise TemplateSyntaxError(f"duplicate template id {rest!r}", lineno, source)
            ids.add(rest)
            current = {"id": rest, "name": rest, "arity": None, "patterns": {}, "edits": [],
                       "leave": [], "tail": True}
            start_line = lineno
            continue
        if current is None:
            raise TemplateSyntaxError(f"{key!r} outside a template block", lineno, source)
        if key == "end":
            templates.append(_build(current, start_line, source))
            current = None
        elif key == "name":
            current["name"] = rest
        elif key == "arity":
            (n,) = _ints([rest], lineno, source)
            if n not in (1, 2):
                raise TemplateSyntaxError("arity must be 1 or 2", lineno, source)
            current["arity"] = n
        elif key in ("pattern1", "pattern2"):
            try:
                current["patterns"][int(key[-1])] = parse_pattern(rest)
            except PatternError as exc:
                raise TemplateSyntaxError(str(exc), lineno, source) from None
        elif key == "bond":
            tokens = rest.split()
            if len(tokens) < 3 or tokens[0] not in ("+", "-", "−"):
                raise TemplateSyntaxError("expected 'bond +|- i j [order]'", lineno, source)
            nums = _ints(tokens[1:], lineno, source)
            if tokens[0] == "+":
                order = nums[2] if len(nums) > 2 else 1
                if order not in (1, 2, 3):
                    raise TemplateSyntaxError("bond order must be 1, 2 or 3", lineno, source)
                current["edits"].append(BondEdit("add", nums[0], nums[1], BondOrder(order)))
            else:
                current["edits"].append(BondEdit("remove", nums[0], nums[1]))
        elif key == "order":
            nums = _ints(rest.split(), lineno, source)
            if len(nums) != 3 or nums[2] not in (1, 2, 3):
                raise TemplateSyntaxError("expected 'order i j n' with n in 1..3", lineno, source)
            current["edits"].append(BondEdit("order", nums[0], nums[1], BondOrder(nums[2])))
        elif key == "leave":
            current["leave"].extend(_ints(rest.split(), lineno, source))
        elif key == "tail":
            if rest not in ("yes", "no"):
                raise TemplateSyntaxError("tail must be 'yes' or 'no'", lineno, source)
            current["tail"] = rest == "yes"
        else:
            raise TemplateSyntaxError(f"unknown directive {key!r}", lineno, source)
    if current is not None:
        raise TemplateSyntaxError(f"template {current['id']!r} is missing 'end'", start_line, source)
    if not templates:
        log.warning("no templates found in %s", source)
    return TemplateRegistry(tuple(templates), source)


def _build(spec: dict, lineno: int, source: str) -> ReactionTemplate:
    pats = spec["patterns"]
    arity = spec["arity"] if spec["arity"] is not None else len(pats)
    if sorted(pats) != list(range(1, arity + 1)):
        raise TemplateSyntaxError(
            f"template {spec['id']!r} declares arity {arity} but has patterns {sorted(pats)}", lineno, source
        )
    template = ReactionTemplate(
        id=spec["id"],
        name=spec["name"],
        patterns=tuple(pats[k] for k in range(1, arity + 1)),
        edits=tuple(spec["edits"]),
        leaving=tuple(spec["leave"]),
        tail_consuming=spec["tail"],
    )
    template.validate()
    return template


def load_templates(path: str | Path | None = None) -> TemplateRegistry:
    """Load a template file; ``None`` loads the shipped default set."""
    if path is None:
        text = resources.files("lipidforge.chemrules").joinpath("data").joinpath(DEFAULT_TEMPLATE_FILE).read_text()
        return parse_templates(text, DEFAULT_TEMPLATE_FILE)
    return parse_templates(Path(path).read_text(), str(path))


_DEFAULT: TemplateRegistry | None = None


def default_registry() -> TemplateRegistry:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_templates()
    return _DEFAULT
