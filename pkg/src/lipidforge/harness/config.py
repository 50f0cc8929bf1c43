"""Flat ``key=value`` run configuration."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable

from ..policy.network import DEFAULT_HIDDEN
from ..predictors.ionization import IonizationConfig
from ..search.engines import ENGINES


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run. Keys in config files use the field names, with
    dots in place of the underscores after ``toy``, ``test``, ``random`` and
    ``ionizable`` (``toy.heads=50``)."""

    engine: str = "guided"
    seed: int = 0
    # building blocks: "toy" or a dataset file written by `blocks build`
    dataset: str = "toy"
    test_dataset: str | None = None
    templates: str | None = None
    toy_heads: int = 50
    toy_tails: int = 30
    toy_test_heads: int = 0
    # search
    iterations: int = 3
    runs_per_iteration: int = 2
    simulations: int = 500
    c: float | None = None
    max_expand: int = 2000
    random_count: int = 1000
    test_simulations: int = 200
    # policy and training
    weights: str | None = None
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    dropout: float = 0.5
    epochs: int = 20
    lr: float = 1e-3
    tau: float = 1.0
    pairs_per_state: int = 64
    eps_smooth: float = 1.0
    batch_size: int = 16
    loss: str = "mse"
    # scoring
    ionizable_ph_neutral: float = 7.4
    ionizable_ph_acidic: float = 5.0
    ionizable_tau_neutral: float = 0.5
    ionizable_tau_positive: float = 0.5
    lipid_threshold: float = 0.5
    # output
    out: str = "out"
    run_id: str | None = None

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {', '.join(ENGINES)}; got {self.engine!r}")
        for name in ("iterations", "runs_per_iteration", "simulations", "epochs", "max_expand",
                     "random_count", "pairs_per_state", "batch_size", "toy_heads", "toy_tails"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{key_of(name)} must be >= 1")
        for name in ("toy_test_heads", "test_simulations"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{key_of(name)} must be >= 0")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigError("hidden sizes must be positive")
        if self.lr < 0 or self.tau <= 0 or self.eps_smooth < 0:
            raise ConfigError("lr must be >= 0, tau > 0 and eps_smooth >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.c is not None and self.c < 0:
            raise ConfigError("c must be >= 0")
        if self.loss not in ("mse", "mae"):
            raise ConfigError("loss must be mse or mae")
        try:
            self.ionization()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def ionization(self) -> IonizationConfig:
        return IonizationConfig(self.ionizable_ph_neutral, self.ionizable_ph_acidic,
                                self.ionizable_tau_neutral, self.ionizable_tau_positive)

    def validate_paths(self) -> None:
        for name in ("dataset", "test_dataset", "templates", "weights"):
            value = getattr(self, name)
            if value and value != "toy" and not Path(value).exists():
                raise ConfigError(f"{key_of(name)}: no such file {value}")

    def with_overrides(self, items: dict[str, str]) -> "RunConfig":
        return replace(self, **{attr_of(k): _coerce(attr_of(k), v) for k, v in items.items()})

    def to_text(self, exclude: Iterable[str] = ()) -> str:
        skip = set(exclude)
        lines = []
        for f in fields(self):
            if f.name in skip:
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            lines.append(f"{key_of(f.name)}={_render(value)}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Hash of everything that influences results (not where they go)."""
        return hashlib.sha256(self.to_text(exclude=("out", "run_id")).encode()).hexdigest()[:12]


_DOTTED = ("toy_", "test_", "random_", "ionizable_")
_FIELDS = {f.name: f for f in fields(RunConfig)}


def key_of(attr: str) -> str:
    for prefix in _DOTTED:
        if attr.startswith(prefix) and attr != "test_dataset":
            return prefix[:-1] + "." + attr[len(prefix):]
    return attr


def attr_of(key: str) -> str:
    attr = key.strip().replace(".", "_")
    if attr not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    return attr


def _render(value: Any) -> str:
    if isinstance(value, tuple):
        return ",".join(map(str, value))
    return str(value)


def _coerce(attr: str, text: str) -> Any:
    text = text.strip()
    kind = _FIELDS[attr].type
    try:
        if attr == "hidden":
            return tuple(int(x) for x in text.split(",") if x.strip())
        if text.lower() in ("", "none") and "None" in kind:
            return None
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key_of(attr)}: cannot parse {text!r}") from None
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    items: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        try:
            attr_of(key)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
        items[key.strip()] = value.strip()
    return items


def split_overrides(args: Iterable[str]) -> dict[str, str]:
    items = {}
    for arg in args:
        key, sep, value = arg.partition("=")
        if not sep:
            raise ConfigError(f"override {arg!r} is not key=value")
        items[key] = value
    return items


def load_config(path: str | Path | None = None, overrides: dict[str, str] | None = None) -> RunConfig:
    items: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} not found")
        items.update(parse_config_text(p.read_text(encoding="utf-8"), str(p)))
    items.update(overrides or {})
    try:
        return RunConfig().with_overrides(items)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
