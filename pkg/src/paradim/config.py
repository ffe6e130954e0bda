"""Solver knobs and their defaults, loadable from a JSON or TOML file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import DomainError

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    try:
        import tomli as tomllib
    except ModuleNotFoundError:
        tomllib = None


@dataclass(frozen=True)
class Settings:
    escape_radius: float = 1e8
    newton_max_iter: int = 200
    pressure_levels: tuple = (10, 12, 14, 16)
    bowen_bracket: tuple = (0.5, 2.0)
    quadrature_tol: float = 1e-11
    scan_grid: dict = field(default_factory=lambda: {"decades": 2, "per_decade": 3, "start": 1e-4})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pressure_levels"] = list(self.pressure_levels)
        d["bowen_bracket"] = list(self.bowen_bracket)
        return d

    def merged(self, overrides: dict) -> "Settings":
        known = {f.name for f in fields(self)}
        bad = set(overrides) - known
        if bad:
            raise DomainError(f"unknown config keys: {sorted(bad)}")
        clean = {}
        for k, v in overrides.items():
            if k in ("pressure_levels", "bowen_bracket"):
                v = tuple(v)
            clean[k] = v
        return replace(self, **clean)


DEFAULTS = Settings()


def load_settings(path: str | Path | None) -> Settings:
    if path is None:
        return DEFAULTS
    p = Path(path)
    text = p.read_bytes()
    try:
        if p.suffix == ".toml":
            if tomllib is None:
                raise DomainError("TOML config needs python >= 3.11; use JSON")
            data = tomllib.loads(text.decode())
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DomainError(f"cannot parse config {p.name}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError("config file must hold a key/value mapping")
    return DEFAULTS.merged(data)
