"""Plain-text ``key = value`` configuration files.

Model keys::

    t1 = 0.5            # intra-cell hopping
    t2 = 1.0            # inter-cell hopping (default 1)
    n_cells = 50        # number of unit cells N
    left_kind = loss    # loss | gain | none
    left_gamma = 2.0
    right_kind = none
    right_gamma = 0

Blank lines and ``#`` comments are ignored. Every other key is kept as a raw
string for the command that consumes it (see the README for the per-command
keys). Environment variables ``DSSH_<KEY>`` (upper-case key) override values
from the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .model import DissipatorSpec, Kind, OpenChainModel, Side, validate_model

ENV_PREFIX = "DSSH_"

MODEL_KEYS = ("t1", "t2", "n_cells", "left_kind", "left_gamma", "right_kind", "right_gamma")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    values: dict[str, str]
    lines: dict[str, int] = field(default_factory=dict)
    source: str = "<string>"

    def _where(self, key):
        if key in self.lines:
            return f"{self.source}:{self.lines[key]}"
        if key in self.values:
            return f"environment {ENV_PREFIX}{key.upper()}"
        return self.source

    def has(self, key) -> bool:
        return key in self.values

    def get(self, key, default=None, cast=str):
        if key not in self.values:
            return default
        raw = self.values[key]
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self._where(key)}: bad value for {key!r}: {raw!r} ({exc})") from None

    def get_float(self, key, default=None):
        return self.get(key, default, float)

    def get_int(self, key, default=None):
        return self.get(key, default, int)

    def get_bool(self, key, default=False):
        return self.get(key, default, parse_bool)

    def get_int_list(self, key, default=None):
        return self.get(key, default, parse_int_list)

    def get_float_list(self, key, default=None):
        return self.get(key, default, parse_float_list)

    def model(self) -> OpenChainModel:
        try:
            t1 = float(self.values["t1"])
            n_cells = int(self.values["n_cells"])
        except KeyError as exc:
            raise ConfigError(f"{self.source}: missing required key {exc.args[0]!r}") from None
        except ValueError:
            bad = "t1" if not _is_float(self.values["t1"]) else "n_cells"
            raise ConfigError(
                f"{self._where(bad)}: bad value for {bad!r}: {self.values[bad]!r}"
            ) from None
        t2 = self.get_float("t2", 1.0)
        diss = []
        for side in Side:
            kind = self.get(f"{side.value}_kind", "none").strip().lower()
            gamma = self.get_float(f"{side.value}_gamma", 0.0)
            if kind == "none":
                if gamma != 0:
                    raise ConfigError(
                        f"{self._where(side.value + '_gamma')}: {side.value}_gamma set but {side.value}_kind is none"
                    )
                continue
            if kind not in (k.value for k in Kind):
                raise ConfigError(f"{self._where(side.value + '_kind')}: kind must be loss, gain or none, got {kind!r}")
            diss.append(DissipatorSpec(side, kind, gamma))
        model = OpenChainModel(t1, t2, n_cells, tuple(diss))
        diag = validate_model(model)
        if not diag.ok:
            raise ConfigError(f"{self.source}: " + "; ".join(diag.messages))
        return model


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_int_list(raw: str) -> list[int]:
    """``4..16`` (inclusive), ``20:160:10`` (inclusive stop) or ``1, 2, 5``."""
    raw = raw.strip()
    if ".." in raw:
        lo, hi = raw.split("..")
        return list(range(int(lo), int(hi) + 1))
    if ":" in raw:
        parts = [int(p) for p in raw.split(":")]
        step = parts[2] if len(parts) == 3 else 1
        return list(range(parts[0], parts[1] + 1, step))
    return [int(p) for p in raw.replace(",", " ").split()]


def parse_float_list(raw: str) -> list[float]:
    return [float(p) for p in raw.replace(",", " ").split()]


def parse_config(text: str, source: str = "<string>", env=None) -> Config:
    values, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {lines[key]})")
        values[key], lines[key] = value, lineno
    env = os.environ if env is None else env
    for name, value in env.items():
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX):].lower()
            values[key] = value
            lines.pop(key, None)
    return Config(values, lines, source)


def load_config(path, env=None) -> Config:
    path = Path(path)
    return parse_config(path.read_text(), str(path), env)
