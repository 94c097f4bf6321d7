"""Flat key-value config documents for the experiment runner.

Grammar, one entry per line:

    # comment
    key.dotted.path = value

Keys are lowercase dotted identifiers. Values are typed by shape:
``true``/``false`` -> bool, integer literals -> int, float literals ->
real, ``[v1, v2, ...]`` -> list of scalars, double-quoted text -> string,
any other bare token -> string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from .errors import ValidationError

KEY_RE = re.compile(r"^[a-z][a-z0-9_]*(\.[a-z0-9_]+)*$")

__all__ = [
    "parse_config",
    "parse_config_file",
    "parse_scalar",
    "FieldSpec",
    "validate_against",
    "resolved",
]


def parse_scalar(token: str):
    token = token.strip()
    if token == "":
        raise ValidationError("empty value")
    if len(token) >= 2 and token[0] == '"' and token[-1] == '"':
        return token[1:-1]
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def _parse_value(text: str):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ValidationError(f"unterminated list: {text!r}")
        inner = text[1:-1].strip()
        if not inner:
            return []
        return [parse_scalar(tok) for tok in inner.split(",")]
    return parse_scalar(text)


def parse_config(text: str) -> Dict[str, object]:
    """Parse a config document into an ordered key -> typed value map."""
    out: Dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not KEY_RE.match(key):
            raise ValidationError(f"config line {line_no}: invalid key {key!r}")
        if key in out:
            raise ValidationError(f"config line {line_no}: duplicate key {key!r}")
        out[key] = _parse_value(value)
    return out


def parse_config_file(path) -> Dict[str, object]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


@dataclass(frozen=True)
class FieldSpec:
    """Schema entry for one config key."""

    kind: str  # int | real | string | bool | list
    required: bool = False
    default: object = None
    check: Optional[Callable[[object], Optional[str]]] = None

    def type_ok(self, value) -> bool:
        if self.kind == "int":
            return isinstance(value, int) and not isinstance(value, bool)
        if self.kind == "real":
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        if self.kind == "bool":
            return isinstance(value, bool)
        if self.kind == "string":
            return isinstance(value, str)
        if self.kind == "list":
            return isinstance(value, list)
        raise ValidationError(f"unknown schema kind {self.kind!r}")


def validate_against(schema: Dict[str, FieldSpec], config: Dict[str, object]) -> List[str]:
    """Diagnostics for a config under a schema; empty means valid.

    Flags unknown keys, missing required keys, type mismatches, and any
    per-field constraint failures. Each diagnostic names the key.
    """
    diagnostics: List[str] = []
    for key in config:
        if key not in schema:
            diagnostics.append(f"{key}: unknown key")
    for key, spec in schema.items():
        if key not in config:
            if spec.required:
                diagnostics.append(f"{key}: required key missing")
            continue
        value = config[key]
        if not spec.type_ok(value):
            diagnostics.append(f"{key}: expected {spec.kind}, got {type(value).__name__}")
            continue
        if spec.check is not None:
            problem = spec.check(value)
            if problem:
                diagnostics.append(f"{key}: {problem}")
    return diagnostics


def resolved(schema: Dict[str, FieldSpec], config: Dict[str, object]) -> Dict[str, object]:
    """Config with schema defaults filled in (validation assumed done)."""
    out = dict(config)
    for key, spec in schema.items():
        if key not in out and spec.default is not None:
            out[key] = spec.default
    return out
