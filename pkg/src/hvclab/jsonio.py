"""JSON helpers: exact rationals as ``{"num": int, "den": int}`` and field access with path-aware errors."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import ParseError


def frac_to_json(q) -> dict:
    q = Fraction(q)
    return {"num": q.numerator, "den": q.denominator}


def frac_from_json(obj, path="<input>", field="value") -> Fraction:
    if isinstance(obj, dict):
        try:
            return Fraction(int(obj["num"]), int(obj["den"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(path, field, f"bad rational {obj!r}") from exc
    if isinstance(obj, int) and not isinstance(obj, bool):
        return Fraction(obj)
    if isinstance(obj, str):
        try:
            return Fraction(obj)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(path, field, f"bad rational {obj!r}") from exc
    raise ParseError(path, field, f"expected rational, got {type(obj).__name__}")


def parse_fraction(text: str) -> Fraction:
    """Parse ``"0.1"``, ``"1/10"`` or ``"3"`` into an exact Fraction (decimal strings are read exactly)."""
    return Fraction(str(text).strip())


def require(obj: Any, key: str, kind, path="<input>"):
    """Fetch ``obj[key]`` and check its type, raising :class:`ParseError` otherwise."""
    if not isinstance(obj, dict):
        raise ParseError(path, key, "enclosing value is not an object")
    if key not in obj:
        raise ParseError(path, key, "missing")
    value = obj[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(path, key, f"expected int, got {value!r}")
    if kind is not int and not isinstance(value, kind):
        raise ParseError(path, key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def dumps(obj) -> str:
    """Canonical encoding: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_file(path) -> Any:
    p = Path(path)
    try:
        return json.loads(p.read_text())
    except OSError as exc:
        raise ParseError(str(path), "<file>", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), "<document>", f"invalid JSON: {exc}") from exc


def write_file(path, obj) -> None:
    Path(path).write_text(dumps(obj))
