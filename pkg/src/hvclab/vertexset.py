from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParseError
from .jsonio import frac_from_json, frac_to_json, require


@dataclass(frozen=True)
class VertexSet:
    """A set of vertex ids with its exact total weight."""

    vertices: frozenset
    weight: Fraction

    @classmethod
    def from_ids(cls, ids: Iterable[int], weights: Sequence[Fraction]) -> "VertexSet":
        ids = frozenset(ids)
        return cls(ids, sum((weights[v] for v in ids), Fraction(0)))

    def __contains__(self, v):
        return v in self.vertices

    def __len__(self):
        return len(self.vertices)

    def sorted(self) -> list[int]:
        return sorted(self.vertices)

    def to_json(self) -> dict:
        return {"vertices": self.sorted(), "weight": frac_to_json(self.weight)}

    @classmethod
    def from_json(cls, obj, weights=None, path="<input>") -> "VertexSet":
        ids = require(obj, "vertices", list, path)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in ids):
            raise ParseError(path, "vertices", "expected integer vertex ids")
        if weights is not None:
            if any(not 0 <= v < len(weights) for v in ids):
                raise ParseError(path, "vertices", "vertex id out of range")
            vs = cls.from_ids(ids, weights)
            if "weight" in obj and frac_from_json(obj["weight"], path, "weight") != vs.weight:
                raise ParseError(path, "weight", "does not match the vertex weights")
            return vs
        return cls(frozenset(ids), frac_from_json(require(obj, "weight", dict, path), path, "weight"))
