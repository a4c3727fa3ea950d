"""Bipartite projection games.

A game has ``y_count`` variables on the Y side with values in ``range(ry)``
and ``z_count`` on the Z side with values in ``range(rz)``.  Each constraint
joins one y to one z and carries a table of length ``ry``: the constraint is
satisfied iff ``table[label(y)] == label(z)``.

The generators here are desk-scale stand-ins for a hard label-cover
instance.  ``gen_planted`` produces satisfiable games with a known solution;
``gen_scrambled`` keeps the constraint graph and redraws every table.
Randomness comes from :class:`random.Random` seeded with an explicit integer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

from .errors import DomainError, ParseError, PreconditionError, SizeError
from .jsonio import require

MAX_PLACEMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class Constraint:
    y: int
    z: int
    table: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.table[a]


@dataclass(frozen=True)
class ProjectionGame:
    y_count: int
    z_count: int
    ry: int
    rz: int
    constraints: tuple[Constraint, ...]

    def degrees(self) -> tuple[list[int], list[int]]:
        dy = [0] * self.y_count
        dz = [0] * self.z_count
        for c in self.constraints:
            if 0 <= c.y < self.y_count:
                dy[c.y] += 1
            if 0 <= c.z < self.z_count:
                dz[c.z] += 1
        return dy, dz

    def constraint_index(self) -> dict[tuple[int, int], int]:
        """Map ``(y, z)`` to the index of the constraint joining them."""
        index = {}
        for idx, c in enumerate(self.constraints):
            if (c.y, c.z) in index:
                raise DomainError(f"parallel constraints between y={c.y} and z={c.z}")
            index[(c.y, c.z)] = idx
        return index

    def to_json(self) -> dict:
        return {
            "ry": self.ry,
            "rz": self.rz,
            "y_count": self.y_count,
            "z_count": self.z_count,
            "constraints": [
                {"y": c.y, "z": c.z, "table": list(c.table)} for c in self.constraints
            ],
        }

    @classmethod
    def from_json(cls, obj, path="<input>") -> "ProjectionGame":
        cons = []
        for idx, raw in enumerate(require(obj, "constraints", list, path)):
            where = f"constraints[{idx}]"
            if not isinstance(raw, dict):
                raise ParseError(path, where, "expected object")
            table = require(raw, "table", list, path)
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in table):
                raise ParseError(path, f"{where}.table", "entries must be ints")
            cons.append(
                Constraint(require(raw, "y", int, path), require(raw, "z", int, path), tuple(table))
            )
        return cls(
            y_count=require(obj, "y_count", int, path),
            z_count=require(obj, "z_count", int, path),
            ry=require(obj, "ry", int, path),
            rz=require(obj, "rz", int, path),
            constraints=tuple(cons),
        )


@dataclass(frozen=True)
class GameLabeling:
    y_labels: tuple[int, ...]
    z_labels: tuple[int, ...]

    def to_json(self) -> dict:
        return {"y_labels": list(self.y_labels), "z_labels": list(self.z_labels)}

    @classmethod
    def from_json(cls, obj, path="<input>") -> "GameLabeling":
        return cls(
            tuple(require(obj, "y_labels", list, path)),
            tuple(require(obj, "z_labels", list, path)),
        )


def validate(game: ProjectionGame) -> list[str]:
    """Every invariant violation in ``game``; an empty list means the game is well formed."""
    problems = []
    if game.y_count < 1 or game.z_count < 1:
        problems.append(f"need at least one variable per side, got y={game.y_count}, z={game.z_count}")
    if game.ry < 1 or game.rz < 1:
        problems.append(f"ranges must be nonempty, got ry={game.ry}, rz={game.rz}")
    if game.rz > game.ry:
        problems.append(f"range order: rz={game.rz} exceeds ry={game.ry}")
    if not game.constraints:
        problems.append("no constraints")
    seen = set()
    for idx, c in enumerate(game.constraints):
        if not 0 <= c.y < game.y_count:
            problems.append(f"constraint {idx}: y index {c.y} out of range")
        if not 0 <= c.z < game.z_count:
            problems.append(f"constraint {idx}: z index {c.z} out of range")
        if len(c.table) != game.ry:
            problems.append(f"constraint {idx}: table has length {len(c.table)}, expected ry={game.ry}")
        bad = [v for v in c.table if not 0 <= v < game.rz]
        if bad:
            problems.append(f"constraint {idx}: table entries {bad} outside range rz={game.rz}")
        if (c.y, c.z) in seen:
            problems.append(f"constraint {idx}: parallel constraint between y={c.y} and z={c.z}")
        seen.add((c.y, c.z))
    dy, dz = game.degrees()
    if len(set(dy)) > 1:
        problems.append(f"bi-regularity: y degrees differ {sorted(set(dy))}")
    if len(set(dz)) > 1:
        problems.append(f"bi-regularity: z degrees differ {sorted(set(dz))}")
    return problems


def check_labeling(game: ProjectionGame, labeling: GameLabeling) -> None:
    if len(labeling.y_labels) != game.y_count or len(labeling.z_labels) != game.z_count:
        raise DomainError(
            f"labeling sizes ({len(labeling.y_labels)}, {len(labeling.z_labels)}) "
            f"do not match game ({game.y_count}, {game.z_count})"
        )
    if any(not 0 <= a < game.ry for a in labeling.y_labels):
        raise DomainError("y label outside range")
    if any(not 0 <= b < game.rz for b in labeling.z_labels):
        raise DomainError("z label outside range")


def satisfied_fraction(game: ProjectionGame, labeling: GameLabeling) -> Fraction:
    check_labeling(game, labeling)
    if not game.constraints:
        return Fraction(1)
    good = sum(
        1 for c in game.constraints if c.table[labeling.y_labels[c.y]] == labeling.z_labels[c.z]
    )
    return Fraction(good, len(game.constraints))


def _edge_template(y_count, z_count, degree, rng):
    """Simple bi-regular bipartite graph: y-slots matched to z-slots by a random permutation."""
    total = y_count * degree
    if total % z_count:
        raise DomainError(
            f"y_count*degree = {total} is not divisible by z_count = {z_count}; no bi-regular graph"
        )
    z_degree = total // z_count
    if degree > z_count or z_degree > y_count:
        raise DomainError(
            f"degrees (y: {degree}, z: {z_degree}) too large for a simple graph on "
            f"{y_count} + {z_count} vertices"
        )
    y_slots = [y for y in range(y_count) for _ in range(degree)]
    z_slots = [z for z in range(z_count) for _ in range(z_degree)]
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        rng.shuffle(z_slots)
        edges = list(zip(y_slots, z_slots))
        if len(set(edges)) == len(edges):
            return sorted(edges)
    raise DomainError("could not place a simple bi-regular graph; try another seed or degree")


def gen_planted(
    y_count: int, z_count: int, ry: int, rz: int, degree: int = 1, seed: int = 0
) -> tuple[ProjectionGame, GameLabeling]:
    """A bi-regular game together with a labeling that satisfies every constraint.

    Each table sends the planted y value to the planted z value; its other
    entries are uniform in ``range(rz)``.
    """
    if y_count < 1 or z_count < 1 or degree < 1:
        raise DomainError("variable counts and degree must be positive")
    if not 1 <= rz <= ry:
        raise DomainError(f"need 1 <= rz <= ry, got ry={ry}, rz={rz}")
    rng = random.Random(seed)
    edges = _edge_template(y_count, z_count, degree, rng)
    plant = GameLabeling(
        tuple(rng.randrange(ry) for _ in range(y_count)),
        tuple(rng.randrange(rz) for _ in range(z_count)),
    )
    cons = []
    for y, z in edges:
        table = [rng.randrange(rz) for _ in range(ry)]
        table[plant.y_labels[y]] = plant.z_labels[z]
        cons.append(Constraint(y, z, tuple(table)))
    return ProjectionGame(y_count, z_count, ry, rz, tuple(cons)), plant


def gen_scrambled(
    base: ProjectionGame,
    seed: int,
    soundness_target: Optional[Fraction] = None,
    max_attempts: int = 200,
) -> ProjectionGame:
    """Redraw every table uniformly, keeping the constraint graph.

    Nothing is promised about the value of the result.  With
    ``soundness_target`` set, draws are repeated until the brute-force
    optimum is at most the target (tiny games only).
    """
    rng = random.Random(seed)
    for _ in range(max_attempts):
        cons = tuple(
            Constraint(c.y, c.z, tuple(rng.randrange(base.rz) for _ in range(base.ry)))
            for c in base.constraints
        )
        game = ProjectionGame(base.y_count, base.z_count, base.ry, base.rz, cons)
        if soundness_target is None:
            return game
        value, _ = brute_force_optimum(game)
        if value <= soundness_target:
            return game
    raise DomainError(f"no draw reached value <= {soundness_target} in {max_attempts} attempts")


def brute_force_optimum(game: ProjectionGame, max_labelings: int = 2_000_000):
    """Best satisfied fraction over all ``ry^y_count * rz^z_count`` labelings."""
    count = game.ry**game.y_count * game.rz**game.z_count
    if count > max_labelings:
        raise SizeError(f"{count} labelings exceed the brute-force cap {max_labelings}")
    best, best_lab = Fraction(-1), None
    for ys in product(range(game.ry), repeat=game.y_count):
        for zs in product(range(game.rz), repeat=game.z_count):
            lab = GameLabeling(ys, zs)
            value = satisfied_fraction(game, lab)
            if value > best:
                best, best_lab = value, lab
    return best, best_lab


def require_satisfying(game: ProjectionGame, labeling: GameLabeling) -> None:
    value = satisfied_fraction(game, labeling)
    if value != 1:
        raise PreconditionError(f"labeling satisfies only {value} of the base constraints")
