"""Multilayered projection instances built from a bipartite game.

Layer ``i`` (1-based, ``1 <= i <= l``) holds every ``l``-tuple whose first
``i`` coordinates are Z variables and whose last ``l - i`` coordinates are Y
variables.  Its values are tuples with ``R_Z`` entries in the first ``i``
coordinates and ``R_Y`` entries after that.

Tuples and value vectors are both indexed in mixed radix with coordinate 1 as
the most significant digit.

For ``i < j`` a variable ``x`` of layer ``i`` is constrained with ``x'`` of
layer ``j`` iff they agree outside coordinates ``i+1..j`` and every
coordinate ``k`` in that window holds a constrained pair ``(y, z)`` of the
base game.  Each such constraint is stored as ``(x, x', mids)`` where
``mids`` lists the base-constraint indices for the window.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Optional, Sequence

from .caps import DEFAULT_CAPS, Caps
from .errors import DecodeError, DomainError, ParseError, PropertyViolation, SizeError
from .game import GameLabeling, ProjectionGame, require_satisfying, satisfied_fraction, validate
from .jsonio import require

WALK_CHUNK = 1024


def _to_index(digits: Sequence[int], radices: Sequence[int]) -> int:
    idx = 0
    for d, r in zip(digits, radices):
        idx = idx * r + d
    return idx


def _from_index(idx: int, radices: Sequence[int]) -> tuple[int, ...]:
    out = []
    for r in reversed(radices):
        idx, d = divmod(idx, r)
        out.append(d)
    return tuple(reversed(out))


@dataclass
class LayeredInstance:
    l: int
    base: ProjectionGame
    phi: dict = field(repr=False)

    def var_radices(self, i: int) -> tuple[int, ...]:
        return (self.base.z_count,) * i + (self.base.y_count,) * (self.l - i)

    def value_radices(self, i: int) -> tuple[int, ...]:
        return (self.base.rz,) * i + (self.base.ry,) * (self.l - i)

    def layer_size(self, i: int) -> int:
        return self.base.z_count**i * self.base.y_count ** (self.l - i)

    def range_size(self, i: int) -> int:
        return self.base.rz**i * self.base.ry ** (self.l - i)

    def variable(self, i: int, idx: int) -> tuple[int, ...]:
        return _from_index(idx, self.var_radices(i))

    def var_index(self, i: int, coords: Sequence[int]) -> int:
        return _to_index(coords, self.var_radices(i))

    def value_vector(self, i: int, idx: int) -> tuple[int, ...]:
        return _from_index(idx, self.value_radices(i))

    def value_index(self, i: int, vec: Sequence[int]) -> int:
        return _to_index(vec, self.value_radices(i))

    def pairs(self):
        return [(i, j) for i in range(1, self.l + 1) for j in range(i + 1, self.l + 1)]

    def constraints(self, i: int, j: int) -> list:
        return self.phi[(i, j)]

    def project(self, i: int, j: int, mids: Sequence[int], a: Sequence[int]) -> tuple[int, ...]:
        """The unique value of the layer-``j`` endpoint consistent with ``a``."""
        b = list(a)
        for offset, cidx in enumerate(mids):
            b[i + offset] = self.base.constraints[cidx].table[a[i + offset]]
        return tuple(b)

    def projection_table(self, i: int, j: int, mids: Sequence[int]) -> list[int]:
        """Projection as a map between value indices of layers ``i`` and ``j``."""
        return [
            self.value_index(j, self.project(i, j, mids, self.value_vector(i, a)))
            for a in range(self.range_size(i))
        ]

    def summary(self, with_constraints: bool = False) -> dict:
        out = {
            "l": self.l,
            "base": self.base.to_json(),
            "layer_sizes": [self.layer_size(i) for i in range(1, self.l + 1)],
            "range_sizes": [self.range_size(i) for i in range(1, self.l + 1)],
            "constraint_counts": {f"{i}-{j}": len(self.phi[(i, j)]) for i, j in self.pairs()},
        }
        if with_constraints:
            out["constraints"] = {
                f"{i}-{j}": [[x, xp] for x, xp, _ in self.phi[(i, j)]] for i, j in self.pairs()
            }
        return out

    @classmethod
    def from_json(cls, obj, path="<input>", caps: Caps = DEFAULT_CAPS) -> "LayeredInstance":
        """Rebuild from a summary, or from a bare game plus an ``l`` field."""
        l = require(obj, "l", int, path)
        base = ProjectionGame.from_json(require(obj, "base", dict, path), path)
        inst = build_layered(base, l, caps)
        counts = obj.get("constraint_counts")
        if counts is not None and counts != inst.summary()["constraint_counts"]:
            raise ParseError(path, "constraint_counts", "does not match the rebuilt instance")
        return inst


@dataclass(frozen=True)
class LayeredLabeling:
    layers: tuple[tuple[tuple[int, ...], ...], ...]

    def value(self, i: int, x: int) -> tuple[int, ...]:
        return self.layers[i - 1][x]

    def to_json(self) -> dict:
        return {"layers": [[list(v) for v in layer] for layer in self.layers]}

    @classmethod
    def from_json(cls, obj, path="<input>") -> "LayeredLabeling":
        raw = require(obj, "layers", list, path)
        try:
            return cls(tuple(tuple(tuple(int(c) for c in v) for v in layer) for layer in raw))
        except (TypeError, ValueError) as exc:
            raise ParseError(path, "layers", "expected nested integer lists") from exc


def build_layered(game: ProjectionGame, l: int, caps: Caps = DEFAULT_CAPS) -> LayeredInstance:
    if l < 1:
        raise DomainError(f"layer count must be positive, got {l}")
    problems = validate(game)
    if problems:
        raise DomainError("invalid base game: " + "; ".join(problems))
    for i in range(1, l + 1):
        size = game.z_count**i * game.y_count ** (l - i)
        if size > caps.max_layer_size:
            raise SizeError(f"layer {i} has {size} variables, cap is {caps.max_layer_size}")
    inst = LayeredInstance(l, game, {})
    zs, ys = range(game.z_count), range(game.y_count)
    ncons = range(len(game.constraints))
    for i, j in inst.pairs():
        out = []
        ri, rj = inst.var_radices(i), inst.var_radices(j)
        for prefix in product(zs, repeat=i):
            for mids in product(ncons, repeat=j - i):
                ycoords = tuple(game.constraints[c].y for c in mids)
                zcoords = tuple(game.constraints[c].z for c in mids)
                for suffix in product(ys, repeat=l - j):
                    x = _to_index(prefix + ycoords + suffix, ri)
                    xp = _to_index(prefix + zcoords + suffix, rj)
                    out.append((x, xp, mids))
        inst.phi[(i, j)] = out
    return inst


def _find_constraint(inst: LayeredInstance, i, x, j, xp) -> Optional[tuple[int, ...]]:
    if not 1 <= i < j <= inst.l:
        return None
    a, b = inst.variable(i, x), inst.variable(j, xp)
    if a[:i] != b[:i] or a[j:] != b[j:]:
        return None
    index = inst.base.constraint_index()
    mids = []
    for k in range(i, j):
        cidx = index.get((a[k], b[k]))
        if cidx is None:
            return None
        mids.append(cidx)
    return tuple(mids)


def project_assignment(inst: LayeredInstance, i: int, x: int, j: int, xp: int, a) -> tuple[int, ...]:
    """Value of ``xp`` (layer ``j``) forced by value ``a`` of ``x`` (layer ``i``)."""
    mids = _find_constraint(inst, i, x, j, xp)
    if mids is None:
        raise DomainError(f"no constraint between layer {i} var {x} and layer {j} var {xp}")
    radices = inst.value_radices(i)
    if len(a) != inst.l or any(not 0 <= v < r for v, r in zip(a, radices)):
        raise DomainError(f"value {a} is not in the range of layer {i}")
    return inst.project(i, j, mids, a)


def lift_labeling(inst: LayeredInstance, labeling: GameLabeling) -> LayeredLabeling:
    """Label every tuple by the coordinatewise base labels; satisfies every layer pair."""
    require_satisfying(inst.base, labeling)
    layers = []
    for i in range(1, inst.l + 1):
        layer = []
        for idx in range(inst.layer_size(i)):
            coords = inst.variable(i, idx)
            layer.append(
                tuple(
                    labeling.z_labels[c] if k < i else labeling.y_labels[c]
                    for k, c in enumerate(coords)
                )
            )
        layers.append(tuple(layer))
    return LayeredLabeling(tuple(layers))


def check_layered_labeling(inst: LayeredInstance, lab: LayeredLabeling) -> None:
    if len(lab.layers) != inst.l:
        raise DomainError(f"labeling has {len(lab.layers)} layers, instance has {inst.l}")
    for i in range(1, inst.l + 1):
        layer = lab.layers[i - 1]
        if len(layer) != inst.layer_size(i):
            raise DomainError(f"layer {i}: {len(layer)} labels for {inst.layer_size(i)} variables")
        radices = inst.value_radices(i)
        for x, v in enumerate(layer):
            if len(v) != inst.l or any(not 0 <= c < r for c, r in zip(v, radices)):
                raise DomainError(f"layer {i} var {x}: value {v} out of range")


def satisfied_fraction_between(inst: LayeredInstance, lab: LayeredLabeling, i: int, j: int) -> Fraction:
    if not 1 <= i < j <= inst.l:
        raise DomainError(f"need 1 <= i < j <= {inst.l}, got ({i}, {j})")
    cons = inst.phi[(i, j)]
    if not cons:
        warnings.warn(f"constraint set {i}-{j} is empty; fraction defined as 1", RuntimeWarning)
        return Fraction(1)
    li, lj = lab.layers[i - 1], lab.layers[j - 1]
    good = sum(1 for x, xp, mids in cons if inst.project(i, j, mids, li[x]) == lj[xp])
    return Fraction(good, len(cons))


class DecodedGame(NamedTuple):
    labeling: GameLabeling
    fraction: Fraction
    class_key: tuple


def decode_to_game(inst: LayeredInstance, lab: LayeredLabeling, i: int, j: int) -> DecodedGame:
    """Read a base-game labeling off coordinate ``j`` of the best pair of classes.

    A class of layer ``i`` (resp. ``j``) fixes every coordinate except ``j``.
    Between a constrained pair of classes the layered constraints correspond
    one-to-one to base constraints, and a satisfied layered constraint gives a
    satisfied base constraint.  Every constrained class pair is tried; the
    extraction with the largest base value wins (first one on ties).
    """
    if not 1 <= i < j <= inst.l:
        raise DomainError(f"need 1 <= i < j <= {inst.l}, got ({i}, {j})")
    check_layered_labeling(inst, lab)
    g = inst.base
    li, lj = lab.layers[i - 1], lab.layers[j - 1]
    best = None
    for prefix in product(range(g.z_count), repeat=i):
        for mids in product(range(len(g.constraints)), repeat=j - i - 1):
            ymid = tuple(g.constraints[c].y for c in mids)
            zmid = tuple(g.constraints[c].z for c in mids)
            for suffix in product(range(g.y_count), repeat=inst.l - j):
                ylabels = tuple(
                    li[inst.var_index(i, prefix + ymid + (y,) + suffix)][j - 1] for y in range(g.y_count)
                )
                zlabels = tuple(
                    lj[inst.var_index(j, prefix + zmid + (z,) + suffix)][j - 1] for z in range(g.z_count)
                )
                cand = GameLabeling(ylabels, zlabels)
                value = satisfied_fraction(g, cand)
                if best is None or value > best.fraction:
                    best = DecodedGame(cand, value, (prefix, mids, suffix))
    if best is None:
        raise DecodeError(f"no constrained class pair between layers {i} and {j}")
    return best


@dataclass(frozen=True)
class WeakDensityQuery:
    delta: Fraction
    layers: tuple[int, ...]
    sets: tuple[frozenset, ...]


class DensePair(NamedTuple):
    j: int
    j_prime: int
    density: Fraction


def check_weak_density_query(inst: LayeredInstance, q: WeakDensityQuery) -> None:
    delta = Fraction(q.delta)
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    m = len(q.layers)
    if m != len(q.sets):
        raise DomainError(f"{m} layers but {len(q.sets)} sets")
    need = math.ceil(2 / delta)
    if m < need:
        raise DomainError(f"need at least ceil(2/delta) = {need} layers, got {m}")
    if any(b <= a for a, b in zip(q.layers, q.layers[1:])):
        raise DomainError(f"layer indices must be strictly increasing, got {q.layers}")
    if q.layers[0] < 1 or q.layers[-1] > inst.l:
        raise DomainError(f"layer indices must lie in 1..{inst.l}")
    for layer, s in zip(q.layers, q.sets):
        size = inst.layer_size(layer)
        if any(not 0 <= x < size for x in s):
            raise DomainError(f"set for layer {layer} names variables outside the layer")
        if len(s) < delta * size:
            raise DomainError(f"set for layer {layer} has {len(s)} < delta*|X| = {delta * size} variables")


def pair_density(inst: LayeredInstance, i: int, j: int, si, sj) -> Fraction:
    """Fraction of the layer ``i``-``j`` constraints with both ends in ``si x sj``."""
    cons = inst.phi[(i, j)]
    if not cons:
        raise DomainError(f"constraint set {i}-{j} is empty")
    hits = sum(1 for x, xp, _ in cons if x in si and xp in sj)
    return Fraction(hits, len(cons))


def all_pair_densities(inst: LayeredInstance, layers: Sequence[int], sets) -> dict:
    sets = [frozenset(s) for s in sets]
    return {
        (a, b): pair_density(inst, layers[a], layers[b], sets[a], sets[b])
        for a in range(len(layers))
        for b in range(a + 1, len(layers))
    }


def weak_density_pair(inst: LayeredInstance, q: WeakDensityQuery) -> DensePair:
    """First query pair ``(j, j')`` (0-based positions) whose density reaches ``delta^2 / 4``."""
    check_weak_density_query(inst, q)
    target = Fraction(q.delta) ** 2 / 4
    densities = all_pair_densities(inst, q.layers, q.sets)
    for (a, b), d in sorted(densities.items()):
        if d >= target:
            return DensePair(a, b, d)
    raise PropertyViolation(
        f"no pair reaches density {target}; max is {max(densities.values())} "
        f"(layers {q.layers}, delta {q.delta})"
    )


def _successors(inst: LayeredInstance) -> list[list[list[int]]]:
    succ = []
    for t in range(1, inst.l):
        nxt = [[] for _ in range(inst.layer_size(t))]
        for x, xp, _ in inst.phi[(t, t + 1)]:
            nxt[x].append(xp)
        succ.append(nxt)
    return succ


def random_walk_estimate(
    inst: LayeredInstance, layers: Sequence[int], sets, seed: int, trials: int, executor=None
) -> dict:
    """Monte-Carlo estimate of ``Pr[E_a and E_b]`` for a layer-by-layer random walk.

    The walk starts uniformly in layer 1 and moves to a uniform constrained
    neighbour in the next layer.  ``E_a`` is the event that it sits in
    ``sets[a]`` when in layer ``layers[a]``.  Trials run in fixed-size
    chunks, each seeded from ``(seed, chunk number)``, so the result does not
    depend on how chunks are spread over ``executor`` workers.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    sets = [frozenset(s) for s in sets]
    succ = _successors(inst)
    last = max(layers)
    m = len(layers)
    start_size = inst.layer_size(1)

    def run_chunk(chunk: int):
        n = min(WALK_CHUNK, trials - chunk * WALK_CHUNK)
        rng = random.Random(f"{seed}:{chunk}")
        counts = [[0] * m for _ in range(m)]
        for _ in range(n):
            x = rng.randrange(start_size)
            pos = {1: x}
            for t in range(1, last):
                options = succ[t - 1][x]
                x = options[rng.randrange(len(options))]
                pos[t + 1] = x
            hit = [pos[layers[a]] in sets[a] for a in range(m)]
            for a in range(m):
                if hit[a]:
                    for b in range(a, m):
                        if hit[b]:
                            counts[a][b] += 1
        return counts

    chunks = range(math.ceil(trials / WALK_CHUNK))
    results = executor.map(run_chunk, chunks) if executor is not None else map(run_chunk, chunks)
    total = [[0] * m for _ in range(m)]
    for counts in results:
        for a in range(m):
            for b in range(a, m):
                total[a][b] += counts[a][b]
    return {
        "single": {a: Fraction(total[a][a], trials) for a in range(m)},
        "joint": {(a, b): Fraction(total[a][b], trials) for a in range(m) for b in range(a + 1, m)},
        "trials": trials,
        "seed": seed,
    }


def count_walks(inst: LayeredInstance, i: int, j: int) -> int:
    """Number of layer-by-layer walks from layer ``i`` to layer ``j``."""
    succ = _successors(inst)
    ways = [1] * inst.layer_size(i)
    for t in range(i, j):
        nxt = [0] * inst.layer_size(t + 1)
        for x, w in enumerate(ways):
            for xp in succ[t - 1][x]:
                nxt[xp] += w
        ways = nxt
    return sum(ways)


def random_subsets(inst: LayeredInstance, layers: Sequence[int], delta, seed: int) -> list[frozenset]:
    """For each layer, a uniform subset of exactly ``ceil(delta * |X_i|)`` variables."""
    rng = random.Random(seed)
    out = []
    for layer in layers:
        size = inst.layer_size(layer)
        k = math.ceil(Fraction(delta) * size)
        out.append(frozenset(rng.sample(range(size), k)))
    return out
