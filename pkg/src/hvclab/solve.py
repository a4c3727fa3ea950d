"""Vertex-cover solvers for small weighted hypergraphs.

``greedy_matching_cover`` is the textbook factor-k algorithm.
``exact_min_vc`` is a depth-first branch and bound: it branches
include-then-exclude on the smallest vertex of an uncovered edge and bounds
with a local-ratio packing over the uncovered edges.  Because decisions are taken in
increasing vertex order with inclusion first, optimal covers are met in
lexicographic order, which makes the returned optimum the lexicographically
smallest one.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import BudgetExhausted, DomainError, ParseError
from .jsonio import frac_from_json, frac_to_json, require
from .vertexset import VertexSet


@dataclass(frozen=True)
class GenericHypergraph:
    n: int
    weights: tuple[Fraction, ...]
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.weights) != self.n:
            raise DomainError(f"{len(self.weights)} weights for {self.n} vertices")
        weights = tuple(Fraction(w) for w in self.weights)
        if any(w <= 0 for w in weights):
            raise DomainError("vertex weights must be positive")
        edges = []
        for e in self.edges:
            e = tuple(sorted(set(e)))
            if not e:
                raise DomainError("empty edge")
            if e[0] < 0 or e[-1] >= self.n:
                raise DomainError(f"edge {e} names a vertex outside 0..{self.n - 1}")
            edges.append(e)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "edges", tuple(edges))

    @property
    def rank(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    @property
    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def is_cover(self, vertices) -> bool:
        s = set(vertices)
        return all(any(v in s for v in e) for e in self.edges)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "weights": [frac_to_json(w) for w in self.weights],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, obj, path="<input>") -> "GenericHypergraph":
        n = require(obj, "n", int, path)
        weights = [
            frac_from_json(w, path, f"weights[{i}]")
            for i, w in enumerate(require(obj, "weights", list, path))
        ]
        edges = require(obj, "edges", list, path)
        for i, e in enumerate(edges):
            if not isinstance(e, list) or not all(isinstance(v, int) for v in e):
                raise ParseError(path, f"edges[{i}]", "expected a list of vertex ids")
        try:
            return cls(n, tuple(weights), tuple(tuple(e) for e in edges))
        except DomainError as exc:
            raise ParseError(path, "edges", str(exc)) from exc


def from_long_code(hg) -> GenericHypergraph:
    """Solver view of a long-code hypergraph: edges become sets of distinct vertices, deduplicated."""
    seen = set()
    edges = []
    for e in hg.edges if hg.edges is not None else hg.iter_edges():
        key = tuple(sorted(set(e)))
        if key not in seen:
            seen.add(key)
            edges.append(key)
    return GenericHypergraph(hg.vertex_count, tuple(hg.weights), tuple(edges))


def greedy_matching_cover(h: GenericHypergraph, seed: Optional[int] = None) -> VertexSet:
    """Keep every edge disjoint from those already kept; cover with all their vertices.

    Edges are scanned in input order, or in a seeded shuffle when ``seed`` is given.
    """
    order = list(h.edges)
    if seed is not None:
        random.Random(seed).shuffle(order)
    used: set[int] = set()
    for e in order:
        if used.isdisjoint(e):
            used.update(e)
    return VertexSet.from_ids(used, h.weights)


@dataclass(frozen=True)
class ExactResult:
    cover: VertexSet
    nodes: int
    optimal: bool
    root_lower_bound: Fraction

    def to_json(self) -> dict:
        return {
            "kind": "vertex_cover",
            "vertices": self.cover.sorted(),
            "weight": frac_to_json(self.cover.weight),
            "nodes": self.nodes,
            "optimal": self.optimal,
            "root_lower_bound": frac_to_json(self.root_lower_bound),
        }


def _scaled(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for w in weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
    return [int(w * den) for w in weights], den


def minimal_edges(edges) -> list[int]:
    """Edge bitmasks with every edge that contains another edge removed.

    Covering the minimal edges covers all of them.  Order of first appearance is kept.
    """
    masks = [sum(1 << v for v in e) for e in edges]
    keep = set()
    for m in sorted(set(masks), key=lambda m: (m.bit_count(), m)):
        if not any(sub in keep for sub in _proper_submasks(m)):
            keep.add(m)
    out, seen = [], set()
    for m in masks:
        if m in keep and m not in seen:
            seen.add(m)
            out.append(m)
    return out


def _proper_submasks(mask: int):
    sub = (mask - 1) & mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def exact_min_vc(h: GenericHypergraph, max_nodes: int = 1_000_000) -> ExactResult:
    """Minimum-weight vertex cover; the lexicographically smallest among optimal ones.

    Raises :class:`BudgetExhausted` (carrying the incumbent and the root bound)
    after ``max_nodes`` search nodes.
    """
    w, den = _scaled(h.weights)
    edges = minimal_edges(h.edges)

    members = {e: _bits(e) for e in edges}

    def bound(uncovered: list[int], excluded: int) -> Optional[int]:
        """Weight still needed, or None if some edge can no longer be covered.

        Local-ratio packing: each edge in turn charges the smallest residual
        weight among its allowed vertices and deducts it from all of them.
        The charges form a feasible dual, so their sum never exceeds the
        optimum; on disjoint edges it is the min-vertex-weight bound.
        """
        residual = list(w)
        need = 0
        for e in uncovered:
            if not e & ~excluded:
                return None
            verts = [v for v in members[e] if not excluded >> v & 1]
            charge = min(residual[v] for v in verts)
            if charge:
                need += charge
                for v in verts:
                    residual[v] -= charge
        return need

    greedy = greedy_matching_cover(h)
    best_mask = sum(1 << v for v in greedy.vertices)
    best_w = sum(w[v] for v in greedy.vertices)
    best_from_search = False
    nodes = 0
    root_lb = bound(edges, 0) or 0

    def search(uncovered: list[int], included: int, excluded: int, cur: int) -> None:
        nonlocal best_mask, best_w, best_from_search, nodes
        nodes += 1
        if nodes > max_nodes:
            raise BudgetExhausted(
                f"search exceeded {max_nodes} nodes",
                best=VertexSet.from_ids(_bits(best_mask), h.weights),
                best_weight=Fraction(best_w, den),
                lower_bound=Fraction(root_lb, den),
                nodes=nodes,
            )
        if not uncovered:
            if cur < best_w or not best_from_search:
                best_mask, best_w, best_from_search = included, cur, True
            return
        need = bound(uncovered, excluded)
        if need is None:
            return
        lb = cur + need
        if lb > best_w or (lb == best_w and best_from_search):
            return
        frontier = 0
        for e in uncovered:
            frontier |= e
        frontier &= ~excluded
        bit = frontier & -frontier
        v = bit.bit_length() - 1
        search([e for e in uncovered if not e & bit], included | bit, excluded, cur + w[v])
        search(uncovered, included, excluded | bit, cur)

    search(edges, 0, 0, 0)
    cover = VertexSet.from_ids(_bits(best_mask), h.weights)
    return ExactResult(cover, nodes, True, Fraction(root_lb, den))


def exact_max_is(h: GenericHypergraph, max_nodes: int = 1_000_000) -> tuple[VertexSet, ExactResult]:
    """Maximum-weight independent set as the complement of the optimal cover."""
    res = exact_min_vc(h, max_nodes)
    rest = set(range(h.n)) - res.cover.vertices
    return VertexSet.from_ids(rest, h.weights), res


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def greedy_disjoint_subfamily(sets, m: int, k: int) -> list[int]:
    """Indices of pairwise disjoint sets chosen first-come, dropping whatever meets a chosen set.

    With every set of size at most ``m`` and no element in more than ``k``
    sets, at least ``n / (1 + (k-1) m)`` sets are returned.
    """
    sets = [frozenset(s) for s in sets]
    if any(len(s) > m for s in sets):
        raise DomainError(f"a set exceeds the size bound m={m}")
    load: dict = {}
    for s in sets:
        for e in s:
            load[e] = load.get(e, 0) + 1
    worst = max(load.values(), default=0)
    if worst > k:
        raise DomainError(f"an element lies in {worst} sets, more than k={k}")
    chosen: list[int] = []
    taken: set = set()
    for idx, s in enumerate(sets):
        if taken.isdisjoint(s):
            chosen.append(idx)
            taken |= s
    return chosen
