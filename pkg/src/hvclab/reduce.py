"""p-biased long-code hypergraph over a layered instance.

Every layered variable ``x`` in layer ``i`` becomes a block ``V[x]`` of
``2^|R_i|`` vertices, one per subset of its value range (a bitmask over value
indices).  Vertex ``v`` of ``V[x]`` weighs ``mu_p(v) / (l * |X_i|)``, so each
layer weighs ``1/l`` and the whole graph weighs 1.

For each layered constraint ``x -> x'`` there is a hyperedge
``{v_1, ..., v_{k-1}, u}`` with ``v_r`` in ``V[x]`` and ``u`` in ``V[x']``
whenever the projection of ``v_1 & ... & v_{k-1}`` misses ``u``.  The
``v_r`` may repeat, so an edge is a sorted multiset of ``k`` vertex ids.

In ``explicit`` mode the edges are materialised; in ``implicit`` mode only
the predicate is kept and queries evaluate it on demand.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Iterator, Optional

from .caps import DEFAULT_CAPS, Caps
from .errors import DecodeError, DomainError, ParseError, PreconditionError, PropertyViolation, SizeError
from .game import GameLabeling
from .jsonio import frac_from_json, frac_to_json, require
from .layers import (
    LayeredInstance,
    WeakDensityQuery,
    all_pair_densities,
    lift_labeling,
    weak_density_pair,
)
from .setfam import SetFamily, check_bias, find_small_intersection_tuple, intersection_threshold
from .vertexset import VertexSet

MODES = ("explicit", "implicit")
DESK_SCALE = "desk scale, no hardness claim"


def bias_from_k_eps(k: int, epsilon) -> Fraction:
    """``p = 1 - 1/(k - 1 - epsilon)``."""
    eps = Fraction(epsilon)
    if k < 3:
        raise DomainError(f"k must be at least 3, got {k}")
    if not 0 < eps < k - 2:
        raise DomainError(f"need 0 < epsilon < k-2 = {k - 2}, got {eps}")
    return 1 - 1 / (k - 1 - eps)


def gap_identity(k: int, epsilon) -> tuple[Fraction, Fraction]:
    """Both sides of ``(1-eps)/(1-p) = (1-eps)(k-1-eps)`` for ``p = bias_from_k_eps(k, eps)``."""
    eps = Fraction(epsilon)
    p = bias_from_k_eps(k, eps)
    return (1 - eps) / (1 - p), (1 - eps) * (k - 1 - eps)


def _image(mask: int, table) -> int:
    out = 0
    a = 0
    while mask:
        if mask & 1:
            out |= 1 << table[a]
        mask >>= 1
        a += 1
    return out


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _multichoose(n: int, r: int) -> int:
    return math.comb(n + r - 1, r)


@dataclass
class BlockPair:
    x_block: int
    y_block: int
    image: list  # image[mask] = projected mask


@dataclass
class LongCodeHypergraph:
    k: int
    p: Fraction
    source: LayeredInstance
    mode: str
    blocks: list = field(repr=False)  # (layer, var) per block
    offsets: list = field(repr=False)  # first vertex id of each block
    weights: list = field(repr=False)
    block_pairs: list = field(repr=False)
    edges: Optional[list] = field(default=None, repr=False)
    block_index: dict = field(default_factory=dict, repr=False)

    @property
    def vertex_count(self) -> int:
        return len(self.weights)

    def block_size(self, b: int) -> int:
        return 1 << self.source.range_size(self.blocks[b][0])

    def block_id(self, layer: int, var: int) -> int:
        return self.block_index[(layer, var)]

    def locate(self, v: int) -> tuple[int, int]:
        """``(block, mask)`` for a vertex id."""
        b = bisect_right(self.offsets, v) - 1
        return b, v - self.offsets[b]

    def vertex(self, b: int, mask: int) -> int:
        return self.offsets[b] + mask

    def relative_weight(self, b: int, masks) -> Fraction:
        """Weight of ``masks`` inside block ``b`` measured by ``mu_p`` (block total 1)."""
        n = self.source.range_size(self.blocks[b][0])
        p = self.p
        return sum((p ** m.bit_count() * (1 - p) ** (n - m.bit_count()) for m in masks), Fraction(0))

    def vertex_set(self, ids) -> VertexSet:
        return VertexSet.from_ids(ids, self.weights)

    def split(self, vs) -> dict[int, list[int]]:
        """Group vertex ids by block, as sorted mask lists."""
        out: dict[int, list[int]] = {}
        for v in sorted(vs):
            b, mask = self.locate(v)
            out.setdefault(b, []).append(mask)
        return out

    def iter_edges(self) -> Iterator[tuple[int, ...]]:
        """Every hyperedge as a sorted k-multiset of vertex ids, straight from the predicate."""
        for bp in self.block_pairs:
            ox, oy = self.offsets[bp.x_block], self.offsets[bp.y_block]
            full_y = self.block_size(bp.y_block) - 1
            for combo in combinations_with_replacement(range(self.block_size(bp.x_block)), self.k - 1):
                inter = -1
                for v in combo:
                    inter &= v
                head = tuple(ox + v for v in combo)
                for u in _submasks(full_y & ~bp.image[inter]):
                    yield head + (oy + u,)

    def count_edges(self) -> int:
        """Exact edge count without enumeration, via a superset Moebius transform."""
        total = 0
        r = self.k - 1
        for bp in self.block_pairs:
            nx = self.source.range_size(self.blocks[bp.x_block][0])
            ny = self.source.range_size(self.blocks[bp.y_block][0])
            size = 1 << nx
            # at_least[S] = multisets whose common intersection contains S
            exact = [_multichoose(1 << (nx - s.bit_count()), r) for s in range(size)]
            for bit in range(nx):
                for s in range(size):
                    if not s & (1 << bit):
                        exact[s] -= exact[s | (1 << bit)]
            for inter, cnt in enumerate(exact):
                if cnt:
                    total += cnt << (ny - bp.image[inter].bit_count())
        return total

    def to_json(self) -> dict:
        out = {
            "k": self.k,
            "p": frac_to_json(self.p),
            "mode": self.mode,
            "label": DESK_SCALE,
            "source": self.source.summary(),
            "vertices": [
                {
                    "id": self.offsets[b] + mask,
                    "layer": layer,
                    "var": var,
                    "mask": mask,
                    "weight": frac_to_json(self.weights[self.offsets[b] + mask]),
                }
                for b, (layer, var) in enumerate(self.blocks)
                for mask in range(self.block_size(b))
            ],
        }
        if self.mode == "explicit":
            out["edges"] = [list(e) for e in self.edges]
        else:
            out["predicate"] = "projection of AND(v_1..v_{k-1}) disjoint from u, per constrained block pair"
        return out

    @classmethod
    def from_json(cls, obj, path="<input>", caps: Caps = DEFAULT_CAPS) -> "LongCodeHypergraph":
        inst = LayeredInstance.from_json(require(obj, "source", dict, path), path, caps)
        k = require(obj, "k", int, path)
        p = frac_from_json(require(obj, "p", dict, path), path, "p")
        mode = require(obj, "mode", str, path)
        hg = build_hypergraph(inst, k, p, caps, mode)
        if "vertices" in obj and len(obj["vertices"]) != hg.vertex_count:
            raise ParseError(path, "vertices", f"expected {hg.vertex_count} vertices")
        return hg


def build_hypergraph(
    inst: LayeredInstance, k: int, p, caps: Caps = DEFAULT_CAPS, mode: str = "implicit"
) -> LongCodeHypergraph:
    if k < 3:
        raise DomainError(f"k must be at least 3, got {k}")
    p = check_bias(p)
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    for i in range(1, inst.l + 1):
        if inst.range_size(i) > caps.max_range:
            raise SizeError(f"layer {i} has range size {inst.range_size(i)}, cap is {caps.max_range}")
    blocks, offsets, weights = [], [], []
    index = {}
    for i in range(1, inst.l + 1):
        n = inst.range_size(i)
        scale = Fraction(1, inst.l * inst.layer_size(i))
        by_size = [scale * p**c * (1 - p) ** (n - c) for c in range(n + 1)]
        block_weights = [by_size[m.bit_count()] for m in range(1 << n)]
        for x in range(inst.layer_size(i)):
            index[(i, x)] = len(blocks)
            blocks.append((i, x))
            offsets.append(len(weights))
            weights.extend(block_weights)
    images: dict[tuple, list] = {}
    pairs = []
    for i, j in inst.pairs():
        for x, xp, mids in inst.constraints(i, j):
            table = tuple(inst.projection_table(i, j, mids))
            if table not in images:
                images[table] = [_image(m, table) for m in range(1 << inst.range_size(i))]
            pairs.append(BlockPair(index[(i, x)], index[(j, xp)], images[table]))
    hg = LongCodeHypergraph(k, p, inst, mode, blocks, offsets, weights, pairs, block_index=index)
    if mode == "explicit":
        count = hg.count_edges()
        if count > caps.max_edges:
            raise SizeError(f"{count} hyperedges exceed the explicit-mode cap {caps.max_edges}")
        hg.edges = list(hg.iter_edges())
    return hg


def is_independent(hg: LongCodeHypergraph, vs) -> tuple[bool, Optional[tuple[int, ...]]]:
    """Whether no hyperedge lies entirely inside ``vs``; otherwise one such edge."""
    members = vs.vertices if isinstance(vs, VertexSet) else frozenset(vs)
    if hg.mode == "explicit":
        for e in hg.edges:
            if all(v in members for v in e):
                return False, e
        return True, None
    per_block = hg.split(members)
    r = hg.k - 1
    for bp in hg.block_pairs:
        sx = per_block.get(bp.x_block)
        sy = per_block.get(bp.y_block)
        if not sx or not sy:
            continue
        # adding members only shrinks the intersection, so the largest
        # available number of distinct members is the binding case
        width = min(r, len(sx))
        checked = {}
        for combo in combinations(sx, width):
            inter = -1
            for v in combo:
                inter &= v
            img = bp.image[inter]
            if img in checked:
                continue
            hit = next((u for u in sy if not u & img), None)
            checked[img] = hit
            if hit is not None:
                padded = combo + (combo[-1],) * (r - width)
                ox, oy = hg.offsets[bp.x_block], hg.offsets[bp.y_block]
                return False, tuple(ox + v for v in padded) + (oy + hit,)
    return True, None


def completeness_witness(hg: LongCodeHypergraph, labeling: GameLabeling) -> VertexSet:
    """In every block, all subsets containing the lifted label of that variable."""
    lifted = lift_labeling(hg.source, labeling)
    ids = []
    for b, (layer, var) in enumerate(hg.blocks):
        bit = 1 << hg.source.value_index(layer, lifted.value(layer, var))
        base = hg.offsets[b]
        ids.extend(base + m for m in range(hg.block_size(b)) if m & bit)
    return hg.vertex_set(ids)


def disjointness_budget(epsilon, p, t: int) -> int:
    """``floor(log(eps/4) / log(1 - (1-p)^t))``: how many disjoint size-``t`` projections
    a set of relative weight ``eps/4`` can meet."""
    eps, p = float(Fraction(epsilon)), float(Fraction(p))
    if not 0 < eps < 1 or not 0 < p < 1 or t < 1:
        raise DomainError(f"need 0 < eps < 1, 0 < p < 1, t >= 1; got {epsilon}, {p}, {t}")
    miss = (1 - p) ** t
    if miss == 0.0:
        raise DomainError(f"(1-p)^t underflows for p={p}, t={t}")
    q = math.log(eps / 4) / math.log1p(-miss)
    return math.floor(q + 1e-9)


def soundness_fraction_bound(epsilon, p, t: int) -> float:
    """``1 / (t^2 log(eps/4) / log(1 - (1-p)^t))``, the guaranteed expected decoded fraction.

    Evaluated in log space; the result underflows to 0.0 when ``(1-p)^t`` is
    below double range, which is the correct limit.
    """
    eps, p = float(Fraction(epsilon)), float(Fraction(p))
    log_miss = t * math.log1p(-p)
    log_ratio = math.log(4 / eps)
    if log_miss < -700:
        # log(1 - x) ~ -x for tiny x
        return math.exp(log_miss - 2 * math.log(t) - math.log(log_ratio))
    return -math.log1p(-math.exp(log_miss)) / (t * t * log_ratio)


@dataclass
class DecodeReport:
    layers: tuple[int, int]
    hypotheses_met: bool
    density: Fraction
    density_target: Fraction
    t: int
    x_prime_sizes: dict
    small_sets: dict  # layer-i var -> B(x) as value-index mask
    assignment: dict  # layer-j var -> chosen value index
    constraints: int
    expected_fraction: Fraction
    bound: float
    all_singletons: bool

    def to_json(self) -> dict:
        return {
            "label": DESK_SCALE,
            "layers": list(self.layers),
            "hypotheses_met": self.hypotheses_met,
            "density": frac_to_json(self.density),
            "density_target": frac_to_json(self.density_target),
            "t": self.t,
            "x_prime_sizes": {str(k): v for k, v in sorted(self.x_prime_sizes.items())},
            "small_sets": {str(k): v for k, v in sorted(self.small_sets.items())},
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
            "constraints": self.constraints,
            "expected_fraction": frac_to_json(self.expected_fraction),
            "bound_float": self.bound,
            "all_singletons": self.all_singletons,
        }


def decode_independent_set(hg: LongCodeHypergraph, vs: VertexSet, epsilon) -> DecodeReport:
    """Turn a heavy independent set into a randomized labeling of two layers.

    1. Keep the variables whose block holds at least ``eps/2`` of ``vs`` (relative weight).
    2. Pick two layers with dense constraints between kept variables.  When
       at least ``ceil(8/eps)`` layers keep an ``eps/4`` share, the first pair
       reaching density ``eps^2/64`` is used; otherwise the densest pair among
       layers that keep an ``eps/4`` share, with ``hypotheses_met`` false.
    3. In each kept lower-layer block, intersect the first ``k-1`` members
       (repetition allowed) meeting in fewer than ``t`` values.
    4. Label each kept upper-layer variable by the value found in the most
       projected intersections, smallest value on ties.
    5. Report the exact expected satisfied fraction when each lower variable
       draws a uniform value from its intersection.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
    if vs.weight < eps:
        raise PreconditionError(f"set weight {vs.weight} is below epsilon {eps}")
    ok, edge = is_independent(hg, vs)
    if not ok:
        raise PreconditionError(f"set is not independent; contains edge {edge}")
    inst = hg.source
    per_block = hg.split(vs.vertices)
    kept = {
        b for b, masks in per_block.items() if hg.relative_weight(b, masks) >= eps / 2
    }
    kept_by_layer = {i: set() for i in range(1, inst.l + 1)}
    for b in kept:
        layer, var = hg.blocks[b]
        kept_by_layer[layer].add(var)
    heavy = [i for i in range(1, inst.l + 1) if len(kept_by_layer[i]) >= eps / 4 * inst.layer_size(i)]
    if len(heavy) < 2:
        raise DecodeError(f"only {len(heavy)} layer(s) keep an eps/4 share of heavy blocks")
    target = eps**2 / 64
    hypotheses_met = len(heavy) >= math.ceil(8 / eps)
    sets = [frozenset(kept_by_layer[i]) for i in heavy]
    if hypotheses_met:
        a, b, density = weak_density_pair(inst, WeakDensityQuery(eps / 4, tuple(heavy), tuple(sets)))
    else:
        densities = all_pair_densities(inst, heavy, sets)
        (a, b), density = max(sorted(densities.items()), key=lambda kv: kv[1])
    li, lj = heavy[a], heavy[b]
    if density == 0:
        raise DecodeError(f"no constraints between kept variables of layers {li} and {lj}")

    t = intersection_threshold(eps / 2, hg.k - 1, hg.p)
    n_i = inst.range_size(li)
    small = {}
    for x in sorted(kept_by_layer[li]):
        fam = SetFamily(n_i, tuple(per_block[hg.block_id(li, x)]))
        tup = find_small_intersection_tuple(fam, hg.k - 1, t)
        if tup is None:
            raise PropertyViolation(f"layer {li} var {x}: kept block is ({hg.k - 1})-wise {t}-intersecting")
        inter = -1
        for m in tup:
            inter &= m
        small[x] = inter

    relevant = [
        (x, xp, mids)
        for x, xp, mids in inst.constraints(li, lj)
        if x in small and xp in kept_by_layer[lj]
    ]
    tables = {}
    counts: dict[int, list[int]] = {}
    for x, xp, mids in relevant:
        table = tables.setdefault(mids, inst.projection_table(li, lj, mids))
        tally = counts.setdefault(xp, [0] * inst.range_size(lj))
        for a_val in set(table[a] for a in range(n_i) if small[x] >> a & 1):
            tally[a_val] += 1
    assignment = {}
    for xp in sorted(kept_by_layer[lj]):
        tally = counts.get(xp)
        assignment[xp] = 0 if tally is None else max(range(len(tally)), key=lambda a: (tally[a], -a))

    total = Fraction(0)
    for x, xp, mids in relevant:
        size = small[x].bit_count()
        if size:
            table = tables[mids]
            good = sum(1 for a in range(n_i) if small[x] >> a & 1 and table[a] == assignment[xp])
            total += Fraction(good, size)
    expected = total / len(relevant)
    return DecodeReport(
        layers=(li, lj),
        hypotheses_met=hypotheses_met,
        density=density,
        density_target=target,
        t=t,
        x_prime_sizes={i: len(kept_by_layer[i]) for i in range(1, inst.l + 1)},
        small_sets=small,
        assignment=assignment,
        constraints=len(relevant),
        expected_fraction=expected,
        bound=soundness_fraction_bound(eps, hg.p, t),
        all_singletons=all(m.bit_count() == 1 for m in small.values()),
    )
