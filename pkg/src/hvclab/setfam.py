"""Set families over a small ground set ``[n] = {0, ..., n-1}``.

Subsets are ``n``-bit integer masks (bit ``e`` set iff element ``e`` is a
member).  A :class:`SetFamily` stores its members as a sorted tuple of
distinct masks, so two families compare equal iff they hold the same sets.

Everything here is exact except :func:`intersection_threshold`, which needs
transcendental functions and evaluates them in floating point behind a guard
band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Optional, Sequence

from .errors import DomainError, ParseError
from .jsonio import require

MAX_GROUND_SET = 24
GUARD = 1e-12


@dataclass(frozen=True)
class SetFamily:
    n: int
    members: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.n <= MAX_GROUND_SET:
            raise DomainError(f"ground set size {self.n} outside [0, {MAX_GROUND_SET}]")
        members = tuple(sorted(set(self.members)))
        if len(members) != len(self.members):
            raise DomainError("duplicate members")
        limit = 1 << self.n
        for m in members:
            if not 0 <= m < limit:
                raise DomainError(f"member {m:#x} is not a subset of [{self.n}]")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, n: int, sets: Iterable[Iterable[int]]) -> "SetFamily":
        """Build from explicit element collections, dropping duplicates."""
        return cls(n, tuple({to_mask(s) for s in sets}))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, mask):
        return mask in set(self.members)

    def as_sets(self) -> list[frozenset[int]]:
        return [from_mask(m) for m in self.members]

    def size_profile(self) -> list[int]:
        """Sorted member cardinalities (the multiset left-shifting preserves)."""
        return sorted(m.bit_count() for m in self.members)

    def to_json(self) -> dict:
        return {"n": self.n, "members": list(self.members)}

    @classmethod
    def from_json(cls, obj, path="<input>") -> "SetFamily":
        n = require(obj, "n", int, path)
        members = require(obj, "members", list, path)
        for idx, m in enumerate(members):
            if isinstance(m, bool) or not isinstance(m, int):
                raise ParseError(path, f"members[{idx}]", f"expected int bitmask, got {m!r}")
        try:
            return cls(n, tuple(members))
        except DomainError as exc:
            raise ParseError(path, "members", str(exc)) from exc


def to_mask(elements: Iterable[int]) -> int:
    mask = 0
    for e in elements:
        mask |= 1 << e
    return mask


def from_mask(mask: int) -> frozenset[int]:
    out = []
    e = 0
    while mask:
        if mask & 1:
            out.append(e)
        mask >>= 1
        e += 1
    return frozenset(out)


def check_bias(p) -> Fraction:
    p = Fraction(p)
    if not 0 < p < 1:
        raise DomainError(f"bias p must lie in (0, 1), got {p}")
    return p


def mu_p(p, n: int, subset: int) -> Fraction:
    """Exact p-biased weight ``p^|F| (1-p)^(n-|F|)`` of one subset of ``[n]``."""
    p = check_bias(p)
    if subset >> n:
        raise DomainError(f"subset {subset:#x} is not contained in [{n}]")
    size = subset.bit_count()
    return p**size * (1 - p) ** (n - size)


def mu_p_family(p, family: SetFamily) -> Fraction:
    p = check_bias(p)
    total = Fraction(0)
    for m in family.members:
        total += mu_p(p, family.n, m)
    return total


def _shift_members(members: Sequence[int], i: int, j: int) -> list[int]:
    present = set(members)
    bi, bj = 1 << i, 1 << j
    out = []
    for m in members:
        if m & bj and not m & bi:
            moved = (m ^ bj) | bi
            if moved not in present:
                out.append(moved)
                continue
        out.append(m)
    return out


def ij_shift(family: SetFamily, i: int, j: int) -> SetFamily:
    """Apply the (i, j)-shift: replace ``j`` by ``i`` wherever that does not collide.

    Collisions are judged against the family *before* the shift, so the map
    is injective and the family keeps its size.
    """
    if not 0 <= i < j < family.n:
        raise DomainError(f"need 0 <= i < j < n, got i={i}, j={j}, n={family.n}")
    return SetFamily(family.n, tuple(_shift_members(family.members, i, j)))


def _element_sum(members: Iterable[int]) -> int:
    total = 0
    for m in members:
        e = 0
        while m:
            if m & 1:
                total += e
            m >>= 1
            e += 1
    return total


def left_shift_closure(family: SetFamily) -> SetFamily:
    """Sweep all (i, j) shifts in ascending lexicographic order until nothing moves.

    Terminates because every effective shift strictly lowers the sum, over all
    members, of their element values.
    """
    members = list(family.members)
    n = family.n
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for j in range(i + 1, n):
                shifted = _shift_members(members, i, j)
                if shifted != members:
                    members = shifted
                    changed = True
    return SetFamily(n, tuple(members))


def is_left_shifted(family: SetFamily) -> bool:
    members = set(family.members)
    return all(
        set(_shift_members(family.members, i, j)) == members
        for i in range(family.n)
        for j in range(i + 1, family.n)
    )


def _tuples(members, s, repeat):
    if repeat:
        return combinations_with_replacement(members, s)
    return combinations(members, s)


def _intersection(masks) -> int:
    acc = -1
    for m in masks:
        acc &= m
    return acc


def find_small_intersection_tuple(
    family: SetFamily, s: int, t: int, repeat: bool = True
) -> Optional[tuple[int, ...]]:
    """First ``s``-tuple of members (lexicographic in member order) meeting in fewer than ``t`` elements.

    With ``repeat=True`` a member may occur several times in the tuple, which
    matches the convention of :func:`is_s_wise_t_intersecting`.  With
    ``repeat=False`` only distinct members are combined.
    """
    if s < 1:
        raise DomainError("s must be at least 1")
    for tup in _tuples(family.members, s, repeat):
        if _intersection(tup).bit_count() < t:
            return tup
    return None


def is_s_wise_t_intersecting(
    family: SetFamily, s: int, t: int
) -> tuple[bool, Optional[tuple[int, ...]]]:
    """Whether every ``s`` members share at least ``t`` elements.

    Tuples may repeat members.  Repetition never shrinks an intersection, so
    for families with at least ``s`` members this agrees with the
    distinct-tuple reading.  Returns ``(ok, witness)`` where ``witness`` is a
    violating tuple when ``ok`` is false.
    """
    if s < 1 or t < 0:
        raise DomainError(f"need s >= 1 and t >= 0, got s={s}, t={t}")
    if t == 0:
        return True, None
    witness = find_small_intersection_tuple(family, s, t)
    return witness is None, witness


def prefix_witness(subset: int, s: int, t: int, n: Optional[int] = None) -> Optional[int]:
    """Smallest ``j >= 0`` with ``|F ∩ [t + s j]| >= t + (s - 1) j``.

    Only ``j <= (n - t) / s`` is searched.  On a ground set of size ``n`` a
    larger ``j`` can never succeed when all smaller ones failed, because the
    prefix already holds all of ``F`` while the requirement keeps growing.
    ``n`` defaults to the bit length of ``subset``.
    """
    if s < 1 or t < 0:
        raise DomainError(f"need s >= 1 and t >= 0, got s={s}, t={t}")
    if n is None:
        n = subset.bit_length()
    j = 0
    while t + s * j <= n:
        prefix = (1 << (t + s * j)) - 1
        if (subset & prefix).bit_count() >= t + (s - 1) * j:
            return j
        j += 1
    return None


@dataclass(frozen=True)
class ThresholdQuery:
    epsilon: Fraction
    s: int
    p: Fraction

    @property
    def delta_gap(self) -> Fraction:
        return Fraction(self.s - 1, self.s) - Fraction(self.p)


def tail_sum_bound(t: int, s: int, delta: float) -> float:
    """``sum_{j>=0} exp(-2 (t + s j) delta^2)`` in closed form."""
    return math.exp(-2 * t * delta * delta) / -math.expm1(-2 * s * delta * delta)


def intersection_threshold(epsilon, s: int, p) -> int:
    """Smallest ``t >= 1`` for which ``exp(-2 t d^2) / (1 - exp(-2 s d^2)) < epsilon``, ``d = (s-1)/s - p``.

    Any ``s``-wise ``t``-intersecting family has p-biased weight below
    ``epsilon`` for this ``t``.  When the inequality holds by less than
    ``GUARD`` the result is bumped by one so float noise cannot hand back a
    ``t`` that is too small.
    """
    q = ThresholdQuery(Fraction(epsilon), s, Fraction(p))
    if not 0 < q.epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {q.epsilon}")
    if s < 2:
        raise DomainError(f"s must be at least 2, got {s}")
    if not 0 < q.p < 1:
        raise DomainError(f"p must lie in (0, 1), got {q.p}")
    if q.delta_gap <= 0:
        raise DomainError(f"need p < (s-1)/s = {Fraction(s - 1, s)}, got p={q.p}")
    d = float(q.delta_gap)
    eps = float(q.epsilon)
    # closed-form estimate, then settle on the exact minimum by local search
    denom = -math.expm1(-2 * s * d * d)
    t = max(1, math.floor(-math.log(eps * denom) / (2 * d * d)))
    while t > 1 and tail_sum_bound(t - 1, s, d) < eps:
        t -= 1
    while not tail_sum_bound(t, s, d) < eps:
        t += 1
    if eps - tail_sum_bound(t, s, d) < GUARD:
        t += 1
    return t


def binomial_upper_tail(n: int, p, k: int) -> Fraction:
    """Exact ``Pr[Bin(n, p) >= k]``."""
    p = Fraction(p)
    return sum(
        (Fraction(math.comb(n, i)) * p**i * (1 - p) ** (n - i) for i in range(max(k, 0), n + 1)),
        Fraction(0),
    )
