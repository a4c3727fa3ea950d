import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from hvclab.caps import Caps
from hvclab.errors import DomainError, PreconditionError, PropertyViolation, SizeError
from hvclab.game import GameLabeling, brute_force_optimum, gen_planted, gen_scrambled, satisfied_fraction
from hvclab.layers import (
    LayeredInstance,
    LayeredLabeling,
    WeakDensityQuery,
    build_layered,
    count_walks,
    decode_to_game,
    lift_labeling,
    project_assignment,
    random_subsets,
    random_walk_estimate,
    satisfied_fraction_between,
    weak_density_pair,
)

import oracles


@pytest.fixture(scope="module")
def planted():
    g, plant = gen_planted(4, 2, 3, 2, 1, seed=3)
    return g, plant, build_layered(g, 3)


def test_layer_shapes(planted):
    g, _, inst = planted
    assert [inst.layer_size(i) for i in (1, 2, 3)] == [2 * 16, 4 * 4, 8]
    assert [inst.range_size(i) for i in (1, 2, 3)] == [2 * 9, 4 * 3, 8]


def test_index_round_trip(planted):
    _, _, inst = planted
    for i in (1, 2, 3):
        for x in range(inst.layer_size(i)):
            assert inst.var_index(i, inst.variable(i, x)) == x
        for a in range(inst.range_size(i)):
            assert inst.value_index(i, inst.value_vector(i, a)) == a


@pytest.mark.parametrize("seed", range(6))
def test_constraints_match_definition(seed):
    y, z, d, l = [(2, 1, 1, 3), (4, 2, 1, 2), (3, 3, 2, 2), (4, 2, 1, 3), (2, 2, 1, 4), (3, 3, 1, 3)][seed]
    g, _ = gen_planted(y, z, 2, 2, d, seed)
    inst = build_layered(g, l)
    for i, j in inst.pairs():
        got = {(x, xp) for x, xp, _ in inst.phi[(i, j)]}
        assert len(got) == len(inst.phi[(i, j)])
        want = set()
        for xi in oracles.tuples_of_layer(g, l, i):
            for xj in oracles.tuples_of_layer(g, l, j):
                if oracles.layered_constraint_exists(g, l, i, xi, j, xj):
                    want.add((inst.var_index(i, xi), inst.var_index(j, xj)))
        assert got == want


def test_projection_is_coordinatewise(planted):
    g, _, inst = planted
    x, xp, mids = inst.phi[(1, 3)][5]
    a = (1, 2, 0)
    b = project_assignment(inst, 1, x, 3, xp, a)
    cons = [g.constraints[m] for m in mids]
    assert b == (1, cons[0].table[2], cons[1].table[0])


def test_projection_without_constraint_raises(planted):
    _, _, inst = planted
    linked = {xp for x, xp, _ in inst.phi[(1, 2)] if x == 0}
    free = next(xp for xp in range(inst.layer_size(2)) if xp not in linked)
    with pytest.raises(DomainError):
        project_assignment(inst, 1, 0, 2, free, (0, 0, 0))


def test_lift_satisfies_every_pair(planted):
    _, plant, inst = planted
    lab = lift_labeling(inst, plant)
    for i, j in inst.pairs():
        assert satisfied_fraction_between(inst, lab, i, j) == 1


def test_lift_requires_satisfying_plant(planted):
    g, plant, inst = planted
    bad = GameLabeling(tuple((v + 1) % g.ry for v in plant.y_labels), plant.z_labels)
    if satisfied_fraction(g, bad) < 1:
        with pytest.raises(PreconditionError):
            lift_labeling(inst, bad)


def test_decode_recovers_plant_value(planted):
    g, plant, inst = planted
    lab = lift_labeling(inst, plant)
    for i, j in inst.pairs():
        res = decode_to_game(inst, lab, i, j)
        assert res.fraction == 1 == satisfied_fraction(g, res.labeling)


def test_decode_never_beats_layered_value_bound():
    # a decoded labeling is a genuine base labeling, so its value is at most the optimum
    g, _ = gen_planted(4, 2, 3, 2, 1, 8)
    s = gen_scrambled(g, 9)
    inst = build_layered(s, 2)
    rng = random.Random(0)
    lab = LayeredLabeling(tuple(
        tuple(inst.value_vector(i, rng.randrange(inst.range_size(i))) for _ in range(inst.layer_size(i)))
        for i in (1, 2)
    ))
    res = decode_to_game(inst, lab, 1, 2)
    assert res.fraction == satisfied_fraction(s, res.labeling) <= brute_force_optimum(s)[0]


def test_layer_size_cap():
    g, _ = gen_planted(4, 2, 2, 2, 1, 0)
    with pytest.raises(SizeError, match="layer 1"):
        build_layered(g, 3, Caps(max_layer_size=20))


def test_empty_constraint_set_warns():
    g, plant = gen_planted(2, 1, 2, 2, 1, 0)
    inst = build_layered(g, 2)
    inst.phi[(1, 2)] = []
    lab = lift_labeling(inst, plant)
    with pytest.warns(RuntimeWarning):
        assert satisfied_fraction_between(inst, lab, 1, 2) == 1


def test_json_round_trip(planted):
    _, plant, inst = planted
    again = LayeredInstance.from_json(inst.summary())
    assert again.phi == inst.phi
    lab = lift_labeling(inst, plant)
    assert LayeredLabeling.from_json(lab.to_json()) == lab


def density_instance():
    g, _ = gen_planted(2, 2, 2, 2, 1, 4)
    return build_layered(g, 6)


def test_weak_density_finds_pair_and_counts_exactly():
    inst = density_instance()
    layers = (1, 3, 4, 6)
    sets = random_subsets(inst, layers, Fraction(1, 2), seed=1)
    res = weak_density_pair(inst, WeakDensityQuery(Fraction(1, 2), layers, tuple(sets)))
    i, j = layers[res.j], layers[res.j_prime]
    hits = sum(1 for x, xp, _ in inst.phi[(i, j)] if x in sets[res.j] and xp in sets[res.j_prime])
    assert res.density == Fraction(hits, len(inst.phi[(i, j)])) >= Fraction(1, 16)


def test_weak_density_rejects_bad_queries():
    inst = density_instance()
    half = frozenset(range(inst.layer_size(1) // 2))
    with pytest.raises(DomainError, match="ceil"):
        weak_density_pair(inst, WeakDensityQuery(Fraction(1, 2), (1, 2, 3), (half,) * 3))
    with pytest.raises(DomainError, match="increasing"):
        weak_density_pair(inst, WeakDensityQuery(Fraction(1, 2), (1, 1, 2, 3), (half,) * 4))
    with pytest.raises(DomainError, match="delta"):
        weak_density_pair(inst, WeakDensityQuery(Fraction(1, 2), (1, 2, 3, 4), (frozenset(),) * 4))


def test_weak_density_violation_is_reported():
    # doctored instance: every constraint avoids the chosen sets, so the search must fail loudly
    inst = density_instance()
    layers = (1, 2, 3, 4)
    sets = tuple(frozenset(range(inst.layer_size(i) // 2)) for i in layers)
    for i, j in inst.pairs():
        inst.phi[(i, j)] = [(inst.layer_size(i) - 1, inst.layer_size(j) - 1, ())]
    with pytest.raises(PropertyViolation, match="no pair"):
        weak_density_pair(inst, WeakDensityQuery(Fraction(1, 2), layers, sets))


def test_walk_counts(planted):
    _, _, inst = planted
    # every variable of a layer has the same number of successors
    assert count_walks(inst, 1, 2) == len(inst.phi[(1, 2)])
    assert count_walks(inst, 1, 3) == len(inst.phi[(1, 2)]) * len(inst.phi[(2, 3)]) // inst.layer_size(2)


def test_walk_estimate_independent_of_executor(planted):
    _, _, inst = planted
    sets = [frozenset(range(0, inst.layer_size(i), 2)) for i in (1, 2, 3)]
    serial = random_walk_estimate(inst, (1, 2, 3), sets, seed=5, trials=3000)
    with ThreadPoolExecutor(3) as pool:
        threaded = random_walk_estimate(inst, (1, 2, 3), sets, seed=5, trials=3000, executor=pool)
    assert serial == threaded
    assert abs(float(serial["single"][0]) - 0.5) < 0.06
