import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dclc.polygon import (
    SIGNS,
    U,
    Composition,
    DomainError,
    apply_transform,
    build_bipartite,
    build_polygon,
    compose,
    consistency_check,
    entangled_effect,
    entangled_state,
    local_transform_bipartite,
    pairing,
    probability,
    product_effect,
    product_state,
    radius,
    swap,
    transform,
    transform_index,
)

ns = st.integers(3, 12)


def test_build_examples():
    m = build_polygon(4)
    assert np.allclose(m.states[0], [2 ** 0.25, 0, 1], atol=1e-12)
    assert np.allclose(m.complements[1], m.effects[3], atol=1e-12)
    with pytest.raises(DomainError):
        build_polygon(2)


@given(ns)
def test_states_and_normalization(n):
    m = build_polygon(n)
    assert abs(m.r - math.sqrt(1 / math.cos(math.pi / n))) < 1e-15
    for w in m.states:
        assert abs(probability(U, w) - 1) < 1e-12


@given(st.sampled_from([4, 6, 8, 10, 12]))
def test_even_complement_is_an_index_shift(n):
    m = build_polygon(n)
    for j in range(n):
        assert np.allclose(m.complements[j], m.effects[m.complement_index(j)], atol=1e-12)


def test_complement_index_only_for_even():
    with pytest.raises(DomainError):
        build_polygon(5).complement_index(0)


@given(ns)
def test_single_system_probabilities_in_unit_interval(n):
    m = build_polygon(n)
    P = m.single_effects @ m.states.T
    assert P.min() >= -1e-12 and P.max() <= 1 + 1e-12


def test_probability_examples_odd():
    m = build_polygon(5)
    assert abs(probability(m.effects[0], m.states[0]) - 1) < 1e-12
    P = m.effects @ m.states.T
    assert abs(P.min()) < 1e-12


# -- dihedral group -------------------------------------------------------------------


def test_transform_examples():
    assert np.allclose(transform(4, 0, 1), np.eye(3))
    m = build_polygon(4)
    assert np.allclose(apply_transform(transform(4, 1, 1), m.states[0]), m.states[1], atol=1e-12)


@pytest.mark.parametrize("n", range(3, 13))
def test_dihedral_closure_table(n):
    m = build_polygon(n)
    T = m.transforms
    identity = (0, 1)
    for t1, t2 in itertools.product(T, repeat=2):
        prod = T[t1] @ T[t2]
        t3 = compose(n, t1, t2)
        assert t3 in T
        assert np.allclose(prod, T[t3], atol=1e-12)
        assert transform_index(n, prod) == t3
    for t in T:
        assert any(compose(n, t, s) == identity for s in T)


@given(ns, st.data())
def test_transforms_permute_vertices(n, data):
    m = build_polygon(n)
    k = data.draw(st.integers(0, n - 1))
    p = data.draw(st.sampled_from(SIGNS))
    image = m.states @ transform(n, k, p).T
    matches = [[np.allclose(a, b, atol=1e-12) for b in m.states] for a in image]
    assert sorted(row.index(True) for row in matches) == list(range(n))


# -- bipartite ---------------------------------------------------------------------------


def test_product_examples():
    m = build_polygon(5)
    w = m.states
    assert abs(pairing(product_effect(U, U), product_state(w[0], w[3])) - 1) < 1e-12
    assert abs(pairing(product_effect(m.effects[0], U), product_state(w[0], w[2])) - probability(m.effects[0], w[0])) < 1e-12
    assert abs(pairing(product_effect(m.effects[0], m.effects[0]), product_state(w[0], w[0])) - 1) < 1e-12


@given(ns, st.data())
def test_pairing_factorizes(n, data):
    m = build_polygon(n)
    g = m.single_effects
    ia, ib = data.draw(st.integers(0, len(g) - 1)), data.draw(st.integers(0, len(g) - 1))
    ja, jb = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    lhs = pairing(product_effect(g[ia], g[ib]), product_state(m.states[ja], m.states[jb]))
    rhs = probability(g[ia], m.states[ja]) * probability(g[ib], m.states[jb])
    assert abs(lhs - rhs) < 1e-12


@given(ns, st.data())
def test_local_action_on_products(n, data):
    m = build_polygon(n)
    ta = transform(n, data.draw(st.integers(0, n - 1)), data.draw(st.sampled_from(SIGNS)))
    tb = transform(n, data.draw(st.integers(0, n - 1)), data.draw(st.sampled_from(SIGNS)))
    wa, wb = m.states[data.draw(st.integers(0, n - 1))], m.states[data.draw(st.integers(0, n - 1))]
    lhs = local_transform_bipartite(ta, tb, product_state(wa, wb))
    assert np.allclose(lhs, product_state(ta @ wa, tb @ wb), atol=1e-12)
    assert np.allclose(swap(product_state(wa, wb)), product_state(wb, wa))


def test_identity_local_pair():
    W = entangled_state(5, 2, 1, 1, -1)
    assert np.allclose(local_transform_bipartite(np.eye(3), np.eye(3), W), W)


def test_swap_of_one_product_state_is_locally_reachable():
    m = build_polygon(4)
    W = product_state(m.states[0], m.states[1])
    T = m.transforms
    assert np.allclose(local_transform_bipartite(T[(1, 1)], T[(3, 1)], W), swap(W), atol=1e-12)


@pytest.mark.parametrize("n", [4, 5])
def test_swap_map_is_not_a_local_pair(n):
    """No single local pair agrees with the swap on all product states."""
    m = build_polygon(n)
    T = m.transforms
    prods = [product_state(a, b) for a in m.states for b in m.states]
    for ta, tb in itertools.product(T.values(), repeat=2):
        assert not all(
            np.allclose(local_transform_bipartite(ta, tb, W), swap(W), atol=1e-9) for W in prods
        )


def test_entangled_examples():
    for k in range(5):
        W = entangled_state(5, k, k, 1, 1)
        assert np.allclose(W[:2, :2], np.eye(2), atol=1e-12)
    m = build_polygon(4)
    p = pairing(product_effect(m.effects[0], m.effects[0]), entangled_state(4, 0, 0, 1, 1))
    assert -1e-12 <= p <= 1 + 1e-12
    with pytest.raises(DomainError):
        entangled_state(4, 4, 0, 1, 1)
    with pytest.raises(DomainError):
        entangled_effect(4, 0, 0, 0, 1)


@pytest.mark.parametrize("n", range(3, 13))
def test_entangled_states_normalized(n):
    for k, l, p, q in itertools.product(range(n), range(n), SIGNS, SIGNS):
        W = entangled_state(n, k, l, p, q)
        assert abs(W[2, 2] - 1) < 1e-15
        assert abs(pairing(product_effect(U, U), W) - 1) < 1e-12


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_entangled_orbit_closure(n):
    """Local pairs map the seed state onto exactly the closed-form family."""
    T = build_polygon(n).transforms
    seed = entangled_state(n, 0, 0, 1, 1)
    orbit = [local_transform_bipartite(T[a], T[b], seed) for a in T for b in T]
    family = [entangled_state(n, k, l, p, q) for k, l, p, q in itertools.product(range(n), range(n), SIGNS, SIGNS)]
    key = lambda M: tuple(np.round(M, 9).ravel() + 0.0)
    assert {key(M) for M in orbit} == {key(M) for M in family}
    # the closed forms are T_k^p W00 (T_l^q)^T
    for k, l, p, q in itertools.product(range(n), range(n), SIGNS, SIGNS):
        direct = local_transform_bipartite(T[(k, p)], T[(l, q)], seed)
        assert np.allclose(direct, entangled_state(n, k, l, p, q), atol=1e-12)


@pytest.mark.parametrize("n", range(3, 11))
@pytest.mark.parametrize("comp", ["type1", "type2"])
def test_consistency(n, comp):
    assert consistency_check(build_bipartite(n, comp))


def test_corrupted_effect_fails_consistency():
    model = build_bipartite(4, Composition.TYPE_II)
    key = next(k for k in model.effects if k[0] == "ent")
    model.effects[key] = 2 * model.effects[key]
    assert not consistency_check(model)


def test_model_contents():
    m1 = build_bipartite(5, "type1")
    assert sum(k[0] == "ent" for k in m1.states) == 4 * 25
    assert not any(k[0] == "ent" for k in m1.effects)
    m2 = build_bipartite(4, "TYPE-II")
    assert sum(k[0] == "club" for k in m2.effects) == 16
    assert not any(k[0] == "ent" for k in m2.states)
    d = m2.as_dict()
    assert d["composition"] == "type2" and d["parity"] == "even"


def test_radius_values():
    assert abs(radius(4) - 2 ** 0.25) < 1e-15
    assert abs(radius(3) - math.sqrt(2)) < 1e-15
