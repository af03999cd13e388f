import itertools
import random
from fractions import Fraction

import pytest

from treeshift import PreconditionError, UnresolvedDistance, Window
from treeshift.chains import (
    build_chain_graph,
    closedness_transfer,
    hausdorff,
    is_pict,
    is_projected_chain,
    pict_to_omega_p,
    shortest_chain,
)
from treeshift.fixtures import full_shift, tree
from treeshift.limits import approx_omega_ray
from treeshift.shift_space import random_point


def zeros(tu, n):
    return [tu.uniform(eta, n, "0") for eta in tu.family]


def test_exact_orbit_is_a_chain(rng):
    T = full_shift("golden")
    tg = T.tree
    s = random_point(T, tg.root, 9, rng)
    word = (0, 0, 1, 0)
    pts = [tg.subwindow(s, word[:k], 4) for k in range(len(word) + 1)]
    assert is_projected_chain(tg, pts, word, Fraction(1, 2)).ok


def test_chain_type_bookkeeping(tu):
    z1, z2 = zeros(tu, 3)
    word = (0, 0, 1, 1)
    assert is_projected_chain(tu, [z1, z1, z1, z2, z2], word, Fraction(1, 2)).ok
    bad = is_projected_chain(tu, [z1, z1, z2, z2, z2], word, Fraction(1, 2))
    assert not bad.ok and bad.failed_at == 1


def test_language_graph_complete_on_t2():
    t2 = tree("full2")
    Y = [Window(t2.root, 2, lab) for lab in itertools.product("01", repeat=7)]
    # d <= 2 always, so any eps above 2 links every pair
    G = build_chain_graph(t2, Y, Fraction(4))
    assert G.number_of_edges() == 128 * 128
    # eps = 1 asks for agreement on Delta_1 after the shift
    G1 = build_chain_graph(t2, Y, Fraction(1))
    for y in Y[::9]:
        heads = {t2.restrict(t2.shift(y, (i,)), 1) for i in (0, 1)}
        assert set(G1.successors(y)) == {z for z in Y if t2.restrict(z, 1) in heads}
        assert G1.out_degree(y) == 16 * len(heads)


def test_upper_pair_graph(tu):
    z1, z2 = zeros(tu, 3)
    G = build_chain_graph(tu, [z1, z2], Fraction(1, 2))
    assert set(G.edges) == {(z1, z1), (z1, z2), (z2, z2)}
    res = is_pict(tu, [z1, z2], Fraction(1, 2))
    assert not res and res.counterexample == (z2, z1)


def test_tiny_eps_gives_no_edges(t2):
    y = t2.window(t2.root, 2, {v: "1" if len(v) == 1 else "0" for v in t2.delta(t2.root, 2)})
    G = build_chain_graph(t2, [y], Fraction(1))
    assert G.number_of_edges() == 0
    assert not is_pict(t2, [y], Fraction(1))


def test_eps_too_fine_is_unresolved(t2):
    with pytest.raises(UnresolvedDistance):
        is_pict(t2, [t2.uniform(t2.root, 2, "0")], Fraction(1, 8))


def test_singleton_fixed_point(t2):
    assert is_pict(t2, [t2.uniform(t2.root, 3, "1")], Fraction(1, 2))


def test_reducible_guard(tu):
    with pytest.raises(PreconditionError):
        is_pict(tu, zeros(tu, 2), Fraction(1, 2), require_irreducible=True)


def test_shortest_chain(tu):
    z1, z2 = zeros(tu, 3)
    G = build_chain_graph(tu, [z1, z2], Fraction(1, 2))
    assert shortest_chain(G, z1, {z2}) == [(z1, 1), (z2, None)]
    assert shortest_chain(G, z2, {z1}) is None


def test_hausdorff_and_transfer(t2):
    Z = [t2.uniform(t2.root, 5, "0")]
    assert not hausdorff(t2, Z, Z).resolved
    assert closedness_transfer(t2, Z, Z, Fraction(1, 2)) == "holds"
    far = [t2.uniform(t2.root, 5, "1")]
    assert hausdorff(t2, far, Z).value == 2
    assert closedness_transfer(t2, far, Z, Fraction(1, 2)) == "not-applicable"
    labels = list(Z[0].labels)
    labels[-1] = "1"
    near = [Window(t2.root, 5, tuple(labels)), Z[0]]
    assert hausdorff(t2, near, Z).below(Fraction(1, 12))
    assert closedness_transfer(t2, near, Z, Fraction(1, 2)) == "holds"


def roundtrip(T, Y, N, R=3):
    c = pict_to_omega_p(T, Y, R, N, rng=random.Random(0))
    n = Y[0].depth
    got = approx_omega_ray(T.tree, c.t, c.ray, n).members
    return c, got


def test_construct_upper_pair(tu):
    Y = zeros(tu, 1)
    c, got = roundtrip(full_shift("upper"), Y, 24)
    assert got == set(Y)
    assert c.in_language and c.telescoping_ok


def test_construct_singleton(tu):
    Y = [tu.uniform(tu.family[1], 1, "0")]
    c, got = roundtrip(full_shift("upper"), Y, 12)
    assert got == set(Y)
    assert set(c.ray[c.transient:]) == {1}


def test_construct_full_language(t2):
    Y = [Window(t2.root, 1, lab) for lab in itertools.product("01", repeat=3)]
    c, got = roundtrip(full_shift("full2"), Y, 24)
    assert got == set(Y)


def test_construct_rejects_out_of_language(shifts):
    T = shifts["full2-golden-g1"]
    t2 = T.tree
    bad = t2.window(t2.root, 1, {(): "1", (0,): "1", (1,): "0"})
    with pytest.raises(PreconditionError):
        pict_to_omega_p(T, [bad], 3, 10)
