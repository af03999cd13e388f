
import pytest

from treeshift import PreconditionError, ResourceBudgetError
from treeshift import oracles
from treeshift.fixtures import full_shift, random_tsft, tree
from treeshift.limits import (
    approx_omega,
    approx_omega_cps,
    approx_omega_followers,
    approx_omega_ray,
    check_limit_relations,
    enumerate_cps,
    invariance_surrogate,
    is_cps,
    is_invariant,
    maximal_vectors,
)
from treeshift.shift_space import enumerate_windows, random_point, random_ray


@pytest.fixture(scope="module")
def example(tu):
    return tu, tu.uniform(tu.root, 10, "0")


def zeros(tu, n):
    return [tu.uniform(eta, n, "0") for eta in tu.family]


def test_upper_example_sets(example):
    tu, t = example
    z1, z2 = zeros(tu, 3)
    assert approx_omega(tu, t, 3).members == {z1, z2}
    assert approx_omega_ray(tu, t, (1,) * 10, 3).members == {z2}
    assert approx_omega_ray(tu, t, (0,) * 10, 3).members == {z1}
    assert approx_omega_followers(tu, t, (1,) * 10, 3).members == {z2}


def test_upper_example_cps(example):
    tu, t = example
    z1, z2 = zeros(tu, 2)
    vecs = approx_omega_cps(tu, t, 2)
    assert {v.components for v in maximal_vectors(vecs)} == {(z1, z2)}
    assert {v.components for v in vecs} <= {(z1,), (z2,), (z1, z2)}


def test_invariance_examples(example):
    tu, t = example
    assert is_invariant(tu, approx_omega(tu, t, 3)).invariant
    rep = is_invariant(tu, approx_omega_ray(tu, t, (0,) * 10, 3))
    assert not rep.invariant
    assert rep.witnesses == [(tu.uniform(tu.root, 3, "0"), 1)]
    lang = enumerate_windows(full_shift("upper"), tu.root, 2) + enumerate_windows(full_shift("upper"), tu.family[1], 2)
    assert is_invariant(tu, lang).invariant


def test_example_relations(example):
    tu, t = example
    rep = check_limit_relations(full_shift("upper"), t, (1,) * 10, 3)
    assert rep.ok
    # the ray set uses only the non-root type
    assert {w.eta for w in approx_omega_ray(tu, t, (1,) * 10, 3).members} == {tu.family[1]}


def test_uniform_on_t2(t2):
    t = t2.uniform(t2.root, 7, "0")
    assert approx_omega(t2, t, 2).members == {t2.uniform(t2.root, 2, "0")}


def test_horizon_guard(t2):
    with pytest.raises(PreconditionError):
        approx_omega(t2, t2.uniform(t2.root, 6, "0"), 3)


def brute_all(tr, t, n):
    N = t.depth
    full = tr.as_dict(t)
    out = set()
    for g in full:
        if n < len(g) <= N - n:
            ty = tr.type_after(t.eta, g)
            out.add(tr.window(ty, n, {h: full[g + h] for h in tr.delta(ty, n)}))
    return out


def test_omega_matches_brute_scan(rng):
    for _ in range(15):
        T = random_tsft(rng)
        t = random_point(T, T.tree.root, 9, rng)
        p = random_ray(T.tree, 9, rng)
        tr = T.tree
        assert approx_omega(tr, t, 2).members == brute_all(tr, t, 2)
        fol = {w for w in brute_all(tr, t, 2)}
        assert approx_omega_ray(tr, t, p, 2).members <= approx_omega_followers(tr, t, p, 2).members <= fol


def test_followers_brute(rng):
    T = random_tsft(rng)
    tr = T.tree
    t = random_point(T, tr.root, 9, rng)
    p = random_ray(tr, 9, rng)
    full = tr.as_dict(t)
    want = set()
    for g in full:
        if 2 < len(g) <= 7 and any(g[:k] == p[:k] for k in range(3, len(g) + 1)):
            ty = tr.type_after(tr.root, g)
            want.add(tr.window(ty, 2, {h: full[g + h] for h in tr.delta(ty, 2)}))
    assert approx_omega_followers(tr, t, p, 2).members == want


def test_cps_examples(t2, tu):
    assert [str(c) for c in enumerate_cps(t2, 1)] == ["{e}", "{1, 2}"]
    assert len(enumerate_cps(t2, 2)) == 5
    sets = {c.vertices for c in enumerate_cps(tu, 2)}
    assert frozenset({(0,), (1, 1)}) in sets
    assert frozenset({(0,)}) not in sets
    assert not is_cps(tu, [(0,)])
    assert is_cps(tu, [(0,), (1, 1)])


@pytest.mark.parametrize("name", ["full2", "golden", "upper"])
def test_cps_oracle(name):
    tr = tree(name)
    for d in range(4):
        got = {c.vertices for c in enumerate_cps(tr, d)}
        assert got == oracles.complete_prefix_sets(tr.matrix, d)
        assert all(is_cps(tr, c) for c in got)


def test_cps_counts_frozen(t2):
    # values confirmed by the brute-force subset search
    assert [len(enumerate_cps(t2, d)) for d in range(4)] == [1, 2, 5, 26]


def test_cps_cap(t2):
    with pytest.raises(ResourceBudgetError):
        enumerate_cps(t2, 9)


def test_relations_random(rng):
    for _ in range(10):
        T = random_tsft(rng)
        t = random_point(T, T.tree.root, 9, rng)
        p = random_ray(T.tree, 9, rng)
        assert check_limit_relations(T, t, p, 2).ok
        assert invariance_surrogate(T.tree, t, 2).invariant
        assert invariance_surrogate(T.tree, t, 2, p).invariant
