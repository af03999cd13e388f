import random

import pytest

from treeshift import EmptyShiftError, FillError, InputError, ResourceBudgetError, TsftHandle, Window
from treeshift import oracles
from treeshift.fixtures import constraint_patterns, full_shift, random_tsft, tree
from treeshift.shift_space import (
    ForbiddenSet,
    enumerate_windows,
    fill_window,
    live_blocks,
    random_point,
    window_allowed,
)

A = ("0", "1")


def golden_on_t2(paths=((0,), (1,))):
    t2 = tree("full2")
    rules = [(t2.root, {(): "1", p: "1"}) for p in paths]
    return TsftHandle(t2, ForbiddenSet(A, constraint_patterns(t2, A, rules)))


def w2(root, left, right):
    t2 = tree("full2")
    return t2.window(t2.root, 1, {(): root, (0,): left, (1,): right})


def test_window_allowed_examples():
    T = golden_on_t2(((0,),))
    assert not window_allowed(T.tree, w2("1", "1", "1"), T.forbidden)
    assert window_allowed(T.tree, w2("1", "0", "1"), T.forbidden)


def test_enumeration_counts(tu):
    assert len(enumerate_windows(full_shift("full2"), tree("full2").root, 1)) == 8
    assert len(enumerate_windows(golden_on_t2(), tree("full2").root, 1)) == 5
    assert len(enumerate_windows(full_shift("upper"), tu.family[1], 2)) == 8


def test_enumeration_matches_brute_filter():
    T = golden_on_t2()
    t2 = T.tree
    for n in range(4):
        brute = [w for w in oracles_all(t2, t2.root, n)
                 if oracles.window_allowed(t2.matrix, w, T.forbidden.patterns)
                 and oracles.extendable(t2.matrix, w, T.forbidden.patterns, 1, A)]
        assert set(enumerate_windows(T, t2.root, n)) == set(brute)


def oracles_all(tr, eta, n):
    import itertools
    return [Window(eta, n, lab) for lab in itertools.product(A, repeat=tr.delta_size(eta, n))]


def test_budget_is_explicit():
    with pytest.raises(ResourceBudgetError):
        enumerate_windows(full_shift("full2"), tree("full2").root, 5)
    assert len(enumerate_windows(golden_on_t2(), tree("full2").root, 2, budget_bits=30)) > 0


def test_extendable_examples(tg):
    T = golden_on_t2()
    assert T.extendable(tree("full2").uniform(tree("full2").root, 4, "0"))
    # a 1 under g1 has no legal g1-child, so it is a dead end
    t2 = tree("full2")
    rules = [(t2.root, {(): "1", (0,): "0"}), (t2.root, {(): "1", (0,): "1"})]
    D = TsftHandle(t2, ForbiddenSet(A, constraint_patterns(t2, A, rules)))
    leaf_one = t2.window(t2.root, 1, {(): "0", (0,): "1", (1,): "0"})
    assert D.allowed(leaf_one)
    assert not D.extendable(leaf_one)
    assert not oracles.extendable(t2.matrix, leaf_one, D.forbidden.patterns, 1, A)


def test_live_table_is_fixpoint(rng):
    for _ in range(20):
        T = random_tsft(rng, max_rules=6)
        table = live_blocks(T)
        assert set(table) == {(eta, b) for eta in T.tree.family for b in T.blocks[eta]}
        assert T.recompute() == T.live


def test_flipped_bit_changes_answers(rng):
    T = random_tsft(rng, max_rules=4)
    F = T.with_flipped_live_bit(3)
    diff = [(e, b) for (e, b), v in T.live_table.items() if F.live_table[(e, b)] != v]
    assert len(diff) == 1
    eta, b = diff[0]
    assert T.extendable(b) != F.extendable(b)


def test_random_point_deterministic_and_legal(shifts):
    for T in shifts.values():
        a = random_point(T, T.tree.root, 6, seed=7)
        assert a == random_point(T, T.tree.root, 6, seed=7)
        assert T.allowed(a) and T.extendable(a)


def test_fill_respects_fixed_labels(shifts):
    T = shifts["full2-golden-g1"]
    t2 = T.tree
    fixed = {(): "1", (1,): "1"}
    w = fill_window(T, t2.root, 4, fixed=fixed, rng=random.Random(1))
    assert t2.label(w, ()) == "1" and t2.label(w, (1,)) == "1" and t2.label(w, (0,)) == "0"
    with pytest.raises(FillError):
        fill_window(T, t2.root, 3, fixed={(): "1", (0,): "1"}, rng=random.Random(1))


def test_periodic_fill(shifts):
    T = shifts["golden-golden-g1"]
    tg = T.tree
    w = fill_window(T, tg.root, 7, rng=random.Random(3), period=(0,))
    assert tg.subwindow(w, (0,), 6) == tg.restrict(w, 6)


def test_patterns_must_use_alphabet(t2):
    with pytest.raises(InputError):
        ForbiddenSet(A, (t2.uniform(t2.root, 1, "2"),))


def test_empty_shift_is_reported(t2):
    pats = tuple(t2.uniform(t2.root, 0, a) for a in A)
    T = TsftHandle(t2, ForbiddenSet(A, pats))
    assert T.empty
    with pytest.raises((EmptyShiftError, FillError)):
        random_point(T, t2.root, 3, seed=0)
