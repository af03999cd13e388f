import random
from fractions import Fraction

import pytest

from treeshift import MalformedOrbit, PreconditionError, TsftHandle, UnresolvedDistance, Window
from treeshift import oracles
from treeshift.fixtures import adversarial, full_shift, tree
from treeshift.shadowing import (
    adversarial_ppo,
    asymptotic_schedule,
    construct_shadow,
    contains_pattern,
    defect,
    exact_orbit,
    minimal_forbidden,
    random_asymptotic_ppo,
    random_ppo,
    scan_one_shadowing,
    verify_asymptotic,
    verify_shadowed,
)
from treeshift.shift_space import ForbiddenSet, random_point
from treeshift.tree_core import dyadic


@pytest.fixture(scope="module")
def golden_point():
    T = full_shift("golden")
    return T, random_point(T, T.tree.root, 12, seed=5)


def test_exact_orbit(golden_point):
    T, s = golden_point
    tg = T.tree
    O = exact_orbit(tg, s, 6, 5)
    rep = defect(tg, O)
    assert not rep.max_defect.resolved and str(rep.max_defect) == "<=2^-4"
    assert construct_shadow(tg, O) == tg.restrict(s, 6)
    assert verify_shadowed(tg, O, tg.restrict(s, 6), Fraction(1, 8)).ok


def test_flipped_root_label(golden_point):
    T, s = golden_point
    tg = T.tree
    O = exact_orbit(tg, s, 5, 4)
    g = (0, 1)
    w = O.table[g]
    O.table[g] = Window(w.eta, w.depth, ("1" if w.labels[0] == "0" else "0",) + w.labels[1:])
    rep = defect(tg, O)
    assert rep.edges[((0,), 1)].value == 2
    assert rep.max_defect.value == 2
    assert [e for e, d in rep.edges.items() if d.resolved] == [((0,), 1)]


def test_malformed_orbit(golden_point):
    T, s = golden_point
    tg = T.tree
    O = exact_orbit(tg, s, 4, 3)
    del O.table[(0, 0)]
    with pytest.raises(MalformedOrbit):
        defect(tg, O)


def test_random_ppo_defect_and_shadow(shifts):
    for name, T in shifts.items():
        m = T.step
        for s in (m + 1, m + 2):
            O = random_ppo(T, s, 6, 6, seed=11)
            assert defect(T.tree, O).below(dyadic(s)), name
            t = construct_shadow(T.tree, O)
            assert T.allowed(t) and T.extendable(t)
            assert verify_shadowed(T.tree, O, t, dyadic(m)).ok


def test_payload_must_certify_delta(shifts):
    with pytest.raises(PreconditionError):
        random_ppo(shifts["full2-step2-g1g1"], 4, 6, 5)


def test_delta_two_allowed(shifts):
    T = shifts["full2-golden-g1"]
    O = random_ppo(T, -1, 4, 3, seed=1)
    assert defect(T.tree, O).max_defect.at_most(Fraction(2))


def test_unresolved_eps(shifts):
    T = shifts["full2-golden-g1"]
    O = random_ppo(T, 1, 5, 3, seed=1)
    t = construct_shadow(T.tree, O)
    with pytest.raises(UnresolvedDistance):
        verify_shadowed(T.tree, O, t, dyadic(4))


def test_adversarial_cases():
    for name, (T, P) in adversarial().items():
        tr = T.tree
        N = 3 if P.eta == tr.root else 4
        adv = adversarial_ppo(T, P, N, rng=random.Random(0))
        rep = defect(tr, adv.orbit)
        assert rep.max_defect.at_most(dyadic(P.depth - 2)), name
        nonzero = {e for e, d in rep.edges.items() if d.resolved}
        assert all(g == adv.anchor for g, _ in nonzero), name
        t = construct_shadow(tr, adv.orbit)
        assert adv.anchor in contains_pattern(tr, t, P)
        assert not T.allowed(t)


def test_adversarial_scan_small():
    T, P = adversarial()["full2-root"]
    adv = adversarial_ppo(T, P, 3, rng=random.Random(0))
    scan = scan_one_shadowing(T, adv.orbit)
    assert scan.ran and scan.candidates > 0 and not scan.shadowing


def test_adversarial_guards():
    T, P = adversarial()["full2-root"]
    t2 = T.tree
    with pytest.raises(PreconditionError):
        adversarial_ppo(T, t2.uniform(t2.root, 3, "0"), 3)
    inner = t2.uniform(t2.root, 1, "1")
    T2 = TsftHandle(t2, ForbiddenSet(("0", "1"), (P, inner)))
    with pytest.raises(PreconditionError):
        adversarial_ppo(T2, P, 3)
    with pytest.raises(PreconditionError):
        adversarial_ppo(T, P, 3, m=1)


def test_minimal_forbidden_examples(t2):
    p = t2.uniform(t2.root, 1, "1")
    ext = t2.uniform(t2.root, 2, "1")
    assert minimal_forbidden(t2, ForbiddenSet(("0", "1"), (ext,))) == [ext]
    assert minimal_forbidden(t2, ForbiddenSet(("0", "1"), (p, ext))) == [p]


def test_minimal_forbidden_oracle(rng):
    for _ in range(60):
        tr = tree(rng.choice(["full2", "golden", "upper"]))
        pats = []
        for _ in range(rng.randint(1, 4)):
            eta = rng.choice(tr.family)
            n = rng.randint(0, 2)
            pats.append(Window(eta, n, tuple(rng.choice("01") for _ in range(tr.delta_size(eta, n)))))
        F = ForbiddenSet(("0", "1"), tuple(pats))
        assert set(minimal_forbidden(tr, F)) == set(oracles.minimal_forbidden(tr.matrix, F.patterns))


def test_schedule_shape():
    sched = asymptotic_schedule(1, 8, 6)
    assert sched[0] == (dyadic(2), 0)
    assert all(d == dyadic(2 + n) for d, n in sched)


def test_asymptotic(shifts):
    for T in shifts.values():
        O = random_asymptotic_ppo(T, 8, 6, seed=2)
        rep = defect(T.tree, O)
        for n, d in rep.tail_profile.items():
            if n >= 0 and d.resolved:
                assert d.below(dyadic(T.step + 1 + n))
        t = construct_shadow(T.tree, O)
        assert verify_asymptotic(T.tree, O, t, asymptotic_schedule(T.step, 8, 6), m=T.step).ok


def test_asymptotic_exact_tail(golden_point):
    T, _ = golden_point
    tg = T.tree
    s = random_point(T, tg.root, 16, seed=9)
    O = exact_orbit(tg, s, 10, 6)
    res = verify_asymptotic(tg, O, construct_shadow(tg, O), [(dyadic(3), 3), (dyadic(4), 4)])
    assert res.ok


def test_orbit_horizon_guard(golden_point):
    T, s = golden_point
    with pytest.raises(PreconditionError):
        exact_orbit(T.tree, s, 10, 5)
