"""Hand-built and random tree-shifts used by the tests and the acceptance suite."""

from __future__ import annotations

import random

from .shift_space import ForbiddenSet, TsftHandle, patterns_from_partial
from .tree_core import FULL2, GOLDEN, UPPER, MarkovTree

MATRICES = {"full2": FULL2, "golden": GOLDEN, "upper": UPPER}

_TREES: dict = {}


def tree(name_or_matrix) -> MarkovTree:
    """Shared tree instances, so their caches are reused."""
    M = MATRICES[name_or_matrix] if isinstance(name_or_matrix, str) else name_or_matrix
    if M not in _TREES:
        _TREES[M] = MarkovTree(M)
    return _TREES[M]


def constraint_patterns(tr: MarkovTree, alphabet, rules) -> tuple:
    """Expand rules (type, {word: symbol}) into full patterns of the smallest covering depth."""
    out = []
    for eta, partial in rules:
        depth = max(len(w) for w in partial)
        out.extend(patterns_from_partial(tr, eta, depth, partial, alphabet))
    return tuple(out)


def full_shift(name: str, alphabet=("0", "1")) -> TsftHandle:
    return TsftHandle(tree(name), ForbiddenSet(tuple(alphabet)))


def _forbid_pair(tr, alphabet, first, path, second, types=None):
    rules = []
    for eta in types or tr.family:
        if tr.admissible(path, eta):
            rules.append((eta, {(): first, path: second}))
    return TsftHandle(tr, ForbiddenSet(tuple(alphabet), constraint_patterns(tr, alphabet, rules)))


def hand_built() -> dict:
    """Five m-step tree-shifts (m = 1 or 2) on the three small trees."""
    A = ("0", "1")
    t2, tg, tu = tree("full2"), tree("golden"), tree("upper")
    return {
        "full2-golden-g1": _forbid_pair(t2, A, "1", (0,), "1"),
        "golden-golden-g1": _forbid_pair(tg, A, "1", (0,), "1"),
        "upper-golden-g2": _forbid_pair(tu, A, "1", (1,), "1"),
        "full2-step2-g1g1": _forbid_pair(t2, A, "1", (0, 0), "1"),
        "upper-step2-g2g2": _forbid_pair(tu, A, "1", (1, 1), "1"),
    }


def adversarial() -> dict:
    """Tree-shifts whose only pattern is an all-ones block of depth 3.

    name -> (handle, pattern); the pattern sits at the root type on T_2
    and at a follower type on the golden and upper trees.
    """
    A = ("0", "1")
    out = {}
    for name, mat, type_id in (("full2-root", "full2", 0), ("golden-eta2", "golden", 1), ("upper-eta2", "upper", 1)):
        tr = tree(mat)
        eta = tr.type_by_id(type_id)
        P = tr.uniform(eta, 3, "1")
        out[name] = (TsftHandle(tr, ForbiddenSet(A, (P,))), P)
    return out


def random_tsft(rng: random.Random, max_rules: int = 3) -> TsftHandle:
    """A random nonempty 1-step tree-shift on T_2, T_G or T_U with |A| in {2, 3}."""
    while True:
        tr = tree(rng.choice(sorted(MATRICES)))
        A = ("0", "1", "2")[: rng.choice((2, 3))]
        rules = []
        for _ in range(rng.randint(1, max_rules)):
            eta = rng.choice(tr.family)
            i = rng.choice(eta.generators)
            rules.append((eta, {(): rng.choice(A), (i,): rng.choice(A)}))
        T = TsftHandle(tr, ForbiddenSet(A, constraint_patterns(tr, A, rules)), step=1)
        if all(T.live[eta] for eta in tr.family):
            return T
