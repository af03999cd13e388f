"""Tree-shifts of finite type: forbidden sets, admissibility, live blocks, sampling."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import EmptyShiftError, FillError, InputError, ResourceBudgetError
from .tree_core import FollowerType, MarkovTree, Window, Word

DEFAULT_BUDGET_BITS = 24
MAX_FILL_VERTICES = 1 << 20

Pattern = Window


@dataclass(frozen=True)
class ForbiddenSet:
    alphabet: tuple
    patterns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "patterns", tuple(dict.fromkeys(self.patterns)))
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise InputError("alphabet must be a nonempty list of distinct symbols")
        allowed = set(self.alphabet)
        for p in self.patterns:
            if set(p.labels) - allowed:
                raise InputError(f"pattern uses symbols outside the alphabet: {set(p.labels) - allowed}")

    @property
    def step(self) -> int:
        return max((p.depth for p in self.patterns), default=0)

    def grouped(self) -> dict:
        """(eta, depth) -> frozenset of label tuples."""
        out: dict = {}
        for p in self.patterns:
            out.setdefault((p.eta, p.depth), set()).add(p.labels)
        return {k: frozenset(v) for k, v in out.items()}


def patterns_from_partial(tree: MarkovTree, eta: FollowerType, depth: int,
                          partial: dict, alphabet: Sequence) -> list:
    """All depth-``depth`` patterns of type eta that carry ``partial`` (word -> symbol)."""
    verts = tree.delta(eta, depth)
    free = [w for w in verts if w not in partial]
    out = []
    for combo in itertools.product(alphabet, repeat=len(free)):
        labels = dict(partial)
        labels.update(zip(free, combo))
        out.append(tree.window(eta, depth, labels))
    return out


def _check_alphabet(w: Window, F: ForbiddenSet):
    bad = set(w.labels) - set(F.alphabet)
    if bad:
        raise InputError(f"window uses symbols outside the alphabet: {sorted(map(str, bad))}")


def _occurs_at(tree: MarkovTree, w: Window, g: Word, groups: dict) -> bool:
    ty = tree.type_after(w.eta, g)
    room = w.depth - len(g)
    for (eta, depth), labelsets in groups.items():
        if eta == ty and depth <= room:
            if tree.subwindow(w, g, depth).labels in labelsets:
                return True
    return False


def window_allowed(tree: MarkovTree, w: Window, F: ForbiddenSet) -> bool:
    """No forbidden pattern occurs at any position where it fits inside ``w``."""
    _check_alphabet(w, F)
    groups = F.grouped()
    return not any(_occurs_at(tree, w, g, groups) for g in tree.delta(w.eta, w.depth))


def root_allowed(tree: MarkovTree, w: Window, groups: dict) -> bool:
    return not _occurs_at(tree, w, (), groups)


class TsftHandle:
    """A TSFT with its live-block table precomputed.

    A depth-``step`` block is live when it is allowed and, for every
    generator, some live block of the child type continues it on the
    shared Delta_{step-1}.  Live blocks are exactly the blocks that occur
    in infinite points of the shift.
    """

    def __init__(self, tree: MarkovTree, forbidden: ForbiddenSet, step: int | None = None):
        for p in forbidden.patterns:
            if p.eta not in tree.family:
                raise InputError(f"pattern type {p.eta} is not a follower type of {tree!r}")
        self.tree = tree
        self.forbidden = forbidden
        self.alphabet = forbidden.alphabet
        self.step = forbidden.step if step is None else step
        if self.step < forbidden.step:
            raise InputError(f"step {self.step} below the deepest pattern ({forbidden.step})")
        self._groups = forbidden.grouped()
        self._allowed_cache: dict = {}
        self._lang_cache: dict = {}
        self.blocks = {eta: self._allowed(eta, self.step) for eta in tree.family}
        self.live = self._fixpoint({eta: set(bs) for eta, bs in self.blocks.items()})
        self._index_live()

    # construction ------------------------------------------------------

    def _allowed(self, eta: FollowerType, k: int) -> list:
        """All allowed depth-k windows of type eta, built child by child."""
        key = (eta, k)
        if key in self._allowed_cache:
            return self._allowed_cache[key]
        tree = self.tree
        out = []
        if k == 0:
            for a in self.alphabet:
                w = Window(eta, 0, (a,))
                if root_allowed(tree, w, self._groups):
                    out.append(w)
        else:
            kids = [self._allowed(tree.gen_type[i], k - 1) for i in eta.generators]
            for a in self.alphabet:
                for combo in itertools.product(*kids):
                    w = tree.assemble(eta, a, combo)
                    if root_allowed(tree, w, self._groups):
                        out.append(w)
        self._allowed_cache[key] = out
        return out

    def _continuation_key(self, b: Window, i: int):
        if self.step == 0:
            return None
        return self.tree.subwindow(b, (i,), self.step - 1).labels

    def _prefix_key(self, b: Window):
        if self.step == 0:
            return None
        return self.tree.restrict(b, self.step - 1).labels

    def _fixpoint(self, live: dict) -> dict:
        tree = self.tree
        changed = True
        while changed:
            changed = False
            prefixes = {eta: {self._prefix_key(b) for b in bs} for eta, bs in live.items()}
            for eta, bs in live.items():
                dead = [b for b in bs
                        if any(self._continuation_key(b, i) not in prefixes[tree.gen_type[i]]
                               for i in eta.generators)]
                if dead:
                    bs.difference_update(dead)
                    changed = True
        return {eta: frozenset(bs) for eta, bs in live.items()}

    def _index_live(self):
        self.live_by_prefix: dict = {}
        for eta, bs in self.live.items():
            for b in sorted(bs, key=lambda w: w.sort_key(self.alphabet)):
                self.live_by_prefix.setdefault((eta, self._prefix_key(b)), []).append(b)
        self._restrictions: dict = {}
        self._lang_cache.clear()

    @property
    def live_table(self) -> dict:
        return {(eta, b): b in self.live[eta] for eta, bs in self.blocks.items() for b in bs}

    @property
    def empty(self) -> bool:
        return not self.live[self.tree.root]

    def recompute(self) -> dict:
        """Run the elimination again starting from the current table."""
        return self._fixpoint({eta: set(bs) for eta, bs in self.live.items()})

    def with_flipped_live_bit(self, k: int = 0) -> "TsftHandle":
        """Copy with the k-th table entry toggled (fault injection for the suite)."""
        clone = object.__new__(TsftHandle)
        clone.__dict__.update(self.__dict__)
        entries = sorted(self.live_table.items(), key=lambda kv: kv[0][1].sort_key(self.alphabet))
        (eta, b), state = entries[k % len(entries)]
        live = {e: set(bs) for e, bs in self.live.items()}
        if state:
            live[eta].discard(b)
        else:
            live[eta].add(b)
        clone.live = {e: frozenset(bs) for e, bs in live.items()}
        clone._lang_cache = {}
        clone._index_live()
        return clone

    # queries -----------------------------------------------------------

    def live_restrictions(self, eta: FollowerType, n: int) -> frozenset:
        key = (eta, n)
        if key not in self._restrictions:
            self._restrictions[key] = frozenset(self.tree.restrict(b, n) for b in self.live[eta])
        return self._restrictions[key]

    def allowed(self, w: Window) -> bool:
        return window_allowed(self.tree, w, self.forbidden)

    def extendable(self, w: Window) -> bool:
        return extendable(w, self)

    def in_language(self, w: Window) -> bool:
        return self.allowed(w) and self.extendable(w)


def live_blocks(T: TsftHandle) -> dict:
    return T.live_table


def extendable(w: Window, T: TsftHandle) -> bool:
    """Whether an allowed window extends to an infinite point of T."""
    m = T.step
    if w.depth < m:
        return w in T.live_restrictions(w.eta, w.depth)
    tree = T.tree
    live = T.live
    offs = tree.level_offsets(w.eta, w.depth)
    deepest = tree.delta(w.eta, w.depth)[offs[w.depth - m]:offs[w.depth - m + 1]]
    for g in deepest:
        sub = tree.subwindow(w, g, m)
        if sub not in live[sub.eta]:
            return False
    return True


def check_budget(tree: MarkovTree, eta: FollowerType, n: int, alphabet_size: int,
                 budget_bits: float = DEFAULT_BUDGET_BITS):
    bits = tree.delta_size(eta, n) * math.log2(max(alphabet_size, 1))
    if bits > budget_bits:
        raise ResourceBudgetError(
            f"|Delta_{n}| * log2|A| = {bits:.1f} bits exceeds the budget of {budget_bits}"
        )


def enumerate_windows(T: TsftHandle, eta: FollowerType, n: int,
                      budget_bits: float = DEFAULT_BUDGET_BITS) -> list:
    """The allowed, extendable depth-n windows of type eta in canonical order."""
    check_budget(T.tree, eta, n, len(T.alphabet), budget_bits)
    return sorted(_language(T, eta, n), key=lambda w: w.sort_key(T.alphabet))


def _language(T: TsftHandle, eta: FollowerType, n: int) -> list:
    key = (eta, n)
    if key in T._lang_cache:
        return T._lang_cache[key]
    tree = T.tree
    if n <= T.step:
        out = list(T.live_restrictions(eta, n))
    else:
        kids = [_language(T, tree.gen_type[i], n - 1) for i in eta.generators]
        out = []
        for a in T.alphabet:
            for combo in itertools.product(*kids):
                w = tree.assemble(eta, a, combo)
                if root_allowed(tree, w, T._groups):
                    out.append(w)
    T._lang_cache[key] = out
    return out


def fill_window(T: TsftHandle, eta: FollowerType, N: int, fixed: dict | None = None,
                rng: random.Random | None = None, period: Word | None = None) -> Window:
    """Complete a partial labelling of Delta_N(eta) to an allowed, extendable window.

    Blocks are chosen root-down among live blocks consistent with every label
    known so far (``fixed`` included).  With ``rng`` the choice is uniform,
    otherwise the canonically first block is taken.  ``period`` ties every
    vertex ``period + h`` to ``h``, which yields points fixed by that shift.
    """
    tree = T.tree
    m = T.step
    fixed = fixed or {}
    labels: dict = {}
    plen = len(period) if period else 0

    def known(v):
        if v in labels:
            return labels[v]
        if v in fixed:
            return fixed[v]
        if plen and v[:plen] == period:
            return known(v[plen:])
        return None

    if T.live[eta] == frozenset():
        raise EmptyShiftError(f"no live blocks of type {eta}")
    if N < m:
        cands = [b for b in sorted(T.live[eta], key=lambda w: w.sort_key(T.alphabet))
                 if _consistent(tree, b, (), known, N)]
        if not cands:
            raise FillError("no live block matches the fixed labels at the root")
        b = rng.choice(cands) if rng else cands[0]
        return tree.restrict(b, N)

    if tree.delta_size(eta, N) > MAX_FILL_VERTICES:
        raise ResourceBudgetError(f"a depth-{N} window of {eta} has more than {MAX_FILL_VERTICES} vertices")
    labels.update(fill_labels(T, eta, tree.delta(eta, N - m), fixed, rng, period))
    return tree.window(eta, N, {w: labels[w] for w in tree.delta(eta, N)})


def fill_labels(T: TsftHandle, eta: FollowerType, sites: Iterable[Word], fixed: dict | None = None,
                rng: random.Random | None = None, period: Word | None = None) -> dict:
    """Place one live block at every site (a prefix-closed vertex set in canonical order).

    Returns the labels of all placed blocks.  Any labelling produced this
    way extends to an infinite point: every live block has live continuations.
    """
    tree = T.tree
    m = T.step
    fixed = fixed or {}
    labels: dict = {}
    plen = len(period) if period else 0

    def known(v):
        if v in labels:
            return labels[v]
        if v in fixed:
            return fixed[v]
        if plen and v[:plen] == period:
            return known(v[plen:])
        return None

    for g in sites:
        ty = tree.type_after(eta, g)
        if g and m > 0:
            prefix = tuple(known(g + h) for h in tree.delta(ty, m - 1))
            pool = T.live_by_prefix.get((ty, prefix), [])
        elif g:
            pool = T.live_by_prefix.get((ty, None), [])
        else:
            pool = sorted(T.live[ty], key=lambda w: w.sort_key(T.alphabet))
        cands = [b for b in pool if _consistent(tree, b, g, known, m)]
        if not cands:
            raise FillError(f"no live block fits at vertex {g}")
        b = rng.choice(cands) if rng else cands[0]
        for h, a in zip(tree.delta(ty, m), b.labels):
            labels[g + h] = a
    return labels


def _consistent(tree, b: Window, g: Word, known: Callable, depth: int) -> bool:
    for h, a in zip(tree.delta(b.eta, depth), b.labels):
        k = known(g + h)
        if k is not None and k != a:
            return False
    return True


def random_point(T: TsftHandle, eta: FollowerType, N: int, seed: int | random.Random = 0) -> Window:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if not T.live[eta]:
        raise EmptyShiftError(f"tree-shift has no points of type {eta}")
    return fill_window(T, eta, N, rng=rng)


def random_ray(tree: MarkovTree, length: int, rng: random.Random, eta: FollowerType | None = None) -> Word:
    eta = eta or tree.root
    word: list = []
    ty = eta
    for _ in range(length):
        i = rng.choice(ty.generators)
        word.append(i)
        ty = tree.gen_type[i]
    return tuple(word)


def in_language_all(T: TsftHandle, windows: Iterable[Window]) -> bool:
    return all(T.in_language(w) for w in windows)
