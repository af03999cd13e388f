"""Brute-force reference implementations, kept independent of the fast paths.

Windows are turned into plain dicts word -> symbol and every question is
answered by direct search over words, subsets or labelings.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .tree_core import Distance, MarkovMatrix, Window


def words(M: MarkovMatrix, mask: tuple, depth: int) -> list:
    """All admissible words of length <= depth read inside ``mask``, by exhaustive product."""
    out = [()]
    rows = M.entries
    for k in range(1, depth + 1):
        for w in itertools.product(range(M.d), repeat=k):
            if mask[w[0]] and all(rows[a][b] for a, b in zip(w, w[1:])):
                out.append(w)
    return out


def mask_after(M: MarkovMatrix, mask: tuple, word: tuple) -> tuple:
    return M.entries[word[-1]] if word else mask


def as_dict(M: MarkovMatrix, w: Window) -> dict:
    return dict(zip(sorted(words(M, w.eta.mask, w.depth), key=lambda v: (len(v), v)), w.labels))


def metric(M: MarkovMatrix, s: Window, t: Window) -> Distance:
    n = min(s.depth, t.depth)
    a, b = as_dict(M, s), as_dict(M, t)
    agree = -1
    for k in range(n + 1):
        if all(a[w] == b[w] for w in a if len(w) == k):
            agree = k
        else:
            break
    return Distance(n, resolved=False) if agree == n else Distance(agree)


def occurs(M: MarkovMatrix, big: dict, big_mask: tuple, depth: int, g: tuple, p: Window) -> bool:
    if mask_after(M, big_mask, g) != p.eta.mask or len(g) + p.depth > depth:
        return False
    pd = as_dict(M, p)
    return all(big[g + h] == a for h, a in pd.items())


def window_allowed(M: MarkovMatrix, w: Window, patterns) -> bool:
    """Scan every position and every pattern."""
    wd = as_dict(M, w)
    for g in wd:
        for p in patterns:
            if occurs(M, wd, w.eta.mask, w.depth, g, p):
                return False
    return True


def minimal_forbidden(M: MarkovMatrix, patterns) -> list:
    out = []
    for p in patterns:
        pd = as_dict(M, p)
        hit = False
        for q in patterns:
            if q.depth >= p.depth:
                continue
            if any(occurs(M, pd, p.eta.mask, p.depth, g, q) for g in pd):
                hit = True
                break
        if not hit:
            out.append(p)
    return out


@lru_cache(maxsize=None)
def complete_prefix_sets(M: MarkovMatrix, max_depth: int) -> frozenset:
    """Every vertex subset of Delta_max_depth that is an antichain and covers all deepest words."""
    root = (1,) * M.d
    verts = words(M, root, max_depth)
    deepest = [w for w in verts if len(w) == max_depth]
    out = set()
    for r in range(1, len(verts) + 1):
        for S in itertools.combinations(verts, r):
            s = set(S)
            if any(v[:k] in s for v in S for k in range(len(v))):
                continue
            if all(any(w[:k] in s for k in range(len(w) + 1)) for w in deepest):
                out.add(frozenset(S))
    return frozenset(out)


def extendable(M: MarkovMatrix, w: Window, patterns, step: int, alphabet, to_depth: int = 8) -> bool:
    """Can ``w`` (assumed allowed) be labelled further down to depth ``to_depth`` without a pattern?

    Works block by block: a depth-(step-1) block at a vertex is extended by
    one level, checked against patterns rooted at that vertex, and each
    child block is extended in turn.  Requires step >= 1.
    """
    if step < 1:
        raise ValueError("oracle needs step >= 1")
    k = step - 1
    if w.depth < k:
        raise ValueError("window shallower than step - 1")
    memo: dict = {}

    def label_map(mask, depth, labels):
        return dict(zip(sorted(words(M, mask, depth), key=lambda v: (len(v), v)), labels))

    def rooted_ok(mask, depth, d: dict) -> bool:
        for p in patterns:
            if p.eta.mask == mask and p.depth <= depth:
                pd = as_dict(M, p)
                if all(d[h] == a for h, a in pd.items()):
                    return False
        return True

    def ext(mask, block: tuple, r: int) -> bool:
        key = (mask, block, r)
        if key in memo:
            return memo[key]
        bd = label_map(mask, k, block)
        if not rooted_ok(mask, k, bd):
            memo[key] = False
            return False
        if r == 0:
            memo[key] = True
            return True
        lvl = [v for v in words(M, mask, step) if len(v) == step]
        ok = False
        for new in itertools.product(alphabet, repeat=len(lvl)):
            d = dict(bd)
            d.update(zip(lvl, new))
            if not rooted_ok(mask, step, d):
                continue
            good = True
            for i in range(M.d):
                if not mask[i]:
                    continue
                cm = M.entries[i]
                sub = tuple(d[(i,) + h] for h in sorted(words(M, cm, k), key=lambda v: (len(v), v)))
                if not ext(cm, sub, r - 1):
                    good = False
                    break
            if good:
                ok = True
                break
        memo[key] = ok
        return ok

    wd = as_dict(M, w)
    for v in wd:
        if len(v) != w.depth - k:
            continue
        cm = mask_after(M, w.eta.mask, v)
        block = tuple(wd[v + h] for h in sorted(words(M, cm, k), key=lambda u: (len(u), u)))
        if not ext(cm, block, to_depth - w.depth):
            return False
    return True
