"""Projected (pseudo) orbits, shadow points, and the adversarial orbit for non-m-step behaviour."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import FillError, InputError, MalformedOrbit, PreconditionError, UnresolvedDistance
from .shift_space import ForbiddenSet, TsftHandle, _occurs_at, enumerate_windows, fill_window, random_point
from .tree_core import Distance, MarkovTree, Window, Word, agreement_needed, dyadic, format_word

SCAN_LIMIT_BITS = 20


@dataclass
class ProjectedOrbit:
    horizon: int
    payload_depth: int
    table: dict
    eta: object = None

    def __getitem__(self, g: Word) -> Window:
        return self.table[tuple(g)]


@dataclass
class DefectReport:
    max_defect: Distance
    edges: dict
    tail_profile: dict

    def below(self, delta: Fraction) -> bool:
        return self.max_defect.below(delta)

    def tail_below(self, n: int, delta: Fraction) -> bool:
        d = self.tail_profile.get(n)
        return d is None or d.below(delta)


def check_orbit(tree: MarkovTree, O: ProjectedOrbit, T: TsftHandle | None = None):
    """Raise MalformedOrbit unless every vertex carries a window of its own type and depth D."""
    root = O.eta or tree.root
    for g in tree.delta(root, O.horizon):
        w = O.table.get(g)
        if w is None:
            raise MalformedOrbit(f"no payload at vertex {format_word(g)}")
        if w.eta != tree.type_after(root, g):
            raise MalformedOrbit(f"payload at {format_word(g)} has type {w.eta}, vertex has {tree.type_after(root, g)}")
        if w.depth != O.payload_depth:
            raise MalformedOrbit(f"payload at {format_word(g)} has depth {w.depth}, expected {O.payload_depth}")
        if T is not None and not T.in_language(w):
            raise MalformedOrbit(f"payload at {format_word(g)} is not in the tree-shift")


def defect(tree: MarkovTree, O: ProjectedOrbit) -> DefectReport:
    """Per-edge distances d(sigma_i(O(g)), O(g i)), measured on Delta_{D-1}."""
    D = O.payload_depth
    if D < 2:
        raise PreconditionError("payload depth must be at least 2")
    check_orbit(tree, O)
    root = O.eta or tree.root
    edges = {}
    for g in tree.delta(root, O.horizon - 1):
        w = O.table[g]
        for i in w.eta.generators:
            edges[(g, i)] = tree.metric(tree.subwindow(w, (i,), D - 1), tree.restrict(O.table[g + (i,)], D - 1))
    exact = Distance(D - 1, resolved=False)
    worst = max(edges.values(), default=exact)
    tail = {}
    for k in range(-1, O.horizon - 1):
        vals = [d for (g, _), d in edges.items() if len(g) > k]
        if vals:
            tail[k] = max(vals)
    return DefectReport(worst, edges, tail)


def exact_orbit(tree: MarkovTree, s: Window, N: int, D: int) -> ProjectedOrbit:
    """O(g) = sigma_g(s)|Delta_D; needs s of depth >= N + D."""
    if s.depth < N + D:
        raise PreconditionError(f"point of depth {s.depth} cannot carry horizon {N} with payload {D}")
    return ProjectedOrbit(N, D, {g: tree.subwindow(s, g, D) for g in tree.delta(s.eta, N)}, s.eta)


def construct_shadow(tree: MarkovTree, O: ProjectedOrbit) -> Window:
    """The point read off the payload roots: t at g is the root label of O(g)."""
    root = O.eta or tree.root
    return tree.window(root, O.horizon, {g: O.table[g].labels[0] for g in tree.delta(root, O.horizon)})


@dataclass
class ShadowCheck:
    ok: bool
    worst_vertex: Word | None = None
    worst: Distance | None = None
    checked: int = 0


def verify_shadowed(tree: MarkovTree, O: ProjectedOrbit, t: Window, eps: Fraction,
                    depths: range | None = None, stop_early: bool = False) -> ShadowCheck:
    """d(sigma_g(t), O(g)) < eps on the trimmed domain |g| <= N - a, a the agreement eps needs."""
    a = agreement_needed(eps)
    D = O.payload_depth
    if a > D:
        raise UnresolvedDistance(f"eps = {eps} needs agreement on Delta_{a}, payloads have depth {D}")
    top = min(O.horizon, t.depth) - a
    if top < 0:
        raise UnresolvedDistance(f"horizon {t.depth} too small for eps = {eps}")
    lo = depths.start if depths is not None else 0
    top = min(top, depths.stop - 1) if depths is not None else top
    worst, where, ok, count = None, None, True, 0
    for g in tree.delta(t.eta, top):
        if len(g) < lo:
            continue
        k = min(t.depth - len(g), D)
        d = tree.metric(tree.subwindow(t, g, k), tree.restrict(O.table[g], k))
        count += 1
        if worst is None or worst < d:
            worst, where = d, g
        if not d.below(eps):
            ok = False
            if stop_early:
                break
    return ShadowCheck(ok, where, worst, count)


# generators ------------------------------------------------------------

def _resampled(T: TsftHandle, x: Window, g: Word, keep: int, D: int, rng: random.Random) -> Window:
    """sigma_g(x) kept on Delta_keep and re-drawn from live blocks below that."""
    tree = T.tree
    base = tree.subwindow(x, g, D)
    if keep >= D:
        return base
    fixed = dict(zip(tree.delta(base.eta, keep), base.labels))
    return fill_window(T, base.eta, D, fixed=fixed, rng=rng)


def random_ppo(T: TsftHandle, s: int, N: int, D: int, seed: int | random.Random = 0) -> ProjectedOrbit:
    """A 2^-s pseudo orbit: a sampled point's orbit with each payload re-drawn below depth s+2.

    Two payloads one edge apart share the point's labels on Delta_{s+1}
    after the shift, so every defect is at most 2^-(s+1).
    """
    if s < -1:
        raise InputError("s must be >= -1 (delta <= 2)")
    if D < max(2, s + 2):
        raise PreconditionError(f"payload depth {D} cannot certify a defect below 2^-{s}; need D >= s+2")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    tree = T.tree
    x = random_point(T, tree.root, N + D, rng)
    keep = s + 2
    table = {g: _resampled(T, x, g, keep, D, rng) for g in tree.delta(tree.root, N)}
    return ProjectedOrbit(N, D, table, tree.root)


def random_asymptotic_ppo(T: TsftHandle, N: int, D: int, seed: int | random.Random = 0) -> ProjectedOrbit:
    """A pseudo orbit whose defect beyond depth n is below 2^-(m+1+n).

    The payload at depth l keeps the sampled point's labels on
    Delta_{m+3+l} (capped at D) and is re-drawn below.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    tree = T.tree
    m = T.step
    x = random_point(T, tree.root, N + D, rng)
    table = {g: _resampled(T, x, g, min(m + 3 + len(g), D), D, rng) for g in tree.delta(tree.root, N)}
    return ProjectedOrbit(N, D, table, tree.root)


def asymptotic_schedule(m: int, N: int, D: int) -> list:
    """(delta, n) pairs delta = 2^-(m+1+n) for every n whose check fits the horizon and payload."""
    out = []
    n = 0
    while True:
        j = m + 1 + n
        need = j + 1
        if need + 1 > D or n + 1 > N - need:
            break
        out.append((dyadic(j), n))
        n += 1
    return out


@dataclass
class AsymptoticCheck:
    ok: bool
    per_delta: list = field(default_factory=list)


def verify_asymptotic(tree: MarkovTree, O: ProjectedOrbit, t: Window, schedule: Sequence,
                      m: int | None = None) -> AsymptoticCheck:
    """For each (delta, n): d(sigma_g(t), O(g)) < delta and <= 2^-m' on n < |g| <= N - ceil(log2(2/delta)),

    where 2^-(m'+1) < delta/2 <= 2^-m'.  With ``m`` the orbit must also be
    a 2^-(m+1) pseudo orbit whose tail beyond n stays below delta.
    """
    rep = defect(tree, O) if m is not None else None
    if rep is not None and not rep.below(dyadic(m + 1)):
        return AsymptoticCheck(False, [("precondition", "defect not below 2^-(m+1)")])
    results = []
    ok = True
    for delta, n in schedule:
        delta = Fraction(delta)
        mp = 0
        while dyadic(mp) >= delta / 2:
            mp += 1
        mp -= 1  # now 2^-(mp+1) < delta/2 <= 2^-mp
        cut = O.horizon - _ceil_log2(2 / delta)
        if cut <= n:
            raise PreconditionError(f"schedule entry ({delta}, {n}) exceeds the horizon {O.horizon}")
        if rep is not None and not rep.tail_below(n, delta):
            results.append((str(delta), n, "tail defect not below delta"))
            ok = False
            continue
        chk = verify_shadowed(tree, O, t, delta, depths=range(n + 1, cut + 1))
        good = chk.ok and chk.worst is not None and chk.worst.at_most(dyadic(mp))
        results.append((str(delta), n, "ok" if good else f"worst {chk.worst} at {format_word(chk.worst_vertex)}"))
        ok = ok and good
    return AsymptoticCheck(ok, results)


def _ceil_log2(x: Fraction) -> int:
    k = 0
    while Fraction(2) ** k < x:
        k += 1
    return k


# the converse construction ---------------------------------------------

def contains_pattern(tree: MarkovTree, big: Window, small: Window) -> list:
    """Positions g of ``big`` where ``small`` occurs."""
    groups = {(small.eta, small.depth): frozenset([small.labels])}
    return [g for g in tree.delta(big.eta, big.depth - small.depth)
            if tree.type_after(big.eta, g) == small.eta and _occurs_at(tree, big, g, groups)]


def minimal_forbidden(tree: MarkovTree, F: ForbiddenSet) -> list:
    """Members of F in which no strictly shallower member of F occurs."""
    out = []
    for p in F.patterns:
        shallower = [q for q in F.patterns if q.depth < p.depth]
        if not any(contains_pattern(tree, p, q) for q in shallower):
            out.append(p)
    return out


@dataclass
class Adversary:
    orbit: ProjectedOrbit
    anchor: Word
    case: str
    witnesses: dict


def _witness(T: TsftHandle, eta, depth: int, fixed: dict, rng) -> Window:
    try:
        return fill_window(T, eta, depth, fixed=fixed, rng=rng)
    except FillError as e:
        raise FillError(f"no witness point of type {eta} extends the pattern: {e}") from None


def adversarial_ppo(T: TsftHandle, P: Window, N: int, D: int | None = None, m: int | None = None,
                    rng: random.Random | None = None) -> Adversary:
    """A pseudo orbit with small defect whose only candidate shadow contains P.

    ``m`` is the step being refuted (default: depth(P) - 3); P must be a
    minimal member of F of depth at least m+3.
    """
    tree = T.tree
    mp = P.depth
    m = mp - 3 if m is None else m
    D = mp if D is None else D
    if P not in T.forbidden.patterns:
        raise PreconditionError("pattern is not a member of the forbidden set")
    if mp < m + 3:
        raise PreconditionError(f"pattern depth {mp} is below m+3 = {m + 3}")
    if P not in minimal_forbidden(tree, T.forbidden):
        raise PreconditionError("pattern contains a shallower forbidden pattern")
    if D < mp or D < 2:
        raise PreconditionError(f"payload depth {D} must be at least the pattern depth {mp}")

    def fixed_from(sub: Word, shift: Word = ()) -> dict:
        """P on sub.Delta_{m'-1} (clipped to P's depth), moved under ``shift``."""
        ty = tree.type_after(P.eta, sub)
        return {shift + h: tree.label(P, sub + h) for h in tree.delta(ty, min(mp - 1, mp - len(sub)))}

    root = tree.root
    table = {}
    if P.eta == root:
        anchor: Word = ()
        t0 = _witness(T, root, D, fixed_from(()), rng)
        ts = {i: _witness(T, tree.gen_type[i], N - 1 + D, fixed_from((i,)), rng) for i in root.generators}
        for g in tree.delta(root, N):
            if not g:
                table[g] = t0
            else:
                table[g] = tree.subwindow(ts[g[0]], g[1:], D)
        witnesses = {"t0": t0, **{f"t{i + 1}": w for i, w in ts.items()}}
        case = "root"
    else:
        i = next((i for i in root.generators if tree.gen_type[i] == P.eta), None)
        if i is None:
            raise PreconditionError(f"no child of the root has type {P.eta}")
        anchor = (i,)
        s0 = _witness(T, root, N + D, fixed_from((), anchor), rng)
        ss = {j: _witness(T, tree.gen_type[j], N - 2 + D, fixed_from((j,)), rng) for j in P.eta.generators}
        for g in tree.delta(root, N):
            if len(g) >= 2 and g[0] == i:
                table[g] = tree.subwindow(ss[g[1]], g[2:], D)
            else:
                table[g] = tree.subwindow(s0, g, D)
        witnesses = {"s0": s0, **{f"s{j + 1}": w for j, w in ss.items()}}
        case = f"follower of g{i + 1}"
    return Adversary(ProjectedOrbit(N, D, table, root), anchor, case, witnesses)


@dataclass
class ScanResult:
    ran: bool
    candidates: int = 0
    shadowing: list = field(default_factory=list)


def scan_one_shadowing(T: TsftHandle, O: ProjectedOrbit, budget_bits: float = SCAN_LIMIT_BITS) -> ScanResult:
    """Every depth-N window of the language tested as a 1-shadow of O (skipped above the budget)."""
    import math
    tree = T.tree
    bits = tree.delta_size(tree.root, O.horizon) * math.log2(len(T.alphabet))
    if bits > budget_bits:
        return ScanResult(False)
    cands = enumerate_windows(T, tree.root, O.horizon, budget_bits=budget_bits)
    hits = [c for c in cands if verify_shadowed(tree, O, c, Fraction(1), stop_early=True).ok]
    return ScanResult(True, len(cands), hits)
