"""Finite-scale omega-limit sets, complete prefix sets and the relations between them.

A depth-n member is a window sigma_g(t)|Delta_n for a vertex g deep
enough (|g| > n) that the shift is a genuine tail, and shallow enough
(|g| <= N - n) that the whole Delta_n below g is inside t's horizon N.
Closeness at resolution n is exact agreement on Delta_n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InputError, PreconditionError, ResourceBudgetError
from .shift_space import TsftHandle
from .tree_core import FollowerType, MarkovTree, Window, Word, format_word

DEFAULT_CPS_LIMIT = 200_000


@dataclass(frozen=True)
class OmegaApprox:
    resolution: int
    horizon: int
    members: frozenset

    def by_type(self) -> dict:
        out: dict = {}
        for w in self.members:
            out.setdefault(w.eta, set()).add(w)
        return out

    def sorted(self, alphabet=None) -> list:
        return sorted(self.members, key=lambda w: w.sort_key(alphabet))

    def __len__(self):
        return len(self.members)

    def __contains__(self, w):
        return w in self.members

    def __le__(self, other: "OmegaApprox"):
        return self.members <= other.members


@dataclass(frozen=True)
class Cps:
    vertices: frozenset

    @property
    def min_depth(self) -> int:
        return min(len(v) for v in self.vertices)

    @property
    def max_depth(self) -> int:
        return max(len(v) for v in self.vertices)

    def sorted(self) -> list:
        return sorted(self.vertices, key=lambda w: (len(w), w))

    def __str__(self):
        return "{" + ", ".join(format_word(v) for v in self.sorted()) + "}"


@dataclass(frozen=True)
class CpsVector:
    types: tuple
    components: tuple

    def __post_init__(self):
        if not self.types:
            raise InputError("a CPS vector needs at least one coordinate")
        if len(set(self.types)) != len(self.types):
            raise InputError("CPS vector types must be distinct")
        if any(c.eta != ty for ty, c in zip(self.types, self.components)):
            raise InputError("CPS vector component types do not match")

    @property
    def length(self) -> int:
        return len(self.types)


def _need_horizon(N: int, n: int):
    if n < 0:
        raise InputError("resolution must be >= 0")
    if N < 2 * n + 1:
        raise PreconditionError(f"horizon {N} is below 2n+1 = {2 * n + 1}")


def check_ray(tree: MarkovTree, p: Word, eta: FollowerType | None = None) -> Word:
    p = tuple(p)
    if not tree.admissible(p, eta or tree.root):
        raise InputError(f"ray prefix {format_word(p)} is not admissible")
    return p


def periodic_ray(u: Word, length: int) -> Word:
    """Prefix of length ``length`` of u u u ..."""
    if not u:
        raise InputError("period word must be nonempty")
    return tuple(itertools.islice(itertools.cycle(u), length))


def approx_omega(tree: MarkovTree, t: Window, n: int) -> OmegaApprox:
    N = t.depth
    _need_horizon(N, n)
    out = {tree.subwindow(t, g, n) for g in tree.delta(t.eta, N - n) if len(g) > n}
    return OmegaApprox(n, N, frozenset(out))


def approx_omega_ray(tree: MarkovTree, t: Window, p: Word, n: int) -> OmegaApprox:
    N = t.depth
    _need_horizon(N, n)
    p = check_ray(tree, p, t.eta)
    if len(p) < n + 1:
        raise PreconditionError(f"ray prefix of length {len(p)} is shorter than n+1 = {n + 1}")
    top = min(len(p), N - n)
    out = {tree.view(t, p[:k], n) for k in range(n + 1, top + 1)}
    return OmegaApprox(n, N, frozenset(out))


def approx_omega_followers(tree: MarkovTree, t: Window, p: Word, n: int) -> OmegaApprox:
    N = t.depth
    _need_horizon(N, n)
    p = check_ray(tree, p, t.eta)
    if len(p) < n + 1:
        raise PreconditionError(f"ray prefix of length {len(p)} is shorter than n+1 = {n + 1}")
    out = set()
    for k in range(n + 1, min(len(p), N - n) + 1):
        pk = p[:k]
        ty = tree.type_after(t.eta, pk)
        for h in tree.delta(ty, N - n - k):
            out.add(tree.subwindow(t, pk + h, n))
    return OmegaApprox(n, N, frozenset(out))


# complete prefix sets --------------------------------------------------

def is_cps(tree: MarkovTree, vertices: Iterable[Word], eta: FollowerType | None = None) -> bool:
    """Independent check: antichain, and every word of the max length has a prefix inside."""
    eta = eta or tree.root
    vs = set(map(tuple, vertices))
    if not vs or not all(tree.admissible(v, eta) for v in vs):
        return False
    for v in vs:
        if any(v[:k] in vs for k in range(len(v))):
            return False
    top = max(len(v) for v in vs)
    return all(any(w[:k] in vs for k in range(len(w) + 1))
               for w in tree.delta(eta, top) if len(w) == top)


def enumerate_cps(tree: MarkovTree, max_depth: int, eta: FollowerType | None = None,
                  limit: int = DEFAULT_CPS_LIMIT) -> list:
    """Complete prefix sets with all vertices of depth <= max_depth, by leaf expansion from {e}."""
    if max_depth < 0:
        raise InputError("max_depth must be >= 0")
    if max_depth > 8:
        raise ResourceBudgetError("CPS enumeration is capped at max_depth 8")
    eta = eta or tree.root
    start = frozenset({()})
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for c in frontier:
            for v in c:
                if len(v) >= max_depth:
                    continue
                ty = tree.type_after(eta, v)
                d = (c - {v}) | {v + (i,) for i in ty.generators}
                if d not in seen:
                    seen.add(d)
                    if len(seen) > limit:
                        raise ResourceBudgetError(f"more than {limit} complete prefix sets")
                    nxt.append(d)
        frontier = nxt
    return sorted((Cps(c) for c in seen), key=lambda c: (len(c.vertices), c.sorted()))


def _merge(a: tuple, b: tuple):
    out = []
    for x, y in zip(a, b):
        if x is None:
            out.append(y)
        elif y is None or x == y:
            out.append(x)
        else:
            return None
    return tuple(out)


def approx_omega_cps(tree: MarkovTree, t: Window, n: int) -> frozenset:
    """All CPS vectors at resolution n witnessed by one complete prefix set.

    Bottom-up over vertices: a vertex either joins the prefix set (allowed
    when deeper than n) or is split into its children (allowed while its
    children stay within the horizon).  The options of a vertex are the
    partial vectors, one slot per follower type, realizable below it.
    """
    N = t.depth
    _need_horizon(N, n)
    top = N - n
    slots = len(tree.family)
    verts = tree.delta(t.eta, top)
    options: dict = {}
    for g in reversed(verts):
        ty = tree.type_after(t.eta, g)
        opts = set()
        if len(g) > n:
            vec = [None] * slots
            vec[ty.canonical_id] = tree.subwindow(t, g, n)
            opts.add(tuple(vec))
        if len(g) < top:
            acc = {(None,) * slots}
            for i in ty.generators:
                child = options.pop(g + (i,))
                acc = {m for a in acc for b in child if (m := _merge(a, b)) is not None}
                if not acc:
                    break
            opts |= acc
        options[g] = frozenset(opts)
    out = set()
    for vec in options[()]:
        types = tuple(tree.type_by_id(k) for k, w in enumerate(vec) if w is not None)
        if types:
            out.add(CpsVector(types, tuple(w for w in vec if w is not None)))
    return frozenset(out)


def cps_vectors_sorted(vectors: Iterable[CpsVector], alphabet=None) -> list:
    return sorted(vectors, key=lambda v: (v.length, [c.sort_key(alphabet) for c in v.components]))


def maximal_vectors(vectors: Iterable[CpsVector]) -> frozenset:
    vectors = list(vectors)
    if not vectors:
        return frozenset()
    top = max(v.length for v in vectors)
    return frozenset(v for v in vectors if v.length == top)


def vectors_bounded_by(vectors: Iterable[CpsVector], S: OmegaApprox) -> list:
    """The A <| B relation: returns (vector, coordinate) pairs escaping S; empty means it holds."""
    return [(v, c) for v in vectors for c in v.components if c not in S.members]


# invariance ------------------------------------------------------------

@dataclass
class InvarianceReport:
    invariant: bool
    witnesses: list = field(default_factory=list)


def is_invariant(tree: MarkovTree, S: OmegaApprox | Iterable[Window],
                 reference: OmegaApprox | Iterable[Window] | None = None) -> InvarianceReport:
    """Every one-step shift of a member must match a member of ``reference`` (default: S).

    Shifting a depth-n member loses one level, so the comparison is made on
    Delta_{n-1}.  Returns (member, generator) pairs that fail.
    """
    members = S.members if isinstance(S, OmegaApprox) else frozenset(S)
    ref = members if reference is None else (
        reference.members if isinstance(reference, OmegaApprox) else frozenset(reference))
    if not members:
        return InvarianceReport(True)
    depths = {w.depth for w in members}
    if len(depths) != 1 or min(depths) < 1:
        raise PreconditionError("invariance check needs members of one common depth >= 1")
    n = depths.pop()
    if any(r.depth < n - 1 for r in ref):
        raise PreconditionError("reference members are shallower than n-1")
    known = {tree.restrict(r, n - 1) for r in ref}
    bad = []
    for w in sorted(members, key=lambda w: w.sort_key()):
        for i in w.eta.generators:
            if tree.subwindow(w, (i,), n - 1) not in known:
                bad.append((w, i))
    return InvarianceReport(not bad, bad)


def invariance_surrogate(tree: MarkovTree, t: Window, n: int, p: Word | None = None) -> InvarianceReport:
    """Invariance of the depth-n approximation, using depth n+1 members and one level of headroom.

    Needs N >= 2(n+1)+1.  With ``p`` the follower set along that ray is tested instead.
    """
    if p is None:
        return is_invariant(tree, approx_omega(tree, t, n + 1), approx_omega(tree, t, n))
    return is_invariant(tree, approx_omega_followers(tree, t, p, n + 1),
                        approx_omega_followers(tree, t, p, n))


# relations -------------------------------------------------------------

@dataclass
class RelationReport:
    verdicts: dict
    witnesses: dict

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())


def check_limit_relations(T: TsftHandle, t: Window, p: Word, n: int,
                             with_cps: bool = True) -> RelationReport:
    """ray <= followers <= all <= language, and every CPS coordinate in the all-shifts set."""
    tree = T.tree
    ray = approx_omega_ray(tree, t, p, n)
    fol = approx_omega_followers(tree, t, p, n)
    allm = approx_omega(tree, t, n)
    verdicts, wit = {}, {}

    def record(name, escaped):
        verdicts[name] = not escaped
        wit[name] = escaped[:3]

    record("ray<=followers", sorted(ray.members - fol.members, key=Window.sort_key))
    record("followers<=all", sorted(fol.members - allm.members, key=Window.sort_key))
    record("all<=language", [w for w in allm.sorted() if not T.in_language(w)])
    if with_cps:
        record("cps<|all", vectors_bounded_by(approx_omega_cps(tree, t, n), allm))
    return RelationReport(verdicts, wit)
