"""Projected chains, the chain-transitivity test, and the chain-to-point constructor."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from .errors import FillError, InputError, PreconditionError, UnresolvedDistance
from .shift_space import TsftHandle, fill_labels, fill_window
from .tree_core import Distance, MarkovTree, PartialWindow, Window, Word, agreement_needed

FULL_WINDOW_VERTICES = 1 << 16

# d(x, y) < eps  <=>  x and y agree on Delta_{agreement_needed(eps)}


def _common_depth(Y: Iterable[Window]) -> int:
    depths = {w.depth for w in Y}
    if len(depths) > 1:
        raise InputError(f"windows of mixed depths {sorted(depths)}")
    return depths.pop() if depths else 0


def _resolving_agreement(eps: Fraction, n: int) -> int:
    a = agreement_needed(eps)
    if a > n - 1:
        raise UnresolvedDistance(
            f"eps = {eps} needs agreement on Delta_{a} after a shift, windows only reach depth {n - 1}"
        )
    return a


@dataclass
class ChainCheck:
    ok: bool
    failed_at: int | None = None
    reason: str = ""


def is_projected_chain(tree: MarkovTree, points: Sequence[Window], word: Word,
                       eps: Fraction) -> ChainCheck:
    if len(points) != len(word) + 1:
        raise InputError("a chain over a word of length k needs k+1 points")
    n = _common_depth(points)
    a = _resolving_agreement(eps, n)
    for j, i in enumerate(word):
        x, y = points[j], points[j + 1]
        if not x.eta.allows(i):
            return ChainCheck(False, j, f"generator {i + 1} not allowed by {x.eta}")
        if y.eta != tree.gen_type[i]:
            return ChainCheck(False, j, f"point {j + 1} has type {y.eta}, expected {tree.gen_type[i]}")
        if not tree.agree(tree.subwindow(x, (i,), n - 1), y, a):
            return ChainCheck(False, j, "one-step distance not below eps")
    return ChainCheck(True)


def chain_graph_at(tree: MarkovTree, Y: Iterable[Window], a: int) -> nx.DiGraph:
    """Edges y -> y' whenever sigma_i(y) and y' agree on Delta_a; labels kept in ``gens``."""
    Y = sorted(set(Y), key=Window.sort_key)
    n = _common_depth(Y)
    if a > n - 1:
        raise UnresolvedDistance(f"agreement on Delta_{a} not checkable at depth {n}")
    G = nx.DiGraph()
    G.add_nodes_from(Y)
    buckets: dict = {}
    for y in Y:
        key = (y.eta, tree.restrict(y, a).labels) if a >= 0 else (y.eta, None)
        buckets.setdefault(key, []).append(y)
    for y in Y:
        for i in y.eta.generators:
            s = tree.subwindow(y, (i,), n - 1)
            key = (s.eta, tree.restrict(s, a).labels) if a >= 0 else (s.eta, None)
            for z in buckets.get(key, ()):
                if G.has_edge(y, z):
                    G[y][z]["gens"].append(i)
                else:
                    G.add_edge(y, z, gens=[i])
    return G


def build_chain_graph(tree: MarkovTree, Y: Iterable[Window], eps: Fraction) -> nx.DiGraph:
    Y = list(Y)
    return chain_graph_at(tree, Y, _resolving_agreement(eps, _common_depth(Y)))


@dataclass
class PictResult:
    pict: bool
    counterexample: tuple | None = None

    def __bool__(self):
        return self.pict


def graph_pict(G: nx.DiGraph) -> PictResult:
    """Every ordered pair joined by a nonempty path."""
    nodes = sorted(G.nodes, key=Window.sort_key)
    if not nodes:
        return PictResult(True)
    y = nodes[0]
    if len(nodes) == 1:
        return PictResult(True) if G.has_edge(y, y) else PictResult(False, (y, y))
    fwd = nx.descendants(G, y)
    for z in nodes:
        if z != y and z not in fwd:
            return PictResult(False, (y, z))
    back = nx.ancestors(G, y)
    for z in nodes:
        if z != y and z not in back:
            return PictResult(False, (z, y))
    return PictResult(True)


def is_pict(tree: MarkovTree, Y: Iterable[Window], eps: Fraction,
            require_irreducible: bool = False) -> PictResult:
    if require_irreducible and not tree.matrix.irreducible:
        raise PreconditionError("matrix is reducible")
    return graph_pict(build_chain_graph(tree, Y, eps))


def shortest_chain(G: nx.DiGraph, source: Window, targets) -> list | None:
    """Shortest nonempty path from source into ``targets``.

    Returned as [(window, generator), ..., (end, None)].
    """
    targets = set(targets)
    prev: dict = {}
    queue = deque()
    for z in sorted(G.successors(source), key=Window.sort_key):
        prev[z] = source
        queue.append(z)
    while queue:
        x = queue.popleft()
        if x in targets:
            path = [x, prev[x]]
            while path[-1] != source:
                path.append(prev[path[-1]])
            path.reverse()
            return [(u, min(G[u][v]["gens"])) for u, v in zip(path, path[1:])] + [(x, None)]
        for z in sorted(G.successors(x), key=Window.sort_key):
            if z not in prev:
                prev[z] = x
                queue.append(z)
    return None


# closedness ------------------------------------------------------------

def hausdorff(tree: MarkovTree, Y: Iterable[Window], Z: Iterable[Window]) -> Distance:
    """Type-wise Hausdorff distance; 2 when the two sets use different types."""
    by_y, by_z = {}, {}
    for w in Y:
        by_y.setdefault(w.eta, []).append(w)
    for w in Z:
        by_z.setdefault(w.eta, []).append(w)
    if set(by_y) != set(by_z):
        return Distance(-1)
    worst = None
    for eta in by_y:
        for A, B in ((by_y[eta], by_z[eta]), (by_z[eta], by_y[eta])):
            for x in A:
                d = min(tree.metric(x, y) for y in B)
                worst = d if worst is None or worst < d else worst
    if worst is None:
        return Distance(_common_depth(list(Y)), resolved=False)
    return worst


def closedness_transfer(tree: MarkovTree, Y: Iterable[Window], Z: Iterable[Window],
                        eps: Fraction) -> str:
    """'holds' / 'fails' for the implication d'(Y,Z) < eps/6 and Z pict at eps/2 => Y pict at eps.

    'not-applicable' when the hypothesis is false.
    """
    Y, Z = list(Y), list(Z)
    if not hausdorff(tree, Y, Z).below(eps / 6):
        return "not-applicable"
    if not is_pict(tree, Z, eps / 2):
        return "not-applicable"
    return "holds" if is_pict(tree, Y, eps) else "fails"


# construction ----------------------------------------------------------

@dataclass
class Construction:
    t: Window
    ray: Word
    sequence: list
    transient: int
    telescoping_ok: bool
    scales: list = field(default_factory=list)
    pict: bool = True
    in_language: bool = True


def _ordered_components(G: nx.DiGraph) -> list:
    """Strong components in the only order a single walk can visit them all.

    Each component must carry a cycle and consecutive components must be
    joined by an edge; otherwise no walk covers Y and the set is rejected.
    """
    C = nx.condensation(G)
    topo = list(nx.topological_sort(C))
    comps = [frozenset(C.nodes[c]["members"]) for c in topo]
    for c, comp in zip(topo, comps):
        if len(comp) == 1 and not G.has_edge(next(iter(comp)), next(iter(comp))):
            raise PreconditionError("Y is not chain transitive: a member has no chain back to itself")
    for u, v in zip(topo, topo[1:]):
        if not C.has_edge(u, v):
            raise PreconditionError("Y is not chain transitive: two members are not chain connected")
    return comps


def _shortest_word_to(tree: MarkovTree, eta) -> Word:
    """Shortest admissible word from the root whose last vertex has type ``eta``."""
    if eta == tree.root:
        return ()
    queue = deque([((i,), tree.gen_type[i]) for i in tree.root.generators])
    seen = set()
    while queue:
        w, ty = queue.popleft()
        if ty == eta:
            return w
        if ty in seen:
            continue
        seen.add(ty)
        for i in ty.generators:
            queue.append((w + (i,), tree.gen_type[i]))
    raise PreconditionError(f"type {eta} is not reachable from the root")


def _tour(tree, G, start, classes, close: bool):
    """Walk from ``start`` through every class (greedy nearest-first); optionally return to start."""
    seq = [start]
    gens: list = []
    todo = set(classes.values()) - {classes[start]}
    cur = start
    while todo:
        targets = [y for y, c in classes.items() if c in todo]
        hop = shortest_chain(G, cur, targets)
        if hop is None:
            raise PreconditionError("no chain between cover points; the set is not chain transitive")
        for (u, g), (v, _) in zip(hop, hop[1:]):
            gens.append(g)
            seq.append(v)
            todo.discard(classes[v])
        cur = seq[-1]
    if close:
        hop = shortest_chain(G, cur, [start])
        if hop is None:
            raise PreconditionError("no chain back to the start of the tour")
        for (u, g), (v, _) in zip(hop, hop[1:]):
            gens.append(g)
            seq.append(v)
    return seq, gens


def pict_to_omega_p(T: TsftHandle, Y: Iterable[Window], R: int, N: int,
                    rng: random.Random | None = None) -> Construction:
    """Build a point whose limit set along a ray is Y, from chains between cover points.

    For each scale 2^-r (r = m+1..R) the members of Y are grouped into
    balls of that radius, a tour through one point per ball is made from
    shortest chains, and the tours are concatenated.  The last tour is
    closed and repeated up to the horizon.  Each ray vertex takes the root
    label of its chain point, each subtree leaving the ray takes the
    chain point's labels, and everything else is filled from live blocks.

    A set that is not chain transitive at the finest scale is still
    accepted when its strong components can be walked in order, each
    one cycled until all its members sit deeper than n.  The limit set
    then matches Y only up to the horizon; ``pict`` is False in that case.
    """
    tree = T.tree
    Y = sorted(set(Y), key=lambda w: w.sort_key(T.alphabet))
    if not Y:
        raise PreconditionError("Y is empty")
    n = _common_depth(Y)
    m = T.step
    if n < 1:
        raise PreconditionError("members of Y need depth >= 1")
    if R < m + 1:
        raise PreconditionError(f"max scale R = {R} is below m+1 = {m + 1}")
    bad = [y for y in Y if not T.in_language(y)]
    if bad:
        raise PreconditionError(f"{len(bad)} members of Y are not in the language")

    levels = []
    for r in range(m + 1, R + 1):
        a = min(r + 1, n - 1)
        G = chain_graph_at(tree, Y, a)
        c = min(r + 1, n)
        classes = {y: tree.restrict(y, c).labels + (y.eta.canonical_id,) for y in Y}
        if levels and levels[-1][0] == a:
            levels[-1] = (a, G, classes)
        else:
            levels.append((a, G, classes))
    finest = levels[-1][1]
    pict = bool(graph_pict(finest))
    if not pict:
        # finite horizon only: visit the components one after the other
        levels = levels[-1:]
    order = _ordered_components(finest)

    lead, _, start = min((_shortest_word_to(tree, y.eta), y.sort_key(T.alphabet), y) for y in order[0])
    L = len(lead)
    z: list = [start]
    word: list = list(lead)

    def extend(seq, gens):
        z.extend(seq[1:])
        word.extend(gens)

    for a, G, classes in levels[:-1]:
        extend(*_tour(tree, G, z[-1], classes, close=False))
    a, G, classes = levels[-1]
    for idx, comp in enumerate(order):
        if z[-1] not in comp:
            hop = shortest_chain(G, z[-1], comp)
            if hop is None:
                raise PreconditionError("no chain into the next component")
            extend([u for u, _ in hop], [g for _, g in hop[:-1]])
        sub = {y: classes[y] for y in comp}
        seq, gens = _tour(tree, G, z[-1], sub, close=True)
        last = idx == len(order) - 1
        pending = {classes[y] for y in comp}
        while (len(word) < N) if last else pending:
            base = L + len(z) - 1
            extend(seq, gens)
            pending -= {classes[y] for j, y in enumerate(seq[1:], 1) if base + j > n}
    word = word[:N]
    z = z[: N - L + 1]

    fixed: dict = {}
    ray = tuple(word)
    for j, zj in enumerate(z):
        k = L + j
        pk = ray[:k]
        nxt = ray[k] if k < N else None
        for h, lab in zip(tree.delta(zj.eta, n), zj.labels):
            if len(pk) + len(h) > N:
                break
            if not h or h[0] != nxt:
                fixed[pk + h] = lab
    try:
        if tree.delta_size(tree.root, N) <= FULL_WINDOW_VERTICES:
            t = fill_window(T, tree.root, N, fixed=fixed, rng=rng)
        else:
            sites = sorted({ray[:k] + h for k in range(N - m + 1) for h in tree.delta(tree.type_after(tree.root, ray[:k]), n)
                            if len(h) + k <= N - m}, key=lambda w: (len(w), w))
            t = PartialWindow(tree.root, N, fill_labels(T, tree.root, sites, fixed, rng))
    except FillError as e:
        raise FillError(f"could not complete the chain point: {e}") from None

    ok = True
    in_lang = True
    for j, zj in enumerate(z):
        k = L + j
        if k > N - n:
            break
        here = tree.view(t, ray[:k], n)
        in_lang = in_lang and T.in_language(here)
        if not tree.metric(here, zj).below(Fraction(1)):
            ok = False
    if isinstance(t, Window):
        in_lang = T.in_language(t)
    return Construction(t, ray, z, L, ok, [a for a, _, _ in levels], pict, in_lang)
