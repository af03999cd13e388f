"""Markov-Cayley trees: vertices, follower types, Delta balls, shifts and the metric.

Words are tuples of 0-based generator indices; ``()`` is the root.  The
text formats use 1-based indices joined by dots (``"1.2"``) and ``"e"`` for
the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Sequence

from .errors import InputError, UnresolvedDistance

Word = tuple


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("e", "", "ε"):
        return ()
    try:
        letters = tuple(int(x) - 1 for x in text.split("."))
    except ValueError:
        raise InputError(f"bad vertex {text!r}") from None
    if any(i < 0 for i in letters):
        raise InputError(f"bad vertex {text!r}")
    return letters


def format_word(word: Word) -> str:
    if not word:
        return "e"
    return ".".join(str(i + 1) for i in word)


_DYADIC = re.compile(r"^\s*2\^\(?(-?\d+)\)?\s*$")


def parse_dyadic(text: str) -> Fraction:
    """Parse ``2^-k`` (or a plain rational such as ``3/8``) exactly."""
    m = _DYADIC.match(text)
    if m:
        return Fraction(2) ** int(m.group(1))
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad resolution {text!r}, expected 2^-k") from None


def dyadic(k: int) -> Fraction:
    """2**-k as an exact fraction."""
    return Fraction(2) ** (-k)


def agreement_needed(eps: Fraction) -> int:
    """Smallest j >= -1 such that agreement on Delta_j certifies d < eps."""
    j = -1
    while dyadic(j) >= eps:
        j += 1
    return j


@total_ordering
@dataclass(frozen=True)
class Distance:
    """A value 2^-exponent of the tree metric.

    ``resolved=False`` is the marker "<= 2^-exponent": the two windows agree
    on everything available and the true distance is unknown.  Exponent -1
    encodes the value 2 used when the roots already differ.
    """

    exponent: int
    resolved: bool = True

    @property
    def value(self) -> Fraction:
        return dyadic(self.exponent)

    def _key(self):
        return (self.value, self.resolved)

    def __lt__(self, other: "Distance") -> bool:
        return self._key() < other._key()

    def below(self, eps: Fraction) -> bool:
        """Decide ``d < eps``; raise when the marker cannot decide it."""
        if self.resolved:
            return self.value < eps
        if self.value < eps:
            return True
        raise UnresolvedDistance(
            f"distance only known to be <= {self.value}, cannot compare with {eps}"
        )

    def at_most(self, bound: Fraction) -> bool:
        return self.value <= bound

    def __str__(self) -> str:
        s = "2" if self.exponent == -1 else f"2^-{self.exponent}"
        return s if self.resolved else f"<={s}"


@dataclass(frozen=True)
class MarkovMatrix:
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        d = len(rows)
        if d == 0:
            raise InputError("matrix must have at least one generator")
        for row in rows:
            if len(row) != d:
                raise InputError("matrix must be square")
            if any(x not in (0, 1) for x in row):
                raise InputError("matrix entries must be 0 or 1")
            if not any(row):
                raise InputError("matrix rows must contain a 1 (every vertex needs a child)")
        object.__setattr__(self, "entries", rows)

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def irreducible(self) -> bool:
        d = self.d
        reach = [[bool(self.entries[i][j]) for j in range(d)] for i in range(d)]
        for k in range(d):
            for i in range(d):
                if reach[i][k]:
                    for j in range(d):
                        if reach[k][j]:
                            reach[i][j] = True
        return all(all(row) for row in reach)

    @classmethod
    def from_text(cls, text: str) -> "MarkovMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InputError("empty matrix file")
        try:
            d = int(lines[0])
        except ValueError:
            raise InputError("first line of matrix file must be d") from None
        rows = lines[1:]
        if len(rows) != d or any(len(r) != d or set(r) - {"0", "1"} for r in rows):
            raise InputError(f"matrix file must hold {d} rows of {d} bits")
        return cls(tuple(tuple(int(c) for c in r) for r in rows))

    def to_text(self) -> str:
        return "\n".join([str(self.d)] + ["".join(map(str, r)) for r in self.entries]) + "\n"


FULL2 = MarkovMatrix(((1, 1), (1, 1)))
GOLDEN = MarkovMatrix(((1, 1), (1, 0)))
UPPER = MarkovMatrix(((1, 1), (0, 1)))


@dataclass(frozen=True)
class FollowerType:
    """A follower set, identified by the bit mask of allowed first generators."""

    mask: tuple
    canonical_id: int = field(compare=False)

    def allows(self, i: int) -> bool:
        return bool(self.mask[i])

    @property
    def generators(self) -> tuple:
        return tuple(i for i, b in enumerate(self.mask) if b)

    def __str__(self):
        return f"eta{self.canonical_id + 1}[{''.join(map(str, self.mask))}]"


@dataclass(frozen=True)
class Window:
    """Labels on Delta_depth of a follower type, in canonical vertex order."""

    eta: FollowerType
    depth: int
    labels: tuple

    def sort_key(self, alphabet: Sequence[str] | None = None):
        if alphabet is None:
            return (self.eta.canonical_id, self.depth, self.labels)
        pos = {a: i for i, a in enumerate(alphabet)}
        return (self.eta.canonical_id, self.depth, tuple(pos[x] for x in self.labels))


@dataclass(frozen=True, eq=False)
class PartialWindow:
    """A point known only on some vertices of Delta_depth (a tube around a ray, say)."""

    eta: FollowerType
    depth: int
    labels: dict


class MarkovTree:
    """The tree T_M together with its finite follower family."""

    def __init__(self, matrix: MarkovMatrix | Sequence[Sequence[int]]):
        if not isinstance(matrix, MarkovMatrix):
            matrix = MarkovMatrix(tuple(map(tuple, matrix)))
        self.matrix = matrix
        d = matrix.d
        self.d = d
        root = FollowerType((1,) * d, 0)
        family = [root]
        by_mask = {root.mask: root}
        gen_type = []
        for row in matrix.entries:
            if row not in by_mask:
                by_mask[row] = FollowerType(row, len(family))
                family.append(by_mask[row])
            gen_type.append(by_mask[row])
        self.root = root
        self.family = tuple(family)
        self.gen_type = tuple(gen_type)
        self._by_id = {eta.canonical_id: eta for eta in family}
        # per-instance caches; lru_cache on methods would pin self
        self.delta = lru_cache(maxsize=None)(self._delta)
        self.index = lru_cache(maxsize=None)(self._index)
        self.level_offsets = lru_cache(maxsize=None)(self._level_offsets)
        self.sub_plan = lru_cache(maxsize=None)(self._sub_plan)
        self.assembly_plan = lru_cache(maxsize=None)(self._assembly_plan)

    def __repr__(self):
        return f"MarkovTree({[''.join(map(str, r)) for r in self.matrix.entries]})"

    def type_by_id(self, canonical_id: int) -> FollowerType:
        try:
            return self._by_id[canonical_id]
        except KeyError:
            raise InputError(f"unknown follower type id {canonical_id}") from None

    def type_after(self, eta: FollowerType, word: Word) -> FollowerType:
        """Follower type of ``word`` read inside ``eta``; raises if inadmissible."""
        if not self.admissible(word, eta):
            raise InputError(f"word {format_word(word)} not admissible in {eta}")
        return self.gen_type[word[-1]] if word else eta

    def admissible(self, word: Word, eta: FollowerType | None = None) -> bool:
        eta = eta or self.root
        if not word:
            return True
        if not all(0 <= i < self.d for i in word):
            return False
        if not eta.mask[word[0]]:
            return False
        rows = self.matrix.entries
        return all(rows[a][b] for a, b in zip(word, word[1:]))

    def _delta(self, eta: FollowerType, m: int) -> tuple:
        if m < 0:
            return ()
        levels = [[()]]
        for _ in range(m):
            nxt = []
            for w in levels[-1]:
                ty = self.gen_type[w[-1]] if w else eta
                nxt.extend(w + (i,) for i in ty.generators)
            levels.append(nxt)
        return tuple(w for level in levels for w in level)

    def _index(self, eta: FollowerType, m: int) -> dict:
        return {w: k for k, w in enumerate(self.delta(eta, m))}

    def _level_offsets(self, eta: FollowerType, m: int) -> tuple:
        """offsets[k] = number of vertices of depth < k, for k = 0..m+1."""
        offs = [0] * (m + 2)
        for w in self.delta(eta, m):
            offs[len(w) + 1] += 1
        for k in range(1, m + 2):
            offs[k] += offs[k - 1]
        return tuple(offs)

    def delta_size(self, eta: FollowerType, m: int) -> int:
        """|Delta_m(eta)| by counting types level by level, without listing words."""
        if m < 0:
            return 0
        level = {eta: 1}
        total = 1
        for _ in range(m):
            nxt: dict = {}
            for ty, c in level.items():
                for i in ty.generators:
                    nxt[self.gen_type[i]] = nxt.get(self.gen_type[i], 0) + c
            level = nxt
            total += sum(level.values())
        return total

    def _sub_plan(self, eta: FollowerType, m: int, g: Word, n: int) -> tuple:
        ty = self.type_after(eta, g)
        if len(g) + n > m:
            raise InputError(f"shift by {format_word(g)} to depth {n} exceeds window depth {m}")
        idx = self.index(eta, m)
        return tuple(idx[g + h] for h in self.delta(ty, n))

    def _assembly_plan(self, eta: FollowerType, k: int) -> tuple:
        """For each vertex of Delta_k(eta): None for the root, else (slot, position in child window)."""
        gens = eta.generators
        slot = {g: s for s, g in enumerate(gens)}
        plan = []
        for w in self.delta(eta, k):
            if not w:
                plan.append(None)
            else:
                child = self.gen_type[w[0]]
                plan.append((slot[w[0]], self.index(child, k - 1)[w[1:]]))
        return tuple(plan)

    # windows -----------------------------------------------------------

    def window(self, eta: FollowerType, depth: int, labels) -> Window:
        """Build a window from a sequence in canonical order or a word->symbol mapping."""
        verts = self.delta(eta, depth)
        if isinstance(labels, dict):
            missing = [format_word(w) for w in verts if w not in labels]
            extra = [format_word(w) for w in labels if w not in self.index(eta, depth)]
            if missing or extra:
                raise InputError(f"window labels mismatch Delta_{depth}: missing {missing[:4]} extra {extra[:4]}")
            labels = tuple(labels[w] for w in verts)
        labels = tuple(labels)
        if len(labels) != len(verts):
            raise InputError(f"expected {len(verts)} labels, got {len(labels)}")
        return Window(eta, depth, labels)

    def uniform(self, eta: FollowerType, depth: int, symbol) -> Window:
        return Window(eta, depth, (symbol,) * self.delta_size(eta, depth))

    def label(self, w: Window, word: Word):
        return w.labels[self.index(w.eta, w.depth)[word]]

    def as_dict(self, w: Window) -> dict:
        return dict(zip(self.delta(w.eta, w.depth), w.labels))

    def restrict(self, w: Window, n: int) -> Window:
        if n > w.depth:
            raise InputError(f"cannot restrict depth {w.depth} window to depth {n}")
        if n == w.depth:
            return w
        return Window(w.eta, n, w.labels[: self.level_offsets(w.eta, w.depth)[n + 1]])

    def shift(self, w: Window, g: Word) -> Window:
        """sigma_g(w): the subtree window hanging at g."""
        if not g:
            return w
        if len(g) > w.depth:
            raise InputError(f"|g| = {len(g)} exceeds window depth {w.depth}")
        return self.subwindow(w, g, w.depth - len(g))

    def subwindow(self, w: Window, g: Word, n: int) -> Window:
        """sigma_g(w) restricted to Delta_n."""
        plan = self.sub_plan(w.eta, w.depth, tuple(g), n)
        labels = w.labels
        return Window(self.type_after(w.eta, g), n, tuple(labels[k] for k in plan))

    def view(self, t: Window | PartialWindow, g: Word, n: int) -> Window:
        """sigma_g(t)|Delta_n for full or partial windows."""
        if isinstance(t, Window):
            return self.subwindow(t, g, n)
        g = tuple(g)
        ty = self.type_after(t.eta, g)
        if len(g) + n > t.depth:
            raise InputError(f"shift by {format_word(g)} to depth {n} exceeds depth {t.depth}")
        try:
            return Window(ty, n, tuple(t.labels[g + h] for h in self.delta(ty, n)))
        except KeyError as e:
            raise InputError(f"vertex {format_word(e.args[0])} is outside the known part") from None

    def assemble(self, eta: FollowerType, root_label, children: Sequence[Window]) -> Window:
        """Window of depth k+1 from a root symbol and one depth-k window per allowed child."""
        k = children[0].depth if children else 0
        plan = self.assembly_plan(eta, k + 1)
        labels = tuple(root_label if p is None else children[p[0]].labels[p[1]] for p in plan)
        return Window(eta, k + 1, labels)

    def metric(self, s: Window, t: Window) -> Distance:
        """Tree distance of two windows of one type, at their common depth."""
        if s.eta != t.eta:
            raise InputError(f"metric needs windows of one type, got {s.eta} and {t.eta}")
        n = min(s.depth, t.depth)
        offs = self.level_offsets(s.eta, n)
        a, b = s.labels, t.labels
        for k in range(n + 1):
            if a[offs[k]:offs[k + 1]] != b[offs[k]:offs[k + 1]]:
                return Distance(k - 1)
        return Distance(n, resolved=False)

    def agree(self, s: Window, t: Window, j: int) -> bool:
        """True iff s and t (same type) agree on Delta_j; j = -1 is vacuous."""
        if j < 0:
            return s.eta == t.eta
        if s.eta != t.eta or j > min(s.depth, t.depth):
            return False
        cut = self.level_offsets(s.eta, j)[j + 1]
        return s.labels[:cut] == t.labels[:cut]


def follower_family(matrix: MarkovMatrix) -> tuple[tuple[FollowerType, ...], tuple[FollowerType, ...]]:
    """The deduplicated follower family and the generator -> type map."""
    tree = MarkovTree(matrix)
    return tree.family, tree.gen_type


def enumerate_delta(tree: MarkovTree, eta: FollowerType, m: int) -> tuple:
    return tree.delta(eta, m)


def type_of(tree: MarkovTree, word: Iterable[int], eta: FollowerType | None = None) -> FollowerType:
    return tree.type_after(eta or tree.root, tuple(word))
