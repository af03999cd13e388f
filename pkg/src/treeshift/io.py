"""Text and JSON formats for matrices, alphabets, windows, forbidden sets, orbits and schedules.

Follower types appear in files by 1-based id: ``eta=1`` is the root type.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .errors import InputError
from .shadowing import ProjectedOrbit
from .shift_space import ForbiddenSet
from .tree_core import MarkovMatrix, MarkovTree, Window, format_word, parse_dyadic, parse_word


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{what}: invalid JSON ({e.msg} at line {e.lineno})") from None


def load_matrix(path) -> MarkovMatrix:
    return MarkovMatrix.from_text(_read(path))


def parse_alphabet(text: str) -> tuple:
    symbols = tuple(ln.strip() for ln in text.splitlines() if ln.strip())
    if not symbols:
        raise InputError("alphabet file is empty")
    if len(set(symbols)) != len(symbols):
        raise InputError("alphabet has repeated symbols")
    if any(len(s.split()) != 1 for s in symbols):
        raise InputError("alphabet symbols must be single tokens")
    return symbols


def load_alphabet(path) -> tuple:
    return parse_alphabet(_read(path))


def type_by_file_id(tree: MarkovTree, ident) -> object:
    try:
        k = int(ident)
    except (TypeError, ValueError):
        raise InputError(f"bad type id {ident!r}") from None
    if k < 1:
        raise InputError(f"type ids start at 1, got {k}")
    return tree.type_by_id(k - 1)


# windows ---------------------------------------------------------------

def format_window(tree: MarkovTree, w: Window) -> str:
    lines = [f"eta={w.eta.canonical_id + 1} depth={w.depth}"]
    lines += [f"{format_word(v)} {a}" for v, a in zip(tree.delta(w.eta, w.depth), w.labels)]
    return "\n".join(lines) + "\n"


def parse_windows(tree: MarkovTree, text: str, alphabet=None) -> list:
    """One or more concatenated window records."""
    records = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("eta="):
            fields = dict(f.split("=", 1) for f in line.split() if "=" in f)
            if set(fields) != {"eta", "depth"}:
                raise InputError(f"line {lineno}: header must be 'eta=<id> depth=<n>'")
            try:
                depth = int(fields["depth"])
            except ValueError:
                raise InputError(f"line {lineno}: bad depth") from None
            cur = (type_by_file_id(tree, fields["eta"]), depth, {})
            records.append(cur)
            continue
        if cur is None:
            raise InputError(f"line {lineno}: vertex line before any header")
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected '<vertex> <symbol>'")
        v = parse_word(parts[0])
        if v in cur[2]:
            raise InputError(f"line {lineno}: vertex {parts[0]} repeated")
        cur[2][v] = parts[1]
    out = []
    for eta, depth, labels in records:
        w = tree.window(eta, depth, labels)
        if alphabet is not None and set(w.labels) - set(alphabet):
            raise InputError(f"window uses symbols outside the alphabet: {sorted(set(w.labels) - set(alphabet))}")
        out.append(w)
    return out


def load_windows(tree: MarkovTree, path, alphabet=None) -> list:
    ws = parse_windows(tree, _read(path), alphabet)
    if not ws:
        raise InputError(f"{path}: no window records")
    return ws


def window_to_json(tree: MarkovTree, w: Window) -> dict:
    return {
        "eta": w.eta.canonical_id + 1,
        "depth": w.depth,
        "labels": {format_word(v): a for v, a in zip(tree.delta(w.eta, w.depth), w.labels)},
    }


def window_from_json(tree: MarkovTree, obj) -> Window:
    if not isinstance(obj, dict) or not {"eta", "depth", "labels"} <= set(obj):
        raise InputError("window object needs 'eta', 'depth' and 'labels'")
    eta = type_by_file_id(tree, obj["eta"])
    if not isinstance(obj["depth"], int) or obj["depth"] < 0:
        raise InputError("window depth must be a non-negative integer")
    if not isinstance(obj["labels"], dict):
        raise InputError("window labels must be an object keyed by vertex")
    labels = {parse_word(k): str(v) for k, v in obj["labels"].items()}
    return tree.window(eta, obj["depth"], labels)


# forbidden sets --------------------------------------------------------

def forbidden_from_json(tree: MarkovTree, obj) -> ForbiddenSet:
    if not isinstance(obj, dict) or "alphabet" not in obj:
        raise InputError("forbidden-set file needs an 'alphabet'")
    alphabet = tuple(str(a) for a in obj["alphabet"])
    patterns = tuple(window_from_json(tree, p) for p in obj.get("patterns", []))
    return ForbiddenSet(alphabet, patterns)


def load_forbidden(tree: MarkovTree, path) -> ForbiddenSet:
    return forbidden_from_json(tree, _json(_read(path), str(path)))


def forbidden_to_json(tree: MarkovTree, F: ForbiddenSet) -> dict:
    return {"alphabet": list(F.alphabet), "patterns": [window_to_json(tree, p) for p in F.patterns]}


# orbits and schedules --------------------------------------------------

def orbit_to_json(tree: MarkovTree, O: ProjectedOrbit) -> dict:
    return {
        "horizon": O.horizon,
        "payload_depth": O.payload_depth,
        "entries": {format_word(g): window_to_json(tree, O.table[g]) for g in tree.delta(tree.root, O.horizon)},
    }


def orbit_from_json(tree: MarkovTree, obj) -> ProjectedOrbit:
    if not isinstance(obj, dict) or not {"horizon", "payload_depth", "entries"} <= set(obj):
        raise InputError("orbit file needs 'horizon', 'payload_depth' and 'entries'")
    table = {parse_word(k): window_from_json(tree, v) for k, v in obj["entries"].items()}
    return ProjectedOrbit(int(obj["horizon"]), int(obj["payload_depth"]), table, tree.root)


def load_orbit(tree: MarkovTree, path) -> ProjectedOrbit:
    return orbit_from_json(tree, _json(_read(path), str(path)))


def load_schedule(path) -> list:
    """JSON list of {"delta": "2^-k", "n": depth} (or [delta, n] pairs)."""
    obj = _json(_read(path), str(path))
    if isinstance(obj, dict):
        obj = obj.get("schedule")
    if not isinstance(obj, list) or not obj:
        raise InputError("schedule must be a nonempty list")
    out = []
    for item in obj:
        if isinstance(item, dict):
            delta, n = item.get("delta"), item.get("n")
        elif isinstance(item, list) and len(item) == 2:
            delta, n = item
        else:
            raise InputError("schedule entries are {'delta': '2^-k', 'n': int}")
        if not isinstance(n, int) or n < 0:
            raise InputError("schedule depth n must be a non-negative integer")
        out.append((parse_dyadic(str(delta)), n))
    return out


def fraction_text(x: Fraction) -> str:
    """2^-k for dyadics, the plain fraction otherwise."""
    if x > 0 and x.numerator == 1 and x.denominator & (x.denominator - 1) == 0:
        return f"2^-{x.denominator.bit_length() - 1}"
    if x > 0 and x.denominator == 1 and x.numerator & (x.numerator - 1) == 0:
        return f"2^{x.numerator.bit_length() - 1}"
    return str(x)
