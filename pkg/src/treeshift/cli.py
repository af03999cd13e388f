"""Command-line front end.

Exit codes: 0 pass, 1 verdict failure, 2 input error, 3 resource budget.
Output is deterministic for fixed inputs and seed; wall time is only
reported with ``--timing``.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import io
from .errors import InputError, PreconditionError, TreeShiftError
from .fixtures import MATRICES, tree as builtin_tree
from .shift_space import DEFAULT_BUDGET_BITS, ForbiddenSet, TsftHandle, enumerate_windows
from .tree_core import MarkovTree, Window, dyadic, format_word, parse_dyadic, parse_word

BUDGET_ENV = "TREESHIFT_BUDGET_BITS"


class Report:
    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.result: dict = {}
        self.verdicts: dict = {}
        self.witnesses: dict = {}
        self.lines: list = []
        self.seconds: float | None = None

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def verdict(self, name: str, passed: bool, witness=None):
        self.verdicts[name] = bool(passed)
        if witness is not None and not passed:
            self.witnesses[name] = witness

    def as_json(self) -> str:
        obj = {
            "command": self.command,
            "config": self.config,
            "result": self.result,
            "verdicts": self.verdicts,
            "witnesses": self.witnesses,
            "ok": self.ok,
        }
        if self.seconds is not None:
            obj["seconds"] = round(self.seconds, 3)
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"

    def as_text(self) -> str:
        out = [f"# {self.command}"]
        out += [f"# {k} = {self.config[k]}" for k in sorted(self.config)]
        out += self.lines
        for name in sorted(self.verdicts):
            mark = "PASS" if self.verdicts[name] else "FAIL"
            w = f"  witness: {self.witnesses[name]}" if name in self.witnesses else ""
            out.append(f"{mark} {name}{w}")
        if self.seconds is not None:
            out.append(f"# wall time {self.seconds:.3f}s")
        return "\n".join(out) + "\n"


# argument helpers ------------------------------------------------------

def _resolution(text: str) -> int:
    """'3' or '2^-3' -> 3."""
    text = text.strip()
    if text.lstrip("-").isdigit():
        k = int(text)
    else:
        x = parse_dyadic(text)
        if x.numerator != 1 or x.denominator & (x.denominator - 1):
            raise InputError(f"resolution {text!r} is not of the form 2^-k")
        k = x.denominator.bit_length() - 1
    if k < 0:
        raise InputError("resolution must be >= 0")
    return k


def _budget(args) -> float:
    if args.max_enum_bits is not None:
        bits = args.max_enum_bits
    else:
        raw = os.environ.get(BUDGET_ENV)
        try:
            bits = float(raw) if raw else DEFAULT_BUDGET_BITS
        except ValueError:
            raise InputError(f"{BUDGET_ENV} must be a number, got {raw!r}") from None
    if bits <= 0:
        raise InputError("enumeration budget must be positive")
    return bits


def _tree(args) -> MarkovTree:
    spec = args.matrix
    if spec in MATRICES and not Path(spec).exists():
        return builtin_tree(spec)
    return MarkovTree(io.load_matrix(spec))


def _shift(args, tr: MarkovTree) -> TsftHandle:
    alphabet = io.load_alphabet(args.alphabet) if args.alphabet else None
    path = getattr(args, "tsft", None) or args.forbidden
    if path:
        F = io.load_forbidden(tr, path)
        if alphabet is not None and tuple(alphabet) != F.alphabet:
            raise InputError("alphabet file and forbidden-set alphabet differ")
    else:
        F = ForbiddenSet(tuple(alphabet or ("0", "1")))
    return TsftHandle(tr, F)


def _config(args, tr: MarkovTree, **extra) -> dict:
    cfg = {
        "matrix": tr.matrix.to_text().strip().replace("\n", "/"),
        "budget_bits": _budget(args),
    }
    for key in ("alphabet", "forbidden", "tsft", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg.update({k: v for k, v in extra.items() if v is not None})
    return cfg


def _windows_json(tr, ws, alphabet=None) -> list:
    return [io.window_to_json(tr, w) for w in sorted(ws, key=lambda w: w.sort_key(alphabet))]


def _window_text(tr, w: Window) -> list:
    return io.format_window(tr, w).rstrip("\n").split("\n")


# commands --------------------------------------------------------------

def cmd_tree_info(args) -> Report:
    tr = _tree(args)
    rep = Report("tree info", _config(args, tr))
    depth = args.depth
    types = []
    for eta in tr.family:
        counts = [tr.delta_size(eta, k) for k in range(depth + 1)]
        level = [c - p for c, p in zip(counts, [0] + counts)]
        types.append({"id": eta.canonical_id + 1, "mask": "".join(map(str, eta.mask)),
                      "delta_counts": counts, "level_counts": level})
        rep.lines.append(f"eta{eta.canonical_id + 1} mask {''.join(map(str, eta.mask))} "
                         f"level sizes k=0..{depth}: {' '.join(map(str, level))}; "
                         f"|Delta_k|: {' '.join(map(str, counts))}")
    rep.result = {"d": tr.d, "types": types, "irreducible": tr.matrix.irreducible}
    rep.lines[:0] = [f"d = {tr.d}", f"|I| = {len(tr.family)}", f"irreducible = {tr.matrix.irreducible}"]
    return rep


def cmd_lang_enum(args) -> Report:
    tr = _tree(args)
    T = _shift(args, tr)
    eta = io.type_by_file_id(tr, args.eta)
    rep = Report("lang enum", _config(args, tr, eta=args.eta, depth=args.depth))
    ws = enumerate_windows(T, eta, args.depth, budget_bits=_budget(args))
    rep.result = {"count": len(ws), "windows": _windows_json(tr, ws, T.alphabet)}
    rep.lines.append(f"count = {len(ws)}")
    for w in ws:
        rep.lines += _window_text(tr, w)
    return rep


def cmd_omega(args) -> Report:
    from .limits import (approx_omega, approx_omega_cps, approx_omega_followers, approx_omega_ray,
                         cps_vectors_sorted, maximal_vectors)
    tr = _tree(args)
    T = _shift(args, tr)
    ws = io.load_windows(tr, args.t, T.alphabet)
    if len(ws) != 1:
        raise InputError("the point file must hold exactly one window")
    t = ws[0]
    if args.horizon is not None:
        if args.horizon > t.depth:
            raise PreconditionError(f"point has depth {t.depth}, below the horizon {args.horizon}")
        t = tr.restrict(t, args.horizon)
    n = _resolution(args.res)
    rep = Report("omega", _config(args, tr, mode=args.mode, res=n, horizon=t.depth, ray=args.ray))
    if args.mode in ("ray", "followers"):
        if not args.ray:
            raise InputError(f"--mode {args.mode} needs --ray")
        p = parse_word(args.ray)
        fn = approx_omega_ray if args.mode == "ray" else approx_omega_followers
        S = fn(tr, t, p, n)
    elif args.mode == "all":
        S = approx_omega(tr, t, n)
    else:
        vecs = cps_vectors_sorted(approx_omega_cps(tr, t, n), T.alphabet)
        top = maximal_vectors(vecs)
        rep.result = {
            "count": len(vecs),
            "vectors": [{"types": [e.canonical_id + 1 for e in v.types],
                         "components": [io.window_to_json(tr, c) for c in v.components],
                         "maximal": v in top} for v in vecs],
        }
        rep.lines.append(f"count = {len(vecs)}")
        for j, v in enumerate(vecs):
            rep.lines.append(f"vector {j + 1} types {[e.canonical_id + 1 for e in v.types]}"
                             f"{' maximal' if v in top else ''}")
            for c in v.components:
                rep.lines += ["  " + ln for ln in _window_text(tr, c)]
        return rep
    members = S.sorted(T.alphabet)
    rep.result = {"count": len(members), "members": _windows_json(tr, members, T.alphabet)}
    rep.lines.append(f"count = {len(members)}")
    for w in members:
        rep.lines += _window_text(tr, w)
    return rep


def cmd_cps_list(args) -> Report:
    from .limits import enumerate_cps
    tr = _tree(args)
    eta = io.type_by_file_id(tr, args.eta)
    rep = Report("cps list", _config(args, tr, eta=args.eta, max_depth=args.max_depth))
    cs = enumerate_cps(tr, args.max_depth, eta)
    rep.result = {"count": len(cs), "sets": [[format_word(v) for v in c.sorted()] for c in cs]}
    rep.lines.append(f"count = {len(cs)}")
    rep.lines += [str(c) for c in cs]
    return rep


def cmd_pict_check(args) -> Report:
    from .chains import is_pict
    tr = _tree(args)
    T = _shift(args, tr)
    Y = io.load_windows(tr, args.set, T.alphabet)
    eps = parse_dyadic(args.eps)
    rep = Report("pict check", _config(args, tr, eps=args.eps, size=len(set(Y))))
    res = is_pict(tr, Y, eps, require_irreducible=args.require_irreducible)
    wit = None
    if res.counterexample:
        a, b = res.counterexample
        wit = {"from": io.window_to_json(tr, a), "to": io.window_to_json(tr, b)}
    rep.result = {"pict": res.pict}
    rep.verdict("chain_transitive", res.pict, wit)
    return rep


def cmd_pict_construct(args) -> Report:
    from .chains import pict_to_omega_p
    from .limits import approx_omega_ray
    tr = _tree(args)
    T = _shift(args, tr)
    Y = sorted(set(io.load_windows(tr, args.set, T.alphabet)), key=lambda w: w.sort_key(T.alphabet))
    rep = Report("pict construct", _config(args, tr, horizon=args.horizon, maxscale=args.maxscale))
    c = pict_to_omega_p(T, Y, args.maxscale, args.horizon, rng=random.Random(args.seed))
    n = Y[0].depth
    got = approx_omega_ray(tr, c.t, c.ray, n).members
    missing = [y for y in Y if y not in got]
    far = [w for w in got if not any(tr.metric(w, y).at_most(dyadic(n)) for y in Y if y.eta == w.eta)]
    rep.result = {
        "ray": format_word(c.ray),
        "transient": c.transient,
        "scales": c.scales,
        "finest_scale_pict": c.pict,
        "limit_set": _windows_json(tr, got, T.alphabet),
    }
    rep.lines += [f"ray = {format_word(c.ray)}", f"transient = {c.transient}",
                  f"finest scale chain transitive = {c.pict}", f"limit set size = {len(got)}"]
    rep.verdict("in_language", c.in_language)
    rep.verdict("telescoping", c.telescoping_ok)
    rep.verdict("Y_inside_limit_set", not missing, _windows_json(tr, missing) if missing else None)
    rep.verdict("limit_set_near_Y", not far, _windows_json(tr, far) if far else None)
    return rep


def _orbit(args, tr, T, make):
    if args.orbit:
        O = io.load_orbit(tr, args.orbit)
    else:
        O = make()
    if args.emit_orbit:
        Path(args.emit_orbit).write_text(json.dumps(io.orbit_to_json(tr, O), sort_keys=True, indent=1) + "\n")
    return O


def cmd_shadow_run(args) -> Report:
    from .shadowing import check_orbit, construct_shadow, defect, random_ppo, verify_shadowed
    tr = _tree(args)
    T = _shift(args, tr)
    delta = parse_dyadic(args.delta)
    s = _resolution(args.delta)
    m = T.step
    eps = parse_dyadic(args.eps) if args.eps else dyadic(m)
    rep = Report("shadow run", _config(args, tr, delta=args.delta, horizon=args.horizon,
                                       payload=args.payload, eps=io.fraction_text(eps), step=m))
    O = _orbit(args, tr, T, lambda: random_ppo(T, s, args.horizon, args.payload, args.seed))
    check_orbit(tr, O, T)
    d = defect(tr, O)
    t = construct_shadow(tr, O)
    chk = verify_shadowed(tr, O, t, eps)
    rep.result = {
        "max_defect": str(d.max_defect),
        "worst_distance": str(chk.worst),
        "checked_vertices": chk.checked,
        "shadow": io.window_to_json(tr, t) if args.emit_point else None,
    }
    rep.lines += [f"max defect = {d.max_defect}", f"checked vertices = {chk.checked}",
                  f"worst distance = {chk.worst}"]
    rep.verdict("defect_below_delta", d.below(delta))
    rep.verdict("shadow_allowed", T.allowed(t))
    rep.verdict("shadow_extendable", T.extendable(t))
    rep.verdict("shadowed", chk.ok, format_word(chk.worst_vertex) if chk.worst_vertex is not None else None)
    return rep


def cmd_shadow_adversarial(args) -> Report:
    from .shadowing import adversarial_ppo, construct_shadow, contains_pattern, defect, scan_one_shadowing
    tr = _tree(args)
    T = _shift(args, tr)
    ps = io.load_windows(tr, args.pattern, T.alphabet)
    if len(ps) != 1:
        raise InputError("the pattern file must hold exactly one window")
    P = ps[0]
    mp = P.depth
    N = args.horizon if args.horizon is not None else (mp if P.eta == tr.root else mp + 1)
    rep = Report("shadow adversarial", _config(args, tr, horizon=N, pattern_depth=mp))
    adv = adversarial_ppo(T, P, N, D=args.payload, rng=random.Random(args.seed))
    d = defect(tr, adv.orbit)
    t = construct_shadow(tr, adv.orbit)
    at = contains_pattern(tr, t, P)
    scan = scan_one_shadowing(T, adv.orbit, budget_bits=min(_budget(args), 24))
    rep.result = {
        "case": adv.case,
        "anchor": format_word(adv.anchor),
        "max_defect": str(d.max_defect),
        "scan_ran": scan.ran,
        "scan_candidates": scan.candidates,
    }
    rep.lines += [f"case = {adv.case}", f"anchor = {format_word(adv.anchor)}",
                  f"max defect = {d.max_defect}", f"scan candidates = {scan.candidates}"]
    rep.verdict("defect_within_bound", d.max_defect.at_most(dyadic(mp - 2)))
    rep.verdict("shadow_contains_pattern", adv.anchor in at)
    rep.verdict("scan_ran", scan.ran)
    rep.verdict("no_1_shadowing_window", not scan.shadowing,
                len(scan.shadowing) if scan.shadowing else None)
    return rep


def cmd_shadow_asymptotic(args) -> Report:
    from .shadowing import asymptotic_schedule, check_orbit, construct_shadow, random_asymptotic_ppo, verify_asymptotic
    tr = _tree(args)
    T = _shift(args, tr)
    m = T.step
    sched = io.load_schedule(args.schedule) if args.schedule else asymptotic_schedule(m, args.horizon, args.payload)
    rep = Report("shadow asymptotic", _config(args, tr, horizon=args.horizon, payload=args.payload, step=m,
                                              schedule=[[io.fraction_text(Fraction(d)), n] for d, n in sched]))
    O = _orbit(args, tr, T, lambda: random_asymptotic_ppo(T, args.horizon, args.payload, args.seed))
    check_orbit(tr, O, T)
    t = construct_shadow(tr, O)
    res = verify_asymptotic(tr, O, t, sched, m=m)
    entries = [[io.fraction_text(Fraction(e[0])), e[1], e[2]] if len(e) == 3 else list(e) for e in res.per_delta]
    rep.result = {"entries": entries}
    rep.lines += ["  ".join(map(str, e)) for e in entries]
    rep.verdict("every_scheduled_delta", res.ok)
    return rep


def cmd_paper_example(args) -> Report:
    from .acceptance import criterion_1, example_sets
    from .limits import check_limit_relations, cps_vectors_sorted
    from .fixtures import full_shift
    ex = example_sets()
    rep = Report("paper-example", {"matrix": "upper", "alphabet": "0,1", "horizon": 10, "res": 3,
                                   "p": "g2-ray", "q": "g1-ray", "point": "uniform 0"})
    names = [("omega", "omega^U(t)"), ("omega_p", "omega_p^U(t)"), ("omega_q", "omega_q^U(t)"),
             ("omega_Fp", "omega_Fp^U(t)")]
    for key, label in names:
        ms = ex[key].sorted()
        rep.result[key] = [str(w.eta) + ":" + "".join(w.labels) for w in ms]
        rep.lines.append(f"{label} = {{{', '.join('0^' + str(w.eta) for w in ms)}}}")
    vecs = cps_vectors_sorted(ex["omega_cps"])
    rep.result["omega_cps_maximal"] = [[str(c.eta) for c in v.components] for v in vecs]
    rep.lines.append("omega_CPS^U(t) maximal = {" + ", ".join(
        "(" + ", ".join("0^" + str(c.eta) for c in v.components) + ")" for v in vecs) + "}")
    inv = ex["omega_q_invariance"]
    rep.result["omega_q_invariant"] = inv.invariant
    rep.result["omega_q_witnesses"] = [f"0^{w.eta} g{i + 1}" for w, i in inv.witnesses]
    rep.lines.append(f"omega_q invariant = {inv.invariant}; witnesses: "
                     + ", ".join(rep.result["omega_q_witnesses"]))
    rel = check_limit_relations(full_shift("upper"), ex["t"], ex["p"], 3)
    for k in sorted(rel.verdicts):
        rep.verdict(f"relation {k}", rel.verdicts[k])
    try:
        criterion_1()
        matches = True
        why = None
    except AssertionError as e:
        matches, why = False, str(e)
    rep.verdict("matches_worked_example", matches, why)
    return rep


def cmd_suite(args) -> Report:
    from .acceptance import run_suite
    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError:
            raise InputError("--only takes comma-separated criterion numbers") from None
    rep = Report("suite", {"inject_fault": args.inject_fault, "only": sorted(only) if only else "all"})
    results = run_suite(only, inject_fault=args.inject_fault)
    rep.result = {"criteria": [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
                                **({"seconds": round(r.seconds, 3)} if args.timing else {})}
                               for r in results]}
    for r in results:
        rep.lines.append(r.line(args.timing))
        rep.verdict(f"criterion {r.number:02d}", r.passed)
    return rep


# parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--matrix", default="full2",
                        help="matrix file, or one of: " + ", ".join(MATRICES) + " (default full2)")
    common.add_argument("--alphabet", help="alphabet file, one symbol per line (default 0,1)")
    common.add_argument("--forbidden", help="forbidden-set JSON (default: full shift)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-enum-bits", type=float, default=None,
                        help=f"enumeration budget in bits (env {BUDGET_ENV}, default {DEFAULT_BUDGET_BITS})")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="report wall time (breaks byte-identity)")

    p = argparse.ArgumentParser(prog="treeshift", description="Tree-shifts on Markov-Cayley trees.")
    sub = p.add_subparsers(dest="group", required=True)

    def group(name, help_):
        g = sub.add_parser(name, help=help_)
        return g.add_subparsers(dest="action", required=True)

    tree_g = group("tree", "tree structure")
    a = tree_g.add_parser("info", parents=[common], help="follower types and level counts")
    a.add_argument("--depth", type=int, default=6)
    a.set_defaults(fn=cmd_tree_info)

    lang_g = group("lang", "the language of a tree-shift")
    a = lang_g.add_parser("enum", parents=[common], help="allowed extendable windows")
    a.add_argument("--eta", default="1")
    a.add_argument("--depth", type=int, required=True)
    a.set_defaults(fn=cmd_lang_enum)

    a = sub.add_parser("omega", parents=[common], help="finite-scale limit sets")
    a.add_argument("--mode", choices=("all", "ray", "followers", "cps"), default="all")
    a.add_argument("--t", required=True, help="window file holding the point")
    a.add_argument("--ray", help="ray prefix, dot-separated 1-based generators")
    a.add_argument("--res", required=True, help="n or 2^-n")
    a.add_argument("--horizon", type=int)
    a.set_defaults(fn=cmd_omega)

    cps_g = group("cps", "complete prefix sets")
    a = cps_g.add_parser("list", parents=[common])
    a.add_argument("--max-depth", type=int, required=True)
    a.add_argument("--eta", default="1")
    a.set_defaults(fn=cmd_cps_list)

    pict_g = group("pict", "chain transitivity")
    a = pict_g.add_parser("check", parents=[common])
    a.add_argument("--set", required=True, help="file of concatenated window records")
    a.add_argument("--eps", required=True, help="2^-k (or a fraction)")
    a.add_argument("--require-irreducible", action="store_true")
    a.set_defaults(fn=cmd_pict_check)
    a = pict_g.add_parser("construct", parents=[common])
    a.add_argument("--set", required=True)
    a.add_argument("--horizon", type=int, required=True)
    a.add_argument("--maxscale", type=int, required=True)
    a.set_defaults(fn=cmd_pict_construct)

    sh_g = group("shadow", "pseudo orbits and shadowing")
    orbit_opts = argparse.ArgumentParser(add_help=False)
    orbit_opts.add_argument("--tsft", help="forbidden-set JSON (same as --forbidden)")
    orbit_opts.add_argument("--horizon", type=int, default=8)
    orbit_opts.add_argument("--payload", type=int, default=6)
    orbit_opts.add_argument("--orbit", help="load the pseudo orbit from JSON instead of sampling")
    orbit_opts.add_argument("--emit-orbit", help="write the pseudo orbit as JSON")
    a = sh_g.add_parser("run", parents=[common, orbit_opts])
    a.add_argument("--delta", required=True, help="2^-s")
    a.add_argument("--eps", help="shadowing tolerance (default 2^-m)")
    a.add_argument("--emit-point", action="store_true", help="include the shadow in the JSON result")
    a.set_defaults(fn=cmd_shadow_run)
    a = sh_g.add_parser("adversarial", parents=[common])
    a.add_argument("--tsft", help="forbidden-set JSON (same as --forbidden)")
    a.add_argument("--pattern", required=True, help="window file with one minimal forbidden pattern")
    a.add_argument("--horizon", type=int)
    a.add_argument("--payload", type=int)
    a.set_defaults(fn=cmd_shadow_adversarial)
    a = sh_g.add_parser("asymptotic", parents=[common, orbit_opts])
    a.add_argument("--schedule", help="JSON list of {\"delta\": \"2^-k\", \"n\": depth}")
    a.set_defaults(fn=cmd_shadow_asymptotic)

    a = sub.add_parser("paper-example", parents=[common], help="the upper-triangular worked example")
    a.set_defaults(fn=cmd_paper_example)

    a = sub.add_parser("suite", parents=[common], help="run the acceptance matrix")
    a.add_argument("--only", help="comma-separated criterion numbers")
    a.add_argument("--inject-fault", action="store_true", help="flip one live-table bit in criterion 10")
    a.set_defaults(fn=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        rep = args.fn(args)
    except TreeShiftError as e:
        err = {"error": e.code, "message": str(e), "exit_code": e.exit_code}
        if args.format == "json":
            sys.stdout.write(json.dumps(err, sort_keys=True, indent=2) + "\n")
        else:
            sys.stderr.write(f"treeshift: {e.code}: {e}\n")
        return e.exit_code
    if args.timing:
        rep.seconds = time.perf_counter() - start
    sys.stdout.write(rep.as_json() if args.format == "json" else rep.as_text())
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
