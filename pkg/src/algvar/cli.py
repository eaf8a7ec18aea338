"""Command line front end: ``algvar <command> [options]``.

Exit codes: 0 when the command succeeds or the checked property holds,
1 when a checked property fails (a witness is printed), 2 on usage,
parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import formats, omega, trees, variety, words
from .finalg import AlgebraError, FiniteAlgebra, check_law, preset_laws
from .presentation import (
    Recognizer,
    RecognizerError,
    elementary_translations,
    is_reduced,
    omega_presentation,
    reduce_quotient,
    syntactic_algebra,
)
from .terms import TermSyntaxError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class SessionConfig:
    bound: int = variety.DEFAULT_BOUND
    regime: str = "unordered"
    mode: str = "boolean"
    morphism_class: str | None = None
    inputs: list = field(default_factory=list)
    output: str | None = None
    output_format: str = "text"

    def __post_init__(self):
        if self.bound < 1:
            raise UsageError("--bound must be at least 1")
        if self.regime == "ordered" and self.mode == "boolean":
            raise UsageError("boolean closure needs the unordered regime; use --mode positive")


@dataclass
class Report:
    command: str
    ok: bool = True
    verdicts: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    truncated: bool = False
    details: list = field(default_factory=list)
    timing: float = 0.0

    def exit_code(self):
        return EXIT_OK if self.ok else EXIT_FAIL

    def to_json(self):
        return json.dumps(asdict(self), indent=2, default=_jsonable)

    def to_text(self):
        lines = [f"command: {self.command}"]
        lines += self.details
        for k, v in self.verdicts.items():
            lines.append(f"{k}: {_fmt(v)}")
        for w in self.witnesses:
            lines.append(f"witness: {w}")
        lines.append(f"truncated: {'yes' if self.truncated else 'no'}")
        lines.append(f"result: {'pass' if self.ok else 'fail'}")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


def _fmt(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


# ---------------------------------------------------------------------------
# shared helpers


def describe_algebra(alg):
    """Carrier sizes, labels and operation tables as printable lines."""
    sig = alg.signature
    lines = ["sizes: " + " ".join(f"{s}={n}" for s, n in zip(sig.sorts, alg.sizes))]
    for si, s in enumerate(sig.sorts):
        names = [alg.label(si, i) for i in range(alg.sizes[si])]
        lines.append(f"elements {s}: " + " ".join(names))
    for op, tab in zip(sig.ops, alg.tables):
        out = sig.sort_index(op.output)
        head = f"op {op.name}({', '.join(op.inputs)}) -> {op.output}"
        if tab.ndim == 0:
            lines.append(f"{head}: {alg.label(out, int(tab))}")
        elif tab.ndim == 1:
            lines.append(f"{head}: " + " ".join(alg.label(out, int(x)) for x in tab))
        elif tab.ndim == 2 and tab.size <= 400:
            lines.append(head)
            for row in tab:
                lines.append("  " + " ".join(alg.label(out, int(x)) for x in row))
        else:
            lines.append(f"{head}: table of shape {tab.shape}")
    return lines


def _accept_lines(rec):
    alg = rec.algebra
    out = []
    for si, (s, acc) in enumerate(zip(alg.signature.sorts, rec.accept)):
        out.append(f"accept {s}: " + " ".join(alg.label(si, int(i)) for i in np.nonzero(acc)[0]))
    return out


def _witness_names(alg, sort_of, witness):
    """``x=s0#1(a)`` style names for a label-valued witness assignment."""
    parts = []
    for var, lab in witness.items():
        s = sort_of.get(var, 0)
        idx = alg.index_of(s, lab)
        parts.append(f"{var}={alg.element_name(s, idx) if idx is not None else lab}")
    return ", ".join(parts)


def _law_var_sorts(alg, law):
    from .finalg import _Evaluator

    return {k: v for k, v in _Evaluator(alg, law).var_sorts.items()}


def _load(path, kind=None):
    return formats.parse_input(path, kind)


def _load_word_language(args):
    if getattr(args, "dfa", None):
        dfa = _load(args.dfa, "dfa")
        return words.compile_dfa(dfa, ordered=getattr(args, "ordered", False))
    if getattr(args, "alg", None):
        obj = _load(args.alg, "algebra")
        if not isinstance(obj, Recognizer):
            raise UsageError(f"{args.alg}: a language needs letter and accept lines")
        if obj.algebra.signature.sorts != ("m",):
            raise UsageError(f"{args.alg}: a word recognizer lives on the single sort m")
        return words.WordLanguage(obj, getattr(args, "ordered", False))
    raise UsageError("give --dfa FILE or --alg FILE")


def _load_seed(path):
    obj = _load(path)
    if isinstance(obj, words.Dfa):
        return words.compile_dfa(obj).rec
    if isinstance(obj, (Recognizer, variety.LanguageFamily)):
        return obj
    if isinstance(obj, omega.OmegaRecognizer):
        return obj.rec
    if isinstance(obj, trees.TreeAutomaton):
        return trees.compile_tree_automaton(obj).rec
    raise UsageError(f"{path}: expected a language (dfa, algebra with letters or family)")


def _emit(args, value, kind=None):
    if getattr(args, "out", None):
        formats.write_output(args.out, value, kind, as_json=args.out.endswith(".json"))


# ---------------------------------------------------------------------------
# word commands


def cmd_syntactic(args, cfg):
    lang = _load_word_language(args)
    syn, _ = words.syntactic_monoid(lang, ordered=args.ordered)
    rep = Report("syntactic")
    rep.details += describe_algebra(syn.monoid) + _accept_lines(syn.rec)
    rep.verdicts["size"] = syn.monoid.sizes[0]
    rep.verdicts["aperiodic"] = words.is_aperiodic(syn.monoid)
    _emit(args, syn.rec, "algebra")
    return rep


def cmd_derivative(args, cfg):
    lang = _load_word_language(args)
    der = words.derivative(lang, args.side, tuple(args.word))
    syn, _ = words.syntactic_monoid(der)
    rep = Report("derivative")
    rep.details += _accept_lines(der.rec)
    rep.verdicts["syntactic size"] = syn.monoid.sizes[0]
    rep.verdicts["empty"] = not der.rec.reachable()[0].accept[0].any()
    _emit(args, der.rec, "algebra")
    return rep


def cmd_preimage(args, cfg):
    lang = _load_word_language(args)
    try:
        g = words.SubstitutionSpec.parse(args.map, lang.alphabet)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pre = words.preimage(lang, g)
    syn, _ = words.syntactic_monoid(pre)
    rep = Report("preimage")
    rep.details.append("alphabet: " + " ".join(pre.alphabet))
    rep.details += describe_algebra(syn.monoid) + _accept_lines(syn.rec)
    rep.verdicts["syntactic size"] = syn.monoid.sizes[0]
    _emit(args, pre.rec, "algebra")
    return rep


# ---------------------------------------------------------------------------
# laws, validation, reduction


def _algebra_of(obj):
    if isinstance(obj, Recognizer):
        return obj.algebra
    if isinstance(obj, FiniteAlgebra):
        return obj
    if isinstance(obj, omega.OmegaRecognizer):
        return obj.algebra
    raise UsageError("expected an algebra file")


def cmd_law(args, cfg):
    alg = _algebra_of(_load(args.alg))
    laws = list(args.law or [])
    if args.laws:
        laws += [l for l in _load(args.laws, "laws").laws]
    if not laws:
        raise UsageError("give --law TEXT or --laws FILE")
    rep = Report("law")
    for law in laws:
        r = check_law(alg, law)
        rep.verdicts[str(r.law)] = r.ok
        if not r.ok:
            rep.ok = False
            rep.witnesses.append(f"{r.law}: {_witness_names(alg, _law_var_sorts(alg, r.law), r.witness)}")
    return rep


def cmd_validate(args, cfg):
    alg = _algebra_of(_load(args.alg))
    rep = Report("validate")
    for name in args.preset:
        laws = preset_laws(name, alg)
        for law in laws:
            r = check_law(alg, law)
            if not r.ok:
                rep.ok = False
                rep.verdicts[name] = False
                rep.witnesses.append(f"{name}: {r.law} at "
                                     f"{_witness_names(alg, _law_var_sorts(alg, r.law), r.witness)}")
                break
        else:
            rep.verdicts[name] = True
    if alg.ordered:
        rep.verdicts["monotone"] = alg.is_ordered_monotone()
    return rep


def _presentation_for(alg, name):
    if name == "omega":
        return omega_presentation(alg)
    return elementary_translations(alg)


def cmd_reduce(args, cfg):
    obj = _load(args.alg)
    rec = obj.rec if isinstance(obj, (omega.OmegaRecognizer, trees.TreeLanguage)) else obj
    if not isinstance(rec, Recognizer):
        raise UsageError(f"{args.alg}: reduction needs a recognizer (letter and accept lines)")
    sorts = rec.algebra.signature.sorts
    s0 = tuple(args.s0) if args.s0 else sorts
    for s in s0:
        if s not in sorts:
            raise UsageError(f"--s0 names unknown sort {s!r}; sorts are {', '.join(sorts)}")
    pname = args.presentation
    if pname == "auto":
        pname = "omega" if sorts == (omega.PLUS, omega.OMEGA) else "translations"
    syn, _ = syntactic_algebra(rec, lambda a: _presentation_for(a, pname))
    red, _ = reduce_quotient(syn, _presentation_for(syn.algebra, pname), s0)
    check = is_reduced(red, _presentation_for(red.algebra, pname), s0)
    rep = Report("reduce", ok=check.reduced)
    rep.details += describe_algebra(red.algebra) + _accept_lines(red)
    rep.verdicts["syntactic sizes"] = " ".join(map(str, syn.algebra.sizes))
    rep.verdicts["reduced sizes"] = " ".join(map(str, red.algebra.sizes))
    rep.verdicts["reduced"] = check.reduced
    for s, a, b in check.unseparated:
        si = sorts.index(s)
        rep.witnesses.append(f"{red.algebra.element_name(si, a)} ~ {red.algebra.element_name(si, b)}")
    _emit(args, red, "algebra")
    return rep


# ---------------------------------------------------------------------------
# varieties


def cmd_ideal(args, cfg):
    gens = []
    for path in args.gens:
        obj = _load(path)
        if isinstance(obj, words.Dfa):
            obj = words.compile_dfa(obj).rec
        if not isinstance(obj, Recognizer):
            raise UsageError(f"{path}: a generator needs letter lines")
        gens.append(obj)
    v = variety.generate_local_pseudovariety(gens, cfg.bound)
    rep = Report("ideal", truncated=v.truncated)
    rep.details.append("source sizes: " + " ".join(map(str, v.source.algebra.sizes)))
    rep.details.append("member sizes: " + " ".join("x".join(map(str, s)) for s in v.sizes()))
    rep.verdicts["members"] = len(v)
    rep.verdicts["bound"] = cfg.bound
    return rep


def _seed_family(paths):
    objs = [_load_seed(p) for p in paths]
    if len(objs) == 1 and isinstance(objs[0], variety.LanguageFamily):
        return objs[0]
    if any(isinstance(o, variety.LanguageFamily) for o in objs):
        raise UsageError("a family file cannot be mixed with other seeds")
    return variety.family_from(objs)


def cmd_closure(args, cfg):
    fam = _seed_family(args.seed)
    mode = args.mode or ("positive" if fam.source.algebra.ordered else "boolean")
    closed = variety.close_language_family(fam, mode, preimage_class=cfg.morphism_class,
                                           max_image=args.max_image)
    rep = Report("closure", truncated=closed.truncated)
    rep.details.append("source sizes: " + " ".join(map(str, closed.source.algebra.sizes)))
    rep.verdicts["mode"] = mode
    rep.verdicts["class"] = cfg.morphism_class or "off"
    rep.verdicts["languages"] = len(closed)
    _emit(args, closed, "family")
    return rep


def cmd_roundtrip(args, cfg):
    seeds = [_load_seed(p) for p in args.seed]
    if args.generators:
        seed, kind = seeds, "generators"
    else:
        seed, kind = _seed_family(args.seed), "languages"
    r = variety.roundtrip_check(seed, cfg.bound, args.mode, preimage_class=cfg.morphism_class, kind=kind)
    rep = Report("roundtrip", ok=r.ok or r.inconclusive, truncated=r.inconclusive)
    rep.verdicts.update(r.checks)
    rep.verdicts["ideal members"] = r.ideal_size
    rep.verdicts["languages"] = r.family_size
    rep.witnesses += r.witnesses
    if r.inconclusive:
        rep.details.append("inconclusive: the size bound truncated an ideal or a closure")
    return rep


# ---------------------------------------------------------------------------
# omega words and trees


def _load_omega(path):
    obj = _load(path)
    if isinstance(obj, omega.OmegaRecognizer):
        return obj
    if isinstance(obj, Recognizer):
        try:
            return omega.OmegaRecognizer(obj)
        except omega.OmegaError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError(f"{path}: expected an omega recognizer")


def cmd_omega_syntactic(args, cfg):
    rec = _load_omega(args.rec)
    syn, _ = (omega.syntactic_reduced_omega if args.reduced else omega.syntactic_omega_semigroup)(rec)
    rep = Report("omega syntactic")
    rep.details += describe_algebra(syn.algebra) + _accept_lines(syn.rec)
    rep.verdicts["sizes"] = " ".join(map(str, syn.algebra.sizes))
    rep.verdicts["complete"] = omega.is_complete(syn.algebra)
    if args.reduced:
        rep.verdicts["reduced"] = is_reduced(syn.rec, omega_presentation(syn.algebra), (omega.OMEGA,)).reduced
    _emit(args, syn, "omega")
    return rep


def cmd_omega_member(args, cfg):
    rec = _load_omega(args.rec)
    lasso = omega.LassoWord.parse(args.lasso)
    z = omega.evaluate_lasso(rec, lasso)
    member = bool(rec.rec.accept[1][z])
    rep = Report("omega member", ok=member)
    rep.verdicts["lasso"] = str(lasso)
    rep.verdicts["value"] = rec.algebra.element_name(1, z)
    rep.verdicts["member"] = member
    return rep


def _load_tree_language(path):
    obj = _load(path)
    if isinstance(obj, trees.TreeAutomaton):
        return trees.compile_tree_automaton(obj)
    if isinstance(obj, Recognizer) and obj.algebra.signature.sorts == ("l", "t", "c"):
        return trees.TreeLanguage(obj)
    raise UsageError(f"{path}: expected a tree automaton or a tree-algebra recognizer")


def cmd_tree_syntactic(args, cfg):
    lang = _load_tree_language(args.ta)
    red, _ = trees.syntactic_reduced_tree_algebra(lang)
    rep = Report("tree syntactic")
    rep.details += describe_algebra(red.algebra) + _accept_lines(red.rec)
    rep.verdicts["sizes"] = " ".join(map(str, red.algebra.sizes))
    rep.verdicts["reduced"] = is_reduced(red.rec, None, ("t",)).reduced
    _emit(args, red.rec, "algebra")
    return rep


def cmd_tree_derivative(args, cfg):
    lang = _load_tree_language(args.ta)
    der = trees.context_derivative(lang, args.context)
    red, _ = trees.syntactic_reduced_tree_algebra(der)
    rep = Report("tree derivative")
    rep.details += _accept_lines(red.rec)
    rep.verdicts["context"] = args.context
    rep.verdicts["syntactic sizes"] = " ".join(map(str, red.algebra.sizes))
    rep.verdicts["empty"] = not red.rec.reachable()[0].accept[1].any()
    _emit(args, der.rec, "algebra")
    return rep


def cmd_tree_member(args, cfg):
    lang = _load_tree_language(args.ta)
    t = trees.parse_tree(args.tree)
    v = trees.evaluate_tree(lang, t)
    member = bool(lang.rec.accept[1][v])
    rep = Report("tree member", ok=member)
    rep.verdicts["tree"] = str(t)
    rep.verdicts["value"] = lang.algebra.element_name(1, v)
    rep.verdicts["member"] = member
    return rep


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--bound", type=int, default=None,
                        help=f"size bound for ideals (default ${variety.BOUND_ENV} or {variety.DEFAULT_BOUND})")

    p = _Parser(prog="algvar", description="Finite algebras, syntactic algebras and varieties of languages.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def word_input(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--dfa", help="DFA file")
        g.add_argument("--alg", help="monoid recognizer file")
        sp.add_argument("--out", help="write the resulting recognizer (.json for JSON)")

    sp = sub.add_parser("syntactic", parents=[common], help="syntactic monoid of a word language")
    word_input(sp)
    sp.add_argument("--ordered", action="store_true", help="syntactic ordered monoid")
    sp.set_defaults(func=cmd_syntactic)

    sp = sub.add_parser("derivative", parents=[common], help="left or right derivative by a word")
    word_input(sp)
    sp.add_argument("--side", choices=("left", "right"), default="left")
    sp.add_argument("--word", default="", help="the word, one character per letter")
    sp.set_defaults(func=cmd_derivative)

    sp = sub.add_parser("preimage", parents=[common], help="preimage under a letter substitution")
    word_input(sp)
    sp.add_argument("--map", action="append", required=True, metavar="c=w",
                    help="image of a letter (repeatable); c= erases c")
    sp.set_defaults(func=cmd_preimage)

    sp = sub.add_parser("law", parents=[common], help="check laws on a finite algebra")
    sp.add_argument("--alg", required=True)
    sp.add_argument("--law", action="append", help="law text (repeatable)")
    sp.add_argument("--laws", help="file with one law per line")
    sp.set_defaults(func=cmd_law)

    sp = sub.add_parser("validate", parents=[common], help="check axiom presets")
    sp.add_argument("--alg", required=True)
    sp.add_argument("--preset", action="append", required=True,
                    choices=("semigroup", "monoid", "omega", "tree", "stabilization"))
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("reduce", parents=[common], help="reduced syntactic algebra for a sort subset")
    sp.add_argument("--alg", required=True, help="recognizer file")
    sp.add_argument("--s0", nargs="+", help="sorts carrying the observations (default: all)")
    sp.add_argument("--presentation", choices=("auto", "translations", "omega"), default="auto")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("ideal", parents=[common], help="local pseudovariety generated by recognizers")
    sp.add_argument("--gens", nargs="+", required=True)
    sp.set_defaults(func=cmd_ideal)

    def closure_opts(sp):
        sp.add_argument("--seed", nargs="+", required=True, help="dfa, recognizer or family files")
        sp.add_argument("--mode", choices=("boolean", "positive"))
        sp.add_argument("--class", dest="morphism_class", choices=("off", *variety.MORPHISM_CLASSES),
                        default="off", help="close under preimages of this substitution class")

    sp = sub.add_parser("closure", parents=[common], help="closure of a language family")
    closure_opts(sp)
    sp.add_argument("--max-image", type=int, default=2, help="longest substitution image")
    sp.add_argument("--out", help="write the family")
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("roundtrip", parents=[common], help="check the ideal/family correspondence")
    closure_opts(sp)
    sp.add_argument("--generators", action="store_true", help="seeds generate an ideal instead of a family")
    sp.set_defaults(func=cmd_roundtrip)

    om = sub.add_parser("omega", help="omega-word recognizers")
    osub = om.add_subparsers(dest="omega_command", parser_class=_Parser)
    sp = osub.add_parser("syntactic", parents=[common])
    sp.add_argument("--rec", required=True)
    sp.add_argument("--reduced", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_omega_syntactic)
    sp = osub.add_parser("member", parents=[common])
    sp.add_argument("--rec", required=True)
    sp.add_argument("--lasso", required=True, help='ultimately periodic word "u;v" meaning u v^w')
    sp.set_defaults(func=cmd_omega_member)

    tr = sub.add_parser("tree", help="binary tree languages")
    tsub = tr.add_subparsers(dest="tree_command", parser_class=_Parser)
    sp = tsub.add_parser("syntactic", parents=[common])
    sp.add_argument("--ta", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_tree_syntactic)
    sp = tsub.add_parser("derivative", parents=[common])
    sp.add_argument("--ta", required=True)
    sp.add_argument("--context", required=True, help='context such as "a(*,b)"')
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_tree_derivative)
    sp = tsub.add_parser("member", parents=[common])
    sp.add_argument("--ta", required=True)
    sp.add_argument("--tree", required=True)
    sp.set_defaults(func=cmd_tree_member)
    return p


def _config(args):
    bound = args.bound if getattr(args, "bound", None) is not None else variety.default_bound()
    cls = getattr(args, "morphism_class", None)
    mode = getattr(args, "mode", None) or "boolean"
    regime = "ordered" if getattr(args, "ordered", False) else "unordered"
    return SessionConfig(bound=bound, regime=regime, mode=mode,
                         morphism_class=None if cls in (None, "off") else cls,
                         output=getattr(args, "out", None),
                         output_format="json" if getattr(args, "json", False) else "text")


_EXPECTED = (formats.FormatError, AlgebraError, RecognizerError, TermSyntaxError, words.DfaError,
             omega.OmegaError, trees.TreeError, variety.ClosureError, ValueError)


def dispatch(argv):
    """Run one command; returns ``(exit code, Report or None)`` and prints the report."""
    parser = build_parser()
    as_json = "--json" in argv
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError(parser.format_usage().strip())
        cfg = _config(args)
        start = time.perf_counter()
        rep = args.func(args, cfg)
        rep.timing = round(time.perf_counter() - start, 6)
    except UsageError as exc:
        _error(str(exc), as_json)
        return EXIT_USAGE, None
    except _EXPECTED as exc:
        _error(f"error: {exc}", as_json)
        return EXIT_USAGE, None
    print(rep.to_json() if cfg.output_format == "json" else rep.to_text())
    return rep.exit_code(), rep


def _error(message, as_json):
    if as_json:
        print(json.dumps({"error": message}))
    print(message, file=sys.stderr)


def main(argv=None):
    code, _ = dispatch(sys.argv[1:] if argv is None else list(argv))
    return code


if __name__ == "__main__":
    sys.exit(main())
