"""Text and JSON formats for automata, algebras, laws and language families.

Every serializer emits a canonical form, and every canonical file survives
``serialize(parse(text)) == text`` byte for byte.  The grammar of each
format is documented in ``docs/formats.md``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .finalg import AlgebraError, FiniteAlgebra, OpSymbol, Signature
from .omega import OmegaRecognizer, wilke_algebra
from .presentation import Recognizer, RecognizerError
from .terms import TermSyntaxError, format_law, parse_law
from .trees import TreeAutomaton, TreeError
from .variety import LanguageFamily, _array_of, _mask_of
from .words import Dfa, DfaError

KINDS = ("dfa", "algebra", "omega", "tree-automaton", "laws", "family")
EXTENSIONS = {
    ".dfa": "dfa",
    ".alg": "algebra",
    ".omega": "omega",
    ".ta": "tree-automaton",
    ".laws": "laws",
    ".fam": "family",
}


class FormatError(ValueError):
    def __init__(self, message, line=None, path=None):
        self.message = message
        self.line = line
        self.path = path
        where = ""
        if path:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class LawFile:
    laws: tuple
    constants: tuple = ("1",)


# ---------------------------------------------------------------------------
# line reader


class _Lines:
    def __init__(self, text):
        self.items = []
        for n, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            self.items.append((n, line))
        self.i = 0

    def more(self):
        return self.i < len(self.items)

    def peek(self):
        return self.items[self.i] if self.more() else (None, "")

    def next(self, what="a line"):
        if not self.more():
            last = self.items[-1][0] if self.items else None
            raise FormatError(f"unexpected end of input, expected {what}", last)
        item = self.items[self.i]
        self.i += 1
        return item

    def expect(self, keyword):
        n, line = self.next(repr(keyword))
        toks = line.split()
        if toks[0] != keyword:
            raise FormatError(f"expected {keyword!r}, found {toks[0]!r}", n)
        return n, toks[1:]


def _index(names, name, what, line):
    try:
        return names.index(name)
    except ValueError:
        raise FormatError(f"unknown {what} {name!r}", line) from None


def _ints(tokens, line, count=None):
    try:
        vals = [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"expected integers, got {' '.join(tokens)!r}", line) from None
    if count is not None and len(vals) != count:
        raise FormatError(f"expected {count} entries, got {len(vals)}", line)
    return vals


# ---------------------------------------------------------------------------
# DFA


def _canonical_state_header(states):
    if all(s == f"q{i}" for i, s in enumerate(states)):
        return f"states {len(states)}"
    return "states " + " ".join(states)


def dfa_to_text(d):
    lines = [_canonical_state_header(d.states), "alphabet " + " ".join(d.alphabet),
             f"init {d.states[d.initial]}"]
    lines.append(" ".join(["final"] + [d.states[f] for f in sorted(d.finals)]))
    for q in range(len(d.states)):
        for k, a in enumerate(d.alphabet):
            lines.append(f"{d.states[q]} {a} -> {d.states[int(d.delta[q, k])]}")
    return "\n".join(lines) + "\n"


def _parse_states(toks, line):
    if len(toks) == 1 and toks[0].isdigit():
        return [f"q{i}" for i in range(int(toks[0]))]
    if len(set(toks)) != len(toks):
        raise FormatError("duplicate state", line)
    return list(toks)


def dfa_from_text(text):
    r = _Lines(text)
    n, toks = r.expect("states")
    states = _parse_states(toks, n)
    n, alphabet = r.expect("alphabet")
    n, toks = r.expect("init")
    if len(toks) != 1:
        raise FormatError("init takes one state", n)
    init = _index(states, toks[0], "state", n)
    n, toks = r.expect("final")
    finals = [_index(states, t, "state", n) for t in toks]
    delta = np.full((len(states), len(alphabet)), -1, dtype=np.int64)
    while r.more():
        n, line = r.next()
        toks = line.split()
        if len(toks) != 4 or toks[2] != "->":
            raise FormatError(f"malformed transition {line!r} (expected 'q a -> r')", n)
        q = _index(states, toks[0], "state", n)
        a = _index(alphabet, toks[1], "letter", n)
        if delta[q, a] >= 0:
            raise FormatError(f"duplicate transition for {toks[0]} {toks[1]}", n)
        delta[q, a] = _index(states, toks[3], "state", n)
    if (delta < 0).any():
        q, a = map(int, np.argwhere(delta < 0)[0])
        raise FormatError(f"missing transition for {states[q]} {alphabet[a]}")
    try:
        return Dfa(tuple(states), tuple(alphabet), delta, init, frozenset(finals))
    except DfaError as exc:
        raise FormatError(str(exc)) from None


def dfa_to_json(d):
    return {
        "kind": "dfa",
        "states": list(d.states),
        "alphabet": list(d.alphabet),
        "initial": d.states[d.initial],
        "finals": [d.states[f] for f in sorted(d.finals)],
        "transitions": [[d.states[q], a, d.states[int(d.delta[q, k])]]
                        for q in range(len(d.states)) for k, a in enumerate(d.alphabet)],
    }


def dfa_from_json(obj):
    states = list(obj["states"])
    alphabet = list(obj["alphabet"])
    trans = {(q, a): r for q, a, r in obj["transitions"]}
    try:
        return Dfa.from_transitions(states, alphabet, trans, obj["initial"], obj["finals"])
    except (DfaError, ValueError) as exc:
        raise FormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# algebras and recognizers


def _table_rows(tab):
    tab = np.asarray(tab)
    if tab.ndim == 0:
        return [str(int(tab))]
    if tab.size == 0:
        return []
    return [" ".join(str(int(x)) for x in row) for row in tab.reshape(-1, tab.shape[-1])]


def _algebra_lines(obj):
    rec = obj if isinstance(obj, Recognizer) else None
    alg = rec.algebra if rec is not None else obj
    sig = alg.signature
    lines = ["sorts " + " ".join(sig.sorts), f"ordered {'yes' if alg.ordered else 'no'}"]
    for s, n in zip(sig.sorts, alg.sizes):
        lines.append(f"size {s} {n}")
    if alg.labels is not None:
        for s, labs in zip(sig.sorts, alg.labels):
            lines.append(" ".join(["labels", s, *labs]))
    for op in sig.ops:
        lines.append(" ".join(["op", op.name, *op.inputs, "->", op.output]))
    for op, tab in zip(sig.ops, alg.tables):
        lines.append(" ".join(["table", op.name, *op.inputs]))
        lines.extend(_table_rows(tab))
    if alg.ordered:
        for s, o in zip(sig.sorts, alg.order):
            lines.append(f"order {s}")
            lines.extend(_table_rows(o.astype(np.int64)))
    if rec is not None:
        for (name, sort), x in zip(rec.letters, rec.letter_map):
            lines.append(f"letter {name} {sort} {x}")
        for s, acc in zip(sig.sorts, rec.accept):
            lines.append(" ".join(["accept", s, *[str(int(i)) for i in np.nonzero(acc)[0]]]))
    return lines


def algebra_to_text(obj):
    return "\n".join(["algebra", *_algebra_lines(obj)]) + "\n"


def _read_table(r, shape, what):
    if len(shape) == 0:
        n, line = r.next(what)
        return np.array(_ints(line.split(), n, 1)[0])
    if int(np.prod(shape)) == 0:
        return np.zeros(shape, dtype=np.int64)
    rows = []
    for _ in range(int(np.prod(shape[:-1]))):
        n, line = r.next(what)
        rows.append(_ints(line.split(), n, shape[-1]))
    return np.array(rows, dtype=np.int64).reshape(shape)


def _parse_algebra_body(r, stop=()):
    n, sorts = r.expect("sorts")
    n, toks = r.expect("ordered")
    if toks not in (["yes"], ["no"]):
        raise FormatError("ordered must be 'yes' or 'no'", n)
    ordered = toks == ["yes"]
    sizes = {}
    for s in sorts:
        n, toks = r.expect("size")
        if len(toks) != 2 or toks[0] != s:
            raise FormatError(f"expected 'size {s} <n>'", n)
        sizes[s] = _ints(toks[1:], n, 1)[0]
    labels = None
    if r.peek()[1].startswith("labels "):
        labels = []
        for s in sorts:
            n, toks = r.expect("labels")
            if not toks or toks[0] != s or len(toks) - 1 != sizes[s]:
                raise FormatError(f"expected 'labels {s}' with {sizes[s]} names", n)
            labels.append(tuple(toks[1:]))
        labels = tuple(labels)
    ops = []
    while r.peek()[1].startswith("op "):
        n, toks = r.expect("op")
        if "->" not in toks or toks.index("->") != len(toks) - 2 or len(toks) < 3:
            raise FormatError("expected 'op <name> <input sorts> -> <output sort>'", n)
        ops.append(OpSymbol(toks[0], tuple(toks[1:-2]), toks[-1]))
    try:
        sig = Signature(tuple(sorts), tuple(ops), ordered)
    except AlgebraError as exc:
        raise FormatError(str(exc), n) from None
    tables = []
    for op in sig.ops:
        n, toks = r.expect("table")
        if toks != [op.name, *op.inputs]:
            raise FormatError(f"expected 'table {' '.join([op.name, *op.inputs])}'", n)
        shape = tuple(sizes[s] for s in op.inputs)
        tables.append(_read_table(r, shape, f"a row of table {op.name}"))
    order = None
    if ordered:
        order = []
        for s in sorts:
            n, toks = r.expect("order")
            if toks != [s]:
                raise FormatError(f"expected 'order {s}'", n)
            order.append(_read_table(r, (sizes[s], sizes[s]), f"a row of order {s}").astype(bool))
        order = tuple(order)
    try:
        alg = FiniteAlgebra(sig, tuple(sizes[s] for s in sorts), tuple(tables), order, labels)
    except AlgebraError as exc:
        raise FormatError(str(exc), n) from None
    letters, lm = [], []
    while r.peek()[1].startswith("letter "):
        n, toks = r.expect("letter")
        if len(toks) != 3:
            raise FormatError("expected 'letter <name> <sort> <index>'", n)
        letters.append((toks[0], toks[1]))
        lm.append(_ints(toks[2:], n, 1)[0])
    if not letters:
        return alg
    accept = []
    for s in sorts:
        n, toks = r.expect("accept")
        if not toks or toks[0] != s:
            raise FormatError(f"expected 'accept {s} ...'", n)
        acc = np.zeros(sizes[s], dtype=bool)
        for i in _ints(toks[1:], n):
            if not 0 <= i < sizes[s]:
                raise FormatError(f"accepted index {i} out of range", n)
            acc[i] = True
        accept.append(acc)
    try:
        return Recognizer(alg, tuple(letters), tuple(lm), tuple(accept))
    except (RecognizerError, AlgebraError) as exc:
        raise FormatError(str(exc), n) from None


def algebra_from_text(text):
    r = _Lines(text)
    r.expect("algebra")
    obj = _parse_algebra_body(r)
    if r.more():
        n, line = r.next()
        raise FormatError(f"unexpected line {line!r}", n)
    return obj


def _algebra_json(obj):
    rec = obj if isinstance(obj, Recognizer) else None
    alg = rec.algebra if rec is not None else obj
    sig = alg.signature
    out = {
        "sorts": list(sig.sorts),
        "ordered": alg.ordered,
        "sizes": list(alg.sizes),
        "labels": None if alg.labels is None else [list(l) for l in alg.labels],
        "ops": [{"name": op.name, "inputs": list(op.inputs), "output": op.output,
                 "table": np.asarray(t).tolist()} for op, t in zip(sig.ops, alg.tables)],
        "order": None if not alg.ordered else [o.astype(int).tolist() for o in alg.order],
    }
    if rec is not None:
        out["letters"] = [[name, sort, int(x)] for (name, sort), x in zip(rec.letters, rec.letter_map)]
        out["accept"] = [[int(i) for i in np.nonzero(a)[0]] for a in rec.accept]
    return out


def algebra_to_json(obj):
    return {"kind": "algebra", **_algebra_json(obj)}


def _algebra_from_obj(obj):
    try:
        sig = Signature(tuple(obj["sorts"]), tuple(OpSymbol(o["name"], tuple(o["inputs"]), o["output"])
                                                   for o in obj["ops"]), bool(obj["ordered"]))
        sizes = tuple(obj["sizes"])
        tables = []
        for o in obj["ops"]:
            shape = tuple(sizes[sig.sort_index(s)] for s in o["inputs"])
            tables.append(np.array(o["table"], dtype=np.int64).reshape(shape))
        order = None if obj.get("order") is None else tuple(np.array(x, dtype=bool) for x in obj["order"])
        labels = None if obj.get("labels") is None else tuple(tuple(l) for l in obj["labels"])
        alg = FiniteAlgebra(sig, sizes, tuple(tables), order, labels)
        if "letters" not in obj:
            return alg
        accept = []
        for n, idx in zip(sizes, obj["accept"]):
            a = np.zeros(n, dtype=bool)
            a[list(idx)] = True
            accept.append(a)
        return Recognizer(alg, tuple((l[0], l[1]) for l in obj["letters"]),
                          tuple(l[2] for l in obj["letters"]), tuple(accept))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed algebra: {exc}") from None


def algebra_from_json(obj):
    return _algebra_from_obj(obj)


# ---------------------------------------------------------------------------
# omega recognizers


def omega_to_text(rec):
    alg = rec.algebra
    plus = [alg.label(0, i) for i in range(alg.sizes[0])]
    omega = [alg.label(1, i) for i in range(alg.sizes[1])]
    prod = alg.table("*", ("plus", "plus"))
    mix = alg.table("*", ("plus", "omega"))
    power = alg.table("pow", ("plus",))
    lines = ["omega-recognizer", "plus " + " ".join(plus), "omega " + " ".join(omega), "prod"]
    lines += [" ".join(plus[int(x)] for x in row) for row in prod]
    lines.append("mix")
    lines += [" ".join(omega[int(x)] for x in row) for row in mix]
    lines.append(" ".join(["opow", *[omega[int(x)] for x in power]]))
    lines.append(" ".join(["letters", *[f"{a}={plus[x]}" for a, x in zip(rec.alphabet, rec.rec.letter_map)]]))
    acc_p, acc_w = rec.rec.accept
    lines.append(" ".join(["accept_plus", *[plus[i] for i in np.nonzero(acc_p)[0]]]))
    lines.append(" ".join(["accept_omega", *[omega[i] for i in np.nonzero(acc_w)[0]]]))
    return "\n".join(lines) + "\n"


def omega_from_text(text):
    r = _Lines(text)
    r.expect("omega-recognizer")
    n, plus = r.expect("plus")
    n, omega = r.expect("omega")
    if len(set(plus)) != len(plus) or len(set(omega)) != len(omega):
        raise FormatError("duplicate element name", n)
    r.expect("prod")
    prod = []
    for _ in plus:
        n, line = r.next("a row of prod")
        row = line.split()
        if len(row) != len(plus):
            raise FormatError(f"prod row needs {len(plus)} entries", n)
        prod.append([_index(plus, t, "plus element", n) for t in row])
    r.expect("mix")
    mix = []
    for _ in plus:
        n, line = r.next("a row of mix")
        row = line.split()
        if len(row) != len(omega):
            raise FormatError(f"mix row needs {len(omega)} entries", n)
        mix.append([_index(omega, t, "omega element", n) for t in row])
    n, toks = r.expect("opow")
    if len(toks) != len(plus):
        raise FormatError(f"opow needs {len(plus)} entries", n)
    power = [_index(omega, t, "omega element", n) for t in toks]
    n, toks = r.expect("letters")
    letters, lm = [], []
    for t in toks:
        if "=" not in t:
            raise FormatError(f"expected letter=element, got {t!r}", n)
        a, x = t.split("=", 1)
        letters.append(a)
        lm.append(_index(plus, x, "plus element", n))
    n, toks = r.expect("accept_plus")
    acc_p = np.zeros(len(plus), dtype=bool)
    for t in toks:
        acc_p[_index(plus, t, "plus element", n)] = True
    n, toks = r.expect("accept_omega")
    acc_w = np.zeros(len(omega), dtype=bool)
    for t in toks:
        acc_w[_index(omega, t, "omega element", n)] = True
    if r.more():
        n, line = r.next()
        raise FormatError(f"unexpected line {line!r}", n)
    try:
        alg = wilke_algebra(np.array(prod, dtype=np.int64).reshape(len(plus), len(plus)),
                            np.array(mix, dtype=np.int64).reshape(len(plus), len(omega)),
                            np.array(power, dtype=np.int64), labels=(tuple(plus), tuple(omega)))
        return OmegaRecognizer(Recognizer(alg, tuple((a, "plus") for a in letters), tuple(lm), (acc_p, acc_w)))
    except (AlgebraError, RecognizerError) as exc:
        raise FormatError(str(exc)) from None


def omega_to_json(rec):
    alg = rec.algebra
    plus = [alg.label(0, i) for i in range(alg.sizes[0])]
    omega = [alg.label(1, i) for i in range(alg.sizes[1])]
    acc_p, acc_w = rec.rec.accept
    return {
        "kind": "omega",
        "plus": plus,
        "omega": omega,
        "prod": [[plus[int(x)] for x in row] for row in alg.table("*", ("plus", "plus"))],
        "mix": [[omega[int(x)] for x in row] for row in alg.table("*", ("plus", "omega"))],
        "opow": [omega[int(x)] for x in alg.table("pow", ("plus",))],
        "letters": {a: plus[x] for a, x in zip(rec.alphabet, rec.rec.letter_map)},
        "accept_plus": [plus[i] for i in np.nonzero(acc_p)[0]],
        "accept_omega": [omega[i] for i in np.nonzero(acc_w)[0]],
    }


def omega_from_json(obj):
    text_lines = ["omega-recognizer", "plus " + " ".join(obj["plus"]), "omega " + " ".join(obj["omega"]), "prod"]
    text_lines += [" ".join(row) for row in obj["prod"]]
    text_lines.append("mix")
    text_lines += [" ".join(row) for row in obj["mix"]]
    text_lines.append(" ".join(["opow", *obj["opow"]]))
    text_lines.append(" ".join(["letters", *[f"{a}={x}" for a, x in obj["letters"].items()]]))
    text_lines.append(" ".join(["accept_plus", *obj["accept_plus"]]))
    text_lines.append(" ".join(["accept_omega", *obj["accept_omega"]]))
    return omega_from_text("\n".join(text_lines) + "\n")


# ---------------------------------------------------------------------------
# tree automata


def tree_automaton_to_text(ta):
    lines = ["tree-automaton", _canonical_state_header(ta.states), "alphabet " + " ".join(ta.alphabet)]
    lines.append(" ".join(["final"] + [ta.states[f] for f in sorted(ta.finals)]))
    for k, a in enumerate(ta.alphabet):
        lines.append(f"leaf {a} -> {ta.states[int(ta.leaf[k])]}")
    n = len(ta.states)
    for k, a in enumerate(ta.alphabet):
        for q in range(n):
            for r in range(n):
                lines.append(f"node {a} {ta.states[q]} {ta.states[r]} -> {ta.states[int(ta.node[k, q, r])]}")
    return "\n".join(lines) + "\n"


def tree_automaton_from_text(text):
    r = _Lines(text)
    r.expect("tree-automaton")
    n, toks = r.expect("states")
    states = _parse_states(toks, n)
    n, alphabet = r.expect("alphabet")
    n, toks = r.expect("final")
    finals = [_index(states, t, "state", n) for t in toks]
    leaf = np.full(len(alphabet), -1, dtype=np.int64)
    node = np.full((len(alphabet), len(states), len(states)), -1, dtype=np.int64)
    while r.more():
        n, line = r.next()
        toks = line.split()
        if toks[0] == "leaf" and len(toks) == 4 and toks[2] == "->":
            a = _index(alphabet, toks[1], "label", n)
            if leaf[a] >= 0:
                raise FormatError(f"duplicate leaf rule for {toks[1]}", n)
            leaf[a] = _index(states, toks[3], "state", n)
        elif toks[0] == "node" and len(toks) == 6 and toks[4] == "->":
            a = _index(alphabet, toks[1], "label", n)
            q = _index(states, toks[2], "state", n)
            s = _index(states, toks[3], "state", n)
            if node[a, q, s] >= 0:
                raise FormatError(f"duplicate node rule for {' '.join(toks[1:4])}", n)
            node[a, q, s] = _index(states, toks[5], "state", n)
        else:
            raise FormatError(f"malformed rule {line!r} (expected 'leaf a -> q' or 'node a q q -> q')", n)
    if (leaf < 0).any():
        raise FormatError(f"missing leaf rule for {alphabet[int(np.argmin(leaf))]}")
    if (node < 0).any():
        a, q, s = map(int, np.argwhere(node < 0)[0])
        raise FormatError(f"missing node rule for {alphabet[a]} {states[q]} {states[s]}")
    try:
        return TreeAutomaton(tuple(states), tuple(alphabet), leaf, node, frozenset(finals))
    except TreeError as exc:
        raise FormatError(str(exc)) from None


def tree_automaton_to_json(ta):
    n = len(ta.states)
    return {
        "kind": "tree-automaton",
        "states": list(ta.states),
        "alphabet": list(ta.alphabet),
        "finals": [ta.states[f] for f in sorted(ta.finals)],
        "leaf": {a: ta.states[int(ta.leaf[k])] for k, a in enumerate(ta.alphabet)},
        "node": [[a, ta.states[q], ta.states[r], ta.states[int(ta.node[k, q, r])]]
                 for k, a in enumerate(ta.alphabet) for q in range(n) for r in range(n)],
    }


def tree_automaton_from_json(obj):
    try:
        return TreeAutomaton.from_rules(obj["states"], obj["alphabet"], obj["leaf"],
                                        {(a, q, r): s for a, q, r, s in obj["node"]}, obj["finals"])
    except (TreeError, KeyError, ValueError) as exc:
        raise FormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# laws


def laws_to_text(lf):
    laws = lf.laws if isinstance(lf, LawFile) else tuple(lf)
    return "".join(format_law(law) + "\n" for law in laws)


def laws_from_text(text, constants=("1",)):
    laws = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            laws.append(parse_law(line, constants))
        except TermSyntaxError as exc:
            raise FormatError(str(exc), n) from None
    return LawFile(tuple(laws), tuple(constants))


def laws_to_json(lf):
    laws = lf.laws if isinstance(lf, LawFile) else tuple(lf)
    consts = lf.constants if isinstance(lf, LawFile) else ("1",)
    return {"kind": "laws", "constants": list(consts), "laws": [format_law(l) for l in laws]}


def laws_from_json(obj):
    consts = tuple(obj.get("constants", ["1"]))
    return laws_from_text("".join(l + "\n" for l in obj["laws"]), consts)


# ---------------------------------------------------------------------------
# language families


def _member_text(fam, member):
    sorts = fam.source.algebra.signature.sorts
    parts = []
    for s, mask, n in zip(sorts, member, fam.source.algebra.sizes):
        idx = np.nonzero(_array_of(mask, n))[0]
        parts.append(f"{s}:" + ",".join(str(int(i)) for i in idx))
    return "member " + " ".join(parts)


def family_to_text(fam):
    lines = ["family", f"regime {'ordered' if fam.ordered else 'unordered'}",
             f"truncated {'yes' if fam.truncated else 'no'}"]
    lines += _algebra_lines(fam.source)
    lines += [_member_text(fam, m) for m in sorted(fam.members)]
    return "\n".join(lines) + "\n"


def family_from_text(text):
    r = _Lines(text)
    r.expect("family")
    n, toks = r.expect("regime")
    if toks not in (["ordered"], ["unordered"]):
        raise FormatError("regime must be 'ordered' or 'unordered'", n)
    ordered = toks == ["ordered"]
    n, toks = r.expect("truncated")
    if toks not in (["yes"], ["no"]):
        raise FormatError("truncated must be 'yes' or 'no'", n)
    truncated = toks == ["yes"]
    source = _parse_algebra_body(r)
    if not isinstance(source, Recognizer):
        raise FormatError("a family needs a recognizer with letters", n)
    alg = source.algebra
    sorts = alg.signature.sorts
    members = set()
    while r.more():
        n, toks = r.expect("member")
        if len(toks) != len(sorts):
            raise FormatError(f"a member lists {len(sorts)} sorts", n)
        member = []
        for s, tok, size in zip(sorts, toks, alg.sizes):
            name, _, rest = tok.partition(":")
            if name != s:
                raise FormatError(f"expected sort {s}, got {name!r}", n)
            arr = np.zeros(size, dtype=bool)
            for i in _ints([x for x in rest.split(",") if x], n):
                if not 0 <= i < size:
                    raise FormatError(f"index {i} out of range", n)
                arr[i] = True
            member.append(_mask_of(arr))
        members.add(tuple(member))
    return LanguageFamily(source.with_accept(tuple(np.zeros(k, dtype=bool) for k in alg.sizes)),
                          frozenset(members), ordered, truncated)


def family_to_json(fam):
    sizes = fam.source.algebra.sizes
    return {
        "kind": "family",
        "ordered": fam.ordered,
        "truncated": fam.truncated,
        "source": _algebra_json(fam.source),
        "members": [[[int(i) for i in np.nonzero(_array_of(m, n))[0]] for m, n in zip(mem, sizes)]
                    for mem in sorted(fam.members)],
    }


def family_from_json(obj):
    source = _algebra_from_obj(obj["source"])
    if not isinstance(source, Recognizer):
        raise FormatError("a family needs a recognizer with letters")
    sizes = source.algebra.sizes
    members = set()
    for mem in obj["members"]:
        member = []
        for idx, n in zip(mem, sizes):
            arr = np.zeros(n, dtype=bool)
            arr[list(idx)] = True
            member.append(_mask_of(arr))
        members.add(tuple(member))
    return LanguageFamily(source, frozenset(members), bool(obj["ordered"]), bool(obj["truncated"]))


# ---------------------------------------------------------------------------
# dispatch


_TEXT = {
    "dfa": (dfa_from_text, dfa_to_text),
    "algebra": (algebra_from_text, algebra_to_text),
    "omega": (omega_from_text, omega_to_text),
    "tree-automaton": (tree_automaton_from_text, tree_automaton_to_text),
    "laws": (laws_from_text, laws_to_text),
    "family": (family_from_text, family_to_text),
}
_JSON = {
    "dfa": (dfa_from_json, dfa_to_json),
    "algebra": (algebra_from_json, algebra_to_json),
    "omega": (omega_from_json, omega_to_json),
    "tree-automaton": (tree_automaton_from_json, tree_automaton_to_json),
    "laws": (laws_from_json, laws_to_json),
    "family": (family_from_json, family_to_json),
}


def _check_kind(kind):
    if kind not in KINDS:
        raise FormatError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")


def kind_of(value):
    if isinstance(value, Dfa):
        return "dfa"
    if isinstance(value, OmegaRecognizer):
        return "omega"
    if isinstance(value, TreeAutomaton):
        return "tree-automaton"
    if isinstance(value, LawFile):
        return "laws"
    if isinstance(value, LanguageFamily):
        return "family"
    if isinstance(value, (Recognizer, FiniteAlgebra)):
        return "algebra"
    raise TypeError(f"no file format for {type(value).__name__}")


def parse_text(text, kind):
    _check_kind(kind)
    return _TEXT[kind][0](text)


def serialize_text(value, kind=None):
    kind = kind or kind_of(value)
    _check_kind(kind)
    return _TEXT[kind][1](value)


def parse_json(text, kind=None):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(obj, dict):
        raise FormatError("expected a JSON object")
    found = obj.get("kind")
    if kind is None:
        kind = found
    _check_kind(kind)
    if found != kind:
        raise FormatError(f"JSON kind is {found!r}, expected {kind!r}")
    try:
        return _JSON[kind][0](obj)
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}") from None


def serialize_json(value, kind=None):
    kind = kind or kind_of(value)
    _check_kind(kind)
    return json.dumps(_JSON[kind][1](value), indent=2) + "\n"


def guess_kind(path):
    ext = os.path.splitext(path)[1].lower()
    if ext in EXTENSIONS:
        return EXTENSIONS[ext]
    return None


def parse_input(path, kind=None):
    """Read ``path``; the kind comes from the argument, the extension or the JSON ``kind`` field."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read input: {exc.strerror}", path=path) from None
    is_json = path.lower().endswith(".json")
    kind = kind or (None if is_json else guess_kind(path))
    try:
        if is_json:
            return parse_json(text, kind)
        if kind is None:
            first = next((l.split()[0] for l in text.splitlines() if l.strip() and not l.startswith("#")), "")
            kind = {"algebra": "algebra", "omega-recognizer": "omega", "tree-automaton": "tree-automaton",
                    "family": "family", "states": "dfa"}.get(first, "laws")
        return parse_text(text, kind)
    except FormatError as exc:
        if exc.path is None:
            raise FormatError(exc.message, exc.line, path) from None
        raise


def write_output(path, value, kind=None, as_json=False):
    text = serialize_json(value, kind) if as_json else serialize_text(value, kind)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
