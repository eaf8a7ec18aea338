"""Binary trees: tree automata, three-sorted tree algebras, context derivatives."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .finalg import TREE_LAWS, FiniteAlgebra, OpSymbol, Signature, validate_laws
from .presentation import Recognizer, elementary_translations, reduce_quotient, syntactic_algebra

HOLE = "*"


class TreeError(ValueError):
    pass


def tree_signature(ordered=False):
    return Signature(
        ("l", "t", "c"),
        (
            OpSymbol("iota", ("l",), "t"),
            OpSymbol("kappa", ("l", "t", "t"), "t"),
            OpSymbol("lambda", ("l", "t"), "c"),
            OpSymbol("rho", ("l", "t"), "c"),
            OpSymbol("eta", ("c", "t"), "t"),
            OpSymbol("sigma", ("c", "c"), "c"),
        ),
        ordered,
    )


# ---------------------------------------------------------------------------
# trees and contexts


@dataclass(frozen=True)
class Tree:
    """A full binary tree; leaves have no children, inner nodes exactly two.

    The label ``*`` marks the hole of a context.
    """

    label: str
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) not in (0, 2):
            raise TreeError(f"node {self.label} must have zero or two children")
        if self.label == HOLE and self.children:
            raise TreeError("the hole is a leaf")

    def __str__(self):
        if not self.children:
            return self.label
        return f"{self.label}({self.children[0]},{self.children[1]})"

    def depth(self):
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)

    def holes(self):
        if self.label == HOLE:
            return 1
        return sum(c.holes() for c in self.children)

    def plug(self, t):
        """Replace the hole by ``t``."""
        if self.label == HOLE:
            return t
        return Tree(self.label, tuple(c.plug(t) for c in self.children))


def parse_tree(text, allow_hole=False):
    """Parse ``a(b,c(d,e))``; labels are identifiers, ``*`` is the hole."""
    pos = 0
    text = text.strip()

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def node():
        nonlocal pos
        skip()
        start = pos
        if pos < len(text) and text[pos] == HOLE:
            pos += 1
            if not allow_hole:
                raise TreeError(f"unexpected hole at column {start + 1}: {text!r}")
            return Tree(HOLE)
        while pos < len(text) and (text[pos].isalnum() or text[pos] == "_"):
            pos += 1
        if pos == start:
            raise TreeError(f"expected a label at column {start + 1}: {text!r}")
        label = text[start:pos]
        skip()
        if pos < len(text) and text[pos] == "(":
            pos += 1
            left = node()
            skip()
            if pos >= len(text) or text[pos] != ",":
                raise TreeError(f"expected ',' at column {pos + 1}: {text!r}")
            pos += 1
            right = node()
            skip()
            if pos >= len(text) or text[pos] != ")":
                raise TreeError(f"expected ')' at column {pos + 1}: {text!r}")
            pos += 1
            return Tree(label, (left, right))
        return Tree(label)

    t = node()
    skip()
    if pos != len(text):
        raise TreeError(f"trailing input at column {pos + 1}: {text!r}")
    return t


def parse_context(text):
    """A tree with exactly one hole; ``*`` alone is the empty context."""
    c = parse_tree(text, allow_hole=True)
    if c.holes() != 1:
        raise TreeError(f"a context needs exactly one hole: {text!r}")
    return c


def trees_up_to(alphabet, depth):
    """All trees over ``alphabet`` of depth at most ``depth``."""
    levels = [[Tree(a) for a in alphabet]]
    for _ in range(depth):
        prev = levels[-1]
        nxt = [Tree(a) for a in alphabet]
        nxt += [Tree(a, (l, r)) for a in alphabet for l in prev for r in prev]
        levels.append(nxt)
    return levels[-1]


def contexts_up_to(alphabet, depth):
    """All contexts (hole included) of depth at most ``depth``; the empty context first."""
    out = [Tree(HOLE)]
    if depth == 0:
        return out
    smaller = contexts_up_to(alphabet, depth - 1)
    trees = trees_up_to(alphabet, depth - 1)
    for a in alphabet:
        for c in smaller:
            for t in trees:
                out.append(Tree(a, (c, t)))
                out.append(Tree(a, (t, c)))
    return out


# ---------------------------------------------------------------------------
# automata


@dataclass(frozen=True, eq=False)
class TreeAutomaton:
    """Deterministic bottom-up automaton: ``leaf[a]`` and ``node[a, q, q']``."""

    states: tuple
    alphabet: tuple
    leaf: np.ndarray
    node: np.ndarray
    finals: frozenset

    def __post_init__(self):
        states = tuple(str(s) for s in self.states)
        alphabet = tuple(str(a) for a in self.alphabet)
        if len(set(states)) != len(states) or len(set(alphabet)) != len(alphabet):
            raise TreeError("duplicate state or label")
        n, k = len(states), len(alphabet)
        leaf = np.array(self.leaf, dtype=np.int64).reshape(k)
        node = np.array(self.node, dtype=np.int64).reshape(k, n, n)
        for arr in (leaf, node):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise TreeError("transition leaves the state set")
        finals = frozenset(int(f) for f in self.finals)
        if any(not 0 <= f < n for f in finals):
            raise TreeError("final state out of range")
        leaf.setflags(write=False)
        node.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "leaf", leaf)
        object.__setattr__(self, "node", node)
        object.__setattr__(self, "finals", finals)

    @classmethod
    def from_rules(cls, states, alphabet, leaf, node, finals):
        """``leaf``: {a: q}; ``node``: {(a, q, q'): q''}; all by name."""
        states, alphabet = list(states), list(alphabet)
        lf = np.full(len(alphabet), -1, dtype=np.int64)
        for a, q in leaf.items():
            lf[alphabet.index(a)] = states.index(q)
        nd = np.full((len(alphabet), len(states), len(states)), -1, dtype=np.int64)
        for (a, q, r), s in node.items():
            nd[alphabet.index(a), states.index(q), states.index(r)] = states.index(s)
        if (lf < 0).any():
            raise TreeError(f"missing leaf rule for {alphabet[int(np.argmin(lf))]}")
        if (nd < 0).any():
            a, q, r = map(int, np.argwhere(nd < 0)[0])
            raise TreeError(f"missing node rule for {alphabet[a]} {states[q]} {states[r]}")
        return cls(tuple(states), tuple(alphabet), lf, nd, frozenset(states.index(f) for f in finals))

    def run(self, tree):
        if tree.label not in self.alphabet:
            raise TreeError(f"unknown label {tree.label!r}")
        a = self.alphabet.index(tree.label)
        if not tree.children:
            return int(self.leaf[a])
        return int(self.node[a, self.run(tree.children[0]), self.run(tree.children[1])])

    def accepts(self, tree):
        return self.run(tree) in self.finals


@dataclass(frozen=True, eq=False)
class TreeLanguage:
    """Recognizer over a tree algebra; letters in sort l, acceptance on sort t."""

    rec: Recognizer

    @property
    def algebra(self):
        return self.rec.algebra

    @property
    def alphabet(self):
        return self.rec.alphabet

    def accepts(self, tree):
        return tree_membership(self, tree)


def compile_tree_automaton(ta):
    """Tree algebra of an automaton: labels, reachable states and context functions."""
    k = len(ta.alphabet)
    # reachable states with a smallest witness tree, in discovery order
    states = []
    witness = {}
    for a in range(k):
        q = int(ta.leaf[a])
        if q not in witness:
            witness[q] = ta.alphabet[a]
            states.append(q)
    changed = True
    while changed:
        changed = False
        for a in range(k):
            for q, r in itertools.product(list(states), repeat=2):
                s = int(ta.node[a, q, r])
                if s not in witness:
                    witness[s] = f"{ta.alphabet[a]}({witness[q]},{witness[r]})"
                    states.append(s)
                    changed = True
    tpos = {q: i for i, q in enumerate(states)}
    nt = len(states)
    node = np.array([[[tpos[int(ta.node[a, q, r])] for r in states] for q in states] for a in range(k)],
                    dtype=np.int64).reshape(k, nt, nt)
    leaf = np.array([tpos[int(ta.leaf[a])] for a in range(k)], dtype=np.int64)
    # one-step context functions and their composition closure
    funcs = []
    names = []
    index = {}

    def add(f, name):
        if f not in index:
            index[f] = len(funcs)
            funcs.append(f)
            names.append(name)
        return index[f]

    wit = [witness[q] for q in states]
    lam = np.zeros((k, nt), dtype=np.int64)
    rho = np.zeros((k, nt), dtype=np.int64)
    for a in range(k):
        for s in range(nt):
            lam[a, s] = add(tuple(int(x) for x in node[a, :, s]), f"{ta.alphabet[a]}(*,{wit[s]})")
            rho[a, s] = add(tuple(int(x) for x in node[a, s, :]), f"{ta.alphabet[a]}({wit[s]},*)")
    head = 0
    generators = list(range(len(funcs)))
    while head < len(funcs):
        p = funcs[head]
        for g in generators:
            # sigma(p, g) = p after g
            q = funcs[g]
            add(tuple(p[x] for x in q), names[head].replace(HOLE, names[g], 1))
        head += 1
    nc = len(funcs)
    fa = np.array(funcs, dtype=np.int64).reshape(nc, nt)
    eta = fa.copy()
    sigma = np.zeros((nc, nc), dtype=np.int64)
    for i in range(nc):
        for j in range(nc):
            sigma[i, j] = index[tuple(int(x) for x in fa[i][fa[j]])]
    kappa = node
    alg = FiniteAlgebra(
        tree_signature(),
        (k, nt, nc),
        (leaf, kappa, lam, rho, eta, sigma),
        labels=(ta.alphabet, tuple(ta.states[q] for q in states), tuple(names)),
    )
    accept_t = np.array([q in ta.finals for q in states], dtype=bool)
    rec = Recognizer(alg, tuple((a, "l") for a in ta.alphabet), tuple(range(k)),
                     (np.zeros(k, dtype=bool), accept_t, np.zeros(nc, dtype=bool)))
    return TreeLanguage(rec)


def _tables(alg):
    sig = alg.signature
    return {op.name: alg.tables[i] for i, op in enumerate(sig.ops)}


def evaluate_tree(lang, tree):
    alg = lang.algebra
    tabs = _tables(alg)
    if tree.label == HOLE:
        raise TreeError("a tree cannot contain the hole")
    _, a = lang.rec.letter(tree.label)
    if not tree.children:
        return int(tabs["iota"][a])
    left = evaluate_tree(lang, tree.children[0])
    right = evaluate_tree(lang, tree.children[1])
    return int(tabs["kappa"][a, left, right])


def evaluate_context(lang, ctx):
    """Element of sort c for a nonempty context; None for the empty context."""
    if ctx.label == HOLE:
        return None
    tabs = _tables(lang.algebra)
    _, a = lang.rec.letter(ctx.label)
    left, right = ctx.children
    if left.holes() == 1:
        inner = evaluate_context(lang, left)
        step = int(tabs["lambda"][a, evaluate_tree(lang, right)])
    elif right.holes() == 1:
        inner = evaluate_context(lang, right)
        step = int(tabs["rho"][a, evaluate_tree(lang, left)])
    else:
        raise TreeError("a context needs exactly one hole")
    return step if inner is None else int(tabs["sigma"][step, inner])


def tree_membership(lang, tree):
    if isinstance(tree, str):
        tree = parse_tree(tree)
    return bool(lang.rec.accept[1][evaluate_tree(lang, tree)])


def context_derivative(lang, ctx):
    """``c⁻¹L = {t : η(c, t) ∈ L}``; the empty context leaves ``L`` unchanged."""
    if isinstance(ctx, str):
        ctx = parse_context(ctx)
    c = evaluate_context(lang, ctx)
    acc_l, acc_t, acc_c = lang.rec.accept
    if c is None:
        return lang
    eta = _tables(lang.algebra)["eta"]
    return TreeLanguage(lang.rec.with_accept((acc_l, acc_t[eta[c, :]], acc_c)))


def validate_tree_algebra(alg):
    return validate_laws(alg, TREE_LAWS)


def syntactic_reduced_tree_algebra(lang):
    """Reduced syntactic tree algebra (S0 = {t}) and the projection onto it."""
    rep = validate_tree_algebra(lang.algebra)
    if not rep.ok:
        raise TreeError(f"not a tree algebra: {rep.describe()}")
    syn, proj = syntactic_algebra(lang.rec, elementary_translations)
    red, rproj = reduce_quotient(syn, elementary_translations(syn.algebra), ("t",))
    return TreeLanguage(red), proj.compose(rproj)
