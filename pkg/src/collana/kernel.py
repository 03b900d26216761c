"""Untyped terms, linear-logic formulas, and collection normal forms.

Everything here is an immutable tree.  Formulas are stored with binary
connectives; the multiset/set views (`MsExpr`, `SetExpr`) flatten them, and
the pretty-printer re-flattens chains of the same connective for display.
Structural comparison of formulas is syntactic equality after renaming bound
variables to a canonical sequence (`alpha_canonical`).

Abstractions (`Lam`, `Template`) are first-order-applied: application is
plain capture-avoiding substitution followed by beta normalisation, which is
all the encodings used by the analysis require.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Union

SORT_TERM = "first_order"
SORT_PROP = "prop"


class KernelError(Exception):
    """Base class for kernel-level failures."""


class ArityMismatch(KernelError):
    def __init__(self, name: str, expected: int, got: int):
        super().__init__(f"{name}: expected {expected} argument(s), got {got}")
        self.name = name
        self.expected = expected
        self.got = got


class KindMismatch(KernelError):
    def __init__(self, name: str, expected: str, got: str):
        super().__init__(f"{name}: expected a {expected} argument, got a {got}")
        self.name = name
        self.expected = expected
        self.got = got


class NotAMultisetExpression(KernelError):
    def __init__(self, connective: str):
        super().__init__(f"not a multiset expression: contains {connective}")
        self.connective = connective


class NotASetExpression(KernelError):
    def __init__(self, connective: str):
        super().__init__(f"not a set expression: contains {connective}")
        self.connective = connective


# ---------------------------------------------------------------------------
# First-order terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True)
class Compound:
    """Constructor application; constants are compounds with no arguments."""

    functor: str
    args: tuple = ()

    def __post_init__(self):
        if not self.functor:
            raise KernelError("empty functor name")

    def __repr__(self):
        if not self.args:
            return f"Compound({self.functor!r})"
        return f"Compound({self.functor!r}, {self.args!r})"


Term = Union[Var, Compound]


def const(name: str) -> Compound:
    return Compound(name, ())


def term_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset({t.name})
    out = frozenset()
    for a in t.args:
        out |= term_vars(a)
    return out


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.functor
    return f"{t.functor}({', '.join(render_term(a) for a in t.args)})"


def term_key(t: Term):
    """Deterministic ordering key: lexicographic on (functor, arity, args)."""
    if isinstance(t, Var):
        return (0, t.name)
    return (1, t.functor, len(t.args), tuple(term_key(a) for a in t.args))


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Item:
    """Singleton-collection atom holding one first-order term."""

    arg: Term


@dataclass(frozen=True)
class PropVar:
    """Atomic formula variable (eigenvariable of propositional sort)."""

    name: str


@dataclass(frozen=True)
class _Unit:
    symbol: str

    def __repr__(self):
        return self.symbol


BOT = _Unit("⊥")
ONE = _Unit("1")
ZERO = _Unit("0")


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Oplus:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class With:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quest:
    body: "Formula"


@dataclass(frozen=True)
class Limp:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Equiv:
    """Definitionally With(Limp(l, r), Limp(r, l)); see expand_equiv."""

    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    sort: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: "Formula"


@dataclass(frozen=True)
class App:
    """Application of a propositional function (PropVar or Lam) to arguments."""

    fn: "Formula"
    args: tuple


@dataclass(frozen=True)
class Lam:
    """Embedded abstraction; params are (name, sort) pairs."""

    params: tuple
    body: "Formula"


Formula = Union[
    Item, PropVar, _Unit, Par, Oplus, With, Quest, Limp, Equiv,
    Forall, Exists, App, Lam,
]


@dataclass(frozen=True)
class Template:
    """A named abstraction applied via beta_apply; body may be Formula or Term."""

    params: tuple  # of (name, sort)
    body: object
    name: str = "template"


_fresh_counter = itertools.count()


def fresh_name(base: str) -> str:
    # '#' cannot occur in parsed identifiers, so generated names never collide.
    return f"{base}#{next(_fresh_counter)}"


def is_formula(x) -> bool:
    return isinstance(x, (Item, PropVar, _Unit, Par, Oplus, With, Quest,
                          Limp, Equiv, Forall, Exists, App, Lam))


def is_term(x) -> bool:
    return isinstance(x, (Var, Compound))


# ---------------------------------------------------------------------------
# Free variables and substitution
# ---------------------------------------------------------------------------

def free_names(f) -> frozenset:
    """Free variable names of a formula or term (single namespace)."""
    if isinstance(f, Var):
        return frozenset({f.name})
    if isinstance(f, Compound):
        out = frozenset()
        for a in f.args:
            out |= free_names(a)
        return out
    if isinstance(f, Item):
        return free_names(f.arg)
    if isinstance(f, PropVar):
        return frozenset({f.name})
    if isinstance(f, _Unit):
        return frozenset()
    if isinstance(f, (Par, Oplus, With)):
        return free_names(f.left) | free_names(f.right)
    if isinstance(f, Quest):
        return free_names(f.body)
    if isinstance(f, Limp):
        return free_names(f.antecedent) | free_names(f.consequent)
    if isinstance(f, Equiv):
        return free_names(f.left) | free_names(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_names(f.body) - {f.var}
    if isinstance(f, App):
        out = free_names(f.fn)
        for a in f.args:
            out |= free_names(a)
        return out
    if isinstance(f, Lam):
        return free_names(f.body) - {p for p, _ in f.params}
    raise KernelError(f"free_names: unknown node {f!r}")


def subst_term(t: Term, mapping: dict) -> Term:
    if isinstance(t, Var):
        repl = mapping.get(t.name)
        if repl is None:
            return t
        if not is_term(repl):
            raise KindMismatch(t.name, "first-order term", "formula")
        return repl
    return Compound(t.functor, tuple(subst_term(a, mapping) for a in t.args))


def _avoid_capture(bound: list, body, mapping: dict):
    """Rename binder names clashing with the substitution's free names."""
    relevant = {k: v for k, v in mapping.items() if k not in {b[0] for b in bound}}
    if not relevant:
        return bound, body, relevant
    incoming = frozenset()
    for v in relevant.values():
        incoming |= free_names(v)
    renames = {}
    new_bound = []
    for name, sort in bound:
        if name in incoming:
            nn = fresh_name(name)
            renames[name] = PropVar(nn) if sort == SORT_PROP else Var(nn)
            new_bound.append((nn, sort))
        else:
            new_bound.append((name, sort))
    if renames:
        body = subst(body, renames)
    return new_bound, body, relevant


def subst(f, mapping: dict):
    """Capture-avoiding simultaneous substitution on a formula or term."""
    if not mapping:
        return f
    if is_term(f):
        return subst_term(f, mapping)
    if isinstance(f, Item):
        return Item(subst_term(f.arg, mapping))
    if isinstance(f, PropVar):
        repl = mapping.get(f.name)
        if repl is None:
            return f
        if not is_formula(repl):
            raise KindMismatch(f.name, "formula", "first-order term")
        return repl
    if isinstance(f, _Unit):
        return f
    if isinstance(f, Par):
        return Par(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, Oplus):
        return Oplus(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, With):
        return With(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, Quest):
        return Quest(subst(f.body, mapping))
    if isinstance(f, Limp):
        return Limp(subst(f.antecedent, mapping), subst(f.consequent, mapping))
    if isinstance(f, Equiv):
        return Equiv(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, (Forall, Exists)):
        bound, body, relevant = _avoid_capture([(f.var, f.sort)], f.body, mapping)
        (name, sort), = bound
        return type(f)(name, sort, subst(body, relevant))
    if isinstance(f, App):
        fn = subst(f.fn, mapping)
        args = tuple(subst(a, mapping) for a in f.args)
        return _reduce_app(fn, args)
    if isinstance(f, Lam):
        bound, body, relevant = _avoid_capture(list(f.params), f.body, mapping)
        return Lam(tuple(bound), subst(body, relevant))
    raise KernelError(f"subst: unknown node {f!r}")


# ---------------------------------------------------------------------------
# Beta reduction
# ---------------------------------------------------------------------------

def _reduce_app(fn, args: tuple):
    if not args:
        return fn
    if isinstance(fn, App):  # flatten curried spines
        return _reduce_app(fn.fn, fn.args + args)
    if isinstance(fn, Lam):
        n = min(len(fn.params), len(args))
        mapping = {}
        for (name, sort), arg in zip(fn.params[:n], args[:n]):
            if sort == SORT_TERM and not is_term(arg):
                raise KindMismatch(name, "first-order term", "formula")
            if sort == SORT_PROP and not is_formula(arg):
                raise KindMismatch(name, "formula", "first-order term")
            mapping[name] = arg
        body = subst(fn.body, mapping)
        rest_params = fn.params[n:]
        rest_args = args[n:]
        if rest_params:
            return Lam(rest_params, body)
        if rest_args:
            return _reduce_app(body, rest_args)
        return body
    return App(fn, args)


def beta_normalize(f):
    """Reduce all applied abstractions; terms and atoms pass through."""
    if is_term(f) or isinstance(f, (PropVar, _Unit)):
        return f
    if isinstance(f, Item):
        return f
    if isinstance(f, Par):
        return Par(beta_normalize(f.left), beta_normalize(f.right))
    if isinstance(f, Oplus):
        return Oplus(beta_normalize(f.left), beta_normalize(f.right))
    if isinstance(f, With):
        return With(beta_normalize(f.left), beta_normalize(f.right))
    if isinstance(f, Quest):
        return Quest(beta_normalize(f.body))
    if isinstance(f, Limp):
        return Limp(beta_normalize(f.antecedent), beta_normalize(f.consequent))
    if isinstance(f, Equiv):
        return Equiv(beta_normalize(f.left), beta_normalize(f.right))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, f.sort, beta_normalize(f.body))
    if isinstance(f, App):
        fn = beta_normalize(f.fn)
        args = tuple(beta_normalize(a) for a in f.args)
        red = _reduce_app(fn, args)
        if isinstance(red, App) and red.fn is fn and red.args == args:
            return red
        return beta_normalize(red)
    if isinstance(f, Lam):
        return Lam(f.params, beta_normalize(f.body))
    raise KernelError(f"beta_normalize: unknown node {f!r}")


def beta_apply(template: Template, args: Iterable):
    """Instantiate a template: simultaneous substitution, fully normalised."""
    args = tuple(args)
    if len(args) != len(template.params):
        raise ArityMismatch(template.name, len(template.params), len(args))
    mapping = {}
    for (name, sort), arg in zip(template.params, args):
        if sort == SORT_TERM and not is_term(arg):
            raise KindMismatch(f"{template.name}/{name}", "first-order term", "formula")
        if sort == SORT_PROP and not is_formula(arg):
            raise KindMismatch(f"{template.name}/{name}", "formula", "first-order term")
        mapping[name] = arg
    out = subst(template.body, mapping)
    if is_term(out):
        return out
    return beta_normalize(out)


# ---------------------------------------------------------------------------
# Alpha canonicalisation
# ---------------------------------------------------------------------------

def alpha_canonical(f, prefix: str = "α"):
    """Rename bound variables to a canonical sequence (pre-order)."""
    counter = itertools.count()

    def go(g, env: dict):
        if isinstance(g, Var):
            return Var(env.get(g.name, g.name))
        if isinstance(g, Compound):
            return Compound(g.functor, tuple(go(a, env) for a in g.args))
        if isinstance(g, Item):
            return Item(go(g.arg, env))
        if isinstance(g, PropVar):
            return PropVar(env.get(g.name, g.name))
        if isinstance(g, _Unit):
            return g
        if isinstance(g, (Par, Oplus, With)):
            return type(g)(go(g.left, env), go(g.right, env))
        if isinstance(g, Quest):
            return Quest(go(g.body, env))
        if isinstance(g, Limp):
            return Limp(go(g.antecedent, env), go(g.consequent, env))
        if isinstance(g, Equiv):
            return Equiv(go(g.left, env), go(g.right, env))
        if isinstance(g, (Forall, Exists)):
            nn = f"{prefix}{next(counter)}"
            return type(g)(nn, g.sort, go(g.body, {**env, g.var: nn}))
        if isinstance(g, App):
            return App(go(g.fn, env), tuple(go(a, env) for a in g.args))
        if isinstance(g, Lam):
            new_env = dict(env)
            params = []
            for name, sort in g.params:
                nn = f"{prefix}{next(counter)}"
                new_env[name] = nn
                params.append((nn, sort))
            return Lam(tuple(params), go(g.body, new_env))
        raise KernelError(f"alpha_canonical: unknown node {g!r}")

    return go(f, {})


def alpha_equal(f, g) -> bool:
    return alpha_canonical(f) == alpha_canonical(g)


# ---------------------------------------------------------------------------
# Equiv expansion
# ---------------------------------------------------------------------------

def expand_equiv(f):
    """Replace every Equiv(a, b) by With(Limp(a, b), Limp(b, a))."""
    if is_term(f) or isinstance(f, (Item, PropVar, _Unit)):
        return f
    if isinstance(f, Par):
        return Par(expand_equiv(f.left), expand_equiv(f.right))
    if isinstance(f, Oplus):
        return Oplus(expand_equiv(f.left), expand_equiv(f.right))
    if isinstance(f, With):
        return With(expand_equiv(f.left), expand_equiv(f.right))
    if isinstance(f, Quest):
        return Quest(expand_equiv(f.body))
    if isinstance(f, Limp):
        return Limp(expand_equiv(f.antecedent), expand_equiv(f.consequent))
    if isinstance(f, Equiv):
        a = expand_equiv(f.left)
        b = expand_equiv(f.right)
        return With(Limp(a, b), Limp(b, a))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, f.sort, expand_equiv(f.body))
    if isinstance(f, App):
        return App(expand_equiv(f.fn), tuple(expand_equiv(a) for a in f.args))
    if isinstance(f, Lam):
        return Lam(f.params, expand_equiv(f.body))
    raise KernelError(f"expand_equiv: unknown node {f!r}")


# ---------------------------------------------------------------------------
# Collection normal forms
# ---------------------------------------------------------------------------

def atom_key(a):
    if isinstance(a, Item):
        return (0, term_key(a.arg))
    if isinstance(a, PropVar):
        return (1, a.name)
    # anything else providing its own sort_key (prover-internal atoms)
    return (2,) + tuple(a.sort_key())


@dataclass(frozen=True)
class MsExpr:
    """Multiset of atoms; order-insensitive, multiplicity-sensitive."""

    atoms: tuple  # canonically sorted, duplicates repeated

    @staticmethod
    def of(atoms: Iterable) -> "MsExpr":
        return MsExpr(tuple(sorted(atoms, key=atom_key)))

    def counter(self) -> Counter:
        return Counter(self.atoms)

    def is_empty(self) -> bool:
        return not self.atoms

    def to_formula(self):
        if not self.atoms:
            return BOT
        out = self.atoms[-1]
        for a in reversed(self.atoms[:-1]):
            out = Par(a, out)
        return out

    def render(self) -> str:
        if not self.atoms:
            return "⊥"
        return " ⅋ ".join(render(a) for a in self.atoms)


@dataclass(frozen=True)
class SetExpr:
    """Set of atoms; order- and multiplicity-insensitive."""

    atoms: tuple  # canonically sorted, unique

    @staticmethod
    def of(atoms: Iterable) -> "SetExpr":
        return SetExpr(tuple(sorted(set(atoms), key=atom_key)))

    def is_empty(self) -> bool:
        return not self.atoms

    def to_formula(self):
        if not self.atoms:
            return ZERO
        out = self.atoms[-1]
        for a in reversed(self.atoms[:-1]):
            out = Oplus(a, out)
        return out

    def render(self) -> str:
        if not self.atoms:
            return "0"
        return " ⊕ ".join(render(a) for a in self.atoms)


def normalize_mset(f) -> MsExpr:
    """Flatten a ⅋/⊥ formula into its multiset of leaf atoms."""
    acc = []

    def walk(g):
        if isinstance(g, Par):
            walk(g.left)
            walk(g.right)
        elif g == BOT:
            pass
        elif isinstance(g, (Item, PropVar)):
            acc.append(g)
        else:
            raise NotAMultisetExpression(_node_name(g))

    walk(f)
    return MsExpr.of(acc)


def normalize_set(f) -> SetExpr:
    """Flatten a ⊕/0 formula into its set of leaf atoms."""
    acc = []

    def walk(g):
        if isinstance(g, Oplus):
            walk(g.left)
            walk(g.right)
        elif g == ZERO:
            pass
        elif isinstance(g, (Item, PropVar)):
            acc.append(g)
        else:
            raise NotASetExpression(_node_name(g))

    walk(f)
    return SetExpr.of(acc)


def _node_name(g) -> str:
    if isinstance(g, _Unit):
        return g.symbol
    return type(g).__name__


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC_ATOM = 100
_PREC_APP = 90
_PREC_QUEST = 80
_PREC_PAR = 50
_PREC_OPLUS = 50
_PREC_WITH = 40
_PREC_IMP = 30
_PREC_BINDER = 10


def _wrap(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _flatten(f, cls):
    if isinstance(f, cls):
        return _flatten(f.left, cls) + _flatten(f.right, cls)
    return [f]


def render(f, prec: int = 0) -> str:
    """Unicode rendering; ⅋/⊕/& chains are printed n-ary."""
    if is_term(f):
        return render_term(f)
    if isinstance(f, Item):
        return f"⟨{render_term(f.arg)}⟩"
    if isinstance(f, PropVar):
        return f.name
    if isinstance(f, _Unit):
        return f.symbol
    if isinstance(f, Par):
        parts = [render(p, _PREC_PAR + 1) for p in _flatten(f, Par)]
        return _wrap(" ⅋ ".join(parts), _PREC_PAR, prec)
    if isinstance(f, Oplus):
        parts = [render(p, _PREC_OPLUS + 1) for p in _flatten(f, Oplus)]
        return _wrap(" ⊕ ".join(parts), _PREC_OPLUS, prec)
    if isinstance(f, With):
        parts = [render(p, _PREC_WITH + 1) for p in _flatten(f, With)]
        return _wrap(" & ".join(parts), _PREC_WITH, prec)
    if isinstance(f, Quest):
        return _wrap(f"?{render(f.body, _PREC_QUEST + 1)}", _PREC_QUEST, prec)
    if isinstance(f, Limp):
        # unions on either side of an implication are always parenthesised
        s = f"{render(f.antecedent, _PREC_PAR + 1)} ⊸ {render(f.consequent, _PREC_PAR + 1)}"
        return _wrap(s, _PREC_IMP, prec)
    if isinstance(f, Equiv):
        s = f"{render(f.left, _PREC_PAR + 1)} ○–○ {render(f.right, _PREC_PAR + 1)}"
        return _wrap(s, _PREC_IMP, prec)
    if isinstance(f, (Forall, Exists)):
        sym = "∀" if isinstance(f, Forall) else "∃"
        names = [f.var]
        body = f.body
        while isinstance(body, type(f)):
            names.append(body.var)
            body = body.body
        s = f"{sym}{','.join(names)}. {render(body, _PREC_BINDER)}"
        return _wrap(s, _PREC_BINDER, prec)
    if isinstance(f, App):
        head = render(f.fn, _PREC_ATOM)
        args = " ".join(render(a, _PREC_ATOM) for a in f.args)
        return _wrap(f"{head} {args}", _PREC_APP, prec)
    if isinstance(f, Lam):
        names = " ".join(f"λ{n}" for n, _ in f.params)
        return _wrap(f"{names}. {render(f.body, _PREC_BINDER)}", _PREC_BINDER, prec)
    raise KernelError(f"render: unknown node {f!r}")
