"""List and difference-list approximations.

Order-sensitive encodings represent a list as a chain of reverse linear
implications: the encoding of [a, b] is the abstraction

    λl. ⟨a⟩ ∘– (l ∘– (⟨b⟩ ∘– (l ∘– ⊥)))

and the difference-list variant abstracts the terminal ⊥ into a spliceable
tail, so that composition of encodings is list concatenation.  Both are kept
canonically as plain item sequences; the nested-implication formula is
rendered on demand and round-trips through a decoder.

Verification conditions over difference lists are discharged without proof
search: beta conversion has already arranged both sides of each judgment
into canonical sequence-with-hole form, so hypotheses are applied as one-shot
rewrites and the two sides compared for syntactic identity.  Anything that
does not become identical is reported Unknown, never Proved.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernel as K
from .approx import DLEQ, VerificationCondition

PROVED = "proved"
UNKNOWN = "unknown"


class NotAList(Exception):
    pass


@dataclass(frozen=True)
class ListEncoding:
    items: tuple  # of ground Term, list order


@dataclass(frozen=True)
class DListEncoding:
    items: tuple
    hole: str = "L"  # name of the abstracted tail


# ---------------------------------------------------------------------------
# Encoding and decoding
# ---------------------------------------------------------------------------

def encode_list(t: K.Term, mode: str = "list"):
    """Canonical item sequence of a ground nil/cons term."""
    items = []
    cur = t
    while True:
        if isinstance(cur, K.Var):
            raise NotAList(f"open tail {cur.name}")
        if cur.functor == "nil" and not cur.args:
            break
        if cur.functor == "cons" and len(cur.args) == 2:
            items.append(cur.args[0])
            cur = cur.args[1]
            continue
        raise NotAList(f"not a list constructor: {K.render_term(cur)}")
    if mode == "list":
        return ListEncoding(tuple(items))
    if mode == "dlist":
        return DListEncoding(tuple(items))
    raise ValueError(f"unknown mode {mode!r}")


def _chain(items, hole: str, terminal):
    body = terminal
    for x in reversed(items):
        body = K.Limp(K.Limp(body, K.PropVar(hole)), K.Item(x))
    return body


def list_formula(e: ListEncoding) -> K.Lam:
    """λl. ⟨x₁⟩ ∘– (l ∘– ( … ∘– ⊥))"""
    return K.Lam((("l", K.SORT_PROP),), _chain(e.items, "l", K.BOT))


def dlist_formula(e: DListEncoding) -> K.Lam:
    """λLλl. ⟨x₁⟩ ∘– (l ∘– ( … ∘– (L l)))"""
    terminal = K.App(K.PropVar(e.hole), (K.PropVar("l"),))
    return K.Lam(((e.hole, K.SORT_PROP), ("l", K.SORT_PROP)),
                 _chain(e.items, "l", terminal))


def decode_list_formula(f: K.Lam) -> ListEncoding:
    """Inverse of list_formula, for round-trip checks."""
    if not (isinstance(f, K.Lam) and len(f.params) == 1):
        raise NotAList("not a one-argument abstraction")
    hole = f.params[0][0]
    items, terminal = _decode_chain(f.body, hole)
    if terminal != K.BOT:
        raise NotAList("chain does not terminate in the empty list")
    return ListEncoding(tuple(items))


def decode_dlist_formula(f: K.Lam) -> DListEncoding:
    if not (isinstance(f, K.Lam) and len(f.params) == 2):
        raise NotAList("not a two-argument abstraction")
    tail, hole = f.params[0][0], f.params[1][0]
    items, terminal = _decode_chain(f.body, hole)
    if terminal != K.App(K.PropVar(tail), (K.PropVar(hole),)):
        raise NotAList("chain does not terminate in the abstracted tail")
    return DListEncoding(tuple(items), hole=tail)


def _decode_chain(body, hole: str):
    items = []
    while (isinstance(body, K.Limp) and isinstance(body.consequent, K.Item)
           and isinstance(body.antecedent, K.Limp)
           and body.antecedent.consequent == K.PropVar(hole)):
        items.append(body.consequent.arg)
        body = body.antecedent.antecedent
    return items, body


# ---------------------------------------------------------------------------
# Judgments on encodings
# ---------------------------------------------------------------------------

def lists_equal(e1: ListEncoding, e2: ListEncoding) -> bool:
    """Equality of encodings coincides with syntactic list identity."""
    return e1.items == e2.items


def degrade_to_multiset(e: ListEncoding) -> K.MsExpr:
    """Forget order: the multiset of items (apply the encoding to ⊥)."""
    return K.MsExpr.of(K.Item(x) for x in e.items)


def dlist_compose(e1: DListEncoding, e2: DListEncoding) -> DListEncoding:
    """Composition of difference lists concatenates their item sequences."""
    return DListEncoding(e1.items + e2.items, hole=e1.hole)


# ---------------------------------------------------------------------------
# Discharging difference-list verification conditions
# ---------------------------------------------------------------------------

def _rewrite(f, pattern, replacement):
    """Replace every subformula alpha-equal to `pattern` (one pass)."""
    if K.alpha_equal(f, pattern):
        return replacement
    if isinstance(f, (K.Item, K.PropVar, K._Unit)) or K.is_term(f):
        return f
    if isinstance(f, (K.Par, K.Oplus, K.With)):
        return type(f)(_rewrite(f.left, pattern, replacement),
                       _rewrite(f.right, pattern, replacement))
    if isinstance(f, K.Quest):
        return K.Quest(_rewrite(f.body, pattern, replacement))
    if isinstance(f, K.Limp):
        return K.Limp(_rewrite(f.antecedent, pattern, replacement),
                      _rewrite(f.consequent, pattern, replacement))
    if isinstance(f, K.Equiv):
        return K.Equiv(_rewrite(f.left, pattern, replacement),
                       _rewrite(f.right, pattern, replacement))
    if isinstance(f, (K.Forall, K.Exists)):
        return type(f)(f.var, f.sort, _rewrite(f.body, pattern, replacement))
    if isinstance(f, K.App):
        return K.App(_rewrite(f.fn, pattern, replacement),
                     tuple(_rewrite(a, pattern, replacement) if K.is_formula(a)
                           else a for a in f.args))
    if isinstance(f, K.Lam):
        return K.Lam(f.params, _rewrite(f.body, pattern, replacement))
    raise K.KernelError(f"rewrite: unknown node {f!r}")


def discharge_dlist_vc(vc: VerificationCondition) -> str:
    """Normalisation-based discharge: rewrite by hypotheses, compare sides.

    Hypothesis equalities are applied strictly left-to-right as one-shot
    rewrites; the condition is Proved when the goal's two sides become
    syntactically identical (up to bound renaming) and Unknown otherwise.
    """
    if vc.goal.relation != DLEQ:
        raise ValueError("not a difference-list verification condition")
    lhs, rhs = vc.goal.lhs, vc.goal.rhs
    for h in vc.hypotheses:
        if h.relation != DLEQ:
            continue
        lhs = _rewrite(lhs, h.lhs, h.rhs)
        rhs = _rewrite(rhs, h.lhs, h.rhs)
        if K.alpha_equal(lhs, rhs):
            return PROVED
    return PROVED if K.alpha_equal(lhs, rhs) else UNKNOWN
