"""The approximating substitution and per-clause verification conditions.

A program is analysed in three steps: declared collection types are mapped to
the propositional sort, constructors to collection-building templates, and
predicates to collection judgments.  Applying those maps to a clause yields a
verification condition (VC): hypotheses from the body atoms and a goal from
the head atom, each a judgment between two collection expressions.

Inside a VC, clause variables of element sort are frozen as fresh constants
and clause variables of collection sort become atomic propositional
variables, so the provers only ever see quantifier-free statements.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import kernel as K
from .frontend import (
    Annotation, ArgRef, CollExpr, Diagnostic, Empty, HornClause, Program,
    Signature, SingletonRef, TypeApp, UnionExpr, infer_clause_types,
)

# Judgment relations
MSEQ = "mseq"
MSINCL = "msincl"
SETEQ = "seteq"
SETINCL = "setincl"
DLEQ = "dleq"
TRIVIAL = "trivial"

_REL_BY_MODE = {
    ("multiset", "eq"): MSEQ,
    ("multiset", "incl"): MSINCL,
    ("set", "eq"): SETEQ,
    ("set", "incl"): SETINCL,
    ("dlist", "eq"): DLEQ,
}

_REL_SYMBOL = {MSEQ: "=", MSINCL: "<=", SETEQ: "=s", SETINCL: "<=s", DLEQ: "=l"}


class ApproxError(Exception):
    """Translation failure, tagged with the offending clause."""

    def __init__(self, clause_id: int, message: str):
        super().__init__(f"clause {clause_id}: {message}")
        self.clause_id = clause_id
        self.reason = message


class MixedModes(Exception):
    pass


class Classification(Enum):
    MULTISET = "multiset"
    SET = "set"
    DLIST = "dlist"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class JudgmentInstance:
    """One collection judgment with both raw (displayable) and normal sides."""

    relation: str
    lhs: object = None       # MsExpr | SetExpr | beta-normal Formula (dlist)
    rhs: object = None
    raw_lhs: object = None   # Formula as produced by the substitution
    raw_rhs: object = None

    def is_trivial(self) -> bool:
        return self.relation == TRIVIAL

    def formula(self):
        """Linear-logic rendering of the judgment."""
        if self.is_trivial():
            return K.ONE
        if self.relation == MSEQ:
            return K.Equiv(self.raw_lhs, self.raw_rhs)
        if self.relation == MSINCL:
            q = "q"
            used = K.free_names(self.raw_lhs) | K.free_names(self.raw_rhs)
            while q in used:
                q += "'"
            return K.Exists(q, K.SORT_PROP,
                            K.Limp(K.Par(self.raw_lhs, K.PropVar(q)), self.raw_rhs))
        if self.relation == SETEQ:
            return K.Equiv(K.Quest(self.raw_lhs), K.Quest(self.raw_rhs))
        if self.relation == SETINCL:
            return K.Limp(K.Quest(self.raw_lhs), K.Quest(self.raw_rhs))
        if self.relation == DLEQ:
            body = K.Equiv(self.lhs, self.rhs)
            wvars = _dlist_judgment_vars(self)
            return K.Forall(wvars[0], K.SORT_PROP,
                            K.Forall(wvars[1], K.SORT_PROP, body))
        raise ValueError(f"unknown relation {self.relation}")

    def render(self) -> str:
        return K.render(self.formula())


def _dlist_judgment_vars(j: JudgmentInstance):
    # the two outer-quantified variables a dlist judgment is applied to
    return j.raw_lhs


@dataclass
class VerificationCondition:
    clause_id: int
    line: int
    col: int
    source: str
    eigen_vars: tuple
    prop_vars: tuple
    hypotheses: tuple       # trivial hypotheses already dropped
    goal: JudgmentInstance
    mode: str
    quantified_vars: tuple = ()

    def formula(self):
        """Whole VC as one formula (clause implication as ⊸ for display)."""
        body = self.goal.formula()
        if self.hypotheses:
            hyp = self.hypotheses[0].formula()
            for h in self.hypotheses[1:]:
                hyp = K.With(hyp, h.formula())
            body = K.Limp(hyp, body)
        for v in reversed(self.quantified_vars):
            sort = K.SORT_PROP if v in self.prop_vars else K.SORT_TERM
            body = K.Forall(v, sort, body)
        return body

    def render(self) -> str:
        parts = []
        if self.quantified_vars:
            parts.append(f"∀{','.join(self.quantified_vars)}.")
        if self.hypotheses:
            parts.append(" & ".join(h.render() for h in self.hypotheses))
            parts.append("=>")
        parts.append(self.goal.render())
        return " ".join(parts)


# ---------------------------------------------------------------------------
# Constructor map derivation
# ---------------------------------------------------------------------------

_ELEM = "elem"
_REC = "rec"


def _classify_ctor_args(ctor: str, type_name: str, sig: Signature,
                        approx_types: frozenset):
    decl = sig.decls[ctor]
    kinds = []
    diags = []
    for i, te in enumerate(decl.args, start=1):
        if isinstance(te, TypeApp) and te.name in approx_types:
            if te.name != type_name:
                diags.append(Diagnostic(
                    "UnsupportedNesting",
                    f"constructor {ctor}: argument {i} has collection type "
                    f"{te.render()} nested inside {type_name}", 0, 0))
            kinds.append(_REC)
        else:
            kinds.append(_ELEM)
    return kinds, diags


def derive_constructor_map(type_name: str, sig: Signature, mode: str,
                           approx_types: frozenset):
    """Build templates for every constructor of an approximated type.

    Element-typed arguments become singleton items, recursive arguments are
    joined with the mode's union, and nullary constructors become the unit.
    In dlist mode a constructor with exactly two recursive arguments is laid
    out in-order (left subtree, items, right subtree); every other
    constructor keeps its declared argument order.
    """
    ctor_map = {}
    diags = []
    for ctor in sig.constructors_of(type_name):
        kinds, d = _classify_ctor_args(ctor, type_name, sig, approx_types)
        diags.extend(d)
        if d:
            continue
        params = tuple(
            (f"x{i}", K.SORT_TERM if k == _ELEM else K.SORT_PROP)
            for i, k in enumerate(kinds, start=1))
        if mode in ("multiset", "set"):
            unit = K.BOT if mode == "multiset" else K.ZERO
            join = K.Par if mode == "multiset" else K.Oplus
            parts = [K.Item(K.Var(n)) if k == _ELEM else K.PropVar(n)
                     for (n, _), k in zip(params, kinds)]
            if not parts:
                body = unit
            else:
                body = parts[-1]
                for p in reversed(parts[:-1]):
                    body = join(p, body)
            ctor_map[ctor] = K.Template(params, body, name=ctor)
        elif mode == "dlist":
            order = list(range(len(kinds)))
            if kinds.count(_REC) == 2:
                rec_idx = [i for i, k in enumerate(kinds) if k == _REC]
                elem_idx = [i for i, k in enumerate(kinds) if k == _ELEM]
                order = [rec_idx[0], *elem_idx, rec_idx[1]]
            seq = [(kinds[i], params[i][0]) for i in order]
            # applying the template to the constructor's arguments leaves the
            # (tail, hole) abstraction in place: the encoding is a function
            body = K.Lam((("L", K.SORT_PROP), ("l", K.SORT_PROP)),
                         _dlist_chain(seq, "L", "l"))
            ctor_map[ctor] = K.Template(params, body, name=ctor)
        else:
            raise ValueError(f"unknown mode {mode}")
    return ctor_map, diags


def _dlist_chain(seq, tail_name: str, hole_name: str):
    """⟨x⟩ ∘– (l ∘– rest) steps for elements, splices for sub-collections."""
    tail = K.PropVar(tail_name)
    hole = K.PropVar(hole_name)
    if not seq:
        return K.App(tail, (hole,))
    kind, name = seq[0]
    if kind == _REC and len(seq) == 1:
        return K.App(K.PropVar(name), (tail, hole))
    if kind == _REC:
        inner_hole = K.fresh_name("l")
        rest = _rename_hole(_dlist_chain(seq[1:], tail_name, hole_name),
                            hole_name, inner_hole)
        return K.App(K.PropVar(name),
                     (K.Lam(((inner_hole, K.SORT_PROP),), rest), hole))
    rest = _dlist_chain(seq[1:], tail_name, hole_name)
    return K.Limp(K.Limp(rest, hole), K.Item(K.Var(name)))


def _rename_hole(f, old: str, new: str):
    return K.subst(f, {old: K.PropVar(new)})


def dlist_empty_template() -> K.Template:
    return K.Template((("L", K.SORT_PROP), ("l", K.SORT_PROP)),
                      K.App(K.PropVar("L"), (K.PropVar("l"),)), name="empty-dlist")


# ---------------------------------------------------------------------------
# The approximating substitution
# ---------------------------------------------------------------------------

@dataclass
class ApproxMap:
    mode: str
    approx_types: frozenset
    ctor_map: dict            # constructor -> Template
    pred_map: dict            # predicate -> Annotation
    signature: Signature

    def predicate_template(self, name: str) -> K.Template:
        """The judgment a predicate is replaced by, as a formula template."""
        ann = self.pred_map[name]
        decl = self.signature.decls[name]
        params = []
        for i, te in enumerate(decl.args, start=1):
            pname = ann.param_names[i - 1] if i <= len(ann.param_names) else f"x{i}"
            if pname == "_":
                pname = f"x{i}"
            is_coll = isinstance(te, TypeApp) and te.name in self.approx_types
            params.append((pname, K.SORT_PROP if is_coll else K.SORT_TERM))
        if ann.trivial:
            return K.Template(tuple(params), K.ONE, name=name)
        args = []
        for (pname, sort) in params:
            args.append(K.PropVar(pname) if sort == K.SORT_PROP else K.Var(pname))
        j = self._judgment(ann, args)
        return K.Template(tuple(params), j.formula(), name=name)

    # -- judgment construction ---------------------------------------------

    def _side_formula(self, expr: CollExpr, args: list):
        unit = {"multiset": K.BOT, "set": K.ZERO}.get(self.mode)
        if isinstance(expr, Empty):
            if self.mode == "dlist":
                t = dlist_empty_template()
                return K.Lam(t.params, t.body)
            return unit
        if isinstance(expr, ArgRef):
            return args[expr.pos - 1]
        if isinstance(expr, SingletonRef):
            item = K.Item(args[expr.pos - 1])
            if self.mode == "multiset":
                return item
            if self.mode == "set":
                return item
            hole = K.PropVar("l")
            return K.Lam((("L", K.SORT_PROP), ("l", K.SORT_PROP)),
                         K.Limp(K.Limp(K.App(K.PropVar("L"), (hole,)), hole), item))
        if isinstance(expr, UnionExpr):
            left = self._side_formula(expr.left, args)
            right = self._side_formula(expr.right, args)
            if self.mode == "multiset":
                return K.Par(left, right)
            if self.mode == "set":
                return K.Oplus(left, right)
            return _dlist_compose_formulas(left, right)
        raise ValueError(f"unknown collection expression {expr!r}")

    def _judgment(self, ann: Annotation, args: list,
                  jvars=None) -> JudgmentInstance:
        if ann.trivial:
            return JudgmentInstance(TRIVIAL)
        raw_lhs = self._side_formula(ann.lhs, args)
        raw_rhs = self._side_formula(ann.rhs, args)
        rel = _REL_BY_MODE.get((self.mode, ann.relation))
        if rel is None:
            raise MixedModes(
                f"relation {ann.relation!r} is not supported in {self.mode} mode")
        if rel in (MSEQ, MSINCL):
            return JudgmentInstance(rel, K.normalize_mset(raw_lhs),
                                    K.normalize_mset(raw_rhs), raw_lhs, raw_rhs)
        if rel in (SETEQ, SETINCL):
            return JudgmentInstance(rel, K.normalize_set(raw_lhs),
                                    K.normalize_set(raw_rhs), raw_lhs, raw_rhs)
        # dlist: apply both sides to the two judgment variables; all judgments
        # of one clause share the same pair so hypotheses rewrite the goal
        if jvars is None:
            jvars = _judgment_var_names(
                {n for a in args for n in K.free_names(a)}
                | K.free_names(raw_lhs) | K.free_names(raw_rhs))
        wn, hn = jvars
        lhs = K.beta_normalize(K.App(raw_lhs, (K.PropVar(wn), K.PropVar(hn))))
        rhs = K.beta_normalize(K.App(raw_rhs, (K.PropVar(wn), K.PropVar(hn))))
        # deterministic bound names, so reports do not depend on process state
        lhs = K.alpha_canonical(lhs, prefix="k")
        rhs = K.alpha_canonical(rhs, prefix="k")
        return JudgmentInstance(DLEQ, lhs, rhs, (wn, hn), (wn, hn))


def _judgment_var_names(used):
    wn, hn = "W", "w"
    while wn in used:
        wn += "'"
    while hn in used:
        hn += "'"
    return wn, hn


def _dlist_compose_formulas(left, right):
    k = K.fresh_name("l")
    return K.Lam((("L", K.SORT_PROP), ("l", K.SORT_PROP)),
                 K.App(left, (K.Lam(((k, K.SORT_PROP),),
                                    K.App(right, (K.PropVar("L"), K.PropVar(k)))),
                              K.PropVar("l"))))


def build_theta(sig: Signature, annotations: dict, mode: str,
                approx_types: frozenset, derive_ctors: bool = True):
    """Assemble the approximating substitution.  Returns (ApproxMap, diags)."""
    ctor_map: dict = {}
    diags: list = []
    builtin_list_ctors = {"nil", "cons"}
    for tname in sorted(approx_types):
        derived, d = derive_constructor_map(tname, sig, mode, approx_types)
        if derive_ctors:
            ctor_map.update(derived)
            diags.extend(d)
        else:
            for ctor, tpl in derived.items():
                if ctor in builtin_list_ctors:
                    ctor_map.update({ctor: tpl})
                else:
                    diags.append(Diagnostic(
                        "MissingConstructorMap",
                        f"no constructor map for {ctor} (rerun with "
                        f"--derive-ctors to derive one from its declaration)",
                        0, 0))
    theta = ApproxMap(mode, frozenset(approx_types), ctor_map, dict(annotations), sig)
    return theta, diags


# ---------------------------------------------------------------------------
# Applying the substitution to a clause
# ---------------------------------------------------------------------------

def _freeze_term(t: K.Term) -> K.Term:
    """Universally quantified element variables become fresh constants."""
    if isinstance(t, K.Var):
        return K.Compound(t.name, ())
    return K.Compound(t.functor, tuple(_freeze_term(a) for a in t.args))


def _is_collection(te, approx_types) -> bool:
    return isinstance(te, TypeApp) and te.name in approx_types


def apply_theta(clause: HornClause, theta: ApproxMap,
                clause_id: int = 0) -> VerificationCondition:
    """Translate one clause into its verification condition."""
    var_types, diags = infer_clause_types(theta.signature, clause)
    if diags:
        raise ApproxError(clause_id, diags[0].message)

    eigen, props = [], []
    for v in clause.vars:
        if _is_collection(var_types[v], theta.approx_types):
            props.append(v)
        else:
            eigen.append(v)

    def encode_collection(t: K.Term):
        if isinstance(t, K.Var):
            return K.PropVar(t.name)
        tpl = theta.ctor_map.get(t.functor)
        if tpl is None:
            raise ApproxError(clause_id,
                              f"no constructor map for {t.functor}/{len(t.args)}")
        args = []
        for sub, (_, sort) in zip(t.args, tpl.params):
            if sort == K.SORT_TERM:
                args.append(_freeze_term(sub))
            else:
                args.append(encode_collection(sub))
        try:
            return K.beta_apply(tpl, args)
        except K.KernelError as e:
            raise ApproxError(clause_id, str(e)) from e

    jvars = _judgment_var_names(set(clause.vars))

    def atom_judgment(atom) -> JudgmentInstance:
        ann = theta.pred_map.get(atom.pred)
        if ann is None:
            raise ApproxError(clause_id, f"no annotation for predicate {atom.pred}")
        if ann.trivial:
            return JudgmentInstance(TRIVIAL)
        decl = theta.signature.decls[atom.pred]
        vals = []
        for sub, te in zip(atom.args, decl.args):
            if _is_collection(te, theta.approx_types):
                vals.append(encode_collection(sub))
            else:
                vals.append(_freeze_term(sub))
        try:
            return theta._judgment(ann, vals, jvars)
        except K.KernelError as e:
            raise ApproxError(clause_id, str(e)) from e

    goal = atom_judgment(clause.head)
    hyps = tuple(j for j in (atom_judgment(a) for a in clause.body)
                 if not j.is_trivial())
    return VerificationCondition(
        clause_id=clause_id, line=clause.line, col=clause.col,
        source=clause.render(), eigen_vars=tuple(eigen), prop_vars=tuple(props),
        hypotheses=hyps, goal=goal, mode=theta.mode,
        quantified_vars=tuple(clause.vars))


def classify_vc(vc: VerificationCondition) -> Classification:
    """Dispatch tag for the provers; mixed-mode VCs are rejected."""
    rels = {j.relation for j in (*vc.hypotheses, vc.goal)} - {TRIVIAL}
    if vc.goal.is_trivial():
        return Classification.TRIVIAL
    modes = set()
    for r in rels:
        if r in (MSEQ, MSINCL):
            modes.add(Classification.MULTISET)
        elif r in (SETEQ, SETINCL):
            modes.add(Classification.SET)
        elif r == DLEQ:
            modes.add(Classification.DLIST)
    if len(modes) != 1:
        raise MixedModes(f"clause {vc.clause_id}: judgments mix modes {modes}")
    return modes.pop()


def program_vcs(program: Program, theta: ApproxMap):
    """Verification conditions for every clause, in clause order."""
    return [apply_theta(c, theta, i) for i, c in enumerate(program.clauses)]
