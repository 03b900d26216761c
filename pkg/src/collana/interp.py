"""Ground interpreter for Horn programs and the empirical collection oracle.

`sld_solve` is a routine depth-first, leftmost-selection resolution engine
with the occurs check enabled; it exists to validate the static analysis, so
soundness beats speed throughout.  The comparison predicates leq/lt/gr/ge
fall back to native integer comparison when a program does not define them.

`empirical_check` samples random ground inputs for an annotated predicate,
enumerates answers, and evaluates the annotated collection judgment on every
answer.  Any violation is a counterexample disproving either the analysed
program's annotation or the analyser itself.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .frontend import Atom, HornClause, Program, TypeApp, TypeVar
from .kernel import Compound, Term, Var, render_term

DEFAULT_DEPTH = 10_000

_NATIVE_COMPARE = {
    "leq": lambda a, b: a <= b,
    "lt": lambda a, b: a < b,
    "gr": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


class DepthLimitExceeded(Exception):
    """Search hit its resolution-step budget; answers found so far attached."""

    def __init__(self, answers):
        super().__init__("resolution step limit exceeded")
        self.answers = answers


class InstantiationError(Exception):
    """A native comparison was called on non-ground or non-integer arguments."""


class Unsupported(Exception):
    """Random input generation is impossible for this predicate."""


@dataclass(frozen=True)
class Query:
    predicate: str
    args: tuple
    depth_limit: int = DEFAULT_DEPTH


@dataclass(frozen=True)
class GroundCollection:
    kind: str       # "multiset" | "set" | "sequence"
    elements: tuple

    @staticmethod
    def multiset(items) -> "GroundCollection":
        return GroundCollection("multiset", tuple(sorted(items, key=render_term)))

    @staticmethod
    def set_of(items) -> "GroundCollection":
        return GroundCollection("set", tuple(sorted(set(items), key=render_term)))

    @staticmethod
    def sequence(items) -> "GroundCollection":
        return GroundCollection("sequence", tuple(items))

    def counter(self) -> Counter:
        return Counter(self.elements)


# ---------------------------------------------------------------------------
# Unification with occurs check
# ---------------------------------------------------------------------------

def _walk(t: Term, s: dict) -> Term:
    while isinstance(t, Var) and t.name in s:
        t = s[t.name]
    return t


def _occurs(name: str, t: Term, s: dict) -> bool:
    t = _walk(t, s)
    if isinstance(t, Var):
        return t.name == name
    return any(_occurs(name, a, s) for a in t.args)


def unify(a: Term, b: Term, s: dict, trail: list) -> bool:
    a, b = _walk(a, s), _walk(b, s)
    if isinstance(a, Var):
        if isinstance(b, Var) and a.name == b.name:
            return True
        if _occurs(a.name, b, s):
            return False
        s[a.name] = b
        trail.append(a.name)
        return True
    if isinstance(b, Var):
        return unify(b, a, s, trail)
    if a.functor != b.functor or len(a.args) != len(b.args):
        return False
    return all(unify(x, y, s, trail) for x, y in zip(a.args, b.args))


def resolve(t: Term, s: dict) -> Term:
    t = _walk(t, s)
    if isinstance(t, Var):
        return t
    return Compound(t.functor, tuple(resolve(a, s) for a in t.args))


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)


# ---------------------------------------------------------------------------
# SLD resolution
# ---------------------------------------------------------------------------

class Interpreter:
    def __init__(self, program: Program, native_compare: bool = True):
        self.program = program
        self.index: dict = {}
        for c in program.clauses:
            self.index.setdefault(c.head.pred, []).append(c)
        self.native_compare = native_compare
        self._rename_counter = 0

    def _rename(self, clause: HornClause) -> HornClause:
        self._rename_counter += 1
        n = self._rename_counter
        mapping = {v: Var(f"{v}@{n}") for v in clause.vars}

        def rn(t: Term) -> Term:
            if isinstance(t, Var):
                return mapping.get(t.name, t)
            return Compound(t.functor, tuple(rn(a) for a in t.args))

        head = Atom(clause.head.pred, tuple(rn(a) for a in clause.head.args))
        body = tuple(Atom(a.pred, tuple(rn(x) for x in a.args)) for a in clause.body)
        return HornClause(tuple(mapping.values()), head, body)

    def _is_native(self, pred: str) -> bool:
        return (self.native_compare and pred in _NATIVE_COMPARE
                and pred not in self.index)

    def _eval_native(self, atom: Atom, s: dict) -> bool:
        vals = []
        for t in atom.args:
            t = resolve(t, s)
            if not (isinstance(t, Compound) and not t.args and t.functor.isdigit()):
                raise InstantiationError(
                    f"{atom.pred} needs ground integer arguments, got "
                    f"{render_term(t)}")
            vals.append(int(t.functor))
        return _NATIVE_COMPARE[atom.pred](*vals)

    def solve(self, query: Query) -> list:
        """All answer substitutions, depth-first, deterministic order."""
        query_vars = sorted({v for t in query.args for v in _term_vars(t)})
        goal = Atom(query.predicate, query.args)
        answers: list = []
        s: dict = {}
        steps = 0

        def run(goals):
            nonlocal steps
            if not goals:
                answers.append({v: resolve(Var(v), s) for v in query_vars})
                return
            first, rest = goals[0], goals[1:]
            if self._is_native(first.pred):
                if self._eval_native(first, s):
                    run(rest)
                return
            for clause in self.index.get(first.pred, ()):
                steps += 1
                if steps > query.depth_limit:
                    raise DepthLimitExceeded(answers)
                renamed = self._rename(clause)
                trail: list = []
                matched = all(
                    unify(x, y, s, trail)
                    for x, y in zip(first.args, renamed.head.args)
                ) if len(first.args) == len(renamed.head.args) else False
                if matched:
                    run(list(renamed.body) + rest)
                for name in trail:
                    del s[name]

        run([goal])
        return answers


def _term_vars(t: Term):
    if isinstance(t, Var):
        yield t.name
    else:
        for a in t.args:
            yield from _term_vars(a)


def sld_solve(program: Program, query: Query, native_compare: bool = True) -> list:
    return Interpreter(program, native_compare).solve(query)


# ---------------------------------------------------------------------------
# Semantic judgment checkers
# ---------------------------------------------------------------------------

def models_m(lhs: GroundCollection, rel: str, rhs: GroundCollection) -> bool:
    """Multiset equality/inclusion with multiplicities."""
    assert lhs.kind == rhs.kind == "multiset"
    a, b = lhs.counter(), rhs.counter()
    if rel == "mseq":
        return a == b
    if rel == "msincl":
        return all(b[k] >= n for k, n in a.items())
    raise ValueError(f"bad multiset relation {rel}")


def models_s(lhs: GroundCollection, rel: str, rhs: GroundCollection) -> bool:
    """Set equality/inclusion (multiplicities collapse)."""
    assert lhs.kind == rhs.kind == "set"
    a, b = set(lhs.elements), set(rhs.elements)
    if rel == "seteq":
        return a == b
    if rel == "setincl":
        return a <= b
    raise ValueError(f"bad set relation {rel}")


# ---------------------------------------------------------------------------
# Ground collections of terms
# ---------------------------------------------------------------------------

def item_sequence(t: Term, sig, approx_types) -> list:
    """In-order item sequence of a ground collection term.

    Mirrors the derived constructor maps: element arguments contribute one
    item each, recursive arguments are traversed, and constructors with two
    recursive arguments are read in-order.
    """
    if isinstance(t, Var):
        raise Unsupported("open collection term")
    decl = sig.decls.get(t.functor)
    if decl is None:
        raise Unsupported(f"unknown constructor {t.functor}")
    kinds = []
    for te in decl.args:
        rec = isinstance(te, TypeApp) and te.name in approx_types
        kinds.append("rec" if rec else "elem")
    order = list(range(len(kinds)))
    if kinds.count("rec") == 2:
        rec_idx = [i for i, k in enumerate(kinds) if k == "rec"]
        elem_idx = [i for i, k in enumerate(kinds) if k == "elem"]
        order = [rec_idx[0], *elem_idx, rec_idx[1]]
    out = []
    for i in order:
        if kinds[i] == "elem":
            out.append(t.args[i])
        else:
            out.extend(item_sequence(t.args[i], sig, approx_types))
    return out


def collection_of(t: Term, sig, approx_types, kind: str) -> GroundCollection:
    seq = item_sequence(t, sig, approx_types)
    if kind == "multiset":
        return GroundCollection.multiset(seq)
    if kind == "set":
        return GroundCollection.set_of(seq)
    return GroundCollection.sequence(seq)


# ---------------------------------------------------------------------------
# Random ground input generation
# ---------------------------------------------------------------------------

@dataclass
class GenBounds:
    max_size: int = 8       # item count budget per collection
    elem_lo: int = 0
    elem_hi: int = 9


def random_element(rng: random.Random, bounds: GenBounds) -> Term:
    return Compound(str(rng.randint(bounds.elem_lo, bounds.elem_hi)), ())


def random_collection_term(type_name: str, sig, approx_types,
                           rng: random.Random, bounds: GenBounds,
                           size: Optional[int] = None) -> Term:
    """Random ground term of an approximated type, built from its constructors."""
    ctors = sig.constructors_of(type_name)
    if not ctors:
        raise Unsupported(f"type {type_name} has no constructors")
    nullary = [c for c in ctors if sig.decls[c].arity == 0]
    recursive = [c for c in ctors if sig.decls[c].arity > 0]
    if not nullary:
        raise Unsupported(f"type {type_name} has no base constructor")
    if size is None:
        size = rng.randint(0, bounds.max_size)

    def grow(budget: int) -> Term:
        if budget <= 0 or not recursive:
            return Compound(rng.choice(nullary), ())
        ctor = rng.choice(recursive)
        decl = sig.decls[ctor]
        rec_positions = [
            i for i, te in enumerate(decl.args)
            if isinstance(te, TypeApp) and te.name in approx_types]
        shares = _split_budget(budget - 1, max(1, len(rec_positions)), rng)
        args = []
        ri = 0
        for i, te in enumerate(decl.args):
            if i in rec_positions:
                args.append(grow(shares[ri]))
                ri += 1
            elif isinstance(te, (TypeVar,)) or te == TypeApp("int"):
                args.append(random_element(rng, bounds))
            elif isinstance(te, TypeApp) and te.name in sig.kinds:
                args.append(random_collection_term(
                    te.name, sig, frozenset({te.name}), rng, bounds, budget // 2))
            else:
                raise Unsupported(
                    f"cannot generate arguments of type {te.render()}")
        return Compound(ctor, tuple(args))

    return grow(size)


def _split_budget(total: int, parts: int, rng: random.Random) -> list:
    if parts == 1:
        return [total]
    cut = rng.randint(0, total)
    return [cut, *(_split_budget(total - cut, parts - 1, rng))]


# ---------------------------------------------------------------------------
# Empirical check
# ---------------------------------------------------------------------------

@dataclass
class EmpiricalReport:
    predicate: str
    trials: int
    seed: int
    passed: int = 0
    failed: int = 0
    inconclusive: int = 0
    counterexamples: list = field(default_factory=list)

    def render(self) -> str:
        lines = [f"{self.predicate}: trials={self.trials} passed={self.passed} "
                 f"failed={self.failed} inconclusive={self.inconclusive} "
                 f"(seed {self.seed})"]
        for query, answer, judgment in self.counterexamples[:10]:
            lines.append(f"  counterexample: {query} gave {answer}; "
                         f"violates {judgment}")
        return "\n".join(lines)


def _collection_positions(decl, approx_types) -> list:
    return [i for i, te in enumerate(decl.args)
            if isinstance(te, TypeApp) and te.name in approx_types]


def infer_outputs(program: Program, predicate: str, rng: random.Random,
                  bounds: GenBounds, depth_limit: int = DEFAULT_DEPTH) -> list:
    """Pick which trailing collection arguments to leave as query outputs.

    Starts from "last collection argument only" and widens while small probe
    queries mostly fail to produce answers; a pattern is accepted once a
    majority of probes find at least one answer.  Deterministic per seed.
    """
    decl = program.signature.decls[predicate]
    coll = _collection_positions(decl, program.approx_types)
    if not coll:
        return []
    probe_bounds = GenBounds(max_size=3, elem_lo=bounds.elem_lo,
                             elem_hi=bounds.elem_hi)
    probes = 6
    hits_by_k = {}
    for k in range(1, len(coll) + 1):
        outputs = coll[len(coll) - k:]
        hits = 0
        for _ in range(probes):
            try:
                args = _build_args(program, decl, outputs, rng, probe_bounds)
                answers = sld_solve(program, Query(predicate, args, depth_limit))
            except (DepthLimitExceeded, InstantiationError, Unsupported):
                continue
            # only ground answers make the judgment checkable
            if any(all(is_ground(t) for t in a.values()) for a in answers):
                hits += 1
        if hits > probes // 2:
            return outputs
        hits_by_k[k] = hits
    best = max(hits_by_k, key=lambda k: (hits_by_k[k], -k), default=None)
    if best is not None and hits_by_k[best] > 0:
        return coll[len(coll) - best:]
    raise Unsupported(f"no output pattern of {predicate} yields answers")


def _build_args(program: Program, decl, outputs, rng, bounds):
    args = []
    for i, te in enumerate(decl.args):
        if i in outputs:
            args.append(Var(f"Out{i}"))
        elif isinstance(te, TypeApp) and te.name in program.approx_types:
            args.append(random_collection_term(
                te.name, program.signature, program.approx_types, rng, bounds))
        elif te == TypeApp("int") or isinstance(te, TypeVar):
            args.append(random_element(rng, bounds))
        else:
            raise Unsupported(f"cannot generate input of type {te.render()}")
    return tuple(args)


def _eval_side(expr, atom_args, program, kind):
    from .frontend import ArgRef, Empty, SingletonRef, UnionExpr
    if isinstance(expr, Empty):
        return []
    if isinstance(expr, ArgRef):
        return item_sequence(atom_args[expr.pos - 1], program.signature,
                             program.approx_types)
    if isinstance(expr, SingletonRef):
        return [atom_args[expr.pos - 1]]
    if isinstance(expr, UnionExpr):
        return (_eval_side(expr.left, atom_args, program, kind)
                + _eval_side(expr.right, atom_args, program, kind))
    raise ValueError(f"unknown side {expr!r}")


def check_judgment(program: Program, ann, atom_args) -> bool:
    """Evaluate an annotation on ground predicate arguments."""
    mode = program.mode
    lhs_items = _eval_side(ann.lhs, atom_args, program, mode)
    rhs_items = _eval_side(ann.rhs, atom_args, program, mode)
    if mode == "multiset":
        rel = "mseq" if ann.relation == "eq" else "msincl"
        return models_m(GroundCollection.multiset(lhs_items), rel,
                        GroundCollection.multiset(rhs_items))
    if mode == "set":
        rel = "seteq" if ann.relation == "eq" else "setincl"
        return models_s(GroundCollection.set_of(lhs_items), rel,
                        GroundCollection.set_of(rhs_items))
    if mode == "dlist":
        if ann.relation != "eq":
            raise Unsupported("difference-list annotations support only equality")
        return tuple(lhs_items) == tuple(rhs_items)
    raise ValueError(f"unknown mode {mode}")


def empirical_check(program: Program, ann, trials: int, bounds: GenBounds,
                    seed: int, outputs: Optional[list] = None,
                    depth_limit: int = DEFAULT_DEPTH) -> EmpiricalReport:
    """Randomised end-to-end check of one predicate's collection judgment."""
    if ann.trivial:
        raise Unsupported(f"{ann.predicate} has a trivial annotation")
    rng = random.Random(seed)
    decl = program.signature.decls[ann.predicate]
    if outputs is None:
        outputs = infer_outputs(program, ann.predicate, rng, bounds, depth_limit)
    report = EmpiricalReport(ann.predicate, trials, seed)
    for _ in range(trials):
        try:
            args = _build_args(program, decl, outputs, rng, bounds)
        except Unsupported:
            report.inconclusive += 1
            continue
        query = Query(ann.predicate, args, depth_limit)
        try:
            answers = sld_solve(program, query)
        except (DepthLimitExceeded, InstantiationError):
            report.inconclusive += 1
            continue
        trial_failed = False
        trial_inconclusive = False
        for answer in answers:
            ground_args = tuple(
                answer.get(a.name, a) if isinstance(a, Var) else a
                for a in args)
            if not all(is_ground(g) for g in ground_args):
                trial_inconclusive = True
                continue
            try:
                ok = check_judgment(program, ann, ground_args)
            except Unsupported:
                trial_inconclusive = True
                continue
            if not ok:
                trial_failed = True
                qstr = Atom(ann.predicate, args).render()
                astr = ", ".join(f"{v}={render_term(t)}"
                                 for v, t in sorted(answer.items()))
                report.counterexamples.append((qstr, astr or "yes", ann.render()))
        if trial_failed:
            report.failed += 1
        elif trial_inconclusive:
            report.inconclusive += 1
        else:
            report.passed += 1
    return report
