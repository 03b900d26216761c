"""Parsing and validation of Horn clause programs and collection annotations.

Program files (`.hc`) follow Prolog conventions: capitalised identifiers are
variables, lowercase identifiers constants, `_` is anonymous, `%` starts a
line comment.  Kind and type declarations use directives:

    :- kind list type.
    :- type cons int -> list -> list.
    append(nil, K, K).
    append(cons(X, L), K, cons(X, M)) :- append(L, K, M).

Annotation files (`.ca`) name the approximated types and give exactly one
collection judgment per predicate:

    approx list as multiset.
    pred append(X, Y, Z): X + Y = Z.
    pred leq(_, _): true.

All parse entry points return diagnostics instead of raising; a diagnostic
always carries a source position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .kernel import Compound, Term, Var, render_term

MODES = ("multiset", "set", "dlist")

_MAX_DEPTH = 200
_MAX_DIAGNOSTICS = 100


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int
    col: int

    def render(self) -> str:
        return f"{self.line}:{self.col}: {self.code}: {self.message}"


# ---------------------------------------------------------------------------
# Types and signatures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeApp:
    name: str
    args: tuple = ()

    def render(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name} " + " ".join(
            f"({a.render()})" if isinstance(a, TypeApp) and a.args else a.render()
            for a in self.args)


@dataclass(frozen=True)
class TypeVar:
    name: str

    def render(self) -> str:
        return self.name


TypeExpr = Union[TypeApp, TypeVar]

TYPE_O = TypeApp("o")
TYPE_INT = TypeApp("int")
BUILTIN_KINDS = {"o": 0, "int": 0}


@dataclass(frozen=True)
class Decl:
    """Simple type of a constructor or predicate: args -> result."""

    args: tuple  # of TypeExpr
    result: TypeExpr

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_predicate(self) -> bool:
        return self.result == TYPE_O

    def render(self) -> str:
        parts = [*(a.render() for a in self.args), self.result.render()]
        return " -> ".join(parts)


@dataclass
class Signature:
    kinds: dict = field(default_factory=dict)   # name -> arity
    decls: dict = field(default_factory=dict)   # name -> Decl

    def predicates(self) -> dict:
        return {n: d for n, d in self.decls.items() if d.is_predicate()}

    def constructors_of(self, type_name: str) -> list:
        out = []
        for n, d in self.decls.items():
            r = d.result
            if isinstance(r, TypeApp) and r.name == type_name:
                out.append(n)
        out.sort()
        return out


# ---------------------------------------------------------------------------
# Clauses, annotations, programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple  # of Term

    def render(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(render_term(a) for a in self.args)})"


@dataclass(frozen=True)
class HornClause:
    vars: tuple          # universally quantified names, first-occurrence order
    head: Atom
    body: tuple          # of Atom
    line: int = 0
    col: int = 0

    def render(self) -> str:
        if not self.body:
            return f"{self.head.render()}."
        return f"{self.head.render()} :- {', '.join(a.render() for a in self.body)}."

    def structure(self):
        return (self.vars, self.head, self.body)


# Collection expressions referencing predicate argument positions (1-based).

@dataclass(frozen=True)
class Empty:
    def render(self, names):
        return "{}"


@dataclass(frozen=True)
class ArgRef:
    pos: int

    def render(self, names):
        return names[self.pos - 1]


@dataclass(frozen=True)
class SingletonRef:
    pos: int

    def render(self, names):
        return "{" + names[self.pos - 1] + "}"


@dataclass(frozen=True)
class UnionExpr:
    left: "CollExpr"
    right: "CollExpr"

    def render(self, names):
        return f"{self.left.render(names)} + {self.right.render(names)}"


CollExpr = Union[Empty, ArgRef, SingletonRef, UnionExpr]


@dataclass(frozen=True)
class Annotation:
    predicate: str
    arity: int
    trivial: bool = False
    relation: Optional[str] = None   # "eq" | "incl"
    lhs: Optional[CollExpr] = None
    rhs: Optional[CollExpr] = None
    param_names: tuple = ()
    line: int = 0
    col: int = 0

    def render(self) -> str:
        names = list(self.param_names) or [f"A{i}" for i in range(1, self.arity + 1)]
        head = f"pred {self.predicate}({', '.join(names)})"
        if self.trivial:
            return f"{head}: true."
        rel = "=" if self.relation == "eq" else "<="
        return f"{head}: {self.lhs.render(names)} {rel} {self.rhs.render(names)}."

    def structure(self):
        return (self.predicate, self.arity, self.trivial, self.relation,
                self.lhs, self.rhs)


@dataclass(frozen=True)
class AnnotationFile:
    mode: str
    approx_types: tuple
    annotations: tuple


@dataclass
class Program:
    signature: Signature
    clauses: list
    annotations: dict = field(default_factory=dict)   # pred name -> Annotation
    mode: Optional[str] = None
    approx_types: frozenset = frozenset()

    def structure(self):
        return (
            tuple(sorted(self.signature.kinds.items())),
            tuple(sorted(self.signature.decls.items(), key=lambda kv: kv[0])),
            tuple(c.structure() for c in self.clauses),
        )


def attach_annotations(program: Program, annfile: AnnotationFile) -> Program:
    anns = {a.predicate: a for a in annfile.annotations}
    return replace(
        program,
        annotations=anns,
        mode=annfile.mode,
        approx_types=frozenset(annfile.approx_types),
    )


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<arrow>->)
    | (?P<neck>:-)
    | (?P<leq><=)
    | (?P<int>\d+)
    | (?P<ident>[a-z][A-Za-z0-9_]*)
    | (?P<varname>[A-Z_][A-Za-z0-9_]*)
    | (?P<punct>[(),.{}=+:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _scan(text: str, diags: list) -> list:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m is None:
            if len(diags) < _MAX_DIAGNOSTICS:
                diags.append(Diagnostic(
                    "UnexpectedCharacter",
                    f"unexpected character {text[i]!r}", line, col))
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            k = kind if kind in ("int", "ident", "varname") else tok
            tokens.append(Token(k, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _ParserBase:
    def __init__(self, text: str):
        self.diags: list = []
        self.tokens = _scan(text, self.diags)
        self.pos = 0

    # -- token helpers -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def at_kw(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text == word

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.advance()
        return None

    def error(self, code: str, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        if len(self.diags) < _MAX_DIAGNOSTICS:
            self.diags.append(Diagnostic(code, message, tok.line, tok.col))

    def expect(self, kind: str, what: str) -> Optional[Token]:
        if self.at(kind):
            return self.advance()
        got = self.peek()
        shown = got.text or "end of input"
        self.error("SyntaxError", f"expected {what}, found {shown!r}")
        return None

    def skip_to_dot(self):
        """Error recovery: skip past the next clause terminator."""
        while not self.at("eof"):
            if self.advance().kind == ".":
                return

    def too_many_errors(self) -> bool:
        return len(self.diags) >= _MAX_DIAGNOSTICS


# ---------------------------------------------------------------------------
# Program parser
# ---------------------------------------------------------------------------

class _ProgramParser(_ParserBase):
    def __init__(self, text: str):
        super().__init__(text)
        self.signature = Signature()
        self.clauses: list = []
        self._anon = 0

    def parse(self) -> Optional[Program]:
        while not self.at("eof"):
            if self.too_many_errors():
                self.error("TooManyErrors", "giving up after too many errors")
                break
            if self.at(":-"):
                self.directive()
            else:
                self.clause()
        if self.diags:
            return None
        return Program(self.signature, self.clauses)

    def directive(self):
        self.advance()  # ':-'
        if self.at_kw("kind"):
            self.advance()
            self.kind_decl()
        elif self.at_kw("type"):
            self.advance()
            self.type_decl()
        else:
            self.error("SyntaxError", "expected 'kind' or 'type' after ':-'")
            self.skip_to_dot()

    def kind_decl(self):
        name_tok = self.expect("ident", "a type constructor name")
        if name_tok is None:
            self.skip_to_dot()
            return
        arity = 0
        if not (self.at_kw("type") and self.advance()):
            self.error("SyntaxError", "expected 'type' in kind declaration")
            self.skip_to_dot()
            return
        while self.accept("->"):
            if not (self.at_kw("type") and self.advance()):
                self.error("SyntaxError", "expected 'type' after '->'")
                self.skip_to_dot()
                return
            arity += 1
        if self.expect(".", "'.'") is None:
            self.skip_to_dot()
            return
        name = name_tok.text
        if name in self.signature.kinds or name in BUILTIN_KINDS:
            self.error("DuplicateKind", f"type constructor {name} already declared",
                       name_tok)
            return
        self.signature.kinds[name] = arity

    def type_decl(self):
        name_tok = self.expect("ident", "a constant name")
        if name_tok is None:
            self.skip_to_dot()
            return
        parts = [self.type_expr(0)]
        while self.accept("->"):
            parts.append(self.type_expr(0))
        if any(p is None for p in parts):
            self.skip_to_dot()
            return
        if self.expect(".", "'.'") is None:
            self.skip_to_dot()
            return
        name = name_tok.text
        decl = Decl(tuple(parts[:-1]), parts[-1])
        prev = self.signature.decls.get(name)
        if prev is not None and prev != decl:
            self.error("ConflictingDeclaration",
                       f"{name} already declared with a different type", name_tok)
            return
        self.signature.decls[name] = decl

    def type_expr(self, depth: int) -> Optional[TypeExpr]:
        if depth > _MAX_DEPTH:
            self.error("NestingTooDeep", "type expression nested too deeply")
            return None
        if self.at("("):
            self.advance()
            parts = [self.type_expr(depth + 1)]
            while self.accept("->"):
                parts.append(self.type_expr(depth + 1))
            if self.expect(")", "')'") is None or any(p is None for p in parts):
                return None
            if len(parts) > 1:
                self.error("SyntaxError", "higher-order argument types are not supported")
                return None
            return parts[0]
        if self.at("varname"):
            return TypeVar(self.advance().text)
        head = self.expect("ident", "a type name")
        if head is None:
            return None
        args = []
        while self.at("ident") or self.at("varname") or self.at("("):
            sub = self.type_atom(depth + 1)
            if sub is None:
                return None
            args.append(sub)
        return TypeApp(head.text, tuple(args))

    def type_atom(self, depth: int) -> Optional[TypeExpr]:
        if self.at("varname"):
            return TypeVar(self.advance().text)
        if self.at("ident"):
            return TypeApp(self.advance().text, ())
        if self.at("("):
            return self.type_expr(depth)
        self.error("SyntaxError", "expected a type")
        return None

    # -- clauses -----------------------------------------------------------

    def clause(self):
        start = self.peek()
        head = self.atom(0)
        if head is None:
            self.skip_to_dot()
            return
        body: list = []
        if self.accept(":-"):
            while True:
                a = self.atom(0)
                if a is None:
                    self.skip_to_dot()
                    return
                body.append(a)
                if not self.accept(","):
                    break
        if self.expect(".", "'.'") is None:
            self.skip_to_dot()
            return
        seen: list = []
        for atom in [head, *body]:
            for t in atom.args:
                self._collect_vars(t, seen)
        self.clauses.append(HornClause(tuple(seen), head, tuple(body),
                                       start.line, start.col))

    def _collect_vars(self, t: Term, seen: list):
        if isinstance(t, Var):
            if t.name not in seen:
                seen.append(t.name)
        else:
            for a in t.args:
                self._collect_vars(a, seen)

    def atom(self, depth: int) -> Optional[Atom]:
        name = self.expect("ident", "a predicate name")
        if name is None:
            return None
        args = self.arg_list(depth)
        if args is None:
            return None
        return Atom(name.text, args)

    def arg_list(self, depth: int) -> Optional[tuple]:
        if not self.accept("("):
            return ()
        args = []
        while True:
            t = self.term(depth + 1)
            if t is None:
                return None
            args.append(t)
            if not self.accept(","):
                break
        if self.expect(")", "')' (unclosed parenthesis)") is None:
            return None
        return tuple(args)

    def term(self, depth: int) -> Optional[Term]:
        if depth > _MAX_DEPTH:
            self.error("NestingTooDeep", "term nested too deeply")
            return None
        if self.at("varname"):
            tok = self.advance()
            if tok.text == "_":
                self._anon += 1
                return Var(f"_G{self._anon}")
            return Var(tok.text)
        if self.at("int"):
            return Compound(self.advance().text, ())
        if self.at("ident"):
            name = self.advance().text
            args = self.arg_list(depth)
            if args is None:
                return None
            return Compound(name, args)
        self.error("SyntaxError", "expected a term")
        return None


def parse_program(text: str):
    """Parse a `.hc` file.  Returns (Program | None, diagnostics)."""
    p = _ProgramParser(text)
    prog = p.parse()
    return prog, p.diags


# ---------------------------------------------------------------------------
# Annotation parser
# ---------------------------------------------------------------------------

class _AnnotationParser(_ParserBase):
    def __init__(self, text: str, sig: Signature):
        super().__init__(text)
        self.sig = sig
        self.mode: Optional[str] = None
        self.approx_types: list = []
        self.annotations: list = []

    def parse(self) -> Optional[AnnotationFile]:
        while not self.at("eof"):
            if self.too_many_errors():
                self.error("TooManyErrors", "giving up after too many errors")
                break
            if self.at_kw("approx"):
                self.approx_line()
            elif self.at_kw("pred"):
                self.pred_line()
            else:
                self.error("SyntaxError", "expected 'approx' or 'pred'")
                self.skip_to_dot()
        if self.mode is None:
            self.error("MissingHeader",
                       "annotation file needs at least one 'approx <type> as <mode>.' line",
                       self.tokens[-1])
        seen = set()
        for a in self.annotations:
            if a.predicate in seen:
                self.diags.append(Diagnostic(
                    "DuplicateAnnotation",
                    f"predicate {a.predicate}/{a.arity} annotated more than once",
                    a.line, a.col))
            seen.add(a.predicate)
        if self.diags:
            return None
        return AnnotationFile(self.mode, tuple(self.approx_types),
                              tuple(self.annotations))

    def approx_line(self):
        self.advance()  # 'approx'
        name_tok = self.expect("ident", "a type name")
        if name_tok is None or not (self.at_kw("as") and self.advance()):
            self.error("SyntaxError", "expected 'approx <type> as <mode>.'")
            self.skip_to_dot()
            return
        mode_tok = self.expect("ident", "a mode (multiset, set, or dlist)")
        if mode_tok is None or self.expect(".", "'.'") is None:
            self.skip_to_dot()
            return
        if mode_tok.text not in MODES:
            self.error("UnknownMode", f"unknown mode {mode_tok.text!r}", mode_tok)
            return
        name = name_tok.text
        if name not in self.sig.kinds and name not in BUILTIN_KINDS:
            self.error("UnknownType", f"type {name} is not declared", name_tok)
            return
        if name in self.approx_types:
            self.error("DuplicateApprox", f"type {name} approximated twice", name_tok)
            return
        if self.mode is not None and self.mode != mode_tok.text:
            self.error("MixedModes",
                       f"mode {mode_tok.text} conflicts with earlier mode {self.mode}",
                       mode_tok)
            return
        self.mode = mode_tok.text
        self.approx_types.append(name)

    def pred_line(self):
        start = self.advance()  # 'pred'
        name_tok = self.expect("ident", "a predicate name")
        if name_tok is None:
            self.skip_to_dot()
            return
        params: list = []
        if self.accept("("):
            while True:
                t = self.peek()
                if t.kind == "varname":
                    self.advance()
                    params.append(t.text)
                else:
                    self.error("SyntaxError", "expected a parameter name or '_'")
                    self.skip_to_dot()
                    return
                if not self.accept(","):
                    break
            if self.expect(")", "')'") is None:
                self.skip_to_dot()
                return
        if self.expect(":", "':'") is None:
            self.skip_to_dot()
            return
        name = name_tok.text
        decl = self.sig.decls.get(name)
        if decl is None or not decl.is_predicate():
            self.error("UnknownPredicate", f"{name} is not a declared predicate",
                       name_tok)
            self.skip_to_dot()
            return
        if len(params) != decl.arity:
            self.error("ArityMismatch",
                       f"{name} declared with arity {decl.arity}, "
                       f"annotation lists {len(params)} parameter(s)", name_tok)
            self.skip_to_dot()
            return
        positions = {}
        for i, p in enumerate(params, start=1):
            if p != "_":
                if p in positions:
                    self.error("DuplicateParameter", f"parameter {p} repeated", name_tok)
                positions[p] = i
        if self.at_kw("true"):
            self.advance()
            if self.expect(".", "'.'") is None:
                self.skip_to_dot()
                return
            self.annotations.append(Annotation(
                name, decl.arity, trivial=True, param_names=tuple(params),
                line=start.line, col=start.col))
            return
        lhs = self.side(positions, decl)
        if lhs is None:
            self.skip_to_dot()
            return
        if self.accept("="):
            relation = "eq"
        elif self.accept("<="):
            relation = "incl"
        else:
            self.error("SyntaxError", "expected '=' or '<='")
            self.skip_to_dot()
            return
        rhs = self.side(positions, decl)
        if rhs is None or self.expect(".", "'.'") is None:
            self.skip_to_dot()
            return
        self.annotations.append(Annotation(
            name, decl.arity, relation=relation, lhs=lhs, rhs=rhs,
            param_names=tuple(params), line=start.line, col=start.col))

    def side(self, positions: dict, decl: Decl) -> Optional[CollExpr]:
        out = self.side_term(positions, decl)
        if out is None:
            return None
        while self.accept("+"):
            nxt = self.side_term(positions, decl)
            if nxt is None:
                return None
            out = UnionExpr(out, nxt)
        return out

    def side_term(self, positions: dict, decl: Decl) -> Optional[CollExpr]:
        if self.accept("{"):
            if self.accept("}"):
                return Empty()
            tok = self.expect("varname", "a parameter name")
            if tok is None or self.expect("}", "'}'") is None:
                return None
            pos = positions.get(tok.text)
            if pos is None:
                self.error("UnknownParameter", f"unknown parameter {tok.text}", tok)
                return None
            return SingletonRef(pos)
        if self.at("varname"):
            tok = self.advance()
            pos = positions.get(tok.text)
            if pos is None:
                self.error("UnknownParameter", f"unknown parameter {tok.text}", tok)
                return None
            return ArgRef(pos)
        self.error("SyntaxError", "expected '{}', a parameter, or '{param}'")
        return None


def parse_annotations(text: str, sig: Signature):
    """Parse a `.ca` file against a signature.  Returns (AnnotationFile | None, diags)."""
    p = _AnnotationParser(text, sig)
    annfile = p.parse()
    if annfile is None:
        return None, p.diags
    diags = list(p.diags)
    diags.extend(check_annotation_positions(annfile, sig))
    if diags:
        return None, diags
    return annfile, diags


def check_annotation_positions(annfile: AnnotationFile, sig: Signature) -> list:
    """Arg positions must be collection-typed, Singleton positions element-typed."""
    approx = set(annfile.approx_types)
    diags = []

    def is_collection(te: TypeExpr) -> bool:
        return isinstance(te, TypeApp) and te.name in approx

    def walk(expr: CollExpr, ann: Annotation, decl: Decl):
        if isinstance(expr, ArgRef):
            if not is_collection(decl.args[expr.pos - 1]):
                diags.append(Diagnostic(
                    "ElementPositionAsCollection",
                    f"{ann.predicate}: argument {expr.pos} has type "
                    f"{decl.args[expr.pos - 1].render()}, which is not an "
                    f"approximated collection type", ann.line, ann.col))
        elif isinstance(expr, SingletonRef):
            if is_collection(decl.args[expr.pos - 1]):
                diags.append(Diagnostic(
                    "CollectionPositionAsElement",
                    f"{ann.predicate}: argument {expr.pos} is collection-typed "
                    f"but used as a singleton element", ann.line, ann.col))
        elif isinstance(expr, UnionExpr):
            walk(expr.left, ann, decl)
            walk(expr.right, ann, decl)

    for ann in annfile.annotations:
        if ann.trivial:
            continue
        decl = sig.decls[ann.predicate]
        walk(ann.lhs, ann, decl)
        walk(ann.rhs, ann, decl)
    return diags


# ---------------------------------------------------------------------------
# Type inference over clauses
# ---------------------------------------------------------------------------

class _TypeUnifier:
    def __init__(self):
        self.bindings: dict = {}
        self.counter = 0

    def fresh(self) -> TypeVar:
        self.counter += 1
        return TypeVar(f"?t{self.counter}")

    def walk(self, t: TypeExpr) -> TypeExpr:
        while isinstance(t, TypeVar) and t.name in self.bindings:
            t = self.bindings[t.name]
        return t

    def resolve(self, t: TypeExpr) -> TypeExpr:
        t = self.walk(t)
        if isinstance(t, TypeApp):
            return TypeApp(t.name, tuple(self.resolve(a) for a in t.args))
        return t

    def unify(self, a: TypeExpr, b: TypeExpr) -> bool:
        a, b = self.walk(a), self.walk(b)
        if isinstance(a, TypeVar):
            if a == b:
                return True
            self.bindings[a.name] = b
            return True
        if isinstance(b, TypeVar):
            self.bindings[b.name] = a
            return True
        if a.name != b.name or len(a.args) != len(b.args):
            return False
        return all(self.unify(x, y) for x, y in zip(a.args, b.args))


def _instantiate(decl: Decl, uni: _TypeUnifier) -> Decl:
    mapping: dict = {}

    def inst(t: TypeExpr) -> TypeExpr:
        if isinstance(t, TypeVar):
            if t.name not in mapping:
                mapping[t.name] = uni.fresh()
            return mapping[t.name]
        return TypeApp(t.name, tuple(inst(a) for a in t.args))

    return Decl(tuple(inst(a) for a in decl.args), inst(decl.result))


def infer_clause_types(sig: Signature, clause: HornClause):
    """Infer a type for each clause variable.

    Returns (var_types dict, diagnostics).  Undeclared predicates and
    functors, arity mismatches, and type conflicts all surface here.
    """
    uni = _TypeUnifier()
    var_types = {v: uni.fresh() for v in clause.vars}
    diags: list = []

    def check_term(t: Term, expected: TypeExpr):
        if isinstance(t, Var):
            if not uni.unify(var_types[t.name], expected):
                diags.append(Diagnostic(
                    "TypeError",
                    f"variable {t.name} used at incompatible types in "
                    f"{clause.head.render()}", clause.line, clause.col))
            return
        if not t.args and t.functor.isdigit():
            if not uni.unify(TYPE_INT, expected):
                diags.append(Diagnostic(
                    "TypeError", f"integer literal {t.functor} used where "
                    f"{uni.resolve(expected).render()} expected",
                    clause.line, clause.col))
            return
        decl = sig.decls.get(t.functor)
        if decl is None:
            diags.append(Diagnostic(
                "UndeclaredFunctor",
                f"undeclared functor {t.functor}/{len(t.args)}",
                clause.line, clause.col))
            return
        if decl.is_predicate():
            diags.append(Diagnostic(
                "PredicateAsFunctor",
                f"predicate {t.functor} used inside a term",
                clause.line, clause.col))
            return
        if decl.arity != len(t.args):
            diags.append(Diagnostic(
                "ArityMismatch",
                f"{t.functor} declared with arity {decl.arity}, used with "
                f"{len(t.args)}", clause.line, clause.col))
            return
        inst = _instantiate(decl, uni)
        if not uni.unify(inst.result, expected):
            diags.append(Diagnostic(
                "TypeError",
                f"{t.functor} produces {uni.resolve(inst.result).render()} where "
                f"{uni.resolve(expected).render()} expected",
                clause.line, clause.col))
        for sub, te in zip(t.args, inst.args):
            check_term(sub, te)

    def check_atom(a: Atom):
        decl = sig.decls.get(a.pred)
        if decl is None:
            diags.append(Diagnostic(
                "UndeclaredPredicate",
                f"undeclared predicate {a.pred}/{len(a.args)}",
                clause.line, clause.col))
            return
        if not decl.is_predicate():
            diags.append(Diagnostic(
                "NotAPredicate", f"{a.pred} is not declared as a predicate",
                clause.line, clause.col))
            return
        if decl.arity != len(a.args):
            diags.append(Diagnostic(
                "ArityMismatch",
                f"{a.pred} declared with arity {decl.arity}, used with "
                f"{len(a.args)}", clause.line, clause.col))
            return
        inst = _instantiate(decl, uni)
        for sub, te in zip(a.args, inst.args):
            check_term(sub, te)

    check_atom(clause.head)
    for a in clause.body:
        check_atom(a)
    if diags:
        return None, diags

    resolved = {}
    for v, tv in var_types.items():
        rt = uni.resolve(tv)
        if isinstance(rt, TypeVar) or _has_tvar(rt):
            diags.append(Diagnostic(
                "AmbiguousType",
                f"cannot infer a ground type for variable {v}",
                clause.line, clause.col))
        resolved[v] = rt
    if diags:
        return None, diags
    return resolved, diags


def _has_tvar(t: TypeExpr) -> bool:
    if isinstance(t, TypeVar):
        return True
    return any(_has_tvar(a) for a in t.args)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(program: Program) -> list:
    """Structural and annotation checks; empty result means well-formed."""
    diags: list = []
    sig = program.signature

    for name, decl in sig.decls.items():
        for te in (*decl.args, decl.result):
            diags.extend(_check_type_wf(te, sig, name))

    used_preds = {}
    for clause in program.clauses:
        _, cdiags = infer_clause_types(sig, clause)
        diags.extend(cdiags)
        for atom in (clause.head, *clause.body):
            used_preds.setdefault(atom.pred, (clause.line, clause.col))

    if program.mode is not None:
        for pred, (line, col) in used_preds.items():
            if pred in sig.decls and sig.decls[pred].is_predicate() \
                    and pred not in program.annotations:
                diags.append(Diagnostic(
                    "MissingAnnotation",
                    f"predicate {pred} has no collection annotation "
                    f"(write 'pred {pred}(...): true.' if it makes no "
                    f"statement about collections)", line, col))
    return diags


def _check_type_wf(te: TypeExpr, sig: Signature, owner: str) -> list:
    if isinstance(te, TypeVar):
        return []
    diags = []
    arity = sig.kinds.get(te.name, BUILTIN_KINDS.get(te.name))
    if arity is None:
        diags.append(Diagnostic(
            "UnknownType", f"{owner}: type {te.name} is not declared", 0, 0))
    elif arity != len(te.args):
        diags.append(Diagnostic(
            "KindArityMismatch",
            f"{owner}: type constructor {te.name} expects {arity} argument(s)",
            0, 0))
    for a in te.args:
        diags.extend(_check_type_wf(a, sig, owner))
    return diags


# ---------------------------------------------------------------------------
# Printing (round-trip support)
# ---------------------------------------------------------------------------

def print_program(program: Program) -> str:
    lines = []
    for name, arity in program.signature.kinds.items():
        rhs = " -> ".join(["type"] * (arity + 1))
        lines.append(f":- kind {name} {rhs}.")
    for name, decl in program.signature.decls.items():
        lines.append(f":- type {name} {decl.render()}.")
    if lines:
        lines.append("")
    for clause in program.clauses:
        lines.append(clause.render())
    return "\n".join(lines) + "\n"


def print_annotations(annfile: AnnotationFile) -> str:
    lines = [f"approx {t} as {annfile.mode}." for t in annfile.approx_types]
    lines.append("")
    lines.extend(a.render() for a in annfile.annotations)
    return "\n".join(lines) + "\n"
