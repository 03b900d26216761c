"""Standalone sequent files (`.llq`) for driving the provers directly.

    mode multiset.
    hyp: x + item(a) = y.
    hyp: y <= z.
    goal: x <= z.

Sides are `{}`, `item(<term>)`, a propositional variable, or sums of these;
`=` is equality and `<=` inclusion.  Exactly one goal line is required.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import mset_prover, set_prover
from .approx import JudgmentInstance, MSEQ, MSINCL, SETEQ, SETINCL
from .frontend import _ParserBase
from .kernel import Compound, Item, MsExpr, PropVar, SetExpr, Var


@dataclass
class SequentFile:
    mode: str
    hypotheses: tuple
    goal: JudgmentInstance


class _SequentParser(_ParserBase):
    def __init__(self, text: str):
        super().__init__(text)
        self.mode: Optional[str] = None
        self.hyps: list = []
        self.goal: Optional[JudgmentInstance] = None

    def parse(self) -> Optional[SequentFile]:
        if self.at_kw("mode"):
            self.advance()
            tok = self.expect("ident", "a mode (multiset or set)")
            if tok is None or self.expect(".", "'.'") is None:
                return None
            if tok.text not in ("multiset", "set"):
                self.error("UnknownMode", f"unknown mode {tok.text!r}", tok)
                return None
            self.mode = tok.text
        else:
            self.error("MissingHeader", "sequent file must start with 'mode <m>.'")
            return None
        while not self.at("eof"):
            if self.too_many_errors():
                break
            if self.at_kw("hyp"):
                self.advance()
                j = self.judgment_line()
                if j is not None:
                    self.hyps.append(j)
            elif self.at_kw("goal"):
                tok = self.advance()
                j = self.judgment_line()
                if j is not None:
                    if self.goal is not None:
                        self.error("DuplicateGoal", "more than one goal line", tok)
                    self.goal = j
            else:
                self.error("SyntaxError", "expected 'hyp:' or 'goal:'")
                self.skip_to_dot()
        if self.goal is None:
            self.error("MissingGoal", "no goal line", self.tokens[-1])
        if self.diags:
            return None
        return SequentFile(self.mode, tuple(self.hyps), self.goal)

    def judgment_line(self) -> Optional[JudgmentInstance]:
        if self.expect(":", "':'") is None:
            self.skip_to_dot()
            return None
        lhs = self.side()
        if lhs is None:
            self.skip_to_dot()
            return None
        if self.accept("="):
            rel = "eq"
        elif self.accept("<="):
            rel = "incl"
        else:
            self.error("SyntaxError", "expected '=' or '<='")
            self.skip_to_dot()
            return None
        rhs = self.side()
        if rhs is None or self.expect(".", "'.'") is None:
            self.skip_to_dot()
            return None
        if self.mode == "multiset":
            relation = MSEQ if rel == "eq" else MSINCL
            L, R = MsExpr.of(lhs), MsExpr.of(rhs)
        else:
            relation = SETEQ if rel == "eq" else SETINCL
            L, R = SetExpr.of(lhs), SetExpr.of(rhs)
        return JudgmentInstance(relation, L, R, L.to_formula(), R.to_formula())

    def side(self) -> Optional[list]:
        atoms = self.side_atom()
        if atoms is None:
            return None
        while self.accept("+"):
            nxt = self.side_atom()
            if nxt is None:
                return None
            atoms.extend(nxt)
        return atoms

    def side_atom(self) -> Optional[list]:
        if self.accept("{"):
            if self.expect("}", "'}' ('{}' is the empty collection)") is None:
                return None
            return []
        if self.at_kw("item"):
            self.advance()
            if self.expect("(", "'('") is None:
                return None
            t = self.term(0)
            if t is None or self.expect(")", "')'") is None:
                return None
            return [Item(t)]
        if self.at("ident") or self.at("varname"):
            return [PropVar(self.advance().text)]
        self.error("SyntaxError", "expected '{}', item(term), or a variable")
        return None

    def term(self, depth: int):
        if depth > 100:
            self.error("NestingTooDeep", "term nested too deeply")
            return None
        if self.at("varname"):
            return Var(self.advance().text)
        if self.at("int"):
            return Compound(self.advance().text, ())
        name = self.expect("ident", "a term")
        if name is None:
            return None
        args = []
        if self.accept("("):
            while True:
                t = self.term(depth + 1)
                if t is None:
                    return None
                args.append(t)
                if not self.accept(","):
                    break
            if self.expect(")", "')'") is None:
                return None
        return Compound(name.text, tuple(args))


def parse_sequent(text: str):
    """Returns (SequentFile | None, diagnostics)."""
    p = _SequentParser(text)
    return p.parse(), p.diags


@dataclass
class SequentResult:
    status: str       # proved | refuted | unknown
    states: int
    detail: str


def prove_sequent(sf: SequentFile, max_states: int) -> SequentResult:
    """Run the mode's prover on a parsed sequent file."""
    if sf.mode == "multiset":
        rules = mset_prover.compile_hypotheses(sf.hypotheses)
        seq = mset_prover.MsSequent(tuple(rules), sf.goal.lhs, sf.goal.rhs,
                                    sf.goal.relation)
        res = mset_prover.prove_mset(seq, max_states=max_states)
        detail = res.render_trace() if res.status == mset_prover.PROVED else ""
        return SequentResult(res.status, res.states_explored, detail)
    clauses = set_prover.compile_set_hypotheses(sf.hypotheses)
    goals = [set_prover.SetSequent(tuple(clauses), sf.goal.lhs, sf.goal.rhs)]
    if sf.goal.relation == SETEQ:
        goals.append(set_prover.SetSequent(tuple(clauses), sf.goal.rhs, sf.goal.lhs))
    transitions = 0
    details = []
    for seq in goals:
        res = set_prover.prove_set(seq)
        transitions += res.transitions
        details.append(res.render_derivation(seq))
        if res.status == set_prover.REFUTED:
            return SequentResult("refuted", transitions, details[-1])
    return SequentResult("proved", transitions, "\n---\n".join(details))
