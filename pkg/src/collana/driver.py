"""End-to-end pipeline: parse, validate, substitute, classify, and prove.

The driver owns the equality-goal decomposition for set statements (both
inclusion directions must hold) and the per-clause dispatch to the three
discharge procedures.  Verification conditions can be proved concurrently;
report assembly stays ordered by clause.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import approx, mset_prover, seqapprox, set_prover
from .approx import (ApproxMap, Classification, SETEQ, SETINCL,
                     VerificationCondition, build_theta, classify_vc,
                     program_vcs)
from .frontend import (Program, attach_annotations, parse_annotations,
                       parse_program, validate)
from .report import (STATUS_PROVED, STATUS_REFUTED, STATUS_TRIVIAL,
                     STATUS_UNKNOWN, AnalysisReport, ClauseEntry)


@dataclass
class Options:
    max_states: int = mset_prover.DEFAULT_MAX_STATES
    derive_ctors: bool = True
    jobs: int = 1


class LoadError(Exception):
    def __init__(self, diagnostics):
        super().__init__("; ".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


def load_program(program_text: str, annotation_text: str,
                 mode_override: str = None) -> Program:
    """Parse and validate both inputs; raises LoadError with diagnostics."""
    prog, diags = parse_program(program_text)
    if diags:
        raise LoadError(diags)
    annfile, adiags = parse_annotations(annotation_text, prog.signature)
    if adiags:
        raise LoadError(adiags)
    if mode_override and mode_override != annfile.mode:
        annfile = type(annfile)(mode_override, annfile.approx_types,
                                annfile.annotations)
    program = attach_annotations(prog, annfile)
    vdiags = validate(program)
    if vdiags:
        raise LoadError(vdiags)
    return program


def make_theta(program: Program, options: Options = None) -> ApproxMap:
    options = options or Options()
    theta, diags = build_theta(program.signature, program.annotations,
                               program.mode, program.approx_types,
                               derive_ctors=options.derive_ctors)
    if diags:
        raise LoadError(diags)
    return theta


@dataclass
class VcOutcome:
    status: str
    states: int = 0
    detail: str = ""


def prove_vc(vc: VerificationCondition,
             options: Options = None) -> VcOutcome:
    """Dispatch one verification condition to its decision procedure."""
    options = options or Options()
    cls = classify_vc(vc)
    if cls is Classification.TRIVIAL:
        return VcOutcome(STATUS_TRIVIAL)
    if cls is Classification.MULTISET:
        return _prove_multiset(vc, options)
    if cls is Classification.SET:
        return _prove_set(vc, options)
    if cls is Classification.DLIST:
        status = seqapprox.discharge_dlist_vc(vc)
        return VcOutcome(STATUS_PROVED if status == seqapprox.PROVED
                         else STATUS_UNKNOWN)
    raise ValueError(f"unhandled classification {cls}")


def _prove_multiset(vc: VerificationCondition, options: Options) -> VcOutcome:
    rules = mset_prover.compile_hypotheses(vc.hypotheses)
    seq = mset_prover.MsSequent(tuple(rules), vc.goal.lhs, vc.goal.rhs,
                                vc.goal.relation)
    res = mset_prover.prove_mset(seq, max_states=options.max_states)
    detail = res.render_trace() if res.status == mset_prover.PROVED else ""
    return VcOutcome(_status(res.status), res.states_explored, detail)


def _prove_set(vc: VerificationCondition, options: Options) -> VcOutcome:
    clauses = set_prover.compile_set_hypotheses(vc.hypotheses)
    goals = []
    if vc.goal.relation == SETEQ:
        goals.append(set_prover.SetSequent(tuple(clauses), vc.goal.lhs, vc.goal.rhs))
        goals.append(set_prover.SetSequent(tuple(clauses), vc.goal.rhs, vc.goal.lhs))
    elif vc.goal.relation == SETINCL:
        goals.append(set_prover.SetSequent(tuple(clauses), vc.goal.lhs, vc.goal.rhs))
    else:
        raise ValueError(f"not a set goal: {vc.goal.relation}")
    transitions = 0
    details = []
    for seq in goals:
        res = set_prover.prove_set(seq)
        transitions += res.transitions
        details.append(res.render_derivation(seq))
        if res.status == set_prover.REFUTED:
            return VcOutcome(STATUS_REFUTED, transitions, details[-1])
    return VcOutcome(STATUS_PROVED, transitions, "\n---\n".join(details))


def _status(s: str) -> str:
    return {mset_prover.PROVED: STATUS_PROVED,
            mset_prover.REFUTED: STATUS_REFUTED,
            mset_prover.UNKNOWN: STATUS_UNKNOWN}[s]


def analyze_program(program: Program, options: Options = None) -> AnalysisReport:
    """Run the full analysis over every clause of a validated program."""
    options = options or Options()
    theta = make_theta(program, options)
    vcs = program_vcs(program, theta)

    def run(vc: VerificationCondition) -> ClauseEntry:
        t0 = time.perf_counter()
        outcome = prove_vc(vc, options)
        micros = int((time.perf_counter() - t0) * 1e6)
        return ClauseEntry(
            clause_id=vc.clause_id, line=vc.line, col=vc.col, source=vc.source,
            vc=vc.render(), classification=classify_vc(vc).value,
            status=outcome.status, states=outcome.states, micros=micros,
            detail=outcome.detail)

    if options.jobs > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            entries = list(pool.map(run, vcs))
    else:
        entries = [run(vc) for vc in vcs]
    entries.sort(key=lambda e: e.clause_id)
    return AnalysisReport(mode=program.mode, entries=entries)
