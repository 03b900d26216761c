"""Total decision procedure for set statements.

Set judgments compile to one-directional clauses between sets of atoms.  An
atom of the goal's left side is provable when it already sits in the goal's
right side, or when some clause mentions it on the left and every atom of
that clause's right side is provable.  That reading is a least fixpoint over
a finite alphabet, so the procedure always terminates and cycles count as
failure.

`prove_set` computes the fixpoint by counter-based worklist propagation and
records a justification for every proved atom; `set_fixpoint_oracle` is an
independent naive iteration of the same operator over the full atom lattice,
used to cross-check it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .approx import SETEQ, SETINCL, JudgmentInstance
from .kernel import SetExpr, atom_key, render

PROVED = "proved"
REFUTED = "refuted"


@dataclass(frozen=True)
class SetClause:
    lhs_atoms: frozenset
    rhs_atoms: frozenset
    origin: int


@dataclass(frozen=True)
class SetSequent:
    clauses: tuple
    start: SetExpr
    target: SetExpr


@dataclass(frozen=True)
class RefutationEvidence:
    """The unprovable start atoms and every atom their failure depends on."""

    unproved_start: tuple
    explored: tuple

    def render(self) -> str:
        bad = ", ".join(render(a) for a in self.unproved_start)
        dep = ", ".join(render(a) for a in self.explored)
        return f"unprovable: {bad} (dependency set: {dep})"


@dataclass
class SetProofResult:
    status: str
    justification: Optional[dict]   # proved atom -> "target" | ("clause", origin)
    evidence: Optional[RefutationEvidence]
    transitions: int

    def render_derivation(self, seq: SetSequent) -> str:
        if self.status != PROVED:
            return self.evidence.render()
        lines = []
        shown = set()

        def show(atom, depth):
            pad = "  " * depth
            just = self.justification[atom]
            if atom in shown:
                lines.append(f"{pad}{render(atom)} (shown above)")
                return
            shown.add(atom)
            if just == "target":
                lines.append(f"{pad}{render(atom)}: in goal right side")
                return
            _, origin = just
            clause = next(c for c in seq.clauses
                          if c.origin == origin and atom in c.lhs_atoms)
            rhs = sorted(clause.rhs_atoms, key=atom_key)
            lines.append(f"{pad}{render(atom)}: by hypothesis {origin}")
            for b in rhs:
                show(b, depth + 1)

        for a in sorted(seq.start.atoms, key=atom_key):
            show(a, 0)
        if not seq.start.atoms:
            lines.append("(empty left side: nothing to prove)")
        return "\n".join(lines)


def compile_set_hypotheses(hyps: Iterable[JudgmentInstance]) -> list:
    """Inclusions give one clause, equalities one in each direction."""
    clauses = []
    for i, h in enumerate(hyps):
        lhs = frozenset(h.lhs.atoms)
        rhs = frozenset(h.rhs.atoms)
        if h.relation == SETEQ:
            clauses.append(SetClause(lhs, rhs, origin=i))
            clauses.append(SetClause(rhs, lhs, origin=i))
        elif h.relation == SETINCL:
            clauses.append(SetClause(lhs, rhs, origin=i))
        else:
            raise ValueError(f"hypothesis {i} is not a set judgment")
    return clauses


def prove_set(seq: SetSequent) -> SetProofResult:
    """Worklist least fixpoint; always terminates."""
    alphabet = set(seq.start.atoms) | set(seq.target.atoms)
    for c in seq.clauses:
        alphabet |= c.lhs_atoms | c.rhs_atoms

    justification: dict = {}
    pending = deque()
    transitions = 0

    def prove(atom, why):
        nonlocal transitions
        if atom in justification:
            return
        justification[atom] = why
        transitions += 1
        assert transitions <= 3 * max(1, len(alphabet)), "fixpoint ran away"
        pending.append(atom)

    watch: dict = {}
    remaining = []
    for idx, c in enumerate(seq.clauses):
        remaining.append(len(c.rhs_atoms))
        for b in c.rhs_atoms:
            watch.setdefault(b, []).append(idx)

    for a in seq.target.atoms:
        prove(a, "target")
    for idx, c in enumerate(seq.clauses):
        if remaining[idx] == 0:
            for a in c.lhs_atoms:
                prove(a, ("clause", c.origin))

    while pending:
        atom = pending.popleft()
        for idx in watch.get(atom, ()):
            remaining[idx] -= 1
            if remaining[idx] == 0:
                for a in seq.clauses[idx].lhs_atoms:
                    prove(a, ("clause", seq.clauses[idx].origin))

    unproved = [a for a in seq.start.atoms if a not in justification]
    if not unproved:
        return SetProofResult(PROVED, justification, None, transitions)

    # Dependency set of the failure: everything reachable from the unproved
    # start atoms through clauses, restricted to unproved atoms.
    explored = set()
    stack = list(unproved)
    while stack:
        a = stack.pop()
        if a in explored:
            continue
        explored.add(a)
        for c in seq.clauses:
            if a in c.lhs_atoms:
                for b in c.rhs_atoms:
                    if b not in justification and b not in explored:
                        stack.append(b)
    evidence = RefutationEvidence(
        tuple(sorted(unproved, key=atom_key)),
        tuple(sorted(explored, key=atom_key)))
    return SetProofResult(REFUTED, None, evidence, transitions)


def set_fixpoint_oracle(seq: SetSequent) -> str:
    """Naive Kleene iteration of the provability operator from the empty set."""
    target = set(seq.target.atoms)
    proved: set = set()
    while True:
        new = set(target)
        for c in seq.clauses:
            if c.rhs_atoms <= proved:
                new |= c.lhs_atoms
        if new == proved:
            break
        proved = new
    return PROVED if set(seq.start.atoms) <= proved else REFUTED
