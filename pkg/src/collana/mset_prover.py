"""Bounded-exhaustive decision procedure for multiset statements.

A multiset statement is proved by backchaining: hypotheses become rewrite
rules over multisets of atoms, and the goal holds when the right-hand
multiset of the goal judgment can be rewritten back to its left-hand
multiset.  The search runs backward from the goal's right side; an
independent forward breadth-first closure serves as a cross-checking oracle.

Inclusion hypotheses carry an existential remainder.  Each such hypothesis
is given one reserved slack atom standing for that remainder, so its rule
reads "left side plus slack rewrites to right side".  The slack atom of an
inclusion hypothesis can never be cancelled, which is what makes statements
like equality-from-two-inclusions refutable rather than merely unprovable.
For an inclusion goal the remainder is delayed: the search succeeds as soon
as the current state covers the goal's left side, the surplus being the
goal's own remainder.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .approx import MSEQ, MSINCL, JudgmentInstance
from .kernel import MsExpr, atom_key

PROVED = "proved"
REFUTED = "refuted"
UNKNOWN = "unknown"

DEFAULT_MAX_STATES = 100_000


@dataclass(frozen=True)
class SlackAtom:
    """Reserved atom standing for an inclusion hypothesis' remainder."""

    index: int

    def sort_key(self):
        return ("slack", self.index)

    def __repr__(self):
        return f"q{self.index}"


@dataclass(frozen=True)
class MsRewriteRule:
    lhs: MsExpr
    rhs: MsExpr
    slack: bool
    origin: int


@dataclass(frozen=True)
class MsSequent:
    rules: tuple
    start: MsExpr
    target: MsExpr
    goal_relation: str  # MSEQ | MSINCL


@dataclass(frozen=True)
class TraceStep:
    origin: int
    before: MsExpr
    after: MsExpr


@dataclass
class MsProofResult:
    status: str
    trace: Optional[tuple]
    states_explored: int
    bound: int

    def render_trace(self) -> str:
        if not self.trace:
            return "(no rewriting needed)"
        lines = []
        for step in self.trace:
            lines.append(f"[hyp {step.origin}] {step.before.render()}"
                         f"  ~>  {step.after.render()}")
        return "\n".join(lines)


def compile_hypotheses(hyps: Iterable[JudgmentInstance]) -> list:
    """Equalities yield a rule in each direction, inclusions one slack rule."""
    rules = []
    for i, h in enumerate(hyps):
        if h.relation == MSEQ:
            rules.append(MsRewriteRule(h.lhs, h.rhs, slack=False, origin=i))
            rules.append(MsRewriteRule(h.rhs, h.lhs, slack=False, origin=i))
        elif h.relation == MSINCL:
            rules.append(MsRewriteRule(h.lhs, h.rhs, slack=True, origin=i))
        else:
            raise ValueError(f"hypothesis {i} is not a multiset judgment")
    return rules


def elaborate_rules(rules: Iterable[MsRewriteRule]) -> list:
    """Materialise slack remainders as explicit atoms; result rules are plain."""
    out = []
    for r in rules:
        if r.slack:
            lhs = MsExpr.of((*r.lhs.atoms, SlackAtom(r.origin)))
            out.append(MsRewriteRule(lhs, r.rhs, slack=False, origin=r.origin))
        else:
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# Count-vector machinery
# ---------------------------------------------------------------------------

def _alphabet(rules, *exprs) -> list:
    atoms = set()
    for r in rules:
        atoms.update(r.lhs.atoms)
        atoms.update(r.rhs.atoms)
    for e in exprs:
        atoms.update(e.atoms)
    return sorted(atoms, key=atom_key)


def _vec(expr: MsExpr, index: dict) -> tuple:
    v = [0] * len(index)
    for a in expr.atoms:
        v[index[a]] += 1
    return tuple(v)


def _unvec(v: tuple, alphabet: list) -> MsExpr:
    atoms = []
    for count, a in zip(v, alphabet):
        atoms.extend([a] * count)
    return MsExpr.of(atoms)


def _covers(v: tuple, w: tuple) -> bool:
    return all(x >= y for x, y in zip(v, w))


# ---------------------------------------------------------------------------
# Backward proof search
# ---------------------------------------------------------------------------

def _outside_rule_span(moves, start: tuple, target: tuple) -> bool:
    """Refutation by conservation: every backchaining step shifts the state
    by some rule's (left − right) vector, so start is reachable from target
    only if start − target is a rational combination of those vectors."""
    deltas = []
    for lhs_v, rhs_v, _ in moves:
        deltas.append(tuple(Fraction(l - r) for l, r in zip(lhs_v, rhs_v)))
    diff = [Fraction(s - t) for s, t in zip(start, target)]
    basis: list = []
    for row in deltas:
        row = list(row)
        for pivot_i, pivot_row in basis:
            if row[pivot_i]:
                f = row[pivot_i] / pivot_row[pivot_i]
                row = [a - f * b for a, b in zip(row, pivot_row)]
        for i, v in enumerate(row):
            if v:
                basis.append((i, row))
                break
    for pivot_i, pivot_row in basis:
        if diff[pivot_i]:
            f = diff[pivot_i] / pivot_row[pivot_i]
            diff = [a - f * b for a, b in zip(diff, pivot_row)]
    return any(diff)


def _prove_cover(moves, target: tuple, start: tuple, cap: int):
    """Decide whether backchaining from target can cover start.

    Works on minimal pre-images of the upward closure of start: an element
    (w, rule, parent) says that any state over w rewrites through that rule
    into a state over the parent.  The basis stays a finite antichain, so
    iteration terminates; the chain of parents yields a concrete trace.
    Returns (proved?, trace-steps-as-(origin, before, after), explored) or
    None when the safety cap is exceeded.
    """
    n = len(start)
    entries = [(start, None, None)]
    alive = {0}
    frontier = deque([0])
    processed = 0
    while frontier:
        u_idx = frontier.popleft()
        if u_idx not in alive:
            continue
        processed += 1
        u = entries[u_idx][0]
        for t_idx, (lhs_v, rhs_v, _) in enumerate(moves):
            w = tuple(max(u[i] - lhs_v[i], 0) + rhs_v[i] for i in range(n))
            if any(_leq(entries[j][0], w) for j in alive):
                continue  # already covered by a smaller basis element
            for j in list(alive):
                if _leq(w, entries[j][0]):
                    alive.discard(j)
            entries.append((w, t_idx, u_idx))
            if len(entries) > cap:
                return None
            alive.add(len(entries) - 1)
            frontier.append(len(entries) - 1)

    witness = None
    for j, (w, _, _) in enumerate(entries):
        if _leq(w, target):
            witness = j
            break
    if witness is None:
        return (False, None, processed)
    steps = []
    cur = target
    j = witness
    while entries[j][1] is not None:
        w, t_idx, parent = entries[j]
        lhs_v, rhs_v, origin = moves[t_idx]
        nxt = tuple(c - r + l for c, r, l in zip(cur, rhs_v, lhs_v))
        steps.append((origin, cur, nxt))
        cur = nxt
        j = parent
    return (True, steps, processed)


def _leq(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def prove_mset(seq: MsSequent, max_states: int = DEFAULT_MAX_STATES) -> MsProofResult:
    """Backward search from the target multiset toward the start multiset.

    Each step picks a rule whose right side is embedded in the current state
    and replaces that embedding by the rule's left side.  Equality goals
    require reaching the start exactly; inclusion goals only require covering
    it, the surplus being the delayed goal remainder.  Returns Refuted only
    when the backward state space was exhausted (or provably separated)
    under the bound.
    """
    rules = elaborate_rules(seq.rules)
    alphabet = _alphabet(rules, seq.start, seq.target)
    index = {a: i for i, a in enumerate(alphabet)}
    start = _vec(seq.start, index)
    target = _vec(seq.target, index)
    moves = [(_vec(r.lhs, index), _vec(r.rhs, index), r.origin) for r in rules]

    exact = seq.goal_relation == MSEQ
    if seq.goal_relation not in (MSEQ, MSINCL):
        raise ValueError(f"bad goal relation {seq.goal_relation}")

    if exact and _outside_rule_span(moves, start, target):
        return MsProofResult(REFUTED, None, 0, max_states)

    if not exact:
        outcome = _prove_cover(moves, target, start, max_states)
        if outcome is None:
            return MsProofResult(UNKNOWN, None, max_states, max_states)
        proved, raw_steps, processed = outcome
        if not proved:
            return MsProofResult(REFUTED, None, processed, max_states)
        steps = tuple(TraceStep(origin, _unvec(b, alphabet), _unvec(a, alphabet))
                      for origin, b, a in raw_steps)
        return MsProofResult(PROVED, steps, processed, max_states)

    # Sound pruning for exact goals: an atom produced by no rule's right side
    # can never be removed going backward, so its count must never exceed the
    # start count.  (Slack atoms are the common case.)
    sink = [True] * len(alphabet)
    for _, rhs_v, _ in moves:
        for i, c in enumerate(rhs_v):
            if c:
                sink[i] = False
    shrinking = any(sum(l) < sum(r) for l, r, _ in moves)
    start_size = sum(start)

    def prune(state: tuple) -> bool:
        if not exact:
            return False
        if any(sink[i] and state[i] > start[i] for i in range(len(state))):
            return True
        if not shrinking and sum(state) > start_size:
            return True
        return False

    def done(state: tuple) -> bool:
        return state == start if exact else _covers(state, start)

    parents = {target: None}
    queue = deque([target])
    explored = 0
    truncated = False
    goal_state = None

    if prune(target) and not done(target):
        return MsProofResult(REFUTED, None, 0, max_states)

    while queue:
        state = queue.popleft()
        explored += 1
        if done(state):
            goal_state = state
            break
        for lhs_v, rhs_v, origin in moves:
            if not _covers(state, rhs_v):
                continue
            nxt = tuple(s - r + l for s, r, l in zip(state, rhs_v, lhs_v))
            if nxt in parents or prune(nxt):
                continue
            if len(parents) >= max_states:
                truncated = True
                continue
            parents[nxt] = (state, origin)
            queue.append(nxt)

    if goal_state is None:
        status = UNKNOWN if truncated else REFUTED
        return MsProofResult(status, None, explored, max_states)

    steps = []
    cur = goal_state
    while parents[cur] is not None:
        prev, origin = parents[cur]
        steps.append(TraceStep(origin, _unvec(prev, alphabet),
                               _unvec(cur, alphabet)))
        cur = prev
    steps.reverse()
    return MsProofResult(PROVED, tuple(steps), explored, max_states)


def replay_trace(seq: MsSequent, trace: tuple) -> bool:
    """Independent check that a proof trace rewrites target back to start."""
    by_origin = {}
    for r in elaborate_rules(seq.rules):
        by_origin.setdefault(r.origin, []).append(r)
    cur = seq.target.counter()
    for step in trace:
        if step.before.counter() != cur:
            return False
        applied = False
        for r in by_origin.get(step.origin, []):
            rhs = r.rhs.counter()
            if all(cur[a] >= n for a, n in rhs.items()):
                nxt = cur - rhs + r.lhs.counter()
                if nxt == step.after.counter():
                    cur = nxt
                    applied = True
                    break
        if not applied:
            return False
    if seq.goal_relation == MSEQ:
        return cur == seq.start.counter()
    return all(cur[a] >= n for a, n in seq.start.counter().items())


# ---------------------------------------------------------------------------
# Forward oracle
# ---------------------------------------------------------------------------

def reachability_oracle(rules: Iterable[MsRewriteRule], from_: MsExpr,
                        to: MsExpr, relation: str,
                        bound: int = DEFAULT_MAX_STATES) -> str:
    """Forward breadth-first closure from `from_`, rules applied left-to-right.

    Equality asks whether `to` is reached exactly; inclusion whether some
    reachable state covers `to`.  Slack rules consume their reserved slack
    atom along with their left side.
    """
    plain = elaborate_rules(rules)
    alphabet = _alphabet(plain, from_, to)
    index = {a: i for i, a in enumerate(alphabet)}
    src = _vec(from_, index)
    dst = _vec(to, index)
    moves = [(_vec(r.lhs, index), _vec(r.rhs, index)) for r in plain]

    if relation == MSEQ:
        def done(v):
            return v == dst
    elif relation == MSINCL:
        def done(v):
            return _covers(v, dst)
    else:
        raise ValueError(f"bad relation {relation}")

    visited = {src}
    queue = deque([src])
    truncated = False
    while queue:
        state = queue.popleft()
        if done(state):
            return PROVED
        for lhs_v, rhs_v in moves:
            if not _covers(state, lhs_v):
                continue
            nxt = tuple(s - l + r for s, l, r in zip(state, lhs_v, rhs_v))
            if nxt in visited:
                continue
            if len(visited) >= bound:
                truncated = True
                continue
            visited.add(nxt)
            queue.append(nxt)
    return UNKNOWN if truncated else REFUTED


def cross_check(seq: MsSequent, bound: int = DEFAULT_MAX_STATES) -> str:
    """Run the forward oracle on the reachability question `seq` poses.

    Equality goals are the forward question from start to target.  Inclusion
    goals existentially pad the start side, which only the target end of the
    search can see, so they are checked on the reversed rule system instead.
    """
    if seq.goal_relation == MSEQ:
        return reachability_oracle(seq.rules, seq.start, seq.target, MSEQ, bound)
    reversed_rules = [MsRewriteRule(r.rhs, r.lhs, slack=False, origin=r.origin)
                      for r in elaborate_rules(seq.rules)]
    return reachability_oracle(reversed_rules, seq.target, seq.start, MSINCL, bound)
