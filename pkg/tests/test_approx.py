import random

import pytest

from collana import kernel as K
from collana.approx import (
    Classification, JudgmentInstance, MSEQ, SETINCL, apply_theta,
    build_theta, classify_vc, derive_constructor_map, program_vcs,
)
from collana.driver import make_theta
from collana.frontend import parse_program
from collana.kernel import (
    BOT, Compound, Item, MsExpr, Par, PropVar, Var, render,
)


@pytest.fixture(scope="module")
def sorting_theta(sorting_program):
    return make_theta(sorting_program)


@pytest.fixture(scope="module")
def dedup_theta(dedup_program):
    return make_theta(dedup_program)


class TestBuildTheta:
    def test_sort_maps_to_equivalence(self, sorting_theta):
        tpl = sorting_theta.predicate_template("sort")
        assert render(tpl.body) == "X ○–○ Y"

    def test_split_swaps_sides(self, sorting_theta):
        tpl = sorting_theta.predicate_template("split")
        assert render(tpl.body) == "(S ⅋ B) ○–○ L"

    def test_trivial_predicates_map_to_one(self, sorting_theta):
        assert sorting_theta.predicate_template("leq").body == K.ONE
        assert sorting_theta.predicate_template("gr").body == K.ONE

    def test_list_constructors_multiset(self, sorting_theta):
        assert sorting_theta.ctor_map["nil"].body == BOT
        cons = sorting_theta.ctor_map["cons"]
        assert K.beta_apply(cons, [Compound("1"), BOT]) == \
            Par(Item(Compound("1")), BOT)

    def test_set_mode_split_template(self, dedup_theta):
        tpl = dedup_theta.predicate_template("split")
        assert render(tpl.body) == "?L ⊸ ?(⟨P⟩ ⊕ S ⊕ B)"

    def test_set_mode_constructors(self, dedup_theta):
        assert dedup_theta.ctor_map["nil"].body == K.ZERO
        out = K.beta_apply(dedup_theta.ctor_map["cons"],
                           [Compound("1"), K.ZERO])
        assert out == K.Oplus(Item(Compound("1")), K.ZERO)


BTREE_MONO = """
:- kind btree type.
:- type emp btree.
:- type bt int -> btree -> btree -> btree.
"""

BTREE_POLY = """
:- kind btree type -> type.
:- type emp btree A.
:- type bt A -> btree A -> btree A -> btree A.
"""


class TestDeriveConstructorMap:
    @pytest.mark.parametrize("decls", [BTREE_MONO, BTREE_POLY])
    def test_btree_multiset(self, decls):
        prog, diags = parse_program(decls)
        assert not diags
        ctor_map, d = derive_constructor_map(
            "btree", prog.signature, "multiset", frozenset({"btree"}))
        assert not d
        assert ctor_map["emp"].body == BOT
        body = K.beta_apply(ctor_map["bt"],
                            [Compound("7"), PropVar("Y"), PropVar("Z")])
        assert body == Par(Item(Compound("7")), Par(PropVar("Y"), PropVar("Z")))

    def test_btree_set(self):
        prog, _ = parse_program(BTREE_MONO)
        ctor_map, _ = derive_constructor_map(
            "btree", prog.signature, "set", frozenset({"btree"}))
        assert ctor_map["emp"].body == K.ZERO
        body = K.beta_apply(ctor_map["bt"],
                            [Compound("7"), PropVar("Y"), PropVar("Z")])
        assert body == K.Oplus(Item(Compound("7")),
                               K.Oplus(PropVar("Y"), PropVar("Z")))

    def test_enum_type_all_nullary(self):
        prog, _ = parse_program(
            ":- kind color type.\n:- type red color.\n:- type blue color.\n")
        ctor_map, d = derive_constructor_map(
            "color", prog.signature, "multiset", frozenset({"color"}))
        assert not d
        assert ctor_map["red"].body == BOT
        assert ctor_map["blue"].body == BOT

    def test_foreign_collection_nesting_rejected(self):
        prog, _ = parse_program(
            ":- kind list type.\n:- kind tree type.\n"
            ":- type node list -> tree -> tree.\n")
        _, d = derive_constructor_map(
            "tree", prog.signature, "multiset", frozenset({"tree", "list"}))
        assert any(x.code == "UnsupportedNesting" for x in d)

    def test_dlist_cons_matches_sequential_reading(self):
        prog, _ = parse_program(
            ":- kind list type.\n:- type nil list.\n"
            ":- type cons int -> list -> list.\n")
        ctor_map, _ = derive_constructor_map(
            "list", prog.signature, "dlist", frozenset({"list"}))
        # nil: λLλl. L l
        nil_val = ctor_map["nil"].body
        assert render(nil_val) == "λL λl. L l"
        # cons applied to an item and nil gives λLλl. ⟨x⟩ ∘– (l ∘– (L l)),
        # written with ⊸: (L l ⊸ l) ⊸ ⟨x⟩
        one = K.beta_apply(ctor_map["cons"], [Compound("9"), nil_val])
        applied = K.beta_normalize(K.App(one, (PropVar("W"), PropVar("w"))))
        assert render(applied) == "(W w ⊸ w) ⊸ ⟨9⟩"

    def test_dlist_binary_node_reads_in_order(self):
        prog, _ = parse_program(BTREE_MONO)
        ctor_map, _ = derive_constructor_map(
            "btree", prog.signature, "dlist", frozenset({"btree"}))
        leaf = ctor_map["emp"].body
        tree = K.beta_apply(ctor_map["bt"], [Compound("5"), leaf, leaf])
        applied = K.beta_normalize(K.App(tree, (PropVar("W"), PropVar("w"))))
        assert render(applied) == "(W w ⊸ w) ⊸ ⟨5⟩"
        # a node whose left subtree holds 3 yields the sequence 3, 5: the
        # 3-step is the outermost implication, the 5-step sits inside it
        inner = K.beta_apply(ctor_map["bt"], [Compound("3"), leaf, leaf])
        outer = K.beta_apply(ctor_map["bt"], [Compound("5"), inner, leaf])
        seq = K.beta_normalize(K.App(outer, (PropVar("W"), PropVar("w"))))
        assert isinstance(seq, K.Limp) and seq.consequent == Item(Compound("3"))
        s = render(seq)
        assert s.index("⟨3⟩") > s.index("⟨5⟩")


class TestApplyTheta:
    def test_append_nil_goal(self, sorting_program, sorting_theta):
        vc = apply_theta(sorting_program.clauses[0], sorting_theta, 0)
        assert vc.hypotheses == ()
        assert vc.goal.relation == MSEQ
        # raw sides keep the substitution's shape: (⊥ ⅋ K) ○–○ K
        assert vc.goal.raw_lhs == Par(BOT, PropVar("K"))
        assert vc.goal.raw_rhs == PropVar("K")
        assert vc.goal.lhs == MsExpr.of([PropVar("K")])
        assert vc.goal.rhs == MsExpr.of([PropVar("K")])
        assert vc.prop_vars == ("K",)
        assert vc.eigen_vars == ()

    def test_recursive_sort_clause(self, sorting_program, sorting_theta):
        vc = apply_theta(sorting_program.clauses[6], sorting_theta, 6)
        assert vc.eigen_vars == ("F",)
        assert set(vc.prop_vars) == {"R", "S", "Sm", "B", "SS", "BS"}
        rels = [(h.lhs, h.rhs) for h in vc.hypotheses]
        f_item = Item(Compound("F"))
        assert rels == [
            (MsExpr.of([PropVar("Sm"), PropVar("B")]), MsExpr.of([PropVar("R")])),
            (MsExpr.of([PropVar("Sm")]), MsExpr.of([PropVar("SS")])),
            (MsExpr.of([PropVar("B")]), MsExpr.of([PropVar("BS")])),
            (MsExpr.of([PropVar("SS"), f_item, PropVar("BS")]),
             MsExpr.of([PropVar("S")])),
        ]
        assert vc.goal.lhs == MsExpr.of([f_item, PropVar("R")])
        assert vc.goal.rhs == MsExpr.of([PropVar("S")])

    def test_trivial_hypotheses_dropped(self, sorting_program, sorting_theta):
        vc = apply_theta(sorting_program.clauses[3], sorting_theta, 3)
        assert len(vc.hypotheses) == 1  # leq dropped, split kept

    def test_trivial_goal_is_trivial_statement(self, sorting_program,
                                               sorting_theta):
        prog, _ = parse_program(
            ":- kind list type.\n:- type nil list.\n"
            ":- type cons int -> list -> list.\n"
            ":- type leq int -> int -> o.\n"
            "leq(0, 1).\n")
        theta, _ = build_theta(prog.signature, sorting_program.annotations,
                               "multiset", frozenset({"list"}))
        vc = apply_theta(prog.clauses[0], theta, 0)
        assert vc.goal.is_trivial()
        assert classify_vc(vc) is Classification.TRIVIAL

    def test_missing_constructor_map_reported(self, sorting_program):
        from collana.frontend import Annotation, ArgRef
        _, diags = build_theta(
            sorting_program.signature, sorting_program.annotations,
            "multiset", frozenset({"list"}), derive_ctors=False)
        assert not diags  # nil and cons are builtin
        prog, _ = parse_program(
            ":- kind tree type.\n:- type leaf tree.\n"
            ":- type p tree -> o.\np(leaf).\n")
        ann = {"p": Annotation("p", 1, relation="eq", lhs=ArgRef(1),
                               rhs=ArgRef(1), param_names=("T",))}
        _, diags2 = build_theta(prog.signature, ann, "multiset",
                                frozenset({"tree"}), derive_ctors=False)
        assert any(d.code == "MissingConstructorMap" for d in diags2)

    def test_vcs_never_invent_items(self, sorting_program, sorting_theta,
                                    dedup_program, dedup_theta):
        for program, theta in ((sorting_program, sorting_theta),
                               (dedup_program, dedup_theta)):
            for clause, vc in zip(program.clauses, program_vcs(program, theta)):
                ground_subterms = set()
                for atom in (clause.head, *clause.body):
                    for t in atom.args:
                        _collect_subterms(t, ground_subterms)
                for j in (*vc.hypotheses, vc.goal):
                    if j.is_trivial():
                        continue
                    for side in (j.lhs, j.rhs):
                        for a in side.atoms:
                            if isinstance(a, Item):
                                assert _unfreeze(a.arg) in ground_subterms

    def test_ground_instantiation_commutes(self, sorting_program,
                                           sorting_theta):
        rng = random.Random(99)
        for _ in range(25):
            for clause in sorting_program.clauses:
                vc = apply_theta(clause, sorting_theta, 0)
                sigma = {v: Compound(str(rng.randint(0, 9)))
                         for v in vc.eigen_vars}
                inst_clause = _subst_clause(clause, sigma)
                vc2 = apply_theta(inst_clause, sorting_theta, 0)
                for j1, j2 in zip((*vc.hypotheses, vc.goal),
                                  (*vc2.hypotheses, vc2.goal)):
                    assert _subst_side(j1.lhs, sigma) == j2.lhs
                    assert _subst_side(j1.rhs, sigma) == j2.rhs

    def test_classify_dispatch(self, sorting_program, sorting_theta,
                               dedup_program, dedup_theta, traverse_program):
        for vc in program_vcs(sorting_program, sorting_theta):
            assert classify_vc(vc) is Classification.MULTISET
        for vc in program_vcs(dedup_program, dedup_theta):
            assert classify_vc(vc) is Classification.SET
        theta = make_theta(traverse_program)
        for vc in program_vcs(traverse_program, theta):
            assert classify_vc(vc) is Classification.DLIST

    def test_mixed_modes_rejected(self, sorting_program, sorting_theta):
        from collana.approx import MixedModes, VerificationCondition
        vc = apply_theta(sorting_program.clauses[6], sorting_theta, 6)
        bad = VerificationCondition(
            clause_id=0, line=0, col=0, source="", eigen_vars=(),
            prop_vars=(), hypotheses=(JudgmentInstance(
                SETINCL, K.SetExpr.of([]), K.SetExpr.of([])),),
            goal=vc.goal, mode="multiset")
        with pytest.raises(MixedModes):
            classify_vc(bad)


def _collect_subterms(t, acc):
    acc.add(t)
    if isinstance(t, Compound):
        for a in t.args:
            _collect_subterms(a, acc)


def _unfreeze(t):
    """Frozen eigen constants print like the variable they froze."""
    if isinstance(t, Compound) and not t.args and t.functor[:1].isupper():
        return Var(t.functor)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_unfreeze(a) for a in t.args))
    return t


def _subst_clause(clause, sigma):
    from collana.frontend import Atom, HornClause

    def go(t):
        if isinstance(t, Var):
            return sigma.get(t.name, t)
        return Compound(t.functor, tuple(go(a) for a in t.args))

    head = Atom(clause.head.pred, tuple(go(a) for a in clause.head.args))
    body = tuple(Atom(a.pred, tuple(go(x) for x in a.args))
                 for a in clause.body)
    vars_left = tuple(v for v in clause.vars if v not in sigma)
    return HornClause(vars_left, head, body, clause.line, clause.col)


def _subst_side(side, sigma):
    """Apply an eigen-variable instantiation to a normalised multiset side."""
    out = []
    for a in side.atoms:
        if isinstance(a, Item):
            out.append(Item(_subst_frozen(a.arg, sigma)))
        else:
            out.append(a)
    return MsExpr.of(out)


def _subst_frozen(t, sigma):
    if isinstance(t, Compound) and not t.args and t.functor in sigma:
        return sigma[t.functor]
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_subst_frozen(a, sigma) for a in t.args))
    return t
