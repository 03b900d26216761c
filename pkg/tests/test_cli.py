import json

import jsonschema

from collana.cli import main
from collana.report import JSON_SCHEMA

from conftest import DATA, read_data


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestAnalyze:
    def test_all_proved_exit_zero(self, capsys):
        code, out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                           DATA / "sorting_mset.ca")
        assert code == 0
        assert "7 proved, 0 refuted, 0 unknown" in out

    def test_set_mode(self, capsys):
        code, out, _ = run(capsys, "analyze", DATA / "dedup_split.hc",
                           DATA / "dedup_split_set.ca")
        assert code == 0
        assert "4 proved" in out

    def test_dlist_mode(self, capsys):
        code, out, _ = run(capsys, "analyze", DATA / "traverse.hc",
                           DATA / "traverse_dlist.ca")
        assert code == 0
        assert "3 proved" in out

    def test_mutant_fails_with_exit_one(self, tmp_path, capsys):
        text = read_data("sorting.hc").replace(
            "append(cons(X, L), K, cons(X, M))", "append(cons(X, L), K, M)")
        mutant = tmp_path / "mutant.hc"
        mutant.write_text(text)
        code, out, _ = run(capsys, "analyze", mutant, DATA / "sorting_mset.ca")
        assert code == 1
        assert "REFUTED" in out

    def test_missing_file_exit_two(self, capsys):
        code, _, err = run(capsys, "analyze", DATA / "nosuch.hc",
                           DATA / "sorting_mset.ca")
        assert code == 2

    def test_syntax_error_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.hc"
        bad.write_text("append(nil")
        code, _, err = run(capsys, "analyze", bad, DATA / "sorting_mset.ca")
        assert code == 2
        assert "SyntaxError" in err

    def test_json_report_validates_and_matches_text(self, capsys):
        code, out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                           DATA / "sorting_mset.ca", "--report", "json")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, JSON_SCHEMA)
        assert doc["summary"] == {"total": 7, "proved": 7, "refuted": 0,
                                  "unknown": 0}
        assert all(c["status"] == "proved" for c in doc["clauses"])

    def test_text_and_json_statuses_match(self, tmp_path, capsys):
        text = read_data("sorting.hc").replace(
            "append(nil, K, K).", "append(nil, K, nil).")
        mutant = tmp_path / "m.hc"
        mutant.write_text(text)
        _, text_out, _ = run(capsys, "analyze", mutant,
                             DATA / "sorting_mset.ca")
        _, json_out, _ = run(capsys, "analyze", mutant,
                             DATA / "sorting_mset.ca", "--report", "json")
        doc = json.loads(json_out)
        for entry in doc["clauses"]:
            tag = f"clause {entry['id']} @ "
            line = next(l for l in text_out.splitlines() if tag in l)
            assert f"[{entry['status'].upper()}]" in line

    def test_json_idempotent_modulo_micros(self, capsys):
        def snapshot():
            _, out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                            DATA / "sorting_mset.ca", "--report", "json")
            doc = json.loads(out)
            for c in doc["clauses"]:
                c["micros"] = 0
            return json.dumps(doc, sort_keys=True)

        assert snapshot() == snapshot()

    def test_jobs_give_same_report(self, capsys):
        _, seq_out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                            DATA / "sorting_mset.ca")
        _, par_out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                            DATA / "sorting_mset.ca", "--jobs", "4")
        assert seq_out == par_out

    def test_mode_override_conflicts_are_reported(self, capsys):
        # multiset annotations forced into set mode still parse and prove:
        # eq/incl relations exist in both modes
        code, out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                           DATA / "sorting_mset.ca", "--mode", "set")
        assert code == 0
        assert "set mode" in out

    def test_unsupported_relation_is_a_diagnostic_not_a_crash(self, tmp_path,
                                                              capsys):
        ca = tmp_path / "bad_rel.ca"
        ca.write_text("approx btree as dlist.\napprox list as dlist.\n"
                      "pred traverse(T, L): T <= L.\n")
        code, _, err = run(capsys, "analyze", DATA / "traverse.hc", ca)
        assert code == 2
        assert "not supported in dlist mode" in err

    def test_trace_includes_rewrites(self, capsys):
        code, out, _ = run(capsys, "analyze", DATA / "sorting.hc",
                           DATA / "sorting_mset.ca", "--trace")
        assert code == 0
        assert "~>" in out

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        code, _, _ = run(capsys, "analyze", DATA / "sorting.hc",
                         DATA / "sorting_mset.ca", "--report", "json",
                         "--out", target)
        assert code == 0
        jsonschema.validate(json.loads(target.read_text()), JSON_SCHEMA)


class TestProve:
    def test_refuted_sequent(self, capsys):
        code, out, _ = run(capsys, "prove", DATA / "incompleteness.llq")
        assert code == 1
        assert "REFUTED" in out

    def test_proved_sequent_with_trace(self, capsys):
        code, out, _ = run(capsys, "prove", DATA / "sort_last_vc.llq",
                           "--trace")
        assert code == 0
        assert "PROVED" in out
        assert out.count("~>") == 4

    def test_empty_goal(self, tmp_path, capsys):
        f = tmp_path / "empty.llq"
        f.write_text("mode multiset.\ngoal: {} = {}.\n")
        code, out, _ = run(capsys, "prove", f)
        assert code == 0

    def test_set_mode_sequent(self, tmp_path, capsys):
        f = tmp_path / "set.llq"
        f.write_text("mode set.\nhyp: x <= y.\ngoal: x + x <= y.\n")
        code, out, _ = run(capsys, "prove", f)
        assert code == 0

    def test_parse_error_exit_two(self, tmp_path, capsys):
        f = tmp_path / "bad.llq"
        f.write_text("mode multiset.\ngoal: x =\n")
        code, _, err = run(capsys, "prove", f)
        assert code == 2

    def test_missing_goal_exit_two(self, tmp_path, capsys):
        f = tmp_path / "nogoal.llq"
        f.write_text("mode multiset.\nhyp: x = y.\n")
        code, _, err = run(capsys, "prove", f)
        assert code == 2
        assert "MissingGoal" in err


class TestOracle:
    def test_sorting_passes(self, capsys):
        code, out, _ = run(capsys, "oracle", DATA / "sorting.hc",
                           DATA / "sorting_mset.ca", "--trials", "25",
                           "--seed", "42")
        assert code == 0
        assert "failed=0" in out

    def test_mutant_found(self, tmp_path, capsys):
        text = read_data("sorting.hc").replace(
            "append(cons(X, L), K, cons(X, M))", "append(cons(X, L), K, M)")
        mutant = tmp_path / "mutant.hc"
        mutant.write_text(text)
        code, out, _ = run(capsys, "oracle", mutant, DATA / "sorting_mset.ca",
                           "--trials", "40", "--seed", "42")
        assert code == 1
        assert "counterexample" in out

    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "oracle", DATA / "sorting.hc",
                           DATA / "sorting_mset.ca", "--trials", "10",
                           "--seed", "1", "--report", "json")
        assert code == 0
        doc = json.loads(out)
        assert {p["predicate"] for p in doc["predicates"]} == \
            {"append", "split", "sort"}

    def test_ungeneratable_inputs_exit_two(self, tmp_path, capsys):
        # a collection type without a base constructor cannot be sampled
        hc = tmp_path / "stream.hc"
        hc.write_text(":- kind stream type.\n"
                      ":- type scons int -> stream -> stream.\n"
                      ":- type same stream -> stream -> o.\n"
                      "same(X, X).\n")
        ca = tmp_path / "stream.ca"
        ca.write_text("approx stream as multiset.\n"
                      "pred same(X, Y): X = Y.\n")
        code, _, err = run(capsys, "oracle", hc, ca, "--trials", "3")
        assert code == 2
        assert "Unsupported" in err
