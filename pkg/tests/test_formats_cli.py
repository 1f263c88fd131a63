import io
import json
import subprocess
import sys

import jsonschema
import pytest

from synchro.cli import run_command
from synchro.core import Automaton
from synchro.errors import InputError, ParseError
from synchro.families import c_b, carpi_family, cerny, random_automaton
from synchro.formats import (
    export_dot, fingerprint, parse_automaton, parse_state_set, serialize_automaton,
)
from synchro.verdicts import FAILS, HOLDS, VerdictReport, report_schema


def family_corpus():
    out = [cerny(n) for n in range(2, 12)]
    out += [carpi_family(m, k) for m in range(2, 7) for k in range(1, 4)]
    out += [random_automaton(n, s, seed) for n in (1, 5, 17) for s in (1, 2, 3)
            for seed in range(3)]
    return out


def cli(*argv):
    out = io.StringIO()
    code = run_command(list(argv), out)
    return code, out.getvalue()


def test_cerny_table_parses():
    text = "dfa 1\n4 2\n1 1\n2 1\n3 2\n0 3\n"
    assert parse_automaton(text) == cerny(4)
    assert serialize_automaton(cerny(4)) == text


def test_round_trip_is_canonical():
    for a in family_corpus():
        text = serialize_automaton(a)
        back = parse_automaton(text)
        assert back == a and back.names == a.names
        assert serialize_automaton(back) == text


def test_comments_and_spacing_normalize():
    text = "# Cerny C3\ndfa 1  # header\n3 2\n\n1 1\n2   1\n0 2 # last\n"
    assert serialize_automaton(parse_automaton(text)) == "dfa 1\n3 2\n1 1\n2 1\n0 2\n"


@pytest.mark.parametrize("text, line, message", [
    ("", 1, "empty"),
    ("dfa 2\n1 1\n0\n", 1, "header"),
    ("dfa 1\n2 2\n1 1\n0\n", 4, "incomplete row"),
    ("dfa 1\n2 2\n1 1\n0 2\n", 4, "out of range"),
    ("dfa 1\n2 2\n1 x\n0 0\n", 3, "not an integer"),
    ("dfa 1\n3 1\n0\n1\n", 5, "expected 3 transition rows"),
    ("dfa 1\n1 1\n0\nnames:\n0 p\n0 r\n", 6, "named twice"),
    ("dfa 1\n1 1\n0\nextra\n", 4, "unexpected"),
])
def test_parse_errors_carry_position(text, line, message):
    with pytest.raises(ParseError) as err:
        parse_automaton(text)
    assert err.value.line == line
    assert message in str(err.value)


def test_incomplete_row_column():
    with pytest.raises(ParseError) as err:
        parse_automaton("dfa 1\n2 3\n1 1 0\n0   1\n")
    assert (err.value.line, err.value.column) == (4, 5)


def test_fingerprint_is_stable():
    assert fingerprint(cerny(4)) == fingerprint(parse_automaton(serialize_automaton(cerny(4))))
    assert fingerprint(cerny(4)) != fingerprint(cerny(5))
    assert len(fingerprint(cerny(4))) == 16


def test_state_set_syntax():
    a = carpi_family(3, 1)
    assert parse_state_set(a, "q0..q3") == a.states(range(4))
    assert parse_state_set(a, "q0,s1") == c_b(a)
    assert parse_state_set(a, "Q") == a.all_states
    assert parse_state_set(a, "0, 2") == a.states([0, 2])
    assert len(parse_state_set(a, "")) == 0
    with pytest.raises(InputError):
        parse_state_set(a, "q9")
    with pytest.raises(InputError):
        parse_state_set(a, "q3..q1")


def test_dot_export():
    a = carpi_family(2, 1)
    dot = export_dot(a)
    assert dot.count("[label=\"q") + dot.count("[label=\"s") == 4
    assert '  1 -> 1 [label="b"];' in dot  # b fixes q1
    assert '  3 -> 2 [label="a"];' in dot
    assert export_dot(a) == dot
    lit = export_dot(a, c_b(a))
    assert lit.count("fillcolor") == 2
    assert '0 [label="q0", style=filled' in lit and '3 [label="s1", style=filled' in lit


def test_dot_merges_parallel_edges():
    a = Automaton(2, 2, [(1, 1), (0, 1)])
    assert '  0 -> 1 [label="a,b"];' in export_dot(a)


def test_report_validation_rules():
    subj = {"fingerprint": "0" * 16, "family": None, "states": 2, "letters": 1}
    with pytest.raises(ValueError):
        VerdictReport(subj, "extension", {}, {}, FAILS, {"exhaustive": True})
    with pytest.raises(ValueError):
        VerdictReport(subj, "extension", {}, {}, HOLDS, {"exhaustive": False})
    with pytest.raises(ValueError):
        VerdictReport(subj, "bogus", {}, {}, HOLDS, {"exhaustive": True})


def test_schema_accepts_and_rejects():
    schema = report_schema()
    code, text = cli("verify", "prop1", "--item", "1", "--n", "4", "--json")
    data = json.loads(text)
    jsonschema.validate(data, schema)
    bad = dict(data, witness=None)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
    sampled = dict(data, verdict="holds", budgets={"exhaustive": False})
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(sampled, schema)


def test_verify_command():
    code, text = cli("verify", "prop1", "--item", "1", "--n", "4", "--json")
    data = json.loads(text)
    assert code == 0
    assert data["verdict"] == "fails" and data["measured"]["shortest_extension_length"] == 5
    code, _ = cli("verify", "prop1", "--item", "1", "--n", "4", "--expect-holds")
    assert code == 1


def test_reset_command():
    code, text = cli("reset", "--family", "cerny:4", "--json")
    data = json.loads(text)
    assert code == 0 and data["length"] == 9 and data["word"] == "baaabaaab"
    code, text = cli("reset", "--family", "cerny:4")
    assert "baaabaaab" in text


def test_ea_command():
    code, text = cli("ea", "--family", "carpi:3,1", "--cs", "q0,q1", "--vs", "ba",
                     "--ce", "q0..q3", "--ve", "a", "--json")
    data = json.loads(text)
    assert code == 0 and data["word"] == "abaaabaaaba"
    assert data["length"] == 11


def test_ea_local_command_reports_conditions():
    code, text = cli("ea", "--family", "carpi:2,1", "--cs", "q0,q1", "--vs", "ba",
                     "--ce", "q0..q2", "--ve", "a", "--local", "1", "--json")
    data = json.loads(text)
    jsonschema.validate(data, report_schema())
    assert data["measured"]["failing_subsets"] == []
    assert data["measured"]["subsets_checked"] == 6


def test_radius_command():
    code, text = cli("radius", "--family", "carpi:2,1", "--json")
    data = json.loads(text)
    jsonschema.validate(data, report_schema())
    assert data["verdict"] == "fails" and data["measured"]["radius"] == 5
    code, text = cli("radius", "--family", "cerny:4", "--sample", "5", "--json")
    data = json.loads(text)
    assert data["verdict"] != "holds" and data["measured"]["lower_bound_only"]
    code, text = cli("radius", "--family", "carpi:6,1", "--max-states", "4", "--json")
    assert code == 3 and json.loads(text)["verdict"] == "inconclusive-within-budget"


def test_other_commands_run(tmp_path):
    path = tmp_path / "c4.dfa"
    assert cli("gen", "--family", "cerny:4", "-o", str(path))[0] == 0
    assert path.read_text() == serialize_automaton(cerny(4))
    code, text = cli("info", "--file", str(path), "--json")
    assert json.loads(text)["synchronizing"] is True
    code, text = cli("compress", "--family", "cerny:4", "--json")
    assert json.loads(text)["cardinalities"] == [4, 3, 2, 1]
    code, text = cli("extend", "--family", "carpi:2,1", "--set", "q0,s1", "--json")
    assert json.loads(text)["word"] == "aabaa"
    code, text = cli("extend", "--family", "carpi:2,1", "--set", "q0,s1",
                     "--max-length", "4", "--json")
    assert json.loads(text)["extendable"] is False
    code, text = cli("independent", "--family", "cerny:4", "--json")
    assert json.loads(text)["independent"] is True
    code, text = cli("independent", "--family", "carpi:2,1", "--k", "1", "--json")
    assert json.loads(text)["verdict"] == "fails"
    code, text = cli("balanced", "--family", "carpi:2,1", "--set", "q2", "--max-len", "3",
                     "--within", "q0..q2", "--json")
    assert json.loads(text)["found"] is True
    code, text = cli("balanced", "--family", "carpi:2,1", "--set", "q2", "--max-len", "3",
                     "--decide", "--json")
    assert json.loads(text)["exists"] is False
    code, text = cli("dot", "--family", "carpi:2,1", "--highlight", "q0,s1")
    assert code == 0 and text.count("fillcolor") == 2


def test_fuzz_command(tmp_path):
    out = tmp_path / "found.jsonl"
    code, text = cli("fuzz", "--n", "6", "--count", "60", "--seed", "0", "--out", str(out),
                     "--json")
    data = json.loads(text)
    assert code == 0 and sum(data["distribution"].values()) == 60
    rows = out.read_text().splitlines() if out.exists() else []
    assert len(rows) == data["counterexamples"]
    for row in rows:
        assert json.loads(row)["radius"] > 6


def test_exit_codes():
    assert cli("bogus")[0] == 2
    assert cli("reset")[0] == 2
    assert cli("reset", "--family", "nope:1")[0] == 2
    assert cli("extend", "--family", "cerny:4", "--set", "q7")[0] == 2
    assert cli("reset", "--file", "/nonexistent/file.dfa")[0] == 2
    assert cli("reset", "--family", "cerny:12", "--node-budget", "10")[0] == 3


def test_time_budget_exit_code():
    assert cli("radius", "--family", "random:16,2,1", "--time-budget", "0.2")[0] == 3


def test_cli_is_deterministic():
    argv = ["fuzz", "--n", "5", "--count", "30", "--seed", "4", "--json"]
    assert cli(*argv)[1] == cli(*argv)[1]
    argv = ["verify", "prop1", "--item", "2", "--n", "5", "--c", "3/2", "--json"]
    assert cli(*argv)[1] == cli(*argv)[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "synchro", "reset", "--family", "cerny:3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "length" in proc.stdout
