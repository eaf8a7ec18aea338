import json
import subprocess
import sys

import pytest

from algvar import cli, formats, omega, trees, variety, words
from algvar.finalg import check_law

from conftest import fixture_path


def run(capsys, *argv):
    code, rep = cli.dispatch(list(argv))
    out = capsys.readouterr()
    return code, rep, out.out, out.err


def test_syntactic_prints_six_element_monoid(capsys):
    code, rep, out, _ = run(capsys, "syntactic", "--dfa", fixture_path("ab_star.dfa"))
    assert code == 0
    assert "sizes: m=6" in out
    assert rep.verdicts["size"] == 6
    # library mirror
    syn, _ = words.syntactic_monoid(words.compile_dfa(formats.parse_input(fixture_path("ab_star.dfa"))))
    assert syn.monoid.sizes == (6,)


def test_law_failure_reports_witness(capsys):
    code, rep, out, _ = run(capsys, "law", "--alg", fixture_path("z2.alg"), "--law", "x^w * x = x^w")
    assert code == 1
    assert "x=s0#1(a)" in out
    lib = check_law(formats.parse_input(fixture_path("z2.alg")).algebra, "x^w * x = x^w")
    assert lib.witness == {"x": "a"}


def test_law_file(capsys):
    code, rep, out, _ = run(capsys, "law", "--alg", fixture_path("z2.alg"), "--laws", fixture_path("aperiodic.laws"))
    assert code == 1
    assert len(rep.witnesses) == 2


def test_unknown_subcommand_exit_2(capsys):
    code, rep, _, err = run(capsys, "frobnicate")
    assert code == 2 and rep is None
    assert "invalid choice" in err


def test_no_subcommand_exit_2(capsys):
    code, _, _, _ = run(capsys)
    assert code == 2


def test_parse_error_exit_2_with_line(capsys):
    code, _, _, err = run(capsys, "syntactic", "--dfa", fixture_path("bad_transition.dfa"))
    assert code == 2
    assert "line 6" in err


def test_validate_preset_failure(capsys):
    code, rep, out, _ = run(capsys, "validate", "--alg", fixture_path("not_monoid.alg"), "--preset", "monoid")
    assert code == 1
    assert "x * 1 = x" in out and "s0#1(a)" in out
    code, _, _, _ = run(capsys, "validate", "--alg", fixture_path("z2.alg"), "--preset", "monoid")
    assert code == 0


def test_derivative_and_preimage(capsys):
    code, rep, out, _ = run(capsys, "derivative", "--dfa", fixture_path("ab_star.dfa"), "--side", "left", "--word", "a")
    assert code == 0 and rep.verdicts["syntactic size"] == 6
    code, rep, out, _ = run(capsys, "preimage", "--dfa", fixture_path("ab_star.dfa"), "--map", "c=ab")
    assert code == 0 and rep.verdicts["syntactic size"] == 1
    code, _, _, err = run(capsys, "preimage", "--dfa", fixture_path("ab_star.dfa"), "--map", "c=zz")
    assert code == 2


def test_ideal(capsys):
    code, rep, _, _ = run(capsys, "ideal", "--gens", fixture_path("z2.alg"), "--bound", "6")
    assert code == 0 and rep.verdicts["members"] == 2
    v = variety.generate_local_pseudovariety([formats.parse_input(fixture_path("z2.alg"))], 6)
    assert len(v) == 2


def test_bound_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ALGVAR_BOUND", "1")
    code, rep, _, _ = run(capsys, "ideal", "--gens", fixture_path("z2.alg"))
    assert rep.truncated and rep.verdicts["bound"] == 1


def test_closure_writes_family(capsys, tmp_path):
    out = tmp_path / "ab.fam"
    code, rep, _, _ = run(capsys, "closure", "--seed", fixture_path("ab_star.dfa"), "--out", str(out))
    assert code == 0 and rep.verdicts["languages"] == 64
    fam = formats.parse_input(str(out))
    assert len(fam) == 64


def test_closure_with_class(capsys):
    code, rep, _, _ = run(capsys, "closure", "--seed", fixture_path("z2.fam"), "--class", "length-preserving")
    assert code == 0 and rep.verdicts["languages"] == 4


def test_roundtrip(capsys):
    code, rep, _, _ = run(capsys, "roundtrip", "--seed", fixture_path("ab_star.dfa"), "--bound", "6")
    assert code == 0 and not rep.truncated
    code, rep, _, _ = run(capsys, "roundtrip", "--seed", fixture_path("z2.alg"), "--generators", "--bound", "1")
    assert code == 0 and rep.truncated


def test_reduce(capsys):
    code, rep, _, _ = run(capsys, "reduce", "--alg", fixture_path("z2.alg"), "--s0", "m")
    assert code == 0 and rep.verdicts["reduced"] is True
    code, _, _, err = run(capsys, "reduce", "--alg", fixture_path("z2.alg"), "--s0", "q")
    assert code == 2 and "unknown sort" in err


def test_omega_commands(capsys, tmp_path):
    code, rep, _, _ = run(capsys, "omega", "syntactic", "--rec", fixture_path("inf_a.omega"), "--reduced")
    assert code == 0 and rep.verdicts["sizes"] == "2 2"
    code, rep, _, _ = run(capsys, "omega", "member", "--rec", fixture_path("inf_a.omega"), "--lasso", "b;ab")
    assert code == 0 and rep.verdicts["member"] is True
    code, rep, _, _ = run(capsys, "omega", "member", "--rec", fixture_path("inf_a.omega"), "--lasso", "ab;b")
    assert code == 1
    rec = formats.parse_input(fixture_path("inf_a.omega"))
    assert not omega.lasso_membership(rec, "ab;b")


def test_tree_commands(capsys):
    code, rep, _, _ = run(capsys, "tree", "syntactic", "--ta", fixture_path("root_a.ta"))
    assert code == 0 and rep.verdicts["sizes"] == "2 2 2"
    code, rep, _, _ = run(capsys, "tree", "derivative", "--ta", fixture_path("root_a.ta"), "--context", "a(*,b)")
    assert code == 0 and rep.verdicts["empty"] is False
    code, rep, _, _ = run(capsys, "tree", "derivative", "--ta", fixture_path("root_a.ta"), "--context", "b(*,b)")
    assert rep.verdicts["empty"] is True
    code, rep, _, _ = run(capsys, "tree", "member", "--ta", fixture_path("root_a.ta"), "--tree", "b(a,a)")
    assert code == 1
    lang = trees.compile_tree_automaton(formats.parse_input(fixture_path("root_a.ta")))
    assert not trees.tree_membership(lang, "b(a,a)")


def test_json_and_text_reports_agree(capsys):
    argv = ["law", "--alg", fixture_path("z2.alg"), "--law", "x^w * x = x^w", "--law", "x * 1 = x"]
    code_t, rep_t, text, _ = run(capsys, *argv)
    code_j, rep_j, js, _ = run(capsys, *argv, "--json")
    data = json.loads(js)
    assert code_t == code_j == 1
    assert data["ok"] is False
    for w in data["witnesses"]:
        assert f"witness: {w}" in text
    for k, v in data["verdicts"].items():
        assert f"{k}: {'yes' if v else 'no'}" in text


def test_console_script_runs():
    out = subprocess.run([sys.executable, "-m", "algvar.cli", "syntactic", "--dfa", fixture_path("ab_star.dfa")],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "size: 6" in out.stdout


def test_session_config_rejects_bad_bound():
    with pytest.raises(cli.UsageError):
        cli.SessionConfig(bound=0)
    with pytest.raises(cli.UsageError):
        cli.SessionConfig(regime="ordered", mode="boolean")
