import glob
import os

import numpy as np
import pytest

from algvar import formats
from algvar.formats import FormatError

from conftest import FIXTURES, fixture_path

GOOD = sorted(p for p in glob.glob(os.path.join(FIXTURES, "*")) if "bad_" not in os.path.basename(p))


@pytest.mark.parametrize("path", GOOD, ids=os.path.basename)
def test_fixture_round_trip_is_byte_exact(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    value = formats.parse_input(path)
    if path.endswith(".json"):
        assert formats.serialize_json(value) == text
    else:
        assert formats.serialize_text(value) == text


@pytest.mark.parametrize("path", [p for p in GOOD if not p.endswith(".json")], ids=os.path.basename)
def test_text_and_json_agree(path):
    value = formats.parse_input(path)
    via_json = formats.parse_json(formats.serialize_json(value))
    assert formats.serialize_text(via_json) == formats.serialize_text(value)


def test_malformed_transition_names_line():
    with pytest.raises(FormatError) as info:
        formats.parse_input(fixture_path("bad_transition.dfa"))
    assert info.value.line == 6
    assert "line 6" in str(info.value)


def test_missing_transition():
    text = "states 2\nalphabet a\ninit q0\nfinal q1\nq0 a -> q1\n"
    with pytest.raises(FormatError, match="missing transition"):
        formats.parse_text(text, "dfa")


def test_duplicate_transition():
    text = "states 1\nalphabet a\ninit q0\nfinal\nq0 a -> q0\nq0 a -> q0\n"
    with pytest.raises(FormatError) as info:
        formats.parse_text(text, "dfa")
    assert info.value.line == 6


def test_named_states_round_trip():
    text = "states p q\nalphabet a\ninit p\nfinal q\np a -> q\nq a -> p\n"
    d = formats.parse_text(text, "dfa")
    assert formats.serialize_text(d) == text


def test_comments_and_blank_lines_are_skipped():
    text = "# parity\nstates 2\n\nalphabet a\ninit q0\nfinal q0\nq0 a -> q1\nq1 a -> q0\n"
    d = formats.parse_text(text, "dfa")
    assert d.accepts("aa") and not d.accepts("a")


def test_algebra_table_out_of_range():
    text = open(fixture_path("z2.alg")).read().replace("0 1\n1 0\n", "0 1\n1 2\n")
    with pytest.raises(FormatError, match="leaves the carrier"):
        formats.parse_text(text, "algebra")


def test_algebra_short_row_reports_line():
    text = open(fixture_path("z2.alg")).read().replace("0 1\n1 0\n", "0 1\n1\n")
    with pytest.raises(FormatError) as info:
        formats.parse_text(text, "algebra")
    assert info.value.line == 12


def test_ordered_algebra_round_trip():
    from algvar.finalg import FiniteAlgebra, monoid_signature

    tab = np.array([[0, 1], [1, 1]])
    alg = FiniteAlgebra(monoid_signature(True), (2,), (np.array(0), tab),
                        (np.array([[True, True], [False, True]]),))
    text = formats.serialize_text(alg)
    assert "ordered yes" in text
    again = formats.parse_text(text, "algebra")
    assert again.identical(alg)
    assert formats.serialize_text(again) == text


def test_plain_algebra_without_letters():
    text = "\n".join(open(fixture_path("z2.alg")).read().splitlines()[:-2]) + "\n"
    alg = formats.parse_text(text, "algebra")
    from algvar.finalg import FiniteAlgebra

    assert isinstance(alg, FiniteAlgebra)
    assert formats.serialize_text(alg) == text


def test_omega_unknown_element():
    text = open(fixture_path("inf_a.omega")).read().replace("opow C N", "opow C X")
    with pytest.raises(FormatError) as info:
        formats.parse_text(text, "omega")
    assert "unknown omega element 'X'" in str(info.value)


def test_tree_automaton_bad_rule():
    text = open(fixture_path("root_a.ta")).read().replace("node a qa qa -> qa", "node a qa -> qa")
    with pytest.raises(FormatError, match="malformed rule"):
        formats.parse_text(text, "tree-automaton")


def test_laws_syntax_error_has_line():
    with pytest.raises(FormatError) as info:
        formats.parse_text("x * x = x\nx * = y\n", "laws")
    assert info.value.line == 2


def test_json_kind_mismatch():
    text = open(fixture_path("z2.alg.json")).read()
    with pytest.raises(FormatError, match="expected 'dfa'"):
        formats.parse_json(text, "dfa")
    with pytest.raises(FormatError, match="invalid JSON"):
        formats.parse_json("{", None)


def test_unknown_kind():
    with pytest.raises(FormatError):
        formats.parse_text("", "spreadsheet")


def test_family_round_trip_through_closure(ab_star_dfa):
    from algvar.variety import close_language_family
    from algvar.words import compile_dfa

    fam = close_language_family([compile_dfa(ab_star_dfa)], "positive")
    text = formats.serialize_text(fam)
    again = formats.parse_text(text, "family")
    assert again.same_as(fam) and len(again) == 21
    assert formats.serialize_text(again) == text


def test_missing_file():
    with pytest.raises(FormatError, match="cannot read"):
        formats.parse_input("/nonexistent/x.dfa")
