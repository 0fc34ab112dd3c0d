"""Every shipped corpus file parses and reprints stably."""

import pytest

from blocksmith import corpus
from blocksmith.parse import (
    parse_alewife_file, parse_lowering_file, parse_machine_file,
    parse_program_file, parse_spec_file, parse_spec_text, parse_alewife_text,
    parse_machine_text, parse_lowering_text, parse_program_text,
)
from blocksmith.printer import (
    fmt_alewife, fmt_lowering, fmt_machine, fmt_program, fmt_spec,
)


@pytest.mark.parametrize("name", corpus.MACHINES)
def test_machines_parse_and_reprint(name):
    m = parse_machine_file(str(corpus.corpus_path(name)))
    assert m.defops
    assert parse_machine_text(fmt_machine(m)) == m


@pytest.mark.parametrize("name", corpus.LOWERINGS)
def test_lowerings_parse_and_reprint(name):
    l = parse_lowering_file(str(corpus.corpus_path(name)))
    assert [mod.name for mod in l.modules] == \
        ["disp_defs", "may_use_flags", "disp_scratch"]
    assert parse_lowering_text(fmt_lowering(l)) == l


@pytest.mark.parametrize("name", corpus.ALEWIFE)
def test_alewife_parses_and_reprints(name):
    a = parse_alewife_file(str(corpus.corpus_path(name)))
    assert parse_alewife_text(fmt_alewife(a)) == a


@pytest.mark.parametrize("case", corpus.TOY_SPECS, ids=lambda c: c.spec)
def test_toy_specs_parse_and_reprint(case):
    s = parse_spec_file(str(corpus.corpus_path(case.spec)))
    assert parse_spec_text(fmt_spec(s)) == s


@pytest.mark.parametrize(
    "case", corpus.LOWERING_CASES, ids=lambda c: c.name)
def test_witness_programs_parse(case):
    p = parse_program_file(str(corpus.corpus_path(case.witness)))
    assert p
    assert parse_program_text(fmt_program(p)) == p


@pytest.mark.parametrize(
    "case", corpus.LOWERING_CASES, ids=lambda c: c.name)
def test_golden_specs_parse_and_reprint(case):
    s = parse_spec_file(str(corpus.corpus_path(case.golden)))
    assert s.decls
    assert parse_spec_text(fmt_spec(s)) == s


def test_toy_spec_suite_is_large_enough():
    assert len(corpus.TOY_SPECS) >= 10
    assert any(c.length >= 4 for c in corpus.TOY_SPECS)
