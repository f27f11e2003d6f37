import random
from fractions import Fraction

import pytest

from crnrob.fixtures import NAMES, fixture_text, load_fixture
from crnrob.model import stoichiometric_matrix
from crnrob.parser import (
    MAX_COEFFICIENT,
    NetworkParseError,
    NetworkSource,
    parse_network,
    parse_with_diagnostics,
    read_network,
    serialize,
)

from fuzz import fuzz_inputs
from netgen import random_network


def errors(text):
    return [d for d in parse_with_diagnostics(text).diagnostics if d.severity == "error"]


def test_basic_reaction_and_species_order():
    net = parse_network("A + B -> C ; 1\nC -> 0 ; 3/4\n")
    assert net.species_names == ("A", "B", "C")
    assert net.rate_constants == (Fraction(1), Fraction(3, 4))
    assert net.reactions[1].product.is_empty


def test_header_order_is_respected():
    net = parse_network("# comment\nspecies: B, A\nA -> B ; 1 # trailing\n")
    assert net.species_names == ("B", "A")


def test_reversible_reaction_with_named_parameter():
    net = parse_network("params: k=1e3\nA <-> 2 B ; k, 1/2\n")
    assert net.n_reactions == 2
    assert net.rate_constants == (Fraction(1000), Fraction(1, 2))
    assert net.reactions[0].rate_name == "k"
    assert stoichiometric_matrix(net)[1, 0] == 2


def test_decimal_rates_are_exact():
    net = parse_network("0 -> A ; 0.1\n")
    assert net.rate_constants == (Fraction(1, 10),)


def test_undeclared_species_is_a_warning_only():
    res = parse_with_diagnostics("species: A\nA -> B ; 1\n")
    assert res.ok
    assert res.network.species_names == ("A", "B")
    assert [d.severity for d in res.diagnostics] == ["warning"]


@pytest.mark.parametrize(
    "text, line, col, fragment",
    [
        ("A <- B ; 1\n", 1, 1, "expected a reaction"),
        ("A -> B ; k\n", 1, 10, "unresolved parameter"),
        ("A -> B ; 1, 2\n", 1, 8, "expected 1 rate constant"),
        ("A -> B ; 1\nA -> B ; 2\n", 2, 1, "duplicate edge"),
        ("A -> B ; 0\n", 1, 10, "nonpositive"),
        ("A -> A ; 1\n", 1, 1, "identical"),
        ("A B -> C ; 1\n", 1, 1, "malformed stoichiometry"),
        ("species: A, A\n", 1, 13, "declared twice"),
        ("params: k=1, k=2\nA -> B ; k\n", 1, 14, "defined twice"),
        ("A -> B\n", 1, 7, "missing '; rate'"),
        (f"{MAX_COEFFICIENT + 1} A -> B ; 1\n", 1, 1, "coefficient must be in"),
    ],
)
def test_diagnostics_carry_positions(text, line, col, fragment):
    errs = errors(text)
    assert errs, text
    assert (errs[0].line, errs[0].column) == (line, col)
    assert fragment in errs[0].message


def test_all_errors_are_reported_at_once():
    with pytest.raises(NetworkParseError) as exc:
        parse_network("A -> B ; 0\nC <- D ; 1\nE -> F ; q\n", origin="net.crn")
    diags = exc.value.diagnostics
    assert [d.line for d in diags] == [1, 2, 3]
    assert str(exc.value).startswith("net.crn:1:")


def test_invalid_utf8_is_a_diagnostic():
    res = parse_with_diagnostics(NetworkSource(b"A -> B ; 1\n\xff", "x.crn"))
    assert not res.ok
    assert res.diagnostics[0].line == 2
    assert "UTF-8" in res.diagnostics[0].message


@pytest.mark.parametrize("name", NAMES)
def test_fixture_round_trip(name):
    net = load_fixture(name)
    again = parse_network(serialize(net))
    assert again.species_names == net.species_names
    assert again.rate_constants == net.rate_constants
    assert serialize(again) == serialize(net)


def test_random_network_round_trip():
    rng = random.Random(5)
    for _ in range(100):
        net = random_network(rng, rng.randint(1, 5), rng.randint(1, 6), max_coeff=3)
        again = parse_network(serialize(net))
        assert again.rate_constants == net.rate_constants
        assert (stoichiometric_matrix(again) == stoichiometric_matrix(net)).all()


def test_read_network_from_file(tmp_path):
    path = tmp_path / "futile.crn"
    path.write_text(fixture_text("futile_cycle"))
    net = read_network(path)
    assert net.n_species == 6
    bad = tmp_path / "bad.crn"
    bad.write_text("A -> ; 1\n")
    with pytest.raises(NetworkParseError) as exc:
        read_network(bad)
    assert exc.value.origin == str(bad)


def test_small_fuzz_sample():
    for text in fuzz_inputs(random.Random(0), 2000):
        res = parse_with_diagnostics(text)
        assert res.ok or any(d.severity == "error" for d in res.diagnostics)
        for d in res.diagnostics:
            assert d.line >= 1 and d.column >= 1
