from fractions import Fraction

import pytest

from essimage import fixtures
from essimage.fileformat import (
    FileError,
    FileSyntaxError,
    NotAnAtomUnion,
    UnknownIdentifier,
    parse_density_file,
    parse_rat,
    parse_system_file,
    parse_terms_file,
)

TWO_SPACES = """\
@space X
point a 1
point b 1
@space Y
point u 1
point v 1
@partition Y
atom Y0: u v
@map [X -> Y]
a -> u
b -> v
@set S = a
"""


def test_ex1a_structure():
    f = parse_system_file(fixtures.fixture_text("EX1A"), name="EX1A")
    sp = f.map.domain
    assert f.is_endomap
    assert sp.points == ("0", "1")
    assert sp.weights == (1, 0)
    assert f.map.atom_map == (0, 0)
    assert f.set("A1").names() == ("1",)


def test_parse_rat():
    assert parse_rat("3/4", 1) == Fraction(3, 4)
    assert parse_rat("-2", 1) == -2
    with pytest.raises(FileSyntaxError) as e:
        parse_rat("0.5", 7)
    assert e.value.line == 7


def test_decimal_weight_rejected():
    with pytest.raises(FileSyntaxError) as e:
        parse_system_file("@space X\npoint a 0.5\n")
    assert e.value.line == 2


def test_set_inside_atom():
    text = "@space X\npoint a 1\npoint b 1\n@partition X\natom ab: a b\n@set S = a\n"
    with pytest.raises(NotAnAtomUnion):
        parse_system_file(text)


def test_two_space_map():
    f = parse_system_file(TWO_SPACES)
    assert not f.is_endomap
    assert f.map.codomain.atom_names == ("Y0",)
    assert f.set("S").space is f.map.domain


@pytest.mark.parametrize("text, exc, line", [
    ("@space X\npoint a 1\n@map\na -> z\n", UnknownIdentifier, 4),
    ("@space X\npoint a 1\n@map\n", FileSyntaxError, 3),
    ("@space X\npoint a 1\n@frob\n", FileSyntaxError, 3),
    ("point a 1\n", FileSyntaxError, 1),
    ("@space X\npoint a 1\n@set S = q\n", UnknownIdentifier, 3),
    ("@space X\npoint a -1\n", FileError, 1),
    ("@space X\npoint a 1\n@map\na -> a\na -> a\n", FileSyntaxError, 5),
    ("@markov\nstates a\ninit 1\n", FileSyntaxError, 1),
])
def test_errors_carry_line_numbers(text, exc, line):
    with pytest.raises(exc) as e:
        parse_system_file(text)
    assert e.value.line == line


def test_partition_order_follows_points():
    text = "@space X\npoint a 1\npoint b 1\npoint c 1\n@partition X\natom BC: b c\n"
    sp = parse_system_file(text).spaces["X"]
    assert sp.atom_names == ("a", "BC")


def test_markov_block():
    f = parse_system_file(fixtures.fixture_text("MARKOV2"))
    assert f.markov.states == ("1", "2")
    assert f.markov.init == (Fraction(2, 3), Fraction(1, 3))


def test_density_and_terms_files():
    f = fixtures.load("ROT3")
    sp = f.map.domain
    assert parse_density_file("0 1/3\n2 2/3\n", sp) == (Fraction(1, 3), 0, Fraction(2, 3))
    with pytest.raises(UnknownIdentifier):
        parse_density_file("9 1\n", sp)
    pre, period = parse_terms_file("pre: 0\nperiod: 1\nperiod: 2 0\n", sp)
    assert [A.names() for A in pre] == [("0",)]
    assert [A.names() for A in period] == [("1",), ("0", "2")]
    with pytest.raises(FileSyntaxError):
        parse_terms_file("pre: 0\n", sp)


def test_fixture_texts_parse():
    for name in fixtures.NAMES:
        f = fixtures.load(name)
        assert (f.map is not None) or (f.markov is not None)
    with pytest.raises(KeyError):
        fixtures.fixture_text("NOPE")
