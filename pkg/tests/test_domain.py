import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compgame.domain import (
    FinitePoset,
    MonotoneMap,
    NotMonotoneError,
    PosetError,
    brute_force_fixed_points,
    check_monotone,
    enumerate_maps,
    enumerate_posets,
    kleene_lfp,
    least_element,
    parse_poset_text,
)
from compgame.errors import InputError, MalformedMapError

BOT, A, B, TOP = range(4)


@pytest.fixture
def chain2():
    return FinitePoset.chain(2)


@pytest.fixture
def diamond():
    return FinitePoset.from_covers(4, [(BOT, A), (BOT, B), (A, TOP), (B, TOP)])


def test_identity_is_monotone(chain2):
    assert check_monotone(MonotoneMap(chain2, [0, 1])) == (True, None)


def test_swap_is_not_monotone(chain2):
    assert check_monotone(MonotoneMap(chain2, [1, 0])) == (False, (0, 1))


def test_constant_map_on_diamond_is_monotone(diamond):
    assert check_monotone(MonotoneMap(diamond, [A] * 4))[0]


def test_out_of_range_table_is_malformed(chain2):
    with pytest.raises(MalformedMapError):
        MonotoneMap(chain2, [0, 2])
    with pytest.raises(MalformedMapError):
        MonotoneMap(chain2, [0])


def test_lfp_identity_is_bottom(chain2):
    assert kleene_lfp(MonotoneMap(chain2, [0, 1])) == (0, [0])


def test_lfp_successor_on_three_chain():
    fmap = MonotoneMap(FinitePoset.chain(3), [1, 2, 2])
    assert brute_force_fixed_points(fmap) == {2}
    assert kleene_lfp(fmap) == (2, [0, 1, 2])


def test_lfp_diamond(diamond):
    fmap = MonotoneMap(diamond, [A, A, TOP, TOP])
    assert brute_force_fixed_points(fmap) == {A, TOP}
    assert kleene_lfp(fmap) == (A, [BOT, A])


def test_kleene_rejects_non_monotone(chain2):
    with pytest.raises(NotMonotoneError) as info:
        kleene_lfp(MonotoneMap(chain2, [1, 0]))
    assert info.value.witness == (0, 1)


def test_brute_force_examples(chain2, diamond):
    assert brute_force_fixed_points(MonotoneMap(chain2, [0, 1])) == {0, 1}
    assert brute_force_fixed_points(MonotoneMap(diamond, [A] * 4)) == {A}


def test_enumeration_counts():
    # labeled posets with element 0 as bottom: 1, 1, 3, 19
    assert [sum(1 for _ in enumerate_posets(n)) for n in range(1, 5)] == [1, 1, 3, 19]


def test_height(diamond):
    assert diamond.height() == 2
    assert FinitePoset.chain(4).height() == 3
    assert FinitePoset.chain(1).height() == 0


def test_trace_is_ascending_and_short():
    for n in range(1, 5):
        for poset in enumerate_posets(n):
            for fmap in enumerate_maps(poset):
                lfp, trace = kleene_lfp(fmap)
                assert len(trace) <= poset.height() + 1
                for a, b in zip(trace, trace[1:]):
                    assert poset.le(a, b) and a != b


@pytest.mark.parametrize(
    "leq, axiom, witness",
    [
        ([[True, True], [False, False]], "reflexivity", (1,)),
        ([[True, True], [True, True]], "antisymmetry", (0, 1)),
        (
            [[True, True, False], [False, True, True], [False, False, True]],
            "transitivity",
            (0, 1, 2),
        ),
    ],
)
def test_poset_axioms_rejected_with_witness(leq, axiom, witness):
    with pytest.raises(PosetError) as info:
        FinitePoset(leq)
    assert info.value.axiom == axiom
    assert info.value.witness == witness


def test_declared_bottom_must_be_below_everything():
    with pytest.raises(PosetError) as info:
        FinitePoset.from_covers(3, [(0, 1), (0, 2)], bottom=1)
    assert info.value.axiom == "bottom"


def test_no_bottom():
    with pytest.raises(PosetError):
        FinitePoset.from_covers(2, [])


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_random_relations_validate_iff_partial_order(data):
    n = data.draw(st.integers(1, 4))
    bits = data.draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    leq = np.array(bits, dtype=bool).reshape(n, n)
    refl = leq.diagonal().all()
    anti = not (leq & leq.T & ~np.eye(n, dtype=bool)).any()
    trans = all(
        not (leq[i, j] and leq[j, k]) or leq[i, k]
        for i in range(n)
        for j in range(n)
        for k in range(n)
    )
    has_bottom = any(leq[i].all() for i in range(n))
    if refl and anti and trans and has_bottom:
        FinitePoset(leq)
    else:
        with pytest.raises(PosetError):
            FinitePoset(leq)


DIAMOND_TEXT = """\
# diamond with a map whose least fixed point is a
elem bot
elem a
elem b
elem top
cover bot a
cover bot b
cover a top
cover b top
bottom bot
map bot a
map a a
map b top
map top top
"""


def test_parse_diamond():
    poset, fmap = parse_poset_text(DIAMOND_TEXT)
    assert poset.names == ("bot", "a", "b", "top")
    assert poset.bottom == 0
    lfp, trace = kleene_lfp(fmap)
    assert poset.names[lfp] == "a"
    assert [poset.names[e] for e in trace] == ["bot", "a"]


@pytest.mark.parametrize(
    "text, line",
    [
        ("elem a\nelem 9x\n", 2),
        ("elem a\ncover a b\n", 2),
        ("elem a\nfrob a\n", 2),
        ("elem a\nelem a\n", 2),
        ("elem a\nmap a a\nmap a a\n", 3),
        ("elem a\nelem b\ncover a b\nbottom b\n", 4),
        ("elem a\nelem b\ncover a b\ncover b a\n", 3),
        ("elem a\ncover a\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(InputError) as info:
        parse_poset_text(text, source="p.txt")
    assert info.value.line == line
    assert f"p.txt:{line}:" in str(info.value)


def test_parse_partial_map_is_malformed():
    with pytest.raises(MalformedMapError):
        parse_poset_text("elem a\nelem b\ncover a b\nmap a b\n")


def test_least_element(diamond):
    assert least_element(diamond, {A, TOP}) == A
    assert least_element(diamond, {A, B}) is None
