import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiuntil.errors import QuerySyntaxError, ValidationError
from multiuntil.formula import (FALSE, TRUE, And, Atom, Interval, MultiUntilQuery, Not, Or,
                                ThresholdQuery, format_query, format_state_formula,
                                parse_query, parse_state_formula)

a, b, c = Atom("a"), Atom("b"), Atom("c")


def test_three_layer_query():
    q = parse_query("a U[1,2] b U[3,4] c")
    assert q == MultiUntilQuery((a, b, c), (Interval(1, 2), Interval(3, 4)))


def test_threshold_query():
    q = parse_query("P>0.0025 (a U[1,2] b U[3,4] c)")
    assert isinstance(q, ThresholdQuery)
    assert (q.comparison, q.bound) == (">", 0.0025)
    assert q.path.layers == (a, b, c)


@pytest.mark.parametrize("text,cmp", [("P>=0.5 (a U[0,1] b)", ">="), ("P<=0.5(a U[0,1] b)", "<="),
                                      ("P < 1 (a U[0,1] b)", "<")])
def test_comparisons(text, cmp):
    assert parse_query(text).comparison == cmp


def test_overlap_rejected():
    with pytest.raises(QuerySyntaxError, match="overlap") as info:
        parse_query("a U[1,3] b U[2,4] c")
    assert info.value.offset == 11


def test_touching_intervals_accepted():
    q = parse_query("a U[1,2] b U[2,4] c")
    assert q.intervals[0].hi == q.intervals[1].lo


def test_point_interval():
    q = parse_query("true U[0,0] a")
    assert q.layers == (TRUE, a)
    assert q.intervals == (Interval(0, 0),)


@pytest.mark.parametrize("text,offset", [
    ("", 0),
    ("a", 1),
    ("a U[2,1] b", 2),
    ("a U[1,2]", 8),
    ("a U 1,2] b", 4),
    ("a U[1,2] b $", 11),
    ("P>1.5 (a U[0,1] b)", 2),
    ("P>0.5 a U[0,1] b", 6),
    ("U U[0,1] b", 0),
])
def test_syntax_errors_carry_offset(text, offset):
    with pytest.raises(QuerySyntaxError) as info:
        parse_query(text)
    assert info.value.offset == offset


def test_precedence_golden():
    assert parse_state_formula("!a & b | c") == Or(And(Not(a), b), c)
    assert parse_state_formula("a | b & c") == Or(a, And(b, c))
    assert parse_state_formula("!!a") == Not(Not(a))
    assert parse_state_formula("a & b & c") == And(And(a, b), c)
    assert parse_state_formula("a & (b & c)") == And(a, And(b, c))


def test_format_minimal_parentheses():
    assert format_state_formula(Not(And(a, b))) == "!(a & b)"
    assert format_state_formula(And(Or(a, b), c)) == "(a | b) & c"
    assert format_state_formula(Or(And(a, b), c)) == "a & b | c"
    assert format_state_formula(Or(a, Or(b, c))) == "a | (b | c)"


def test_format_threshold():
    q = parse_query("P>0.0025 (a U[1,2] b U[3,4] c)")
    assert format_query(q) == "P> 0.0025 (a U[1,2] b U[3,4] c)"


def test_round_trip_three_layers():
    q = parse_query("a U[1,2] b U[3,4] c")
    assert parse_query(format_query(q)) == q


def test_scientific_numbers():
    q = parse_query("a U[1e-3,2.5E1] b")
    assert q.intervals[0] == Interval(0.001, 25.0)


def test_invalid_interval_direct():
    with pytest.raises(ValidationError):
        Interval(2, 1)
    with pytest.raises(ValidationError):
        MultiUntilQuery((a,), ())


# -- round-trip properties ---------------------------------------------------

idents = st.sampled_from(["a", "b", "c", "x1", "_y"])
state_formulas = st.recursive(
    st.one_of(idents.map(Atom), st.just(TRUE), st.just(FALSE)),
    lambda inner: st.one_of(
        inner.map(Not),
        st.builds(And, inner, inner),
        st.builds(Or, inner, inner)),
    max_leaves=12,
)
times = st.floats(min_value=0, max_value=100, allow_nan=False, allow_infinity=False)


@st.composite
def queries(draw):
    n = draw(st.integers(2, 5))
    pts = sorted(draw(st.lists(times, min_size=2 * (n - 1), max_size=2 * (n - 1))))
    ivs = [Interval(pts[2 * i], pts[2 * i + 1]) for i in range(n - 1)]
    layers = [draw(state_formulas) for _ in range(n)]
    q = MultiUntilQuery(layers, ivs)
    if draw(st.booleans()):
        q = ThresholdQuery(draw(st.sampled_from([">", ">=", "<", "<="])),
                           draw(st.floats(0, 1)), q)
    return q


@settings(max_examples=300)
@given(queries())
def test_parse_format_round_trip(q):
    assert parse_query(format_query(q)) == q


@settings(max_examples=300)
@given(state_formulas)
def test_state_formula_round_trip(f):
    assert parse_state_formula(format_state_formula(f)) == f


@given(queries())
def test_parsed_intervals_are_ordered(q):
    path = q.path if isinstance(q, ThresholdQuery) else q
    parsed = parse_query(format_query(path))
    for iv in parsed.intervals:
        assert iv.lo <= iv.hi
    for cur, nxt in zip(parsed.intervals, parsed.intervals[1:]):
        assert cur.hi <= nxt.lo
