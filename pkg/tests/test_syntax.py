import random

import pytest
from hypothesis import given, strategies as st

from cbpv_quant.generators import generate_program
from cbpv_quant.parser import parse_program
from cbpv_quant.syntax import (
    Lambda,
    NAT,
    Return,
    SeqTo,
    Force,
    Thunk,
    Var,
    Zero,
    Succ,
    free_vars,
    numeral,
    numeral_value,
    print_com,
    substitute,
)
from cbpv_quant.config import RunConfig, build_signature


@given(st.integers(min_value=0, max_value=200))
def test_numeral_roundtrip(n):
    assert numeral_value(numeral(n)) == n


def test_numeral_shape():
    assert numeral(0) == Zero()
    assert numeral(2) == Succ(Succ(Zero()))


def test_numeral_value_on_non_numerals():
    assert numeral_value(Thunk(Return(Zero()))) is None
    assert numeral_value(Succ(Var("x"))) is None


def test_substitute_simple():
    t = Return(Var("x"))
    assert substitute(t, {"x": numeral(3)}) == Return(numeral(3))


def test_substitute_shadowed_binder():
    t = Lambda("x", NAT, Return(Var("x")))
    assert substitute(t, {"x": numeral(3)}) == t


def test_substitute_under_seq():
    t = SeqTo(Force(Var("f")), "y", Return(Var("y")))
    v = Thunk(Return(numeral(5)))
    assert substitute(t, {"f": v}) == SeqTo(Force(v), "y", Return(Var("y")))


def test_substitute_simultaneous():
    t = Return(Var("x"))
    body = SeqTo(t, "x", Return(Var("y")))
    out = substitute(body, {"x": numeral(1), "y": numeral(2)})
    # x is rebound by `to`, so only the outer occurrence and y change
    assert out == SeqTo(Return(numeral(1)), "x", Return(numeral(2)))


def test_free_vars():
    t = SeqTo(Force(Var("f")), "y", Return(Var("y")))
    assert free_vars(t) == {"f"}


@pytest.mark.parametrize("seed", range(40))
def test_print_parse_roundtrip(seed):
    sig = build_signature(RunConfig(signature="prob+store+nondet+error"))
    rng = random.Random(seed)
    term = generate_program(rng, sig, depth=4)
    assert parse_program(print_com(term), sig) == term
