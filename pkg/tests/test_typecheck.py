import random

import pytest

from cbpv_quant.config import RunConfig, build_signature
from cbpv_quant.generators import generate_program
from cbpv_quant.machine import Config, Done, Effect, machine_step, reduce, stack_apply
from cbpv_quant.parser import parse_program
from cbpv_quant.syntax import (
    Apply,
    Fix,
    Force,
    Lambda,
    NAT,
    ProducerType,
    Return,
    ThunkType,
    Var,
    numeral,
)
from cbpv_quant.typecheck import EMPTY, Context, TypeCheckError, check_type, infer_type

SIG = build_signature(RunConfig(signature="prob+nondet"))
FULL = build_signature(RunConfig(signature="prob+store+nondet+error"))


def test_return_numeral():
    assert infer_type(EMPTY, Return(numeral(0)), SIG) == ProducerType(NAT)


def test_fix_rule():
    t = Fix(Lambda("x", ThunkType(ProducerType(NAT)), Force(Var("x"))))
    assert infer_type(EMPTY, t, SIG) == ProducerType(NAT)


def test_apply_non_arrow_rejected():
    t = Apply(Return(numeral(0)), numeral(0))
    with pytest.raises(TypeCheckError, match="not an arrow"):
        infer_type(EMPTY, t, SIG)


def test_unbound_variable():
    with pytest.raises(TypeCheckError, match="unbound"):
        infer_type(EMPTY, Return(Var("ghost")), SIG)


def test_fix_needs_thunked_domain():
    t = Fix(Lambda("x", NAT, Return(Var("x"))))
    with pytest.raises(TypeCheckError, match="fix"):
        infer_type(EMPTY, t, SIG)


def test_inj_checks_against_sum():
    prog = parse_program(
        r"(\x:nat + unit. pm x as {inj 1 n -> return n | inj 2 u -> return 9}) (inj 1 4)",
        SIG,
    )
    assert infer_type(EMPTY, prog, SIG) == ProducerType(NAT)


def test_inj_does_not_synthesize():
    prog = parse_program("return inj 1 4", SIG)
    with pytest.raises(TypeCheckError, match="inj"):
        infer_type(EMPTY, prog, SIG)


def test_nullary_effect_defaults_to_producing_unit():
    sig = build_signature(RunConfig(signature="store+error", locations=("l",)))
    prog = parse_program("update[l](1, raise[e]())", sig)
    assert str(infer_type(EMPTY, prog, sig)) == "F unit"


def test_effop_children_share_type():
    bad = parse_program(r"por(return 0, \x:nat. return x)", SIG)
    with pytest.raises(TypeCheckError):
        infer_type(EMPTY, bad, SIG)


def test_context_distinct_names():
    with pytest.raises(TypeCheckError):
        Context((("x", NAT), ("x", NAT)))


def test_check_type_on_values():
    check_type(EMPTY, numeral(3), NAT, SIG)
    with pytest.raises(TypeCheckError):
        check_type(EMPTY, numeral(3), ThunkType(ProducerType(NAT)), SIG)


def test_determinism():
    prog = parse_program("por(return 0, return 1) to x. return succ x", SIG)
    assert infer_type(EMPTY, prog, SIG) == infer_type(EMPTY, prog, SIG)


@pytest.mark.parametrize("seed", range(30))
def test_subject_reduction_along_machine_runs(seed):
    # every machine step of a generated program preserves the stack-applied type
    rng = random.Random(seed)
    prog = generate_program(rng, FULL, depth=3)
    ty = infer_type(EMPTY, prog, FULL)
    c = Config((), prog)
    for _ in range(60):
        out = machine_step(c)
        if isinstance(out, (Done, Effect)):
            break
        c = out.config
        assert infer_type(EMPTY, stack_apply(c.stack, c.focus), FULL) == ty


@pytest.mark.parametrize("seed", range(20))
def test_direct_reduction_preserves_types(seed):
    rng = random.Random(seed + 1000)
    prog = generate_program(rng, FULL, depth=3)
    ty = infer_type(EMPTY, prog, FULL)
    m = prog
    for _ in range(30):
        n = reduce(m)
        if n is None:
            break
        assert infer_type(EMPTY, n, FULL) == ty
        m = n
