import pytest

from cbpv_quant.formulas import (
    AndF,
    ConstF,
    Family,
    Modal,
    NatEq,
    NegF,
    OrF,
    StepF,
    parse_formula,
)
from cbpv_quant.parser import parse_program
from cbpv_quant.satisfaction import (
    SatisfactionError,
    Satisfier,
    hoare,
    satisfies_exact,
    scheduler_mix,
    scheduler_mix_grid,
    sigma_mu,
)
from cbpv_quant.syntax import numeral


def _sat(rt):
    return Satisfier(rt.signature, rt.modalities, rt.space, rt.width)


def test_nat_eq_on_values(prob_rt):
    sat = _sat(prob_rt)
    phi = NatEq(7)
    assert sat.satisfies(numeral(7), phi, 1).interval.lo == 1.0
    r = sat.satisfies(numeral(7), NatEq(8), 1)
    assert r.interval.lo == 0.0 and r.interval.exact


def test_fuel_must_be_positive(prob_rt):
    with pytest.raises(SatisfactionError, match="positive"):
        _sat(prob_rt).satisfies(numeral(7), NatEq(7), 0)


def test_coin_examples(prob_nondet_rt):
    rt = prob_nondet_rt
    sat = _sat(rt)
    coin = parse_program(
        "por(return 0, por(nor(return 0, return 1), return 1))", rt.signature
    )
    opt = sat.satisfies(coin, parse_formula("Eopt<{1}>", rt.signature, rt.space), 8)
    pes = sat.satisfies(coin, parse_formula("Epes<{1}>", rt.signature, rt.space), 8)
    assert opt.interval.exact and opt.interval.lo == 0.5
    assert pes.interval.exact and pes.interval.lo == 0.25


def test_cbn_cbv_distinction(prob_rt):
    # hand enumeration oracle: M1's tree has two thunk leaves, one satisfying
    # only <U>(0 . E<{0}>) and the other only <U>(0 . E<{1}>), so the
    # conjunction is 0 at both leaves and the expectation is 0.  M2's single
    # leaf applies the thunk to 0 and reaches por(return 0, return 1), giving
    # each conjunct 1/2, hence min(1/2, 1/2) = 1/2.
    rt = prob_rt
    sat = _sat(rt)
    m1 = parse_program(
        r"por(return thunk (\x:nat. return 0), return thunk (\x:nat. return 1))",
        rt.signature,
    )
    m2 = parse_program(
        r"return thunk (\x:nat. por(return 0, return 1))", rt.signature
    )
    phi = parse_formula(
        "E<and{[U](0 . E<{0}>), [U](0 . E<{1}>)}>", rt.signature, rt.space
    )
    r1 = sat.satisfies(m1, phi, 8)
    r2 = sat.satisfies(m2, phi, 8)
    assert r1.interval.exact and r1.interval.lo == 0.0
    assert r2.interval.exact and r2.interval.lo == 0.5


def test_diverging_term_yields_whole_interval(prob_rt):
    rt = prob_rt
    sat = _sat(rt)
    omega = parse_program(r"fix (\x:U(F nat). force x)", rt.signature)
    phi = Modal("E", ConstF(1.0))
    for fuel in (1, 4, 64):
        iv = sat.satisfies(omega, phi, fuel).interval
        assert (iv.lo, iv.hi, iv.exact) == (0.0, 1.0, False)


def test_intervals_narrow_with_fuel(prob_rt):
    rt = prob_rt
    sat = _sat(rt)
    geo = parse_program(r"fix (\f:U(F nat). por(return 0, force f))", rt.signature)
    phi = Modal("E", ConstF(1.0))
    prev = sat.satisfies(geo, phi, 2).interval
    for fuel in (4, 8, 16, 32):
        cur = sat.satisfies(geo, phi, fuel).interval
        assert rt.space.leq(prev.lo, cur.lo)
        assert rt.space.leq(cur.hi, prev.hi)
        prev = cur


def test_neg_involution_and_de_morgan(prob_nondet_rt):
    rt = prob_nondet_rt
    sat = _sat(rt)
    coin = parse_program("por(return 0, return 1)", rt.signature)
    phi = parse_formula("Eopt<{1}>", rt.signature, rt.space)
    iv = sat.satisfies(coin, phi, 8).interval
    ivnn = sat.satisfies(coin, NegF(NegF(phi)), 8).interval
    assert iv == ivnn
    members = (
        parse_formula("Eopt<{0}>", rt.signature, rt.space),
        parse_formula("Eopt<{1}>", rt.signature, rt.space),
    )
    lhs = sat.satisfies(coin, NegF(OrF(Family(members=members))), 8).interval
    rhs = sat.satisfies(
        coin, AndF(Family(members=tuple(NegF(m) for m in members))), 8
    ).interval
    assert lhs.exact and rhs.exact and lhs.lo == rhs.lo


def test_step_three_valued(prob_rt):
    rt = prob_rt
    sat = _sat(rt)
    coin = parse_program("por(return 0, return 1)", rt.signature)
    phi = Modal("E", NatEq(1))
    assert sat.satisfies(coin, StepF(phi, 0.5), 8).interval.lo == 1.0
    assert sat.satisfies(coin, StepF(phi, 0.75), 8).interval.hi == 0.0
    geo = parse_program(r"fix (\f:U(F nat). por(return 1, force f))", rt.signature)
    iv = sat.satisfies(geo, StepF(Modal("E", ConstF(1.0)), 1.0), 8).interval
    assert (iv.lo, iv.hi) == (0.0, 1.0)


def test_step_never_unknown_on_finite_programs(prob_rt):
    rt = prob_rt
    sat = _sat(rt)
    coin = parse_program("por(return 0, por(return 1, return 1))", rt.signature)
    for a in (0.0, 0.25, 0.5, 0.75, 1.0):
        iv = sat.satisfies(coin, StepF(Modal("E", NatEq(1)), a), 16).interval
        assert iv.exact


def test_incomplete_or_widens_upper_bound(prob_rt):
    rt = prob_rt
    sat = _sat(rt)
    coin = parse_program("por(return 0, return 1)", rt.signature)
    fam = Family(members=(), generator=lambda i: Modal("E", NatEq(i)), bound=2, complete=False)
    iv = sat.satisfies(coin, OrF(fam), 8).interval
    assert iv.lo == 0.5 and iv.hi == 1.0
    complete = Family(members=(Modal("E", NatEq(0)), Modal("E", NatEq(1))))
    iv2 = sat.satisfies(coin, OrF(complete), 8).interval
    assert iv2.exact and iv2.lo == 0.5


def test_exactness_on_recursion_free_programs(prob_nondet_rt):
    rt = prob_nondet_rt
    sat = _sat(rt)
    progs = [
        "por(return 0, nor(return 1, return 2)) to x. return succ x",
        r"(\x:nat. por(return x, return 0)) 3",
    ]
    for text in progs:
        prog = parse_program(text, rt.signature)
        for f in ("Eopt<{1}>", "Epes<{3}>", "step(Eopt<{4}>, 0.5)"):
            phi = parse_formula(f, rt.signature, rt.space)
            assert sat.satisfies(prog, phi, 32).interval.exact


def test_satisfies_exact_retries(prob_rt):
    rt = prob_rt
    sat = _sat(rt)
    geo = parse_program(r"fix (\f:U(F nat). por(return 0, force f))", rt.signature)
    res = satisfies_exact(sat, geo, Modal("E", NatEq(1)), 2, fuel_cap=64)
    assert not res.interval.exact  # genuinely divergent branch: caps out
    assert res.fuel_used == 64


# ---------------------------------------------------------------- derived formulas


def test_hoare_triples(store_rt):
    rt = store_rt
    sat = _sat(rt)
    space = rt.space
    prog = parse_program("update[l](1, return ())", rt.signature)
    post = frozenset(s for s in space.all_states if s[0] == 1)
    # single update node: G<const post> computes {s | s[l:=1] in post} = S
    assert sat.satisfies(prog, hoare(space.top, post, space), 8).interval.lo == space.top
    wrong = frozenset(s for s in space.all_states if s[0] == 0)
    assert sat.satisfies(prog, hoare(space.top, wrong, space), 8).interval.lo == space.bot
    empty_pre = hoare(space.bot, wrong, space)
    assert sat.satisfies(prog, empty_pre, 8).interval.lo == space.top


def test_sigma_mu_point_mass(prob_store_rt):
    rt = prob_store_rt
    sat = _sat(rt)
    space = rt.space
    prog = parse_program("return ()", rt.signature)
    table = tuple(1.0 if i == 0 else 0.0 for i in range(len(space.all_states)))
    phi = sigma_mu(table, ConstF(table), space)
    got = sat.satisfies(prog, phi, 4).interval
    # point mass at state 0 picks the body's entry there, at every state
    assert got.exact and got.lo == tuple(1.0 for _ in space.all_states)


def test_sigma_mu_uniform_average(prob_store_rt):
    rt = prob_store_rt
    sat = _sat(rt)
    space = rt.space
    prog = parse_program("return ()", rt.signature)
    body_table = (1.0, 0.0)
    phi = sigma_mu((0.5, 0.5), ConstF(body_table), space)
    got = sat.satisfies(prog, phi, 4).interval
    assert got.exact and got.lo == (0.5, 0.5)


def test_sigma_mu_clips_at_one(prob_store_rt):
    rt = prob_store_rt
    sat = _sat(rt)
    space = rt.space
    prog = parse_program("return ()", rt.signature)
    phi = sigma_mu((2.0, 0.0), ConstF(space.top), space)
    got = sat.satisfies(prog, phi, 4).interval
    assert got.exact and got.lo == (1.0, 1.0)


def test_scheduler_mix_values(prob_nondet_rt):
    rt = prob_nondet_rt
    sat = _sat(rt)
    space = rt.space
    one = ConstF(1.0)
    zero = ConstF(0.0)
    prog = parse_program("return 0", rt.signature)
    assert sat.satisfies(prog, scheduler_mix(one, one, space), 4).interval.lo == 1.0
    assert sat.satisfies(prog, scheduler_mix(one, zero, space), 4).interval.lo == 0.5


def test_scheduler_grid_oracle(prob_nondet_rt):
    # the countable-disjunction encoding enumerated on a 1/64 grid agrees
    # with the native mix up to one grid step
    rt = prob_nondet_rt
    sat = _sat(rt)
    space = rt.space
    prog = parse_program("nor(por(return 0, return 1), return 1)", rt.signature)
    opt = parse_formula("Eopt<{1}>", rt.signature, rt.space)
    pes = parse_formula("Epes<{1}>", rt.signature, rt.space)
    native = sat.satisfies(prog, scheduler_mix(opt, pes, space), 16).interval
    grid = sat.satisfies(prog, scheduler_mix_grid(opt, pes, steps=64), 16).interval
    assert native.exact
    assert space.leq(grid.lo, native.lo)
    assert native.lo - grid.lo <= 1 / 64 + 1e-12


def test_derived_formula_validations(prob_rt, store_rt, prob_store_rt):
    from cbpv_quant.formulas import FormulaTypeError

    with pytest.raises(FormulaTypeError, match="powerset"):
        hoare(frozenset(), frozenset(), prob_rt.space)
    with pytest.raises(FormulaTypeError, match="state-table"):
        sigma_mu((0.5,), ConstF(0.5), prob_rt.space)
    with pytest.raises(FormulaTypeError, match="non-negative"):
        sigma_mu((-1.0, 0.5), ConstF(prob_store_rt.space.top), prob_store_rt.space)
    with pytest.raises(FormulaTypeError, match="unit-interval"):
        scheduler_mix(ConstF(store_rt.space.top), ConstF(store_rt.space.top), store_rt.space)


def test_nested_modal_intervals_stay_sound(prob_rt):
    # outer expectation over thunk leaves whose inner satisfaction is itself
    # only bounded: every narrower-fuel interval must contain the limit
    rt = prob_rt
    sat = _sat(rt)
    prog = parse_program(
        r"por(return thunk (fix (\f:U(F nat). por(return 1, force f))),"
        r" return thunk (por(return 0, return 1)))",
        rt.signature,
    )
    phi = parse_formula("E<[U]E<{1}>>", rt.signature, rt.space)
    limit = sat.satisfies(prog, phi, 256).interval
    for fuel in (2, 4, 8, 16, 64):
        iv = sat.satisfies(prog, phi, fuel).interval
        assert rt.space.leq(iv.lo, limit.lo)
        assert rt.space.leq(limit.hi, iv.hi)


@pytest.mark.parametrize("signame", ["prob+nondet", "cost+nondet", "store+nondet"])
def test_interval_nesting_on_generated_programs(signame):
    # fuel n <= m implies the fuel-m interval sits inside the fuel-n one,
    # for every suite formula on seeded random programs
    import random

    from cbpv_quant.config import RunConfig, build_runtime
    from cbpv_quant.generators import generate_program
    from cbpv_quant.parser import parse_ctype
    from cbpv_quant.suites import Pools, enumerate_basic_formulas

    rt = build_runtime(RunConfig(signature=signame, locations=("l",), value_bound=3))
    sat = _sat(rt)
    suite = enumerate_basic_formulas(
        parse_ctype("F nat"), 2, Pools(numerals=(0, 1)), rt.modalities
    )
    rng = random.Random(41)
    for _ in range(25):
        prog = generate_program(rng, rt.signature, depth=3)
        for phi in suite.formulas:
            prev = None
            for fuel in (2, 6, 18):
                iv = sat.satisfies(prog, phi, fuel).interval
                if prev is not None:
                    assert rt.space.leq(prev.lo, iv.lo)
                    assert rt.space.leq(iv.hi, prev.hi)
                prev = iv


def test_error_lift_through_lookup_family(store_rt):
    from cbpv_quant.config import RunConfig, build_runtime

    rt = build_runtime(
        RunConfig(
            signature="store+error",
            locations=("l",),
            value_bound=2,
            errors=("e",),
            error_valuations=(("G", "e", "states{l=1}"),),
        )
    )
    sat = _sat(rt)
    prog = parse_program("lookup[l](x. raise[e]())", rt.signature)
    phi = parse_formula("Gf<const top>", rt.signature, rt.space)
    iv = sat.satisfies(prog, phi, 8).interval
    # the raise value is consulted at every branch, so the lookup passes it through
    assert iv.exact and iv.lo == frozenset({(1,)})
