"""CK-machine small-step semantics and fuel-bounded effect-tree construction.

A configuration pairs a stack of evaluation frames with a focused computation.
`eval_tree` builds the depth-n approximation of a term's effect tree: fuel 0
yields Unknown, a terminal under the empty stack yields a leaf, and every
machine step or effect node consumes one fuel unit, with effect children
evaluated at one unit less.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .syntax import (
    Apply,
    CaseNat,
    CasePair,
    CaseSum,
    CbpvError,
    ComTerm,
    EffOp,
    EffectSignature,
    Fix,
    Force,
    Inj,
    Lambda,
    LetVal,
    NatIndexed,
    Pair,
    Proj,
    Record,
    Return,
    SeqTo,
    Succ,
    Thunk,
    Zero,
    is_terminal,
    numeral,
    numeral_value,
    substitute,
)
from .trees import EffectTree, Leaf, NatFamily, Node, Unknown


class StuckError(CbpvError):
    """The machine reached a stuck state; unreachable on well-typed input."""


# --------------------------------------------------------------------------
# Stacks and configurations


@dataclass(frozen=True)
class ToFrame:
    binder: str
    body: ComTerm


@dataclass(frozen=True)
class ArgFrame:
    value: object  # ValTerm


@dataclass(frozen=True)
class ProjFrame:
    label: str


Frame = Union[ToFrame, ArgFrame, ProjFrame]
Stack = tuple[Frame, ...]  # innermost frame last

EMPTY_STACK: Stack = ()


@dataclass(frozen=True)
class Config:
    stack: Stack
    focus: ComTerm


def stack_apply(stack: Stack, m: ComTerm) -> ComTerm:
    """S{M}: rebuild the computation the stack denotes around M."""
    for frame in reversed(stack):
        if isinstance(frame, ToFrame):
            m = SeqTo(m, frame.binder, frame.body)
        elif isinstance(frame, ArgFrame):
            m = Apply(m, frame.value)
        else:
            m = Proj(m, frame.label)
    return m


# --------------------------------------------------------------------------
# Direct reduction


def reduce(m: ComTerm) -> Optional[ComTerm]:
    """The seven direct reduction rules; None when no rule applies."""
    if isinstance(m, CaseNat):
        if isinstance(m.scrutinee, Zero):
            return m.zero_branch
        if isinstance(m.scrutinee, Succ):
            return substitute(m.succ_branch, {m.succ_binder: m.scrutinee.arg})
        return None
    if isinstance(m, LetVal):
        return substitute(m.body, {m.binder: m.value})
    if isinstance(m, Force):
        if isinstance(m.value, Thunk):
            return m.value.com
        return None
    if isinstance(m, CaseSum):
        v = m.scrutinee
        if isinstance(v, Inj):
            br = m.branch(v.label)
            if br is None:
                return None
            x, body = br
            return substitute(body, {x: v.arg})
        return None
    if isinstance(m, CasePair):
        v = m.scrutinee
        if isinstance(v, Pair):
            return substitute(m.body, {m.fst_binder: v.fst, m.snd_binder: v.snd})
        return None
    if isinstance(m, Fix):
        return Apply(m.com, Thunk(Fix(m.com)))
    return None


# --------------------------------------------------------------------------
# Machine steps


@dataclass(frozen=True)
class Stepped:
    config: Config


@dataclass(frozen=True)
class Done:
    terminal: ComTerm


@dataclass
class Effect:
    op: str
    param: Optional[int]
    conts: Optional[tuple[Config, ...]] = None
    cont_fn: Optional[Callable[[int], Config]] = None


StepOutcome = Union[Stepped, Done, Effect]


def machine_step(c: Config) -> StepOutcome:
    """One small step of the stack machine; exactly one outcome applies."""
    m = c.focus
    if isinstance(m, EffOp):
        if m.body is not None:
            binder, body, stack = m.binder, m.body, c.stack
            return Effect(
                m.op, None, None,
                lambda k: Config(stack, substitute(body, {binder: numeral(k)})),
            )
        param = None
        if m.param is not None:
            param = numeral_value(m.param)
            if param is None:
                raise StuckError(f"effect parameter of {m.op} is not a numeral: {m.param}")
        return Effect(m.op, param, tuple(Config(c.stack, child) for child in m.children))
    if is_terminal(m):
        if not c.stack:
            return Done(m)
        top = c.stack[-1]
        rest = c.stack[:-1]
        if isinstance(m, Return) and isinstance(top, ToFrame):
            return Stepped(Config(rest, substitute(top.body, {top.binder: m.value})))
        if isinstance(m, Lambda) and isinstance(top, ArgFrame):
            return Stepped(Config(rest, substitute(m.body, {m.binder: top.value})))
        if isinstance(m, Record) and isinstance(top, ProjFrame):
            body = m.field(top.label)
            if body is not None:
                return Stepped(Config(rest, body))
        raise StuckError(f"terminal {m} under incompatible frame {top}")
    if isinstance(m, SeqTo):
        return Stepped(Config(c.stack + (ToFrame(m.binder, m.body),), m.com))
    if isinstance(m, Apply):
        return Stepped(Config(c.stack + (ArgFrame(m.arg),), m.com))
    if isinstance(m, Proj):
        return Stepped(Config(c.stack + (ProjFrame(m.label),), m.com))
    reduced = reduce(m)
    if reduced is not None:
        return Stepped(Config(c.stack, reduced))
    raise StuckError(f"no rule applies to {m}")


# --------------------------------------------------------------------------
# Effect trees


def eval_tree(
    m: ComTerm,
    fuel: int,
    signature: EffectSignature,
    width: int = 16,
) -> EffectTree:
    """The fuel-indexed approximation |empty stack, m|_fuel of m's effect tree.

    Nat-indexed children are materialized on demand up to `width`.
    """
    if fuel < 0:
        raise CbpvError("fuel must be non-negative")
    return _approx(Config(EMPTY_STACK, m), fuel, signature, width)


def _approx(c: Config, n: int, sig: EffectSignature, width: int) -> EffectTree:
    while True:
        if n == 0:
            return Unknown
        m = c.focus
        if isinstance(m, EffOp):
            out = machine_step(c)
            assert isinstance(out, Effect)
            desc = sig.get(m.op)
            if desc is not None and isinstance(desc.arity, NatIndexed):
                fn = out.cont_fn
                return Node(
                    m.op,
                    NatFamily(lambda k: _approx(fn(k), n - 1, sig, width), width),
                    out.param,
                )
            return Node(
                m.op,
                tuple(_approx(cc, n - 1, sig, width) for cc in out.conts),
                out.param,
            )
        if not c.stack and is_terminal(m):
            return Leaf(m)
        out = machine_step(c)
        assert isinstance(out, Stepped)
        c = out.config
        n -= 1


def run_to_terminal(m: ComTerm, max_steps: int = 10_000) -> Optional[ComTerm]:
    """Drive an effect-free computation to its terminal; None if fuel runs out."""
    c = Config(EMPTY_STACK, m)
    for _ in range(max_steps):
        out = machine_step(c)
        if isinstance(out, Done):
            return out.terminal
        if isinstance(out, Effect):
            raise CbpvError(f"run_to_terminal hit effect operator {out.op}")
        c = out.config
    return None
