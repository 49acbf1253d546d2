"""Quantitative modalities: recurrences over effect trees into a truth space.

A modality carries one combinator per effect operator.  The depth-indexed
denotation follows the scheme: index 0 is bot, Unknown is bot, a leaf at
index n+1 is its own value, and an operator node at index n+1 combines its
children evaluated at index n (store lookups consume extra index budget,
max(0, n - s(l)), exactly as specified by their recurrence).

Certified intervals run the same recursion twice: the lower pass sends
Unknown and exhausted indices to bot, the upper pass to top.  Both bounds are
sound for every leaf-monotone modality, and the evaluator refuses interval
mode for specs not declared leaf-monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Callable, Mapping, Optional

from .lattice import (
    CostSpace,
    StateSetSpace,
    StateTableSpace,
    TruthSpace,
    UnitIntervalSpace,
    assert_interval_order,
)
from .syntax import CbpvError
from .trees import EffectTree, Leaf, NatFamily, Node, _Unknown, leaves


class ModalityError(CbpvError):
    pass


class ValuationError(CbpvError):
    pass


Recurse = Callable[[EffectTree, int], Any]


@dataclass(frozen=True)
class OpRule:
    """Combinator for one operator: fn(node, m, rec) with child budget m."""

    fn: Callable[[Node, int, Recurse], Any]
    index_cost: int = 1
    family_consult: Optional[int] = None


@dataclass(frozen=True)
class ModalitySpec:
    name: str
    space: TruthSpace
    rules: Mapping[str, OpRule]
    leaf_monotone: bool = True
    two_valued_errors: Optional[bool] = None

    def rule(self, op: str) -> OpRule:
        r = self.rules.get(op)
        if r is None:
            raise ModalityError(
                f"operator {op!r} has no combinator in modality {self.name}"
            )
        return r

    def __repr__(self):
        return f"<Modality {self.name} over {self.space.name}>"


@dataclass(frozen=True)
class Interval:
    """Certified bounds on a truth value; exact implies lo == hi."""

    lo: Any
    hi: Any
    exact: bool


def exact_interval(v) -> Interval:
    return Interval(v, v, True)


def child_at(children, i: int) -> EffectTree:
    if isinstance(children, NatFamily):
        return children.child(i)
    if i < 0 or i >= len(children):
        raise ModalityError(f"child index {i} out of range for finite node")
    return children[i]


# --------------------------------------------------------------------------
# Evaluation


class _Pass:
    def __init__(self, q: ModalitySpec, unknown_value, leaf_fn: Callable[[Any], Any]):
        self.q = q
        self.unknown_value = unknown_value
        self.leaf_fn = leaf_fn
        self.saw_unknown = False
        self.exhausted = False
        self._memo: dict[tuple[int, int], Any] = {}
        self._keep: list = []  # pin memoized nodes so ids stay unique

    def run(self, t: EffectTree, n: int):
        if isinstance(t, _Unknown):
            self.saw_unknown = True
            return self.unknown_value
        if n <= 0:
            self.exhausted = True
            return self.unknown_value
        if isinstance(t, Leaf):
            return self.leaf_fn(t.value)
        assert isinstance(t, Node)
        key = (id(t), n)
        got = self._memo.get(key)
        if got is not None:
            return got
        rule = self.q.rule(t.op)
        val = rule.fn(t, n - 1, self.run)
        self._memo[key] = val
        self._keep.append(t)
        return val


def denote_at_depth(q: ModalitySpec, t: EffectTree, n: int):
    """The depth-n approximation of q's denotation (Unknown and exhaustion
    both fall to bot, as in the defining recurrence)."""
    return _Pass(q, q.space.bot, lambda v: v).run(t, n)


def sufficient_depth(q: ModalitySpec, t: EffectTree) -> int:
    """An index deep enough that the lower pass on this finite tree reaches
    every leaf; lookup-style rules consume extra budget per level."""
    if isinstance(t, (Leaf, _Unknown)):
        return 1
    assert isinstance(t, Node)
    rule = q.rule(t.op)
    ch = t.children
    if isinstance(ch, NatFamily):
        consult = rule.family_consult if rule.family_consult is not None else ch.width
        kids = [ch.child(i) for i in range(min(consult, ch.width))]
    else:
        kids = list(ch)
    return rule.index_cost + max((sufficient_depth(q, c) for c in kids), default=0)


def evaluate_interval(
    q: ModalitySpec,
    t: EffectTree,
    leaf_lo: Callable[[Any], Any] = lambda v: v,
    leaf_hi: Callable[[Any], Any] = lambda v: v,
) -> Interval:
    if not q.leaf_monotone:
        raise ModalityError(
            f"modality {q.name} is not declared leaf-monotone; "
            f"interval bounds would be unsound"
        )
    d = sufficient_depth(q, t)
    lo_pass = _Pass(q, q.space.bot, leaf_lo)
    lo = lo_pass.run(t, d)
    assert not lo_pass.exhausted, "sufficient_depth must cover the tree"
    hi_pass = _Pass(q, q.space.top, leaf_hi)
    hi = hi_pass.run(t, d)
    # equal bounds pin the true value exactly; unexplored parts always show up
    # as a strict gap because the two passes only differ there
    exact = lo == hi
    assert_interval_order(q.space, lo, hi)
    return Interval(lo, hi, exact)


def denote_interval(q: ModalitySpec, t: EffectTree) -> Interval:
    """Certified bounds for a tree whose leaves already carry truth values."""
    return evaluate_interval(q, t)


def lift(q: ModalitySpec, valuation, t: EffectTree) -> Interval:
    """Substitute a leaf valuation into the tree and take certified bounds."""
    if isinstance(valuation, Mapping):
        for x in leaves(t):
            if x not in valuation:
                raise ValuationError(f"valuation is not total: missing leaf {x!r}")
        fn = lambda x: valuation[x]
    else:
        fn = valuation
    return evaluate_interval(q, t, fn, fn)


def denote_limit(q: ModalitySpec, t: EffectTree):
    """The exact denotation of a finite tree (the supremum of the chain)."""
    return denote_at_depth(q, t, sufficient_depth(q, t))


# --------------------------------------------------------------------------
# The shipped modality families


def expectation_modality(name: str = "E", space: Optional[UnitIntervalSpace] = None) -> ModalitySpec:
    """E over [0,1]: fair coin average at probabilistic-choice nodes."""
    space = space or UnitIntervalSpace()

    def por(node: Node, m: int, rec: Recurse):
        return (rec(child_at(node.children, 0), m) + rec(child_at(node.children, 1), m)) / 2.0

    return ModalitySpec(name, space, {"por": OpRule(por)})


def cost_modality(name: str = "C", space: Optional[CostSpace] = None) -> ModalitySpec:
    """C over [0, inf] reversed: node costs accumulate along the branch."""
    space = space or CostSpace()

    def cost(node: Node, m: int, rec: Recurse):
        return node.param + rec(child_at(node.children, 0), m)

    return ModalitySpec(name, space, {"cost": OpRule(cost)})


def store_modality(store_space: StateSetSpace, name: str = "G") -> ModalitySpec:
    """G over P(S): the set of starting states leading to a satisfying end state."""
    store = store_space.store
    rules: dict[str, OpRule] = {}
    for li, loc in enumerate(store.locations):

        def lookup(node: Node, m: int, rec: Recurse, li=li):
            out = []
            for s in store_space.all_states:
                v = s[li]
                if s in rec(child_at(node.children, v), max(0, m - v)):
                    out.append(s)
            return frozenset(out)

        def update(node: Node, m: int, rec: Recurse, li=li):
            target = rec(child_at(node.children, 0), m)
            k = node.param
            return frozenset(
                s for s in store_space.all_states if store.set_loc(s, li, k) in target
            )

        rules[f"lookup[{loc}]"] = OpRule(
            lookup, index_cost=store.value_bound, family_consult=store.value_bound
        )
        rules[f"update[{loc}]"] = OpRule(update)
    return ModalitySpec(name, store_space, rules)


def prob_store_modality(table_space: StateTableSpace, name: str = "EG") -> ModalitySpec:
    """EG over [0,1]^S: per-state probability, threading the store."""
    store = table_space.store
    states = table_space.all_states
    index = {s: i for i, s in enumerate(states)}
    rules: dict[str, OpRule] = {}

    def por(node: Node, m: int, rec: Recurse):
        a = rec(child_at(node.children, 0), m)
        b = rec(child_at(node.children, 1), m)
        return tuple((x + y) / 2.0 for x, y in zip(a, b))

    rules["por"] = OpRule(por)
    for li, loc in enumerate(store.locations):

        def lookup(node: Node, m: int, rec: Recurse, li=li):
            out = []
            for s in states:
                v = s[li]
                out.append(rec(child_at(node.children, v), max(0, m - v))[index[s]])
            return tuple(out)

        def update(node: Node, m: int, rec: Recurse, li=li):
            inner = rec(child_at(node.children, 0), m)
            k = node.param
            return tuple(inner[index[store.set_loc(s, li, k)]] for s in states)

        rules[f"lookup[{loc}]"] = OpRule(
            lookup, index_cost=store.value_bound, family_consult=store.value_bound
        )
        rules[f"update[{loc}]"] = OpRule(update)
    return ModalitySpec(name, table_space, rules)


def make_nondet_variants(q: ModalitySpec) -> tuple[ModalitySpec, ModalitySpec]:
    """The optimistic (join) and pessimistic (meet) resolutions of `nor`."""
    if "nor" in q.rules:
        raise ModalityError(f"modality {q.name} already interprets nor")
    space = q.space

    def nor_join(node: Node, m: int, rec: Recurse):
        return space.join2(rec(child_at(node.children, 0), m), rec(child_at(node.children, 1), m))

    def nor_meet(node: Node, m: int, rec: Recurse):
        return space.meet2(rec(child_at(node.children, 0), m), rec(child_at(node.children, 1), m))

    opt = replace(q, name=q.name + "opt", rules={**q.rules, "nor": OpRule(nor_join)})
    pes = replace(q, name=q.name + "pes", rules={**q.rules, "nor": OpRule(nor_meet)})
    return opt, pes


def make_error_lift(
    q: ModalitySpec, f: Mapping[str, Any], error_labels: tuple[str, ...]
) -> ModalitySpec:
    """q_f: inherit q's rules and value each raise[e] node at f(e).

    The returned spec records whether f's range lies in {bot, top}; only those
    lifts are blind to effects already performed before the error.
    """
    for e in error_labels:
        if e not in f:
            raise ModalityError(f"error valuation is not total: missing label {e}")
    for e, v in f.items():
        if not q.space.contains(v):
            raise ModalityError(f"error value for {e} is outside the truth space: {v!r}")
    rules = dict(q.rules)
    for e in error_labels:
        op = f"raise[{e}]"
        if op in rules:
            raise ModalityError(f"modality {q.name} already interprets {op}")
        v = f[e]
        rules[op] = OpRule(lambda node, m, rec, v=v: v)
    two_valued = all(f[e] in (q.space.bot, q.space.top) for e in error_labels)
    return replace(q, name=q.name + "f", rules=rules, two_valued_errors=two_valued)


def boolean_modality(space, ops: tuple[str, ...], mode: str, name: str = "") -> ModalitySpec:
    """A Boolean may/must modality: join (may) or meet (must) at each listed
    binary operator.  Used by the exhaustive relator law checks."""
    combine = space.join2 if mode == "may" else space.meet2

    def mk(op):
        def fn(node: Node, m: int, rec: Recurse):
            vals = [rec(child_at(node.children, i), m) for i in range(len(node.children))]
            out = space.bot if mode == "may" else space.top
            for v in vals:
                out = combine(out, v)
            return out

        return OpRule(fn)

    return ModalitySpec(name or mode, space, {op: mk(op) for op in ops})
