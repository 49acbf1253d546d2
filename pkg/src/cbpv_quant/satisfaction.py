"""The satisfaction evaluator: how much does a term satisfy a formula.

Results are certified intervals.  Modal formulas evaluate the term's effect
tree at the given fuel and run the leaf valuation twice, a lower and an upper
pass; leaf-monotonicity of the shipped modalities makes the sandwich sound.
On recursion-free programs with complete families every result is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formulas import (
    AndF,
    ArgF,
    ConstF,
    Family,
    Formula,
    FormulaTypeError,
    FstF,
    InjF,
    MixF,
    Modal,
    NatEq,
    NegF,
    OrF,
    ProjF,
    SigmaMuF,
    SndF,
    StepF,
    ThunkF,
    check_formula,
    is_positive,
)
from .lattice import StateSetSpace, StateTableSpace, TruthSpace
from .machine import eval_tree
from .modality import Interval, ModalitySpec, evaluate_interval, exact_interval
from .syntax import (
    Apply,
    CbpvError,
    ComTerm,
    EffectSignature,
    Force,
    GenTerm,
    Inj,
    Pair,
    Proj,
    Return,
    numeral_value,
)
from .typecheck import EMPTY, infer_type


class SatisfactionError(CbpvError):
    pass


@dataclass(frozen=True)
class SatResult:
    interval: Interval
    positive_fragment: bool
    fuel_used: int


class Satisfier:
    def __init__(
        self,
        signature: EffectSignature,
        modalities: dict[str, ModalitySpec],
        space: TruthSpace,
        width: int = 16,
    ):
        self.sig = signature
        self.modalities = modalities
        self.space = space
        self.width = width

    def satisfies(self, term: GenTerm, phi: Formula, fuel: int) -> SatResult:
        """Evaluate `term |= phi` at the given fuel.

        The term's synthesized type must match the formula's type.
        """
        if fuel < 1:
            raise SatisfactionError("fuel must be positive")
        ty = infer_type(EMPTY, term, self.sig)
        check_formula(phi, ty, self.modalities, self.space, self.sig)
        iv = self._eval(term, phi, fuel)
        return SatResult(iv, is_positive(phi), fuel)

    # ---- structural evaluation; typing is established before entry

    def _eval(self, term: GenTerm, phi: Formula, fuel: int) -> Interval:
        space = self.space
        if isinstance(phi, NatEq):
            return exact_interval(space.top if numeral_value(term) == phi.n else space.bot)
        if isinstance(phi, ThunkF):
            return self._eval(Force(term), phi.body, fuel)
        if isinstance(phi, InjF):
            assert isinstance(term, Inj)
            if term.label != phi.label:
                return exact_interval(space.bot)
            return self._eval(term.arg, phi.body, fuel)
        if isinstance(phi, FstF):
            assert isinstance(term, Pair)
            return self._eval(term.fst, phi.body, fuel)
        if isinstance(phi, SndF):
            assert isinstance(term, Pair)
            return self._eval(term.snd, phi.body, fuel)
        if isinstance(phi, ArgF):
            return self._eval(Apply(term, phi.arg), phi.body, fuel)
        if isinstance(phi, ProjF):
            return self._eval(Proj(term, phi.label), phi.body, fuel)
        if isinstance(phi, Modal):
            return self._modal(term, self.modalities[phi.modality], phi.body, fuel)
        if isinstance(phi, OrF):
            return self._family(term, phi.family, fuel, is_or=True)
        if isinstance(phi, AndF):
            return self._family(term, phi.family, fuel, is_or=False)
        if isinstance(phi, StepF):
            r = self._eval(term, phi.body, fuel)
            a = phi.threshold
            if space.leq(a, r.lo):
                return exact_interval(space.top)
            if not space.leq(a, r.hi):
                return exact_interval(space.bot)
            return Interval(space.bot, space.top, False)
        if isinstance(phi, ConstF):
            return exact_interval(phi.value)
        if isinstance(phi, NegF):
            r = self._eval(term, phi.body, fuel)
            return Interval(space.neg(r.hi), space.neg(r.lo), r.exact)
        if isinstance(phi, SigmaMuF):
            return self._sigma_mu(term, phi, fuel)
        if isinstance(phi, MixF):
            a = self._eval(term, phi.opt, fuel)
            b = self._eval(term, phi.pess, fuel)
            lo = (a.lo + b.lo) / 2.0
            hi = (a.hi + b.hi) / 2.0
            return Interval(lo, hi, lo == hi)
        raise FormulaTypeError(f"unknown formula {phi!r}")

    def _modal(self, term: ComTerm, q: ModalitySpec, body: Formula, fuel: int) -> Interval:
        tree = eval_tree(term, fuel, self.sig, self.width)
        cache: dict = {}

        def leaf_interval(leaf) -> Interval:
            got = cache.get(leaf)
            if got is None:
                if not isinstance(leaf, Return):
                    raise SatisfactionError(
                        f"modal formula over a non-producing terminal {leaf}"
                    )
                got = self._eval(leaf.value, body, fuel)
                cache[leaf] = got
            return got

        return evaluate_interval(
            q,
            tree,
            leaf_lo=lambda x: leaf_interval(x).lo,
            leaf_hi=lambda x: leaf_interval(x).hi,
        )

    def _family(self, term: GenTerm, fam: Family, fuel: int, is_or: bool) -> Interval:
        space = self.space
        los, his = [], []
        for p in fam.enumerate():
            iv = self._eval(term, p, fuel)
            los.append(iv.lo)
            his.append(iv.hi)
        if is_or:
            lo, hi = space.join(los), space.join(his)
            if not fam.complete:
                hi = space.top
        else:
            lo, hi = space.meet(los), space.meet(his)
            if not fam.complete:
                lo = space.bot
        return Interval(lo, hi, lo == hi)

    def _sigma_mu(self, term: GenTerm, phi: SigmaMuF, fuel: int) -> Interval:
        space = self.space
        assert isinstance(space, StateTableSpace)
        r = self._eval(term, phi.body, fuel)

        def mixed(table):
            v = min(1.0, sum(w * x for w, x in zip(phi.weights, table)))
            return tuple(v for _ in space.all_states)

        lo, hi = mixed(r.lo), mixed(r.hi)
        return Interval(lo, hi, lo == hi)


def satisfies_exact(
    satisfier: Satisfier,
    term: GenTerm,
    phi: Formula,
    fuel: int,
    fuel_cap: int = 4096,
) -> SatResult:
    """Retry with doubled fuel until the result is exact or the cap is hit;
    divergent programs surface as an inexact result at the cap, never a hang."""
    while True:
        res = satisfier.satisfies(term, phi, fuel)
        if res.interval.exact or fuel >= fuel_cap:
            return res
        fuel = min(fuel * 2, fuel_cap)


# --------------------------------------------------------------------------
# Derived formula constructors


def hoare(pre: frozenset, post: frozenset, space: TruthSpace) -> Formula:
    """A Hoare-style formula: top iff execution from any state in `pre`
    terminates in a state from `post`."""
    if not isinstance(space, StateSetSpace):
        raise FormulaTypeError("Hoare formulas need the powerset-of-states space")
    if not space.contains(pre) or not space.contains(post):
        raise FormulaTypeError("pre/post conditions must be state sets")
    return StepF(Modal("G", ConstF(post)), pre)


def sigma_mu(weights, phi: Formula, space: TruthSpace) -> Formula:
    """Weighted-sum formula over a sub-distribution of starting states."""
    if not isinstance(space, StateTableSpace):
        raise FormulaTypeError("weighted sums need the state-table space")
    ws = tuple(float(w) for w in weights)
    if len(ws) != len(space.all_states):
        raise FormulaTypeError("weight vector does not match the state space")
    if any(w < 0 for w in ws):
        raise FormulaTypeError("weights must be non-negative")
    return SigmaMuF(ws, phi)


def scheduler_mix(phi_opt: Formula, phi_pess: Formula, space: TruthSpace) -> Formula:
    """Average of an optimistic and a pessimistic satisfaction degree, i.e. a
    half-helpful half-antagonistic scheduler."""
    if space.name != "unit":
        raise FormulaTypeError("scheduler mixes need the unit-interval space")
    return MixF(phi_opt, phi_pess)


def scheduler_mix_grid(phi_opt: Formula, phi_pess: Formula, steps: int = 64) -> Formula:
    """The countable-disjunction encoding of the scheduler mix, enumerated on
    a grid of thresholds; its lower bound approaches the native mix."""
    grid = [k / steps for k in range(steps + 1)]
    pairs = [(a, b) for a in grid for b in grid]

    def gen(i: int) -> Formula:
        a, b = pairs[i]
        return AndF(
            Family(
                members=(
                    StepF(phi_opt, a),
                    StepF(phi_pess, b),
                    ConstF((a + b) / 2.0),
                )
            )
        )

    return OrF(Family(generator=gen, bound=len(pairs), complete=False))
