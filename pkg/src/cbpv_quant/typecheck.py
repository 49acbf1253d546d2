"""Bidirectional type checker for the two term judgements.

Lambda binders carry full annotations, so synthesis is syntax-directed except
at injections and nullary effect operators, which only check; checking
positions (application arguments, return values against an expected producer
type, ...) recover those.
"""

from __future__ import annotations

from typing import Optional

from .syntax import (
    Apply,
    ArrowType,
    CaseNat,
    CasePair,
    CaseSum,
    CbpvError,
    ComTerm,
    ComType,
    EffOp,
    EffectSignature,
    FiniteArity,
    Fix,
    Force,
    GenTerm,
    GenType,
    Inj,
    Lambda,
    LetVal,
    NAT,
    NatIndexed,
    NatParam,
    Pair,
    PairType,
    ProducerType,
    ProductType,
    Proj,
    Record,
    Return,
    SeqTo,
    SumType,
    Thunk,
    ThunkType,
    UNIT,
    UnitVal,
    ValTerm,
    ValType,
    Var,
    Zero,
    Succ,
)


class TypeCheckError(CbpvError):
    def __init__(self, message: str, rule: str = ""):
        super().__init__(message if not rule else f"[{rule}] {message}")
        self.rule = rule


class Context:
    """An ordered typing context of value-typed variables with distinct names."""

    def __init__(self, entries: tuple[tuple[str, ValType], ...] = ()):
        self.entries = entries
        self._map = dict(entries)
        if len(self._map) != len(entries):
            raise TypeCheckError("context names must be distinct", "ctx")

    def lookup(self, name: str) -> Optional[ValType]:
        return self._map.get(name)

    def extend(self, name: str, ty: ValType) -> "Context":
        kept = tuple((n, t) for n, t in self.entries if n != name)
        return Context(kept + ((name, ty),))

    def __repr__(self):
        return "Context(" + ", ".join(f"{n}: {t}" for n, t in self.entries) + ")"


EMPTY = Context()


class TypeChecker:
    def __init__(self, signature: EffectSignature):
        self.sig = signature

    # ---- value terms

    def infer_val(self, ctx: Context, v: ValTerm) -> ValType:
        if isinstance(v, UnitVal):
            return UNIT
        if isinstance(v, Zero):
            return NAT
        if isinstance(v, Succ):
            self.check_val(ctx, v.arg, NAT)
            return NAT
        if isinstance(v, Var):
            ty = ctx.lookup(v.name)
            if ty is None:
                raise TypeCheckError(f"unbound variable {v.name}", "var")
            return ty
        if isinstance(v, Thunk):
            return ThunkType(self.infer_com(ctx, v.com))
        if isinstance(v, Pair):
            return PairType(self.infer_val(ctx, v.fst), self.infer_val(ctx, v.snd))
        if isinstance(v, Inj):
            raise TypeCheckError(
                f"cannot synthesize a sum type for inj {v.label}; "
                f"use it in a checking position (e.g. as a function argument)",
                "inj",
            )
        raise TypeCheckError(f"unknown value term {v!r}")

    def check_val(self, ctx: Context, v: ValTerm, ty: ValType) -> None:
        if isinstance(v, Inj):
            if not isinstance(ty, SumType):
                raise TypeCheckError(f"inj {v.label} checked against non-sum type {ty}", "inj")
            comp = ty.label_type(v.label)
            if comp is None:
                raise TypeCheckError(f"label {v.label} not in {ty}", "inj")
            self.check_val(ctx, v.arg, comp)
            return
        if isinstance(v, Thunk) and isinstance(ty, ThunkType):
            self.check_com(ctx, v.com, ty.com)
            return
        if isinstance(v, Pair) and isinstance(ty, PairType):
            self.check_val(ctx, v.fst, ty.fst)
            self.check_val(ctx, v.snd, ty.snd)
            return
        found = self.infer_val(ctx, v)
        if found != ty:
            raise TypeCheckError(f"expected {ty}, found {found} for {v}", "check")

    # ---- computation terms

    def infer_com(self, ctx: Context, m: ComTerm) -> ComType:
        if isinstance(m, Return):
            return ProducerType(self.infer_val(ctx, m.value))
        if isinstance(m, SeqTo):
            mt = self.infer_com(ctx, m.com)
            if not isinstance(mt, ProducerType):
                raise TypeCheckError(f"`to` sequences a producer, found {mt}", "to")
            return self.infer_com(ctx.extend(m.binder, mt.val), m.body)
        if isinstance(m, Force):
            vt = self.infer_val(ctx, m.value)
            if not isinstance(vt, ThunkType):
                raise TypeCheckError(f"force expects a thunk, found {vt}", "force")
            return vt.com
        if isinstance(m, Lambda):
            return ArrowType(m.dom, self.infer_com(ctx.extend(m.binder, m.dom), m.body))
        if isinstance(m, Apply):
            ft = self.infer_com(ctx, m.com)
            if not isinstance(ft, ArrowType):
                raise TypeCheckError(f"{ft} is not an arrow type; cannot apply", "app")
            self.check_val(ctx, m.arg, ft.dom)
            return ft.cod
        if isinstance(m, LetVal):
            vt = self.infer_val(ctx, m.value)
            return self.infer_com(ctx.extend(m.binder, vt), m.body)
        if isinstance(m, CaseNat):
            self.check_val(ctx, m.scrutinee, NAT)
            return self._shared_branch_type(
                "case",
                [(ctx, m.zero_branch), (ctx.extend(m.succ_binder, NAT), m.succ_branch)],
            )
        if isinstance(m, CaseSum):
            st = self.infer_val(ctx, m.scrutinee)
            if not isinstance(st, SumType):
                raise TypeCheckError(f"pm over non-sum type {st}", "pm-sum")
            labels = [l for l, _, _ in m.branches]
            expected = [l for l, _ in st.variants]
            if sorted(labels) != sorted(expected):
                raise TypeCheckError(
                    f"branches {labels} do not cover the sum labels {expected}", "pm-sum"
                )
            return self._shared_branch_type(
                "pm-sum",
                [(ctx.extend(x, st.label_type(l)), body) for l, x, body in m.branches],
            )
        if isinstance(m, CasePair):
            st = self.infer_val(ctx, m.scrutinee)
            if not isinstance(st, PairType):
                raise TypeCheckError(f"pm over non-pair type {st}", "pm-pair")
            bctx = ctx.extend(m.fst_binder, st.fst).extend(m.snd_binder, st.snd)
            return self.infer_com(bctx, m.body)
        if isinstance(m, Record):
            return ProductType(tuple((l, self.infer_com(ctx, body)) for l, body in m.fields))
        if isinstance(m, Proj):
            pt = self.infer_com(ctx, m.com)
            if not isinstance(pt, ProductType):
                raise TypeCheckError(f"projection from non-product type {pt}", "proj")
            comp = pt.label_type(m.label)
            if comp is None:
                raise TypeCheckError(f"label {m.label} not in {pt}", "proj")
            return comp
        if isinstance(m, Fix):
            ft = self.infer_com(ctx, m.com)
            if (
                not isinstance(ft, ArrowType)
                or not isinstance(ft.dom, ThunkType)
                or ft.dom.com != ft.cod
            ):
                raise TypeCheckError(
                    f"fix expects an argument of type U C -> C, found {ft}", "fix"
                )
            return ft.cod
        if isinstance(m, EffOp):
            return self._infer_effop(ctx, m)
        raise TypeCheckError(f"unknown computation term {m!r}")

    def check_com(self, ctx: Context, m: ComTerm, ty: ComType) -> None:
        if isinstance(m, Return):
            if not isinstance(ty, ProducerType):
                raise TypeCheckError(f"return checked against non-producer type {ty}", "return")
            self.check_val(ctx, m.value, ty.val)
            return
        if isinstance(m, Lambda):
            if not isinstance(ty, ArrowType):
                raise TypeCheckError(f"lambda checked against non-arrow type {ty}", "lam")
            if m.dom != ty.dom:
                raise TypeCheckError(
                    f"lambda annotation {m.dom} differs from expected domain {ty.dom}", "lam"
                )
            self.check_com(ctx.extend(m.binder, m.dom), m.body, ty.cod)
            return
        if isinstance(m, SeqTo):
            mt = self.infer_com(ctx, m.com)
            if not isinstance(mt, ProducerType):
                raise TypeCheckError(f"`to` sequences a producer, found {mt}", "to")
            self.check_com(ctx.extend(m.binder, mt.val), m.body, ty)
            return
        if isinstance(m, LetVal):
            vt = self.infer_val(ctx, m.value)
            self.check_com(ctx.extend(m.binder, vt), m.body, ty)
            return
        if isinstance(m, CaseNat):
            self.check_val(ctx, m.scrutinee, NAT)
            self.check_com(ctx, m.zero_branch, ty)
            self.check_com(ctx.extend(m.succ_binder, NAT), m.succ_branch, ty)
            return
        if isinstance(m, CaseSum):
            st = self.infer_val(ctx, m.scrutinee)
            if not isinstance(st, SumType):
                raise TypeCheckError(f"pm over non-sum type {st}", "pm-sum")
            labels = [l for l, _, _ in m.branches]
            expected = [l for l, _ in st.variants]
            if sorted(labels) != sorted(expected):
                raise TypeCheckError(
                    f"branches {labels} do not cover the sum labels {expected}", "pm-sum"
                )
            for l, x, body in m.branches:
                self.check_com(ctx.extend(x, st.label_type(l)), body, ty)
            return
        if isinstance(m, CasePair):
            st = self.infer_val(ctx, m.scrutinee)
            if not isinstance(st, PairType):
                raise TypeCheckError(f"pm over non-pair type {st}", "pm-pair")
            self.check_com(ctx.extend(m.fst_binder, st.fst).extend(m.snd_binder, st.snd), m.body, ty)
            return
        if isinstance(m, Record):
            if not isinstance(ty, ProductType):
                raise TypeCheckError(f"record checked against non-product type {ty}", "record")
            have = sorted(l for l, _ in m.fields)
            want = sorted(l for l, _ in ty.fields)
            if have != want:
                raise TypeCheckError(f"record labels {have} do not match {want}", "record")
            for l, body in m.fields:
                self.check_com(ctx, body, ty.label_type(l))
            return
        if isinstance(m, Force) and isinstance(m.value, Thunk):
            self.check_com(ctx, m.value.com, ty)
            return
        if isinstance(m, Apply) and isinstance(m.com, Lambda):
            self.check_val(ctx, m.arg, m.com.dom)
            self.check_com(ctx.extend(m.com.binder, m.com.dom), m.com.body, ty)
            return
        if isinstance(m, Proj) and isinstance(m.com, Record):
            body = m.com.field(m.label)
            if body is None:
                raise TypeCheckError(f"label {m.label} not in record", "proj")
            self.check_com(ctx, body, ty)
            return
        if isinstance(m, Fix):
            self.check_com(ctx, m.com, ArrowType(ThunkType(ty), ty))
            return
        if isinstance(m, EffOp):
            desc = self._descriptor(m)
            self._check_effop_shape(ctx, m, desc)
            if m.body is not None:
                self.check_com(ctx.extend(m.binder, NAT), m.body, ty)
            for c in m.children:
                self.check_com(ctx, c, ty)
            return
        found = self.infer_com(ctx, m)
        if found != ty:
            raise TypeCheckError(f"expected {ty}, found {found} for {m}", "check")

    # ---- effect operators

    def _descriptor(self, m: EffOp):
        desc = self.sig.get(m.op)
        if desc is None:
            raise TypeCheckError(f"unknown effect operator {m.op} for the active signature", "op")
        return desc

    def _check_effop_shape(self, ctx: Context, m: EffOp, desc) -> None:
        arity = desc.arity
        if isinstance(arity, NatIndexed):
            if m.body is None or m.param is not None or m.children:
                raise TypeCheckError(f"{m.op} expects one nat-indexed child", "op")
        elif isinstance(arity, NatParam):
            if m.param is None or m.body is not None or len(m.children) != arity.n:
                raise TypeCheckError(
                    f"{m.op} expects a nat parameter and {arity.n} children", "op"
                )
            self.check_val(ctx, m.param, NAT)
        else:
            assert isinstance(arity, FiniteArity)
            if m.param is not None or m.body is not None or len(m.children) != arity.n:
                raise TypeCheckError(f"{m.op} expects exactly {arity.n} children", "op")

    def _infer_effop(self, ctx: Context, m: EffOp) -> ComType:
        desc = self._descriptor(m)
        self._check_effop_shape(ctx, m, desc)
        if m.body is not None:
            return self.infer_com(ctx.extend(m.binder, NAT), m.body)
        return self._shared_branch_type("op", [(ctx, c) for c in m.children], label=m.op)

    def _shared_branch_type(
        self,
        rule: str,
        branches: list[tuple[Context, ComTerm]],
        label: str = "",
    ) -> ComType:
        """The common type of sibling computations: try every type that some
        branch synthesizes, then check all branches against it.  Nullary
        effect nodes synthesize nothing, so an all-nullary sibling set
        defaults to F unit."""
        candidates: list[ComType] = []
        for bctx, c in branches:
            try:
                t = self.infer_com(bctx, c)
            except TypeCheckError:
                continue
            if t not in candidates:
                candidates.append(t)
        if not candidates:
            candidates = [ProducerType(UNIT)]
        last_err: Optional[TypeCheckError] = None
        for ty in candidates:
            try:
                for bctx, c in branches:
                    self.check_com(bctx, c, ty)
                return ty
            except TypeCheckError as e:
                last_err = e
        raise TypeCheckError(
            f"branches of {label or rule} do not share a type "
            f"(candidates {', '.join(map(str, candidates))}): {last_err}",
            rule,
        )


def infer_type(ctx: Context, term: GenTerm, signature: EffectSignature) -> GenType:
    """Synthesize the type of a value or computation term under `ctx`."""
    tc = TypeChecker(signature)
    if isinstance(term, ValTerm):
        return tc.infer_val(ctx, term)
    return tc.infer_com(ctx, term)


def check_type(ctx: Context, term: GenTerm, ty: GenType, signature: EffectSignature) -> None:
    tc = TypeChecker(signature)
    if isinstance(term, ValTerm):
        if not isinstance(ty, ValType):
            raise TypeCheckError(f"value term checked against computation type {ty}")
        tc.check_val(ctx, term, ty)
    else:
        if not isinstance(ty, ComType):
            raise TypeCheckError(f"computation term checked against value type {ty}")
        tc.check_com(ctx, term, ty)
