"""Run configuration: signature selection, truth-space parameters, and the
wiring of both into an executable runtime.

The configuration document is key-value text (one `key = value` per line,
`#` comments).  Recognized keys:

    signature       = prob | store | prob+store | cost  (+nondet, +error)
    truth_space     = auto | bool | unit | stateset | statetable | cost
    locations       = [l, r]
    value_bound     = 3
    errors          = [e1, e2]
    error_valuation.<q>.<e> = <truth value>   # e.g. states{l=1}, 0.5, top
    tolerance       = 1e-9
    explore_width   = 16
    fuel            = 16
    suite_size      = 3
    seed            = 0
    numerals        = [0, 1, 7]

Flags given on the command line win over file values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

from .formulas import FormulaParser
from .lattice import (
    BoolSpace,
    CostSpace,
    StateSetSpace,
    StateTableSpace,
    StoreConfig,
    TruthSpace,
    UnitIntervalSpace,
)
from .modality import (
    ModalitySpec,
    boolean_modality,
    cost_modality,
    expectation_modality,
    make_error_lift,
    make_nondet_variants,
    prob_store_modality,
    store_modality,
)
from .syntax import (
    CbpvError,
    EffectSignature,
    FiniteArity,
    NatIndexed,
    NatParam,
    OpDescriptor,
)


class ConfigError(CbpvError):
    pass


_BASES = ("prob", "store", "prob+store", "cost")


@dataclass(frozen=True)
class RunConfig:
    signature: str = "prob"
    truth_space: str = "auto"
    locations: tuple[str, ...] = ("l", "r")
    value_bound: int = 3
    errors: tuple[str, ...] = ("e",)
    error_valuations: tuple[tuple[str, str, str], ...] = ()  # (modality, label, literal)
    tolerance: float = 1e-9
    explore_width: int = 16
    fuel: int = 16
    suite_size: int = 3
    seed: int = 0
    numerals: tuple[int, ...] = (0, 1, 7)

    def parts(self) -> tuple[str, bool, bool]:
        """Split the signature selector into (base, nondet, error)."""
        chunks = self.signature.split("+")
        nondet = "nondet" in chunks
        error = "error" in chunks
        base = "+".join(c for c in chunks if c not in ("nondet", "error"))
        if base not in _BASES:
            raise ConfigError(
                f"unknown signature {self.signature!r}; base must be one of {_BASES}"
            )
        return base, nondet, error


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    updates: dict[str, Any] = {}
    valuations: list[tuple[str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith("error_valuation."):
            rest = key[len("error_valuation.") :]
            if "." not in rest:
                raise ConfigError(f"line {lineno}: error_valuation.<q>.<e> expected")
            q, _, e = rest.partition(".")
            valuations.append((q, e, value))
        elif key == "signature":
            updates["signature"] = value
        elif key == "truth_space":
            updates["truth_space"] = value
        elif key == "locations":
            updates["locations"] = tuple(_parse_list(value, lineno))
        elif key == "errors":
            updates["errors"] = tuple(_parse_list(value, lineno))
        elif key == "value_bound":
            updates["value_bound"] = int(value)
        elif key == "explore_width":
            updates["explore_width"] = int(value)
        elif key == "fuel":
            updates["fuel"] = int(value)
        elif key == "suite_size":
            updates["suite_size"] = int(value)
        elif key == "seed":
            updates["seed"] = int(value)
        elif key == "tolerance":
            updates["tolerance"] = float(value)
        elif key == "numerals":
            updates["numerals"] = tuple(int(x) for x in _parse_list(value, lineno))
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if valuations:
        updates["error_valuations"] = tuple(valuations)
    return replace(cfg, **updates)


def _parse_list(value: str, lineno: int) -> list[str]:
    value = value.strip()
    if not (value.startswith("[") and value.endswith("]")):
        raise ConfigError(f"line {lineno}: expected a [a, b] list")
    inner = value[1:-1].strip()
    if not inner:
        return []
    return [x.strip() for x in inner.split(",")]


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# --------------------------------------------------------------------------
# Runtime


@dataclass
class Runtime:
    config: RunConfig
    signature: EffectSignature
    space: TruthSpace
    modalities: dict[str, ModalitySpec]
    store: Optional[StoreConfig]

    @property
    def width(self) -> int:
        return self.config.explore_width


def build_signature(cfg: RunConfig) -> EffectSignature:
    base, nondet, error = cfg.parts()
    ops: list[OpDescriptor] = []
    if base in ("prob", "prob+store"):
        ops.append(OpDescriptor("por", FiniteArity(2)))
    if base in ("store", "prob+store"):
        for loc in cfg.locations:
            ops.append(OpDescriptor(f"lookup[{loc}]", NatIndexed()))
            ops.append(OpDescriptor(f"update[{loc}]", NatParam(1)))
    if base == "cost":
        ops.append(OpDescriptor("cost", NatParam(1)))
    if nondet:
        ops.append(OpDescriptor("nor", FiniteArity(2)))
    if error:
        for e in cfg.errors:
            ops.append(OpDescriptor(f"raise[{e}]", FiniteArity(0)))
    return EffectSignature(ops, name=cfg.signature)


def build_runtime(cfg: RunConfig) -> Runtime:
    base, nondet, error = cfg.parts()
    signature = build_signature(cfg)
    store = None
    if base in ("store", "prob+store"):
        store = StoreConfig(cfg.locations, cfg.value_bound)
        if cfg.explore_width < cfg.value_bound:
            raise ConfigError(
                f"explore_width {cfg.explore_width} is below value_bound {cfg.value_bound}; "
                f"store lookups would hit unexpanded children"
            )

    space: TruthSpace
    auto = cfg.truth_space in ("auto", "")
    if not auto and cfg.truth_space == "bool":
        space = BoolSpace()
        mods = {
            "may": boolean_modality(space, _binary_ops(signature), "may", "may"),
            "must": boolean_modality(space, _binary_ops(signature), "must", "must"),
        }
        return Runtime(cfg, signature, space, mods, store)

    if base == "prob":
        space = UnitIntervalSpace()
        bases = [expectation_modality()]
    elif base == "store":
        space = StateSetSpace(store)
        bases = [store_modality(space)]
    elif base == "prob+store":
        space = StateTableSpace(store)
        bases = [prob_store_modality(space)]
    else:
        space = CostSpace()
        bases = [cost_modality()]

    if not auto and cfg.truth_space != space.name:
        raise ConfigError(
            f"truth_space {cfg.truth_space!r} is inconsistent with signature "
            f"{cfg.signature!r} (expected {space.name!r})"
        )

    mods: dict[str, ModalitySpec] = {}
    if nondet:
        for q in bases:
            opt, pes = make_nondet_variants(q)
            mods[opt.name] = opt
            mods[pes.name] = pes
    else:
        for q in bases:
            mods[q.name] = q

    if error:
        lifted: dict[str, ModalitySpec] = {}
        for name, q in mods.items():
            f = _error_valuation(cfg, name, space)
            lifted[name + "f"] = make_error_lift(q, f, cfg.errors)
        mods.update(lifted)
    return Runtime(cfg, signature, space, mods, store)


def _binary_ops(signature: EffectSignature) -> tuple[str, ...]:
    return tuple(
        d.name for d in signature if isinstance(d.arity, FiniteArity) and d.arity.n == 2
    )


def _error_valuation(cfg: RunConfig, modality: str, space: TruthSpace) -> dict[str, Any]:
    out = {e: space.bot for e in cfg.errors}
    for q, e, literal in cfg.error_valuations:
        if q != modality:
            continue
        if e not in out:
            raise ConfigError(f"error_valuation names unknown error label {e!r}")
        out[e] = parse_truth_value(literal, space)
    return out


def parse_truth_value(literal: str, space: TruthSpace) -> Any:
    p = FormulaParser(literal, EffectSignature(()), space)
    v = p.truth_value()
    t = p.peek()
    if t.kind != "eof":
        raise ConfigError(f"trailing input in truth value {literal!r}")
    if not space.contains(v):
        raise ConfigError(f"value {literal!r} is outside the {space.name} space")
    return v
