"""Randomized and exhaustive law suites for the modality metatheory.

Laws checked:
  a. leaf-monotonicity: raising leaf values raises the denotation;
  b. Scott chains: denotations along a truncation chain grow monotonically
     and reach the full tree's denotation;
  c. sequentiality: flattening a double tree commutes with denotation;
  d. unit: the denotation of a single leaf is its value;
  e. the four relator laws, exhausted over small Boolean carriers;
  f. decomposability consequence: flattening preserves the certified
     double-tree order on sampled valuation families;
  g. congruence spot-checks: pairs equivalent at bounds stay undistinguished
     under random program contexts.

All randomness is seeded; failures carry a rendering of the counterexample.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .config import Runtime
from .equivalence import compare, Distinguished, right_set
from .lattice import BoolSpace, StateSetSpace, StateTableSpace, StoreConfig
from .modality import (
    ModalitySpec,
    boolean_modality,
    cost_modality,
    denote_interval,
    denote_limit,
    expectation_modality,
    make_nondet_variants,
    prob_store_modality,
    store_modality,
)
from .satisfaction import Satisfier
from .suites import Pools, enumerate_basic_formulas
from .syntax import (
    Apply,
    ComTerm,
    EffOp,
    FiniteArity,
    Force,
    Lambda,
    LetVal,
    NAT,
    ProducerType,
    Return,
    SeqTo,
    Thunk,
    Var,
    numeral,
)
from .trees import EffectTree, Leaf, Node, Unknown, eta, map_leaves, mu, tree_depth, truncate
from .typecheck import EMPTY, infer_type


@dataclass(frozen=True)
class LawParams:
    samples: int = 1000
    seed: int = 0
    depth: int = 4
    tolerance: float = 1e-9


@dataclass(frozen=True)
class LawResult:
    law: str
    subject: str
    runs: int
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        out = f"law {self.law} [{self.subject}]: {status} ({self.runs} checks)"
        if self.failures:
            out += f" first failure: {self.failures[0]}"
        return out


@dataclass
class LawReport:
    results: list[LawResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


# --------------------------------------------------------------------------
# Random trees over a modality's operator set


def _op_shapes(q: ModalitySpec) -> list[tuple[str, str, int]]:
    shapes = []
    for op, rule in q.rules.items():
        if rule.family_consult is not None:
            shapes.append((op, "indexed", rule.family_consult))
        elif op == "cost" or op.startswith("update["):
            shapes.append((op, "param", 1))
        elif op.startswith("raise["):
            shapes.append((op, "nullary", 0))
        else:
            shapes.append((op, "finite", 2))
    return shapes


def random_value_tree(
    q: ModalitySpec,
    rng: random.Random,
    depth: int,
    leaf: Callable[[], object],
    p_unknown: float = 0.1,
) -> EffectTree:
    """A random finite tree over q's operators (indexed children materialized
    as width-V tuples) with sampled leaf payloads and occasional Unknowns."""
    shapes = _op_shapes(q)
    if depth <= 0 or not shapes or rng.random() < 0.3:
        if rng.random() < p_unknown:
            return Unknown
        return Leaf(leaf())
    op, kind, extra = shapes[rng.randrange(len(shapes))]
    rec = lambda: random_value_tree(q, rng, depth - 1, leaf, p_unknown)
    if kind == "finite":
        return Node(op, (rec(), rec()))
    if kind == "param":
        return Node(op, (rec(),), param=rng.randrange(4))
    if kind == "nullary":
        return Node(op, ())
    return Node(op, tuple(rec() for _ in range(extra)))


# --------------------------------------------------------------------------
# Laws a-d and f (per modality)


def law_leaf_monotone(q: ModalitySpec, params: LawParams) -> LawResult:
    rng = random.Random(params.seed)
    space = q.space
    failures = []
    for i in range(params.samples):
        t = random_value_tree(q, rng, params.depth, lambda: space.sample(rng))
        raised = map_leaves(t, lambda a: space.raise_of(rng, a))
        lo, hi = denote_limit(q, t), denote_limit(q, raised)
        if not space.leq(lo, hi):
            failures.append(f"sample {i}: {space.render(lo)} not below {space.render(hi)}")
    return LawResult("a (leaf-monotone)", q.name, params.samples, tuple(failures))


def law_scott_chain(q: ModalitySpec, params: LawParams) -> LawResult:
    rng = random.Random(params.seed + 1)
    space = q.space
    failures = []
    for i in range(params.samples):
        t = random_value_tree(q, rng, params.depth, lambda: space.sample(rng), p_unknown=0.0)
        chain = [truncate(t, k) for k in range(tree_depth(t) + 2)]
        vals = [denote_limit(q, tk) for tk in chain]
        for a, b in zip(vals, vals[1:]):
            if not space.leq(a, b):
                failures.append(f"sample {i}: chain not monotone")
                break
        else:
            if vals[-1] != denote_limit(q, t):
                failures.append(f"sample {i}: chain does not reach the full denotation")
    return LawResult("b (Scott chain)", q.name, params.samples, tuple(failures))


def law_sequential(q: ModalitySpec, params: LawParams) -> LawResult:
    rng = random.Random(params.seed + 2)
    space = q.space
    failures = []
    inner_depth = max(1, params.depth - 2)
    for i in range(params.samples):
        tt = random_value_tree(
            q,
            rng,
            params.depth,
            lambda: random_value_tree(q, rng, inner_depth, lambda: space.sample(rng)),
        )
        lhs = denote_limit(q, mu(tt))
        rhs = denote_limit(q, map_leaves(tt, lambda sub: denote_limit(q, sub)))
        if not space.approx_eq(lhs, rhs, params.tolerance):
            failures.append(
                f"sample {i}: mu side {space.render(lhs)} vs mapped side {space.render(rhs)}"
            )
    return LawResult("c (sequential)", q.name, params.samples, tuple(failures))


def law_unit(q: ModalitySpec, params: LawParams) -> LawResult:
    rng = random.Random(params.seed + 3)
    space = q.space
    failures = []
    runs = min(params.samples, 100)
    for i in range(runs):
        a = space.sample(rng)
        iv = denote_interval(q, eta(a))
        if not (iv.exact and iv.lo == a):
            failures.append(f"sample {i}: eta({space.render(a)}) gave {space.render(iv.lo)}")
    return LawResult("d (unit)", q.name, runs, tuple(failures))


def law_decomposability(q: ModalitySpec, params: LawParams) -> LawResult:
    rng = random.Random(params.seed + 4)
    space = q.space
    failures = []
    runs = min(params.samples, 200)
    checked = 0
    for i in range(runs):
        tt = random_value_tree(
            q,
            rng,
            max(1, params.depth - 1),
            lambda: random_value_tree(q, rng, 2, lambda: space.sample(rng)),
        )
        rr = map_leaves(tt, lambda sub: map_leaves(sub, lambda a: space.raise_of(rng, a)))
        surrogates = space.monotone_maps(rng, 4)
        certified = True
        for h in surrogates:
            H = lambda sub, h=h: denote_limit(q, map_leaves(sub, h))
            lo = denote_limit(q, map_leaves(tt, H))
            hi = denote_limit(q, map_leaves(rr, H))
            if not space.leq(lo, hi):
                certified = False
                break
        if not certified:
            continue
        checked += 1
        for h in space.monotone_maps(rng, 4):
            lo = denote_limit(q, map_leaves(mu(tt), h))
            hi = denote_limit(q, map_leaves(mu(rr), h))
            if not space.leq(lo, hi):
                failures.append(f"sample {i}: flattening broke the certified order")
                break
    return LawResult("f (decomposability)", q.name, checked, tuple(failures))


# --------------------------------------------------------------------------
# Law e: relator laws over Boolean carriers, exhaustively


def _bool_modalities() -> dict[str, ModalitySpec]:
    space = BoolSpace()
    return {
        "may": boolean_modality(space, ("nor",), "may", "may"),
        "must": boolean_modality(space, ("nor",), "must", "must"),
    }


def _tree_pool(carrier: Sequence) -> list[EffectTree]:
    xs = list(carrier)
    pool: list[EffectTree] = [Unknown, Leaf(xs[0]), Leaf(xs[-1])]
    pool.append(Node("nor", (Leaf(xs[0]), Leaf(xs[-1]))))
    pool.append(Node("nor", (Node("nor", (Leaf(xs[0]), Unknown)), Leaf(xs[-1]))))
    return pool


def _o_rel(t, r, pairs, mods, space, memo=None) -> bool:
    """Exhaustive relator membership over a Boolean leaf carrier.

    Pool trees are total objects here: a bottom leaf denotes bot exactly, so
    membership uses exact denotations, not fuel intervals.
    """
    key = None
    if memo is not None:
        key = (frozenset(pairs), id(t), id(r))
        got = memo.get(key)
        if got is not None:
            return got
    out = True
    lefts = sorted({a for a, _ in pairs} | set(_leaf_set(t)))
    for bits in itertools.product((False, True), repeat=len(lefts)):
        h = dict(zip(lefts, bits))
        rh = right_set(pairs, h, space)
        for q in mods.values():
            lv = denote_limit(q, map_leaves(t, lambda x: h[x]))
            rv = denote_limit(q, map_leaves(r, rh))
            if not space.leq(lv, rv):
                out = False
                break
        if not out:
            break
    if memo is not None:
        memo[key] = out
    return out


def _leaf_set(t) -> list:
    from .trees import leaves

    return list(dict.fromkeys(leaves(t)))


def law_relator(max_carrier: int = 3) -> list[LawResult]:
    space = BoolSpace()
    mods = _bool_modalities()
    results = []

    # law 1: reflexive relations lift to reflexive relators
    runs, fails = 0, []
    memo: dict = {}
    for n in range(1, max_carrier + 1):
        carrier = list(range(n))
        ident = {(x, x) for x in carrier}
        off_diag = [(x, y) for x in carrier for y in carrier if x != y]
        for k in range(len(off_diag) + 1):
            for extra in itertools.combinations(off_diag, k):
                rel = ident | set(extra)
                for t in _tree_pool(carrier):
                    runs += 1
                    if not _o_rel(t, t, rel, mods, space, memo):
                        fails.append(f"reflexivity broke at carrier {n}, rel {sorted(rel)}")
    results.append(LawResult("e1 (relator reflexive)", "may/must", runs, tuple(fails)))

    # law 2: monotone in the relation
    runs, fails = 0, []
    memo = {}
    for nx, ny in ((2, 2), (3, 2)):
        X, Y = list(range(nx)), list(range(100, 100 + ny))
        cells = [(x, y) for x in X for y in Y]
        pool_x, pool_y = _tree_pool(X), _tree_pool(Y)
        for assignment in itertools.product((0, 1, 2), repeat=len(cells)):
            # 0: in neither, 1: in S only, 2: in both R and S  (so R subset of S)
            R = {c for c, a in zip(cells, assignment) if a == 2}
            S = {c for c, a in zip(cells, assignment) if a >= 1}
            for t, r in itertools.product(pool_x, pool_y):
                runs += 1
                if _o_rel(t, r, R, mods, space, memo) and not _o_rel(t, r, S, mods, space, memo):
                    fails.append(f"monotonicity broke: R={sorted(R)} S={sorted(S)}")
    results.append(LawResult("e2 (relator monotone)", "may/must", runs, tuple(fails)))

    # law 3: composition
    runs, fails = 0, []
    memo = {}
    X, Y, Z = [0, 1], [10, 11], [20, 21]
    cells_r = [(x, y) for x in X for y in Y]
    cells_s = [(y, z) for y in Y for z in Z]
    pool_x, pool_y, pool_z = _tree_pool(X), _tree_pool(Y), _tree_pool(Z)
    for rbits in itertools.product((0, 1), repeat=4):
        R = {c for c, b in zip(cells_r, rbits) if b}
        for sbits in itertools.product((0, 1), repeat=4):
            S = {c for c, b in zip(cells_s, sbits) if b}
            RS = {(x, z) for (x, y) in R for (y2, z) in S if y == y2}
            for t, u, r in itertools.product(pool_x, pool_y, pool_z):
                runs += 1
                if (
                    _o_rel(t, u, R, mods, space, memo)
                    and _o_rel(u, r, S, mods, space, memo)
                    and not _o_rel(t, r, RS, mods, space, memo)
                ):
                    fails.append(f"composition broke: R={sorted(R)} S={sorted(S)}")
    results.append(LawResult("e3 (relator composition)", "may/must", runs, tuple(fails)))

    # law 4: inverse images
    runs, fails = 0, []
    memo = {}
    X, Y, Z, W = [0, 1], [10, 11], [20, 21], [30, 31]
    pool_x, pool_y = _tree_pool(X), _tree_pool(Y)
    cells = [(z, w) for z in Z for w in W]
    for fbits in itertools.product(Z, repeat=2):
        f = dict(zip(X, fbits))
        for gbits in itertools.product(W, repeat=2):
            g = dict(zip(Y, gbits))
            for rbits in itertools.product((0, 1), repeat=4):
                R = {c for c, b in zip(cells, rbits) if b}
                pre = {(x, y) for x in X for y in Y if (f[x], g[y]) in R}
                for t, r in itertools.product(pool_x, pool_y):
                    runs += 1
                    lhs = _o_rel(t, r, pre, mods, space, memo)
                    rhs = _o_rel(
                        map_leaves(t, lambda x: f[x]), map_leaves(r, lambda y: g[y]), R, mods, space
                    )
                    if lhs != rhs:
                        fails.append(f"inverse image broke: f={f} g={g} R={sorted(R)}")
    results.append(LawResult("e4 (relator inverse image)", "may/must", runs, tuple(fails)))
    return results


# --------------------------------------------------------------------------
# Law g: congruence spot-check over a runtime


def _context_pool(runtime: Runtime, rng: random.Random) -> Callable[[ComTerm], ComTerm]:
    """A random context of depth at most 3 around a hole of type F nat."""

    def one_layer() -> Callable[[ComTerm], ComTerm]:
        choices = ["seq", "seq-pre", "thunk-force", "beta"]
        binary_ops = [
            d.name
            for d in runtime.signature
            if isinstance(d.arity, FiniteArity) and d.arity.n == 2
        ]
        if binary_ops:
            choices.append("effect")
        kind = rng.choice(choices)
        x = f"c{rng.randrange(1000)}"
        k = numeral(rng.randrange(3))
        if kind == "seq":
            return lambda m: SeqTo(m, x, Return(Var(x)))
        if kind == "seq-pre":
            return lambda m: SeqTo(Return(k), x, m)
        if kind == "thunk-force":
            return lambda m: Force(Thunk(m))
        if kind == "beta":
            return lambda m: Apply(Lambda(x, NAT, m), k)
        op = rng.choice(binary_ops)
        return lambda m: EffOp(op, None, (m, Return(k)))

    layers = [one_layer() for _ in range(rng.randrange(1, 4))]

    def ctx(m: ComTerm) -> ComTerm:
        for f in layers:
            m = f(m)
        return m

    return ctx


def _equivalent_pairs(runtime: Runtime, rng: random.Random) -> list[tuple[ComTerm, ComTerm]]:
    """Candidate pairs expected equivalent: syntactic identity, redex and
    contractum, argument swaps of the symmetric choice operators."""
    from .generators import generate_program

    sig = runtime.signature
    pairs: list[tuple[ComTerm, ComTerm]] = []
    for _ in range(6):
        m = generate_program(rng, sig, depth=2)
        pairs.append((m, m))
    for _ in range(6):
        m = generate_program(rng, sig, depth=2)
        pairs.append((Force(Thunk(m)), m))
        x = "w0"
        pairs.append((SeqTo(Return(numeral(2)), x, m), m))
        pairs.append((LetVal(x, numeral(1), m), m))
    binary_ops = [
        d.name for d in sig if isinstance(d.arity, FiniteArity) and d.arity.n == 2
    ]
    for op in binary_ops:
        for _ in range(4):
            a = generate_program(rng, sig, depth=1)
            b = generate_program(rng, sig, depth=1)
            pairs.append((EffOp(op, None, (a, b)), EffOp(op, None, (b, a))))
    return pairs


def law_congruence(
    runtime: Runtime,
    trials: int = 200,
    seed: int = 0,
    suite_size: int = 3,
    fuel: int = 16,
) -> LawResult:
    rng = random.Random(seed)
    sat = Satisfier(runtime.signature, runtime.modalities, runtime.space, runtime.width)
    pools = Pools(numerals=(0, 1, 2, 7))
    ty = ProducerType(NAT)
    suite = enumerate_basic_formulas(ty, suite_size, pools, runtime.modalities)
    candidates = [
        (m, n)
        for (m, n) in _equivalent_pairs(runtime, rng)
        if infer_type(EMPTY, m, runtime.signature) == ty
        and not isinstance(compare(m, n, suite, fuel, sat), Distinguished)
    ]
    failures = []
    runs = 0
    for i in range(trials):
        m, n = candidates[rng.randrange(len(candidates))]
        ctx = _context_pool(runtime, rng)
        cm, cn = ctx(m), ctx(n)
        if infer_type(EMPTY, cm, runtime.signature) != ty:
            continue
        runs += 1
        verdict = compare(cm, cn, suite, fuel, sat)
        if isinstance(verdict, Distinguished):
            failures.append(
                f"trial {i}: context distinguished {m} ~ {n} via {verdict.formula}"
            )
    return LawResult("g (congruence spot-check)", runtime.config.signature, runs, tuple(failures))


# --------------------------------------------------------------------------
# Assembling the standard suite


def standard_modalities(store: Optional[StoreConfig] = None) -> dict[str, ModalitySpec]:
    """The ten shipped modalities: E, C, G, EG and their nondeterministic
    variants (EG itself stays plain, matching the worked examples)."""
    store = store or StoreConfig(("l", "r"), 3)
    sset = StateSetSpace(store)
    stab = StateTableSpace(store)
    e = expectation_modality()
    c = cost_modality()
    g = store_modality(sset)
    eg = prob_store_modality(stab)
    out: dict[str, ModalitySpec] = {}
    for q in (e, c, g):
        out[q.name] = q
        opt, pes = make_nondet_variants(q)
        out[opt.name] = opt
        out[pes.name] = pes
    out[eg.name] = eg
    return out


def run_law_suite(
    modalities: Sequence[ModalitySpec],
    params: LawParams,
    include_relator: bool = True,
    runtime: Optional[Runtime] = None,
    congruence_trials: int = 200,
) -> LawReport:
    report = LawReport()
    for q in modalities:
        report.results.append(law_leaf_monotone(q, params))
        report.results.append(law_scott_chain(q, params))
        report.results.append(law_sequential(q, params))
        report.results.append(law_unit(q, params))
        report.results.append(law_decomposability(q, params))
    if include_relator:
        report.results.extend(law_relator())
    if runtime is not None:
        report.results.append(
            law_congruence(runtime, trials=congruence_trials, seed=params.seed)
        )
    return report
