"""Straight-line programs: validation, evaluation, free normal forms and
breadth-first constructive membership."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from wpf import kernels
from wpf.algebra import (
    AlgebraError,
    FreeBuilder,
    FreeElement,
    Signature,
    UnknownSymbol,
    VarietySpec,
)


class SlpError(AlgebraError):
    pass


class BadInputIndex(SlpError):
    pass


class ForwardReference(SlpError):
    pass


class SlpArityError(SlpError):
    pass


class BudgetExhausted(RuntimeError):
    """The search ran out of budget before deciding membership."""


@dataclass(frozen=True)
class Input:
    index: int

    def __str__(self):
        return f"in {self.index}"


@dataclass(frozen=True)
class Op:
    symbol: str
    operands: tuple[int, ...] = ()

    def __str__(self):
        return " ".join(["op", self.symbol, *map(str, self.operands)])


@dataclass(frozen=True)
class Slp:
    instrs: tuple
    _hash: int = field(default=0, init=False, repr=False, compare=False)
    _max_input: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.instrs:
            raise SlpError("a straight-line program is a nonempty sequence")
        instrs = tuple(self.instrs)
        object.__setattr__(self, "instrs", instrs)
        # programs key several memo tables; hash them once
        object.__setattr__(self, "_hash", hash(instrs))
        object.__setattr__(self, "_max_input",
                           max((i.index for i in instrs if isinstance(i, Input)), default=0))

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.instrs)

    def __iter__(self):
        return iter(self.instrs)

    def __str__(self):
        return format_slp(self)

    @property
    def max_input(self) -> int:
        return self._max_input


@dataclass(frozen=True)
class RelationPair:
    left: Slp
    right: Slp

    @property
    def max_input(self) -> int:
        return max(self.left.max_input, self.right.max_input)


def slp(*instrs) -> Slp:
    """Shorthand: ints become inputs, ``(symbol, j1, ...)`` tuples become ops."""
    out = []
    for ins in instrs:
        if isinstance(ins, (Input, Op)):
            out.append(ins)
        elif isinstance(ins, int):
            out.append(Input(ins))
        else:
            out.append(Op(ins[0], tuple(ins[1:])))
    return Slp(tuple(out))


@lru_cache(maxsize=65536)
def validate(u: Slp, m: int, sig: Signature) -> None:
    """Raise an SlpError describing the first violation, else return None."""
    for k, ins in enumerate(u.instrs, start=1):
        if isinstance(ins, Input):
            if not 1 <= ins.index <= m:
                raise BadInputIndex(f"instruction {k}: input index {ins.index} not in 1..{m}")
        elif isinstance(ins, Op):
            try:
                ar = sig.arity(ins.symbol)
            except UnknownSymbol as exc:
                raise SlpArityError(f"instruction {k}: {exc}") from None
            if len(ins.operands) != ar:
                raise SlpArityError(
                    f"instruction {k}: {ins.symbol} takes {ar} operands, got {len(ins.operands)}"
                )
            for j in ins.operands:
                if not 1 <= j < k:
                    raise ForwardReference(f"instruction {k}: operand {j} does not refer to an earlier result")
        else:
            raise SlpError(f"instruction {k}: unknown instruction {ins!r}")


def is_valid(u: Slp, m: int, sig: Signature) -> bool:
    try:
        validate(u, m, sig)
    except SlpError:
        return False
    return True


def run(u: Slp, alg, g: Sequence):
    """Evaluate ``u`` on inputs ``g``; every Op is one ``alg.op`` call."""
    validate(u, len(g), alg.signature)
    vals = []
    for ins in u.instrs:
        if type(ins) is Input:
            vals.append(g[ins.index - 1])
        else:
            vals.append(alg.op(ins.symbol, *[vals[j - 1] for j in ins.operands]))
    return vals[-1]


@lru_cache(maxsize=65536)
def to_free(u: Slp, v: VarietySpec) -> FreeElement:
    """Element of the free algebra computed by ``u`` from a_1, a_2, ..."""
    validate(u, max(u.max_input, 0), v.sig)
    fb = FreeBuilder(v)
    vals = []
    for ins in u.instrs:
        if type(ins) is Input:
            vals.append(fb.gen(ins.index))
        else:
            vals.append(fb.apply(ins.symbol, [vals[j - 1] for j in ins.operands]))
    return fb.wrap(vals[-1])


def power_slp(s: int) -> Slp:
    """Left-to-right square-and-multiply program for a_1^s."""
    if s < 1:
        raise ValueError("s must be positive")
    instrs = [Input(1)]
    for bit in bin(s)[3:]:
        k = len(instrs)
        instrs.append(Op("mul", (k, k)))
        if bit == "1":
            instrs.append(Op("mul", (len(instrs), 1)))
    return Slp(tuple(instrs))


@lru_cache(maxsize=None)
def identity_slp() -> Slp:
    return Slp((Op("one", ()),))


@lru_cache(maxsize=1024)
def input_slp(i: int) -> Slp:
    return Slp((Input(i),))


def parse_slp(text: str) -> Slp:
    """Read ``in <i>`` / ``op <symbol> <j1> ...`` lines; ``#`` starts a comment."""
    instrs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "in" and len(parts) == 2:
                ins = Input(int(parts[1]))
                ok = ins.index >= 1
            elif parts[0] == "op" and len(parts) >= 2:
                ins = Op(parts[1], tuple(int(x) for x in parts[2:]))
                ok = all(1 <= j <= len(instrs) for j in ins.operands)
            else:
                raise ValueError
        except ValueError:
            raise SlpError(f"line {lineno}: cannot parse {line!r}") from None
        if not ok:
            raise SlpError(f"line {lineno}: index out of range in {line!r}")
        instrs.append(ins)
    return Slp(tuple(instrs))


def format_slp(u: Slp) -> str:
    return "\n".join(str(ins) for ins in u.instrs) + "\n"


# --------------------------------------------------------------------------
# breadth-first constructive membership


class Derivations:
    """Result of a layered closure: first derivation of every reached value."""

    def __init__(self, alg, raw, seed_count):
        order, sym, ops, layer, lookups, status = raw
        self.alg = alg
        self.order = order
        self.sym = sym
        self.ops = ops
        self.layer = layer
        self.lookups = int(lookups)
        self.status = int(status)
        self.seed_count = seed_count
        self._pos = {int(lab): p for p, lab in enumerate(order)}
        self._cache: dict[int, Slp] = {}

    @property
    def saturated(self) -> bool:
        return self.status == 0

    def labels(self):
        return self._pos.keys()

    def __contains__(self, label) -> bool:
        return label in self._pos

    def slp_for(self, label: int) -> Slp | None:
        hit = self._cache.get(label)
        if hit is not None:
            return hit
        p = self._pos.get(label)
        if p is None:
            return None
        need = set()
        stack = [p]
        while stack:
            q = stack.pop()
            if q in need:
                continue
            need.add(q)
            s = int(self.sym[q])
            if s >= 0:
                ar = self.alg.signature.symbols[s][1]
                stack.extend(int(x) for x in self.ops[q, :ar])
        names = self.alg.signature.symbols
        slot = {}
        instrs = []
        for q in sorted(need):
            s = int(self.sym[q])
            if s < 0:
                instrs.append(Input(int(self.ops[q, 0]) + 1))
            else:
                ar = names[s][1]
                instrs.append(Op(names[s][0], tuple(slot[int(x)] for x in self.ops[q, :ar])))
            slot[q] = len(instrs)
        out = Slp(tuple(instrs))
        self._cache[label] = out
        return out


def derive(alg, g: Sequence, target=None, budget: int | None = None) -> Derivations:
    """Run the layered closure of ``g`` in ``alg``; stop early at ``target``."""
    ar, tabs, size = alg.kernel_view()
    seeds = np.array([alg.label(h) for h in g], dtype=np.int64)
    tgt = -1 if target is None else alg.label(target)
    raw = kernels.closure(ar, tabs, size, seeds, tgt, -1 if budget is None else budget)
    alg.charge(int(raw[4]))
    return Derivations(alg, raw, len(g))


def shortest_slp_bfs(alg, g: Sequence, target, budget: int | None = None) -> Slp | None:
    """Shortest program found by breadth-first closure computing ``target`` from
    ``g``, or None when the closure saturates without it.

    Raises BudgetExhausted when ``budget`` operation applications do not
    suffice to decide.
    """
    d = derive(alg, g, target, budget)
    if d.status == 1:
        return d.slp_for(alg.label(target))
    if d.status == 2:
        raise BudgetExhausted(f"closure stopped after {d.lookups} operations")
    return None


def slp_from_term(t) -> Slp:
    """Compile a term into a program, sharing repeated subterms."""
    from wpf.algebra import Var

    instrs: list = []
    memo: dict = {}

    def go(s):
        if s in memo:
            return memo[s]
        if isinstance(s, Var):
            instrs.append(Input(s.index))
        else:
            ops = tuple(go(c) for c in s.children)
            instrs.append(Op(s.symbol, ops))
        memo[s] = len(instrs)
        return memo[s]

    go(t)
    return Slp(tuple(instrs))

