"""Finite Omega-algebras, terms, varieties and free-algebra normal forms."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from wpf import kernels

INFINITE = math.inf


class AlgebraError(ValueError):
    pass


class ArityError(AlgebraError):
    pass


class UnknownSymbol(AlgebraError):
    pass


class UnsupportedVariety(AlgebraError):
    pass


class VarietyMismatch(AlgebraError):
    pass


class BudgetExceeded(AlgebraError):
    pass


# --------------------------------------------------------------------------
# signatures and terms


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [s for s, _ in self.symbols]
        if len(set(names)) != len(names):
            raise AlgebraError(f"duplicate symbol names in {names}")
        for name, ar in self.symbols:
            if ar < 0:
                raise AlgebraError(f"negative arity for {name}")
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise AlgebraError(f"bad symbol name {name!r}")

    @classmethod
    def parse(cls, text: str) -> "Signature":
        """Parse ``mul/2, inv/1, one/0``."""
        out = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            name, _, ar = item.partition("/")
            if not ar:
                raise AlgebraError(f"missing arity in {item!r}")
            out.append((name.strip(), int(ar)))
        return cls(tuple(out))

    def __str__(self):
        return ",".join(f"{s}/{a}" for s, a in self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.symbols)

    def __contains__(self, name) -> bool:
        return any(s == name for s, _ in self.symbols)

    def arity(self, name: str) -> int:
        for s, a in self.symbols:
            if s == name:
                return a
        raise UnknownSymbol(f"symbol {name!r} not in signature {self}")

    def index(self, name: str) -> int:
        for i, (s, _) in enumerate(self.symbols):
            if s == name:
                return i
        raise UnknownSymbol(f"symbol {name!r} not in signature {self}")

    def restrict(self, names: Iterable[str]) -> "Signature":
        keep = set(names)
        for n in keep:
            self.arity(n)
        return Signature(tuple((s, a) for s, a in self.symbols if s in keep))


GROUP = Signature((("mul", 2), ("inv", 1), ("one", 0)))
RING = Signature((("add", 2), ("neg", 1), ("zero", 0), ("mul", 2)))


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise AlgebraError("variable indices start at 1")

    def __str__(self):
        return f"a{self.index}"


@dataclass(frozen=True)
class Apply:
    symbol: str
    children: tuple = ()

    def __str__(self):
        return f"{self.symbol}({', '.join(map(str, self.children))})"


Term = Var | Apply


def var(i: int) -> Var:
    return Var(i)


def mul(x, y) -> Apply:
    return Apply("mul", (x, y))


def inv(x) -> Apply:
    return Apply("inv", (x,))


def one() -> Apply:
    return Apply("one", ())


def max_var(t: Term) -> int:
    if isinstance(t, Var):
        return t.index
    return max((max_var(c) for c in t.children), default=0)


def term_vars(t: Term) -> set[int]:
    if isinstance(t, Var):
        return {t.index}
    return set().union(*(term_vars(c) for c in t.children)) if t.children else set()


def check_term(t: Term, sig: Signature) -> None:
    if isinstance(t, Var):
        return
    ar = sig.arity(t.symbol)
    if len(t.children) != ar:
        raise ArityError(f"{t.symbol} expects {ar} arguments, got {len(t.children)}")
    for c in t.children:
        check_term(c, sig)


_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\()|(\))|(,))")


def parse_term(text: str) -> Term:
    """Parse prefix notation such as ``mul(a1, inv(a2))``.

    Variables are ``a<i>``, ``z<i>`` or ``x<i>``; a bare symbol name such as
    ``one`` is read as a nullary application.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise AlgebraError(f"cannot parse term at {text[pos:]!r}")
        tokens.append(m.group(1) or m.group(2) or m.group(3) or m.group(4))
        pos = m.end()

    def parse(i):
        if i >= len(tokens):
            raise AlgebraError("unexpected end of term")
        name = tokens[i]
        if name in "(),":
            raise AlgebraError(f"unexpected {name!r}")
        vm = re.fullmatch(r"[azx](\d+)", name)
        if i + 1 < len(tokens) and tokens[i + 1] == "(":
            children = []
            i += 2
            if tokens[i] == ")":
                return Apply(name, ()), i + 1
            while True:
                child, i = parse(i)
                children.append(child)
                if i >= len(tokens):
                    raise AlgebraError("unbalanced parentheses")
                if tokens[i] == ")":
                    return Apply(name, tuple(children)), i + 1
                if tokens[i] != ",":
                    raise AlgebraError(f"expected ',' got {tokens[i]!r}")
                i += 1
        if vm:
            return Var(int(vm.group(1))), i + 1
        return Apply(name, ()), i + 1

    t, end = parse(0)
    if end != len(tokens):
        raise AlgebraError(f"trailing input in {text!r}")
    return t


# --------------------------------------------------------------------------
# finite algebras


class FiniteAlgebra:
    """A finite Omega-algebra given by dense operation tables.

    Elements are opaque hashable tokens; tables are integer arrays indexed by
    carrier position, one axis per operand.
    """

    __slots__ = ("signature", "carrier", "tables", "name", "_index", "_flat")

    def __init__(self, signature: Signature, carrier: Sequence, tables: dict, name: str = ""):
        carrier = tuple(carrier)
        index = {h: i for i, h in enumerate(carrier)}
        if len(index) != len(carrier):
            raise AlgebraError("carrier elements must be distinct")
        n = len(carrier)
        if n == 0 and any(a == 0 for _, a in signature.symbols):
            raise AlgebraError("a nullary symbol forces a nonempty carrier")
        fixed = {}
        for sym, ar in signature.symbols:
            if sym not in tables:
                raise AlgebraError(f"missing table for {sym}")
            tab = np.array(tables[sym], dtype=np.int64).reshape((n,) * ar)
            if tab.size and (tab.min() < 0 or tab.max() >= n):
                raise AlgebraError(f"table for {sym} leaves the carrier")
            tab.setflags(write=False)
            fixed[sym] = tab
        self.signature = signature
        self.carrier = carrier
        self.tables = fixed
        self.name = name
        self._index = index
        self._flat = None

    @classmethod
    def from_functions(cls, signature, carrier, funcs: dict, name=""):
        """Tabulate Python callables over the carrier."""
        carrier = tuple(carrier)
        index = {h: i for i, h in enumerate(carrier)}
        n = len(carrier)
        tables = {}
        for sym, ar in signature.symbols:
            f = funcs[sym]
            tab = np.empty((n,) * ar, dtype=np.int64)
            for pos in product(range(n), repeat=ar):
                tab[pos] = index[f(*(carrier[p] for p in pos))]
            tables[sym] = tab
        return cls(signature, carrier, tables, name)

    def __repr__(self):
        return f"FiniteAlgebra({self.name or '?'}, |H|={len(self.carrier)}, {self.signature})"

    def __len__(self):
        return len(self.carrier)

    @property
    def size(self) -> int:
        return len(self.carrier)

    def index(self, h) -> int:
        try:
            return self._index[h]
        except KeyError:
            raise AlgebraError(f"{h!r} is not in the carrier") from None

    def __contains__(self, h) -> bool:
        try:
            return h in self._index
        except TypeError:
            return False

    def op(self, symbol: str, *args):
        tab = self.tables.get(symbol)
        if tab is None:
            raise UnknownSymbol(f"symbol {symbol!r} not in signature {self.signature}")
        if len(args) != tab.ndim:
            raise ArityError(f"{symbol} expects {tab.ndim} arguments, got {len(args)}")
        return self.carrier[int(tab[tuple(self.index(a) for a in args)])]

    def kernel_view(self):
        ar, tabs = self.flat_tables()
        return ar, tabs, self.size

    def label(self, h) -> int:
        return self.index(h)

    def unlabel(self, i: int):
        return self.carrier[i]

    def charge(self, n: int) -> None:
        pass

    def flat_tables(self):
        """Signature-ordered arities and flattened tables for the kernels."""
        if self._flat is None:
            ar = np.array([a for _, a in self.signature.symbols], dtype=np.int64)
            tabs = [np.ascontiguousarray(self.tables[s].reshape(-1)) for s in self.signature.names]
            self._flat = (ar, tabs)
        return self._flat

    def reduct(self, psi: Iterable[str], rename: dict | None = None) -> "FiniteAlgebra":
        """Drop every operation outside ``psi``; ``rename`` maps old names to new."""
        sig = self.signature.restrict(psi)
        rename = rename or {}
        new_sig = Signature(tuple((rename.get(s, s), a) for s, a in sig.symbols))
        tables = {rename.get(s, s): self.tables[s] for s in sig.names}
        return FiniteAlgebra(new_sig, self.carrier, tables, self.name)


# --------------------------------------------------------------------------
# varieties and free elements

_GROUP_KINDS = ("all-groups", "abelian", "abelian-exp", "elem-abelian")


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class VarietySpec:
    kind: str
    e: int | None = None
    signature: Signature | None = None

    def __post_init__(self):
        if self.kind == "all-algebras":
            if self.signature is None:
                raise AlgebraError("all-algebras needs a signature")
        elif self.kind in ("all-groups", "abelian"):
            if self.e is not None:
                raise AlgebraError(f"{self.kind} takes no exponent")
        elif self.kind == "abelian-exp":
            if self.e is None or self.e < 1:
                raise AlgebraError("abelian-exp needs an exponent >= 1")
        elif self.kind == "elem-abelian":
            if self.e is None or not is_prime(self.e):
                raise AlgebraError("elem-abelian needs a prime")
        else:
            raise UnsupportedVariety(f"unknown variety kind {self.kind!r}")

    @property
    def sig(self) -> Signature:
        return self.signature if self.kind == "all-algebras" else GROUP

    @property
    def is_group_variety(self) -> bool:
        return self.kind in _GROUP_KINDS

    @property
    def exponent(self):
        if self.kind in ("abelian-exp", "elem-abelian"):
            return self.e
        return INFINITE

    @property
    def trivial(self) -> bool:
        return self.exponent == 1

    def __str__(self):
        if self.kind == "all-algebras":
            return f"all-algebras[{self.signature}]"
        return self.kind if self.e is None else f"{self.kind}:{self.e}"

    @classmethod
    def parse(cls, text: str) -> "VarietySpec":
        kind, _, arg = text.strip().partition(":")
        if kind == "all-algebras":
            return cls(kind, signature=Signature.parse(arg))
        return cls(kind, int(arg) if arg else None)


ALL_GROUPS = VarietySpec("all-groups")
ABELIAN = VarietySpec("abelian")


def abelian_exp(e: int) -> VarietySpec:
    return VarietySpec("abelian-exp", e)


def elementary_abelian(p: int) -> VarietySpec:
    return VarietySpec("elem-abelian", p)


def all_algebras(sig: Signature) -> VarietySpec:
    return VarietySpec("all-algebras", signature=sig)


@dataclass(frozen=True)
class FreeElement:
    """Normal form of an element of a free algebra of a supported variety.

    ``payload`` is a Term (all-algebras), a freely reduced word of
    ``(index, +-1)`` letters (all-groups) or a sorted tuple of nonzero
    ``(index, exponent)`` pairs (abelian kinds, exponents reduced mod e).
    """

    variety: VarietySpec
    payload: object

    def __str__(self):
        if self.variety.kind == "all-algebras":
            return str(self.payload)
        if not self.payload:
            return "1"
        return "*".join(f"a{i}" if e == 1 else f"a{i}^{e}" for i, e in self.payload)

    @property
    def max_index(self) -> int:
        if self.variety.kind == "all-algebras":
            return max_var(self.payload)
        return max((i for i, _ in self.payload), default=0)


def _reduce_concat(u: tuple, w: tuple) -> tuple:
    out = list(u)
    for letter in w:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def _word_inverse(u: tuple) -> tuple:
    return tuple((i, -e) for i, e in reversed(u))


def _vec_add(u: dict, w: dict, mod) -> dict:
    out = dict(u)
    for i, e in w.items():
        x = out.get(i, 0) + e
        if mod:
            x %= mod
        if x:
            out[i] = x
        else:
            out.pop(i, None)
    return out


def _vec_neg(u: dict, mod) -> dict:
    if mod:
        return {i: (-e) % mod for i, e in u.items() if (-e) % mod}
    return {i: -e for i, e in u.items()}


def _vec_mod(u: dict, mod) -> dict:
    if not mod:
        return dict(u)
    return {i: e % mod for i, e in u.items() if e % mod}


class FreeBuilder:
    """Operations of the free algebra on raw normal-form payloads.

    Group kinds use words or dicts internally; ``wrap`` freezes a payload into
    a FreeElement.  Shared by ``normalize`` and SLP interpretation.
    """

    def __init__(self, v: VarietySpec):
        self.v = v
        self.mod = v.e if v.kind in ("abelian-exp", "elem-abelian") else None
        self.word = v.kind == "all-groups"

    def gen(self, i: int):
        if self.v.kind == "all-algebras":
            return Var(i)
        if self.word:
            return ((i, 1),)
        return _vec_mod({i: 1}, self.mod)

    def apply(self, symbol: str, args):
        v = self.v
        if v.kind == "all-algebras":
            ar = v.signature.arity(symbol)
            if len(args) != ar:
                raise ArityError(f"{symbol} expects {ar} arguments")
            return Apply(symbol, tuple(args))
        ar = GROUP.arity(symbol) if symbol in GROUP else None
        if ar is None:
            raise UnknownSymbol(f"symbol {symbol!r} not in the group signature")
        if len(args) != ar:
            raise ArityError(f"{symbol} expects {ar} arguments")
        if symbol == "one":
            return () if self.word else {}
        if symbol == "inv":
            return _word_inverse(args[0]) if self.word else _vec_neg(args[0], self.mod)
        if self.word:
            return _reduce_concat(args[0], args[1])
        return _vec_add(args[0], args[1], self.mod)

    def wrap(self, payload) -> FreeElement:
        if self.v.kind == "all-algebras" or self.word:
            return FreeElement(self.v, payload)
        return FreeElement(self.v, tuple(sorted(payload.items())))


def normalize(v: VarietySpec, t: Term) -> FreeElement:
    check_term(t, v.sig)
    fb = FreeBuilder(v)

    def go(s):
        if isinstance(s, Var):
            return fb.gen(s.index)
        return fb.apply(s.symbol, [go(c) for c in s.children])

    return fb.wrap(go(t))


def free_element(v: VarietySpec, payload) -> FreeElement:
    """Build a FreeElement from a user payload, normalizing it."""
    fb = FreeBuilder(v)
    if v.kind == "all-algebras":
        check_term(payload, v.signature)
        return FreeElement(v, payload)
    if fb.word:
        word = ()
        for i, e in payload:
            if e not in (1, -1):
                raise AlgebraError("word letters carry exponent +1 or -1")
            word = _reduce_concat(word, ((i, e),))
        return FreeElement(v, word)
    items = dict(payload) if not isinstance(payload, dict) else payload
    return fb.wrap(_vec_mod({i: e for i, e in items.items() if e}, fb.mod))


def embed(f: FreeElement) -> Term:
    """A term representative of a normal form (inverse of ``normalize`` up to
    the variety's identities)."""
    v = f.variety
    if v.kind == "all-algebras":
        return f.payload
    if v.kind == "all-groups":
        letters = [Var(i) if e == 1 else inv(Var(i)) for i, e in f.payload]
    else:
        letters = []
        for i, e in f.payload:
            letters += [Var(i) if e > 0 else inv(Var(i))] * abs(e)
    if not letters:
        return one()
    return reduce(mul, letters)


def free_equal(a: FreeElement, b: FreeElement) -> bool:
    if a.variety != b.variety:
        raise VarietyMismatch(f"{a.variety} vs {b.variety}")
    return a.payload == b.payload


def _power(alg, h, e: int):
    if e < 0:
        h, e = alg.op("inv", h), -e
    acc = alg.op("one")
    base = h
    while e:
        if e & 1:
            acc = alg.op("mul", acc, base)
        e >>= 1
        if e:
            base = alg.op("mul", base, base)
    return acc


def eval_free(f: FreeElement, alg, g: Sequence):
    """Evaluate a normal form at ``g`` in ``alg`` (any object with ``op``)."""
    if f.max_index > len(g):
        raise IndexError(f"needs {f.max_index} arguments, got {len(g)}")
    v = f.variety
    if v.kind == "all-algebras":
        return eval_term(f.payload, alg, g)
    acc = alg.op("one")
    if v.kind == "all-groups":
        for i, e in f.payload:
            x = g[i - 1] if e == 1 else alg.op("inv", g[i - 1])
            acc = alg.op("mul", acc, x)
        return acc
    for i, e in f.payload:
        acc = alg.op("mul", acc, _power(alg, g[i - 1], e))
    return acc


def eval_term(t: Term, alg, assignment: Sequence):
    if isinstance(t, Var):
        if t.index > len(assignment):
            raise IndexError(f"variable a{t.index} unassigned (only {len(assignment)} values)")
        return assignment[t.index - 1]
    return alg.op(t.symbol, *(eval_term(c, alg, assignment) for c in t.children))


# --------------------------------------------------------------------------
# closure and identities


def subalgebra_closure(alg: FiniteAlgebra, seeds: Iterable) -> frozenset:
    labels = np.array([alg.index(h) for h in seeds], dtype=np.int64)
    ar, tabs = alg.flat_tables()
    order = kernels.closure(ar, tabs, alg.size, labels)[0]
    return frozenset(alg.carrier[int(i)] for i in order)


def _eval_grid(t: Term, alg: FiniteAlgebra, grids: dict):
    if isinstance(t, Var):
        return grids[t.index]
    tab = alg.tables[t.symbol]
    if not t.children:
        return np.broadcast_to(tab, next(iter(grids.values())).shape if grids else ())
    return tab[tuple(_eval_grid(c, alg, grids) for c in t.children)]


def check_identity_in_algebra(v: Term, w: Term, alg: FiniteAlgebra, budget: int = 10**6) -> bool:
    """Exhaustively decide whether ``v = w`` holds in ``alg``."""
    check_term(v, alg.signature)
    check_term(w, alg.signature)
    names = sorted(term_vars(v) | term_vars(w))
    if alg.size ** len(names) > budget:
        raise BudgetExceeded(f"{alg.size}^{len(names)} assignments exceed budget {budget}")
    if alg.size == 0:
        return True
    axes = np.meshgrid(*[np.arange(alg.size)] * len(names), indexing="ij") if names else []
    grids = {i: ax for i, ax in zip(names, axes)}
    return bool(np.all(_eval_grid(v, alg, grids) == _eval_grid(w, alg, grids)))


def _pow_term(t: Term, e: int) -> Term:
    if e == 0:
        return one()
    return reduce(mul, [t] * e)


def defining_identities(v: VarietySpec) -> list[tuple[Term, Term]]:
    if v.kind == "all-algebras":
        return []
    z1, z2, z3 = Var(1), Var(2), Var(3)
    ids = [
        (mul(mul(z1, z2), z3), mul(z1, mul(z2, z3))),
        (mul(one(), z1), z1),
        (mul(z1, one()), z1),
        (mul(inv(z1), z1), one()),
        (mul(z1, inv(z1)), one()),
    ]
    if v.kind != "all-groups":
        ids.append((mul(z1, z2), mul(z2, z1)))
    if v.e is not None:
        ids.append((_pow_term(z1, v.e), one()))
    return ids


def audit_variety(alg: FiniteAlgebra, v: VarietySpec, budget: int = 10**7) -> bool:
    """Check the defining identities of ``v`` in ``alg`` exhaustively."""
    if v.kind == "all-algebras":
        return alg.signature == v.signature
    if any(s not in alg.signature for s in GROUP.names):
        return False
    return all(check_identity_in_algebra(a, b, alg, budget) for a, b in defining_identities(v))


# --------------------------------------------------------------------------
# text format


def load_algebra(text: str, name: str = "") -> FiniteAlgebra:
    """Read the plain-text table format.

    ::

        signature: mul/2, inv/1, one/0
        carrier: e a b          # optional, defaults to 0..N-1
        table mul
        e a b
        a b e
        b e a
        table inv
        e b a
        table one
        e

    Rows of an ``r``-ary table enumerate the first ``r-1`` operands
    lexicographically; columns run over the last operand.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("signature:"):
        raise AlgebraError("first line must be 'signature: ...'")
    sig = Signature.parse(lines[0][len("signature:"):])
    carrier = None
    rest = lines[1:]
    if rest and rest[0].startswith("carrier:"):
        carrier = rest[0][len("carrier:"):].split()
        rest = rest[1:]
    raw: dict[str, list[list[str]]] = {}
    current = None
    for ln in rest:
        if ln.startswith("table "):
            current = ln.split(None, 1)[1].strip()
            sig.arity(current)
            raw[current] = []
        elif current is None:
            raise AlgebraError(f"row outside a table: {ln!r}")
        else:
            raw[current].append(ln.split())
    if carrier is None:
        widths = [len(rows[0]) for s, rows in raw.items() if sig.arity(s) > 0 and rows]
        if not widths:
            raise AlgebraError("cannot infer carrier size; add a 'carrier:' line")
        carrier = [str(i) for i in range(widths[0])]
    index = {h: i for i, h in enumerate(carrier)}
    n = len(carrier)
    tables = {}
    for sym, ar in sig.symbols:
        rows = raw.get(sym)
        if rows is None:
            raise AlgebraError(f"missing table for {sym}")
        cells = [c for row in rows for c in row]
        if ar > 0 and any(len(row) != n for row in rows):
            raise AlgebraError(f"rows of {sym} must have {n} entries")
        if len(cells) != n**ar:
            raise AlgebraError(f"table {sym} needs {n**ar} entries, got {len(cells)}")
        try:
            tables[sym] = np.array([index[c] for c in cells], dtype=np.int64).reshape((n,) * ar)
        except KeyError as exc:
            raise AlgebraError(f"table {sym} mentions unknown element {exc.args[0]!r}") from None
    return FiniteAlgebra(sig, carrier, tables, name)


def dump_algebra(alg: FiniteAlgebra) -> str:
    names = [str(h).replace(" ", "") for h in alg.carrier]
    out = [f"signature: {alg.signature}", "carrier: " + " ".join(names)]
    n = alg.size
    for sym, ar in alg.signature.symbols:
        out.append(f"table {sym}")
        tab = alg.tables[sym].reshape(-1)
        if ar == 0:
            out.append(names[int(tab[0])])
            continue
        for r in range(0, tab.size, n):
            out.append(" ".join(names[int(x)] for x in tab[r : r + n]))
    return "\n".join(out) + "\n"
