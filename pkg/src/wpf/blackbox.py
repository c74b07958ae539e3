"""Black-box Omega-algebras: encoded carriers behind a query-counted oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from wpf.algebra import (
    AlgebraError,
    FiniteAlgebra,
    Signature,
    UnknownSymbol,
    VarietySpec,
    free_equal,
)
from wpf.slp import RelationPair, SlpError, run, to_free

MAX_WIDTH = 24


class ProtocolViolation(RuntimeError):
    """An oracle query outside the permitted form."""


@dataclass(frozen=True)
class Encoding:
    seed: int
    n: int
    codes: tuple[int, ...]

    @classmethod
    def random(cls, size: int, n: int, seed: int) -> "Encoding":
        if n < 0 or n > MAX_WIDTH:
            raise AlgebraError(f"encoding width must lie in 0..{MAX_WIDTH}")
        if size > 2**n:
            raise AlgebraError(f"{size} elements do not fit into {n}-bit strings")
        rng = np.random.default_rng(seed)
        codes = rng.choice(2**n, size=size, replace=False)
        return cls(seed, n, tuple(int(c) for c in codes))

    def bits(self, code: int) -> str:
        return format(code, f"0{self.n}b") if self.n else ""


def min_width(size: int) -> int:
    return max(1, (size - 1).bit_length())


class BlackBoxAlgebra:
    """An Omega-algebra on n-bit strings (stored as ints) reachable only
    through ``query``; every query, legal or not, bumps ``queries``.

    ``source`` and ``encoding`` are kept for ground-truth checks and
    serialization.  Algorithms under test must only call ``query``/``op``.
    """

    def __init__(self, n, signature, encoding, tables, source, strict=True, source_ref=None):
        self.n = n
        self.signature = signature
        self.encoding = encoding
        self.source = source
        self.strict = strict
        self.source_ref = source_ref or getattr(source, "name", "")
        self.queries = 0
        self._tables = tables
        self.carrier = frozenset(encoding.codes)
        self._decode = {c: i for i, c in enumerate(encoding.codes)}
        ar = np.array([a for _, a in signature.symbols], dtype=np.int64)
        self._kview = (ar, [np.ascontiguousarray(tables[s].reshape(-1)) for s in signature.names], 2**n)

    def __repr__(self):
        return f"BlackBoxAlgebra(n={self.n}, |H|={len(self.carrier)}, {self.signature}, seed={self.encoding.seed})"

    # oracle ---------------------------------------------------------------

    def query(self, symbol: str, *operands) -> int:
        self.queries += 1
        tab = self._tables.get(symbol)
        if tab is None:
            if self.strict:
                raise ProtocolViolation(f"symbol {symbol!r} is not served by this oracle")
            return 0
        if len(operands) != tab.ndim:
            if self.strict:
                raise ProtocolViolation(f"{symbol} takes {tab.ndim} operands, got {len(operands)}")
            return 0
        carrier = self.carrier
        for h in operands:
            if h not in carrier:
                if self.strict:
                    raise ProtocolViolation(f"operand {h!r} is not an element of the carrier")
                return 0
        return int(tab[operands])

    op = query

    # kernel plumbing (the closure kernel performs oracle lookups in bulk) --

    def kernel_view(self):
        return self._kview

    def label(self, h) -> int:
        if h not in self.carrier:
            raise ProtocolViolation(f"operand {h!r} is not an element of the carrier")
        return int(h)

    def unlabel(self, i: int) -> int:
        return int(i)

    def charge(self, count: int) -> None:
        self.queries += count

    # ground truth ---------------------------------------------------------

    def encode(self, h) -> int:
        return self.encoding.codes[self.source.index(h)]

    def decode(self, code: int):
        return self.source.carrier[self._decode[code]]

    def bits(self, code: int) -> str:
        return self.encoding.bits(code)

    def parse_bits(self, text: str) -> int:
        text = text.strip()
        if text.startswith("0b"):
            text = text[2:]
        if len(text) != self.n or set(text) - {"0", "1"}:
            raise AlgebraError(f"{text!r} is not an {self.n}-bit string")
        return int(text, 2) if text else 0

    def elements(self) -> list[int]:
        """Carrier codes in ascending order."""
        return sorted(self.carrier)

    def describe(self) -> dict:
        return {
            "n": self.n,
            "seed": self.encoding.seed,
            "source": self.source_ref,
            "strict": self.strict,
            "signature": str(self.signature),
        }

    def reduct(self, psi: Iterable[str], rename: dict | None = None) -> "BlackBoxAlgebra":
        return reduct(self, psi, rename)


def wrap(alg: FiniteAlgebra, n: int | None = None, seed: int = 0, strict: bool = True,
         source_ref: str | None = None, codes: Sequence[int] | None = None) -> BlackBoxAlgebra:
    """Hide ``alg`` behind a seeded random injection into n-bit strings.

    ``codes`` fixes the injection explicitly (carrier order), e.g.
    ``range(size)`` for the identity encoding.
    """
    if n is None:
        n = min_width(alg.size)
    if codes is None:
        enc = Encoding.random(alg.size, n, seed)
    else:
        codes = tuple(int(c) for c in codes)
        if len(codes) != alg.size or len(set(codes)) != len(codes) or not all(0 <= c < 2**n for c in codes):
            raise AlgebraError(f"codes must be {alg.size} distinct {n}-bit values")
        enc = Encoding(seed, n, codes)
    codes = np.array(enc.codes, dtype=np.int64)
    tables = {}
    for sym, ar in alg.signature.symbols:
        tab = np.full((2**n,) * ar, -1, dtype=np.int64)
        src = alg.tables[sym]
        if ar == 0:
            tab[()] = codes[int(src)]
        else:
            tab[np.ix_(*([codes] * ar))] = codes[src]
        tab.setflags(write=False)
        tables[sym] = tab
    return BlackBoxAlgebra(n, alg.signature, enc, tables, alg, strict, source_ref)


def reduct(bb: BlackBoxAlgebra, psi: Iterable[str], rename: dict | None = None) -> BlackBoxAlgebra:
    """Same carrier and encoding, oracle restricted to ``psi``.

    ``rename`` optionally relabels kept symbols (old name -> new name), e.g. to
    view the additive group of a ring through the group symbols.
    """
    psi = list(psi)
    for s in psi:
        if s not in bb.signature:
            raise UnknownSymbol(f"symbol {s!r} not in {bb.signature}")
    rename = rename or {}
    kept = bb.signature.restrict(psi)
    sig = Signature(tuple((rename.get(s, s), a) for s, a in kept.symbols))
    tables = {rename.get(s, s): bb._tables[s] for s in kept.names}
    return BlackBoxAlgebra(bb.n, sig, bb.encoding, tables, bb.source.reduct(psi, rename),
                           bb.strict, bb.source_ref)


def oracle_query(bb: BlackBoxAlgebra, symbol: str, operands: Sequence = ()) -> int:
    return bb.query(symbol, *operands)


def alpha_pad(n: int, u: str) -> str:
    """Injective padding of strings of length <= n into (n+1)-bit strings."""
    if len(u) > n:
        raise ValueError(f"|u| = {len(u)} exceeds n = {n}")
    return u + "1" + "0" * (n - len(u))


def alpha_unpad(n: int, t: str) -> str:
    if len(t) != n + 1:
        raise ValueError(f"expected {n + 1} bits, got {len(t)}")
    k = t.rfind("1")
    if k < 0:
        raise ValueError("the all-zeros string has no preimage")
    return t[:k]


def lambda_contains(v: VarietySpec, m: int, alg, g: Sequence, pair: RelationPair) -> bool:
    """Whether ``pair`` represents a nontrivial relation among ``g`` in ``alg``:
    distinct in the free algebra of ``v`` yet equal at ``g``."""
    if len(g) != m:
        raise ValueError(f"expected a tuple of {m} elements, got {len(g)}")
    if pair.max_input > m:
        raise SlpError(f"pair reads input {pair.max_input} but only {m} are available")
    if free_equal(to_free(pair.left, v), to_free(pair.right, v)):
        return False
    return run(pair.left, alg, g) == run(pair.right, alg, g)


def to_json(bb: BlackBoxAlgebra) -> dict:
    return bb.describe()


def from_json(data: dict) -> BlackBoxAlgebra:
    from wpf.models import algebra_from_ref

    alg = algebra_from_ref(data["source"])
    return wrap(alg, int(data["n"]), int(data["seed"]), bool(data.get("strict", True)), data["source"])
