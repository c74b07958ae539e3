"""Relation-finding algorithms against black-box groups.

Both attacks delegate the hard part to a pluggable oracle: an order finder for
groups in varieties of infinite exponent, and a constructive-membership solver
otherwise.  Oracles come in exact, epsilon-lossy and (for order finding)
phase-estimation flavours.
"""

from __future__ import annotations

import copy
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from wpf.qsim import classical_power, order_find_qpe
from wpf.slp import (
    BudgetExhausted,
    RelationPair,
    Slp,
    derive,
    format_slp,
    identity_slp,
    input_slp,
    power_slp,
)


@dataclass
class OrderOracle:
    """Finds s >= 1 with g^s = 1.  Any returned s has been checked."""

    kind: str = "exact"
    epsilon: float = 1.0
    budget: int = 10**6
    counting_qubits: int = 8
    shots: int = 8
    calls: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "epsilon", "qpe"):
            raise ValueError(f"unknown order oracle {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be a probability")

    @property
    def deterministic(self) -> bool:
        return self.kind == "exact" or (self.kind == "epsilon" and self.epsilon in (0.0, 1.0))

    def find(self, bb, g: int, rng=None) -> int | None:
        self.calls += 1
        if self.kind == "epsilon" and not (self.epsilon == 1.0 or _rng(rng).random() < self.epsilon):
            return None
        if self.kind == "qpe":
            res = order_find_qpe(bb, g, self.counting_qubits, self.shots, rng=_rng(rng))
            return res.s
        start = bb.queries
        one = bb.query("one")
        h, s = g, 1
        while h != one:
            if bb.queries - start >= self.budget:
                return None
            h = bb.query("mul", h, g)
            s += 1
        return s


@dataclass
class MembershipOracle:
    """Constructive membership by breadth-first closure.

    Closures are memoised per (black box, generator tuple); the cache is a
    deterministic function of its key, so reuse changes query counts only.
    """

    kind: str = "bfs"
    epsilon: float = 1.0
    budget: int | None = None
    cache_size: int = 4096
    calls: int = 0
    _cache: OrderedDict = field(default_factory=OrderedDict, repr=False)

    def __post_init__(self):
        if self.kind not in ("bfs", "epsilon"):
            raise ValueError(f"unknown membership oracle {self.kind!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be a probability")

    @property
    def deterministic(self) -> bool:
        return self.kind == "bfs" or self.epsilon in (0.0, 1.0)

    def closure(self, bb, gens: tuple):
        key = (id(bb), gens)
        hit = self._cache.get(key)
        if hit is not None and hit.alg is bb:
            self._cache.move_to_end(key)
            return hit
        d = derive(bb, gens, None, self.budget)
        self._cache[key] = d
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return d

    def find(self, bb, gens, target, rng=None) -> Slp | None:
        self.calls += 1
        if self.kind == "epsilon" and not (self.epsilon == 1.0 or _rng(rng).random() < self.epsilon):
            return None
        d = self.closure(bb, tuple(gens))
        if d.status == 2 and target not in d:
            return None
        return d.slp_for(bb.label(target))


def _rng(rng):
    return rng if rng is not None else np.random.default_rng()


@dataclass
class AttackOutcome:
    result: RelationPair | None
    oracle_queries: int
    bb_queries: int
    index: int | None = None
    attack: str = ""

    @property
    def success(self) -> bool:
        return self.result is not None

    def to_dict(self) -> dict:
        out = {
            "attack": self.attack,
            "success": self.success,
            "oracle_queries": self.oracle_queries,
            "bb_queries": self.bb_queries,
            "index": self.index,
        }
        if self.result is not None:
            out["left"] = format_slp(self.result.left)
            out["right"] = format_slp(self.result.right)
        return out


def attack_infinite_exponent(bb, g: int, oracle: OrderOracle, rng=None) -> AttackOutcome:
    """Ask for a period s of g and output the relation a_1^s = 1."""
    start_q, start_c = bb.queries, oracle.calls
    s = oracle.find(bb, g, rng)
    pair = None
    if s is not None and s >= 1 and classical_power(bb, g, s) == bb.query("one"):
        pair = RelationPair(power_slp(s), identity_slp())
    return AttackOutcome(pair, oracle.calls - start_c, bb.queries - start_q, None, "inf")


def attack_finite(bb, g, oracle: MembershipOracle, rng=None) -> AttackOutcome:
    """Scan i = 1..m for the first g_i the oracle can express through
    g_1..g_{i-1}; output that program against the program (i)."""
    start_q, start_c = bb.queries, oracle.calls
    g = tuple(g)
    for i in range(1, len(g) + 1):
        try:
            u = oracle.find(bb, g[: i - 1], g[i - 1], rng)
        except BudgetExhausted:
            u = None
        if u is not None:
            pair = RelationPair(u, input_slp(i))
            return AttackOutcome(pair, oracle.calls - start_c, bb.queries - start_q, i, "fin")
    return AttackOutcome(None, oracle.calls - start_c, bb.queries - start_q, None, "fin")


@lru_cache(maxsize=1 << 16)
def _span(alg, prefix: tuple) -> frozenset:
    return frozenset(int(x) for x in derive(alg, prefix).order)


def counting_certificate(bb, g) -> int | None:
    """Ground truth, computed on the decoded source algebra: the least j with
    g_j in the subgroup generated by g_1..g_{j-1}, or None."""
    src = bb.source
    dec = tuple(bb.decode(h) for h in g)
    for j in range(1, len(dec) + 1):
        if src.index(dec[j - 1]) in _span(src, dec[: j - 1]):
            return j
    return None


# --------------------------------------------------------------------------
# adversaries for the games


@dataclass
class Adversary:
    """An attack bound to an oracle configuration.  ``spec`` round-trips through
    ``make_adversary``."""

    spec: str
    attack: str
    oracle: object = None

    @property
    def deterministic(self) -> bool:
        return self.attack == "fail" or self.oracle.deterministic

    def fresh(self) -> "Adversary":
        return Adversary(self.spec, self.attack, copy.deepcopy(self.oracle))

    def __call__(self, bb, g, r=(), rng=None) -> AttackOutcome:
        if self.attack == "inf":
            return attack_infinite_exponent(bb, g[0], self.oracle, rng)
        if self.attack == "fin":
            return attack_finite(bb, g, self.oracle, rng)
        return AttackOutcome(None, 0, 0, None, "fail")


def _opts(parts):
    out = {}
    for p in parts:
        k, _, v = p.partition("=")
        out[k] = v
    return out


def make_adversary(spec: str) -> Adversary:
    """Parse ``inf:exact``, ``inf:eps=0.5``, ``inf:qpe[:qubits=8,shots=8]``,
    ``fin:bfs``, ``fin:eps=0.5`` or ``fail``."""
    parts = spec.strip().split(":")
    kind = parts[0]
    if kind == "fail":
        return Adversary("fail", "fail")
    if len(parts) < 2:
        raise ValueError(f"adversary spec {spec!r} needs an oracle")
    head, _, val = parts[1].partition("=")
    extra = _opts(",".join(parts[2:]).split(",")) if len(parts) > 2 else {}
    if kind == "inf":
        if head == "exact":
            orc = OrderOracle("exact")
        elif head == "eps":
            orc = OrderOracle("epsilon", float(val))
        elif head == "qpe":
            orc = OrderOracle("qpe", counting_qubits=int(extra.get("qubits", 8)),
                              shots=int(extra.get("shots", 8)))
        else:
            raise ValueError(f"unknown order oracle in {spec!r}")
        return Adversary(spec, "inf", orc)
    if kind == "fin":
        if head == "bfs":
            orc = MembershipOracle("bfs")
        elif head == "eps":
            orc = MembershipOracle("epsilon", float(val))
        else:
            raise ValueError(f"unknown membership oracle in {spec!r}")
        return Adversary(spec, "fin", orc)
    raise ValueError(f"unknown adversary {spec!r}")
