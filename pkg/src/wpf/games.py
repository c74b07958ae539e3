"""Families of black-box algebras and the weak pseudo-freeness games."""

from __future__ import annotations

import ast
import csv
import operator
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Callable

import numpy as np
from scipy.stats import binomtest

import wpf
from wpf import models
from wpf.algebra import (
    ABELIAN,
    ALL_GROUPS,
    INFINITE,
    FiniteAlgebra,
    VarietySpec,
    abelian_exp,
    elementary_abelian,
    is_prime,
)
from wpf.attacks import make_adversary
from wpf.blackbox import lambda_contains, min_width, reduct, wrap
from wpf.slp import Op, Slp, SlpError, run

SCHEMA_VERSION = 1
ENUMERATION_CAP = 10**6


class GameError(ValueError):
    pass


class TrivialVarietyError(GameError):
    pass


# --------------------------------------------------------------------------
# polynomials in k


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Pow: operator.pow}


@dataclass(frozen=True)
class Poly:
    """Integer polynomial in ``k`` written like ``2*k^2 + 1``."""

    text: str

    def __post_init__(self):
        self._node  # validates

    @cached_property
    def _node(self):
        tree = ast.parse(self.text.replace("^", "**"), mode="eval").body

        def check(n):
            if isinstance(n, ast.BinOp) and type(n.op) in _BINOPS:
                check(n.left)
                check(n.right)
            elif isinstance(n, ast.UnaryOp) and isinstance(n.op, ast.USub):
                check(n.operand)
            elif isinstance(n, ast.Name) and n.id == "k":
                pass
            elif isinstance(n, ast.Constant) and isinstance(n.value, int):
                pass
            else:
                raise GameError(f"not a polynomial in k: {self.text!r}")

        check(tree)
        return tree

    def __call__(self, k: int) -> int:
        def ev(n):
            if isinstance(n, ast.BinOp):
                return _BINOPS[type(n.op)](ev(n.left), ev(n.right))
            if isinstance(n, ast.UnaryOp):
                return -ev(n.operand)
            if isinstance(n, ast.Name):
                return k
            return n.value

        return int(ev(self._node))

    def __str__(self):
        return self.text


# --------------------------------------------------------------------------
# families


@dataclass
class FamilySpec:
    """An indexed family of finite algebras with index levels.

    Indices are bit strings.  ``gammas`` names group structures inside the
    signature: each maps group symbols (mul/inv/one) to family symbols and
    carries the variety generated by the corresponding reducts.
    """

    name: str
    params: str
    indices: tuple[str, ...]
    build: Callable[[str], FiniteAlgebra]
    variety: VarietySpec | None
    gammas: dict
    eta_text: str
    eta: Callable[[int], int]
    level_fn: Callable[[int], tuple[str, ...]] | None = None
    labels: dict = field(default_factory=dict)
    ref_fn: Callable[[str], str] | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def algebra_at(self, d: str) -> FiniteAlgebra:
        if d not in self._cache:
            if d not in self.indices:
                raise GameError(f"{d!r} is not an index of {self.name}")
            self._cache[d] = self.build(d)
        return self._cache[d]

    def label(self, d: str) -> str:
        return self.labels.get(d, d)

    def ref(self, d: str) -> str:
        """Algebra reference resolvable by ``models.algebra_from_ref``."""
        return self.ref_fn(d) if self.ref_fn else f"{self.name}:{self.label(d)}"

    def index_of(self, label: str) -> str:
        for d, lab in self.labels.items():
            if lab == str(label):
                return d
        if label in self.indices:
            return label
        raise GameError(f"no index labelled {label!r} in {self.name}")

    def levels(self, k: int) -> tuple[str, ...]:
        dk = self.level_fn(k) if self.level_fn else self.indices
        if not dk:
            raise GameError(f"D_{k} is empty for {self.name}")
        return dk

    def theta(self, k: int) -> int:
        return max(len(d) for d in self.levels(k))

    def xi(self, d: str) -> int:
        return min_width(self.algebra_at(d).size)

    def check_lengths(self, k: int, d: str) -> None:
        if len(d) > self.theta(k):
            raise GameError(f"index {d} longer than theta({k})")
        if self.xi(d) > self.eta(len(d)):
            raise GameError(f"encoding width {self.xi(d)} exceeds eta(|d|) = {self.eta(len(d))}")

    def sample_index(self, k: int, rng) -> str:
        dk = self.levels(k)
        return dk[int(rng.integers(len(dk)))]

    def describe(self) -> dict:
        return {"name": self.name, "params": self.params, "eta": self.eta_text,
                "variety": None if self.variety is None else str(self.variety)}


def parse_range(text: str) -> list[int]:
    """``6..30``, ``15,21,33`` or mixtures like ``2..4,7``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise GameError(f"empty parameter range {text!r}")
    return sorted(set(out))


def _kv(params: str) -> dict:
    out = {}
    for part in params.split(";"):
        k, _, v = part.partition("=")
        if v:
            out[k.strip()] = v.strip()
    return out


def _modular_family(name, params, ns, builder, variety, gammas):
    indices = tuple(format(n, "b") for n in ns)
    return FamilySpec(
        name, params, indices,
        lambda d: builder(int(d, 2)),
        variety, gammas,
        eta_text="l", eta=lambda l: l,
        labels={d: str(int(d, 2)) for d in indices},
    )


GROUP_GAMMA = {"mul": "mul", "inv": "inv", "one": "one"}


def make_family(name: str, params: str) -> FamilySpec:
    """Built-in families.

    ``zn-add`` / ``zn-star`` / ``ring-zn`` take a modulus range (``6..30``);
    ``elem-abelian`` takes ``p=2;k=2..4`` and uses level k for dimension k;
    ``direct-power`` takes ``base=zn-add:3;e=1..4``.
    """
    if name == "zn-add":
        return _modular_family(name, params, [n for n in parse_range(params) if n >= 1],
                               models.cyclic_group, ABELIAN, {"group": (GROUP_GAMMA, ABELIAN)})
    if name == "zn-star":
        return _modular_family(name, params, [n for n in parse_range(params) if n >= 2],
                               models.units_group, ABELIAN, {"group": (GROUP_GAMMA, ABELIAN)})
    if name == "ring-zn":
        return _modular_family(name, params, parse_range(params), models.ring_zn, None,
                               {"additive": ({"mul": "add", "inv": "neg", "one": "zero"}, ABELIAN)})
    if name in ("elem-abelian", "direct-power"):
        kv = _kv(params)
        if name == "elem-abelian":
            p = int(kv.get("p", 2))
            if not is_prime(p):
                raise GameError("p must be prime")
            dims = parse_range(kv.get("k", "1..3"))
            base = models.cyclic_group(p)
            variety = elementary_abelian(p)
            build = lambda d: models.elementary_abelian_group(p, len(d))
            width = max(1, (p - 1).bit_length())
            ref_fn = lambda d: f"elem-abelian:{p}^{len(d)}"
        else:
            base = models.algebra_from_ref(kv.get("base", "zn-add:2"))
            dims = parse_range(kv.get("e", "1..3"))
            variety = _base_variety(kv.get("base", "zn-add:2"))
            build = lambda d: models.direct_power(base, len(d))
            width = max(1, (base.size - 1).bit_length())
            ref_fn = lambda d: f"direct-power:{kv.get('base', 'zn-add:2')}^{len(d)}"
        indices = tuple("1" * k for k in dims)
        return FamilySpec(
            name, params, indices, build, variety, {"group": (GROUP_GAMMA, variety)},
            eta_text=f"{width}*l", eta=lambda l: width * l,
            level_fn=lambda k: tuple(d for d in indices if len(d) == k),
            labels={d: str(len(d)) for d in indices},
            ref_fn=ref_fn,
        )
    raise GameError(f"unknown family {name!r}")


def _base_variety(ref: str) -> VarietySpec:
    kind, _, arg = ref.partition(":")
    if kind == "zn-add":
        q = int(arg)
        return elementary_abelian(q) if is_prime(q) else abelian_exp(q)
    if kind == "zn-star":
        return ABELIAN
    return ALL_GROUPS


# --------------------------------------------------------------------------
# configuration and reports


@dataclass
class GameConfig:
    k: int = 1
    pi: Poly = field(default_factory=lambda: Poly("1"))
    tau: Poly = field(default_factory=lambda: Poly("0"))
    trials: int = 100
    master_seed: int = 0
    adversary: str = "inf:exact"
    strict: bool = True

    def __post_init__(self):
        if isinstance(self.pi, str):
            self.pi = Poly(self.pi)
        if isinstance(self.tau, str):
            self.tau = Poly(self.tau)
        if self.trials < 1:
            raise GameError("trials must be >= 1")
        if self.pi(self.k) < 1:
            raise GameError("pi(k) must be >= 1")
        if self.tau(self.k) < 0:
            raise GameError("tau(k) must be >= 0")

    def to_dict(self) -> dict:
        return {"k": self.k, "pi": str(self.pi), "tau": str(self.tau), "trials": self.trials,
                "master_seed": self.master_seed, "adversary": self.adversary, "strict": self.strict,
                "pi_k": self.pi(self.k), "tau_k": self.tau(self.k)}


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass
class TrialReport:
    mode: str
    family: dict
    config: dict
    successes: int
    trials: int
    instances: int
    min_fraction: Fraction | None = None
    mean_fraction: Fraction | None = None
    partial: bool = False
    query_stats: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def estimate(self) -> float:
        if self.mean_fraction is not None:
            return float(self.mean_fraction)
        return self.successes / self.trials

    @property
    def per_instance_min(self) -> float | None:
        return None if self.min_fraction is None else float(self.min_fraction)

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)

    def to_dict(self) -> dict:
        lo, hi = self.wilson
        return {
            "schema": SCHEMA_VERSION,
            "version": wpf.__version__,
            "mode": self.mode,
            "family": self.family,
            "config": self.config,
            "results": {
                "successes": self.successes,
                "trials": self.trials,
                "instances": self.instances,
                "estimate": self.estimate,
                "wilson_interval": [lo, hi],
                "per_instance_min": self.per_instance_min,
                "partial": self.partial,
                "query_stats": self.query_stats,
                **self.extra,
            },
        }


class _Stats:
    def __init__(self):
        self.count = 0
        self.bb_total = 0
        self.bb_max = 0
        self.oracle_total = 0

    def add(self, outcome):
        self.count += 1
        self.bb_total += outcome.bb_queries
        self.bb_max = max(self.bb_max, outcome.bb_queries)
        self.oracle_total += outcome.oracle_queries

    def to_dict(self):
        c = max(self.count, 1)
        return {"bb_queries_mean": self.bb_total / c, "bb_queries_max": self.bb_max,
                "oracle_calls_mean": self.oracle_total / c}


def _verify(variety, bb, g, outcome) -> bool:
    if not outcome.success:
        return False
    try:
        return lambda_contains(variety, len(g), bb, g, outcome.result)
    except SlpError:
        return False


def _sample(bb, count: int, rng) -> tuple:
    elems = bb.elements()
    return tuple(elems[int(i)] for i in rng.integers(len(elems), size=count))


def _group_view(f: FamilySpec, gamma: str | None):
    """(variety used by the verifier, function turning a full black box into
    the attacked one)."""
    if gamma is None:
        if f.variety is None:
            raise GameError(f"family {f.name} has no variety supported by the verifier; pick a gamma")
        return f.variety, lambda bb: bb
    if gamma not in f.gammas:
        raise GameError(f"{gamma!r} is not a group structure of {f.name} (have {sorted(f.gammas)})")
    mapping, variety = f.gammas[gamma]
    back = {old: new for new, old in mapping.items()}
    if all(k == v for k, v in mapping.items()) and len(mapping) == len(f.algebra_at(f.indices[0]).signature.symbols):
        return variety, lambda bb: bb
    return variety, lambda bb: reduct(bb, list(mapping.values()), back)


def run_average_game(f: FamilySpec, cfg: GameConfig, gamma: str | None = None) -> TrialReport:
    """Sample index, fresh black box, challenge tuple and auxiliary tuple per
    trial; count verified relations."""
    t0 = time.perf_counter()
    variety, view = _group_view(f, gamma)
    proto = make_adversary(cfg.adversary)
    m, tau = cfg.pi(cfg.k), cfg.tau(cfg.k)
    stats = _Stats()
    successes = 0
    for t in range(cfg.trials):
        rng = np.random.default_rng([cfg.master_seed, t])
        d = f.sample_index(cfg.k, rng)
        f.check_lengths(cfg.k, d)
        bb = view(wrap(f.algebra_at(d), f.xi(d), int(rng.integers(2**63)), cfg.strict, f.ref(d)))
        g = _sample(bb, m, rng)
        r = _sample(bb, tau, rng)
        outcome = proto.fresh()(bb, g, r, rng)
        stats.add(outcome)
        successes += _verify(variety, bb, g, outcome)
    rep = TrialReport("average", f.describe(), cfg.to_dict(), successes, cfg.trials, cfg.trials,
                      query_stats=stats.to_dict(), wall_time=time.perf_counter() - t0)
    rep.extra["variety"] = str(variety)
    return rep


def count_instances(f: FamilySpec, k: int, m: int) -> int:
    return sum(f.algebra_at(d).size ** m for d in f.levels(k))


def _instances(f, k, m, budget, seed):
    """Yield (d position, d, tuple iterator factory) and whether the sweep is
    complete."""
    dk = f.levels(k)
    sizes = [f.algebra_at(d).size ** m for d in dk]
    if sum(sizes) <= budget:
        return [(i, d, None) for i, d in enumerate(dk)], False
    rng = np.random.default_rng([seed, 0x5EED])
    weights = np.array(sizes, dtype=float) / sum(sizes)
    picks = rng.choice(len(dk), size=budget, p=weights)
    counts = np.bincount(picks, minlength=len(dk))
    return [(i, d, int(counts[i])) for i, d in enumerate(dk) if counts[i]], True


def _sweep(f, cfg, m, instance_budget, per_instance_trials, prepare, verify, observer):
    plan, partial = _instances(f, cfg.k, m, instance_budget, cfg.master_seed)
    proto = make_adversary(cfg.adversary)
    reps = 1 if proto.deterministic else (per_instance_trials or cfg.trials)
    stats = _Stats()
    successes = runs = instances = 0
    best_min = None
    for pos, d, sample_count in plan:
        f.check_lengths(cfg.k, d)
        bb, ctx = prepare(d, int(np.random.default_rng([cfg.master_seed, pos, 1]).integers(2**63)))
        adv = proto.fresh()
        elems = bb.elements()
        if sample_count is None:
            tuples = product(elems, repeat=m)
        else:
            srng = np.random.default_rng([cfg.master_seed, pos, 2])
            idx = srng.integers(len(elems), size=(sample_count, m))
            tuples = (tuple(elems[int(i)] for i in row) for row in idx)
        for inst, g in enumerate(tuples):
            wins = 0
            for rep in range(reps):
                rng = None if reps == 1 and proto.deterministic else np.random.default_rng(
                    [cfg.master_seed, pos, 3, inst, rep])
                outcome = adv(bb, g, (), rng)
                stats.add(outcome)
                ok = verify(ctx, bb, g, outcome)
                wins += ok
                if observer is not None:
                    observer(bb, g, outcome, ok)
            successes += wins
            runs += reps
            instances += 1
            if best_min is None or wins < best_min:
                best_min = wins
    min_frac = Fraction(best_min, reps) if instances else None
    mean_frac = Fraction(successes, runs) if runs else None
    return successes, runs, instances, min_frac, mean_frac, partial, stats


def run_worstcase_game(f: FamilySpec, cfg: GameConfig, instance_budget: int = ENUMERATION_CAP,
                       per_instance_trials: int | None = None, gamma: str | None = None,
                       observer=None) -> TrialReport:
    """Minimum over (d, g) of the per-instance success rate.

    Every (d, g) with d in D_k is enumerated when there are at most
    ``instance_budget`` of them; otherwise that many are sampled and the
    report is flagged partial.  Deterministic adversaries run once per
    instance; randomised ones ``per_instance_trials`` times (default
    ``cfg.trials``).  ``observer(bb, g, outcome, verified)`` sees every run.
    """
    t0 = time.perf_counter()
    variety, view = _group_view(f, gamma)
    m = cfg.pi(cfg.k)

    def prepare(d, seed):
        return view(wrap(f.algebra_at(d), f.xi(d), seed, cfg.strict, f.ref(d))), None

    def verify(ctx, bb, g, outcome):
        return _verify(variety, bb, g, outcome)

    s, n, inst, mn, mean, partial, stats = _sweep(f, cfg, m, instance_budget, per_instance_trials,
                                                  prepare, verify, observer)
    rep = TrialReport("worst-case", f.describe(), cfg.to_dict(), s, n, inst, mn, mean, partial,
                      stats.to_dict(), wall_time=time.perf_counter() - t0)
    rep.extra["variety"] = str(variety)
    return rep


def _translate(u: Slp, mapping: dict) -> Slp:
    return Slp(tuple(Op(mapping[i.symbol], i.operands) if isinstance(i, Op) else i for i in u.instrs))


def end_to_end_theorem_demo(f: FamilySpec, gamma: str, cfg: GameConfig,
                            instance_budget: int = ENUMERATION_CAP, observer=None) -> TrialReport:
    """Attack the group reducts of a family of expanded groups.

    The attack is chosen by the exponent of the reduct variety: order finding
    with one challenge element when it is infinite, constructive membership
    with more challenge elements than the encoding width otherwise.  Each
    success is re-checked on the full algebra and on an independently
    re-encoded copy.
    """
    t0 = time.perf_counter()
    if gamma not in f.gammas:
        raise GameError(f"{gamma!r} is not a group structure of {f.name} (have {sorted(f.gammas)})")
    mapping, variety = f.gammas[gamma]
    dk = f.levels(cfg.k)
    if variety.trivial or all(f.algebra_at(d).size == 1 for d in dk):
        raise TrivialVarietyError("the reducts generate the trivial variety; no nontrivial relation exists")
    back = {old: new for new, old in mapping.items()}
    if variety.exponent == INFINITE:
        adversary, pi = _pick(cfg.adversary, "inf", "inf:exact"), "1"
    else:
        adversary, pi = _pick(cfg.adversary, "fin", "fin:bfs"), str(max(f.xi(d) for d in dk) + 1)
    run_cfg = GameConfig(cfg.k, Poly(pi), Poly("0"), cfg.trials, cfg.master_seed, adversary, cfg.strict)
    m = run_cfg.pi(cfg.k)
    counters = {"full_verified": 0, "rewrap_verified": 0}

    def prepare(d, seed):
        alg = f.algebra_at(d)
        ref = f.ref(d)
        full = wrap(alg, f.xi(d), seed, cfg.strict, ref)
        twin = wrap(alg, f.xi(d), seed ^ 0x9E3779B97F4A7C15, cfg.strict, ref)
        return reduct(full, list(mapping.values()), back), (full, reduct(twin, list(mapping.values()), back))

    def verify(ctx, bb, g, outcome):
        if not _verify(variety, bb, g, outcome):
            return False
        full, twin = ctx
        pair = outcome.result
        # same carrier codes, full signature: the translated pair evaluates equal
        lhs = run(_translate(pair.left, mapping), full, g)
        rhs = run(_translate(pair.right, mapping), full, g)
        counters["full_verified"] += lhs == rhs
        g2 = tuple(twin.encode(bb.decode(h)) for h in g)
        counters["rewrap_verified"] += lambda_contains(variety, len(g2), twin, g2, pair)
        return True

    s, n, inst, mn, mean, partial, stats = _sweep(f, run_cfg, m, instance_budget, None,
                                                  prepare, verify, observer)
    rep = TrialReport("theorem-demo", f.describe(), run_cfg.to_dict(), s, n, inst, mn, mean, partial,
                      stats.to_dict(), wall_time=time.perf_counter() - t0)
    rep.extra.update({
        "gamma": gamma,
        "reduct_variety": str(variety),
        "exponent": "infinite" if variety.exponent == INFINITE else variety.exponent,
        "attack": run_cfg.adversary,
        **counters,
    })
    return rep


def _pick(requested: str, kind: str, default: str) -> str:
    return requested if requested.split(":")[0] == kind else default


def estimate_negligibility_curve(f: FamilySpec, cfg: GameConfig, k_list, gamma: str | None = None) -> list[dict]:
    rows = []
    for k in k_list:
        kcfg = GameConfig(k, cfg.pi, cfg.tau, cfg.trials, cfg.master_seed, cfg.adversary, cfg.strict)
        rep = run_average_game(f, kcfg, gamma)
        lo, hi = rep.wilson
        rows.append({"k": k, "pi_k": kcfg.pi(k), "successes": rep.successes, "trials": rep.trials,
                     "estimate": rep.estimate, "wilson_low": lo, "wilson_high": hi})
    return rows


def write_curve_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
