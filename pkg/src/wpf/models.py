"""Concrete finite algebras used by the families and the test corpus."""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product

import numpy as np

from wpf.algebra import GROUP, RING, AlgebraError, FiniteAlgebra


@lru_cache(maxsize=None)
def cyclic_group(n: int) -> FiniteAlgebra:
    """Additive group Z_n written with the group symbols mul/inv/one."""
    if n < 1:
        raise AlgebraError("n must be positive")
    r = np.arange(n)
    return FiniteAlgebra(
        GROUP,
        range(n),
        {"mul": (r[:, None] + r[None, :]) % n, "inv": (-r) % n, "one": 0},
        name=f"zn-add:{n}",
    )


@lru_cache(maxsize=None)
def units_group(n: int) -> FiniteAlgebra:
    """Multiplicative group of units modulo n."""
    if n < 1:
        raise AlgebraError("n must be positive")
    units = [a for a in range(n) if math.gcd(a, n) == 1] if n > 1 else [0]
    return FiniteAlgebra.from_functions(
        GROUP,
        units,
        {
            "mul": lambda a, b: (a * b) % n,
            "inv": lambda a: pow(a, -1, n) if n > 1 else 0,
            "one": lambda: 1 % n,
        },
        name=f"zn-star:{n}",
    )


@lru_cache(maxsize=None)
def direct_power(base: FiniteAlgebra, k: int) -> FiniteAlgebra:
    """Componentwise k-th direct power; elements are k-tuples."""
    if k < 0:
        raise AlgebraError("k must be nonnegative")
    carrier = list(product(base.carrier, repeat=k))
    funcs = {}
    for sym, ar in base.signature.symbols:
        def f(*xs, sym=sym):
            return tuple(base.op(sym, *cs) for cs in zip(*xs)) if xs else (base.op(sym),) * k
        funcs[sym] = f
    return FiniteAlgebra.from_functions(base.signature, carrier, funcs, name=f"direct-power:{base.name}^{k}")


@lru_cache(maxsize=None)
def elementary_abelian_group(p: int, k: int) -> FiniteAlgebra:
    """(Z_p)^k with integer-coded carrier 0..p^k-1 (base-p digits)."""
    n = p**k
    digits = np.array([[(x // p**j) % p for j in range(k)] for x in range(n)], dtype=np.int64).reshape(n, k)
    weights = p ** np.arange(k, dtype=np.int64)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    neg = ((-digits) % p) @ weights
    carrier = [tuple(int(c) for c in row) for row in digits]
    return FiniteAlgebra(GROUP, carrier, {"mul": add, "inv": neg, "one": 0}, name=f"elem-abelian:{p}^{k}")


@lru_cache(maxsize=None)
def dihedral_group(n: int) -> FiniteAlgebra:
    """Dihedral group of order 2n; elements (r, s) meaning rot^r ref^s."""
    carrier = [(r, s) for s in range(2) for r in range(n)]

    def m(a, b):
        r1, s1 = a
        r2, s2 = b
        return ((r1 + (-r2 if s1 else r2)) % n, (s1 + s2) % 2)

    def i(a):
        r, s = a
        return (r, 1) if s else ((-r) % n, 0)

    return FiniteAlgebra.from_functions(GROUP, carrier, {"mul": m, "inv": i, "one": lambda: (0, 0)},
                                        name=f"dihedral:{n}")


@lru_cache(maxsize=None)
def ring_zn(n: int) -> FiniteAlgebra:
    """The ring Z_n over add/neg/zero/mul."""
    r = np.arange(n)
    return FiniteAlgebra(
        RING,
        range(n),
        {
            "add": (r[:, None] + r[None, :]) % n,
            "neg": (-r) % n,
            "zero": 0,
            "mul": (r[:, None] * r[None, :]) % n,
        },
        name=f"ring-zn:{n}",
    )


def algebra_from_ref(ref: str) -> FiniteAlgebra:
    """Resolve references such as ``zn-add:6``, ``zn-star:15``,
    ``elem-abelian:2^3``, ``dihedral:4``, ``ring-zn:6``,
    ``direct-power:zn-add:3^2`` or ``file:path``."""
    kind, _, arg = ref.partition(":")
    if kind == "file":
        from wpf.algebra import load_algebra

        with open(arg) as fh:
            return load_algebra(fh.read(), name=ref)
    try:
        if kind == "zn-add":
            return cyclic_group(int(arg))
        if kind == "zn-star":
            return units_group(int(arg))
        if kind == "elem-abelian":
            p, _, k = arg.partition("^")
            return elementary_abelian_group(int(p), int(k or 1))
        if kind == "dihedral":
            return dihedral_group(int(arg))
        if kind == "ring-zn":
            return ring_zn(int(arg))
        if kind == "direct-power":
            base, _, k = arg.rpartition("^")
            return direct_power(algebra_from_ref(base), int(k))
    except ValueError as exc:
        raise AlgebraError(f"bad algebra reference {ref!r}: {exc}") from None
    raise AlgebraError(f"unknown algebra reference {ref!r}")
