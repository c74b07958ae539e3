"""A small statevector simulator for quantum Omega-oracles.

Oracles are permutations of computational basis labels, so every gate here is
a permutation unitary and acts exactly (amplitudes are moved, never mixed).
The only non-permutation step is the Fourier transform inside phase
estimation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from wpf import kernels

NORM_TOL = 1e-9
MAX_QUBITS = 24


class SimulationError(RuntimeError):
    pass


class DisciplineViolation(SimulationError):
    """An oracle was applied to a state with weight outside its domain."""


class SimulationBudgetExceeded(SimulationError):
    pass


@dataclass
class StateVec:
    """Amplitudes over registers of the given widths; register 1 holds the
    most significant bits of the basis index."""

    widths: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        self.widths = tuple(int(w) for w in self.widths)
        if self.amps.shape != (2**self.num_qubits,):
            raise SimulationError("amplitude vector has the wrong length")

    @property
    def num_qubits(self) -> int:
        return sum(self.widths)

    @property
    def shifts(self) -> tuple[int, ...]:
        out, acc = [], 0
        for w in reversed(self.widths):
            out.append(acc)
            acc += w
        return tuple(reversed(out))

    @classmethod
    def basis(cls, widths: Sequence[int], labels: Sequence[int]) -> "StateVec":
        widths = tuple(widths)
        amps = np.zeros(2 ** sum(widths), dtype=np.complex128)
        amps[_join(labels, widths)] = 1.0
        return cls(widths, amps)

    @classmethod
    def superposition(cls, widths: Sequence[int], labels: Sequence[Sequence[int]], weights=None) -> "StateVec":
        widths = tuple(widths)
        amps = np.zeros(2 ** sum(widths), dtype=np.complex128)
        if weights is None:
            weights = np.ones(len(labels))
        weights = np.asarray(weights, dtype=np.complex128)
        weights = weights / np.linalg.norm(weights)
        for lab, w in zip(labels, weights):
            amps[_join(lab, widths)] += w
        return cls(widths, amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def check_norm(self) -> None:
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise SimulationError(f"state norm drifted to {self.norm()!r}")

    def support(self) -> list[tuple[int, ...]]:
        return [_split(int(i), self.widths) for i in np.flatnonzero(self.amps)]

    def basis_label(self) -> tuple[int, ...]:
        nz = np.flatnonzero(self.amps)
        if len(nz) != 1:
            raise SimulationError("not a computational basis state")
        return _split(int(nz[0]), self.widths)

    def copy(self) -> "StateVec":
        return StateVec(self.widths, self.amps.copy())


def _join(labels: Sequence[int], widths: Sequence[int]) -> int:
    idx = 0
    for lab, w in zip(labels, widths):
        if not 0 <= lab < 2**w:
            raise SimulationError(f"label {lab} does not fit {w} qubits")
        idx = (idx << w) | lab
    return idx


def _split(idx: int, widths: Sequence[int]) -> tuple[int, ...]:
    out = []
    for w in reversed(widths):
        out.append(idx & ((1 << w) - 1))
        idx >>= w
    return tuple(reversed(out))


@dataclass
class PermUnitary:
    """A basis permutation on registers of the given widths.

    ``domain``, when present, marks the local labels on which the operator's
    behaviour is specified; applying it to weight elsewhere breaks black-box
    discipline.
    """

    widths: tuple[int, ...]
    perm: np.ndarray
    domain: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.widths = tuple(int(w) for w in self.widths)
        self.perm = np.asarray(self.perm, dtype=np.int64)
        size = 2 ** sum(self.widths)
        if self.perm.shape != (size,):
            raise SimulationError(f"{self.name}: permutation must have {size} entries")
        check = np.zeros(size, dtype=bool)
        check[self.perm] = True
        if not check.all():
            raise SimulationError(f"{self.name}: not a bijection")

    @property
    def arity_registers(self) -> int:
        return len(self.widths)

    def __call__(self, *labels: int) -> tuple[int, ...]:
        return _split(int(self.perm[_join(labels, self.widths)]), self.widths)

    def inverse(self) -> "PermUnitary":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        dom = None if self.domain is None else self.domain[inv]
        return PermUnitary(self.widths, inv, dom, f"{self.name}^-1")

    def matrix(self) -> np.ndarray:
        size = self.perm.size
        mat = np.zeros((size, size))
        mat[self.perm, np.arange(size)] = 1.0
        return mat


def cnot(n: int) -> PermUnitary:
    """|v>|w> -> |v>|v xor w> on two n-qubit registers."""
    lab = np.arange(4**n, dtype=np.int64)
    v, w = lab >> n, lab & ((1 << n) - 1)
    return PermUnitary((n, n), (v << n) | (v ^ w), name=f"CNOT_{n}")


def swap(n: int) -> PermUnitary:
    lab = np.arange(4**n, dtype=np.int64)
    v, w = lab >> n, lab & ((1 << n) - 1)
    return PermUnitary((n, n), (w << n) | v, name=f"SWAP_{n}")


def identity(widths: Sequence[int]) -> PermUnitary:
    return PermUnitary(tuple(widths), np.arange(2 ** sum(widths), dtype=np.int64), name="I")


def build_quantum_oracle(bb) -> dict[str, PermUnitary]:
    """XOR-semantics permutation unitary for every symbol of ``bb``.

    Labels with an operand outside the carrier are left fixed.
    """
    if not bb.carrier:
        raise SimulationError("empty carrier")
    n = bb.n
    if n * (1 + max((a for _, a in bb.signature.symbols), default=0)) > MAX_QUBITS:
        raise SimulationBudgetExceeded("oracle registers too wide to tabulate")
    member = np.zeros(2**n, dtype=bool)
    member[list(bb.carrier)] = True
    out = {}
    for sym, ar in bb.signature.symbols:
        size = 2 ** (n * (ar + 1))
        lab = np.arange(size, dtype=np.int64)
        v = lab & ((1 << n) - 1)
        ops = [(lab >> (n * (ar - k))) & ((1 << n) - 1) for k in range(ar)]
        dom = np.ones(size, dtype=bool)
        for o in ops:
            dom &= member[o]
        tab = bb._tables[sym]
        res = np.zeros(size, dtype=np.int64)
        if ar == 0:
            res[:] = int(tab[()])
        else:
            res[dom] = tab[tuple(o[dom] for o in ops)]
        perm = np.where(dom, (lab & ~((1 << n) - 1)) | (v ^ res), lab)
        out[sym] = PermUnitary((n,) * (ar + 1), perm, dom, f"U_{sym}")
    return out


def _mass_outside(W: PermUnitary, regs, state: StateVec) -> float:
    nz = np.flatnonzero(np.abs(state.amps) > 0)
    if not len(nz):
        return 0.0
    shifts = state.shifts
    local = np.zeros(len(nz), dtype=np.int64)
    for r in regs:
        w = state.widths[r - 1]
        local = (local << w) | ((nz >> shifts[r - 1]) & ((1 << w) - 1))
    bad = ~W.domain[local]
    return float(np.sum(np.abs(state.amps[nz[bad]]) ** 2))


def apply_on_registers(W: PermUnitary, registers: Sequence[int], state: StateVec,
                       check_domain: bool = False) -> StateVec:
    """Apply ``W`` to the listed (1-based, distinct) registers of ``state``."""
    regs = tuple(int(r) for r in registers)
    if len(set(regs)) != len(regs):
        raise SimulationError(f"overlapping registers {regs}")
    if len(regs) != W.arity_registers:
        raise SimulationError(f"{W.name} acts on {W.arity_registers} registers, got {len(regs)}")
    for r, w in zip(regs, W.widths):
        if not 1 <= r <= len(state.widths):
            raise SimulationError(f"no register {r}")
        if state.widths[r - 1] != w:
            raise SimulationError(f"register {r} has width {state.widths[r - 1]}, {W.name} expects {w}")
    if check_domain and W.domain is not None:
        bad = _mass_outside(W, regs, state)
        if bad > NORM_TOL:
            raise DisciplineViolation(f"{W.name} applied with weight {bad:.3g} outside its domain")
    shifts = np.array([state.shifts[r - 1] for r in regs], dtype=np.int64)
    widths = np.array(W.widths, dtype=np.int64)
    amps = kernels.permute_registers(np.ascontiguousarray(state.amps), W.perm, shifts, widths)
    return StateVec(state.widths, amps)


# --------------------------------------------------------------------------
# circuits


@dataclass
class Circuit:
    """A sequence of permutation gates on named registers.

    ``outputs`` lists the registers carrying the result; the rest are
    ancillas, which enter as |0^n> unless listed in ``inputs``.
    """

    widths: tuple[int, ...]
    ops: list = field(default_factory=list)
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    name: str = ""

    def then(self, W: PermUnitary, *regs: int) -> "Circuit":
        self.ops.append((W, tuple(regs)))
        return self

    def apply(self, state: StateVec, check_domain: bool = True) -> StateVec:
        for W, regs in self.ops:
            state = apply_on_registers(W, regs, state, check_domain)
        return state

    def trace(self, labels: Sequence[int], check_domain: bool = True) -> tuple[int, ...]:
        """Push one basis label through the gates."""
        vals = list(labels)
        for W, regs in self.ops:
            local = _join([vals[r - 1] for r in regs], W.widths)
            if check_domain and W.domain is not None and not W.domain[local]:
                raise DisciplineViolation(f"{W.name} applied outside its domain at {labels}")
            for r, x in zip(regs, _split(int(W.perm[local]), W.widths)):
                vals[r - 1] = x
        return tuple(vals)

    def run_basis(self, values: Sequence[int]) -> tuple[int, ...]:
        """Trace with ``values`` on the input registers and zero ancillas."""
        labels = [0] * len(self.widths)
        for r, x in zip(self.inputs, values):
            labels[r - 1] = x
        return self.trace(labels)


def compile_inplace(circ: Circuit, domain: np.ndarray, name: str = "") -> PermUnitary:
    """Collapse a circuit whose ancillas are restored into a permutation on its
    input registers; labels outside ``domain`` are fixed."""
    widths = tuple(circ.widths[r - 1] for r in circ.inputs)
    size = 2 ** sum(widths)
    perm = np.arange(size, dtype=np.int64)
    anc = [r for r in range(1, len(circ.widths) + 1) if r not in circ.inputs]
    for lab in np.flatnonzero(domain):
        vals = _split(int(lab), widths)
        out = circ.run_basis(vals)
        if any(out[r - 1] for r in anc):
            raise SimulationError(f"{circ.name}: ancillas not restored on {vals}")
        perm[lab] = _join([out[r - 1] for r in circ.inputs], widths)
    return PermUnitary(widths, perm, domain.copy(), name or circ.name)


def _pair_domain(bb) -> np.ndarray:
    n = bb.n
    member = np.zeros(2**n, dtype=bool)
    member[list(bb.carrier)] = True
    return (member[:, None] & member[None, :]).reshape(-1)


def derive_mul_pair(U: dict, n: int, clean: bool = True) -> tuple[Circuit, Circuit]:
    """Left multiplication ``M`` and left division ``M'`` from a group oracle.

    With ``clean=False`` the circuits are the bare two-gate constructions whose
    outputs sit in registers (1, 3) and (1, 4) next to garbage.  With
    ``clean=True`` the garbage is uncomputed and the result swapped back so
    that both act in place on registers (1, 2) with zeroed ancillas.
    """
    for sym in ("mul", "inv"):
        if U[sym].widths[0] != n:
            raise SimulationError(f"U_{sym} has register width {U[sym].widths[0]}, expected {n}")
    Um, Ui = U["mul"], U["inv"]
    if not clean:
        M = Circuit((n,) * 3, inputs=(1, 2), outputs=(1, 3), name="M").then(Um, 1, 2, 3)
        Mp = Circuit((n,) * 4, inputs=(1, 2), outputs=(1, 4), name="M'")
        Mp.then(Ui, 1, 3).then(Um, 3, 2, 4)
        return M, Mp
    sw = swap(n)
    M = Circuit((n,) * 4, inputs=(1, 2), outputs=(1, 2), name="M")
    M.then(Um, 1, 2, 3).then(Ui, 1, 4).then(Um, 4, 3, 2).then(Ui, 1, 4).then(sw, 2, 3)
    Mp = Circuit((n,) * 4, inputs=(1, 2), outputs=(1, 2), name="M'")
    Mp.then(Ui, 1, 3).then(Um, 3, 2, 4).then(Um, 1, 4, 2).then(Ui, 1, 3).then(sw, 2, 4)
    return M, Mp


def compile_mul_pair(bb, U: dict | None = None) -> tuple[PermUnitary, PermUnitary]:
    """In-place (M, M') as two-register permutations built from ``bb``'s
    quantum oracle."""
    U = U or build_quantum_oracle(bb)
    M, Mp = derive_mul_pair(U, bb.n, clean=True)
    dom = _pair_domain(bb)
    return compile_inplace(M, dom, "M"), compile_inplace(Mp, dom, "M'")


def direct_mul_pair(bb) -> tuple[PermUnitary, PermUnitary]:
    """(M, M') tabulated straight from oracle queries."""
    n = bb.n
    size = 4**n
    dom = _pair_domain(bb)
    m = np.arange(size, dtype=np.int64)
    mp = np.arange(size, dtype=np.int64)
    for lab in np.flatnonzero(dom):
        g, h = int(lab) >> n, int(lab) & ((1 << n) - 1)
        m[lab] = (g << n) | bb.query("mul", g, h)
        mp[lab] = (g << n) | bb.query("mul", bb.query("inv", g), h)
    return PermUnitary((n, n), m, dom.copy(), "M"), PermUnitary((n, n), mp, dom.copy(), "M'")


def derive_oracle_from_pair(M: PermUnitary, Mp: PermUnitary, n: int, clean: bool = True) -> dict[str, Circuit]:
    """Group oracle circuits (U_mul, U_inv, U_one) from an (M, M') pair.

    Register layouts: U_mul on |g>|h>|v>|anc>, U_inv on |h>|v>|anc>, U_one on
    |h>|v>|anc> where h is any carrier element.  ``clean`` appends gates that
    return the ancilla to |0^n>.
    """
    if M.widths != (n, n) or Mp.widths != (n, n):
        raise SimulationError("M and M' must act on two n-qubit registers")
    cx = cnot(n)
    Um = Circuit((n,) * 4, inputs=(1, 2, 3), outputs=(1, 2, 3), name="U_mul")
    Um.then(cx, 2, 4).then(M, 1, 4).then(cx, 4, 3)
    Ui = Circuit((n,) * 3, inputs=(1, 2), outputs=(1, 2), name="U_inv")
    Ui.then(cx, 1, 3).then(Mp, 1, 3).then(Mp, 1, 3).then(cx, 3, 2)
    Uo = Circuit((n,) * 3, inputs=(1, 2), outputs=(2,), name="U_one")
    Uo.then(cx, 1, 3).then(Mp, 1, 3).then(cx, 3, 2)
    if clean:
        Um.then(Mp, 1, 4).then(cx, 2, 4)
        Ui.then(M, 1, 3).then(M, 1, 3).then(cx, 1, 3)
        Uo.then(M, 1, 3).then(cx, 1, 3)
    return {"mul": Um, "inv": Ui, "one": Uo}


# --------------------------------------------------------------------------
# order finding by phase estimation


@dataclass
class QpeResult:
    candidates: list
    verified: list
    shots: int
    counting_qubits: int
    queries: int = 0

    @property
    def s(self) -> int | None:
        good = [c for c, ok in zip(self.candidates, self.verified) if ok]
        return min(good) if good else None

    def to_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "verified": self.verified,
            "shots": self.shots,
            "counting_qubits": self.counting_qubits,
            "s": self.s,
        }


def classical_power(bb, g: int, e: int) -> int:
    acc = bb.query("one")
    base = g
    while e:
        if e & 1:
            acc = bb.query("mul", acc, base)
        e >>= 1
        if e:
            base = bb.query("mul", base, base)
    return acc


def order_find_qpe(bb, g: int, counting_qubits: int, shots: int, rng=None, seed: int = 0) -> QpeResult:
    """Phase estimation over controlled left multiplications by g^(2^j),
    followed by continued fractions and a classical check of every candidate.
    Only candidates with g^s = 1 are marked verified."""
    n = bb.n
    c = counting_qubits
    if n > 5 or c + n > 20:
        raise SimulationBudgetExceeded(f"{c} counting qubits with width {n} is beyond the simulator budget")
    if g not in bb.carrier:
        raise SimulationError("g is not a carrier element")
    rng = rng if rng is not None else np.random.default_rng(seed)
    start = bb.queries
    M, _ = compile_mul_pair(bb)
    one = bb.query("one")
    member = np.zeros(2**n, dtype=bool)
    member[list(bb.carrier)] = True
    widths = (1,) * c + (n,)

    N = 2**c
    amps = np.zeros(N * 2**n, dtype=np.complex128)
    amps[np.arange(N) * 2**n + one] = 1 / np.sqrt(N)
    state = StateVec(widths, amps)

    a = g
    lab = np.arange(2 * 2**n, dtype=np.int64)
    ctrl, x = lab >> n, lab & ((1 << n) - 1)
    dom = member[x]
    for j in range(c):
        if j:
            a = bb.query("mul", a, a)
        moved = M.perm[(a << n) | x] & ((1 << n) - 1)
        perm = np.where((ctrl == 1) & dom, (ctrl << n) | moved, lab)
        W = PermUnitary((1, n), perm, dom, f"C-M[g^{2**j}]")
        state = apply_on_registers(W, (c - j, c + 1), state, check_domain=True)
    grid = state.amps.reshape(N, 2**n)
    grid = np.fft.fft(grid, axis=0) / np.sqrt(N)
    probs = np.sum(np.abs(grid) ** 2, axis=1)
    if abs(probs.sum() - 1.0) > NORM_TOL:
        raise SimulationError("norm drift in phase estimation")
    ys = rng.choice(N, size=shots, p=probs / probs.sum())
    cands, ok = [], []
    cache: dict[int, bool] = {}
    for y in ys:
        r = Fraction(int(y), N).limit_denominator(2**n).denominator
        if r not in cache:
            cache[r] = classical_power(bb, g, r) == one
        cands.append(r)
        ok.append(cache[r])
    return QpeResult(cands, ok, shots, c, bb.queries - start)


def check_oracle_report(bb) -> dict:
    """Exhaustive comparison of both conversion directions against the direct
    oracle on carrier basis states."""
    n = bb.n
    U = build_quantum_oracle(bb)
    elems = sorted(bb.carrier)
    M_der, Mp_der = compile_mul_pair(bb, U)
    M_dir, Mp_dir = direct_mul_pair(bb)
    pair_ok = bool(np.array_equal(M_der.perm, M_dir.perm) and np.array_equal(Mp_der.perm, Mp_dir.perm))
    derived = derive_oracle_from_pair(M_dir, Mp_dir, n)
    mismatches = 0
    checked = 0
    for g, h, v in product(elems, elems, range(2**n)):
        checked += 1
        if derived["mul"].run_basis((g, h, v))[:3] != U["mul"](g, h, v):
            mismatches += 1
    for h, v in product(elems, range(2**n)):
        checked += 2
        if derived["inv"].run_basis((h, v))[:2] != U["inv"](h, v):
            mismatches += 1
        if derived["one"].run_basis((h, v))[1] != U["one"](v)[0]:
            mismatches += 1
    return {
        "blackbox": bb.describe(),
        "pair_from_oracle_matches": pair_ok,
        "oracle_from_pair_checked": checked,
        "oracle_from_pair_mismatches": mismatches,
        "ok": pair_ok and mismatches == 0,
    }
