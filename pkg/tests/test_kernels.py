"""Both kernel backends must agree bit for bit."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wpf import kernels
from wpf.kernels import backends

IMPLS = backends()
needs_compiled = pytest.mark.skipif("cython" not in IMPLS, reason="compiled kernels not built")


@st.composite
def random_algebra(draw):
    size = draw(st.integers(1, 9))
    arities = draw(st.lists(st.integers(0, 3), min_size=1, max_size=3))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    tables = [np.ascontiguousarray(rng.integers(size, size=size**a).astype(np.int64)) for a in arities]
    seeds = rng.integers(size, size=draw(st.integers(0, 4))).astype(np.int64)
    target = draw(st.integers(-1, size - 1))
    budget = draw(st.one_of(st.just(-1), st.integers(0, 60)))
    return np.array(arities, dtype=np.int64), tables, size, seeds, target, budget


def test_backend_selected():
    assert kernels.BACKEND in IMPLS


@needs_compiled
@given(random_algebra())
def test_closure_backends_agree(case):
    a = IMPLS["python"].closure(*case)
    b = IMPLS["cython"].closure(*case)
    for x, y in zip(a, b):
        assert np.array_equal(np.asarray(x), np.asarray(y))


@given(random_algebra())
def test_closure_invariants(case):
    arities, tables, size, seeds, target, budget = case
    order, sym, ops, layer, lookups, status = kernels.closure(*case)
    assert len(set(order.tolist())) == len(order)
    assert (np.diff(layer) >= 0).all()
    if status == 0:
        # saturated: closed under every operation
        reached = set(order.tolist())
        for s, a in enumerate(arities):
            tab = tables[s].reshape((size,) * a)
            for pos in np.ndindex(*((len(order),) * a)):
                assert int(tab[tuple(order[list(pos)])]) in reached
    if status == 1:
        assert order[-1] == target
    if budget >= 0:
        assert lookups <= budget


def test_closure_rejects_undefined_entry():
    tab = np.array([0, -1, 1, 1], dtype=np.int64)
    for impl in IMPLS.values():
        with pytest.raises(ValueError):
            impl.closure(np.array([2], dtype=np.int64), [tab], 2, np.array([0, 1], dtype=np.int64))


@st.composite
def permutation_case(draw):
    widths = draw(st.lists(st.integers(1, 3), min_size=1, max_size=4))
    total = sum(widths)
    nsel = draw(st.integers(1, len(widths)))
    regs = draw(st.permutations(range(len(widths))))[:nsel]
    shifts_all = np.cumsum([0] + widths[::-1][:-1])[::-1]
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    local = sum(widths[r] for r in regs)
    perm = rng.permutation(2**local).astype(np.int64)
    amps = rng.normal(size=2**total) + 1j * rng.normal(size=2**total)
    amps[rng.random(2**total) < 0.3] = 0
    return (np.ascontiguousarray(amps), perm, np.array([shifts_all[r] for r in regs], dtype=np.int64),
            np.array([widths[r] for r in regs], dtype=np.int64))


@needs_compiled
@given(permutation_case())
def test_permute_backends_agree(case):
    assert np.array_equal(IMPLS["python"].permute_registers(*case), IMPLS["cython"].permute_registers(*case))


@given(permutation_case())
def test_permute_preserves_multiset(case):
    out = kernels.permute_registers(*case)
    assert np.allclose(np.sort_complex(out), np.sort_complex(case[0]), atol=0)


def test_fallback_forced_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, WPF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from wpf import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
