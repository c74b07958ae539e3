import math

import numpy as np
import pytest

from wpf import models
from wpf.algebra import ABELIAN, ALL_GROUPS, elementary_abelian
from wpf.attacks import (
    MembershipOracle,
    OrderOracle,
    attack_finite,
    attack_infinite_exponent,
    counting_certificate,
    make_adversary,
)
from wpf.blackbox import lambda_contains, wrap
from wpf.slp import RelationPair, identity_slp, input_slp, power_slp, run


def binomial_floor(eps, n):
    return eps - 3 * math.sqrt(eps * (1 - eps) / n)


class TestInfinite:
    def test_units_mod_15(self):
        bb = wrap(models.units_group(15), seed=2)
        g = bb.encode(2)
        out = attack_infinite_exponent(bb, g, OrderOracle())
        assert out.result == RelationPair(power_slp(4), identity_slp())
        assert lambda_contains(ABELIAN, 1, bb, (g,), out.result)

    def test_identity(self):
        bb = wrap(models.units_group(15), seed=2)
        out = attack_infinite_exponent(bb, bb.encode(1), OrderOracle())
        assert out.result == RelationPair(power_slp(1), identity_slp())
        assert lambda_contains(ABELIAN, 1, bb, (bb.encode(1),), out.result)

    @pytest.mark.parametrize("ref,variety", [
        ("zn-star:21", ABELIAN), ("zn-add:12", ABELIAN), ("dihedral:5", ALL_GROUPS), ("elem-abelian:3^2", ABELIAN),
    ])
    def test_every_element(self, ref, variety):
        bb = wrap(models.algebra_from_ref(ref), seed=5)
        for g in bb.elements():
            out = attack_infinite_exponent(bb, g, OrderOracle())
            assert out.success and lambda_contains(variety, 1, bb, (g,), out.result)

    def test_epsilon(self):
        bb = wrap(models.units_group(35), seed=1)
        rng = np.random.default_rng(7)
        orc = OrderOracle("epsilon", 0.5)
        elems = bb.elements()
        wins = 0
        for _ in range(1000):
            g = elems[int(rng.integers(len(elems)))]
            out = attack_infinite_exponent(bb, g, orc, rng)
            if out.success:
                assert lambda_contains(ABELIAN, 1, bb, (g,), out.result)
                wins += 1
        assert 0.45 <= wins / 1000 <= 0.55
        assert wins / 1000 >= binomial_floor(0.5, 1000)

    def test_budget_is_failure(self):
        bb = wrap(models.units_group(91), seed=1)
        g = next(h for h in bb.elements() if h != bb.query("one"))
        out = attack_infinite_exponent(bb, g, OrderOracle(budget=1))
        assert not out.success

    def test_query_accounting(self):
        bb = wrap(models.units_group(33), seed=4)
        bb.query("one")
        before = bb.queries
        out = attack_infinite_exponent(bb, bb.elements()[3], OrderOracle())
        assert out.bb_queries == bb.queries - before
        assert out.oracle_queries == 1

    def test_qpe_oracle(self):
        bb = wrap(models.units_group(15), seed=0)
        adv = make_adversary("inf:qpe:qubits=6,shots=4")
        out = adv(bb, (bb.encode(7),), (), np.random.default_rng(0))
        assert out.success
        assert lambda_contains(ABELIAN, 1, bb, (bb.encode(7),), out.result)


class TestFinite:
    def test_dim_three(self):
        bb = wrap(models.elementary_abelian_group(2, 3), seed=3)
        rng = np.random.default_rng(1)
        elems = bb.elements()
        for _ in range(50):
            g = tuple(elems[int(i)] for i in rng.integers(8, size=4))
            out = attack_finite(bb, g, MembershipOracle())
            assert out.success
            assert lambda_contains(elementary_abelian(2), 4, bb, g, out.result)

    def test_independent_basis(self):
        bb = wrap(models.elementary_abelian_group(2, 2), seed=3)
        g = (bb.encode((1, 0)), bb.encode((0, 1)))
        assert not attack_finite(bb, g, MembershipOracle()).success

    def test_identity_first(self):
        bb = wrap(models.elementary_abelian_group(2, 2), seed=3)
        g = (bb.query("one"), bb.encode((0, 1)))
        out = attack_finite(bb, g, MembershipOracle())
        assert out.index == 1
        assert out.result == RelationPair(identity_slp(), input_slp(1))

    def test_output_computes_target(self):
        bb = wrap(models.dihedral_group(4), seed=8)
        rng = np.random.default_rng(3)
        elems = bb.elements()
        for _ in range(40):
            g = tuple(elems[int(i)] for i in rng.integers(8, size=4))
            out = attack_finite(bb, g, MembershipOracle())
            assert out.success
            i = out.index
            assert run(out.result.left, bb, g[: i - 1] or g) == g[i - 1]
            assert lambda_contains(ALL_GROUPS, 4, bb, g, out.result)

    def test_epsilon(self):
        bb = wrap(models.elementary_abelian_group(2, 3), seed=3)
        rng = np.random.default_rng(11)
        orc = MembershipOracle("epsilon", 0.5)
        elems = bb.elements()
        wins = 0
        for _ in range(1000):
            g = tuple(elems[int(i)] for i in rng.integers(8, size=4))
            out = attack_finite(bb, g, orc, rng)
            if out.success:
                assert lambda_contains(elementary_abelian(2), 4, bb, g, out.result)
                wins += 1
        assert wins / 1000 >= binomial_floor(0.5, 1000)


class TestCertificate:
    def setup_method(self):
        self.bb = wrap(models.elementary_abelian_group(2, 2), seed=6)
        self.e1 = self.bb.encode((1, 0))
        self.e2 = self.bb.encode((0, 1))
        self.e3 = self.bb.encode((1, 1))

    def test_sum(self):
        assert counting_certificate(self.bb, (self.e1, self.e2, self.e3)) == 3

    def test_basis(self):
        assert counting_certificate(self.bb, (self.e1, self.e2)) is None

    def test_repeat(self):
        assert counting_certificate(self.bb, (self.e3, self.e3)) == 2

    def test_stop_index_matches(self):
        bb = wrap(models.units_group(21), seed=2)
        rng = np.random.default_rng(4)
        elems = bb.elements()
        for _ in range(100):
            g = tuple(elems[int(i)] for i in rng.integers(len(elems), size=3))
            out = attack_finite(bb, g, MembershipOracle())
            assert out.index == counting_certificate(bb, g)


class TestAdversarySpecs:
    @pytest.mark.parametrize("spec", ["inf:exact", "inf:eps=0.25", "inf:qpe:qubits=5,shots=3", "fin:bfs", "fin:eps=0.7", "fail"])
    def test_parse(self, spec):
        assert make_adversary(spec).spec == spec

    @pytest.mark.parametrize("spec", ["inf", "inf:magic", "fin:qpe", "win"])
    def test_reject(self, spec):
        with pytest.raises(ValueError):
            make_adversary(spec)

    def test_fail_stub(self):
        bb = wrap(models.units_group(15))
        assert not make_adversary("fail")(bb, (bb.encode(2),)).success
