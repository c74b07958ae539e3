import csv
import json
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from wpf.algebra import audit_variety
from wpf.blackbox import wrap
from wpf.games import (
    GameConfig,
    GameError,
    Poly,
    TrivialVarietyError,
    _sample,
    count_instances,
    end_to_end_theorem_demo,
    estimate_negligibility_curve,
    make_family,
    parse_range,
    run_average_game,
    run_worstcase_game,
    wilson_interval,
    write_curve_csv,
)

ZNSTAR = "15,21,33,35"


class TestPoly:
    def test_eval(self):
        assert Poly("k+1")(3) == 4
        assert Poly("2*k^2 - k")(3) == 15
        assert Poly("7")(100) == 7

    @pytest.mark.parametrize("bad", ["k/2", "x+1", "__import__('os')", "k**0.5"])
    def test_reject(self, bad):
        with pytest.raises(GameError):
            Poly(bad)


class TestConfig:
    def test_trials(self):
        with pytest.raises(GameError):
            GameConfig(trials=0)

    def test_pi(self):
        with pytest.raises(GameError):
            GameConfig(k=1, pi="k-1")


class TestFamilies:
    def test_range(self):
        assert parse_range("6..8,12") == [6, 7, 8, 12]

    def test_built_ins_satisfy_their_variety(self):
        for name, params in [("zn-add", "2..9"), ("zn-star", "3..20"), ("elem-abelian", "p=3;k=1..2"),
                             ("direct-power", "base=zn-add:4;e=1..2")]:
            f = make_family(name, params)
            for d in f.indices:
                assert audit_variety(f.algebra_at(d), f.variety), (name, d)

    def test_ring_reduct_is_abelian(self):
        f = make_family("ring-zn", "6..10")
        mapping, variety = f.gammas["additive"]
        for d in f.indices:
            alg = f.algebra_at(d).reduct(list(mapping.values()), {v: k for k, v in mapping.items()})
            assert audit_variety(alg, variety)

    def test_length_discipline(self):
        for f, ks in [(make_family("zn-star", ZNSTAR), [1, 5]), (make_family("elem-abelian", "p=2;k=1..5"), range(1, 6))]:
            for k in ks:
                for d in f.levels(k):
                    assert len(d) <= f.theta(k)
                    assert f.xi(d) <= f.eta(len(d))
                    f.check_lengths(k, d)

    def test_empty_level(self):
        f = make_family("elem-abelian", "p=2;k=2..3")
        with pytest.raises(GameError):
            f.levels(7)

    def test_labels(self):
        f = make_family("zn-star", ZNSTAR)
        assert f.label(f.index_of("21")) == "21"
        assert f.algebra_at(f.index_of("21")).size == 12

    def test_unknown(self):
        with pytest.raises(GameError):
            make_family("matrix", "2")


class TestSamplers:
    def test_index_distribution(self):
        f = make_family("zn-star", "15,21,33,35,77")
        rng = np.random.default_rng(0)
        counts = Counter(f.sample_index(1, rng) for _ in range(10_000))
        assert chisquare([counts[d] for d in f.indices]).pvalue > 1e-3

    def test_element_distribution(self):
        bb = wrap(make_family("zn-star", "21").algebra_at("10101"), seed=0)
        rng = np.random.default_rng(1)
        counts = Counter(_sample(bb, 10_000, rng))
        assert chisquare([counts[c] for c in bb.elements()]).pvalue > 1e-3


class TestAverage:
    def test_exact_order_oracle(self):
        rep = run_average_game(make_family("zn-star", ZNSTAR), GameConfig(trials=200))
        assert rep.estimate == 1.0 and rep.successes == 200

    def test_failure_stub(self):
        rep = run_average_game(make_family("zn-star", ZNSTAR), GameConfig(trials=50, adversary="fail"))
        assert rep.estimate == 0.0

    def test_epsilon(self):
        rep = run_average_game(make_family("zn-star", ZNSTAR), GameConfig(trials=2000, adversary="inf:eps=0.5"))
        assert 0.45 <= rep.estimate <= 0.55
        lo, hi = rep.wilson
        assert lo <= rep.estimate <= hi

    def test_aux_tuple(self):
        rep = run_average_game(make_family("zn-star", ZNSTAR), GameConfig(trials=20, tau="k+2"))
        assert rep.config["tau_k"] == 3

    def test_reproducible(self):
        f = make_family("elem-abelian", "p=2;k=1..4")
        cfg = GameConfig(k=3, pi="k+1", trials=100, master_seed=4, adversary="fin:eps=0.6")
        assert run_average_game(f, cfg).to_dict() == run_average_game(f, cfg).to_dict()

    def test_unsupported_variety(self):
        with pytest.raises(GameError):
            run_average_game(make_family("ring-zn", "6..8"), GameConfig(trials=5))

    def test_ring_through_gamma(self):
        rep = run_average_game(make_family("ring-zn", "6..12"), GameConfig(trials=30), gamma="additive")
        assert rep.estimate == 1.0


class TestWorstCase:
    def test_full_rank_wins(self):
        f = make_family("elem-abelian", "p=2;k=1..3")
        rep = run_worstcase_game(f, GameConfig(k=3, pi="4", adversary="fin:bfs"))
        assert rep.per_instance_min == 1.0 and not rep.partial
        assert rep.instances == 8**4

    def test_basis_loses(self):
        f = make_family("elem-abelian", "p=2;k=1..3")
        rep = run_worstcase_game(f, GameConfig(k=2, pi="2", adversary="fin:bfs"))
        assert rep.per_instance_min == 0.0
        assert rep.min_fraction <= rep.mean_fraction

    def test_partial(self):
        f = make_family("zn-star", ZNSTAR)
        rep = run_worstcase_game(f, GameConfig(pi="3", adversary="inf:exact"), instance_budget=500)
        assert rep.partial and rep.instances == 500
        assert count_instances(f, 1, 3) > 500

    def test_randomised_adversary(self):
        f = make_family("zn-star", "15")
        rep = run_worstcase_game(f, GameConfig(adversary="inf:eps=0.5", trials=40))
        assert rep.trials == 8 * 40
        assert rep.per_instance_min <= rep.estimate

    def test_observer(self):
        seen = []
        f = make_family("zn-star", "15,21")
        run_worstcase_game(f, GameConfig(), observer=lambda bb, g, out, ok: seen.append(ok))
        assert len(seen) == 8 + 12 and all(seen)


class TestDemo:
    def test_ring_additive(self):
        rep = end_to_end_theorem_demo(make_family("ring-zn", "6..30"), "additive", GameConfig())
        res = rep.to_dict()["results"]
        assert res["per_instance_min"] == 1.0
        assert res["rewrap_verified"] == res["successes"] == res["full_verified"] == rep.instances
        assert res["attack"] == "inf:exact" and rep.config["pi_k"] == 1

    def test_finite_exponent_path(self):
        f = make_family("elem-abelian", "p=3;k=1..4")
        rep = end_to_end_theorem_demo(f, "group", GameConfig(k=1))
        assert rep.extra["attack"] == "fin:bfs"
        assert rep.config["pi_k"] == f.xi("1") + 1
        assert rep.per_instance_min == 1.0 and not rep.partial

    def test_finite_exponent_sampled(self):
        f = make_family("elem-abelian", "p=3;k=1..4")
        rep = end_to_end_theorem_demo(f, "group", GameConfig(k=4), instance_budget=300)
        assert rep.partial and rep.per_instance_min == 1.0

    def test_trivial_family(self):
        with pytest.raises(TrivialVarietyError):
            end_to_end_theorem_demo(make_family("zn-add", "1"), "group", GameConfig())

    def test_unknown_gamma(self):
        with pytest.raises(GameError):
            end_to_end_theorem_demo(make_family("ring-zn", "6"), "multiplicative", GameConfig())


class TestCurve:
    def test_flat(self, tmp_path):
        f = make_family("zn-star", ZNSTAR)
        rows = estimate_negligibility_curve(f, GameConfig(trials=30), [1, 2, 3])
        assert [r["estimate"] for r in rows] == [1.0, 1.0, 1.0]
        rows0 = estimate_negligibility_curve(f, GameConfig(trials=30, adversary="fail"), [1, 2])
        assert [r["estimate"] for r in rows0] == [0.0, 0.0]
        path = tmp_path / "curve.csv"
        write_curve_csv(rows, path)
        assert len(list(csv.DictReader(open(path)))) == 3

    def test_epsilon_near(self):
        f = make_family("zn-star", ZNSTAR)
        rows = estimate_negligibility_curve(f, GameConfig(trials=1000, adversary="inf:eps=0.3"), [1, 2])
        assert all(0.25 <= r["estimate"] <= 0.35 for r in rows)


def test_report_schema():
    rep = run_average_game(make_family("zn-star", "15"), GameConfig(trials=5))
    doc = rep.to_dict()
    assert {"schema", "version", "mode", "family", "config", "results"} <= doc.keys()
    assert "wall_time" not in json.dumps(doc)
    assert 0 <= doc["results"]["estimate"] <= 1


def test_wilson_bounds():
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    lo, hi = wilson_interval(5, 10)
    assert lo < 0.5 < hi
