import pytest

from wpf import models
from wpf.algebra import ABELIAN, ALL_GROUPS, GROUP, free_element, free_equal, mul, inv, one, Var
from wpf.slp import (
    BadInputIndex,
    BudgetExhausted,
    ForwardReference,
    Input,
    Op,
    Slp,
    SlpArityError,
    SlpError,
    derive,
    format_slp,
    identity_slp,
    input_slp,
    parse_slp,
    power_slp,
    run,
    shortest_slp_bfs,
    slp,
    slp_from_term,
    to_free,
    validate,
)

Z6 = models.cyclic_group(6)
Z7 = models.units_group(7)


class TestValidate:
    def test_single_input(self):
        validate(slp(1), 1, GROUP)

    def test_bad_input_index(self):
        with pytest.raises(BadInputIndex):
            validate(slp(2), 1, GROUP)

    def test_forward_reference(self):
        with pytest.raises(ForwardReference):
            validate(slp(1, ("mul", 1, 2)), 1, GROUP)

    def test_arity(self):
        with pytest.raises(SlpArityError):
            validate(slp(1, ("inv", 1, 1)), 1, GROUP)

    def test_unknown_symbol(self):
        with pytest.raises(SlpArityError):
            validate(slp(1, ("add", 1, 1)), 1, GROUP)

    def test_empty_program(self):
        with pytest.raises(SlpError):
            Slp(())


class TestRun:
    def test_single_mul(self):
        assert run(slp(1, 2, ("mul", 1, 2)), Z6, (2, 3)) == 5

    def test_constant(self):
        assert run(identity_slp(), Z6, ()) == 0

    def test_power_in_units_mod_15(self):
        assert run(power_slp(4), models.units_group(15), (2,)) == 1

    def test_power_in_units_mod_5(self):
        assert run(power_slp(4), models.units_group(5), (2,)) == 1

    def test_invalid_program_is_rejected(self):
        with pytest.raises(BadInputIndex):
            run(slp(3), Z6, (1, 2))


class TestToFree:
    def test_input(self):
        assert to_free(input_slp(3), ABELIAN).payload == ((3, 1),)

    def test_power_five(self):
        assert free_equal(to_free(power_slp(5), ABELIAN), free_element(ABELIAN, {1: 5}))

    def test_cancel(self):
        assert to_free(slp(1, ("inv", 1), ("mul", 1, 2)), ALL_GROUPS).payload == ()

    def test_identity(self):
        assert to_free(identity_slp(), ABELIAN).payload == ()
        assert to_free(identity_slp(), ALL_GROUPS).payload == ()


class TestPowerSlp:
    def test_one(self):
        assert power_slp(1) == slp(1)

    @pytest.mark.parametrize("s", range(1, 70))
    def test_matches_repeated_multiplication(self, s):
        chain = [Input(1)] + [Op("mul", (k, 1)) for k in range(1, s)]
        assert free_equal(to_free(power_slp(s), ABELIAN), to_free(Slp(tuple(chain)), ABELIAN))
        assert len(power_slp(s)) <= 2 * s.bit_length()

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            power_slp(0)


class TestBfs:
    def test_cube(self):
        u = shortest_slp_bfs(Z7, (3,), 6)
        assert free_equal(to_free(u, ABELIAN), free_element(ABELIAN, {1: 3}))
        assert run(u, Z7, (3,)) == 6

    def test_not_a_member(self):
        assert shortest_slp_bfs(Z7, (2,), 3) is None

    def test_seed_itself(self):
        d3 = models.dihedral_group(3)
        h = d3.carrier[4]
        assert shortest_slp_bfs(d3, (h,), h) == input_slp(1)

    def test_repeated_seed_keeps_first(self):
        assert shortest_slp_bfs(Z6, (2, 2), 2) == input_slp(1)

    def test_identity_from_nothing(self):
        assert shortest_slp_bfs(Z6, (), 0) == identity_slp()

    def test_budget(self):
        big = models.units_group(251)
        with pytest.raises(BudgetExhausted):
            shortest_slp_bfs(big, (6,), 250, budget=5)

    def test_derivations_cover_closure(self):
        d = derive(Z6, (2,))
        assert d.saturated
        assert {Z6.carrier[int(x)] for x in d.order} == {0, 2, 4}
        for lab in d.labels():
            assert run(d.slp_for(lab), Z6, (2,)) == Z6.carrier[lab]


class TestText:
    def test_round_trip(self):
        u = slp(1, 2, ("inv", 2), ("mul", 1, 3), ("one",))
        assert parse_slp(format_slp(u)) == u

    def test_comments_and_blanks(self):
        text = "# square\n\nin 1\nop mul 1 1   # a1*a1\n"
        assert parse_slp(text) == slp(1, ("mul", 1, 1))

    @pytest.mark.parametrize("bad", ["", "in x", "op", "push 1", "in 0"])
    def test_rejects(self, bad):
        with pytest.raises(SlpError):
            parse_slp(bad)


def test_slp_from_term_shares_subterms():
    t = mul(mul(Var(1), Var(2)), mul(Var(1), Var(2)))
    u = slp_from_term(t)
    assert len(u) == 4
    assert run(u, Z6, (1, 2)) == 0
    assert run(slp_from_term(inv(one())), Z6, ()) == 0
