"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from wpf import models
from wpf.algebra import ABELIAN, ALL_GROUPS, GROUP, Apply, Var, abelian_exp, all_algebras, elementary_abelian
from wpf.slp import Input, Op, Slp

# (variety, algebras of that variety)
GROUP_CASES = [
    (ALL_GROUPS, ["dihedral:3", "dihedral:4", "zn-star:15"]),
    (ABELIAN, ["zn-add:6", "zn-star:21", "elem-abelian:3^2"]),
    (abelian_exp(6), ["zn-add:6", "zn-add:3", "direct-power:zn-add:6^2"]),
    (elementary_abelian(2), ["elem-abelian:2^3", "zn-add:2"]),
    (elementary_abelian(5), ["zn-add:5"]),
]
ALGEBRA_CASES = [(all_algebras(GROUP), ["dihedral:3", "ring-zn:6"])]


def _resolve(ref):
    alg = models.algebra_from_ref(ref)
    if ref.startswith("ring-zn"):
        alg = alg.reduct(["add", "neg", "zero"], {"add": "mul", "neg": "inv", "zero": "one"})
    return alg


@st.composite
def variety_and_algebra(draw, include_all_algebras=True):
    cases = GROUP_CASES + (ALGEBRA_CASES if include_all_algebras else [])
    v, refs = draw(st.sampled_from(cases))
    return v, _resolve(draw(st.sampled_from(refs)))


def terms(m, symbols=(("mul", 2), ("inv", 1), ("one", 0)), max_leaves=12):
    leaf = st.one_of(st.integers(1, m).map(Var), st.just(Apply("one", ())))

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda c: Apply("mul", c)),
            children.map(lambda c: Apply("inv", (c,))),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


@st.composite
def slps(draw, m, max_len=14):
    """Valid programs over the group signature reading inputs 1..m."""
    length = draw(st.integers(1, max_len))
    instrs = []
    for k in range(length):
        choices = ["in"] if k == 0 else ["in", "mul", "inv", "one"]
        if m == 0:
            choices = [c for c in choices if c != "in"] or ["one"]
        kind = draw(st.sampled_from(choices))
        if kind == "in":
            instrs.append(Input(draw(st.integers(1, m))))
        elif kind == "one":
            instrs.append(Op("one", ()))
        elif kind == "inv":
            instrs.append(Op("inv", (draw(st.integers(1, k)),)))
        else:
            instrs.append(Op("mul", (draw(st.integers(1, k)), draw(st.integers(1, k)))))
    return Slp(tuple(instrs))
