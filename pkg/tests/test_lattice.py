import itertools

import pytest
from hypothesis import given, strategies as st

from moka.errors import IncompatibleEquivalence, NonMonotone
from moka.lattice import (
    CompatibleEquivalence, FiniteLattice, PowersetLattice, equiv_alpha, equiv_gamma, equiv_leq,
    image_adjunction, lfp, validate_lattice,
)


def fig1c_lattice(fig1):
    els = list(fig1.elements())
    return FiniteLattice(els, lambda a, b: a & ~b == 0)


def test_two_point_lattice_is_valid():
    lat = FiniteLattice(["bot", "top"], {("bot", "bot"), ("bot", "top"), ("top", "top")})
    assert validate_lattice(lat)
    assert (lat.bot, lat.top) == ("bot", "top")


def test_fig1c_domain_is_a_lattice(fig1):
    lat = fig1c_lattice(fig1)
    assert len(lat) == 9
    assert validate_lattice(lat)


def test_wrong_join_is_diagnosed_with_witness(fig1):
    lat = fig1c_lattice(fig1)
    ac, bc, c, top = (fig1.element(n) for n in ("a&c", "b&c", "c", "top"))
    bad = FiniteLattice(lat.elements, lat.leq, join={(ac, bc): top, (bc, ac): top})
    rep = validate_lattice(bad)
    assert not rep
    assert rep.law == "join not least upper bound"
    assert c in rep.witness


def test_lfp_of_identity_is_bottom():
    lat = FiniteLattice(["bot", "top"], {("bot", "bot"), ("bot", "top"), ("top", "top")})
    assert lfp(lambda x: x, lat) == "bot"


def test_lfp_on_reachability(light):
    P = PowersetLattice(light.states)
    reach = lfp(lambda X: X | light.post(X) | {"rs"}, P)
    assert reach == {"rs", "gs", "gd", "yd", "ys"}


def test_lfp_abstract_reachability_from_a(fig1, light):
    a = fig1.element("a")
    step = lambda x: fig1.join(x, fig1.alpha(light.post_mask(fig1.gamma(x))))  # noqa: E731
    lat = fig1c_lattice(fig1)
    assert lfp(step, lat, start=a) == fig1.element("a|c")


def test_lfp_flags_descending_chain():
    P = PowersetLattice([1, 2])
    with pytest.raises(NonMonotone):
        lfp(lambda X: frozenset({1}) if not X else frozenset(), P)


def test_lfp_is_below_every_post_fixpoint():
    P = PowersetLattice(range(4))
    f = lambda X: X | {0} | {x + 1 for x in X if x < 2}  # noqa: E731
    least = lfp(f, P)
    assert f(least) == least
    for X in P.elements:
        if f(X) <= X:
            assert least <= X


def test_image_adjunction_identity():
    g = image_adjunction(lambda x: x, [1, 2])
    for c in g.concrete.elements:
        assert g.alpha(c) == c and g.gamma(c) == c
    assert g.is_adjoint()


def test_image_adjunction_constant_map():
    g = image_adjunction(lambda x: "y0", [1, 2, 3], codomain=["y0", "y1"])
    assert g.gamma(frozenset({"y0"})) == {1, 2, 3}
    assert g.gamma(frozenset({"y1"})) == frozenset()
    assert g.is_adjoint()


def test_image_adjunction_of_frame_abstraction(fig1, light):
    f = lambda fr: (fig1.alpha_state(light.index[fr[0]]), fig1.alpha(fr[1]))  # noqa: E731
    frames = [(s, 0) for s in light.states]
    g = image_adjunction(f, frames)
    assert g.alpha(frozenset({("rs", 0)})) == {(fig1.element("a"), fig1.bot)}
    assert g.is_adjoint()


@given(st.lists(st.integers(0, 3), unique=True), st.integers(0, 5))
def test_image_adjunction_law_random(dom, shift):
    g = image_adjunction(lambda x: (x + shift) % 3, dom, codomain=range(3))
    assert g.is_adjoint()
    for c in g.concrete.elements:
        assert c <= g.gamma(g.alpha(c))
    for a in g.abstract.elements:
        assert g.alpha(g.gamma(a)) <= a


def test_equiv_alpha_identity_and_total(fig1):
    lat = fig1c_lattice(fig1)
    a, c = fig1.element("a"), fig1.element("c")
    ident = CompatibleEquivalence(lat, lambda x: x).validate()
    total = CompatibleEquivalence(lat, lambda x: 0).validate()
    assert equiv_alpha({a, c}, ident) == {a, c}
    assert equiv_alpha({a, c}, total) == {fig1.element("a|c")}


def test_equiv_alpha_on_frames_keeps_inequivalent_components(fig1):
    a, c, bot = fig1.element("a"), fig1.element("c"), fig1.bot
    frames = [(x, d) for x in fig1.elements() for d in fig1.elements()]
    lat = FiniteLattice(frames, lambda f, g: f[0] & ~g[0] == 0 and f[1] & ~g[1] == 0)
    sim = CompatibleEquivalence(lat, lambda f: f[0])
    assert equiv_alpha({(a, bot), (c, bot)}, sim) == {(a, bot), (c, bot)}


def test_incompatible_equivalence_rejected(fig1):
    lat = fig1c_lattice(fig1)
    a, c = fig1.element("a"), fig1.element("c")
    with pytest.raises(IncompatibleEquivalence):
        CompatibleEquivalence(lat, {a: 0, c: 0}).validate()


def _support_sim():
    P = PowersetLattice(range(3))
    return P, CompatibleEquivalence(P, lambda X: min(X) if X else None).validate()


@given(st.lists(st.frozensets(st.integers(0, 2)), max_size=4),
       st.lists(st.frozensets(st.integers(0, 2)), max_size=4))
def test_equiv_alpha_idempotent_and_additive(xs, ys):
    P, sim = _support_sim()
    ax = equiv_alpha(xs, sim)
    assert equiv_alpha(ax, sim) == ax
    both = equiv_alpha(list(xs) + list(ys), sim)
    assert both == equiv_alpha(ax | equiv_alpha(ys, sim), sim)
    assert equiv_leq(ax, both, sim)


@given(st.lists(st.frozensets(st.integers(0, 2)), max_size=4))
def test_equivalence_adjunction_extensive(xs):
    P, sim = _support_sim()
    assert set(xs) <= equiv_gamma(equiv_alpha(xs, sim), sim)


def test_powerset_lattice_is_valid():
    assert validate_lattice(PowersetLattice(range(3)))


def test_classes_join_closed_exhaustive(fig1):
    lat = fig1c_lattice(fig1)
    sim = CompatibleEquivalence(lat, lambda x: x == fig1.bot)
    for cls in sim.classes():
        for a, b in itertools.combinations(cls, 2):
            assert sim.equiv(lat.join(a, b), a)
