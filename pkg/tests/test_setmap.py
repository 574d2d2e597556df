import random
from fractions import Fraction as Q

import pytest

from orbitkit import setmap
from orbitkit.setmap import (
    DomainGap,
    NotOnto,
    band,
    evaluate,
    finite_system,
    image,
    is_single_valued,
    iterate,
    lsc_check,
    make_map,
    point_rule,
    preimage,
    preimage_union_map,
    rectangle,
    segment,
    usc_check,
    values_connected_check,
)
from orbitkit.space import canonicalize, interval, parse_set, point


# -- local map constructions ----------------------------------------------

def tent_map():
    return make_map(
        [segment(0, "1/2", 0, 1), segment("1/2", 1, 1, 0)], name="tent")


def identity_map():
    return make_map([segment(0, 1, 0, 1)], name="identity")


def flip_map():
    return make_map(
        [segment(0, 1, 0, 1), segment(0, 1, 1, 0)], name="flip")


def double_tent_h():
    return make_map(
        [
            segment(0, "1/4", "1/2", 0),
            segment("1/4", "3/4", 0, 1),
            segment("3/4", 1, 1, "1/2"),
        ],
        name="double_tent_h",
    )


def tent_augmented():
    # full value at 0, tent elsewhere
    return make_map(
        [segment(0, "1/2", 0, 1), segment("1/2", 1, 1, 0),
         point_rule(0, interval(0, 1))],
        name="tent_aug_F",
    )


def tent_shadow(t0=Q(3, 59)):
    # every value carries the marker point t0 next to the tent branch
    return make_map(
        [segment(0, "1/2", 0, 1), segment("1/2", 1, 1, 0),
         rectangle(0, 1, point(t0))],
        name="tent_aug_G",
    )


def fan_map():
    return make_map(
        [segment(0, 1, 0, 1), point_rule(0, interval(0, 1))], name="fan0")


def demo_nonusc_f():
    # value {0} at 0, the whole interval on (0, 1]
    return make_map(
        [point_rule(0, point(0)), rectangle(0, 1, interval(0, 1), "oc")],
        name="nonusc_f",
    )


def demo_nonusc_g():
    # value {0} at 0, [t, 1] on (0, 1]
    return make_map(
        [point_rule(0, point(0)), band(0, 1, (0, 1), (1, 1), "oc")],
        name="nonusc_g",
    )


def ramp_map():
    return make_map(
        [
            point_rule(0, interval("1/2", 1)),
            segment(0, "1/4", "1/2", 0),
            segment("1/4", "1/2", 0, "1/2"),
            segment("1/2", 1, "1/2", 1),
        ],
        name="ramp",
    )


def tent(x: Q) -> Q:
    return 2 * x if x <= Q(1, 2) else 2 * (1 - x)


class TestEvaluate:
    def test_tent_augmented_at_zero(self):
        assert evaluate(tent_augmented(), 0) == interval(0, 1)

    def test_double_tent_at_quarter(self):
        assert evaluate(double_tent_h(), Q(1, 4)) == point(0)

    def test_flip_two_points(self):
        assert evaluate(flip_map(), Q(3, 10)) == parse_set("{3/10}|{7/10}")

    def test_domain_gap(self):
        gappy = make_map([segment(0, "1/2", 0, 1)])
        with pytest.raises(DomainGap):
            evaluate(gappy, Q(3, 4))


class TestImage:
    def test_tent_doubles(self):
        assert image(tent_map(), interval(0, "1/2")) == interval(0, 1)

    def test_augmented_tent_forces_full(self):
        # grid sampling oracle: union of F(x) over sampled x in [0, 1/4]
        f = tent_augmented()
        sampled = [evaluate(f, Q(i, 64)) for i in range(0, 17)]
        oracle = sampled[0]
        for s in sampled[1:]:
            oracle = canonicalize([oracle, s])
        assert oracle == interval(0, 1)
        assert image(f, interval(0, "1/4")) == interval(0, 1)

    def test_rectangle_over_point(self):
        assert image(ramp_map(), point(0)) == interval("1/2", 1)

    def test_open_domain_is_exact_for_touching_point(self):
        f = demo_nonusc_f()
        assert image(f, point(0)) == point(0)

    def test_image_of_singleton_equals_evaluate(self):
        rng = random.Random(53)
        for f in (tent_map(), flip_map(), fan_map(), ramp_map(),
                  tent_augmented(), demo_nonusc_f(), demo_nonusc_g()):
            for _ in range(50):
                x = Q(rng.randint(0, 96), 96)
                assert image(f, point(x)) == evaluate(f, x), (f.name, x)


class TestIterate:
    def test_flip_brute_force(self):
        f = flip_map()
        z = Q(3, 10)
        # oracle: enumerate all branch choices of depth 3
        values = {z}
        frontier = [(z,)]
        for _ in range(3):
            nxt = []
            for path in frontier:
                for y in (path[-1], 1 - path[-1]):
                    nxt.append(path + (y,))
            frontier = nxt
        leaves = {p[-1] for p in frontier}
        assert leaves == {Q(3, 10), Q(7, 10)}
        assert iterate(f, z, 3) == canonicalize(sorted(leaves))

    def test_augmented_tent_sticks_at_full(self):
        f = tent_augmented()
        assert iterate(f, 0, 1) == interval(0, 1)
        assert iterate(f, 0, 2) == interval(0, 1)

    def test_shadowed_tent_accumulates_marker_orbit(self):
        t0 = Q(3, 59)
        g = tent_shadow(t0)
        x = Q(1, 3)
        got = iterate(g, x, 2)
        expected = canonicalize([t0, tent(t0), tent(tent(x))])
        assert got == expected

    def test_zero_steps(self):
        assert iterate(tent_map(), Q(1, 3), 0) == point(Q(1, 3))

    def test_iterate_coarsens_beyond_budget(self):
        # {t/2, 1 - t/2} doubles the point count each step; past the
        # component budget the result is a grid coarsening marked outer
        f = make_map([segment(0, 1, 0, "1/2"), segment(0, 1, 1, "1/2")])
        exact = iterate(f, Q(1, 3), 12)
        assert not exact.outer and len(exact.components) == 4096
        coarse = iterate(f, Q(1, 3), 13)
        assert coarse.outer
        for lo, _ in exact.components[:64]:
            # soundness: the coarsened image of every exact point's value
            # stays covered
            for y in (lo / 2, 1 - lo / 2):
                assert coarse.contains(y)

    def test_composition_property(self):
        rng = random.Random(2)
        for f in (tent_map(), flip_map(), tent_augmented(), double_tent_h()):
            for _ in range(10):
                x = Q(rng.randint(0, 16), 16)
                m, n = rng.randint(1, 4), rng.randint(1, 4)
                whole = iterate(f, x, m + n)
                staged = iterate(f, x, n)
                for _ in range(m):
                    staged = image(f, staged)
                assert whole == staged


class TestSemicontinuity:
    def test_nonusc_f_fails_at_zero(self):
        verdict = usc_check(demo_nonusc_f())
        assert not verdict.holds
        x, lim = verdict.witness
        assert x == 0
        assert lim == interval(0, 1)
        assert not lim.subset_of(evaluate(demo_nonusc_f(), x))

    def test_nonusc_g_fails_at_zero(self):
        verdict = usc_check(demo_nonusc_g())
        assert not verdict.holds
        assert verdict.witness[0] == 0

    def test_continuous_single_valued_holds(self):
        assert usc_check(double_tent_h()).holds

    def test_fan_map_usc(self):
        assert usc_check(fan_map()).holds

    def test_fan_map_fails_lsc(self):
        verdict = lsc_check(fan_map())
        assert not verdict.holds
        x, lim = verdict.witness
        assert x == 0
        assert lim == point(0)  # one-sided limit from the right

    def test_identity_lsc(self):
        assert lsc_check(identity_map()).holds

    def test_nonusc_g_is_lsc(self):
        # dense-sequence sampling oracle at 0: values [t, 1] approach [0, 1]
        g = demo_nonusc_g()
        for t in (Q(1, 10), Q(1, 100), Q(1, 1000)):
            assert evaluate(g, t) == interval(t, 1)
        assert lsc_check(g).holds

    def test_closed_domain_maps_are_usc(self):
        for f in (tent_map(), flip_map(), double_tent_h(), tent_augmented(),
                  tent_shadow(), fan_map(), ramp_map(), identity_map()):
            assert usc_check(f).holds, f.name

    def test_random_closed_domain_maps_are_usc(self):
        # closed piece domains make the graph a finite union of closed
        # sets, so the check must accept every such map
        rng = random.Random(71)
        for _ in range(100):
            cuts = sorted({Q(rng.randint(0, 16), 16) for _ in range(3)}
                          | {Q(0), Q(1)})
            pieces = []
            for a, b in zip(cuts, cuts[1:]):
                if rng.random() < 0.5:
                    pieces.append(segment(
                        a, b, Q(rng.randint(0, 8), 8), Q(rng.randint(0, 8), 8)))
                else:
                    lo = Q(rng.randint(0, 8), 8)
                    hi = Q(rng.randint(0, 8), 8)
                    pieces.append(rectangle(
                        a, b, interval(min(lo, hi), max(lo, hi))))
            if rng.random() < 0.5:
                pieces.append(point_rule(
                    rng.choice(cuts), interval(0, Q(rng.randint(1, 8), 8))))
            f = make_map(pieces)
            assert usc_check(f).holds


class TestPreimage:
    def test_tent_two_branches(self):
        # oracle: solve 2x = 2/3 and 2(1-x) = 2/3 by hand
        assert preimage(tent_map(), Q(2, 3)) == parse_set("{1/3}|{2/3}")

    def test_double_tent_bottom(self):
        # solving the three affine pieces leaves only x = 1/4
        assert preimage(double_tent_h(), 0) == point(Q(1, 4))

    def test_rectangle_domain(self):
        f = make_map([rectangle(0, "1/2", interval("1/4", "3/4")),
                      segment("1/2", 1, "3/4", 1)])
        assert preimage(f, Q(1, 2)) == interval(0, "1/2")

    def test_empty_signal(self):
        f = make_map([segment(0, 1, 0, "1/2")])
        assert preimage(f, Q(3, 4)) is None

    def test_duality_random_probes(self):
        rng = random.Random(23)
        for f in (tent_map(), double_tent_h(), fan_map(), ramp_map()):
            for _ in range(250):
                x = Q(rng.randint(0, 48), 48)
                y = Q(rng.randint(0, 48), 48)
                forward = evaluate(f, x).contains(y)
                back = preimage(f, y)
                backward = back is not None and back.contains(x)
                assert forward == backward, (f.name, x, y)


class TestPreimageUnion:
    def test_tent_and_identity(self):
        fu = preimage_union_map([tent_map(), identity_map()])
        assert evaluate(fu, Q(2, 3)) == parse_set("{1/3}|{2/3}")

    def test_common_point_hypothesis(self):
        x0 = Q(2, 3)
        a = preimage(tent_map(), x0)
        b = preimage(identity_map(), x0)
        from orbitkit.space import intersection

        assert intersection(a, b) == point(Q(2, 3))

    def test_not_onto(self):
        const = make_map([segment(0, 1, "1/2", "1/2")], name="const")
        with pytest.raises(NotOnto):
            preimage_union_map([const])

    def test_matches_per_map_preimages(self):
        fu = preimage_union_map([tent_map(), double_tent_h()])
        rng = random.Random(31)
        for _ in range(100):
            x = Q(rng.randint(0, 32), 32)
            parts = []
            for f in (tent_map(), double_tent_h()):
                p = preimage(f, x)
                if p is not None:
                    parts.append(p)
            assert evaluate(fu, x) == canonicalize(parts)


class TestValuesConnected:
    def test_fan_connected(self):
        ok, witness = values_connected_check(fan_map())
        assert ok and witness is None

    def test_flip_disconnected(self):
        ok, witness = values_connected_check(flip_map())
        assert not ok
        assert len(evaluate(flip_map(), witness).components) == 2

    def test_shadowed_tent_disconnected(self):
        g = tent_shadow()
        ok, witness = values_connected_check(g)
        assert not ok
        assert len(evaluate(g, witness).components) == 2

    def test_constant_map(self):
        const = make_map([rectangle(0, 1, interval(0, 1))])
        assert setmap.constant_value(const) == interval(0, 1)
        assert setmap.constant_value(tent_map()) is None
        assert setmap.constant_value(fan_map()) is None

    def test_connectivity_decision_vs_sampling(self):
        # when the exact decision says connected everywhere, no sampled
        # point may show a disconnected value; a negative must exhibit one
        rng = random.Random(83)
        for _ in range(60):
            cuts = sorted({Q(rng.randint(1, 15), 16) for _ in range(2)}
                          | {Q(0), Q(1)})
            pieces = []
            for a, b in zip(cuts, cuts[1:]):
                pieces.append(segment(
                    a, b, Q(rng.randint(0, 8), 8), Q(rng.randint(0, 8), 8)))
            if rng.random() < 0.6:
                lo = Q(rng.randint(0, 8), 8)
                pieces.append(rectangle(0, 1, interval(
                    lo, min(Q(1), lo + Q(rng.randint(0, 2), 8)))))
            f = make_map(pieces)
            ok, witness = values_connected_check(f)
            if ok:
                for j in range(0, 97):
                    assert len(evaluate(f, Q(j, 96)).components) == 1
            else:
                assert len(evaluate(f, witness).components) > 1


class TestFiniteSystem:
    def test_iterate_matches_bfs_oracle(self):
        rng = random.Random(41)
        for _ in range(60):
            n = rng.randint(1, 6)
            states = [f"s{i}" for i in range(n)]
            table = {
                s: rng.sample(states, rng.randint(1, n)) for s in states
            }
            fs = finite_system(table)
            for start in states:
                # naive breadth-first expansion oracle
                level = {start}
                for depth in range(1, 13):
                    level = {t for s in level for t in table[s]}
                    assert fs.iterate(start, depth) == frozenset(level)

    def test_validation(self):
        with pytest.raises(setmap.MapError):
            finite_system({"a": []})
        with pytest.raises(setmap.MapError):
            finite_system({"a": ["b"]})


class TestSingleValued:
    def test_classification(self):
        assert is_single_valued(tent_map())
        assert is_single_valued(identity_map())
        assert not is_single_valued(flip_map())
        assert not is_single_valued(fan_map())
