from fractions import Fraction as Q

import pytest

from orbitkit.corpus import builtin
from orbitkit.sensitivity import (
    ProbeBudget,
    SensitivityWitness,
    condition_measure,
    implied_witnesses,
    recurrent_separation_probe,
    replay_witness,
    sensitivity_probe,
)
from orbitkit.setmap import finite_system, iterate, make_map, rectangle
from orbitkit.space import hausdorff, interval, maxdist


def constant_map():
    return make_map([rectangle(0, 1, interval(0, 1))], name="constant")


SMALL = ProbeBudget(deltas=(Q(1, 8), Q(1, 64)), horizon=32)


class TestSensitiveProbe:
    def test_tent_augmented_is_sensitive(self):
        out = sensitivity_probe("sensitive", builtin("tent_aug_F").obj,
                                Q(2, 5), SMALL)
        assert out.status == "witnessed_yes"
        assert out.witnesses

    def test_witness_replays_exactly(self):
        f = builtin("tent_aug_F").obj
        out = sensitivity_probe("sensitive", f, Q(2, 5), SMALL)
        for w in out.witnesses[:10]:
            measured = dict(w.measured)["measure"]
            assert str(replay_witness(f, w)) == measured

    def test_headline_is_lexicographically_smallest(self):
        f = builtin("tent_aug_F").obj
        out = sensitivity_probe("sensitive", f, Q(2, 5), SMALL)
        head = out.headline
        assert head is not None
        assert all((head.x, head.y, head.m) <= (w.x, w.y, w.m)
                   for w in out.witnesses)

    def test_serialization_roundtrip(self):
        f = builtin("tent_aug_F").obj
        out = sensitivity_probe("sensitive", f, Q(2, 5), SMALL)
        w = out.witnesses[0]
        again = SensitivityWitness.from_json(w.to_json())
        assert again == w
        assert replay_witness(f, again) == replay_witness(f, w)

    def test_constant_map_not_sensitive(self):
        out = sensitivity_probe("sensitive", constant_map(), Q(1, 2), SMALL)
        assert out.status == "no_witness_at_budget"
        assert out.impossibilities[0]["kind"] == "constant_map"

    def test_shadowed_tent_no_witness_with_fine_delta(self):
        # with the marker orbit 1/8-dense by step 9 and perturbations of
        # size 2^-25, divergence cannot outrun the accumulated marker
        # orbit, so no pair separates by 2/5 within the horizon
        g = builtin("tent_aug_G").obj
        tight = ProbeBudget(deltas=(Q(1, 2**25),), horizon=64)
        out = sensitivity_probe("sensitive", g, Q(2, 5), tight)
        assert out.status == "no_witness_at_budget"
        assert not out.witnesses


class TestStrongProbe:
    def test_impossibility_at_zero(self):
        out = sensitivity_probe("strong", builtin("tent_aug_F").obj,
                                Q(2, 5), SMALL)
        assert out.status == "no_witness_at_budget"
        certs = {c["base"]: c for c in out.impossibilities}
        assert "0" in certs
        assert certs["0"]["kind"] == "full_orbit"

    def test_full_forever_is_verified(self):
        f = builtin("tent_aug_F").obj
        for m in (1, 2, 5):
            assert iterate(f, 0, m) == interval(0, 1)


class TestWeakProbe:
    def test_constant_map_weakly_sensitive(self):
        out = sensitivity_probe("weak", constant_map(), Q(1, 2), SMALL)
        assert out.status == "witnessed_yes"

    def test_shadowed_tent_weakly_sensitive(self):
        g = builtin("tent_aug_G").obj
        out = sensitivity_probe("weak", g, Q(1, 4), SMALL)
        assert out.status == "witnessed_yes"

    def test_weak_condition_uses_thread_separation(self):
        g = builtin("tent_aug_G").obj
        a = iterate(g, Q(1, 3), 4)
        b = iterate(g, Q(1, 3) + Q(1, 64), 4)
        assert condition_measure("weak", a, b) == maxdist(a, b)


class TestImplicationChain:
    def test_witness_replay_through_weaker(self):
        f = builtin("tent_aug_F").obj
        out = sensitivity_probe("sensitive", f, Q(2, 5), SMALL)
        for w in out.witnesses:
            for implied in implied_witnesses(f, w):
                assert Q(dict(implied.measured)["measure"]) >= w.eps

    def test_singleton_valued_conditions_coincide(self):
        import random

        tent = builtin("tent").obj
        rng = random.Random(5)
        for _ in range(200):
            x = Q(rng.randint(0, 128), 128)
            y = Q(rng.randint(0, 128), 128)
            m = rng.randint(1, 8)
            a, b = iterate(tent, x, m), iterate(tent, y, m)
            strong = condition_measure("strong", a, b)
            sens = condition_measure("sensitive", a, b)
            weak = condition_measure("weak", a, b)
            assert strong == sens == weak == hausdorff(a, b)


class TestRecurrentSeparation:
    def test_tent_witnessed(self):
        out = recurrent_separation_probe(
            builtin("tent").obj, Q(1, 4), Q(1, 16), (1, 200),
            ProbeBudget(deltas=(Q(1, 32), Q(1, 128)), horizon=200))
        assert out.status == "witnessed_yes"
        w = out.witnesses[0]
        assert Q(w["min_distance"]) < Q(1, 16)
        assert w["separations_strict"] >= 10

    def test_tent_augmented_refuted_at_zero(self):
        f = builtin("tent_aug_F").obj
        out = recurrent_separation_probe(
            f, Q(1, 4), Q(1, 16), (1, 64),
            ProbeBudget(deltas=(Q(1, 8),), horizon=64))
        assert out.status == "no_witness_at_budget"
        certs = {c["base"]: c for c in out.refutations}
        assert "0" in certs
        assert certs["0"]["singleton_gap_bound"] == "1/2"

    def test_witness_implies_hausdorff_separation(self):
        f = builtin("tent").obj
        out = recurrent_separation_probe(
            f, Q(1, 4), Q(1, 16), (1, 200),
            ProbeBudget(deltas=(Q(1, 32),), horizon=200))
        for w in out.witnesses:
            x, y, n = Q(w["x"]), Q(w["y"]), w["argmax"]
            assert hausdorff(iterate(f, x, n), iterate(f, y, n)) \
                == Q(w["max_distance"])
            assert Q(w["max_distance"]) > Q(1, 4)


class TestDiscreteProbes:
    def test_agree_with_oracle(self):
        from orbitkit.analysis import finite_oracle

        s = finite_system({"a": ["a", "b"], "b": ["a"]})
        rep = finite_oracle(s)
        for kind, expected in (
            ("strong", rep.strongly_sensitive),
            ("sensitive", rep.sensitive),
            ("weak", rep.weakly_sensitive),
        ):
            out = sensitivity_probe(kind, s, Q(1, 2))
            assert (out.status == "witnessed_yes") == expected, kind
        ly = recurrent_separation_probe(s, Q(1, 2), Q(1, 4))
        assert (ly.status == "witnessed_yes") == rep.recurrent_separation_sensitive

    def test_no_branching_no_weak(self):
        s = finite_system({"a": ["b"], "b": ["a"]})
        out = sensitivity_probe("weak", s, Q(1, 2))
        assert out.status == "no_witness_at_budget"


class TestValidation:
    def test_bad_kind(self):
        with pytest.raises(Exception):
            sensitivity_probe("bogus", builtin("tent").obj, Q(1, 4))

    def test_bad_eps(self):
        with pytest.raises(Exception):
            sensitivity_probe("weak", builtin("tent").obj, 0)
