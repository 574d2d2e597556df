import itertools
from fractions import Fraction as Q

import pytest

from orbitkit import corpus
from orbitkit.corpus import BadParams, UnknownName, builtin, list_builtins, sweep
from orbitkit.orbit import orbit_cover, orbit_tree
from orbitkit.setmap import (
    FiniteSystem,
    Segment,
    SetValuedMap,
    evaluate,
    usc_check,
)
from orbitkit.space import ZERO, interval, point, rho_prefix


class TestCatalog:
    def test_every_expectation_passes(self):
        for name in corpus.CATALOG:
            entry = builtin(name)
            for exp, ok, got in sweep(entry):
                assert ok, (name, exp.op, exp.args, exp.expected, got)

    def test_unknown_name(self):
        with pytest.raises(UnknownName):
            builtin("lorenz")

    def test_bad_params(self):
        with pytest.raises(BadParams):
            builtin("pin", r=2)
        with pytest.raises(BadParams):
            builtin("devil_pair", level=0)
        with pytest.raises(BadParams):
            builtin("double_tent_F", s="1/4")

    def test_listing_is_machine_readable(self):
        listing = list_builtins()
        names = [row["name"] for row in listing]
        assert names == sorted(names)
        assert {"tent", "flip", "slide", "double_tent_F"} <= set(names)
        for row in listing:
            assert row["kind"] in ("finite", "interval")

    def test_all_interval_builtins_usc(self):
        for name in corpus.CATALOG:
            entry = builtin(name)
            if isinstance(entry.obj, SetValuedMap):
                assert usc_check(entry.obj).holds, name

    def test_examples_from_definitions(self):
        assert evaluate(builtin("tent").obj, Q(1, 2)) == point(1)
        assert evaluate(builtin("pin", r="1/2").obj, Q(1, 5)) == point(Q(1, 2))
        assert evaluate(builtin("fan01").obj, 1) == interval(0, 1)


class TestDevilPair:
    def test_fixed_points_are_exactly_three(self):
        entry = builtin("devil_pair", level=6)
        fixed = set()
        for p in entry.obj.pieces:
            if not isinstance(p, Segment):
                continue
            if p.slope == 1 and p.intercept == 0:
                continue  # the identity half of the pair
            if p.slope == 1:
                continue
            x = p.intercept / (1 - p.slope)
            if p.domain.applies(x):
                fixed.add(x)
        assert fixed == {Q(0), Q(1, 2), Q(1)}

    def test_constant_branch_at_half(self):
        t = orbit_tree(builtin("devil_pair", level=4).obj, Q(1, 2), 5)
        assert list(t.branches()) == [tuple([Q(1, 2)] * 5)]

    def test_plateau_orbit_structure(self):
        # from the middle plateau the only moves are: stay, or step to the
        # plateau value and then stay
        f = builtin("devil_pair", level=4).obj
        z = Q(2, 5)
        t = orbit_tree(f, z, 4)
        for b in t.branches():
            tail = [x for x in b if x != z]
            assert all(x == Q(1, 2) for x in tail)

    def test_level_is_part_of_the_name(self):
        assert "level=4" in builtin("devil_pair", level=4).obj.name


class TestFanArms:
    def test_fan0_arm_families(self):
        f = builtin("fan0").obj
        depth = 5
        cover = orbit_cover(f, 0, depth, Q(1, 8))
        zero_cell = 0
        # quotient the cover paths by how long they stay in the cell of 0
        families: dict[int, set] = {}
        for p in cover.paths:
            stay = 0
            while stay < depth and p[stay] == zero_cell:
                stay += 1
            families.setdefault(stay, set()).add(p)
        assert set(range(1, depth - 1)) <= set(families)
        # exact representatives: k zeros then a constant tail
        for k in range(1, depth - 1):
            samples = []
            for j in range(1, 9):
                s = Q(j, 8)
                prefix = tuple([ZERO] * k + [s] * (depth - k))
                for a, b in zip(prefix, prefix[1:]):
                    assert evaluate(f, a).contains(b)
                samples.append(prefix)
            diam = max(
                rho_prefix(u, v, depth)[0]
                for u in samples for v in samples)
            assert diam <= Q(1, 2**k)
            assert diam > Q(1, 2**(k + 2))

    def test_fan01_arm_families(self):
        f = builtin("fan01").obj
        depth = 6
        for k in (1, 2, 3):
            arms = {}
            for word in itertools.product((ZERO, Q(1)), repeat=k):
                reps = []
                for t in (ZERO, Q(1, 3), Q(2, 3), Q(1)):
                    prefix = (ZERO,) + word + tuple([t] * (depth - k - 1))
                    for a, b in zip(prefix, prefix[1:]):
                        assert evaluate(f, a).contains(b)
                    reps.append(prefix)
                arms[word] = reps
            assert len(arms) == 2**k
            # arm diameter: difference is confined to entries k+2 onward,
            # and the tail bound closes the sum exactly at 1/2^(k+1)
            for word, reps in arms.items():
                value, tail = rho_prefix(reps[0], reps[-1], depth)
                assert value + tail == Q(1, 2**(k + 1))
            # distinct words give disjoint arms: prefixes differ in the
            # fixed block
            words = list(arms)
            for i, w1 in enumerate(words):
                for w2 in words[i + 1:]:
                    assert all(
                        r1[1:k + 1] != r2[1:k + 1]
                        for r1 in arms[w1] for r2 in arms[w2])


class TestPinnedMap:
    def test_interleaved_prefix_embedding_is_injective(self):
        r = Q(1, 2)
        f = builtin("pin", r=r).obj
        t0 = Q(1, 5)
        grid = [Q(j, 4) for j in range(5)]
        depth_pairs = 3
        seen = set()
        count = 0
        for ss in itertools.product(grid, repeat=depth_pairs):
            prefix = [t0]
            for s in ss:
                prefix.extend([r, s])
            for a, b in zip(prefix, prefix[1:]):
                assert evaluate(f, a).contains(b)
            seen.add(tuple(prefix))
            count += 1
        assert len(seen) == count == len(grid) ** depth_pairs


class TestFiniteBuiltins:
    def test_finite_seq_shape(self):
        entry = builtin("finite_seq", n=5)
        assert isinstance(entry.obj, FiniteSystem)
        fan_out = entry.obj.successors("x1")
        assert set(fan_out) == set(entry.obj.states) - {"x1"}
        assert entry.obj.successors("limit") == ("limit",)

    def test_finite_cycle_minimal(self):
        from orbitkit.analysis import finite_oracle

        rep = finite_oracle(builtin("finite_cycle", n=4).obj)
        assert rep.dense_minimal and rep.weak_dense_minimal and rep.transitive


class TestProxies:
    def test_marker_orbit_density(self):
        # the documented stand-in reaches all eight 1/8-cells by step 9
        t0 = corpus.T0_DEFAULT
        tent = builtin("tent").obj
        orbit = [t0]
        for _ in range(8):
            orbit.append(evaluate(tent, orbit[-1]).points()[0])
        cells = {min(int(x * 8), 7) for x in orbit}
        assert cells == set(range(8))

    def test_switch_targets_cover_their_halves(self):
        h = builtin("double_tent_h").obj
        s = corpus.S_RIGHT_DEFAULT
        run = [s]
        for _ in range(4):
            run.append(evaluate(h, run[-1]).points()[0])
        assert run[-1] == Q(5, 6)
        assert {min(int(x * 8), 7) for x in run} == {4, 5, 6, 7}
        t = corpus.T_LEFT_DEFAULT
        run = [t]
        for _ in range(3):
            run.append(evaluate(h, run[-1]).points()[0])
        assert run[-1] == Q(1, 6)
        assert {min(int(x * 8), 7) for x in run} == {0, 1, 2, 3}
