import random
from fractions import Fraction as Q

import pytest

from orbitkit import orbit as orb
from orbitkit.orbit import (
    BudgetExceeded,
    HypothesisNotChecked,
    IndexOutOfRange,
    NoSibling,
    NotFiniteValued,
    depth_connectivity,
    inverse_limit_prefixes,
    orbit_cover,
    orbit_tree,
    project_k,
    sibling_within,
)
from orbitkit.setmap import (
    evaluate,
    iterate,
    make_map,
    point_rule,
    preimage_union_map,
    rectangle,
    segment,
)
from orbitkit.space import interval, point, rho_prefix


def flip_map():
    return make_map([segment(0, 1, 0, 1), segment(0, 1, 1, 0)], name="flip")


def tent_map():
    return make_map([segment(0, "1/2", 0, 1), segment("1/2", 1, 1, 0)], name="tent")


def identity_map():
    return make_map([segment(0, 1, 0, 1)], name="identity")


def fan_map():
    return make_map([segment(0, 1, 0, 1), point_rule(0, interval(0, 1))],
                    name="fan0")


def tent_shadow(t0=Q(3, 59)):
    return make_map(
        [segment(0, "1/2", 0, 1), segment("1/2", 1, 1, 0),
         rectangle(0, 1, point(t0))],
        name="tent_aug_G")


def halving_flip():
    # two-branch map whose trees never collapse: {t/2, 1 - t/2}
    return make_map([segment(0, 1, 0, "1/2"), segment(0, 1, 1, "1/2")],
                    name="halving_flip")


class TestOrbitTree:
    def test_flip_depth3(self):
        t = orbit_tree(flip_map(), Q(3, 10), 3)
        branches = list(t.branches())
        assert len(branches) == 4
        for k in (1, 2, 3):
            assert set(t.level_values(k)) <= {Q(3, 10), Q(7, 10)}
        for b in branches:
            for a, c in zip(b, b[1:]):
                assert evaluate(flip_map(), a).contains(c)

    def test_flip_fixed_point_single_branch(self):
        t = orbit_tree(flip_map(), Q(1, 2), 5)
        assert list(t.branches()) == [tuple([Q(1, 2)] * 5)]

    def test_not_finite_valued(self):
        with pytest.raises(NotFiniteValued):
            orbit_tree(fan_map(), 0, 3)

    def test_budget(self, monkeypatch):
        monkeypatch.setattr(orb, "NODE_BUDGET", 1000)
        with pytest.raises(BudgetExceeded):
            orbit_tree(halving_flip(), Q(1, 3), 12)

    def test_projection_lemma(self):
        # level-k values equal the (k-1)-th iterate, exactly
        for f, z in [
            (flip_map(), Q(3, 10)),
            (halving_flip(), Q(1, 5)),
            (tent_shadow(), Q(1, 3)),
        ]:
            t = orbit_tree(f, z, 6)
            for k in range(1, 7):
                assert project_k(t, k) == iterate(f, z, k - 1), (f.name, k)

    def test_projection_root(self):
        t = orbit_tree(flip_map(), Q(3, 10), 4)
        assert project_k(t, 1) == point(Q(3, 10))
        with pytest.raises(IndexOutOfRange):
            project_k(t, 5)

    def test_projection_lemma_across_finite_valued_builtins(self):
        # every catalog map that is finite valued along the chosen start
        # satisfies the projection identity through depth 6
        from orbitkit.corpus import CATALOG, builtin
        from orbitkit.setmap import SetValuedMap

        checked = 0
        for name in CATALOG:
            obj = builtin(name).obj
            if not isinstance(obj, SetValuedMap):
                continue
            for z in (Q(3, 10), Q(2, 3)):
                try:
                    tree = orbit_tree(obj, z, 6)
                except orb.NotFiniteValued:
                    continue
                for k in range(1, 7):
                    assert project_k(tree, k) == iterate(obj, z, k - 1), \
                        (name, z, k)
                checked += 1
        assert checked >= 8


def sample_prefix(rng, f, z, n):
    prefix = [z]
    for _ in range(n - 1):
        val = evaluate(f, prefix[-1])
        lo, hi = val.components[rng.randrange(len(val.components))]
        prefix.append(lo + (hi - lo) * Q(rng.randint(0, 16), 16))
    return tuple(prefix)


class TestOrbitCover:
    def test_fan_step2_covers_everything(self):
        c = orbit_cover(fan_map(), 0, 2, Q(1, 4))
        assert c.level_cells(1) == (0,)
        assert c.level_cells(2) == (0, 1, 2, 3)

    def test_identity_paths_start_confined(self):
        # 1/3 sits strictly inside cell 1, and the exact step-one value
        # {1/3} keeps depth-2 prefixes there; deeper levels may drift by
        # one cell per step through shared-endpoint edges (the documented
        # boundary artifact), but the true constant orbit stays covered.
        c = orbit_cover(identity_map(), Q(1, 3), 4, Q(1, 4))
        assert c.level_cells(1) == (1,)
        assert c.level_cells(2) == (1,)
        assert (1, 1, 1, 1) in c.paths

    def test_refinement_maps_into_coarser(self):
        fine = orbit_cover(tent_map(), Q(1, 3), 4, Q(1, 8))
        coarse = orbit_cover(tent_map(), Q(1, 3), 4, Q(1, 4))
        coarse_set = set(coarse.paths)
        for p in fine.paths:
            assert tuple(c // 2 for c in p) in coarse_set

    def test_nested_truncation(self):
        deep = orbit_cover(fan_map(), 0, 4, Q(1, 4))
        shallow = orbit_cover(fan_map(), 0, 3, Q(1, 4))
        shallow_set = set(shallow.paths)
        for p in deep.paths:
            assert p[:3] in shallow_set

    def test_projection_covers_iterate(self):
        # the level-k cells of a cover always cover the (k-1)-th iterate
        from orbitkit.space import canonicalize

        for f, z in [(fan_map(), Q(0)), (tent_map(), Q(1, 5)),
                     (flip_map(), Q(3, 10))]:
            cover = orbit_cover(f, z, 4, Q(1, 8))
            m = cover.cells
            for k in range(1, 5):
                cells = orb.project_k(cover, k)
                covered = canonicalize(
                    [(Q(c, m), Q(c + 1, m)) for c in cells])
                assert iterate(f, z, k - 1).subset_of(covered)

    def test_soundness_random_prefixes(self):
        rng = random.Random(61)
        for f, z in [(fan_map(), Q(0)), (flip_map(), Q(3, 10)),
                     (tent_map(), Q(1, 5))]:
            cover = orbit_cover(f, z, 4, Q(1, 8))
            paths = set(cover.paths)
            for _ in range(100):
                prefix = sample_prefix(rng, f, z, 4)
                m = cover.cells
                ok = any(
                    all(Q(c, m) <= x <= Q(c + 1, m) for x, c in zip(prefix, p))
                    for p in paths
                )
                assert ok, (f.name, prefix)


class TestSibling:
    def test_flip_quarter(self):
        t = orbit_tree(flip_map(), Q(3, 10), 6)
        branch = tuple([Q(3, 10)] * 6)
        sib = sibling_within(t, branch, Q(1, 4))
        assert sib != branch
        assert sib[:3] == branch[:3]
        assert sib[3] != branch[3]  # first difference at index 4
        value, tail = rho_prefix(branch, sib, 6)
        assert value + tail < Q(1, 4)

    def test_fixed_point_has_no_sibling(self):
        t = orbit_tree(flip_map(), Q(1, 2), 6)
        branch = tuple([Q(1, 2)] * 6)
        with pytest.raises(NoSibling):
            sibling_within(t, branch, Q(1, 4))

    def test_huge_eps_splits_immediately(self):
        t = orbit_tree(flip_map(), Q(3, 10), 4)
        branch = tuple([Q(3, 10)] * 4)
        sib = sibling_within(t, branch, Q(2))
        assert sib[0] == branch[0]
        assert sib[1] != branch[1]

    def test_every_branch_has_sibling(self):
        t = orbit_tree(flip_map(), Q(1, 5), 8)
        for branch in t.branches():
            for eps in (Q(1, 2), Q(1, 4), Q(1, 8)):
                sib = sibling_within(t, branch, eps)
                value, tail = rho_prefix(branch, sib, 8)
                assert sib != branch and value + tail < eps


class TestConnectivity:
    def test_fan_cover_connected(self):
        c = orbit_cover(fan_map(), 0, 3, Q(1, 8))
        verdict = depth_connectivity(c)
        assert verdict.connected

    def test_single_valued_tube(self):
        c = orbit_cover(tent_map(), Q(1, 3), 5, Q(1, 8))
        assert depth_connectivity(c).connected

    def test_hypothesis_required(self):
        c = orbit_cover(flip_map(), Q(3, 10), 3, Q(1, 4))
        with pytest.raises(HypothesisNotChecked):
            depth_connectivity(c)


class TestInverseLimit:
    def test_matches_tree_branches(self):
        fs = [tent_map(), identity_map()]
        fu = preimage_union_map(fs)
        for z in (Q(2, 3), Q(1, 2)):
            for n in (2, 3, 4, 5):
                tree_side = frozenset(orbit_tree(fu, z, n).branches())
                limit_side = inverse_limit_prefixes(fs, z, n)
                assert tree_side == limit_side, (z, n)

    def test_thread_relation(self):
        # every enumerated prefix satisfies x_i = f_p(x_{i+1}) for some label
        fs = [tent_map(), identity_map()]

        def tent_val(x):
            return 2 * x if x <= Q(1, 2) else 2 * (1 - x)

        for pre in inverse_limit_prefixes(fs, Q(2, 3), 4):
            for a, b in zip(pre, pre[1:]):
                assert a in (tent_val(b), b)
