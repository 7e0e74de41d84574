import numpy as np
import pytest

from conftest import homogeneous, random_instance
from enforcement.constrained import (
    QuotaSet,
    constrained_greedy,
    quota_violations,
    relax_quotas,
    satisfy_lower_bounds,
    validate_hierarchy,
)
from enforcement.errors import HierarchyError, InfeasibleError
from enforcement.heterogeneous import greedy_payoff_het
from enforcement.model import validate_strategy
from enforcement.oracles import grid_oracle


def counties_and_states():
    inst = homogeneous([0.2, 0.3, 0.25, 0.4, 0.1, 0.35], [1, 2, 1.5, 0.5, 0.8, 1.2], 1.0, ids=list("abcdef"))
    sets = [
        QuotaSet("c1", {"a", "b"}, 0, 0.4),
        QuotaSet("c2", {"c"}, 0, 0.2),
        QuotaSet("c3", {"d", "e"}, 0, 0.3),
        QuotaSet("c4", {"f"}, 0, 0.3),
        QuotaSet("s1", {"a", "b", "c"}, 0, 0.5),
        QuotaSet("s2", {"d", "e", "f"}, 0, 0.5),
    ]
    return inst, sets


class TestValidation:
    def test_overlapping_family_names_the_pair(self):
        n = 4
        inst = homogeneous([0.5] * n, [1] * n, 2.0)
        sets = [QuotaSet(f"S{i}", {i, n}, 0, 0.5) for i in range(1, n)]
        with pytest.raises(HierarchyError, match=r"not a hierarchy: constraints 'S1' and 'S2'"):
            validate_hierarchy(sets, inst)

    def test_two_layers(self):
        inst, sets = counties_and_states()
        h = validate_hierarchy(sets, inst)
        assert [[s.id for s in layer] for layer in h.layers] == [["c1", "c2", "c3", "c4"], ["s1", "s2"]]

    def test_single_cover(self):
        inst = homogeneous([0.2, 0.3], [1, 1], 1.0)
        h = validate_hierarchy([QuotaSet("all", {1, 2}, 0, 0.4)], inst)
        assert h.depth == 1 and [s.id for s in h.layers[0]] == ["all"]

    def test_normalisation_covers_every_location_once_per_layer(self):
        inst = homogeneous([0.2] * 5, [1] * 5, 1.0)
        sets = [QuotaSet("p", {1, 2}, 0, 0.3), QuotaSet("top", {1, 2, 3}, 0, 0.5)]
        h = validate_hierarchy(sets, inst)
        for layer in h.layers:
            members = [m for s in layer for m in s.members]
            assert sorted(members) == [1, 2, 3, 4, 5]
        pass_through = [s for s in h.layers[0] if s.synthetic]
        assert {next(iter(s.members)): s.upper for s in pass_through} == {3: 0.5, 4: 1.0, 5: 1.0}

    def test_bad_sets(self):
        inst = homogeneous([0.2], [1], 1.0)
        with pytest.raises(HierarchyError):
            QuotaSet("x", set(), 0, 1)
        with pytest.raises(HierarchyError):
            QuotaSet("x", {1}, 0.5, 0.2)
        with pytest.raises(HierarchyError, match="unknown"):
            validate_hierarchy([QuotaSet("x", {9}, 0, 1)], inst)


class TestGreedy:
    def test_nested_quota_trap(self, quota_trap):
        h = validate_hierarchy([QuotaSet("S1", {1, 2}, 0, 0.2)], quota_trap)
        r = constrained_greedy(quota_trap, h)
        assert r.strategy.values(quota_trap) == pytest.approx([0.1, 0.1, 0.1, 0, 0])
        assert r.objective_value == pytest.approx(1.2098, abs=1e-9)

    def test_no_constraints_is_plain_greedy(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            inst = random_instance(rng, 5, 3)
            h = validate_hierarchy([], inst)
            assert constrained_greedy(inst, h).objective_value == greedy_payoff_het(inst).objective_value

    def test_disjoint_pairs_run_the_greedy_inside_each_pair(self):
        inst = homogeneous([0.5, 0.5, 0.3, 0.4], [1.0, 1.01, 0.6, 0.9], 1.0)
        sets = [QuotaSet("A", {1, 2}, 0, 0.5), QuotaSet("B", {3, 4}, 0, 0.5)]
        r = constrained_greedy(inst, validate_hierarchy(sets, inst))
        for s in sets:
            share = sum(r.strategy[m] for m in s.members)
            sub = greedy_payoff_het(inst.subset(s.members, share))
            assert sum(r.strategy[m] for m in s.members) == pytest.approx(sum(sub.strategy.alloc.values()))
            assert sub.objective_value == pytest.approx(
                sum(greedy_payoff_het(inst.subset([m], r.strategy[m])).objective_value for m in s.members), abs=1e-9
            )
        opt = grid_oracle(inst, 0.01, sets).objective_value
        assert r.objective_value >= 0.5 * opt

    def test_respects_given_quotas(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            inst = random_instance(rng, 6, 2)
            ids = inst.ids
            perm = list(rng.permutation(len(ids)))
            half = max(1, len(ids) // 2)
            sets = [QuotaSet("lo", {ids[i] for i in perm[:half]}, 0, float(rng.uniform(0, 1)))]
            if len(ids) > half:
                sets.append(QuotaSet("hi", {ids[i] for i in perm[half:]}, 0, float(rng.uniform(0, 1))))
            sets.append(QuotaSet("top", set(ids), 0, float(rng.uniform(0, 1.5))))
            h = validate_hierarchy(sets, inst)
            r = constrained_greedy(inst, h)
            assert not quota_violations(inst, r.strategy, sets)
            assert not validate_strategy(inst, r.strategy)

    def test_infeasible_lower_quotas(self):
        inst = homogeneous([0.2, 0.3], [1, 1], 0.5)
        h = validate_hierarchy([QuotaSet("x", {1, 2}, 0.8, 1.0)], inst)
        with pytest.raises(InfeasibleError):
            constrained_greedy(inst, h)
        inst = homogeneous([0.2, 0.3], [1, 1], 5.0)
        h = validate_hierarchy([QuotaSet("x", {1}, 1.5, 2.0)], inst)
        with pytest.raises(InfeasibleError, match="x"):
            constrained_greedy(inst, h)


class TestLowerBounds:
    def test_no_lower_bounds_means_no_preallocation(self):
        inst, sets = counties_and_states()
        pre = satisfy_lower_bounds(inst, validate_hierarchy(sets, inst))
        assert all(v == 0 for v in pre.values(inst))

    def test_lower_bound_at_capacity_saturates(self):
        inst = homogeneous([0.2, 0.3, 0.25], [1, 2, 1.5], 1.0)
        lower = min(0.2 + 0.3, 0.45)
        sets = [QuotaSet("s", {1, 2}, lower, 0.45)]
        h = validate_hierarchy(sets, inst)
        pre = satisfy_lower_bounds(inst, h)
        assert pre[1] + pre[2] == pytest.approx(lower)
        r = constrained_greedy(inst, h)
        assert not quota_violations(inst, r.strategy, sets)
        grid = grid_oracle(inst, 0.005, h)
        assert r.objective_value >= 0.5 * grid.objective_value - grid.error_bound

    def test_lower_bound_two_per_bottom_set(self):
        inst = homogeneous([0.3, 0.5, 0.2, 0.4, 0.6], [1, 2, 0.5, 1.5, 1], 4.5)
        sets = [QuotaSet("a", {1, 2, 3}, 2.0, 2.5), QuotaSet("b", {4, 5}, 2.0, 2.0)]
        h = validate_hierarchy(sets, inst)
        r = constrained_greedy(inst, h)
        assert not quota_violations(inst, r.strategy, sets)
        grid = grid_oracle(inst, 0.005, h)
        assert r.objective_value >= 0.5 * grid.objective_value - grid.error_bound


class TestRelaxation:
    def test_single_layer_l1(self):
        inst = homogeneous([0.2, 0.3, 0.4], [1, 1, 1], 1.0)
        h = validate_hierarchy([QuotaSet("a", {1, 2}, 0, 0.3), QuotaSet("b", {3}, 0, 0.1)], inst)
        relaxed, extra = relax_quotas(h, "L1")
        assert extra == 2
        assert [s.upper for s in relaxed.sets] == pytest.approx([1.3, 1.1])

    def test_two_layer_l2(self):
        inst, sets = counties_and_states()
        h = validate_hierarchy(sets, inst)
        relaxed, extra = relax_quotas(h, "L2")
        assert extra == 2
        assert [s.upper for s in relaxed.sets] == pytest.approx([1.4, 1.2, 1.3, 1.3, 1.5, 1.5])

    def test_two_layer_l1(self):
        inst, sets = counties_and_states()
        relaxed, extra = relax_quotas(validate_hierarchy(sets, inst), "L1")
        assert extra == 4
        assert [s.upper for s in relaxed.sets] == pytest.approx([1.4, 1.2, 1.3, 1.3, 2.5, 2.5])

    def test_regime_guarantees_on_county_state_family(self):
        inst, sets = counties_and_states()
        h = validate_hierarchy(sets, inst)
        grid = grid_oracle(inst, 0.005, h)
        for regime, factor in (("L1", 1.0), ("L2", 0.5)):
            relaxed, extra = relax_quotas(h, regime)
            got = constrained_greedy(inst.with_budget(inst.budget + extra), relaxed).objective_value
            assert got >= factor * grid.objective_value - grid.error_bound
