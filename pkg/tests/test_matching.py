"""Weight construction and exact assignment solving."""

import itertools

import numpy as np
import pytest

from citysim.core import (
    ConfigurationError,
    ConsistencyError,
    InteractionMatrix,
    Person,
    Sex,
    TraitVector,
    happiness,
)
from citysim.demographics import DemographicsParams, expected_child
from citysim.matching import (
    MatchMode,
    MatchPlan,
    MatchWeights,
    build_weights,
    grid_distances,
    partitioned_match,
    plan_matings,
    rank_pairing_match,
    solve_assignment,
)

MATRIX = InteractionMatrix.default()


def make_person(pid, sex, traits, happy=0.5, location=None):
    return Person(
        id=pid,
        sex=sex,
        traits=TraitVector(traits),
        happiness=happy,
        birth_time=0.0,
        death_time=100.0,
        next_available_time=0.0,
        location=location,
    )


def random_people(rng, n, sex, start_id=0, grid=None):
    people = []
    for i in range(n):
        loc = tuple(int(v) for v in rng.integers(0, grid, size=2)) if grid else None
        people.append(make_person(start_id + i, sex, rng.uniform(size=8), location=loc))
    return people


def permutation_maximum(W):
    """All-permutations oracle; same gather-and-sum as the solver's total."""
    ky, kz = W.shape
    if ky <= kz:
        perms = np.array(list(itertools.permutations(range(kz), ky)))
        totals = W[np.arange(ky)[None, :], perms].sum(axis=1)
    else:
        perms = np.array(list(itertools.permutations(range(ky), kz)))
        totals = W[perms, np.arange(kz)[None, :]].sum(axis=1)
    return totals.max()


class TestSolveAssignment:
    def test_single_cell(self):
        plan = solve_assignment(MatchWeights([[5.0]], (10,), (20,)))
        assert plan.pairs == ((10, 20),)
        assert plan.total_weight == 5.0

    def test_two_by_two_unique_optimum(self):
        plan = solve_assignment(MatchWeights([[2.0, 1.0], [1.0, 2.0]], (0, 1), (2, 3)))
        assert plan.pairs == ((0, 2), (1, 3))
        assert plan.total_weight == 4.0

    def test_empty_matrix_gives_empty_plan(self):
        plan = solve_assignment(MatchWeights(np.zeros((0, 3)), (), (5, 6, 7)))
        assert plan.pairs == ()
        assert plan.total_weight == 0.0

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_matches_permutation_brute_force(self, k):
        rng = np.random.default_rng(1000 + k)
        for _ in range(30):
            W = rng.uniform(-1, 1, size=(k, k))
            plan = solve_assignment(MatchWeights(W, tuple(range(k)), tuple(range(k, 2 * k))))
            assert plan.total_weight == permutation_maximum(W)

    @pytest.mark.parametrize("shape", [(3, 5), (5, 3)])
    def test_rectangular_matches_brute_force_and_covers_small_side(self, shape):
        rng = np.random.default_rng(7)
        for _ in range(20):
            W = rng.uniform(-1, 1, size=shape)
            plan = solve_assignment(
                MatchWeights(W, tuple(range(shape[0])), tuple(range(100, 100 + shape[1])))
            )
            assert len(plan.pairs) == min(shape)
            assert plan.total_weight == permutation_maximum(W)

    def test_plan_is_stable_under_weight_translation(self):
        rng = np.random.default_rng(42)
        W = rng.uniform(size=(6, 6))
        ids = (tuple(range(6)), tuple(range(10, 16)))
        base = solve_assignment(MatchWeights(W, *ids))
        shifted = solve_assignment(MatchWeights(W + 17.25, *ids))
        assert base.pairs == shifted.pairs


class TestMatchWeights:
    def test_rejects_non_finite(self):
        with pytest.raises(ConfigurationError):
            MatchWeights([[np.inf]], (0,), (1,))

    def test_rejects_id_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            MatchWeights(np.zeros((2, 2)), (0,), (1, 2))

    def test_plan_rejects_id_reuse(self):
        with pytest.raises(ConsistencyError):
            MatchPlan(((0, 1), (0, 2)), 0.0, MatchMode.OPTIMAL)


class TestBuildWeights:
    def test_cells_equal_expected_child_payoff(self):
        rng = np.random.default_rng(3)
        Y = random_people(rng, 5, Sex.MALE)
        Z = random_people(rng, 4, Sex.FEMALE, start_id=5)
        theta = TraitVector(rng.uniform(size=13))
        W = build_weights(Y, Z, theta, MATRIX)
        for i, y in enumerate(Y):
            for j, z in enumerate(Z):
                oracle = happiness(expected_child(y.traits, z.traits), MATRIX, theta)
                assert W.weights[i, j] == pytest.approx(oracle, abs=1e-12)

    def test_indicator_pair_without_mutation_reads_matrix_cell(self):
        params = DemographicsParams(mutation_prob=1e-12)
        e_a = np.eye(8)[0]
        Y = [make_person(0, Sex.MALE, e_a)]
        Z = [make_person(1, Sex.FEMALE, e_a)]
        theta = np.eye(13)[0]
        W = build_weights(Y, Z, theta, MATRIX, params=params)
        assert W.weights[0, 0] == pytest.approx(0.9, abs=1e-9)

    def test_locality_penalty_subtracts_gamma_times_distance(self):
        params = DemographicsParams(mutation_prob=1e-12)
        e_a = np.eye(8)[0]
        Y = [make_person(0, Sex.MALE, e_a, location=(0, 0))]
        Z = [make_person(1, Sex.FEMALE, e_a, location=(1, 1))]
        theta = np.eye(13)[0]
        W = build_weights(Y, Z, theta, MATRIX, MatchMode.LOCALITY, gamma=1.0, params=params)
        assert W.weights[0, 0] == pytest.approx(0.9 - 2.0, abs=1e-9)

    def test_locality_same_block_is_unpenalized(self):
        rng = np.random.default_rng(9)
        Y = random_people(rng, 3, Sex.MALE, grid=4)
        Z = [make_person(10 + i, Sex.FEMALE, rng.uniform(size=8), location=y.location)
             for i, y in enumerate(Y)]
        theta = TraitVector(rng.uniform(size=13))
        plain = build_weights(Y, Z, theta, MATRIX)
        local = build_weights(Y, Z, theta, MATRIX, MatchMode.LOCALITY, gamma=5.0)
        assert np.allclose(np.diag(local.weights), np.diag(plain.weights), atol=1e-12)

    def test_locality_needs_locations(self):
        Y = [make_person(0, Sex.MALE, np.ones(8))]
        Z = [make_person(1, Sex.FEMALE, np.ones(8))]
        with pytest.raises(ConfigurationError):
            build_weights(Y, Z, np.ones(13), MATRIX, MatchMode.LOCALITY)

    def test_noisy_needs_rng(self):
        Y = [make_person(0, Sex.MALE, np.ones(8))]
        Z = [make_person(1, Sex.FEMALE, np.ones(8))]
        with pytest.raises(ConfigurationError):
            build_weights(Y, Z, np.ones(13), MATRIX, MatchMode.NOISY)

    def test_partitioned_mode_is_rejected_here(self):
        with pytest.raises(ConfigurationError):
            build_weights([], [], np.ones(13), MATRIX, MatchMode.PARTITIONED)

    def test_noisy_weights_reproducible_per_seed(self):
        rng = np.random.default_rng(8)
        Y = random_people(rng, 6, Sex.MALE)
        Z = random_people(rng, 6, Sex.FEMALE, start_id=6)
        theta = TraitVector(rng.uniform(size=13))
        W1 = build_weights(Y, Z, theta, MATRIX, MatchMode.NOISY, rng=np.random.default_rng(99))
        W2 = build_weights(Y, Z, theta, MATRIX, MatchMode.NOISY, rng=np.random.default_rng(99))
        assert np.array_equal(W1.weights, W2.weights)
        assert solve_assignment(W1).pairs == solve_assignment(W2).pairs

    def test_empty_side_yields_empty_matrix(self):
        W = build_weights([], [], np.ones(13), MATRIX)
        assert W.weights.shape == (0, 0)


class TestGridDistances:
    def test_hamming_counts_unequal_coordinates(self):
        y = np.array([[0, 0], [1, 2]])
        z = np.array([[0, 0], [1, 0], [2, 2]])
        D = grid_distances(y, z)
        assert D.tolist() == [[0.0, 1.0, 2.0], [2.0, 1.0, 1.0]]

    def test_manhattan_alternative(self):
        y = np.array([[0, 0]])
        z = np.array([[3, 4]])
        assert grid_distances(y, z, "manhattan")[0, 0] == 7.0

    def test_unknown_metric_rejected(self):
        with pytest.raises(ConfigurationError):
            grid_distances(np.zeros((1, 2)), np.zeros((1, 2)), "euclid")


class TestRankPairing:
    @pytest.mark.parametrize("ky,kz", [(6, 6), (7, 5), (5, 7), (1, 1), (40, 40)])
    def test_total_matches_full_solve(self, ky, kz):
        rng = np.random.default_rng(ky * 100 + kz)
        Y = random_people(rng, ky, Sex.MALE)
        Z = random_people(rng, kz, Sex.FEMALE, start_id=ky)
        theta = TraitVector(rng.uniform(size=13))
        fast = rank_pairing_match(Y, Z, theta, MATRIX)
        full = solve_assignment(build_weights(Y, Z, theta, MATRIX))
        assert fast.total_weight == pytest.approx(full.total_weight, abs=1e-9)
        assert len(fast.pairs) == min(ky, kz)
        assert fast.mode is MatchMode.OPTIMAL

    def test_total_matches_full_solve_under_ties(self):
        # Quantized traits force many exactly-equal scores.
        rng = np.random.default_rng(17)
        Y = [make_person(i, Sex.MALE, rng.integers(0, 2, size=8)) for i in range(9)]
        Z = [make_person(20 + i, Sex.FEMALE, rng.integers(0, 2, size=8)) for i in range(9)]
        theta = TraitVector(np.full(13, 0.5))
        fast = rank_pairing_match(Y, Z, theta, MATRIX)
        full = solve_assignment(build_weights(Y, Z, theta, MATRIX))
        assert fast.total_weight == pytest.approx(full.total_weight, abs=1e-9)

    def test_empty_sides(self):
        plan = rank_pairing_match([], [], np.ones(13), MATRIX)
        assert plan.pairs == ()
        assert plan.total_weight == 0.0


class TestPartitionedMatch:
    def test_block_size_one_is_random_pairing(self):
        rng = np.random.default_rng(4)
        Y = random_people(rng, 8, Sex.MALE)
        Z = random_people(rng, 6, Sex.FEMALE, start_id=8)
        plan = partitioned_match(Y, Z, np.ones(13), MATRIX, 1, np.random.default_rng(1))
        assert len(plan.pairs) == 6
        assert plan.mode is MatchMode.PARTITIONED
        males = [a for a, _ in plan.pairs]
        assert len(set(males)) == len(males)

    def test_reproducible_per_seed(self):
        rng = np.random.default_rng(14)
        Y = random_people(rng, 10, Sex.MALE)
        Z = random_people(rng, 10, Sex.FEMALE, start_id=10)
        p1 = partitioned_match(Y, Z, np.ones(13), MATRIX, 3, np.random.default_rng(5))
        p2 = partitioned_match(Y, Z, np.ones(13), MATRIX, 3, np.random.default_rng(5))
        assert p1.pairs == p2.pairs
        assert p1.total_weight == p2.total_weight

    def test_never_beats_global_optimum_on_clean_weights(self):
        rng = np.random.default_rng(23)
        for trial in range(100):
            Y = random_people(rng, 9, Sex.MALE)
            Z = random_people(rng, 9, Sex.FEMALE, start_id=9)
            theta = TraitVector(rng.uniform(size=13))
            clean = build_weights(Y, Z, theta, MATRIX)
            optimal = solve_assignment(clean)
            part = partitioned_match(
                Y, Z, theta, MATRIX, 3, np.random.default_rng(trial)
            )
            index_y = {pid: i for i, pid in enumerate(clean.y_ids)}
            index_z = {pid: j for j, pid in enumerate(clean.z_ids)}
            clean_total = sum(
                clean.weights[index_y[a], index_z[b]] for a, b in part.pairs
            )
            assert clean_total <= optimal.total_weight + 1e-9

    def test_rejects_silly_partition_size(self):
        with pytest.raises(ConfigurationError):
            partitioned_match([], [], np.ones(13), MATRIX, 0, np.random.default_rng(0))

    def test_empty_sides(self):
        plan = partitioned_match([], [], np.ones(13), MATRIX, 4, np.random.default_rng(0))
        assert plan.pairs == ()


class TestPlanMatings:
    def test_empty_plan(self):
        assert plan_matings(MatchPlan((), 0.0, MatchMode.OPTIMAL), []) == []

    def test_threshold_filters_unhappy_pairs(self):
        population = [
            make_person(0, Sex.MALE, np.ones(8), happy=1.0),
            make_person(1, Sex.FEMALE, np.ones(8), happy=1.0),
            make_person(2, Sex.MALE, np.ones(8), happy=-1.0),
            make_person(3, Sex.FEMALE, np.ones(8), happy=-1.0),
        ]
        plan = MatchPlan(((0, 1), (2, 3)), 0.0, MatchMode.OPTIMAL)
        survivors = plan_matings(plan, population)
        assert [(m.id, f.id) for m, f in survivors] == [(0, 1)]

    def test_all_pairs_below_threshold(self):
        population = [
            make_person(0, Sex.MALE, np.ones(8), happy=-2.0),
            make_person(1, Sex.FEMALE, np.ones(8), happy=-2.0),
        ]
        plan = MatchPlan(((0, 1),), 0.0, MatchMode.OPTIMAL)
        assert plan_matings(plan, population) == []

    def test_stale_id_is_a_consistency_error(self):
        population = [make_person(0, Sex.MALE, np.ones(8), happy=1.0)]
        plan = MatchPlan(((0, 99),), 0.0, MatchMode.OPTIMAL)
        with pytest.raises(ConsistencyError):
            plan_matings(plan, population)
