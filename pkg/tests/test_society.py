"""Gradient ascent on the society vector."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from citysim.core import (
    ConfigurationError,
    InteractionMatrix,
    Person,
    Sex,
    TraitVector,
)
from citysim.society import (
    LearningRateSchedule,
    effective_lambda,
    effective_lambda_value,
    society_gradient,
    society_update,
)

MATRIX = InteractionMatrix.default()

# Gradient of mean happiness when the population is pure trait a; this is
# the first column of the printed table, read off independently.
COLUMN_A = [0.9, 0.7, -0.1, -0.9, 0.7, -0.5, 0.6, 0.0, -0.5, 0.0, 0.0, -0.4, 0.2]


def flex_person(pid, flexibility):
    traits = np.full(8, 0.5)
    traits[3] = flexibility
    return Person(
        id=pid,
        sex=Sex.MALE,
        traits=TraitVector(traits),
        happiness=0.5,
        birth_time=0.0,
        death_time=10.0,
        next_available_time=1.0,
    )


class TestSocietyUpdate:
    def test_zero_learning_rate_is_identity(self):
        theta = TraitVector(np.linspace(0.1, 0.9, 13))
        assert society_update(theta, np.full(8, 0.7), MATRIX, 0.0) == theta

    def test_zero_mean_traits_is_identity(self):
        theta = TraitVector(np.linspace(0.1, 0.9, 13))
        assert society_update(theta, np.zeros(8), MATRIX, 0.5) == theta

    def test_pure_intellect_population_steps_along_first_column(self):
        lam = 1e-3
        theta = TraitVector(np.full(13, 0.5))
        x_bar = np.eye(8)[0]
        updated = society_update(theta, x_bar, MATRIX, lam)
        step = updated.values - theta.values
        assert np.allclose(step, lam * np.asarray(COLUMN_A), atol=1e-15)

    def test_unclipped_step_matches_finite_difference_gradient(self):
        rng = np.random.default_rng(77)
        lam, h = 1e-3, 1e-5
        for _ in range(20):
            x_bar = rng.uniform(size=8)
            theta = rng.uniform(0.3, 0.7, size=13)
            step = society_update(theta, x_bar, MATRIX, lam).values - theta
            fd = np.empty(13)
            for j in range(13):
                up, dn = theta.copy(), theta.copy()
                up[j] += h
                dn[j] -= h
                f = lambda t: float(x_bar @ MATRIX.entries @ t)
                fd[j] = (f(up) - f(dn)) / (2 * h)
            rel = np.linalg.norm(step / lam - fd) / np.linalg.norm(fd)
            assert rel < 1e-6

    def test_one_step_improvement_without_clipping(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x_bar = rng.uniform(0.1, 1.0, size=8)
            theta = rng.uniform(0.3, 0.7, size=13)
            grad = society_gradient(x_bar, MATRIX)
            if np.linalg.norm(grad) < 1e-9:
                continue
            new = society_update(theta, x_bar, MATRIX, 1e-4).values
            f_old = float(x_bar @ MATRIX.entries @ theta)
            f_new = float(x_bar @ MATRIX.entries @ new)
            assert f_new > f_old

    @given(
        st.lists(st.floats(0, 1), min_size=8, max_size=8),
        st.lists(st.floats(0, 1), min_size=13, max_size=13),
        st.floats(0, 100),
    )
    def test_theta_never_leaves_unit_box(self, xs, ts, lam):
        updated = society_update(np.asarray(ts), np.asarray(xs), MATRIX, lam)
        assert np.all(updated.values >= 0.0)
        assert np.all(updated.values <= 1.0)

    def test_long_run_stays_in_box(self):
        theta = TraitVector(np.full(13, 0.5))
        x_bar = np.full(8, 1.0)
        for _ in range(10_000):
            theta = society_update(theta, x_bar, MATRIX, 0.05)
        assert np.all(theta.values >= 0.0)
        assert np.all(theta.values <= 1.0)

    def test_rejects_negative_lambda(self):
        with pytest.raises(ConfigurationError):
            society_update(np.full(13, 0.5), np.full(8, 0.5), MATRIX, -1e-4)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            society_update(np.full(12, 0.5), np.full(8, 0.5), MATRIX, 1e-4)
        with pytest.raises(ConfigurationError):
            society_update(np.full(13, 0.5), np.full(9, 0.5), MATRIX, 1e-4)


class TestLearningRateSchedule:
    def test_defaults(self):
        s = LearningRateSchedule()
        assert s.kind == "fixed"
        assert s.base == 1e-4
        assert s.multiplier == 1.0
        assert s.flexibility_trait_index == 3

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"kind": "adaptive"},
            {"base": 0.0},
            {"base": -1e-4},
            {"multiplier": 0.0},
            {"flexibility_trait_index": -1},
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ConfigurationError):
            LearningRateSchedule(**kwargs)


class TestEffectiveLambda:
    def test_fixed_is_base_times_multiplier(self):
        s = LearningRateSchedule(kind="fixed", base=1e-4, multiplier=30)
        assert effective_lambda(s, []) == pytest.approx(3e-3, abs=1e-18)

    def test_dynamic_fully_flexible_population(self):
        s = LearningRateSchedule(kind="dynamic", base=1e-4, multiplier=10)
        pop = [flex_person(i, 1.0) for i in range(5)]
        assert effective_lambda(s, pop) == pytest.approx(1e-3, abs=1e-18)

    def test_dynamic_rigid_population_freezes_society(self):
        s = LearningRateSchedule(kind="dynamic")
        pop = [flex_person(i, 0.0) for i in range(5)]
        assert effective_lambda(s, pop) == 0.0

    def test_dynamic_empty_population_freezes_society(self):
        s = LearningRateSchedule(kind="dynamic")
        assert effective_lambda(s, []) == 0.0

    def test_dynamic_averages_flexibility(self):
        s = LearningRateSchedule(kind="dynamic", base=2e-4, multiplier=1)
        pop = [flex_person(0, 0.2), flex_person(1, 0.6)]
        assert effective_lambda(s, pop) == pytest.approx(2e-4 * 0.4, abs=1e-18)

    def test_value_form_matches_person_form(self):
        s = LearningRateSchedule(kind="dynamic", base=1e-4, multiplier=3)
        pop = [flex_person(i, f) for i, f in enumerate([0.1, 0.5, 0.9])]
        assert effective_lambda(s, pop) == pytest.approx(
            effective_lambda_value(s, 0.5), abs=1e-18
        )

    def test_dynamic_index_out_of_range(self):
        s = LearningRateSchedule(kind="dynamic", flexibility_trait_index=11)
        with pytest.raises(ConfigurationError):
            effective_lambda(s, [flex_person(0, 0.5)])
