"""Closed-form life events and reproduction rules.

Lifespan, mating gap, and the mating success threshold are deterministic
functions of happiness (and population pressure); reproduction is the only
stochastic piece and takes an explicit random generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import ConfigurationError, Person, TraitVector

__all__ = [
    "DemographicsParams",
    "lifespan",
    "mating_gap",
    "mating_success_threshold",
    "mating_succeeds",
    "born",
    "born_batch",
    "expected_child",
]


@dataclass(frozen=True)
class DemographicsParams:
    """Constants for the life-event formulas.

    lifespan_a, lifespan_b:
        L(h) = max(0, lifespan_a * (1 - lifespan_b * exp(-h))). With the
        defaults, lifespan is zero up to h = ln(10) and saturates at 150.
    gap_a, gap_epsilon:
        g(h) = gap_a / (max(h, 0) + gap_epsilon). The epsilon caps the gap
        at 80 time units for h <= 0, which exceeds any realistic lifespan,
        so unhappy agents effectively never mate again.
    success_a, success_scale:
        m = success_a * pop_size + max(1 - sigma(success_scale * h_male),
        1 - sigma(success_scale * h_female)); sigma is the logistic.
    mutation_prob:
        Per-coordinate probability that a child's gene is redrawn uniformly
        instead of copied from a parent.
    maturity_age:
        Delay before a newborn first becomes available, measured in mating
        periods.
    success_rule:
        "deterministic" gates a mating on min(h_male, h_female) >= m.
        "probabilistic" instead succeeds with probability 1 - clip(m, 0, 1).
    """

    lifespan_a: float = 150.0
    lifespan_b: float = 10.0
    gap_a: float = 0.8
    gap_epsilon: float = 0.01
    success_a: float = 0.002
    success_scale: float = 20.0
    mutation_prob: float = 0.1
    maturity_age: float = 1.0
    success_rule: Literal["deterministic", "probabilistic"] = "deterministic"

    def __post_init__(self) -> None:
        positive = (
            ("lifespan_a", self.lifespan_a),
            ("lifespan_b", self.lifespan_b),
            ("gap_a", self.gap_a),
            ("gap_epsilon", self.gap_epsilon),
            ("success_a", self.success_a),
            ("success_scale", self.success_scale),
            ("maturity_age", self.maturity_age),
        )
        for name, value in positive:
            if not (value > 0) or not math.isfinite(value):
                raise ConfigurationError(f"{name} must be strictly positive, got {value}")
        if not (0.0 <= self.mutation_prob <= 1.0):
            raise ConfigurationError(
                f"mutation_prob must lie in [0, 1], got {self.mutation_prob}"
            )
        if self.success_rule not in ("deterministic", "probabilistic"):
            raise ConfigurationError(
                f"success_rule must be 'deterministic' or 'probabilistic', "
                f"got {self.success_rule!r}"
            )


_DEFAULTS = DemographicsParams()


def _logistic(t: float) -> float:
    # Split on sign so the exponential never overflows.
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def lifespan(h: float, params: DemographicsParams | None = None) -> float:
    """Time a person born with happiness h lives; 0 means dead at birth."""
    p = params or _DEFAULTS
    return max(0.0, p.lifespan_a * (1.0 - p.lifespan_b * math.exp(-h)))


def mating_gap(h: float, params: DemographicsParams | None = None) -> float:
    """Recovery time before a person with happiness h can mate again."""
    p = params or _DEFAULTS
    return p.gap_a / (max(h, 0.0) + p.gap_epsilon)


def mating_success_threshold(
    pop_size: int,
    h_male: float,
    h_female: float,
    params: DemographicsParams | None = None,
) -> float:
    """Minimum happiness both partners need for a mating to succeed.

    Grows linearly with population size (crowding) and steeply as either
    partner's happiness drops below zero.
    """
    p = params or _DEFAULTS
    if pop_size < 0:
        raise ConfigurationError(f"pop_size must be nonnegative, got {pop_size}")
    worst = max(
        1.0 - _logistic(p.success_scale * h_male),
        1.0 - _logistic(p.success_scale * h_female),
    )
    return p.success_a * pop_size + worst


def mating_succeeds(
    pop_size: int,
    male: Person,
    female: Person,
    params: DemographicsParams | None = None,
    rng: np.random.Generator | None = None,
) -> bool:
    """Whether a matched pair actually produces a child this round."""
    p = params or _DEFAULTS
    m = mating_success_threshold(pop_size, male.happiness, female.happiness, p)
    if p.success_rule == "deterministic":
        return min(male.happiness, female.happiness) >= m
    if rng is None:
        raise ConfigurationError("probabilistic success_rule needs a random generator")
    return float(rng.random()) < 1.0 - min(max(m, 0.0), 1.0)


def _trait_values(x, *, what: str) -> np.ndarray:
    if isinstance(x, TraitVector):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ConfigurationError(f"{what} must be one-dimensional, got shape {arr.shape}")
    return arr


def born_batch(
    fathers: np.ndarray,
    mothers: np.ndarray,
    rng: np.random.Generator,
    params: DemographicsParams | None = None,
) -> np.ndarray:
    """Vectorized reproduction: one child row per parent-pair row.

    Draw order is fixed (mutation mask, parent choice, fresh genes) so a
    batch of one is bit-identical to a single born() call on the same
    generator state.
    """
    p = params or _DEFAULTS
    fathers = np.atleast_2d(np.asarray(fathers, dtype=np.float64))
    mothers = np.atleast_2d(np.asarray(mothers, dtype=np.float64))
    if fathers.shape != mothers.shape:
        raise ConfigurationError(
            f"parent batches differ in shape: {fathers.shape} vs {mothers.shape}"
        )
    mutate = rng.random(fathers.shape) < p.mutation_prob
    take_father = rng.random(fathers.shape) < 0.5
    fresh = rng.random(fathers.shape)
    child = np.where(take_father, fathers, mothers)
    return np.where(mutate, fresh, child)


def born(
    father,
    mother,
    rng: np.random.Generator,
    params: DemographicsParams | None = None,
) -> TraitVector:
    """Child traits: each gene copied from a uniformly chosen parent, or
    redrawn uniformly on [0, 1] with probability mutation_prob."""
    f = _trait_values(father, what="father traits")
    m = _trait_values(mother, what="mother traits")
    if f.shape != m.shape:
        raise ConfigurationError(
            f"parents differ in dimension: {f.shape[0]} vs {m.shape[0]}"
        )
    child = born_batch(f[None, :], m[None, :], rng, params)[0]
    return TraitVector(child)


def expected_child(
    father,
    mother,
    params: DemographicsParams | None = None,
) -> TraitVector:
    """Analytic expectation of born(): (1-p)(f+m)/2 + p/2 per coordinate."""
    p = (params or _DEFAULTS).mutation_prob
    f = _trait_values(father, what="father traits")
    m = _trait_values(mother, what="mother traits")
    if f.shape != m.shape:
        raise ConfigurationError(
            f"parents differ in dimension: {f.shape[0]} vs {m.shape[0]}"
        )
    return TraitVector((1.0 - p) * (f + m) / 2.0 + p * 0.5)
