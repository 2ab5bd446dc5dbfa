"""Society vector updates: clipped gradient ascent on mean happiness.

The society ascends x_bar' I theta in theta, one small step per mating
round, with the step size either fixed or scaled by the population's mean
flexibility trait.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import ConfigurationError, InteractionMatrix, Person, TraitVector

__all__ = [
    "LearningRateSchedule",
    "society_update",
    "society_gradient",
    "effective_lambda",
    "effective_lambda_value",
]


@dataclass(frozen=True)
class LearningRateSchedule:
    """How the ascent step size is chosen each round.

    fixed: lambda = base * multiplier.
    dynamic: lambda = base * multiplier * mean flexibility of the living
    population (an empty population freezes the society entirely).
    """

    kind: Literal["fixed", "dynamic"] = "fixed"
    base: float = 1e-4
    multiplier: float = 1.0
    flexibility_trait_index: int = 3

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "dynamic"):
            raise ConfigurationError(f"kind must be 'fixed' or 'dynamic', got {self.kind!r}")
        if not (self.base > 0 and math.isfinite(self.base)):
            raise ConfigurationError(f"base must be strictly positive, got {self.base}")
        if not (self.multiplier > 0 and math.isfinite(self.multiplier)):
            raise ConfigurationError(
                f"multiplier must be strictly positive, got {self.multiplier}"
            )
        if self.flexibility_trait_index < 0:
            raise ConfigurationError(
                f"flexibility_trait_index must be nonnegative, got "
                f"{self.flexibility_trait_index}"
            )


def _values(x, dim: int, *, what: str) -> np.ndarray:
    arr = x.values if isinstance(x, TraitVector) else np.asarray(x, dtype=np.float64)
    if arr.shape != (dim,):
        raise ConfigurationError(
            f"{what} has shape {arr.shape}, expected ({dim},)"
        )
    return arr


def society_gradient(x_bar, interaction: InteractionMatrix) -> np.ndarray:
    """d(x_bar' I theta)/d(theta) = x_bar' I, independent of theta."""
    xv = _values(x_bar, interaction.individual_dim, what="mean trait vector")
    return xv @ interaction.entries


def society_update(
    theta, x_bar, interaction: InteractionMatrix, lam: float
) -> TraitVector:
    """One ascent step, clipped back into the unit box per coordinate."""
    if not (lam >= 0 and math.isfinite(lam)):
        raise ConfigurationError(f"learning rate must be finite and >= 0, got {lam}")
    tv = _values(theta, interaction.society_dim, what="society vector")
    grad = society_gradient(x_bar, interaction)
    return TraitVector(np.clip(tv + lam * grad, 0.0, 1.0))


def effective_lambda_value(
    schedule: LearningRateSchedule, mean_flexibility: float | None
) -> float:
    """Step size given the population's mean flexibility (None = nobody alive)."""
    lam = schedule.base * schedule.multiplier
    if schedule.kind == "fixed":
        return lam
    if mean_flexibility is None:
        return 0.0
    return lam * float(mean_flexibility)


def effective_lambda(
    schedule: LearningRateSchedule, population: Sequence[Person]
) -> float:
    """Step size for this round; dynamic schedules read the living population."""
    if schedule.kind == "fixed":
        return effective_lambda_value(schedule, None)
    if not population:
        return 0.0
    idx = schedule.flexibility_trait_index
    if idx >= population[0].traits.dim:
        raise ConfigurationError(
            f"flexibility_trait_index {idx} out of range for "
            f"{population[0].traits.dim} traits"
        )
    flex = float(np.mean([p.traits.values[idx] for p in population]))
    return effective_lambda_value(schedule, flex)
