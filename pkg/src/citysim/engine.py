"""Round-based simulation engine.

Runs the co-evolution loop: at every mating round the available males and
females are paired under the configured matching mode, successful pairs
each bear one child, expired persons are buried, and the society vector
takes one ascent step. Everything stochastic draws from a named substream
of the master seed, so switching one feature (say, matching noise) on or
off never perturbs the draws of the others.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import (
    ConfigurationError,
    ConsistencyError,
    InteractionMatrix,
    Person,
    Sex,
    TraitVector,
)
from .demographics import DemographicsParams, born_batch
from .matching import MatchMode, expected_pair_weights, grid_distances, rank_pair_indices
from .society import LearningRateSchedule, effective_lambda_value

__all__ = [
    "PopulationGroup",
    "MatchingConfig",
    "SimConfig",
    "TimeSeriesLog",
    "named_stream",
    "init_population",
    "available",
    "update_pop",
    "run",
    "write_population_csv",
    "write_run_outputs",
]

# Fixed spawn keys: each name owns one independent substream of the master
# seed. Adding new names at the end keeps existing streams stable.
_STREAM_IDS = {
    "init": 0,
    "sex": 1,
    "born": 2,
    "noise": 3,
    "partition": 4,
    "location": 5,
    "success": 6,
}


def named_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named draw purpose under a master seed."""
    try:
        key = _STREAM_IDS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown stream name {name!r}; choices: {sorted(_STREAM_IDS)}"
        ) from None
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


@dataclass(frozen=True)
class PopulationGroup:
    """One founding subpopulation: count draws from N(mean, diag(std^2))."""

    count: int
    mean: TraitVector
    std: tuple[float, ...] | float = 0.1

    def __post_init__(self) -> None:
        if not isinstance(self.count, int) or self.count < 0:
            raise ConfigurationError(f"group count must be a nonnegative integer, got {self.count}")
        mean = self.mean if isinstance(self.mean, TraitVector) else TraitVector(self.mean)
        object.__setattr__(self, "mean", mean)
        std = self.std
        if np.isscalar(std):
            std = (float(std),) * mean.dim
        else:
            std = tuple(float(s) for s in std)
        if len(std) != mean.dim:
            raise ConfigurationError(
                f"std has {len(std)} entries for a {mean.dim}-trait mean"
            )
        if any(not (s >= 0 and math.isfinite(s)) for s in std):
            raise ConfigurationError(f"std entries must be finite and >= 0, got {std}")
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class MatchingConfig:
    """Which matching variant runs each round, and its knobs."""

    mode: MatchMode = MatchMode.OPTIMAL
    gamma: float = 1.0
    partition_size: int = 10
    noise_sigma: float = 1.0
    distance: str = "hamming"

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", MatchMode(self.mode))
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise ConfigurationError(f"gamma must be finite and >= 0, got {self.gamma}")
        if self.partition_size < 1:
            raise ConfigurationError(
                f"partition_size must be >= 1, got {self.partition_size}"
            )
        if not (self.noise_sigma >= 0 and math.isfinite(self.noise_sigma)):
            raise ConfigurationError(
                f"noise_sigma must be finite and >= 0, got {self.noise_sigma}"
            )
        if self.distance not in ("hamming", "manhattan"):
            raise ConfigurationError(
                f"distance must be 'hamming' or 'manhattan', got {self.distance!r}"
            )


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation run."""

    seed: int
    groups: tuple[PopulationGroup, ...]
    theta0: TraitVector
    interaction: InteractionMatrix = field(default_factory=InteractionMatrix.default)
    demographics: DemographicsParams = field(default_factory=DemographicsParams)
    matching: MatchingConfig = field(default_factory=MatchingConfig)
    schedule: LearningRateSchedule = field(default_factory=LearningRateSchedule)
    mating_period: float = 1.0
    max_time: float = 10_000.0
    grid: tuple[int, int] | None = None
    log_every: int = 1
    success_pop_scope: str = "global"

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            raise ConfigurationError(f"seed must be an integer in [0, 2^64), got {self.seed}")
        groups = tuple(self.groups)
        if not groups:
            raise ConfigurationError("at least one population group is required")
        if sum(g.count for g in groups) == 0:
            raise ConfigurationError("initial population is empty across all groups")
        object.__setattr__(self, "groups", groups)
        theta0 = self.theta0 if isinstance(self.theta0, TraitVector) else TraitVector(self.theta0)
        object.__setattr__(self, "theta0", theta0)
        if theta0.dim != self.interaction.society_dim:
            raise ConfigurationError(
                f"theta0 has {theta0.dim} traits, interaction matrix expects "
                f"{self.interaction.society_dim}"
            )
        for g in groups:
            if g.mean.dim != self.interaction.individual_dim:
                raise ConfigurationError(
                    f"group mean has {g.mean.dim} traits, interaction matrix "
                    f"expects {self.interaction.individual_dim}"
                )
        if not (self.mating_period > 0 and math.isfinite(self.mating_period)):
            raise ConfigurationError(f"mating_period must be > 0, got {self.mating_period}")
        if not (self.max_time >= 0 and math.isfinite(self.max_time)):
            raise ConfigurationError(f"max_time must be >= 0, got {self.max_time}")
        if not isinstance(self.log_every, int) or self.log_every < 1:
            raise ConfigurationError(f"log_every must be an integer >= 1, got {self.log_every}")
        if self.grid is not None:
            grid = (int(self.grid[0]), int(self.grid[1]))
            if grid[0] < 1 or grid[1] < 1:
                raise ConfigurationError(f"grid dimensions must be >= 1, got {grid}")
            object.__setattr__(self, "grid", grid)
        if self.matching.mode is MatchMode.LOCALITY and self.grid is None:
            raise ConfigurationError("locality matching requires a grid")
        if self.success_pop_scope not in ("global", "block"):
            raise ConfigurationError(
                f"success_pop_scope must be 'global' or 'block', got {self.success_pop_scope!r}"
            )
        if self.success_pop_scope == "block" and self.grid is None:
            raise ConfigurationError("block-scoped mating success requires a grid")

    @property
    def total_initial(self) -> int:
        return sum(g.count for g in self.groups)


@dataclass
class TimeSeriesLog:
    """Per-round record of the run, plus initial/final population snapshots.

    Rows are appended at t=0, then at every log_every-th round and always at
    the final round. births and deaths accumulate everything since the
    previous logged row, so population[i] = population[i-1] + births[i] -
    deaths[i] holds for every row. theta and the happiness columns reflect
    the state after the row's round completed.
    """

    times: np.ndarray
    population: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    total_happiness: np.ndarray
    mean_happiness: np.ndarray
    mean_current_happiness: np.ndarray
    theta: np.ndarray
    mean_traits: np.ndarray
    trait_names: tuple[str, ...]
    society_names: tuple[str, ...]
    status: str
    grid_rows: np.ndarray | None = None
    initial_population: list[Person] = field(default_factory=list)
    final_population: list[Person] = field(default_factory=list)

    @property
    def extinct(self) -> bool:
        return self.status != "completed"

    def validate_conservation(self) -> None:
        pops, births, deaths = self.population, self.births, self.deaths
        for i in range(1, len(pops)):
            if pops[i] != pops[i - 1] + births[i] - deaths[i]:
                raise ConsistencyError(
                    f"row {i}: population {pops[i]} != {pops[i - 1]} + "
                    f"{births[i]} - {deaths[i]}"
                )

    def header(self) -> str:
        theta_cols = ",".join(f"theta_{n}" for n in self.society_names)
        trait_cols = ",".join(f"mean_{n}" for n in self.trait_names)
        return (
            "time,population,births,deaths,total_happiness,mean_happiness,"
            f"mean_current_happiness,{theta_cols},{trait_cols}"
        )

    def write_csv(self, path: str | Path) -> None:
        lines = [self.header()]
        for i in range(len(self.times)):
            cells = [
                _fmt(self.times[i]),
                str(int(self.population[i])),
                str(int(self.births[i])),
                str(int(self.deaths[i])),
                _fmt(self.total_happiness[i]),
                _fmt(self.mean_happiness[i]),
                _fmt(self.mean_current_happiness[i]),
            ]
            cells.extend(_fmt(v) for v in self.theta[i])
            cells.extend(_fmt(v) for v in self.mean_traits[i])
            lines.append(",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n")

    def write_grid_csv(self, path: str | Path) -> None:
        if self.grid_rows is None:
            raise ConfigurationError("this run has no grid log (no locality grid)")
        lines = ["time,gx,gy,population,mean_happiness"]
        for row in self.grid_rows:
            lines.append(
                f"{_fmt(row[0])},{int(row[1])},{int(row[2])},{int(row[3])},{_fmt(row[4])}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    def summary(self) -> dict:
        last = len(self.times) - 1
        return {
            "status": self.status,
            "final_time": float(self.times[last]),
            "rows_logged": int(len(self.times)),
            "final_population": int(self.population[last]),
            "final_mean_happiness": _json_float(self.mean_happiness[last]),
            "final_theta": [float(v) for v in self.theta[last]],
            "total_births": int(self.births.sum()),
            "total_deaths": int(self.deaths.sum()),
        }


def _fmt(x: float) -> str:
    return repr(float(x))


def _json_float(x: float) -> float | None:
    x = float(x)
    return None if math.isnan(x) else x


def _logistic_vec(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _lifespan_vec(h: np.ndarray, d: DemographicsParams) -> np.ndarray:
    return np.maximum(0.0, d.lifespan_a * (1.0 - d.lifespan_b * np.exp(-h)))


def _gap_vec(h: np.ndarray, d: DemographicsParams) -> np.ndarray:
    return d.gap_a / (np.maximum(h, 0.0) + d.gap_epsilon)


class _Roster:
    """Columnar population store; rows are living (or dying-this-round) people."""

    __slots__ = ("ids", "sex", "traits", "happiness", "birth", "death", "avail", "loc")

    def __init__(self, ids, sex, traits, happiness, birth, death, avail, loc):
        self.ids = ids
        self.sex = sex
        self.traits = traits
        self.happiness = happiness
        self.birth = birth
        self.death = death
        self.avail = avail
        self.loc = loc

    @property
    def size(self) -> int:
        return self.ids.shape[0]

    def compress(self, keep: np.ndarray) -> None:
        self.ids = self.ids[keep]
        self.sex = self.sex[keep]
        self.traits = self.traits[keep]
        self.happiness = self.happiness[keep]
        self.birth = self.birth[keep]
        self.death = self.death[keep]
        self.avail = self.avail[keep]
        if self.loc is not None:
            self.loc = self.loc[keep]

    def extend(self, other: "_Roster") -> None:
        self.ids = np.concatenate([self.ids, other.ids])
        self.sex = np.concatenate([self.sex, other.sex])
        self.traits = np.concatenate([self.traits, other.traits])
        self.happiness = np.concatenate([self.happiness, other.happiness])
        self.birth = np.concatenate([self.birth, other.birth])
        self.death = np.concatenate([self.death, other.death])
        self.avail = np.concatenate([self.avail, other.avail])
        if self.loc is not None:
            self.loc = np.concatenate([self.loc, other.loc])


def _roster_from_persons(people: Sequence[Person], with_grid: bool) -> _Roster:
    n = len(people)
    loc = None
    if with_grid:
        loc = np.array([p.location for p in people], dtype=np.int64).reshape(n, 2)
    return _Roster(
        ids=np.array([p.id for p in people], dtype=np.int64),
        sex=np.array([int(p.sex) for p in people], dtype=np.int8),
        traits=np.stack([p.traits.values for p in people]) if n else np.zeros((0, 0)),
        happiness=np.array([p.happiness for p in people], dtype=np.float64),
        birth=np.array([p.birth_time for p in people], dtype=np.float64),
        death=np.array([p.death_time for p in people], dtype=np.float64),
        avail=np.array([p.next_available_time for p in people], dtype=np.float64),
        loc=loc,
    )


def _persons_from_roster(roster: _Roster) -> list[Person]:
    people = []
    for i in range(roster.size):
        loc = None
        if roster.loc is not None:
            loc = (int(roster.loc[i, 0]), int(roster.loc[i, 1]))
        people.append(
            Person(
                id=int(roster.ids[i]),
                sex=Sex(int(roster.sex[i])),
                traits=TraitVector(roster.traits[i]),
                happiness=float(roster.happiness[i]),
                birth_time=float(roster.birth[i]),
                death_time=float(roster.death[i]),
                next_available_time=float(roster.avail[i]),
                location=loc,
            )
        )
    return people


def init_population(
    config: SimConfig,
    rng: np.random.Generator | None = None,
    sex_rng: np.random.Generator | None = None,
    location_rng: np.random.Generator | None = None,
) -> list[Person]:
    """Founding roster at t=0.

    Traits draw per coordinate from each group's normal (then clip into
    [0, 1]); sexes are uniform; happiness freezes against theta0; death and
    availability times come straight from the demographic formulas. Draw
    order: all trait normals group by group, then all sexes in one batch,
    then all grid locations in one batch. Persons are returned in group
    order, so id ranges identify the founding groups.
    """
    if config.total_initial == 0:
        raise ConfigurationError("initial population is empty across all groups")
    rng = rng if rng is not None else named_stream(config.seed, "init")
    sex_rng = sex_rng if sex_rng is not None else named_stream(config.seed, "sex")
    location_rng = (
        location_rng if location_rng is not None else named_stream(config.seed, "location")
    )
    d = config.demographics
    gain0 = config.interaction.entries @ config.theta0.values
    blocks = []
    for group in config.groups:
        raw = rng.normal(
            loc=group.mean.values, scale=np.asarray(group.std), size=(group.count, group.mean.dim)
        )
        blocks.append(np.clip(raw, 0.0, 1.0))
    traits = np.concatenate(blocks) if blocks else np.zeros((0, 8))
    n = traits.shape[0]
    sexes = sex_rng.integers(0, 2, size=n)
    locations = None
    if config.grid is not None:
        locations = location_rng.integers(
            0, np.asarray(config.grid, dtype=np.int64), size=(n, 2)
        )
    happiness = traits @ gain0
    deaths = _lifespan_vec(happiness, d)
    avail = d.maturity_age * config.mating_period
    people = []
    for i in range(n):
        people.append(
            Person(
                id=i,
                sex=Sex(int(sexes[i])),
                traits=TraitVector(traits[i]),
                happiness=float(happiness[i]),
                birth_time=0.0,
                death_time=float(deaths[i]),
                next_available_time=float(avail),
                location=None if locations is None else (int(locations[i, 0]), int(locations[i, 1])),
            )
        )
    return people


def available(population: Sequence[Person], t: float) -> tuple[list[Person], list[Person]]:
    """Living, matured, recovered people at time t, split (males, females)."""
    Y = [p for p in population if p.is_alive(t) and p.next_available_time <= t and p.sex is Sex.MALE]
    Z = [p for p in population if p.is_alive(t) and p.next_available_time <= t and p.sex is Sex.FEMALE]
    return Y, Z


def update_pop(
    population: Sequence[Person], births: Sequence[Person], t: float
) -> list[Person]:
    """Merged roster with this round's births added and expiries removed."""
    merged = list(population) + list(births)
    ids = [p.id for p in merged]
    if len(set(ids)) != len(ids):
        raise ConsistencyError("duplicate person id in population update")
    return [p for p in merged if p.death_time > t]


def _match_pairs(
    roster: _Roster,
    yi: np.ndarray,
    zi: np.ndarray,
    gain: np.ndarray,
    config: SimConfig,
    streams: dict[str, np.random.Generator],
) -> tuple[np.ndarray, np.ndarray]:
    """Row indices (into the roster) of the matched male/female pairs."""
    mcfg = config.matching
    p_mut = config.demographics.mutation_prob
    if mcfg.mode is MatchMode.OPTIMAL:
        a = roster.traits[yi] @ gain
        b = roster.traits[zi] @ gain
        iy, iz = rank_pair_indices(a, b)
        return yi[iy], zi[iz]
    if mcfg.mode is MatchMode.NOISY:
        W = expected_pair_weights(roster.traits[yi], roster.traits[zi], gain, p_mut)
        W = W + streams["noise"].normal(0.0, mcfg.noise_sigma, size=W.shape)
        rows, cols = linear_sum_assignment(W, maximize=True)
        order = np.argsort(rows)
        return yi[rows[order]], zi[cols[order]]
    if mcfg.mode is MatchMode.PARTITIONED:
        rng = streams["partition"]
        perm_y = rng.permutation(len(yi))
        perm_z = rng.permutation(len(zi))
        size = mcfg.partition_size
        sel_y, sel_z = [], []
        # Male block i meets female block i; surplus blocks sit out. Same
        # block and noise draw order as matching.partitioned_match.
        for start in range(0, min(len(perm_y), len(perm_z)), size):
            by = perm_y[start : start + size]
            bz = perm_z[start : start + size]
            W = expected_pair_weights(
                roster.traits[yi[by]], roster.traits[zi[bz]], gain, p_mut
            )
            W = W + rng.normal(0.0, mcfg.noise_sigma, size=W.shape)
            rows, cols = linear_sum_assignment(W, maximize=True)
            order = np.argsort(rows)
            sel_y.extend(yi[by[rows[order]]])
            sel_z.extend(zi[bz[cols[order]]])
        return np.asarray(sel_y, dtype=np.intp), np.asarray(sel_z, dtype=np.intp)
    # locality
    W = expected_pair_weights(roster.traits[yi], roster.traits[zi], gain, p_mut)
    D = grid_distances(roster.loc[yi], roster.loc[zi], mcfg.distance)
    rows, cols = linear_sum_assignment(W - mcfg.gamma * D, maximize=True)
    order = np.argsort(rows)
    return yi[rows[order]], zi[cols[order]]


def _success_mask(
    roster: _Roster,
    sel_y: np.ndarray,
    sel_z: np.ndarray,
    alive_count: int,
    config: SimConfig,
    streams: dict[str, np.random.Generator],
    alive_mask: np.ndarray,
) -> np.ndarray:
    d = config.demographics
    hm = roster.happiness[sel_y]
    hf = roster.happiness[sel_z]
    if config.success_pop_scope == "global":
        pop_term = d.success_a * alive_count
    else:
        w, h = config.grid
        counts = np.zeros((w, h), dtype=np.int64)
        loc_alive = roster.loc[alive_mask]
        np.add.at(counts, (loc_alive[:, 0], loc_alive[:, 1]), 1)
        pop_y = counts[roster.loc[sel_y, 0], roster.loc[sel_y, 1]]
        pop_z = counts[roster.loc[sel_z, 0], roster.loc[sel_z, 1]]
        pop_term = d.success_a * (pop_y + pop_z) / 2.0
    worst = np.maximum(
        1.0 - _logistic_vec(d.success_scale * hm),
        1.0 - _logistic_vec(d.success_scale * hf),
    )
    threshold = pop_term + worst
    if d.success_rule == "deterministic":
        return np.minimum(hm, hf) >= threshold
    draws = streams["success"].random(sel_y.shape[0])
    return draws < 1.0 - np.clip(threshold, 0.0, 1.0)


def run(config: SimConfig) -> TimeSeriesLog:
    """Execute the full timeline and return the log.

    Round order at each t = k * mating_period: collect available, match,
    filter by mating success at the round-start population, bear children
    (happiness frozen against the current society vector), push parents'
    next availability to t + mating_gap, bury death_time <= t, step the
    society vector, log. Ends early, with status, on extinction (nobody
    left) or sterility (one sex extinct).
    """
    d = config.demographics
    E = config.interaction.entries
    streams = {name: named_stream(config.seed, name) for name in _STREAM_IDS}
    people = init_population(config, streams["init"], streams["sex"], streams["location"])
    roster = _roster_from_persons(people, with_grid=config.grid is not None)
    initial_snapshot = list(people)
    theta = config.theta0.values.copy()
    period = config.mating_period
    n_rounds = int(math.floor(config.max_time / period + 1e-9))
    next_id = roster.size

    times, pops, births_col, deaths_col = [], [], [], []
    tot_h, mean_h, mean_cur_h = [], [], []
    theta_rows, trait_rows = [], []
    grid_rows: list[tuple[float, int, int, int, float]] = []

    def log_row(t: float, births_acc: int, deaths_acc: int) -> None:
        n = roster.size
        times.append(t)
        pops.append(n)
        births_col.append(births_acc)
        deaths_col.append(deaths_acc)
        if n:
            tot = float(roster.happiness.sum())
            tot_h.append(tot)
            mean_h.append(tot / n)
            mean_cur_h.append(float(np.mean(roster.traits @ (E @ theta))))
            trait_rows.append(roster.traits.mean(axis=0))
        else:
            tot_h.append(0.0)
            mean_h.append(float("nan"))
            mean_cur_h.append(float("nan"))
            trait_rows.append(np.full(config.interaction.individual_dim, np.nan))
        theta_rows.append(theta.copy())
        if config.grid is not None:
            w, h = config.grid
            counts = np.zeros((w, h), dtype=np.int64)
            sums = np.zeros((w, h), dtype=np.float64)
            if n:
                np.add.at(counts, (roster.loc[:, 0], roster.loc[:, 1]), 1)
                np.add.at(sums, (roster.loc[:, 0], roster.loc[:, 1]), roster.happiness)
            for gx in range(w):
                for gy in range(h):
                    c = int(counts[gx, gy])
                    mean_block = sums[gx, gy] / c if c else float("nan")
                    grid_rows.append((t, gx, gy, c, mean_block))

    # Bury anyone dead at birth before the first row.
    roster.compress(roster.death > 0.0)
    status = "completed"
    if roster.size == 0:
        status = "extinct"
    elif (roster.sex == 0).all() or (roster.sex == 1).all():
        status = "sterile"
    log_row(0.0, 0, 0)

    births_acc = 0
    deaths_acc = 0
    if status == "completed":
        for k_round in range(1, n_rounds + 1):
            t = k_round * period
            alive = roster.death > t
            alive_count = int(alive.sum())
            avail = alive & (roster.avail <= t)
            yi = np.flatnonzero(avail & (roster.sex == 0))
            zi = np.flatnonzero(avail & (roster.sex == 1))

            n_children = 0
            if len(yi) and len(zi):
                gain = E @ theta
                sel_y, sel_z = _match_pairs(roster, yi, zi, gain, config, streams)
                if sel_y.shape[0]:
                    ok = _success_mask(
                        roster, sel_y, sel_z, alive_count, config, streams, alive
                    )
                    sel_y, sel_z = sel_y[ok], sel_z[ok]
                n_children = sel_y.shape[0]
                if n_children:
                    child_traits = born_batch(
                        roster.traits[sel_y], roster.traits[sel_z], streams["born"], d
                    )
                    child_sex = streams["sex"].integers(0, 2, size=n_children).astype(np.int8)
                    child_loc = None
                    if config.grid is not None:
                        pick = streams["location"].integers(0, 2, size=n_children)
                        child_loc = np.where(
                            pick[:, None] == 0, roster.loc[sel_y], roster.loc[sel_z]
                        )
                    child_happiness = child_traits @ gain
                    children = _Roster(
                        ids=np.arange(next_id, next_id + n_children, dtype=np.int64),
                        sex=child_sex,
                        traits=child_traits,
                        happiness=child_happiness,
                        birth=np.full(n_children, t),
                        death=t + _lifespan_vec(child_happiness, d),
                        avail=np.full(n_children, t + d.maturity_age * period),
                        loc=child_loc,
                    )
                    next_id += n_children
                    # Parents recover for t + gap(h) before their next match.
                    roster.avail[sel_y] = t + _gap_vec(roster.happiness[sel_y], d)
                    roster.avail[sel_z] = t + _gap_vec(roster.happiness[sel_z], d)
                    roster.extend(children)

            before = roster.size
            keep = roster.death > t
            n_dead = before - int(keep.sum())
            if n_dead:
                roster.compress(keep)
            births_acc += n_children
            deaths_acc += n_dead

            if roster.size:
                lam = effective_lambda_value(
                    config.schedule,
                    float(roster.traits[:, config.schedule.flexibility_trait_index].mean())
                    if config.schedule.kind == "dynamic"
                    else None,
                )
                theta = np.clip(theta + lam * (roster.traits.mean(axis=0) @ E), 0.0, 1.0)
            if roster.size == 0:
                status = "extinct"
            elif (roster.sex == 0).all() or (roster.sex == 1).all():
                status = "sterile"

            terminal = status != "completed" or k_round == n_rounds
            if k_round % config.log_every == 0 or terminal:
                log_row(t, births_acc, deaths_acc)
                births_acc = 0
                deaths_acc = 0
            if status != "completed":
                break

    log = TimeSeriesLog(
        times=np.asarray(times),
        population=np.asarray(pops, dtype=np.int64),
        births=np.asarray(births_col, dtype=np.int64),
        deaths=np.asarray(deaths_col, dtype=np.int64),
        total_happiness=np.asarray(tot_h),
        mean_happiness=np.asarray(mean_h),
        mean_current_happiness=np.asarray(mean_cur_h),
        theta=np.stack(theta_rows),
        mean_traits=np.stack(trait_rows),
        trait_names=config.interaction.row_names,
        society_names=config.interaction.col_names,
        status=status,
        grid_rows=np.asarray(grid_rows) if config.grid is not None else None,
        initial_population=initial_snapshot,
        final_population=_persons_from_roster(roster),
    )
    return log


def write_population_csv(
    people: Sequence[Person], path: str | Path, trait_names: Sequence[str]
) -> None:
    """Snapshot CSV: one row per person, trait columns named."""
    header = "id,sex,birth_time,death_time,next_available_time,happiness,gx,gy," + ",".join(
        trait_names
    )
    lines = [header]
    for p in people:
        gx = "" if p.location is None else str(p.location[0])
        gy = "" if p.location is None else str(p.location[1])
        cells = [
            str(p.id),
            "male" if p.sex is Sex.MALE else "female",
            _fmt(p.birth_time),
            _fmt(p.death_time),
            _fmt(p.next_available_time),
            _fmt(p.happiness),
            gx,
            gy,
        ]
        cells.extend(_fmt(v) for v in p.traits.values)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_run_outputs(
    log: TimeSeriesLog,
    config: SimConfig,
    out_dir: str | Path,
    wall_time_s: float,
) -> list[Path]:
    """Write log.csv, summary.json, both population snapshots, and (for grid
    runs) grid_log.csv into out_dir. Returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    log_path = out / "log.csv"
    log.write_csv(log_path)
    written.append(log_path)

    summary = log.summary()
    # Volatile values live only under "meta" so everything above it is
    # byte-stable for identical configs and seeds.
    summary["meta"] = {
        "seed": config.seed,
        "wall_time_s": round(wall_time_s, 3),
        "written_at": datetime.now(timezone.utc).isoformat(),
    }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    written.append(summary_path)

    init_path = out / "population_initial.csv"
    write_population_csv(log.initial_population, init_path, config.interaction.row_names)
    written.append(init_path)

    final_path = out / "population_final.csv"
    write_population_csv(log.final_population, final_path, config.interaction.row_names)
    written.append(final_path)

    if log.grid_rows is not None:
        grid_path = out / "grid_log.csv"
        log.write_grid_csv(grid_path)
        written.append(grid_path)
    return written
