"""Round-by-round engine for team-sprint consensus simulation.

Participants are randomly partitioned into teams each round. Every member
works a fixed share of the team's base round time, sped up or slowed down by
a per-participant performance factor and a fresh per-round multiplier:

    simulated time = work time * multiplier / performance factor

A team's completion time is the sum of its members' simulated times
(members contribute sequentially), and the fastest team wins the round's
fixed reward, split equally among its members. Team size 1 reduces to
classic individual proof-of-work racing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MASTER_SEED = 42


class ConfigurationError(ValueError):
    """A scenario configuration violates one of its invariants."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one experiment condition.

    ``high_perf_override`` is an optional ``(participant_id, factor)`` pair
    that pins one participant's performance factor after the uniform draw,
    used to study dominance of a single fast node.

    ``redraw_profile_per_run`` selects whether each run draws a fresh set of
    performance factors (independent repetitions) or all runs share one
    profile drawn from the master seed.
    """

    participant_count: int
    team_size: int
    rounds: int
    runs: int
    base_time: float = 600.0
    reward_per_round: float = 10.0
    perf_range: tuple[float, float] = (0.8, 1.5)
    multiplier_range: tuple[float, float] = (0.8, 1.2)
    high_perf_override: tuple[int, float] | None = None
    master_seed: int = DEFAULT_MASTER_SEED
    redraw_profile_per_run: bool = True

    def __post_init__(self) -> None:
        if self.participant_count < 1:
            raise ConfigurationError(
                f"participant_count must be positive, got {self.participant_count}"
            )
        if self.team_size < 1:
            raise ConfigurationError(f"team_size must be positive, got {self.team_size}")
        if self.participant_count % self.team_size != 0:
            raise ConfigurationError(
                f"participant count {self.participant_count} is not divisible "
                f"by team size {self.team_size}"
            )
        if self.rounds < 0:
            raise ConfigurationError(f"rounds must be non-negative, got {self.rounds}")
        if self.runs < 0:
            raise ConfigurationError(f"runs must be non-negative, got {self.runs}")
        if self.base_time <= 0:
            raise ConfigurationError(f"base_time must be positive, got {self.base_time}")
        if self.reward_per_round <= 0:
            raise ConfigurationError(
                f"reward_per_round must be positive, got {self.reward_per_round}"
            )
        for name, (lo, hi) in (
            ("perf_range", self.perf_range),
            ("multiplier_range", self.multiplier_range),
        ):
            if not (0 < lo <= hi):
                raise ConfigurationError(
                    f"{name} must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
                )
        if self.high_perf_override is not None:
            pid, factor = self.high_perf_override
            if not 0 <= pid < self.participant_count:
                raise ConfigurationError(
                    f"high_perf_override id {pid} outside population of "
                    f"{self.participant_count}"
                )
            if factor <= 0:
                raise ConfigurationError(
                    f"high_perf_override factor must be positive, got {factor}"
                )
        if not 0 <= self.master_seed < (1 << 64):
            raise ConfigurationError(
                f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}"
            )

    @property
    def team_count(self) -> int:
        return self.participant_count // self.team_size

    @property
    def work_time(self) -> float:
        """Each member's nominal share of a round, base_time / team_size."""
        return member_work_time(self.base_time, self.team_size)


@dataclass(frozen=True)
class PerformanceProfile:
    """Per-participant performance factors for one run, indexed by id."""

    factors: np.ndarray


@dataclass(frozen=True)
class TeamAssignment:
    """One round's partition of participants into equal-size teams.

    ``teams`` has shape (team_count, team_size); row t lists team t's members.
    """

    teams: np.ndarray

    @property
    def team_count(self) -> int:
        return self.teams.shape[0]

    @property
    def team_size(self) -> int:
        return self.teams.shape[1]


@dataclass(frozen=True)
class RoundOutcome:
    """One round's team times, winner, member times, and reward deltas."""

    assignment: TeamAssignment
    team_times: np.ndarray
    winner: int
    member_times: np.ndarray
    reward_delta: np.ndarray


@dataclass(frozen=True)
class RunResult:
    """Accumulated outcome of one seeded run.

    ``active_time`` holds each participant's summed simulated time across
    all rounds; every participant works every round, winners and losers
    alike, which is what makes total time the energy proxy.
    """

    cumulative_reward: np.ndarray
    win_count: np.ndarray
    active_time: np.ndarray
    profile: PerformanceProfile

    @property
    def total_active_time(self) -> float:
        return float(self.active_time.sum())


def draw_performance_profile(
    config: ScenarioConfig, stream: np.random.Generator
) -> PerformanceProfile:
    """Draw factors independently uniform on perf_range, then apply the override."""
    lo, hi = config.perf_range
    factors = stream.uniform(lo, hi, config.participant_count)
    if config.high_perf_override is not None:
        pid, factor = config.high_perf_override
        factors[pid] = factor
    factors.flags.writeable = False
    return PerformanceProfile(factors=factors)


def form_teams(
    participant_count: int, team_size: int, stream: np.random.Generator
) -> TeamAssignment:
    """Randomly partition participants into consecutive chunks of a shuffle.

    A uniformly random permutation of all ids is cut into team_size chunks,
    so the assignment is an exact partition by construction.
    """
    if team_size < 1 or participant_count % team_size != 0:
        raise ConfigurationError(
            f"participant count {participant_count} is not divisible "
            f"by team size {team_size}"
        )
    order = stream.permutation(participant_count)
    teams = order.reshape(participant_count // team_size, team_size)
    teams.flags.writeable = False
    return TeamAssignment(teams=teams)


def member_work_time(base_time: float, team_size: int) -> float:
    """Nominal per-member work share of one round: base_time / team_size."""
    return base_time / team_size


def simulated_time(work_time: float, multiplier: float, performance_factor: float) -> float:
    """Actual processing time: work_time * multiplier / performance_factor."""
    if performance_factor <= 0:
        raise ValueError(
            f"performance factor must be positive, got {performance_factor}"
        )
    return work_time * multiplier / performance_factor


def execute_round(
    profile: PerformanceProfile, config: ScenarioConfig, stream: np.random.Generator
) -> RoundOutcome:
    """Play one round: form teams, race, award the fastest team.

    Stream consumption order is fixed: one permutation for team formation,
    then one multiplier per participant (indexed by id). Each member's time
    follows the simulated_time formula; a team's time is the sum over its
    members; the winner is the argmin team index, which also breaks the
    measure-zero ties toward the lowest index.
    """
    n = config.participant_count
    assignment = form_teams(n, config.team_size, stream)
    lo, hi = config.multiplier_range
    multipliers = stream.uniform(lo, hi, n)
    member_times = config.work_time * multipliers / profile.factors
    team_times = member_times[assignment.teams].sum(axis=1)
    winner = int(np.argmin(team_times))
    reward_delta = np.zeros(n)
    reward_delta[assignment.teams[winner]] = config.reward_per_round / config.team_size
    return RoundOutcome(
        assignment=assignment,
        team_times=team_times,
        winner=winner,
        member_times=member_times,
        reward_delta=reward_delta,
    )


def run_simulation(
    config: ScenarioConfig,
    run_seed: int,
    profile: PerformanceProfile | None = None,
) -> RunResult:
    """Execute one run of config.rounds rounds from a single seeded stream.

    The stream first feeds the profile draw (unless a pre-drawn profile is
    supplied for shared-profile scenarios), then each round in sequence.
    Identical (config, run_seed, profile) always reproduce the same result.
    """
    stream = np.random.default_rng(run_seed)
    if profile is None:
        profile = draw_performance_profile(config, stream)
    elif len(profile.factors) != config.participant_count:
        raise ConfigurationError(
            f"profile length {len(profile.factors)} does not match "
            f"participant count {config.participant_count}"
        )

    n = config.participant_count
    win_count = np.zeros(n, dtype=np.int64)
    active_time = np.zeros(n)
    for _ in range(config.rounds):
        outcome = execute_round(profile, config, stream)
        winners = outcome.assignment.teams[outcome.winner]
        win_count[winners] += 1
        active_time += outcome.member_times

    # Built from win counts so reward == share * wins holds bit-exactly.
    cumulative_reward = (config.reward_per_round / config.team_size) * win_count
    for arr in (cumulative_reward, win_count, active_time):
        arr.flags.writeable = False
    return RunResult(
        cumulative_reward=cumulative_reward,
        win_count=win_count,
        active_time=active_time,
        profile=profile,
    )
