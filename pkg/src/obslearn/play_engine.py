"""Strategy execution, off-path belief policies and expected discounted payoffs.

Play is driven by a *public state*: for each player, the interval of her
types that the opponent still considers possible, together with the stack of
earlier intervals and the rules they were interpreted against.  Beliefs are
updated through the *presumed* strategy of the mover, which may differ from
the strategy actually played; that gap is what makes deviations invisible.
"""

from __future__ import annotations

import abc
import enum
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import serialize
from .belief_engine import (
    DEFAULT_ROOT_TOL,
    ActionPair,
    ActionRule,
    check_action,
    myopic_threshold,
    trace_clip,
    truncate,
)
from .errors import IncompleteStrategyError, InvalidArgumentError
from .intervals import BeliefInterval
from .signal_model import (
    DEFAULT_QUADRATURE,
    Player,
    QuadratureSettings,
    SignalModel,
    posterior_mean,
    truncated_expectation,
    type_probability,
)

History = tuple[ActionPair, ...]


def as_history(moves: Sequence[Sequence[int]]) -> History:
    return tuple(ActionPair.build(int(m[0]), int(m[1])) for m in moves)


def check_discount(delta: float, name: str = "delta") -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"{name} must lie in (0, 1), got {delta!r}")
    return delta


def check_horizon(horizon: int) -> int:
    if int(horizon) != horizon or horizon < 1:
        raise InvalidArgumentError(f"horizon must be a positive integer, got {horizon!r}")
    return int(horizon)


class BeliefPolicy(enum.Enum):
    INERTIA = "inertia"
    RESET = "reset"


@dataclass(frozen=True)
class Environment:
    model: SignalModel
    q: QuadratureSettings = DEFAULT_QUADRATURE
    root_tol: float = DEFAULT_ROOT_TOL

    def myopic_threshold(self, player: Player, belief: BeliefInterval) -> float:
        return myopic_threshold(self.model, player, belief, self.q, self.root_tol)


# ---------------------------------------------------------------- strategies


class Strategy(abc.ABC):
    """A pure strategy: maps the public state to a rule over own signals."""

    @abc.abstractmethod
    def rule(self, player: Player, state: PlayState, env: Environment) -> ActionRule: ...

    @property
    @abc.abstractmethod
    def stationary_from(self) -> int | None:
        """First date from which the rule depends on current beliefs only."""


@dataclass(frozen=True)
class Myopic(Strategy):
    def rule(self, player: Player, state: PlayState, env: Environment) -> ActionRule:
        return ActionRule.threshold(env.myopic_threshold(player, state.belief_held_by(player)))

    @property
    def stationary_from(self) -> int:
        return 0


def _frozen_items(mapping: Mapping) -> tuple:
    return tuple(sorted(mapping.items(), key=lambda kv: (len(kv[0]), kv[0])))


@dataclass(frozen=True)
class ThresholdMap(Strategy):
    """History-indexed single thresholds; ``fallback`` covers unlisted histories."""

    thresholds: Mapping[History, float]
    fallback: Strategy | None = None
    _table: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        table = {}
        for h, mu in dict(self.thresholds).items():
            mu = float(mu)
            if not math.isfinite(mu):
                raise InvalidArgumentError(f"threshold at {h} must be finite")
            table[as_history(h)] = mu
        object.__setattr__(self, "thresholds", _frozen_items(table))
        object.__setattr__(self, "_table", table)

    def rule(self, player: Player, state: PlayState, env: Environment) -> ActionRule:
        mu = self._table.get(state.history)
        if mu is not None:
            return ActionRule.threshold(mu)
        if self.fallback is None:
            raise IncompleteStrategyError(f"no threshold for {player} after history {state.history}")
        return self.fallback.rule(player, state, env)

    @property
    def stationary_from(self) -> int | None:
        if self.fallback is None or self.fallback.stationary_from is None:
            return None
        last = max((len(h) + 1 for h, _ in self.thresholds), default=0)
        return max(last, self.fallback.stationary_from)


@dataclass(frozen=True)
class TwoThresholdMap(Strategy):
    """History-indexed rules using one threshold or a pair ``(mu1, mu2, outer)``.

    ``outer`` is played below ``mu1`` and above ``mu2``, ``-outer`` in between.
    At least one history must use a genuine pair.
    """

    rules: Mapping[History, float | tuple[float, float, int]]
    fallback: Strategy | None = None
    _table: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        table = {}
        genuine = False
        for h, spec in dict(self.rules).items():
            if isinstance(spec, (int, float)):
                rule = ActionRule.threshold(float(spec))
            else:
                mu1, mu2, outer = spec
                rule = ActionRule.two_threshold(float(mu1), float(mu2), int(outer))
                genuine = True
            table[as_history(h)] = rule
        if not genuine:
            raise InvalidArgumentError("a two-threshold strategy needs at least one two-threshold history")
        object.__setattr__(self, "rules", _frozen_items(table))
        object.__setattr__(self, "_table", table)

    def rule(self, player: Player, state: PlayState, env: Environment) -> ActionRule:
        rule = self._table.get(state.history)
        if rule is not None:
            return rule
        if self.fallback is None:
            raise IncompleteStrategyError(f"no rule for {player} after history {state.history}")
        return self.fallback.rule(player, state, env)

    @property
    def stationary_from(self) -> int | None:
        if self.fallback is None or self.fallback.stationary_from is None:
            return None
        last = max((len(h) + 1 for h, _ in self.rules), default=0)
        return max(last, self.fallback.stationary_from)


@dataclass(frozen=True)
class DeviationScript(Strategy):
    """``base`` with the action forced at the listed dates."""

    base: Strategy
    overrides: Mapping[int, int]

    def __post_init__(self) -> None:
        table = {}
        for date, z in dict(self.overrides).items():
            if int(date) != date or date < 0:
                raise InvalidArgumentError(f"override dates must be nonnegative integers, got {date!r}")
            table[int(date)] = check_action(z)
        object.__setattr__(self, "overrides", tuple(sorted(table.items())))

    def forced(self, date: int) -> int | None:
        for d, z in self.overrides:
            if d == date:
                return z
        return None

    def rule(self, player: Player, state: PlayState, env: Environment) -> ActionRule:
        z = self.forced(state.date)
        if z is not None:
            return ActionRule.constant(z)
        return self.base.rule(player, state, env)

    @property
    def stationary_from(self) -> int | None:
        base = self.base.stationary_from
        if base is None:
            return None
        last = max((d + 1 for d, _ in self.overrides), default=0)
        return max(last, base)

    def to_dict(self) -> dict:
        return {str(d): z for d, z in self.overrides}


# ---------------------------------------------------------------- public state


@dataclass(frozen=True)
class BeliefStack:
    """Current interval about one player plus the earlier ones, oldest first.

    Each prior is ``(interval, rule, date)``: a belief that was held at
    ``date`` and the rule the player was presumed to use then.
    """

    current: BeliefInterval = field(default_factory=BeliefInterval.reals)
    priors: tuple[tuple[BeliefInterval, ActionRule, int], ...] = ()


@dataclass(frozen=True)
class OffPathEvent:
    date: int
    observer: Player
    mover: Player
    action: int
    held: BeliefInterval
    resolution: str
    new_belief: BeliefInterval

    def to_dict(self) -> dict:
        return {
            "date": self.date,
            "observer": self.observer.value,
            "mover": self.mover.value,
            "action": self.action,
            "held": [self.held.lo, self.held.hi],
            "resolution": self.resolution,
            "new_belief": [self.new_belief.lo, self.new_belief.hi],
        }


@dataclass(frozen=True)
class PlayState:
    """Everything public at the start of a date."""

    date: int = 0
    history: History = ()
    about_a: BeliefStack = field(default_factory=BeliefStack)
    about_b: BeliefStack = field(default_factory=BeliefStack)

    def stack_about(self, player: Player) -> BeliefStack:
        return self.about_a if player is Player.A else self.about_b

    def belief_about(self, player: Player) -> BeliefInterval:
        """Interval of ``player``'s types held by her opponent."""
        return self.stack_about(player).current

    def belief_held_by(self, player: Player) -> BeliefInterval:
        """Interval of the opponent's types held by ``player``."""
        return self.stack_about(player.other).current

    @property
    def beliefs(self) -> tuple[BeliefInterval, BeliefInterval]:
        return self.about_a.current, self.about_b.current


def _update_stack(
    stack: BeliefStack, rule: ActionRule, z: int, policy: BeliefPolicy, date: int
) -> tuple[BeliefStack, str | None]:
    held = stack.priors + ((stack.current, rule, date),)
    updated = truncate(stack.current, rule, z)
    if updated is not None:
        return BeliefStack(updated, held), None
    if policy is BeliefPolicy.INERTIA:
        return BeliefStack(stack.current, held), "inertia"
    for k in range(len(stack.priors) - 1, -1, -1):
        interval, old_rule, old_date = stack.priors[k]
        updated = truncate(interval, old_rule, z)
        if updated is not None:
            return BeliefStack(updated, stack.priors[: k + 1]), f"reset to date {old_date}"
    # No earlier belief rationalises the move either; keep the current one.
    return BeliefStack(stack.current, held), "reset failed"


def advance(
    state: PlayState,
    actions: ActionPair,
    presumed_rules: tuple[ActionRule, ActionRule],
    policy: BeliefPolicy,
) -> tuple[PlayState, tuple[OffPathEvent, ...]]:
    """Public state at the next date after ``actions``, read through ``presumed_rules``."""
    stacks, events = {}, []
    for player, rule in zip(Player, presumed_rules):
        stack = state.stack_about(player)
        z = actions.of(player)
        new, resolution = _update_stack(stack, rule, z, policy, state.date)
        stacks[player] = new
        if resolution is not None:
            events.append(
                OffPathEvent(state.date, player.other, player, z, stack.current, resolution, new.current)
            )
    nxt = PlayState(state.date + 1, state.history + (actions,), stacks[Player.A], stacks[Player.B])
    return nxt, tuple(events)


@dataclass(frozen=True)
class Profile:
    """Actual and presumed strategies for both players."""

    actual_a: Strategy
    actual_b: Strategy
    presumed_a: Strategy
    presumed_b: Strategy

    @classmethod
    def build(
        cls,
        strat_a: Strategy,
        strat_b: Strategy,
        presumed: tuple[Strategy, Strategy] | None = None,
    ) -> Profile:
        if presumed is None:
            presumed = (strat_a, strat_b)
        return cls(strat_a, strat_b, presumed[0], presumed[1])

    def actual(self, player: Player) -> Strategy:
        return self.actual_a if player is Player.A else self.actual_b

    def presumed(self, player: Player) -> Strategy:
        return self.presumed_a if player is Player.A else self.presumed_b

    def presumed_rules(self, state: PlayState, env: Environment) -> tuple[ActionRule, ActionRule]:
        return (self.presumed_a.rule(Player.A, state, env), self.presumed_b.rule(Player.B, state, env))

    @property
    def stationary_from(self) -> int | None:
        dates = [s.stationary_from for s in (self.actual_a, self.actual_b, self.presumed_a, self.presumed_b)]
        return None if any(d is None for d in dates) else max(dates)


def state_after(
    model: SignalModel,
    history: Sequence[Sequence[int]],
    presumed: tuple[Strategy, Strategy] = (Myopic(), Myopic()),
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> PlayState:
    """Public state reached by replaying ``history`` under the presumed profile."""
    env = Environment(model, q, root_tol)
    profile = Profile.build(*presumed)
    state = PlayState()
    for actions in as_history(history):
        state, _ = advance(state, actions, profile.presumed_rules(state, env), policy)
    return state


# ---------------------------------------------------------------- single play


PLAY_TRACE_COLUMNS = (
    "date", "z_a", "z_b", "S_a.lo", "S_a.hi", "S_b.lo", "S_b.hi", "m_a", "m_b", "agreed",
    "stage_payoff_a", "stage_payoff_b", "off_path_flag",
)


@dataclass(frozen=True)
class PlayRecord:
    date: int
    actions: ActionPair
    S_a: BeliefInterval
    S_b: BeliefInterval
    rule_a: ActionRule
    rule_b: ActionRule
    presumed_a: ActionRule
    presumed_b: ActionRule
    stage_payoff_a: float
    stage_payoff_b: float
    off_path: bool


def _rule_threshold(rule: ActionRule) -> float:
    mu = rule.single_threshold
    return math.nan if mu is None else mu


@dataclass(frozen=True)
class PlayTrace:
    s_a: float
    s_b: float
    delta_a: float
    delta_b: float
    policy: BeliefPolicy
    records: tuple[PlayRecord, ...]
    events: tuple[OffPathEvent, ...]
    clip: float

    @property
    def horizon(self) -> int:
        return len(self.records)

    @property
    def agreement_date(self) -> int | None:
        for rec in self.records:
            if rec.actions.agree:
                return rec.date
        return None

    def actions(self, player: Player) -> list[int]:
        return [rec.actions.of(player) for rec in self.records]

    def stage_payoffs(self, player: Player) -> np.ndarray:
        name = "stage_payoff_a" if player is Player.A else "stage_payoff_b"
        return np.array([getattr(rec, name) for rec in self.records])

    def discounted_total(self, player: Player, from_date: int = 0) -> float:
        delta = self.delta_a if player is Player.A else self.delta_b
        stages = self.stage_payoffs(player)[from_date:]
        return float(np.sum(stages * delta ** np.arange(len(stages))))

    def rows(self) -> list[tuple]:
        out = []
        for rec in self.records:
            out.append(
                (rec.date, rec.actions.z_a, rec.actions.z_b, *rec.S_a.clipped(self.clip),
                 *rec.S_b.clipped(self.clip), _rule_threshold(rec.presumed_a),
                 _rule_threshold(rec.presumed_b), rec.actions.agree, rec.stage_payoff_a,
                 rec.stage_payoff_b, rec.off_path)
            )
        return out

    def to_csv(self, path: str | Path) -> Path:
        return serialize.write_csv(path, PLAY_TRACE_COLUMNS, self.rows())

    def to_dict(self) -> dict:
        return {
            "s_a": self.s_a,
            "s_b": self.s_b,
            "delta_a": self.delta_a,
            "delta_b": self.delta_b,
            "policy": self.policy.value,
            "horizon": self.horizon,
            "agreement_date": self.agreement_date,
            "discounted_total_a": self.discounted_total(Player.A),
            "discounted_total_b": self.discounted_total(Player.B),
            "clip": self.clip,
            "off_path_events": [e.to_dict() for e in self.events],
            "periods": [dict(zip(PLAY_TRACE_COLUMNS, row)) for row in self.rows()],
        }

    def to_json(self, path: str | Path) -> Path:
        return serialize.write_json(path, self.to_dict())


def play(
    model: SignalModel,
    s_a: float,
    s_b: float,
    strat_a: Strategy,
    strat_b: Strategy,
    horizon: int,
    delta_a: float,
    delta_b: float,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    presumed: tuple[Strategy, Strategy] | None = None,
    start: PlayState | None = None,
) -> PlayTrace:
    """Simulate one realisation of ``(s_a, s_b)`` from ``start`` up to ``horizon``.

    ``presumed`` is the profile each player uses to interpret the other's
    moves; it defaults to the actual one.
    """
    if not (math.isfinite(s_a) and math.isfinite(s_b)):
        raise InvalidArgumentError("signals must be finite")
    horizon = check_horizon(horizon)
    delta_a, delta_b = check_discount(delta_a, "delta_a"), check_discount(delta_b, "delta_b")
    env = Environment(model, q, root_tol)
    profile = Profile.build(strat_a, strat_b, presumed)
    state = PlayState() if start is None else start
    e = posterior_mean(model, s_a, s_b)
    records, events = [], []
    while state.date < horizon:
        rule_a = strat_a.rule(Player.A, state, env)
        rule_b = strat_b.rule(Player.B, state, env)
        actions = ActionPair(rule_a.action(s_a), rule_b.action(s_b))
        presumed_rules = profile.presumed_rules(state, env)
        nxt, new_events = advance(state, actions, presumed_rules, policy)
        records.append(
            PlayRecord(state.date, actions, *state.beliefs, rule_a, rule_b, *presumed_rules,
                       actions.z_a * e, actions.z_b * e, bool(new_events))
        )
        events.extend(new_events)
        state = nxt
    return PlayTrace(float(s_a), float(s_b), delta_a, delta_b, policy, tuple(records), tuple(events),
                     trace_clip(model))


# ---------------------------------------------------------------- expected payoffs


def payoff_stream(
    model: SignalModel,
    player: Player,
    s_own: float,
    own_strategy: Strategy,
    opp_strategy: Strategy,
    S_opp_prior: BeliefInterval,
    horizon: int,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    presumed: tuple[Strategy, Strategy] | None = None,
    start: PlayState | None = None,
) -> np.ndarray:
    """Expected stage payoffs of ``player`` at dates ``start.date .. horizon - 1``.

    The expectation is over the opponent's type restricted to ``S_opp_prior``.
    The opponent's rule cuts that interval into pieces on which the whole
    action path is constant; each piece contributes its probability times the
    interval expectation, so the integral is exact up to quadrature error.
    """
    if not math.isfinite(s_own):
        raise InvalidArgumentError("s_own must be finite")
    horizon = check_horizon(horizon)
    start = PlayState() if start is None else start
    if player is Player.A:
        profile = Profile.build(own_strategy, opp_strategy, presumed)
    else:
        profile = Profile.build(opp_strategy, own_strategy, presumed)
    stream = _payoff_stream(model, player, float(s_own), profile, S_opp_prior, horizon, policy, q,
                            float(root_tol), start)
    return np.array(stream)


@lru_cache(maxsize=1 << 14)
def _payoff_stream(
    model: SignalModel,
    player: Player,
    s_own: float,
    profile: Profile,
    S_prior: BeliefInterval,
    horizon: int,
    policy: BeliefPolicy,
    q: QuadratureSettings,
    root_tol: float,
    start: PlayState,
) -> tuple[float, ...]:
    env = Environment(model, q, root_tol)
    t0 = start.date
    stream = np.zeros(max(horizon - t0, 0))
    prior_mass = type_probability(model, player, s_own, S_prior)
    if prior_mass <= 0.0:
        if S_prior.is_degenerate:
            return tuple(_point_stream(model, player, s_own, profile, S_prior.lo, horizon, policy, env, start))
        raise InvalidArgumentError(f"opponent interval {S_prior} has no mass given s_own={s_own}")
    stationary = profile.stationary_from
    opp = player.other
    nodes = [(start, S_prior)]
    while nodes:
        state, interval = nodes.pop()
        t = state.date
        if t >= horizon:
            continue
        z_own = profile.actual(player).rule(player, state, env).action(s_own)
        pieces = profile.actual(opp).rule(opp, state, env).split(interval)
        presumed_rules = profile.presumed_rules(state, env)
        for piece, z_opp in pieces:
            mass = type_probability(model, player, s_own, piece)
            if mass <= 0.0:
                continue
            value = z_own * (mass / prior_mass) * truncated_expectation(model, player, s_own, piece, q)
            stream[t - t0] += value
            actions = ActionPair(z_own, z_opp) if player is Player.A else ActionPair(z_opp, z_own)
            nxt, events = advance(state, actions, presumed_rules, policy)
            if (
                len(pieces) == 1
                and not events
                and stationary is not None
                and stationary <= t
                and nxt.beliefs == state.beliefs
            ):
                # Fixed point: the same node repeats at every later date.
                stream[t + 1 - t0 :] += value
                continue
            nodes.append((nxt, piece))
    return tuple(stream.tolist())


def _point_stream(model, player, s_own, profile, s_opp, horizon, policy, env, start) -> np.ndarray:
    s_a, s_b = (s_own, s_opp) if player is Player.A else (s_opp, s_own)
    trace = play(model, s_a, s_b, profile.actual_a, profile.actual_b, horizon, 0.5, 0.5, policy,
                 env.q, env.root_tol, (profile.presumed_a, profile.presumed_b), start)
    return trace.stage_payoffs(player)


def discount_stream(stream: np.ndarray, delta: float) -> float:
    """``sum_k delta^k stream[k]`` with a fixed summation order."""
    delta = check_discount(delta)
    return float(math.fsum(v * delta**k for k, v in enumerate(stream)))


def expected_value(
    model: SignalModel,
    player: Player,
    s_own: float,
    own_strategy: Strategy,
    opp_strategy: Strategy,
    S_opp_prior: BeliefInterval,
    horizon: int,
    delta: float,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    presumed: tuple[Strategy, Strategy] | None = None,
    start: PlayState | None = None,
) -> float:
    """Expected discounted payoff from ``start.date`` on, discounted to that date."""
    delta = check_discount(delta)
    stream = payoff_stream(model, player, s_own, own_strategy, opp_strategy, S_opp_prior, horizon,
                           policy, q, root_tol, presumed, start)
    return discount_stream(stream, delta)


@dataclass(frozen=True)
class DeviationContext:
    """Date-``t`` public state plus the deviator's belief about the opponent."""

    state: PlayState
    S_opp: BeliefInterval

    @classmethod
    def at(cls, state: PlayState, player: Player) -> DeviationContext:
        return cls(state, state.belief_held_by(player))

    @classmethod
    def from_history(
        cls,
        model: SignalModel,
        player: Player,
        history: Sequence[Sequence[int]],
        presumed: tuple[Strategy, Strategy] = (Myopic(), Myopic()),
        policy: BeliefPolicy = BeliefPolicy.INERTIA,
        q: QuadratureSettings = DEFAULT_QUADRATURE,
        root_tol: float = DEFAULT_ROOT_TOL,
    ) -> DeviationContext:
        return cls.at(state_after(model, history, presumed, policy, q, root_tol), player)


def deviation_gap(
    model: SignalModel,
    player: Player,
    s_own: float,
    deviation: Strategy,
    baseline: Strategy,
    opp_presumed: Strategy,
    context: DeviationContext,
    delta: float,
    horizon: int,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> float:
    """Value of ``deviation`` minus value of ``baseline`` from the context date.

    The opponent plays ``opp_presumed`` and is believed to; the deviator is
    believed to play ``baseline`` whatever she actually does.
    """
    if deviation == baseline:
        return 0.0
    presumed = (baseline, opp_presumed) if player is Player.A else (opp_presumed, baseline)
    args = (opp_presumed, context.S_opp, horizon, delta, policy, q, root_tol, presumed, context.state)
    dev = expected_value(model, player, s_own, deviation, *args)
    base = expected_value(model, player, s_own, baseline, *args)
    return dev - base


# ---------------------------------------------------------------- many plays


@dataclass(frozen=True)
class ManyPlayResult:
    """Per-point summary of play over arrays of type pairs."""

    final_a: np.ndarray
    final_b: np.ndarray
    agreement_date: np.ndarray
    discounted_actions_a: np.ndarray
    discounted_actions_b: np.ndarray
    off_path_count: np.ndarray
    agreement_threshold_a: np.ndarray = field(repr=False)
    agreement_threshold_b: np.ndarray = field(repr=False)


def play_many(
    model: SignalModel,
    s_a: np.ndarray,
    s_b: np.ndarray,
    strat_a: Strategy,
    strat_b: Strategy,
    horizon: int,
    delta_a: float = 0.5,
    delta_b: float = 0.5,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    presumed: tuple[Strategy, Strategy] | None = None,
    start: PlayState | None = None,
) -> ManyPlayResult:
    """Vectorised :func:`play` over many type pairs.

    Points sharing a public history share thresholds, so they are processed
    as one group.  ``discounted_actions_i`` is ``sum_t delta_i^(t - t0) z_i(t)``;
    multiplied by the posterior mean it gives the realised discounted payoff.
    ``agreement_threshold_i`` is the presumed threshold of ``i`` at the first
    agreement date (NaN without agreement or without a single threshold).
    """
    s_a = np.asarray(s_a, dtype=float).ravel()
    s_b = np.asarray(s_b, dtype=float).ravel()
    if s_a.shape != s_b.shape:
        raise InvalidArgumentError("s_a and s_b must have the same length")
    if not (np.all(np.isfinite(s_a)) and np.all(np.isfinite(s_b))):
        raise InvalidArgumentError("signals must be finite")
    horizon = check_horizon(horizon)
    delta_a, delta_b = check_discount(delta_a, "delta_a"), check_discount(delta_b, "delta_b")
    env = Environment(model, q, root_tol)
    profile = Profile.build(strat_a, strat_b, presumed)
    stationary = profile.stationary_from
    start = PlayState() if start is None else start
    t0 = start.date
    n = s_a.size
    final_a = np.zeros(n, dtype=np.int8)
    final_b = np.zeros(n, dtype=np.int8)
    agreement = np.full(n, -1, dtype=np.int64)
    disc_a = np.zeros(n)
    disc_b = np.zeros(n)
    off_path = np.zeros(n, dtype=np.int64)
    thr_a = np.full(n, math.nan)
    thr_b = np.full(n, math.nan)

    def tail(delta: float, t: int) -> float:
        # sum_{tau = t}^{horizon - 1} delta^(tau - t0)
        return delta ** (t - t0) * (1.0 - delta ** (horizon - t)) / (1.0 - delta)

    groups = [(start, np.arange(n))] if n else []
    while groups:
        state, idx = groups.pop()
        t = state.date
        rule_a = strat_a.rule(Player.A, state, env)
        rule_b = strat_b.rule(Player.B, state, env)
        z_a = _vector_action(rule_a, s_a[idx])
        z_b = _vector_action(rule_b, s_b[idx])
        presumed_rules = profile.presumed_rules(state, env)
        combos = [(za, zb) for za in (-1, 1) for zb in (-1, 1)]
        masks = [(z_a == za) & (z_b == zb) for za, zb in combos]
        present = [(c, m) for c, m in zip(combos, masks) if m.any()]
        for (za, zb), mask in present:
            sub = idx[mask]
            actions = ActionPair(za, zb)
            if za == zb:
                fresh = sub[agreement[sub] < 0]
                agreement[fresh] = t
                thr_a[fresh] = _rule_threshold(presumed_rules[0])
                thr_b[fresh] = _rule_threshold(presumed_rules[1])
            nxt, events = advance(state, actions, presumed_rules, policy)
            if events:
                off_path[sub] += 1
            fixed = (
                len(present) == 1
                and not events
                and stationary is not None
                and stationary <= t
                and nxt.beliefs == state.beliefs
            )
            if fixed:
                disc_a[sub] += za * tail(delta_a, t)
                disc_b[sub] += zb * tail(delta_b, t)
            else:
                disc_a[sub] += za * delta_a ** (t - t0)
                disc_b[sub] += zb * delta_b ** (t - t0)
            if fixed or t + 1 >= horizon:
                final_a[sub] = za
                final_b[sub] = zb
            else:
                groups.append((nxt, sub))
    return ManyPlayResult(final_a, final_b, agreement, disc_a, disc_b, off_path, thr_a, thr_b)


def _vector_action(rule: ActionRule, s: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(np.asarray(rule.cuts, dtype=float), s, side="right")
    return np.asarray(rule.actions, dtype=np.int8)[pos]


def monte_carlo_expected_value(
    model: SignalModel,
    player: Player,
    s_own: float,
    own_strategy: Strategy,
    opp_strategy: Strategy,
    S_opp_prior: BeliefInterval,
    horizon: int,
    delta: float,
    rng: np.random.Generator,
    draws: int,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    presumed: tuple[Strategy, Strategy] | None = None,
    start: PlayState | None = None,
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
) -> tuple[float, float]:
    """Sample-mean estimate of :func:`expected_value` and its standard error.

    ``sampler`` must draw opponent types from the conditional law restricted
    to ``S_opp_prior``; the default handles Gaussian models by rejection.
    """
    if sampler is None:
        sampler = _gaussian_sampler(model, player, s_own, S_opp_prior)
    s_opp = sampler(rng, int(draws))
    s_mine = np.full_like(s_opp, float(s_own))
    s_a, s_b = (s_mine, s_opp) if player is Player.A else (s_opp, s_mine)
    d_a, d_b = (delta, 0.5) if player is Player.A else (0.5, delta)
    if player is Player.A:
        res = play_many(model, s_a, s_b, own_strategy, opp_strategy, horizon, d_a, d_b, policy, q,
                        root_tol, presumed, start)
        disc = res.discounted_actions_a
    else:
        res = play_many(model, s_a, s_b, opp_strategy, own_strategy, horizon, d_a, d_b, policy, q,
                        root_tol, presumed, start)
        disc = res.discounted_actions_b
    e = model.posterior_mean(s_a, s_b)
    values = disc * e
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def _gaussian_sampler(model, player, s_own, interval):
    mean, sd = model.conditional_moments(player, s_own)

    def draw(rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.empty(0)
        while out.size < count:
            batch = rng.normal(mean, sd, size=2 * (count - out.size) + 16)
            batch = batch[(batch >= interval.lo) & (batch <= interval.hi)]
            out = np.concatenate([out, batch])
        return out[:count]

    return draw
