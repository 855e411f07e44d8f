"""Belief-interval bookkeeping under threshold play.

A player who believes her opponent uses a cutoff rule learns, from each
observed action, on which side of the cutoff the opponent's signal lies, so
her belief set stays an interval.  This module computes myopic cutoffs by
root-finding, classifies dominant actions, applies the agreement and
disagreement updates, and iterates fully myopic play.
"""

from __future__ import annotations

import bisect
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

from . import serialize
from .errors import InvalidArgumentError, NoSignChangeError, NonIntervalBeliefError, OffPathError
from .intervals import BeliefInterval
from .signal_model import (
    DEFAULT_QUADRATURE,
    Player,
    QuadratureSettings,
    SignalModel,
    _truncated_expectation,
)

DEFAULT_ROOT_TOL = 1e-9
_MAX_DOUBLINGS = 60


def check_action(z: int) -> int:
    if z not in (-1, 1):
        raise InvalidArgumentError(f"actions are -1 or +1, got {z!r}")
    return int(z)


class ActionPair(NamedTuple):
    z_a: int
    z_b: int

    def of(self, player: Player) -> int:
        return self.z_a if player is Player.A else self.z_b

    @property
    def agree(self) -> bool:
        return self.z_a == self.z_b

    @classmethod
    def build(cls, z_a: int, z_b: int) -> ActionPair:
        return cls(check_action(z_a), check_action(z_b))

    @classmethod
    def from_players(cls, actions: dict[Player, int]) -> ActionPair:
        return cls.build(actions[Player.A], actions[Player.B])


@dataclass(frozen=True)
class ActionRule:
    """Piecewise-constant map from a player's signal to her action.

    ``actions[k]`` is played on ``[cuts[k-1], cuts[k])``; a signal exactly at a
    cut takes the action to its right, so a single cutoff player plays +1 at
    the tie.
    """

    cuts: tuple[float, ...]
    actions: tuple[int, ...]

    def __post_init__(self) -> None:
        cuts = tuple(float(c) for c in self.cuts)
        actions = tuple(check_action(z) for z in self.actions)
        if len(actions) != len(cuts) + 1:
            raise InvalidArgumentError("an action rule needs one more action than cuts")
        if any(not math.isfinite(c) for c in cuts) or any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise InvalidArgumentError(f"cuts must be finite and strictly increasing: {cuts}")
        # Drop cuts that separate equal actions.
        keep_cuts, keep_actions = [], [actions[0]]
        for cut, z in zip(cuts, actions[1:]):
            if z != keep_actions[-1]:
                keep_cuts.append(cut)
                keep_actions.append(z)
        object.__setattr__(self, "cuts", tuple(keep_cuts))
        object.__setattr__(self, "actions", tuple(keep_actions))

    @classmethod
    def threshold(cls, mu: float) -> ActionRule:
        return cls((mu,), (-1, 1))

    @classmethod
    def constant(cls, z: int) -> ActionRule:
        return cls((), (z,))

    @classmethod
    def two_threshold(cls, mu1: float, mu2: float, outer: int) -> ActionRule:
        if not mu1 < mu2:
            raise InvalidArgumentError(f"two-threshold rule needs mu1 < mu2, got {mu1}, {mu2}")
        outer = check_action(outer)
        return cls((mu1, mu2), (outer, -outer, outer))

    @property
    def single_threshold(self) -> float | None:
        """The cutoff when the rule is of the plain ``-1 below / +1 above`` form."""
        if self.actions == (-1, 1):
            return self.cuts[0]
        return None

    def action(self, s: float) -> int:
        return self.actions[bisect.bisect_right(self.cuts, s)]

    def split(self, interval: BeliefInterval) -> list[tuple[BeliefInterval, int]]:
        """Pieces of ``interval`` with positive length, each with its action.

        A singleton interval yields itself with the action taken there.
        """
        if interval.is_degenerate:
            return [(interval, self.action(interval.lo))]
        edges = (-math.inf, *self.cuts, math.inf)
        pieces = []
        for k, z in enumerate(self.actions):
            lo, hi = max(interval.lo, edges[k]), min(interval.hi, edges[k + 1])
            if lo < hi:
                pieces.append((BeliefInterval(lo, hi), z))
        return pieces


def truncate(interval: BeliefInterval, rule: ActionRule, z: int) -> BeliefInterval | None:
    """Belief after seeing action ``z`` from a player presumed to follow ``rule``.

    Returns ``None`` when ``z`` has probability zero (off-path).
    """
    pieces = [piece for piece, action in rule.split(interval) if action == z]
    if not pieces:
        return None
    if len(pieces) > 1:
        raise NonIntervalBeliefError(
            f"action {z} under cuts {rule.cuts} splits {interval} into {len(pieces)} pieces"
        )
    return pieces[0]


def myopic_threshold(
    model: SignalModel,
    player: Player,
    S_other: BeliefInterval,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> float:
    """The signal at which ``player``'s expectation given ``S_other`` is zero.

    Bracketed bisection on the expectation residual; the bracket starts at
    ``+-4 * model.scale`` and doubles up to 60 times.
    """
    if not root_tol > 0.0:
        raise InvalidArgumentError("root_tol must be positive")
    return _myopic_threshold(model, player, S_other.lo, S_other.hi, q, float(root_tol))


@lru_cache(maxsize=1 << 16)
def _myopic_threshold(
    model: SignalModel, player: Player, lo: float, hi: float, q: QuadratureSettings, root_tol: float
) -> float:
    def f(m: float) -> float:
        return _truncated_expectation(model, player, m, lo, hi, q)

    width = 4.0 * model.scale
    for _ in range(_MAX_DOUBLINGS + 1):
        left, right = -width, width
        f_left, f_right = f(left), f(right)
        if f_left <= 0.0 <= f_right:
            break
        width *= 2.0
    else:
        raise NoSignChangeError(
            f"expectation for {player} given [{lo}, {hi}] kept one sign on +-{width / 2:g}"
        )
    if abs(f_left) <= root_tol:
        return left
    if abs(f_right) <= root_tol:
        return right
    best, f_best = (left, f_left) if abs(f_left) < abs(f_right) else (right, f_right)
    while True:
        mid = 0.5 * (left + right)
        if not left < mid < right:
            return best
        f_mid = f(mid)
        if abs(f_mid) < abs(f_best):
            best, f_best = mid, f_mid
        if abs(f_mid) <= root_tol:
            return mid
        if f_mid > 0.0:
            right = mid
        else:
            left = mid


def dominant_action(
    model: SignalModel,
    player: Player,
    s_own: float,
    S_other: BeliefInterval,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> int | None:
    """-1 or +1 when one action is optimal whatever is learnt later, else ``None``."""
    if not math.isfinite(s_own):
        raise InvalidArgumentError("s_own must be finite")
    if math.isfinite(S_other.hi):
        if s_own < myopic_threshold(model, player, BeliefInterval.point(S_other.hi), q, root_tol):
            return -1
    if math.isfinite(S_other.lo):
        if s_own > myopic_threshold(model, player, BeliefInterval.point(S_other.lo), q, root_tol):
            return 1
    return None


@dataclass(frozen=True)
class Configuration:
    """Belief sets and myopic thresholds at one date.

    ``S_a`` is what ``b`` believes about ``a``'s signal and ``m_a`` is the
    threshold ``a`` uses given her own belief ``S_b``; likewise for ``b``.
    """

    S_a: BeliefInterval
    S_b: BeliefInterval
    m_a: float
    m_b: float
    date: int = 0

    def belief_about(self, player: Player) -> BeliefInterval:
        return self.S_a if player is Player.A else self.S_b

    def threshold(self, player: Player) -> float:
        return self.m_a if player is Player.A else self.m_b

    def to_dict(self) -> dict:
        return {
            "date": self.date,
            "S_a": [self.S_a.lo, self.S_a.hi],
            "S_b": [self.S_b.lo, self.S_b.hi],
            "m_a": self.m_a,
            "m_b": self.m_b,
        }


def configuration_for(
    model: SignalModel,
    S_a: BeliefInterval,
    S_b: BeliefInterval,
    date: int = 0,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> Configuration:
    m_a = myopic_threshold(model, Player.A, S_b, q, root_tol)
    m_b = myopic_threshold(model, Player.B, S_a, q, root_tol)
    return Configuration(S_a, S_b, m_a, m_b, date)


def initial_configuration(
    model: SignalModel, q: QuadratureSettings = DEFAULT_QUADRATURE, root_tol: float = DEFAULT_ROOT_TOL
) -> Configuration:
    reals = BeliefInterval.reals()
    return configuration_for(model, reals, reals, 0, q, root_tol)


def update_beliefs(
    config: Configuration,
    actions: ActionPair,
    model: SignalModel,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> Configuration:
    """Next configuration after both players act myopically on ``config``."""
    new = {}
    for player in Player:
        interval = config.belief_about(player)
        rule = ActionRule.threshold(config.threshold(player))
        updated = truncate(interval, rule, check_action(actions.of(player)))
        if updated is None:
            raise OffPathError(
                f"{player} playing {actions.of(player)} is impossible with threshold "
                f"{config.threshold(player)!r} and belief {interval}"
            )
        new[player] = updated
    return configuration_for(model, new[Player.A], new[Player.B], config.date + 1, q, root_tol)


def myopic_actions(config: Configuration, s_a: float, s_b: float) -> ActionPair:
    return ActionPair(
        ActionRule.threshold(config.m_a).action(s_a),
        ActionRule.threshold(config.m_b).action(s_b),
    )


MYOPIC_TRACE_COLUMNS = ("date", "z_a", "z_b", "S_a.lo", "S_a.hi", "S_b.lo", "S_b.hi", "m_a", "m_b", "agreed")


@dataclass(frozen=True)
class MyopicRecord:
    config: Configuration
    actions: ActionPair

    @property
    def date(self) -> int:
        return self.config.date

    @property
    def agreed(self) -> bool:
        return self.actions.agree


@dataclass(frozen=True)
class MyopicTrace:
    s_a: float
    s_b: float
    records: tuple[MyopicRecord, ...]
    clip: float
    agreement_date: int | None = field(default=None)

    @property
    def horizon(self) -> int:
        return len(self.records)

    @property
    def agreed(self) -> bool:
        return self.agreement_date is not None

    def rows(self) -> list[tuple]:
        out = []
        for rec in self.records:
            c = rec.config
            out.append(
                (c.date, rec.actions.z_a, rec.actions.z_b, *c.S_a.clipped(self.clip),
                 *c.S_b.clipped(self.clip), c.m_a, c.m_b, rec.agreed)
            )
        return out

    def to_csv(self, path: str | Path) -> Path:
        return serialize.write_csv(path, MYOPIC_TRACE_COLUMNS, self.rows())

    def to_dict(self) -> dict:
        return {
            "s_a": self.s_a,
            "s_b": self.s_b,
            "horizon": self.horizon,
            "agreement_date": self.agreement_date,
            "clip": self.clip,
            "periods": [dict(zip(MYOPIC_TRACE_COLUMNS, row)) for row in self.rows()],
        }

    def to_json(self, path: str | Path) -> Path:
        return serialize.write_json(path, self.to_dict())


def trace_clip(model: SignalModel) -> float:
    """Finite stand-in for infinite endpoints in trace output."""
    sigmas = [getattr(model, name, None) for name in ("sigma0", "sigma_a", "sigma_b")]
    if all(isinstance(s, float) for s in sigmas):
        return 12.0 * sum(sigmas)
    return 36.0 * model.scale


def evolve_myopic(
    model: SignalModel,
    s_a: float,
    s_b: float,
    horizon: int,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> MyopicTrace:
    """Run fully myopic play for ``horizon`` periods from the common prior."""
    if not (math.isfinite(s_a) and math.isfinite(s_b)):
        raise InvalidArgumentError("signals must be finite")
    if int(horizon) != horizon or horizon < 1:
        raise InvalidArgumentError("horizon must be a positive integer")
    config = initial_configuration(model, q, root_tol)
    records: list[MyopicRecord] = []
    agreement_date = None
    while len(records) < horizon:
        actions = myopic_actions(config, s_a, s_b)
        records.append(MyopicRecord(config, actions))
        if actions.agree and agreement_date is None:
            agreement_date = config.date
        nxt = update_beliefs(config, actions, model, q, root_tol)
        if (nxt.S_a, nxt.S_b) == (config.S_a, config.S_b):
            # Stationary: every later period repeats this one exactly.
            for date in range(len(records), horizon):
                records.append(MyopicRecord(replace(config, date=date), actions))
            break
        config = nxt
    return MyopicTrace(float(s_a), float(s_b), tuple(records), trace_clip(model), agreement_date)


def interval_history(trace: MyopicTrace, player: Player) -> Sequence[BeliefInterval]:
    return [rec.config.belief_about(player) for rec in trace.records]
