"""Numerical checks of the equilibrium and aggregation claims.

* symmetric models: sweep deviation classes against myopic play and confirm
  none is profitable;
* asymmetric models: build the interleaved threshold recursion, the analytic
  lower bound on the gain of a date-1 deviation, and the simulated gain;
* non-myopic threshold profiles: profitable deviations of threshold types,
  the two-threshold dominance bound, and aggregation failure on grids.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .belief_engine import DEFAULT_ROOT_TOL, ActionPair, myopic_threshold
from .errors import InvalidArgumentError, NonTerminationError, NotAsymmetricError, PreconditionError
from .intervals import BeliefInterval
from .play_engine import (
    BeliefPolicy,
    DeviationContext,
    DeviationScript,
    Environment,
    Myopic,
    PlayState,
    Strategy,
    ThresholdMap,
    advance,
    Profile,
    check_discount,
    check_horizon,
    deviation_gap,
    discount_stream,
    payoff_stream,
    play_many,
    state_after,
)
from .signal_model import (
    DEFAULT_QUADRATURE,
    GaussianModel,
    Player,
    QuadratureSettings,
    SignalModel,
    marginal_expectation,
    truncated_expectation,
    type_probability,
)

NONNEG = BeliefInterval(0.0, math.inf)
NONPOS = BeliefInterval(-math.inf, 0.0)


@dataclass(frozen=True)
class DeviationReport:
    player: Player
    s: float
    script: dict[int, int]
    gap: float
    lower_bound: float | None = None
    components: dict = field(default_factory=dict)
    context: tuple[ActionPair, ...] = ()
    policy: BeliefPolicy | None = None

    @property
    def profitable(self) -> bool:
        return self.gap > 0.0

    def to_dict(self) -> dict:
        return {
            "player": self.player.value,
            "s": self.s,
            "context": [[m.z_a, m.z_b] for m in self.context],
            "script": {str(d): z for d, z in sorted(self.script.items())},
            "policy": None if self.policy is None else self.policy.value,
            "gap": self.gap,
            "lower_bound": self.lower_bound,
            "components": self.components,
        }


# ---------------------------------------------------------------- symmetric sweep


def default_type_grid(model: SignalModel, player: Player, points: int = 41, width_sd: float = 3.0) -> np.ndarray:
    sd = model.signal_sd(player)
    return np.linspace(-width_sd * sd, width_sd * sd, points)


def myopic_contexts(
    model: SignalModel,
    player: Player,
    s_own: float,
    depth: int,
    horizon: int,
    policy: BeliefPolicy,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> list[PlayState]:
    """On-path states for type ``s_own`` under myopic play, up to date ``depth``.

    These are the all-disagreement histories and the histories whose last
    move is the first agreement.  Later dates add nothing new: after an
    agreement the path is frozen.
    """
    env = Environment(model, q, root_tol)
    profile = Profile.build(Myopic(), Myopic())
    opp = player.other
    contexts = []
    state = PlayState()
    while state.date <= depth and state.date < horizon:
        contexts.append(state)
        z_own = profile.actual(player).rule(player, state, env).action(s_own)
        pieces = dict((z, p) for p, z in profile.actual(opp).rule(opp, state, env).split(state.belief_held_by(player)))
        rules = profile.presumed_rules(state, env)
        nxt_disagree = None
        for z_opp in (z_own, -z_own):
            piece = pieces.get(z_opp)
            if piece is None or type_probability(model, player, s_own, piece) <= 0.0:
                continue
            actions = ActionPair(z_own, z_opp) if player is Player.A else ActionPair(z_opp, z_own)
            nxt, _ = advance(state, actions, rules, policy)
            if z_opp == z_own:
                if nxt.date < horizon and nxt.date <= depth:
                    contexts.append(nxt)
            else:
                nxt_disagree = nxt
        if nxt_disagree is None:
            break
        state = nxt_disagree
    return contexts


def default_deviations(date: int, z_star: int, horizon: int) -> list[dict[int, int]]:
    """One-period flip, flip held for two periods, and flip-then-return."""
    scripts = [{date: -z_star}]
    if date + 1 < horizon:
        scripts.append({date: -z_star, date + 1: -z_star})
        scripts.append({date: -z_star, date + 1: z_star})
    return scripts


def check_type(
    model: SignalModel,
    player: Player,
    s_own: float,
    delta: float,
    horizon: int,
    policy: BeliefPolicy,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    context_depth: int = 10,
    indifference_band: float = 1e-3,
) -> list[DeviationReport]:
    """All default deviations of one type at all of its myopic contexts."""
    env = Environment(model, q, root_tol)
    reports = []
    for state in myopic_contexts(model, player, s_own, context_depth, horizon, policy, q, root_tol):
        threshold = env.myopic_threshold(player, state.belief_held_by(player))
        if abs(s_own - threshold) < indifference_band:
            continue
        z_star = 1 if s_own >= threshold else -1
        context = DeviationContext.at(state, player)
        for script in default_deviations(state.date, z_star, horizon):
            gap = deviation_gap(model, player, s_own, DeviationScript(Myopic(), script), Myopic(), Myopic(),
                                context, delta, horizon, policy, q, root_tol)
            reports.append(
                DeviationReport(player, float(s_own), dict(script), gap,
                                components={"date": state.date, "myopic_threshold": threshold},
                                context=state.history, policy=policy)
            )
    return reports


def check_symmetric_equilibrium(
    model: SignalModel,
    delta_a: float,
    delta_b: float,
    horizon: int,
    policy: BeliefPolicy,
    type_grid: Sequence[float] | None = None,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    context_depth: int = 10,
    indifference_band: float = 1e-3,
    symmetry_tol: float = 0.0,
    map_fn=map,
) -> list[DeviationReport]:
    """Deviation gaps of every grid type of both players against myopic play.

    ``map_fn`` lets a caller fan the per-type work out to a pool; results are
    collected in grid order either way.
    """
    if not model.is_symmetric(symmetry_tol):
        raise PreconditionError("the no-deviation sweep requires a symmetric model")
    horizon = check_horizon(horizon)
    deltas = {Player.A: check_discount(delta_a, "delta_a"), Player.B: check_discount(delta_b, "delta_b")}
    tasks = []
    for player in Player:
        grid = default_type_grid(model, player) if type_grid is None else np.asarray(type_grid, dtype=float)
        for s in grid:
            tasks.append((model, player, float(s), deltas[player], horizon, policy, q, root_tol,
                          context_depth, indifference_band))
    reports = []
    for chunk in map_fn(_check_type_task, tasks):
        reports.extend(chunk)
    return reports


def _check_type_task(args) -> list[DeviationReport]:
    return check_type(*args)


# ---------------------------------------------------------------- asymmetric construction


@dataclass(frozen=True)
class Theorem2Construction:
    """The interleaved threshold recursion behind the asymmetric deviation.

    Values refer to ``working_model``, in which the deviator is labelled A;
    ``deviator`` names that player in the caller's model.
    """

    m_a: float
    m_b: float
    m_a_prime: float
    m_b_prime: float
    sequence: tuple[tuple[float, float], ...]
    K: int
    q: float
    q_prime: float
    asymmetry: float
    deviator: Player
    working_model: SignalModel

    @property
    def r_K(self) -> float:
        return self.sequence[self.K][0]

    def to_dict(self) -> dict:
        return {
            "deviator": self.deviator.value,
            "mirrored": self.deviator is Player.B,
            "asymmetry": self.asymmetry,
            "m_a": self.m_a,
            "m_b": self.m_b,
            "m_a_prime": self.m_a_prime,
            "m_b_prime": self.m_b_prime,
            "K": self.K,
            "q": self.q,
            "q_prime": self.q_prime,
            "sequence": [[r, s] for r, s in self.sequence],
        }


def truncation_threshold_b(model, m_a, r, q=DEFAULT_QUADRATURE, root_tol=DEFAULT_ROOT_TOL) -> float:
    """b's myopic threshold when a's type is known to lie in ``[m_a, r]``."""
    return myopic_threshold(model, Player.B, BeliefInterval(m_a, r), q, root_tol)


def truncation_threshold_a(model, s, m_b, q=DEFAULT_QUADRATURE, root_tol=DEFAULT_ROOT_TOL) -> float:
    """a's myopic threshold when b's type is known to lie in ``[s, m_b]``."""
    return myopic_threshold(model, Player.A, BeliefInterval(s, m_b), q, root_tol)


def _point_root(model: SignalModel, player: Player, other_signal: float) -> float:
    """Own signal at which the two-signal posterior mean is zero."""
    if isinstance(model, GaussianModel):
        w_own, w_other = model.pair_weights(player)
        return -w_other * other_signal / w_own
    return myopic_threshold(model, player, BeliefInterval.point(other_signal))


def theorem2_construct(
    model: SignalModel,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    max_iterations: int = 10_000,
    asymmetry_tol: float = 1e-10,
) -> Theorem2Construction:
    """Thresholds ``m_a, m_b, m'_a, m'_b``, the ``(r, s)`` recursion and ``K``.

    When ``E(m_a, m_b) < 0`` the construction is run with the player labels
    swapped, which turns it into the other branch.
    """
    m_a = myopic_threshold(model, Player.A, NONNEG, q, root_tol)
    m_b = myopic_threshold(model, Player.B, NONPOS, q, root_tol)
    asymmetry = model.posterior_mean(m_a, m_b)
    if model.is_symmetric(0.0) or abs(asymmetry) <= asymmetry_tol:
        raise NotAsymmetricError(f"E(m_a, m_b) = {asymmetry:.3g}: the model is not asymmetric")
    deviator = Player.A
    working = model
    if asymmetry < 0.0:
        if not isinstance(model, GaussianModel):
            raise PreconditionError("the mirrored branch needs a model with swappable player labels")
        working = model.mirrored()
        deviator = Player.B
        m_a = myopic_threshold(working, Player.A, NONNEG, q, root_tol)
        m_b = myopic_threshold(working, Player.B, NONPOS, q, root_tol)
    m_a_prime = _point_root(working, Player.A, m_b)
    m_b_prime = _point_root(working, Player.B, m_a)
    if not (m_a_prime < m_a and m_b_prime < m_b):
        raise PreconditionError(f"expected m'_a < m_a and m'_b < m_b, got {m_a_prime}, {m_b_prime}")

    def g(r: float) -> float:
        return truncation_threshold_b(working, m_a, r, q, root_tol)

    def h(s: float) -> float:
        return truncation_threshold_a(working, s, m_b, q, root_tol)

    if not h(m_b_prime) < m_a:
        raise PreconditionError("h(m'_b) >= m_a: the recursion cannot escape through r < m_a")
    sequence = [(0.0, 0.0)]
    K = None
    for k in range(1, int(max_iterations) + 1):
        r, s = sequence[-1]
        nxt = (h(s), g(r))
        sequence.append(nxt)
        if not (m_a <= nxt[0] <= 0.0 and 0.0 <= nxt[1] <= m_b_prime):
            K = k
            break
    if K is None:
        raise NonTerminationError(
            f"(r, s) stayed in [m_a, 0] x [0, m'_b] for {max_iterations} steps; last {sequence[-1]}"
        )
    r_K, s_K = sequence[K]
    if not (r_K < m_a and 0.0 <= s_K <= m_b_prime):
        raise PreconditionError(f"recursion left the box at {sequence[K]} instead of through r < m_a")
    for r, _ in sequence[1:K]:
        if r > m_a and not g(r) < m_b_prime:
            raise PreconditionError(f"g({r}) >= m'_b")
    q_val = _conditional_probability(working, m_a, BeliefInterval(m_b, math.inf), NONNEG)
    q_prime = _conditional_probability(working, m_a, BeliefInterval(m_b_prime, m_b), BeliefInterval(0.0, m_b))
    return Theorem2Construction(m_a, m_b, m_a_prime, m_b_prime, tuple(sequence), K, q_val, q_prime,
                                asymmetry, deviator, working)


def _conditional_probability(model, s_a, event: BeliefInterval, given: BeliefInterval) -> float:
    return type_probability(model, Player.A, s_a, event) / type_probability(model, Player.A, s_a, given)


DEVIATION_CONTEXT = ((-1, 1),)


def _event_interval(construction: Theorem2Construction, s_a: float, q, root_tol, policy) -> BeliefInterval:
    """b-types that keep playing +1 on the deviation path up to date K.

    Along that path a plays -1 at dates 2..K; the check is made here and a
    violation is reported rather than silently absorbed.
    """
    model = construction.working_model
    env = Environment(model, q, root_tol)
    state = state_after(model, DEVIATION_CONTEXT + ((1, -1),), policy=policy, q=q, root_tol=root_tol)
    lower = 0.0
    profile = Profile.build(Myopic(), Myopic())
    for _ in range(2, construction.K + 1):
        z_a = Myopic().rule(Player.A, state, env).action(s_a)
        if z_a != -1:
            raise PreconditionError(f"type {s_a} plays +1 at date {state.date} before round K")
        mu_b = env.myopic_threshold(Player.B, state.belief_held_by(Player.B))
        lower = max(lower, mu_b)
        state, _ = advance(state, ActionPair(-1, 1), profile.presumed_rules(state, env), policy)
    return BeliefInterval(min(lower, construction.m_b), construction.m_b)


def deviation_gain_bound(
    model: SignalModel,
    delta: float,
    epsilon: float,
    construction: Theorem2Construction,
    horizon: int | None = None,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
) -> DeviationReport:
    """Analytic lower bound and simulated gain for type ``m_a - epsilon``.

    The deviation is playing +1 at date 1 after ``(-1, +1)`` at date 0, then
    reverting to myopic play.  ``Delta`` is the continuation gain, discounted
    to date ``K + 1``, conditional on the event that b keeps playing +1
    through date ``K``; ``delta_window`` is the same gain conditional on
    ``s_b in [m'_b, m_b]``.
    """
    delta = check_discount(delta)
    if not epsilon > 0.0:
        raise InvalidArgumentError("epsilon must be positive")
    working = construction.working_model
    K = construction.K
    s_a = construction.m_a - epsilon
    floor = max(construction.m_a_prime, construction.r_K)
    if not s_a > floor:
        raise PreconditionError(f"epsilon={epsilon} puts m_a - epsilon below max(m'_a, r^K) = {floor}")
    horizon = K + 5 if horizon is None else check_horizon(horizon)
    if horizon < K + 2:
        raise InvalidArgumentError(f"horizon must reach date K + 1 = {K + 1}")
    context = DeviationContext.from_history(working, Player.A, DEVIATION_CONTEXT, policy=policy, q=q,
                                            root_tol=root_tol)
    script = {1: 1}
    deviation = DeviationScript(Myopic(), script)
    gap = deviation_gap(working, Player.A, s_a, deviation, Myopic(), Myopic(), context, delta, horizon,
                        policy, q, root_tol)
    pi = -2.0 * truncated_expectation(working, Player.A, s_a, NONNEG, q)
    q_val = _conditional_probability(working, s_a, BeliefInterval(construction.m_b, math.inf), NONNEG)
    q_prime = _conditional_probability(
        working, s_a, BeliefInterval(construction.m_b_prime, construction.m_b), BeliefInterval(0.0, construction.m_b)
    )
    event = _event_interval(construction, s_a, q, root_tol, policy)
    window = BeliefInterval(construction.m_b_prime, construction.m_b)

    def continuation_gain(interval: BeliefInterval) -> float:
        args = (Myopic(), interval, horizon, policy, q, root_tol, (Myopic(), Myopic()), context.state)
        dev = payoff_stream(working, Player.A, s_a, deviation, *args)
        base = payoff_stream(working, Player.A, s_a, Myopic(), *args)
        # Index K of the stream is date K + 1.
        return discount_stream((dev - base)[K:], delta)

    gain_event = continuation_gain(event)
    gain_window = continuation_gain(window)
    bound = -pi + delta**K * q_prime * (1.0 - q_val) * gain_event
    components = {
        "epsilon": epsilon,
        "pi": pi,
        "Delta": gain_event,
        "delta_window": gain_window,
        "q": q_val,
        "q_prime": q_prime,
        "K": K,
        "horizon": horizon,
        "event_interval": [event.lo, event.hi],
        "event_probability": _conditional_probability(working, s_a, event, BeliefInterval(0.0, construction.m_b)),
        "deviator": construction.deviator.value,
    }
    return DeviationReport(construction.deviator, s_a, script, gap, bound, components,
                           context=context.state.history, policy=policy)


def epsilon_grid(high: float = 1e-1, low: float = 1e-6, ratio: float = 10.0) -> list[float]:
    if not (0.0 < low <= high and ratio > 1.0):
        raise InvalidArgumentError("epsilon grid needs 0 < low <= high and ratio > 1")
    out, eps = [], float(high)
    while eps >= low * (1.0 - 1e-12):
        out.append(eps)
        eps /= ratio
    return out


def find_profitable_epsilon(
    model: SignalModel,
    delta: float,
    construction: Theorem2Construction,
    horizon: int | None = None,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    epsilons: Iterable[float] | None = None,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
) -> tuple[float, DeviationReport] | None:
    """First epsilon on the grid whose analytic lower bound is positive."""
    floor = max(construction.m_a_prime, construction.r_K)
    for eps in epsilon_grid() if epsilons is None else epsilons:
        if not construction.m_a - eps > floor:
            continue
        report = deviation_gain_bound(model, delta, eps, construction, horizon, q, root_tol, policy)
        if report.lower_bound > 0.0:
            return eps, report
    return None


# ---------------------------------------------------------------- threshold profiles


def date_histories(date: int) -> list[tuple[ActionPair, ...]]:
    hists: list[tuple[ActionPair, ...]] = [()]
    for _ in range(date):
        hists = [h + (ActionPair(za, zb),) for h in hists for za in (-1, 1) for zb in (-1, 1)]
    return hists


def scaled_threshold_profile(
    model: SignalModel,
    factor: float,
    histories: Iterable[Sequence[Sequence[int]]],
    players: Iterable[Player] = (Player.A, Player.B),
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> tuple[Strategy, Strategy]:
    """Myopic play except that listed players scale their threshold at ``histories``.

    The scaled thresholds are computed from the myopic beliefs reached by
    each history, and the resulting profile is also the presumed one.
    """
    env = Environment(model, q, root_tol)
    tables: dict[Player, dict] = {Player.A: {}, Player.B: {}}
    players = tuple(players)
    for h in histories:
        state = state_after(model, h, q=q, root_tol=root_tol)
        for player in players:
            tables[player][state.history] = factor * env.myopic_threshold(player, state.belief_held_by(player))
    out = []
    for player in Player:
        out.append(ThresholdMap(tables[player], fallback=Myopic()) if tables[player] else Myopic())
    return out[0], out[1]


def threshold_type_witness(
    model: SignalModel,
    factor: float,
    delta: float,
    horizon: int,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
    date: int = 1,
    history: Sequence[Sequence[int]] = DEVIATION_CONTEXT,
    eta: float = 1e-6,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
) -> DeviationReport:
    """Gain of a's threshold type from the myopic action in a symmetric scaled profile.

    Every date-``date`` threshold of both players is scaled by ``factor``.
    When the prescribed action at the exact threshold (+1, by the tie rule)
    is already myopic, the type ``mu - eta`` is used instead.
    """
    strat_a, strat_b = scaled_threshold_profile(model, factor, date_histories(date), q=q, root_tol=root_tol)
    env = Environment(model, q, root_tol)
    state = state_after(model, history, presumed=(strat_a, strat_b), q=q, root_tol=root_tol)
    mu = strat_a.rule(Player.A, state, env).single_threshold
    myopic = env.myopic_threshold(Player.A, state.belief_held_by(Player.A))
    s = mu if mu < myopic else mu - eta
    z_myopic = 1 if s >= myopic else -1
    z_prescribed = strat_a.rule(Player.A, state, env).action(s)
    if z_myopic == z_prescribed:
        raise PreconditionError(f"factor {factor} does not make type {s} act non-myopically")
    script = {state.date: z_myopic}
    context = DeviationContext.at(state, Player.A)
    gap = deviation_gap(model, Player.A, s, DeviationScript(strat_a, script), strat_a, strat_b, context, delta,
                        horizon, policy, q, root_tol)
    components = {"factor": factor, "threshold": mu, "myopic_threshold": myopic, "horizon": horizon}
    return DeviationReport(Player.A, s, script, gap, None, components, state.history, policy)


def informational_value_bound(model: SignalModel, player: Player, s: float, delta: float,
                              q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Upper bound on what playing -1 now can buy in later periods.

    Full revelation from the next date on lets the player avoid,
    per period, the negative part of the posterior mean, worth
    ``2 E[max(0, -e) | s]``; summing ``delta^t`` from ``t = 1`` gives the bound.
    """
    cut = _point_root(model, player.other, s)
    low = BeliefInterval(-math.inf, cut)
    mass = type_probability(model, player, s, low)
    if mass <= 0.0:
        return 0.0
    negative_part = -mass * truncated_expectation(model, player, s, low, q)
    return 2.0 * delta / (1.0 - delta) * max(negative_part, 0.0)


def two_threshold_dominance_bound(
    model: SignalModel,
    delta: float,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    grid: Sequence[float] | None = None,
    player: Player = Player.A,
) -> float | None:
    """Smallest grid signal above which +1 at date 0 beats any informational value.

    The one-period gain of +1 over -1 is twice the marginal expectation.
    Returns ``None`` if even the top of the grid fails.
    """
    delta = check_discount(delta)
    grid = np.linspace(0.0, 10.0, 1001) if grid is None else np.asarray(grid, dtype=float)
    ok = [2.0 * marginal_expectation(model, player, float(s)) > informational_value_bound(model, player, float(s), delta, q)
          for s in grid]
    answer = None
    for s, good in zip(grid[::-1], ok[::-1]):
        if not good:
            break
        answer = float(s)
    return answer


# ---------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class AggregationReport:
    grid: dict
    n_sampled: int
    n_excluded: int
    mismatch_fraction: float
    mismatch_region: tuple[tuple[float, float, int], ...]
    points: tuple[tuple, ...] = field(repr=False)

    @property
    def n_mismatch(self) -> int:
        return len(self.mismatch_region)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "n_sampled": self.n_sampled,
            "n_excluded": self.n_excluded,
            "n_mismatch": self.n_mismatch,
            "mismatch_fraction": self.mismatch_fraction,
        }


POINT_COLUMNS = ("s_a", "s_b", "final_a", "final_b", "correct", "agreement_date", "agreement_threshold_b", "wrong")


def aggregation_score(
    model: SignalModel,
    strat_a: Strategy,
    strat_b: Strategy,
    horizon: int,
    grid: tuple[Sequence[float], Sequence[float]],
    q: QuadratureSettings = DEFAULT_QUADRATURE,
    root_tol: float = DEFAULT_ROOT_TOL,
    exclude_band: float = 1e-3,
    presumed: tuple[Strategy, Strategy] | None = None,
    policy: BeliefPolicy = BeliefPolicy.INERTIA,
) -> AggregationReport:
    """Compare final actions with the full-information action on a product grid.

    Pairs with ``|E[x | s_a, s_b]| < exclude_band`` are dropped.  A pair is a
    mismatch if either final action differs from the sign of that mean.
    """
    grid_a = np.asarray(grid[0], dtype=float)
    grid_b = np.asarray(grid[1], dtype=float)
    sa, sb = np.meshgrid(grid_a, grid_b, indexing="ij")
    sa, sb = sa.ravel(), sb.ravel()
    e = model.posterior_mean(sa, sb)
    keep = np.abs(e) >= exclude_band
    sa, sb, e = sa[keep], sb[keep], e[keep]
    res = play_many(model, sa, sb, strat_a, strat_b, horizon, policy=policy, q=q, root_tol=root_tol,
                    presumed=presumed)
    correct = np.where(e > 0.0, 1, -1)
    wrong = (res.final_a != correct) | (res.final_b != correct)
    points = tuple(
        (float(sa[k]), float(sb[k]), int(res.final_a[k]), int(res.final_b[k]), int(correct[k]),
         int(res.agreement_date[k]), float(res.agreement_threshold_b[k]), bool(wrong[k]))
        for k in range(sa.size)
    )
    region = tuple(
        (float(sa[k]), float(sb[k]), int(res.final_a[k] if res.final_a[k] != correct[k] else res.final_b[k]))
        for k in np.flatnonzero(wrong)
    )
    n = int(sa.size)
    grid_info = {
        "s_a": [float(grid_a.min()), float(grid_a.max()), int(grid_a.size)] if grid_a.size else [],
        "s_b": [float(grid_b.min()), float(grid_b.max()), int(grid_b.size)] if grid_b.size else [],
        "exclude_band": exclude_band,
        "horizon": horizon,
    }
    return AggregationReport(grid_info, n, int((~keep).sum()), (len(region) / n) if n else 0.0, region, points)


def predicted_box(m_a_t0: float, m_b_T: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Open product box of types predicted to agree on the wrong action.

    Endpoints are sorted, so the box covers both the +1 and -1 cases.
    """
    box_a = tuple(sorted((m_a_t0, -m_b_T)))
    box_b = tuple(sorted((m_b_T, -m_a_t0)))
    return box_a, box_b  # type: ignore[return-value]


def mismatches_in_predicted_box(report: AggregationReport, m_a_t0: float) -> int:
    """Mismatch points inside the box built from their own agreement threshold."""
    count = 0
    for s_a, s_b, *_rest, agree_date, thr_b, wrong in report.points:
        if not wrong or agree_date < 0 or not math.isfinite(thr_b):
            continue
        (a_lo, a_hi), (b_lo, b_hi) = predicted_box(m_a_t0, thr_b)
        if a_lo < s_a < a_hi and b_lo < s_b < b_hi:
            count += 1
    return count


def symmetric_grid(model: SignalModel, points: int = 200, width_sd: float = 3.0):
    return (default_type_grid(model, Player.A, points, width_sd), default_type_grid(model, Player.B, points, width_sd))
