"""Prior and signal distributions, and the posterior expectations built on them.

The state ``x`` has a prior symmetric about zero and each player ``i``
receives one private signal ``s_i`` drawn from ``g_i(s | x)``.  Everything a
player needs to evaluate her stage payoff is the posterior mean of ``x``,
either given both signals or given her own signal plus the knowledge that the
opponent's signal lies in an interval.

Only the Gaussian family ships, but the interval expectations are written
against the small :class:`SignalModel` interface and integrate numerically.
"""

from __future__ import annotations

import abc
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

from .errors import DegenerateSupportError, InvalidArgumentError
from .intervals import BeliefInterval

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class Player(enum.Enum):
    A = "a"
    B = "b"

    @property
    def other(self) -> Player:
        return Player.B if self is Player.A else Player.A

    def __str__(self) -> str:
        return self.value


def opponent(player: Player) -> Player:
    return player.other


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for adaptive integration over belief intervals.

    ``tail_mass_cutoff`` is the relative probability mass that may be dropped
    when an unbounded interval is cut down to a finite integration window.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    tail_mass_cutoff: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("abs_tol", "rel_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise InvalidArgumentError(f"{name} must lie in (0, 1), got {value!r}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise InvalidArgumentError("max_subdivisions must be a positive integer")
        if not (0.0 < self.tail_mass_cutoff <= 1e-10):
            raise InvalidArgumentError("tail_mass_cutoff must lie in (0, 1e-10]")

    @property
    def window_halfwidth_sd(self) -> float:
        # Gaussian tail beyond a + z*sd, relative to the mass beyond a >= mean,
        # is at most exp(-z^2 / 2).
        return math.sqrt(2.0 * math.log(1.0 / self.tail_mass_cutoff))


DEFAULT_QUADRATURE = QuadratureSettings()


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


class SignalModel(abc.ABC):
    """Family interface: prior, per-player signal law, and derived posteriors."""

    @abc.abstractmethod
    def prior_pdf(self, x: float) -> float: ...

    @abc.abstractmethod
    def signal_pdf(self, player: Player, s: float, x: float) -> float: ...

    @abc.abstractmethod
    def posterior_mean(self, s_a: float, s_b: float) -> float:
        """E[x | s_a, s_b]."""

    @abc.abstractmethod
    def conditional_logpdf(self, observer: Player, s_own: float, t: float) -> float:
        """log density of the opponent's signal at ``t`` given ``s_own``."""

    @abc.abstractmethod
    def interval_probability(self, observer: Player, s_own: float, lo: float, hi: float) -> float:
        """Pr(opponent signal in [lo, hi] | s_own)."""

    @abc.abstractmethod
    def integration_window(
        self, observer: Player, s_own: float, lo: float, hi: float, halfwidth_sd: float
    ) -> tuple[float, float, float]:
        """Finite ``(lo, hi, peak)`` carrying all but a negligible share of the mass."""

    @abc.abstractmethod
    def is_symmetric(self, tol: float = 0.0) -> bool: ...

    @abc.abstractmethod
    def signal_sd(self, player: Player) -> float:
        """Unconditional standard deviation of ``player``'s signal."""

    @property
    @abc.abstractmethod
    def scale(self) -> float:
        """A length scale for brackets and clipping."""

    def pair_mean(self, observer: Player, s_own: float, s_other: float) -> float:
        if observer is Player.A:
            return self.posterior_mean(s_own, s_other)
        return self.posterior_mean(s_other, s_own)

    def marginal_mean(self, observer: Player, s_own: float) -> float:
        return truncated_expectation(self, observer, s_own, BeliefInterval.reals())


@dataclass(frozen=True)
class GaussianModel(SignalModel):
    """``x ~ N(0, sigma0^2)`` and ``s_i = x + eps_i`` with ``eps_i ~ N(0, sigma_i^2)``."""

    sigma0: float = 1.0
    sigma_a: float = 1.0
    sigma_b: float = 1.0

    def __post_init__(self) -> None:
        for name in ("sigma0", "sigma_a", "sigma_b"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def _det(self) -> float:
        v0, va, vb = self.sigma0**2, self.sigma_a**2, self.sigma_b**2
        return va * vb + v0 * (va + vb)

    def noise_sd(self, player: Player) -> float:
        return self.sigma_a if player is Player.A else self.sigma_b

    def signal_sd(self, player: Player) -> float:
        return math.hypot(self.sigma0, self.noise_sd(player))

    @property
    def scale(self) -> float:
        return math.sqrt(self.sigma0**2 + self.sigma_a**2 + self.sigma_b**2)

    def prior_pdf(self, x: float) -> float:
        return _normal_pdf(x, 0.0, self.sigma0)

    def signal_pdf(self, player: Player, s: float, x: float) -> float:
        return _normal_pdf(s, x, self.noise_sd(player))

    def pair_weights(self, observer: Player) -> tuple[float, float]:
        """``(w_own, w_other)`` with ``e = w_own * s_own + w_other * s_other``."""
        v0 = self.sigma0**2
        v_own, v_other = self.noise_sd(observer) ** 2, self.noise_sd(observer.other) ** 2
        d = self._det
        return v0 * v_other / d, v0 * v_own / d

    def posterior_mean(self, s_a: float, s_b: float) -> float:
        v0, va, vb = self.sigma0**2, self.sigma_a**2, self.sigma_b**2
        return v0 * (s_a * vb + s_b * va) / self._det

    def posterior_sd(self) -> float:
        return (1.0 / self.sigma0**2 + 1.0 / self.sigma_a**2 + 1.0 / self.sigma_b**2) ** -0.5

    def conditional_moments(self, observer: Player, s_own: float) -> tuple[float, float]:
        """Mean and sd of the opponent's signal given ``s_own``."""
        v0, v_own = self.sigma0**2, self.noise_sd(observer) ** 2
        return s_own * v0 / (v0 + v_own), math.sqrt(self._det / (v0 + v_own))

    def conditional_logpdf(self, observer: Player, s_own: float, t: float) -> float:
        mean, sd = self.conditional_moments(observer, s_own)
        z = (t - mean) / sd
        return -0.5 * z * z - math.log(sd) - _LOG_SQRT_2PI

    def interval_probability(self, observer: Player, s_own: float, lo: float, hi: float) -> float:
        mean, sd = self.conditional_moments(observer, s_own)
        return _normal_interval_mass((lo - mean) / sd, (hi - mean) / sd)

    def integration_window(
        self, observer: Player, s_own: float, lo: float, hi: float, halfwidth_sd: float
    ) -> tuple[float, float, float]:
        mean, sd = self.conditional_moments(observer, s_own)
        peak = min(max(mean, lo), hi)
        win_lo = lo if math.isfinite(lo) else min(peak, mean) - halfwidth_sd * sd
        win_hi = hi if math.isfinite(hi) else max(peak, mean) + halfwidth_sd * sd
        return win_lo, win_hi, peak

    def marginal_mean(self, observer: Player, s_own: float) -> float:
        v0, v_own = self.sigma0**2, self.noise_sd(observer) ** 2
        return s_own * v0 / (v0 + v_own)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        # The zero-mean normal prior and the location family are reflection
        # invariant; only the two noise levels can break symmetry.
        return abs(self.sigma_a - self.sigma_b) <= tol

    def mirrored(self) -> GaussianModel:
        """The same model with the player labels swapped."""
        return GaussianModel(self.sigma0, self.sigma_b, self.sigma_a)


def _normal_pdf(x: float, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return math.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def _normal_interval_mass(z_lo: float, z_hi: float) -> float:
    # Differences of erfc on the tail side keep far-tail intervals accurate.
    r2 = math.sqrt(2.0)
    if z_lo >= 0.0:
        return 0.5 * (math.erfc(z_lo / r2) - math.erfc(z_hi / r2))
    if z_hi <= 0.0:
        return 0.5 * (math.erfc(-z_hi / r2) - math.erfc(-z_lo / r2))
    return 1.0 - 0.5 * math.erfc(-z_lo / r2) - 0.5 * math.erfc(z_hi / r2)


def posterior_mean(model: SignalModel, s_a: float, s_b: float) -> float:
    """Posterior mean of the state given both signals."""
    _check_finite(s_a=s_a, s_b=s_b)
    return model.posterior_mean(s_a, s_b)


def conditional_type_density(model: SignalModel, observer: Player, s_own: float, s_other: float) -> float:
    """Density of the opponent's signal at ``s_other`` as seen by ``observer``."""
    _check_finite(s_own=s_own, s_other=s_other)
    return math.exp(model.conditional_logpdf(observer, s_own, s_other))


def type_probability(model: SignalModel, observer: Player, s_own: float, S_other: BeliefInterval) -> float:
    """Pr(opponent signal in ``S_other`` | own signal)."""
    _check_finite(s_own=s_own)
    if S_other.is_degenerate:
        return 0.0
    p = model.interval_probability(observer, s_own, S_other.lo, S_other.hi)
    return min(1.0, max(0.0, p))


def marginal_expectation(model: SignalModel, observer: Player, s_own: float) -> float:
    """E[x | s_own] with nothing known about the opponent."""
    _check_finite(s_own=s_own)
    return model.marginal_mean(observer, s_own)


def truncated_expectation(
    model: SignalModel,
    observer: Player,
    s_own: float,
    S_other: BeliefInterval,
    q: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """E[x | s_own, s_other in S_other], by adaptive quadrature.

    The opponent's conditional density is rescaled by its largest value on the
    interval, so intervals deep in the tails (tiny absolute mass) still give an
    accurate ratio.  Singleton intervals evaluate the two-signal mean directly.
    """
    _check_finite(s_own=s_own)
    return _truncated_expectation(model, observer, float(s_own), S_other.lo, S_other.hi, q)


@lru_cache(maxsize=1 << 18)
def _truncated_expectation(
    model: SignalModel, observer: Player, s_own: float, lo: float, hi: float, q: QuadratureSettings
) -> float:
    if lo == hi:
        return model.pair_mean(observer, s_own, lo)
    a, b, peak = model.integration_window(observer, s_own, lo, hi, q.window_halfwidth_sd)
    ref = model.conditional_logpdf(observer, s_own, peak)

    def weight(t: float) -> float:
        return math.exp(model.conditional_logpdf(observer, s_own, t) - ref)

    def weighted_mean(t: float) -> float:
        return model.pair_mean(observer, s_own, t) * weight(t)

    points = [peak] if a < peak < b else None
    opts = dict(epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions, points=points)
    den, _ = integrate.quad(weight, a, b, **opts)
    if not (den > 0.0 and math.isfinite(den)):
        raise DegenerateSupportError(
            f"no usable conditional mass on [{lo}, {hi}] for s_own={s_own}"
        )
    num, _ = integrate.quad(weighted_mean, a, b, **opts)
    return num / den


def is_symmetric(model: SignalModel, tol: float = 0.0) -> bool:
    """Whether positive and negative states are stochastically identical."""
    return model.is_symmetric(tol)
