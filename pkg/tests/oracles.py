"""Independent reference computations used by the tests.

None of these call into the package's quadrature or bisection: posterior
means integrate prior times likelihoods over the state, interval
expectations use the closed-form truncated-normal mean, and thresholds use
brentq on that closed form.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize, stats


def _pdf(x, mean, sd):
    z = (x - mean) / sd
    return math.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))


def posterior_mean_by_state_quadrature(sigma0, sigma_a, sigma_b, s_a, s_b):
    def joint(x):
        return _pdf(x, 0.0, sigma0) * _pdf(s_a, x, sigma_a) * _pdf(s_b, x, sigma_b)

    v = 1.0 / (1.0 / sigma0**2 + 1.0 / sigma_a**2 + 1.0 / sigma_b**2)
    centre = v * (s_a / sigma_a**2 + s_b / sigma_b**2)
    lo, hi = centre - 30 * math.sqrt(v), centre + 30 * math.sqrt(v)
    num = integrate.quad(lambda x: x * joint(x), lo, hi, points=[centre], epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    den = integrate.quad(joint, lo, hi, points=[centre], epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    return num / den


def marginal_mean_by_state_quadrature(sigma0, sigma_own, s):
    def joint(x):
        return _pdf(x, 0.0, sigma0) * _pdf(s, x, sigma_own)

    v = 1.0 / (1.0 / sigma0**2 + 1.0 / sigma_own**2)
    centre = v * s / sigma_own**2
    lo, hi = centre - 30 * math.sqrt(v), centre + 30 * math.sqrt(v)
    num = integrate.quad(lambda x: x * joint(x), lo, hi, points=[centre], epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    den = integrate.quad(joint, lo, hi, points=[centre], epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    return num / den


def _own_other(sigma0, sigma_a, sigma_b, observer):
    return (sigma_a, sigma_b) if observer == "a" else (sigma_b, sigma_a)


def conditional_moments(sigma0, sigma_a, sigma_b, observer, s_own):
    own, other = _own_other(sigma0, sigma_a, sigma_b, observer)
    v0 = sigma0**2
    mean = s_own * v0 / (v0 + own**2)
    var = other**2 + v0 * own**2 / (v0 + own**2)
    return mean, math.sqrt(var)


def truncated_expectation(sigma0, sigma_a, sigma_b, observer, s_own, lo, hi):
    """E[x | s_own, s_other in [lo, hi]] via the truncated-normal mean."""
    own, other = _own_other(sigma0, sigma_a, sigma_b, observer)
    v0 = sigma0**2
    d = own**2 * other**2 + v0 * (own**2 + other**2)
    w_own, w_other = v0 * other**2 / d, v0 * own**2 / d
    if lo == hi:
        return w_own * s_own + w_other * lo
    mean, sd = conditional_moments(sigma0, sigma_a, sigma_b, observer, s_own)
    a, b = (lo - mean) / sd, (hi - mean) / sd
    t_mean = stats.truncnorm.mean(a, b, loc=mean, scale=sd)
    return w_own * s_own + w_other * t_mean


def interval_probability(sigma0, sigma_a, sigma_b, observer, s_own, lo, hi):
    mean, sd = conditional_moments(sigma0, sigma_a, sigma_b, observer, s_own)
    return float(stats.norm.cdf(hi, mean, sd) - stats.norm.cdf(lo, mean, sd))


def threshold(sigma0, sigma_a, sigma_b, observer, lo, hi):
    """Root in s_own of the truncated expectation, by brentq."""
    f = lambda m: truncated_expectation(sigma0, sigma_a, sigma_b, observer, m, lo, hi)
    return optimize.brentq(f, -60.0, 60.0, xtol=1e-14, rtol=1e-14, maxiter=500)


def myopic_history_thresholds(sigma0, sigma_a, sigma_b, moves):
    """Replay myopic belief updates along ``moves``; returns per-date (S_a, S_b, m_a, m_b)."""
    S_a, S_b = (-math.inf, math.inf), (-math.inf, math.inf)
    out = []
    for move in list(moves) + [None]:
        m_a = threshold(sigma0, sigma_a, sigma_b, "a", *S_b)
        m_b = threshold(sigma0, sigma_a, sigma_b, "b", *S_a)
        out.append((S_a, S_b, m_a, m_b))
        if move is None:
            break
        z_a, z_b = move
        S_a = (max(S_a[0], m_a), S_a[1]) if z_a == 1 else (S_a[0], min(S_a[1], m_a))
        S_b = (max(S_b[0], m_b), S_b[1]) if z_b == 1 else (S_b[0], min(S_b[1], m_b))
    return out


def monte_carlo_probability(rng, mean, sd, lo, hi, draws):
    x = rng.normal(mean, sd, size=draws)
    hits = (x >= lo) & (x <= hi)
    return hits.mean(), hits.std(ddof=1) / math.sqrt(draws)


def sample_conditional(rng, sigma0, sigma_a, sigma_b, observer, s_own, lo, hi, draws):
    mean, sd = conditional_moments(sigma0, sigma_a, sigma_b, observer, s_own)
    a, b = (lo - mean) / sd, (hi - mean) / sd
    return stats.truncnorm.rvs(a, b, loc=mean, scale=sd, size=draws, random_state=rng)


def discounted_from_actions(actions, e, delta):
    actions = np.asarray(actions, dtype=float)
    return float(np.sum(actions * delta ** np.arange(len(actions))) * e)


def expected_value_by_breakpoints(sigma0, sigma_a, sigma_b, observer, s_own, path, delta,
                                  lo=-math.inf, hi=math.inf, scan=2001, span_sd=12.0):
    """Expected discounted payoff from a per-type action path ``path(s_opp)``.

    Breakpoints of the piecewise-constant path are located by scanning and
    bisection; each piece is integrated with the truncated-normal mean.
    """
    mean, sd = conditional_moments(sigma0, sigma_a, sigma_b, observer, s_own)
    a, b = max(lo, mean - span_sd * sd), min(hi, mean + span_sd * sd)
    grid = np.linspace(a, b, scan)
    paths = [tuple(path(float(s))) for s in grid]
    cuts = []
    for k in range(scan - 1):
        if paths[k] != paths[k + 1]:
            left, right = grid[k], grid[k + 1]
            p_left = paths[k]
            for _ in range(200):
                mid = 0.5 * (left + right)
                if not left < mid < right:
                    break
                if tuple(path(mid)) == p_left:
                    left = mid
                else:
                    right = mid
            cuts.append(right)
    edges = [lo] + cuts + [hi]
    total_mass = interval_probability(sigma0, sigma_a, sigma_b, observer, s_own, lo, hi)
    value = 0.0
    for p_lo, p_hi in zip(edges, edges[1:]):
        mass = interval_probability(sigma0, sigma_a, sigma_b, observer, s_own, p_lo, p_hi)
        if mass <= 0.0:
            continue
        probe = 0.5 * (max(p_lo, a - 1.0) + min(p_hi, b + 1.0))
        actions = np.asarray(path(probe), dtype=float)
        e = truncated_expectation(sigma0, sigma_a, sigma_b, observer, s_own, p_lo, p_hi)
        value += mass / total_mass * e * float(np.sum(actions * delta ** np.arange(len(actions))))
    return value
