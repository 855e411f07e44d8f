"""``obslearn`` command line: simulate, check, aggregate, construct, oracle.

Exit status: 0 when the predicted outcome is observed, 1 when it is
contradicted, 2 when the run is inconclusive (also argparse usage errors),
3 for configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from scipy import integrate

from . import __version__, serialize
from . import equilibrium_lab as lab
from .belief_engine import evolve_myopic
from .config import ExperimentConfig, load_config
from .errors import ConfigError, NotAsymmetricError
from .intervals import BeliefInterval
from .play_engine import BeliefPolicy, Myopic, expected_value, monte_carlo_expected_value, play, state_after
from .signal_model import Player, type_probability

log = logging.getLogger("obslearn")

EXIT_CONSISTENT, EXIT_INCONSISTENT, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2, 3


class Run:
    """Output directory bookkeeping for one subcommand invocation."""

    def __init__(self, subcommand: str, cfg: ExperimentConfig, config_hash: str, out: Path) -> None:
        self.subcommand = subcommand
        self.cfg = cfg
        self.config_hash = config_hash
        self.out = out
        self.files: list[Path] = []
        self.timings: dict[str, float] = {}
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(p)
        return p

    def timed(self, label: str, fn, *args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        self.timings[label] = time.perf_counter() - start
        log.info("%s took %.2f s", label, self.timings[label])
        return result

    def write_manifest(self, exit_code: int) -> Path:
        entries = []
        for p in self.files:
            data = p.read_bytes()
            entries.append({"path": p.name, "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()})
        manifest = {
            "subcommand": self.subcommand,
            "config_sha256": self.config_hash,
            "version": __version__,
            "exit_code": exit_code,
            "files": entries,
            "timings_s": self.timings,
        }
        return serialize.write_json(self.out / f"manifest_{self.subcommand}.json", manifest)


def _workers(arg: int | None) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("OBSLEARN_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"OBSLEARN_WORKERS must be an integer, got {env!r}") from exc
    return 1


# ---------------------------------------------------------------- subcommands


def run_simulate(run: Run, s_a: float, s_b: float) -> int:
    cfg = run.cfg
    model, qs = cfg.gaussian_model, cfg.quadrature_settings
    trace = run.timed("evolve_myopic", evolve_myopic, model, s_a, s_b, cfg.horizon, qs, cfg.root_tol)
    trace.to_csv(run.path("myopic_trace.csv"))
    trace.to_json(run.path("myopic_trace.json"))
    for policy in cfg.belief_policies:
        ptrace = run.timed(f"play_{policy.value}", play, model, s_a, s_b, Myopic(), Myopic(), cfg.horizon,
                           cfg.discount.delta_a, cfg.discount.delta_b, policy, qs, cfg.root_tol)
        ptrace.to_csv(run.path(f"play_trace_{policy.value}.csv"))
        ptrace.to_json(run.path(f"play_trace_{policy.value}.json"))
    print(f"agreement date: {trace.agreement_date}")
    return EXIT_CONSISTENT if trace.agreed else EXIT_INCONCLUSIVE


DEVIATION_COLUMNS = ("policy", "player", "s", "date", "script", "gap")


def run_check(run: Run, workers: int = 1) -> int:
    cfg = run.cfg
    model, qs = cfg.gaussian_model, cfg.quadrature_settings
    if model.is_symmetric(cfg.symmetry_tol):
        return _check_symmetric(run, model, qs, workers)
    return _check_asymmetric(run, model, qs)


def _check_symmetric(run: Run, model, qs, workers: int) -> int:
    cfg = run.cfg
    grid_points = cfg.type_grid
    summary = {"mode": "symmetric", "gap_tol": cfg.gap_tol, "policies": {}}
    rows = []
    worst_overall = -math.inf
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for policy in cfg.belief_policies:
            grid = lab.default_type_grid(model, Player.A, grid_points.points, grid_points.width_sd)
            map_fn = pool.map if pool is not None else map
            reports = run.timed(
                f"sweep_{policy.value}", lab.check_symmetric_equilibrium, model, cfg.discount.delta_a,
                cfg.discount.delta_b, cfg.horizon, policy, grid, qs, cfg.root_tol, cfg.context_depth,
                cfg.indifference_band, cfg.symmetry_tol, map_fn,
            )
            worst = max(reports, key=lambda r: r.gap) if reports else None
            summary["policies"][policy.value] = {
                "n_deviations": len(reports),
                "n_profitable": sum(r.gap > cfg.gap_tol for r in reports),
                "max_gap": worst.gap if worst else None,
                "argmax": worst.to_dict() if worst else None,
            }
            if worst is not None:
                worst_overall = max(worst_overall, worst.gap)
            for r in reports:
                script = ";".join(f"{d}:{z:+d}" for d, z in sorted(r.script.items()))
                rows.append((policy.value, r.player.value, r.s, r.components["date"], script, r.gap))
    finally:
        if pool is not None:
            pool.shutdown()
    consistent = worst_overall <= cfg.gap_tol
    summary["outcome"] = "no profitable deviation" if consistent else "profitable deviation found"
    serialize.write_json(run.path("check_report.json"), summary)
    serialize.write_csv(run.path("deviations.csv"), DEVIATION_COLUMNS, rows)
    print(summary["outcome"], f"(max gap {worst_overall:.3g})")
    return EXIT_CONSISTENT if consistent else EXIT_INCONSISTENT


def _check_asymmetric(run: Run, model, qs) -> int:
    cfg = run.cfg
    delta = cfg.discount.delta_a
    summary: dict = {"mode": "asymmetric", "delta": delta}
    try:
        construction = run.timed("construct", lab.theorem2_construct, model, qs, cfg.root_tol, cfg.max_iterations)
    except NotAsymmetricError as exc:
        summary["outcome"] = f"inconclusive: {exc}"
        serialize.write_json(run.path("check_report.json"), summary)
        print(summary["outcome"])
        return EXIT_INCONCLUSIVE
    if construction.deviator is Player.B:
        delta = cfg.discount.delta_b
        summary["delta"] = delta
    summary["construction"] = construction.to_dict()
    eps = lab.epsilon_grid(cfg.epsilon.high, cfg.epsilon.low, cfg.epsilon.ratio)
    found = run.timed("epsilon_search", lab.find_profitable_epsilon, model, delta, construction,
                      cfg.asymmetric_horizon, qs, cfg.root_tol, eps, cfg.belief_policies[0])
    if found is None:
        summary["outcome"] = "no profitable epsilon found at this patience/horizon"
        code = EXIT_INCONCLUSIVE
    else:
        epsilon, report = found
        summary["epsilon"] = epsilon
        summary["report"] = report.to_dict()
        if report.gap > 0.0 and report.gap >= report.lower_bound - cfg.gap_tol:
            summary["outcome"] = "profitable deviation found"
            code = EXIT_CONSISTENT
        else:
            summary["outcome"] = "simulated gap contradicts the lower bound"
            code = EXIT_INCONSISTENT
    serialize.write_json(run.path("check_report.json"), summary)
    print(summary["outcome"])
    return code


def run_construct(run: Run) -> int:
    cfg = run.cfg
    try:
        construction = run.timed("construct", lab.theorem2_construct, cfg.gaussian_model,
                                 cfg.quadrature_settings, cfg.root_tol, cfg.max_iterations)
    except NotAsymmetricError as exc:
        serialize.write_json(run.path("construction.json"), {"outcome": f"inconclusive: {exc}"})
        print(exc)
        return EXIT_INCONCLUSIVE
    serialize.write_json(run.path("construction.json"), construction.to_dict())
    print(f"K = {construction.K}")
    return EXIT_CONSISTENT if construction.K >= 2 else EXIT_INCONSISTENT


def run_aggregate(run: Run) -> int:
    cfg = run.cfg
    agg = cfg.aggregation
    model, qs = cfg.gaussian_model, cfg.quadrature_settings
    grid = lab.symmetric_grid(model, agg.points, agg.width_sd)
    profiles = [("myopic", 1.0, Myopic(), Myopic())]
    for factor in agg.factors:
        strat_a, strat_b = lab.scaled_threshold_profile(model, factor, [agg.history], players=[Player.A],
                                                        q=qs, root_tol=cfg.root_tol)
        profiles.append((f"scaled_{factor:g}", factor, strat_a, strat_b))
    t0_state = state_after(model, agg.history, q=qs, root_tol=cfg.root_tol)
    myopic_t0 = lab.Environment(model, qs, cfg.root_tol).myopic_threshold(Player.A, t0_state.belief_held_by(Player.A))
    summary: dict = {"profiles": {}}
    consistent = True
    for label, factor, strat_a, strat_b in profiles:
        report = run.timed(f"aggregate_{label}", lab.aggregation_score, model, strat_a, strat_b, agg.horizon,
                           grid, qs, cfg.root_tol, agg.exclude_band)
        entry = report.to_dict()
        if label == "myopic":
            consistent &= report.mismatch_fraction == 0.0
        else:
            m_a_t0 = factor * myopic_t0
            entry["threshold_t0"] = m_a_t0
            entry["mismatches_in_predicted_box"] = lab.mismatches_in_predicted_box(report, m_a_t0)
            consistent &= report.mismatch_fraction > 0.0
        summary["profiles"][label] = entry
        serialize.write_csv(run.path(f"aggregation_points_{label}.csv"), lab.POINT_COLUMNS, report.points)
        serialize.write_csv(run.path(f"mismatch_region_{label}.csv"), ("s_a", "s_b", "wrong_action"),
                            report.mismatch_region)
    summary["outcome"] = "dichotomy observed" if consistent else "dichotomy violated"
    serialize.write_json(run.path("aggregation_report.json"), summary)
    print(summary["outcome"])
    return EXIT_CONSISTENT if consistent else EXIT_INCONSISTENT


def run_oracle(run: Run, seed: int) -> int:
    """Monte Carlo and quadrature cross-checks of the closed forms and the payoff engine."""
    cfg = run.cfg
    model, qs = cfg.gaussian_model, cfg.quadrature_settings
    rng = np.random.default_rng(seed)
    oc = cfg.oracle
    checks = {}

    pairs = rng.normal(0.0, model.signal_sd(Player.A), size=(oc.quadrature_pairs, 2))
    worst = 0.0
    for s_a, s_b in pairs:
        worst = max(worst, abs(_posterior_mean_by_quadrature(model, s_a, s_b) - model.posterior_mean(s_a, s_b)))
    checks["posterior_mean_quadrature"] = {"max_abs_error": worst, "tol": 1e-8, "pass": worst <= 1e-8}

    interval = BeliefInterval(0.0, 1.0)
    s_own = oc.s_own
    p = type_probability(model, Player.A, s_own, interval)
    mean, sd = model.conditional_moments(Player.A, s_own)
    draws = rng.normal(mean, sd, size=oc.draws)
    hits = (draws >= interval.lo) & (draws <= interval.hi)
    p_mc, se = hits.mean(), hits.std(ddof=1) / math.sqrt(oc.draws)
    checks["type_probability"] = {"quadrature": p, "monte_carlo": p_mc, "se": se,
                                  "pass": abs(p - p_mc) <= 3 * se}

    delta = cfg.discount.delta_a
    for policy in cfg.belief_policies:
        value = expected_value(model, Player.A, s_own, Myopic(), Myopic(), BeliefInterval.reals(), oc.horizon,
                               delta, policy, qs, cfg.root_tol)
        mc, se = monte_carlo_expected_value(model, Player.A, s_own, Myopic(), Myopic(), BeliefInterval.reals(),
                                            oc.horizon, delta, rng, oc.draws, policy, qs, cfg.root_tol)
        checks[f"expected_value_{policy.value}"] = {"quadrature": value, "monte_carlo": mc, "se": se,
                                                    "pass": abs(value - mc) <= 3 * se}
    ok = all(c["pass"] for c in checks.values())
    serialize.write_json(run.path("oracle_report.json"), {"seed": seed, "checks": checks})
    print("oracles agree" if ok else "oracle disagreement")
    return EXIT_CONSISTENT if ok else EXIT_INCONSISTENT


def _posterior_mean_by_quadrature(model, s_a: float, s_b: float) -> float:
    # Integrate x against prior x likelihoods, independently of the closed form.
    def joint(x: float) -> float:
        return model.prior_pdf(x) * model.signal_pdf(Player.A, s_a, x) * model.signal_pdf(Player.B, s_b, x)

    centre = model.posterior_mean(s_a, s_b)
    width = 40.0 * model.posterior_sd()
    lo, hi = centre - width, centre + width
    num, _ = integrate.quad(lambda x: x * joint(x), lo, hi, epsabs=0.0, epsrel=1e-12, limit=200, points=[centre])
    den, _ = integrate.quad(joint, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200, points=[centre])
    return num / den


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="obslearn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment configuration")
    common.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, help="RNG seed for Monte Carlo oracles (overrides seed)")
    common.add_argument("--workers", type=int, help="worker processes (fallback: OBSLEARN_WORKERS)")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="trace one signal pair under myopic play")
    sim.add_argument("--s-a", type=float, help="signal of player a (overrides simulate.s_a)")
    sim.add_argument("--s-b", type=float, help="signal of player b (overrides simulate.s_b)")
    sub.add_parser("check", parents=[common], help="equilibrium check routed by model symmetry")
    sub.add_parser("aggregate", parents=[common], help="aggregation scores for myopic and scaled profiles")
    sub.add_parser("construct", parents=[common], help="dump the asymmetric threshold construction")
    sub.add_parser("oracle", parents=[common], help="Monte Carlo and quadrature cross-checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, config_hash = load_config(args.config)
        workers = _workers(args.workers)
        seed = cfg.seed if args.seed is None else args.seed
        if not 0 <= seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        out = args.out if args.out is not None else Path(cfg.output_dir)
        run = Run(args.command, cfg, config_hash, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.command == "simulate":
            s_a = cfg.simulate.s_a if args.s_a is None else args.s_a
            s_b = cfg.simulate.s_b if args.s_b is None else args.s_b
            code = run_simulate(run, s_a, s_b)
        elif args.command == "check":
            code = run_check(run, workers)
        elif args.command == "aggregate":
            code = run_aggregate(run)
        elif args.command == "construct":
            code = run_construct(run)
        else:
            code = run_oracle(run, seed)
        run.write_manifest(code)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
