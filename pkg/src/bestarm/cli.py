"""Command-line front end for the identification library.

Subcommands
-----------
allocation
    Solve the optimal sampling proportions for an instance and print them.
run
    Run one Monte Carlo experiment; writes ``<out>.trials.csv`` and
    ``<out>.summary.csv``.
sweep-beta
    Run the same experiment over a grid of beta values; writes
    ``<out>.sweep.csv``.
ttts-cost
    Measure Thompson challenger-search costs on idealized states, over a
    round grid or a gap grid; writes ``<out>.cost.csv``.
threshold
    Print one stopping-threshold value with 17 significant digits.

Experiments read an optional config file of ``key = value`` lines (``#``
comments allowed); any flag given on the command line overrides the file.
Recognized keys mirror the flags: family, means, sigma, policy, delta,
beta, trials, seed, resample_cap, horizon, stop, threshold, posterior_sigma,
threads, out, betas, n_grid, gaps, draws, n.

All randomness flows from the seed; omitting it is an error, never a
time-based default. Exit codes: 0 success, 2 invalid configuration or
domain error, 3 every trial censored.

No numeric logic lives here: every printed value is reproducible by the
corresponding library call.
"""

from __future__ import annotations

import argparse
import sys

from .allocation import lower_bound_samples, solve_allocation
from .families import BanditInstance, family_from_name
from .harness import (
    ExperimentConfig,
    run_experiment,
    sweep_beta,
    ttts_cost_sweep,
    ttts_gap_sweep,
    write_cost_csv,
    write_summary_csv,
    write_sweep_csv,
    write_trials_csv,
)
from .thresholds import ThresholdSpec, threshold

_OUT_OF_SCOPE_POLICIES = ("dkm", "lucb", "fw", "tas")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip().lower().replace("-", "_")] = value.strip()
    return values


def _floats(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(p) for p in parts)


def _ints(text: str) -> list[int]:
    return [int(round(v)) for v in _floats(text)]


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


class _Settings:
    """Config-file values with command-line flags layered on top."""

    def __init__(self, args: argparse.Namespace):
        self.flags = vars(args)
        self.file: dict[str, str] = {}
        config_path = self.flags.get("config")
        if config_path:
            self.file = _parse_config_file(config_path)

    def get(self, key: str, convert, default=None):
        flag = self.flags.get(key)
        if flag is not None:
            return flag
        if key in self.file:
            return convert(self.file[key])
        return default

    def require(self, key: str, convert):
        value = self.get(key, convert)
        if value is None:
            raise ValueError(f"missing required setting {key!r}")
        return value


def _experiment_config(settings: _Settings) -> ExperimentConfig:
    policy = settings.get("policy", str, "ttsprt")
    if policy in _OUT_OF_SCOPE_POLICIES:
        raise ValueError(f"policy {policy!r} not implemented; out of scope")
    stop = settings.get("stop", _bool, True)
    if settings.flags.get("no_stop"):
        stop = False
    return ExperimentConfig(
        family=settings.require("family", str),
        means=settings.require("means", _floats),
        sigma=settings.get("sigma", float, 1.0),
        policy=policy,
        delta=settings.get("delta", float, 0.1),
        beta=settings.get("beta", float, 0.5),
        trials=settings.get("trials", int, 100),
        seed=settings.require("seed", int),
        resample_cap=settings.get("resample_cap", int, 10**7),
        horizon=settings.get("horizon", int, 10**7),
        stop=stop,
        threshold_kind=settings.get("threshold", str, "auto"),
        posterior_sigma=settings.get("posterior_sigma", float),
    )


def _cmd_allocation(args: argparse.Namespace) -> int:
    family = family_from_name(args.family, args.sigma)
    instance = BanditInstance(family, _floats(args.means))
    result = solve_allocation(instance, args.beta)
    print("weights =", ", ".join(_fmt(w) for w in result.weights))
    print("gamma =", _fmt(result.gamma))
    print("residual =", _fmt(result.residual))
    if args.delta is not None:
        bound = lower_bound_samples(instance, args.beta, args.delta)
        print(f"lower_bound(delta={args.delta:g}) =", _fmt(bound))
    return 0


def _cmd_threshold(args: argparse.Namespace) -> int:
    spec = ThresholdSpec(args.kind, args.delta, args.arms)
    print(_fmt(threshold(spec, args.n)))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    config = _experiment_config(settings)
    threads = settings.get("threads", int, 1)
    out = settings.require("out", str)
    report = run_experiment(config, threads=threads)
    write_trials_csv(report, f"{out}.trials.csv")
    write_summary_csv(report, f"{out}.summary.csv")
    print(
        f"policy={config.policy} trials={config.trials} "
        f"mean_tau={report.mean_tau:.6g} error_rate={report.error_rate:.6g} "
        f"censored={report.censored_trials} -> {out}.trials.csv {out}.summary.csv"
    )
    if report.censored_trials == config.trials:
        return 3
    return 0


def _cmd_sweep_beta(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    config = _experiment_config(settings)
    betas = settings.require("betas", _floats)
    threads = settings.get("threads", int, 1)
    out = settings.require("out", str)
    reports = sweep_beta(config, list(betas), threads=threads)
    write_sweep_csv(reports, f"{out}.sweep.csv")
    best = min(reports, key=lambda r: r.mean_tau)
    print(
        f"betas={len(betas)} best_beta={best.config.beta:g} "
        f"best_mean_tau={best.mean_tau:.6g} -> {out}.sweep.csv"
    )
    if all(r.censored_trials == r.config.trials for r in reports):
        return 3
    return 0


def _cmd_ttts_cost(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    seed = settings.require("seed", int)
    draws = settings.get("draws", int, 200)
    cap = settings.get("resample_cap", int, 10**7)
    out = settings.require("out", str)
    gaps = settings.get("gaps", _floats)
    if gaps is not None:
        rows = ttts_gap_sweep(
            list(gaps),
            draws_per_n=draws,
            seed=seed,
            n=settings.get("n", int, 500),
            sigma=settings.get("sigma", float, 1.0),
            resample_cap=cap,
        )
    else:
        family = settings.require("family", str)
        sigma = settings.get("sigma", float, 1.0)
        instance = BanditInstance(
            family_from_name(family, sigma), settings.require("means", _floats)
        )
        rows = ttts_cost_sweep(
            instance,
            sigma,
            settings.require("n_grid", _ints),
            draws_per_n=draws,
            seed=seed,
            beta=settings.get("beta", float, 0.5),
            resample_cap=cap,
        )
    write_cost_csv(rows, f"{out}.cost.csv")
    censored_cells = sum(r.censored_draws > 0 for r in rows)
    print(
        f"cells={len(rows)} censored_cells={censored_cells} -> {out}.cost.csv"
    )
    if rows and all(r.censored_draws == r.draws for r in rows):
        return 3
    return 0


def _add_instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", help="gaussian | bernoulli | exponential")
    parser.add_argument("--means", help="comma-separated arm means")
    parser.add_argument("--sigma", type=float, help="gaussian noise scale")


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    _add_instance_flags(parser)
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--policy", help="|".join(("ttsprt", "ttsprt-gaussian", "ttts", "t3c", "uniform")))
    parser.add_argument("--delta", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int, help="base seed (required; no default)")
    parser.add_argument("--resample-cap", dest="resample_cap", type=int)
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--no-stop", dest="no_stop", action="store_true")
    parser.add_argument("--threshold", help="auto | exponential | gaussian")
    parser.add_argument("--posterior-sigma", dest="posterior_sigma", type=float)
    parser.add_argument("--threads", type=int, help="trial parallelism bound")
    parser.add_argument("--out", help="output path prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bestarm",
        description="Fixed-confidence best-arm identification experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_alloc = sub.add_parser("allocation", help="solve optimal proportions")
    p_alloc.add_argument("--family", required=True)
    p_alloc.add_argument("--means", required=True)
    p_alloc.add_argument("--sigma", type=float, default=1.0)
    p_alloc.add_argument("--beta", type=float, required=True)
    p_alloc.add_argument("--delta", type=float)
    p_alloc.set_defaults(handler=_cmd_allocation)

    p_run = sub.add_parser("run", help="run a Monte Carlo experiment")
    _add_experiment_flags(p_run)
    p_run.set_defaults(handler=_cmd_run)

    p_sweep = sub.add_parser("sweep-beta", help="run an experiment per beta")
    _add_experiment_flags(p_sweep)
    p_sweep.add_argument("--betas", help="comma-separated beta grid")
    p_sweep.set_defaults(handler=_cmd_sweep_beta)

    p_cost = sub.add_parser("ttts-cost", help="challenger-cost sweeps")
    _add_instance_flags(p_cost)
    p_cost.add_argument("--config", help="key = value config file")
    p_cost.add_argument("--n-grid", dest="n_grid", type=_ints)
    p_cost.add_argument("--gaps", type=_floats, help="two-arm gap grid")
    p_cost.add_argument("--n", type=int, help="fixed n for gap sweeps")
    p_cost.add_argument("--draws", type=int)
    p_cost.add_argument("--beta", type=float)
    p_cost.add_argument("--seed", type=int)
    p_cost.add_argument("--resample-cap", dest="resample_cap", type=int)
    p_cost.add_argument("--out", help="output path prefix")
    p_cost.set_defaults(handler=_cmd_ttts_cost)

    p_thresh = sub.add_parser("threshold", help="print one threshold value")
    p_thresh.add_argument("--kind", required=True, help="exponential | gaussian")
    p_thresh.add_argument("--arms", type=int, required=True)
    p_thresh.add_argument("--delta", type=float, required=True)
    p_thresh.add_argument("--n", type=int, required=True)
    p_thresh.set_defaults(handler=_cmd_threshold)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
