"""Command-line front end: ``kljn {predict,simulate,sweep,trace,levels}``.

Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
4 insufficient data.
"""

import argparse
import dataclasses
import math
import os
import sys
import warnings

from ._validation import (
    ConfigurationError,
    InsufficientDataError,
    InvalidParameterError,
    ValidityWarning,
)
from .core import (
    OBSERVABLES,
    VOLTAGE,
    BitSituation,
    child_seed,
    compute_thresholds,
    simulate_bep,
)
from .error_model import (
    SMALL_ERROR_LIMIT,
    PredictorInput,
    gaussian_tail_probability,
    pessimism_ratio,
    rice_closed_form,
)
from .fileio import (
    CONFIG_UNITS,
    csv_text,
    json_text,
    load_config,
    manifest,
    trace_csv,
    write_atomic,
)
from .montecarlo import UNIFORM, ExperimentPlan, estimate_rate, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4

PREDICT_HEADER = ["beta", "gamma", "eps_rice", "eps_tail", "pessimism_ratio"]
SWEEP_HEADER = ["beta", "gamma", "n_trials", "errors", "eps_empirical", "ci_low", "ci_high",
                "eps_rice", "eps_tail"]


class UsageError(Exception):
    pass


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _float_list(text):
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None
    return values


def _global_flags():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="flat 'key = value' config file")
    p.add_argument("--seed", type=_seed, default=0, help="master seed (unsigned 64-bit)")
    p.add_argument("--out", metavar="DIR", help="directory for output files")
    p.add_argument("--json", action="store_true", help="print JSON instead of CSV/tables")
    return p


def _config_flags():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration overrides")
    for key, unit in CONFIG_UNITS.items():
        g.add_argument("--" + key.replace("_", "-"), dest="cfg_" + key, type=float,
                       metavar="X", help=f"override {key} [{unit}]")
    return p


def build_parser():
    common = _global_flags()
    cfg = _config_flags()
    parser = argparse.ArgumentParser(prog="kljn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", parents=[common], help="analytic error probabilities")
    p.add_argument("--beta", "--delta", dest="beta", type=_float_list, default=[0.5],
                   help="threshold fraction(s), e.g. '0.3,0.4,0.5'")
    p.add_argument("--gamma", type=_float_list, default=[100.0], help="bandwidth ratio(s)")

    p = sub.add_parser("simulate", parents=[common, cfg], help="Monte Carlo error tally")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--situation", default=UNIFORM, help="00, 01, 10, 11 or uniform")
    p.add_argument("--observable", choices=OBSERVABLES, default=VOLTAGE)
    p.add_argument("--n-jobs", type=int, default=1)

    p = sub.add_parser("sweep", parents=[common, cfg], help="empirical vs analytic eps_00 grid")
    p.add_argument("--gamma-list", type=_float_list, required=True)
    p.add_argument("--beta-list", type=_float_list, required=True)
    p.add_argument("--trials-per-cell", type=int, default=10_000)
    p.add_argument("--observable", choices=OBSERVABLES, default=VOLTAGE)
    p.add_argument("--n-jobs", type=int, default=1)

    p = sub.add_parser("trace", parents=[common, cfg], help="export one period's waveforms")
    p.add_argument("--situation", default="01")
    p.add_argument("--swap-generators", action="store_true",
                   help="give Alice the generator seed Bob would get and vice versa")

    sub.add_parser("levels", parents=[common, cfg], help="exact levels and thresholds")
    return parser


def _config(args):
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_")}
    return load_config(args.config, overrides)


def _emit(args, name, text, written):
    if args.out:
        path = os.path.join(args.out, name)
        write_atomic(path, text)
        written.append(path)


def _finish(args, subcommand, config, written, stdout_text):
    if args.out:
        record = manifest(subcommand, _jsonable_args(args), config, args.seed, written)
        path = os.path.join(args.out, "manifest.json")
        write_atomic(path, json_text(record))
    if stdout_text:
        sys.stdout.write(stdout_text)


def _jsonable_args(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_predict(args):
    rows = []
    for beta in args.beta:
        for gamma in args.gamma:
            if not 0 <= beta <= 1 or not (math.isfinite(gamma) and gamma > 0):
                raise UsageError(f"need 0 <= beta <= 1 and gamma > 0, got beta={beta}, gamma={gamma}")
            inp = PredictorInput(beta, gamma)
            rice = rice_closed_form(inp)
            if rice > SMALL_ERROR_LIMIT:
                print(f"warning: eps_rice={rice:.4g} at beta={beta}, gamma={gamma} is outside "
                      "the small-error regime", file=sys.stderr)
            rows.append([beta, gamma, rice, gaussian_tail_probability(inp), pessimism_ratio(inp)])
    written = []
    text = csv_text(PREDICT_HEADER, rows)
    _emit(args, "predict.csv", text, written)
    if args.json:
        text = json_text([dict(zip(PREDICT_HEADER, r)) for r in rows])
    _finish(args, "predict", None, written, text)
    return EXIT_OK


def _summary(tally):
    out = {"n_total": tally.n_total, "counts": {f"{d}|{s}": c for d, s, c in tally.rows()}}
    for which in ("eps_00", "eps_11", "retained_fraction"):
        try:
            out[which] = estimate_rate(tally, which).as_dict()
        except InsufficientDataError:
            out[which] = "insufficient-data"
    return out


def cmd_simulate(args):
    config = _config(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    policy = UNIFORM if args.situation == UNIFORM else BitSituation.parse(args.situation)
    plan = ExperimentPlan(config, args.trials, policy, args.observable, args.seed)
    tally = run_experiment(plan, n_jobs=args.n_jobs)
    summary = _summary(tally)
    written = []
    _emit(args, "tally.csv", csv_text(["decision", "actual", "count"], tally.rows()), written)
    _emit(args, "summary.json", json_text(summary), written)
    _finish(args, "simulate", config, written, json_text(summary) if args.json or not args.out else "")
    return EXIT_OK


def cmd_sweep(args):
    if not args.gamma_list or not args.beta_list:
        raise UsageError("--gamma-list and --beta-list must not be empty")
    if args.trials_per_cell < 1:
        raise UsageError("--trials-per-cell must be >= 1")
    base = _config(args)
    rows = []
    cell = 0
    for beta in args.beta_list:
        for gamma in args.gamma_list:
            config = dataclasses.replace(base, beta=beta, gamma=gamma)
            plan = ExperimentPlan(config, args.trials_per_cell, BitSituation.S00,
                                  args.observable, child_seed(args.seed, cell))
            est = estimate_rate(run_experiment(plan, n_jobs=args.n_jobs), "eps_00")
            inp = PredictorInput(beta, gamma)
            rows.append([beta, gamma, est.n, est.k, est.p_hat, est.ci_low, est.ci_high,
                         rice_closed_form(inp), gaussian_tail_probability(inp)])
            cell += 1
    written = []
    text = csv_text(SWEEP_HEADER, rows)
    _emit(args, "sweep.csv", text, written)
    if args.json:
        text = json_text([dict(zip(SWEEP_HEADER, r)) for r in rows])
    _finish(args, "sweep", base, written, text if args.json or not args.out else "")
    return EXIT_OK


def cmd_trace(args):
    config = _config(args)
    situation = BitSituation.parse(args.situation)
    seeds = (child_seed(args.seed, 0), child_seed(args.seed, 1))
    if args.swap_generators:
        seeds = seeds[::-1]
    outcome, (u_ch, i_ch) = simulate_bep(config, situation, *seeds)
    written = []
    _emit(args, "u_ch.csv", trace_csv(u_ch), written)
    _emit(args, "i_ch.csv", trace_csv(i_ch), written)
    info = {"situation": situation.value, "n_samples": len(u_ch), "dt": u_ch.dt,
            "measured_ms": outcome.measured_ms, "decision": outcome.decision.value,
            "error_class": outcome.error_class.value}
    text = json_text(info) if args.json or args.out else trace_csv(u_ch)
    _finish(args, "trace", config, written, text)
    return EXIT_OK


def levels_table(config):
    volt = compute_thresholds(config, "voltage")
    curr = compute_thresholds(config, "current")

    def block(lv):
        return {"level_00": lv.level_00, "level_mid": lv.level_mid, "level_11": lv.level_11,
                "delta_1": lv.delta_1, "delta_2": lv.delta_2,
                "edge_00": lv.edge_00, "edge_11": lv.edge_11}

    return {"voltage_V2": block(volt), "current_A2": block(curr),
            "alpha": config.alpha, "threshold_bound": config.threshold_bound,
            "tau_s": config.tau, "f_b_Hz": config.f_b, "samples_per_bep": config.n_samples}


def cmd_levels(args):
    config = _config(args)
    table = levels_table(config)
    written = []
    _emit(args, "levels.json", json_text(table), written)
    if args.json:
        text = json_text(table)
    else:
        lines = []
        for name, unit in (("voltage_V2", "V^2"), ("current_A2", "A^2")):
            lines.append(f"[{name.split('_')[0]}, {unit}]")
            lines += [f"  {k:<10} {v:.6g}" for k, v in table[name].items()]
        lines.append(f"alpha            {table['alpha']:.6g}")
        lines.append(f"beta/delta bound {table['threshold_bound']:.6g}")
        lines.append(f"tau              {table['tau_s']:.6g} s ({table['samples_per_bep']} samples)")
        text = "\n".join(lines) + "\n"
    _finish(args, "levels", config, written, text)
    return EXIT_OK


COMMANDS = {
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "trace": cmd_trace,
    "levels": cmd_levels,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            return COMMANDS[args.command](args)
    except (ConfigurationError, InvalidParameterError, UsageError) as exc:
        print(f"kljn {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientDataError as exc:
        print(f"kljn {args.command}: insufficient data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"kljn {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
