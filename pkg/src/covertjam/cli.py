"""Command-line entry point: ``covertjam {solve,sweep-power,sweep-distance,verify}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from .errors import CovertError
from .experiments import CONFIG_KEYS, DISTANCE_SWEEPS, ExperimentConfig, Table, load_config, write_csv
from .geometry import draw_fading, random_selection, select_antennas
from .rate import FJ, GNJ, RateScenario
from .solver import solve_fj, solve_gnj_dc

# flags with a fixed set of choices; every other config key is free text
_CHOICES = {"mode": ("gnj", "fj", "both"), "selection": ("best", "random", "both"),
            "which": tuple(DISTANCE_SWEEPS), "p_scale": ("log", "linear")}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--out", metavar="PATH", help="CSV output path (stdout when omitted)")
    for key in CONFIG_KEYS:
        flags = [f"--{key}"]
        if "_" in key:
            flags.append(f"--{key.replace('_', '-')}")
        p.add_argument(*flags, dest=key, default=None, choices=_CHOICES.get(key),
                       help=argparse.SUPPRESS if key not in ("seed", "mode", "nd", "selection", "which") else None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covertjam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("solve", "optimize the power split for one seeded fading draw"),
                            ("sweep-power", "average covert rate versus total power"),
                            ("sweep-distance", "average covert rate versus one link distance"),
                            ("verify", "run the closed-form vs oracle checks")):
        _add_common(sub.add_parser(name, help=help_text))
    return parser


def _config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {k: getattr(args, k) for k in CONFIG_KEYS if getattr(args, k) is not None}
    return config.with_overrides(overrides)


def _emit(table: Table, out):
    if out:
        write_csv(table, out)
    else:
        sys.stdout.write(table.to_csv())


def _solve(config: ExperimentConfig, out) -> int:
    rng = np.random.default_rng(config.seed)
    fading = draw_fading(rng, config.m_t)
    n_d = config.best_nds()[-1] if config.nd is None else config.nd
    if config.selection == "random":
        sel = random_selection(rng, config.m_t, n_d, fading.h_ab)
    else:
        sel = select_antennas(fading.h_ab, n_d)
    geometry = config.geometry()
    table = Table(("mode", "iteration", "alpha", "surrogate_rate", "rate"))
    print(f"antennas={','.join(map(str, sel.indices))} g_ab={sel.g_ab:.9g} g_jb={abs(fading.h_jb) ** 2:.9g}")
    for mode in config.modes():
        scen = RateScenario(config.p_total, sel.g_ab, abs(fading.h_jb) ** 2, geometry, config.sigma_b2, mode)
        res = solve_gnj_dc(scen, config.spec(), config.solver_config()) if mode == GNJ \
            else solve_fj(scen, config.spec(), config.solver_config())
        print(f"mode={mode} alpha_star={res.alpha_star:.9g} rate={res.rate:.9g} "
              f"iterations={res.iterations} converged={res.converged}")
        table.rows.extend((mode, *row) for row in res.trace)
    if out:
        write_csv(table, out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config(args)
        if args.command == "solve":
            return _solve(config, args.out)
        if args.command == "sweep-power":
            _emit(experiments.run_power_sweep(config), args.out)
            return 0
        if args.command == "sweep-distance":
            _emit(experiments.run_distance_sweep(config), args.out)
            return 0
        report = experiments.run_verify(config)
        print(report.text())
        if args.out:
            table = Table(("check", "passed", "measured", "limit"),
                          [(c.name, c.passed, c.measured, c.limit) for c in report.checks])
            write_csv(table, args.out)
        return 0 if report.passed else 1
    except (CovertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
