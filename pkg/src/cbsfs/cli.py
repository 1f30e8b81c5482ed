"""Command-line front end: seeded runs, result persistence, verification.

Every command is reproducible from (config file, flags, seed); the
scientific configuration is echoed into each output file header.  The
--workers flag only distributes replicates and never changes output bytes.

Exit codes: 0 ok, 1 failed verification check, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import verify
from ._mc import replicate_rng
from .clonal import MC_STATISTICS, clonal_summary, e_zcl_pow, e_zcl_pow_r, mc_clonal
from .genealogy import sample_population, sample_zetas
from .model import ModelParams
from .reports import fmt_value, write_csv, write_json_doc, write_text
from .sfs import SIMULATE_MODES, density_curve, expected_sfs, g1_curve, simulate_sfs
from .tree import RootMode, build_tree, drop_mutations, newick_export


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    seed: int
    reps: int
    n: int
    z0_condition: float | None
    output_path: str
    format: str

    def __post_init__(self) -> None:
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if not self.output_path:
            raise ValueError("output path must be nonempty")


CONFIG_KEYS = {
    "beta": float,
    "theta": float,
    "mu": float,
    "seed": int,
    "reps": int,
    "n": int,
    "z0": float,
    "out": str,
    "format": str,
    "workers": int,
}


def load_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; flags override these."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = CONFIG_KEYS[key](value.strip())
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbsfs",
        description=(
            "Exact sampled genealogies, site frequency spectra and clonal "
            "statistics for a stationary quadratic branching population."
        ),
    )
    parser.add_argument("--config", help="flat key=value config file (flags override)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=float, default=1.0, help="time-scale coefficient")
    common.add_argument("--theta", type=float, default=1.0, help="inverse population-size scale")
    common.add_argument("--mu", type=float, default=1.0, help="per-lineage mutation rate")
    common.add_argument("--seed", type=int, default=1, help="base RNG seed")
    common.add_argument("--reps", type=int, default=1000, help="number of replicates")
    common.add_argument("--n", type=int, default=10, help="sample size")
    common.add_argument("--z0", type=float, default=None, help="condition on population size z0")
    common.add_argument("--out", default=None, help="output path (base path for `sample`)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=1, help="parallel workers (output-invariant)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="sample genealogies to Newick + JSON replay")
    p.add_argument("--root-mode", choices=[m.value for m in RootMode], default=RootMode.POPULATION_MRCA.value)

    p = sub.add_parser("sfs", parents=[common], help="expected or simulated site frequency spectrum")
    p.add_argument("--mode", choices=("expected", "simulate"), default="expected")
    p.add_argument("--sim-mode", choices=SIMULATE_MODES, default="expected-lengths",
                   help="per-replicate statistic in simulate mode")

    p = sub.add_parser("density", parents=[common], help="continuum mean-spectrum density on a grid")
    p.add_argument("--r-min", type=float, default=0.01)
    p.add_argument("--r-max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=100)

    p = sub.add_parser("g1", parents=[common], help="distortion curves g1(z, u) on a u grid")
    p.add_argument("--z", default="0.5,1,2,4", help="comma list of z values")
    p.add_argument("--u-points", type=int, default=101, help="grid size on [0, 1]")

    p = sub.add_parser("clonal", parents=[common], help="clonal moments, analytic and simulated")
    p.add_argument("--mode", choices=("analytic", "simulate"), default="analytic")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--statistic", choices=MC_STATISTICS, default="zpow_r")

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", required=True,
                   help="one of: " + ", ".join(sorted(verify.SUITES)) + ", all")
    return parser


def make_run_config(args, default_out: str) -> RunConfig:
    params = ModelParams(beta=args.beta, theta=args.theta, mu=args.mu)
    return RunConfig(
        params=params,
        seed=args.seed,
        reps=args.reps,
        n=args.n,
        z0_condition=args.z0,
        output_path=args.out or default_out,
        format=args.format,
    )


def config_pairs(config: RunConfig, **extra) -> list[tuple[str, object]]:
    pairs = [
        ("beta", config.params.beta),
        ("theta", config.params.theta),
        ("mu", config.params.mu),
        ("seed", config.seed),
        ("reps", config.reps),
        ("n", config.n),
        ("z0", config.z0_condition),
        ("format", config.format),
    ]
    pairs.extend(extra.items())
    return pairs


def cmd_sample(args) -> int:
    config = make_run_config(args, "sample")
    mode = RootMode(args.root_mode)
    base = Path(config.output_path)
    if base.parent != Path("."):
        base.parent.mkdir(parents=True, exist_ok=True)
    newicks = []
    records = []
    for i in range(config.reps):
        rng = replicate_rng(config.seed, i)
        leaf_config = sample_population(config.params, config.n, rng, condition_z0=config.z0_condition)
        zetas = sample_zetas(config.params, leaf_config, rng)
        tree = build_tree(leaf_config, zetas, mode)
        overlay = drop_mutations(tree, config.params, rng)
        newick = newick_export(tree)
        newicks.append(newick)
        records.append(
            {
                "replicate": i,
                "leaf_config": leaf_config.to_dict(),
                "zetas": zetas.to_dict(),
                "tree": tree.to_dict(),
                "mutations": overlay.to_dict(),
                "newick": newick,
            }
        )
    pairs = config_pairs(config, root_mode=mode.value)
    write_text(base.with_suffix(".nwk"), newicks)
    write_json_doc(base.with_suffix(".json"), "sample", pairs, records)
    print(f"wrote {config.reps} replicates to {base.with_suffix('.nwk')} and {base.with_suffix('.json')}")
    return 0


def _emit_table(config: RunConfig, command: str, pairs, columns, rows) -> None:
    if config.format == "csv":
        write_csv(config.output_path, command, pairs, columns, rows)
    else:
        payload = [dict(zip(columns, row)) for row in rows]
        write_json_doc(config.output_path, command, pairs, payload)
    print(f"wrote {config.output_path}")


def cmd_sfs(args) -> int:
    config = make_run_config(args, "sfs.csv" if args.format == "csv" else "sfs.json")
    if args.mode == "expected":
        table = expected_sfs(config.params, config.n, config.z0_condition)
    else:
        table = simulate_sfs(
            config.params,
            config.n,
            config.reps,
            config.seed,
            z0=config.z0_condition,
            mode=args.sim_mode,
            workers=args.workers,
        )
    pairs = config_pairs(config, mode=args.mode)
    columns = ["k", "expected_L", "expected_xi", "mc_mean", "mc_se"]
    rows = [
        [row.k, row.expected_L, row.expected_xi, row.mc_mean, row.mc_se]
        for row in table.rows
    ]
    _emit_table(config, "sfs", pairs, columns, rows)
    return 0


def cmd_density(args) -> int:
    config = make_run_config(args, "density.csv" if args.format == "csv" else "density.json")
    if not (args.r_min > 0 and args.r_max > args.r_min and args.points >= 2):
        raise ValueError("need 0 < r-min < r-max and points >= 2")
    step = (args.r_max / args.r_min) ** (1.0 / (args.points - 1))
    grid = [args.r_min * step**i for i in range(args.points)]
    curve = density_curve(config.params, grid)
    pairs = config_pairs(config, r_min=args.r_min, r_max=args.r_max, points=args.points)
    _emit_table(config, "density", pairs, ["r", "f"], [[r, f] for r, f in curve.points])
    return 0


def cmd_g1(args) -> int:
    config = make_run_config(args, "g1.csv" if args.format == "csv" else "g1.json")
    z_values = [float(z) for z in args.z.split(",") if z.strip()]
    if not z_values or any(z <= 0 for z in z_values):
        raise ValueError("--z needs a comma list of positive values")
    if args.u_points < 2:
        raise ValueError("--u-points must be >= 2")
    u_grid = [i / (args.u_points - 1) for i in range(args.u_points)]
    rows = g1_curve(z_values, u_grid)
    pairs = config_pairs(config, z=args.z, u_points=args.u_points)
    columns = ["u"] + [f"g1[z={fmt_value(z)}]" for z in z_values]
    _emit_table(config, "g1", pairs, columns, rows)
    return 0


def cmd_clonal(args) -> int:
    config = make_run_config(args, "clonal.csv" if args.format == "csv" else "clonal.json")
    if args.n_max < 1:
        raise ValueError("--n-max must be >= 1")
    rows = []
    for n in range(1, args.n_max + 1):
        analytic = (
            e_zcl_pow_r(config.params, n)
            if args.statistic == "zpow_r"
            else e_zcl_pow(config.params, n)
        )
        if args.mode == "simulate":
            report = mc_clonal(
                config.params,
                n,
                max(config.reps, 100),
                config.seed,
                statistic=args.statistic,
                workers=args.workers,
            )
            rows.append([n, analytic, report.mc_mean, report.mc_se])
        else:
            rows.append([n, analytic, None, None])
    summary = clonal_summary(config.params)
    pairs = config_pairs(
        config,
        mode=args.mode,
        statistic=args.statistic,
        e_r=summary.e_r,
        e_zcl=summary.e_zcl,
        cov_r_z0=summary.cov_r_z0,
    )
    _emit_table(config, "clonal", pairs, ["n", "analytic", "mc_mean", "mc_se"], rows)
    return 0


def cmd_verify(args) -> int:
    config = make_run_config(args, "verify.txt")
    if args.suite != "all" and args.suite not in verify.SUITES:
        print(
            f"unknown suite {args.suite!r}; known: {', '.join(sorted(verify.SUITES))}, all",
            file=sys.stderr,
        )
        return 2
    results = verify.run_suite(args.suite, config.params, config.reps, config.seed)
    lines = []
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        lines.append(f"[{status}] {result.name} — {result.detail}")
    lines.append(
        f"{sum(r.passed for r in results)}/{len(results)} checks passed in suite {args.suite!r}"
    )
    print("\n".join(lines))
    if args.out:
        write_text(args.out, lines)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "sample": cmd_sample,
    "sfs": cmd_sfs,
    "density": cmd_density,
    "g1": cmd_g1,
    "clonal": cmd_clonal,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    # first pass picks up --config so its values become overridable defaults
    probe, _ = parser.parse_known_args(argv)
    if getattr(probe, "config", None):
        try:
            values = load_config_file(probe.config)
        except (OSError, ValueError) as exc:
            print(f"cbsfs: bad config file: {exc}", file=sys.stderr)
            return 2
        for action in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
            action.set_defaults(**values)
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"cbsfs: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
