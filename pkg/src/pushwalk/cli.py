"""Command-line interface.

Every subcommand prints one output record: a header naming the schema and
echoing the resolved parameters, followed by data rows.  CSV is the default
format; ``--format json-lines`` writes one JSON object per line instead.

Exit codes: 0 success, 2 invalid arguments, 3 resource guard exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, exact, moments, rounds, sim
from .asymptotics import AsymptoticRegime, gaussian_tail_bound, normal_approx_y
from .errors import ConfigError, DegenerateError, DomainError, ResourceError
from .model import NetworkConfig

SCHEMA_VERSION = 1
ROUNDS_N_MAX = 5000

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3


@dataclass
class OutputRecord:
    schema: str
    command: dict
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)

    def render(self, fmt: str) -> str:
        if fmt == "json-lines":
            head = {"schema": self.schema, "command": self.command, "columns": self.columns}
            if self.summary:
                head["summary"] = self.summary
            lines = [json.dumps(head, sort_keys=True)]
            for row in self.rows:
                lines.append(json.dumps(dict(zip(self.columns, (_jsonable(v) for v in row)))))
            return "\n".join(lines) + "\n"
        buf = io.StringIO()
        buf.write(f"# schema: {self.schema}\n")
        buf.write(f"# command: {json.dumps(self.command, sort_keys=True)}\n")
        if self.summary:
            buf.write(f"# summary: {json.dumps(self.summary, sort_keys=True)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _schema(name: str) -> str:
    return f"pushwalk.{name}/{SCHEMA_VERSION}"


def _int_range(text: str) -> list[int]:
    """Parse ``7``, ``1:10`` (inclusive) or ``1,3,7``."""
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, a range a:b or a list, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _config(args) -> NetworkConfig:
    return NetworkConfig(args.n, args.k, args.c)


def cmd_dist(args) -> OutputRecord:
    cfg = _config(args)
    summary = {}
    if args.algo == "pull":
        if args.steps is not None:
            raise ConfigError("--steps applies to push only")
        pmf = exact.pull_distribution(cfg)
        steps = None
    else:
        steps = cfg.k if args.steps is None else args.steps
        pmf = exact.walk_distribution(cfg, steps)
    if args.oracle:
        if args.algo == "pull":
            oracle = exact.pull_distribution_exact(cfg)
        elif args.oracle == "stirling":
            if cfg.c != 1 or steps != cfg.k:
                raise ConfigError("the stirling oracle covers fanout c=1 and steps=k only")
            oracle = exact.stirling_oracle(cfg.n, cfg.k)
        else:
            oracle = exact.enumeration_oracle(cfg, steps)
        summary = {"oracle": args.oracle, "max_tv": pmf.tv(oracle)}
    command = {"cmd": "dist", "n": cfg.n, "k": cfg.k, "c": cfg.c, "algo": args.algo,
               "steps": steps, "oracle": args.oracle}
    rows = [(x, float(p)) for x, p in zip(pmf.support, pmf.probs)]
    return OutputRecord(_schema("dist"), command, ["value", "probability"], rows, summary)


def cmd_rounds(args) -> OutputRecord:
    if args.n > ROUNDS_N_MAX:
        raise ResourceError(f"rounds limited to n <= {ROUNDS_N_MAX}, got n={args.n}")
    algos = ["push", "pull"] if args.algo == "both" else [args.algo]
    lams = None if args.lambda_grid is None else np.array(args.lambda_grid)
    rows = []
    for c in args.c:
        cfg = NetworkConfig(args.n, args.k, c)
        for algo in algos:
            grid, targets, values = rounds.expected_rounds_curve(cfg, lams, algo)
            rows.extend((algo, c, float(lam), int(t), float(v)) for lam, t, v in zip(grid, targets, values))
    command = {"cmd": "rounds", "n": args.n, "k": args.k, "c": args.c, "algo": args.algo,
               "lambda_grid": "j/n" if args.lambda_grid is None else args.lambda_grid}
    return OutputRecord(_schema("rounds"), command, ["algo", "c", "lambda", "target", "N"], rows)


def cmd_fluid(args) -> OutputRecord:
    reg = AsymptoticRegime(args.mu, args.c)
    phi = reg.fluid_rounds(args.i_max)
    rows = []
    prev = 0.0
    for i, level in enumerate(phi.levels):
        rows.append((i, level, i, prev, level))
        prev = level
    command = {"cmd": "fluid", "mu": args.mu, "c": args.c, "i_max": args.i_max}
    # nu_bar = i on the interval (lambda_lo, lambda_hi]
    return OutputRecord(_schema("fluid"), command, ["i", "phi", "nu_bar", "lambda_lo", "lambda_hi"], rows)


def cmd_diffuse(args) -> OutputRecord:
    cfg = _config(args)
    mean, var = normal_approx_y(cfg)
    rows = [("mu", cfg.susceptible / cfg.n), ("normal_mean", mean), ("normal_var", var),
            ("normal_total_mean", cfg.k + mean)]
    if cfg.n >= 3:
        e_mean, e_var = moments.mean_var_y(cfg)
        rows += [("exact_mean", e_mean), ("exact_var", e_var)]
    command = {"cmd": "diffuse", "n": cfg.n, "k": cfg.k, "c": cfg.c}
    return OutputRecord(_schema("diffuse"), command, ["quantity", "value"], rows)


def cmd_hit(args) -> OutputRecord:
    reg = AsymptoticRegime(args.mu, args.c)
    columns = ["lambda", "tau_bar", "var_x", "v"]
    if args.n is not None:
        columns += ["n", "C", "t_n", "tail_bound"]
    rows = []
    for lam in args.lam:
        t = reg.tau_bar(lam)
        row = [lam, t, reg.var_x(t), reg.hitting_variance(lam)]
        if args.n is not None:
            row += [args.n, args.C, reg.t_n(args.n, args.C), gaussian_tail_bound(args.C)]
        rows.append(tuple(row))
    command = {"cmd": "hit", "mu": args.mu, "c": args.c, "lambda": args.lam, "n": args.n, "C": args.C}
    return OutputRecord(_schema("hit"), command, columns, rows)


def cmd_compare(args) -> OutputRecord:
    rows = []
    for c in args.c_range:
        mc = AsymptoticRegime(args.mu, c).mean_comparison()
        rows.append((c, mc.pull_mean, mc.push_mean, mc.gap))
    command = {"cmd": "compare", "mu": args.mu, "c_range": args.c_range}
    return OutputRecord(_schema("compare"), command, ["c", "pull_mean", "push_mean", "gap"], rows)


def cmd_simulate(args) -> OutputRecord:
    cfg = _config(args)
    sc = sim.SimConfig(cfg, args.algo, args.reps, args.seed, tuple(args.levels),
                       args.max_rounds, args.track_rounds)
    threads = sim.default_threads() if args.threads is None else args.threads
    report = sim.run_monte_carlo(sc, threads=threads, keep_replications=True)
    columns = ["r", "y", "rounds_run", "selections"]
    for lam in sc.levels:
        columns += [f"tau@{lam!r}", f"nu@{lam!r}"]
    rows = []
    for res in report.replications:
        row = [res.index, res.y, res.rounds_run, res.selections]
        for t, v in zip(res.tau, res.nu):
            row += [t, v]
        rows.append(tuple(row))
    command = {"cmd": "simulate", "n": cfg.n, "k": cfg.k, "c": cfg.c, "algo": sc.algorithm,
               "reps": sc.replications, "seed": sc.seed, "levels": list(sc.levels),
               "thresholds": list(sc.thresholds), "max_rounds": sc.max_rounds,
               "track_rounds": sc.track_rounds, "mix": report.mix_function, "version": __version__}
    return OutputRecord(_schema("simulate"), command, columns, rows, report.summary())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pushwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    common.add_argument("--out", help="write to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def network(p, c_type=int):
        p.add_argument("--n", type=int, required=True, help="number of nodes")
        p.add_argument("--k", type=int, required=True, help="initially infected nodes")
        p.add_argument("--c", type=c_type, required=True, help="fanout")

    p = sub.add_parser("dist", parents=[common], help="exact law of newly infected nodes")
    network(p)
    p.add_argument("--steps", type=int, help="selections (push; default k, one round)")
    p.add_argument("--algo", choices=("push", "pull"), default="push")
    p.add_argument("--oracle", choices=("stirling", "enum"), help="cross-check against an exact oracle")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("rounds", parents=[common], help="expected rounds N(lambda, k)")
    network(p, c_type=_int_range)
    p.add_argument("--algo", choices=("push", "pull", "both"), default="push")
    p.add_argument("--lambda-grid", "--lambda", dest="lambda_grid", type=_float_list,
                   help="comma-separated levels (default j/n for j=1..n)")
    p.set_defaults(func=cmd_rounds)

    p = sub.add_parser("fluid", parents=[common], help="fluid round levels phi_i and nu_bar")
    p.add_argument("--mu", type=float, required=True, help="susceptible fraction")
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--i-max", type=int)
    p.set_defaults(func=cmd_fluid)

    p = sub.add_parser("diffuse", parents=[common], help="normal approximation of Y")
    network(p)
    p.set_defaults(func=cmd_diffuse)

    p = sub.add_parser("hit", parents=[common], help="hitting-time asymptotics")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=_float_list, required=True)
    p.add_argument("--n", type=int, help="network size for t_n")
    p.add_argument("--C", type=float, default=4.0, help="deviation multiple for t_n")
    p.set_defaults(func=cmd_hit)

    p = sub.add_parser("compare", parents=[common], help="pull versus push limit means")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--c-range", type=_int_range, default=_int_range("1:30"))
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo replications")
    network(p)
    p.add_argument("--algo", choices=("push", "pull"), default="push")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--levels", type=_float_list, default=[])
    p.add_argument("--max-rounds", type=int, default=1000)
    p.add_argument("--track-rounds", type=int, default=1)
    p.add_argument("--threads", type=int, help=f"worker threads (default ${sim.THREADS_ENV} or 1)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        record = args.func(args)
    except (ConfigError, DomainError, DegenerateError) as exc:
        print(f"pushwalk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"pushwalk {args.command}: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    text = record.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
