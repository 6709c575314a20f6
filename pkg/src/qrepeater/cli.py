"""Command-line front end emitting CSV tables for the repeater model.

Subcommands: table1, lstar, pfail, simulate, rate. Every option may also be
given in a ``--config`` file of ``key = value`` lines (lists comma
separated); command-line flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import chain, codes, purification
from .mcsim import ChainConfig, analytic_predictions, exact_chain_error, simulate_chain

EXIT_OK, EXIT_USAGE, EXIT_REGRESSION = 0, 1, 2
Z_GATE = 4.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# value types


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi, *step = (int(x) for x in part.split(":"))
            out.extend(range(lo, hi + 1, step[0] if step else 1))
        else:
            out.append(int(float(part)))
    return out


def _names(text: str) -> list[str]:
    return [x.strip().lower() for x in str(text).split(",") if x.strip()]


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _count(text: str) -> int:
    value = int(float(text))
    if value <= 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value file with defaults for this command")
    p.add_argument("--seed", type=_u64, default=42)
    p.add_argument("--out", type=Path, help="CSV output path (default: <command>.csv)")
    p.add_argument("--stdout", action="store_true", help="write CSV to standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrepeater", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("table1", help="local resources and reach per code")
    _common(p)
    p.add_argument("--q", type=float, default=3e-3)
    p.add_argument("--f-star", type=float, default=0.95)
    p.add_argument("--l0", type=float, default=10.0, help="station spacing in km")
    p.add_argument("--codes", type=_names, default=list(codes.REGISTRY_NAMES))

    p = sub.add_parser("lstar", help="maximum connections L* versus q")
    _common(p)
    p.add_argument("--codes", type=_names, default=list(codes.REGISTRY_NAMES))
    p.add_argument("--q-min", type=float, default=1e-4)
    p.add_argument("--q-max", type=float, default=1e-1)
    p.add_argument("--points", type=_count, default=60)
    p.add_argument("--f-star", type=float, default=0.95)
    p.add_argument("--cap", type=float, default=1e15, help="L* above this is reported as inf")

    p = sub.add_parser("pfail", help="purification failure probability versus raw pairs")
    _common(p)
    p.add_argument("--n", type=_ints, default=[7, 23], help="required purified pairs")
    p.add_argument("--n0", type=_ints, default=None, help="raw pair counts, e.g. 50:400:5")
    p.add_argument("--f0", type=float, default=0.95)
    p.add_argument("--beta", type=float, default=1e-3)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--targets", type=_floats, default=[1e-3, 1e-5, 1e-7, 1e-9])
    p.add_argument("--ratio-n", type=_ints, default=list(range(5, 31)))
    p.add_argument("--ratio-out", type=Path, help="path of the N0/n table (default: <out>.ratio.csv)")

    p = sub.add_parser("simulate", help="Monte Carlo chain versus the analytic model")
    _common(p)
    p.add_argument("--codes", type=_names, default=["repetition-3"])
    p.add_argument("--L", type=_ints, default=[5])
    p.add_argument("--q", type=_floats, default=[0.05], help="sets q_b = q_p")
    p.add_argument("--q-b", type=float, default=None)
    p.add_argument("--q-p", type=float, default=None)
    p.add_argument("--trials", type=_count, default=10**6)
    p.add_argument("--workers", type=_count, default=1)
    p.add_argument("--exact", action="store_true", help="add the exact enumeration where feasible")

    p = sub.add_parser("rate", help="cycle time and key rate")
    _common(p)
    p.add_argument("--code", type=str, default="hamming-7")
    p.add_argument("--l0", type=float, default=10.0)
    p.add_argument("--l-att", type=float, default=20.0)
    p.add_argument("--v", type=float, default=2e5, help="signal speed in km/s")
    p.add_argument("--eta", type=float, default=0.3)
    p.add_argument("--n-eng", type=float, default=None, help="generation qubits (default 4n)")
    p.add_argument("--f0", type=float, default=0.95)
    p.add_argument("--beta", type=float, default=1e-3)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--p-target", type=float, default=1e-5)
    p.add_argument("--L", type=_ints, default=[2, 10, 100, 1000, 10000, 100000])
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise UsageError(f"unknown command {command!r}")


def _dest_actions(sub: argparse.ArgumentParser) -> dict[str, argparse.Action]:
    skip = {"help", "config", "stdout", "out"}
    return {a.dest: a for a in sub._actions if a.dest not in skip and a.option_strings}


def _config_values(text: str, command: str, actions: dict[str, argparse.Action]) -> dict:
    """Typed values from a config file, keys matched case-insensitively."""
    by_key = {dest.lower(): dest for dest in actions}
    values = {}
    for key, raw in parse_config_text(text).items():
        if key == "command":
            continue
        if key not in by_key:
            raise UsageError(f"unknown config key {key!r} for {command}")
        dest = by_key[key]
        values[dest] = _coerce(actions[dest], raw)
    return values


# ---------------------------------------------------------------------------
# config files


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_").lower()] = value
    return values


def _format_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(action: argparse.Action, text: str):
    if isinstance(action, argparse._StoreTrueAction):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if action.type is None:
        return text
    try:
        return action.type(text)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad value for {action.dest}: {text!r} ({exc})") from None


@dataclass
class RunConfig:
    """Fully resolved parameters of one command."""

    command: str
    params: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"command = {self.command}"]
        for key in sorted(self.params):
            value = self.params[key]
            if value is None:
                continue
            lines.append(f"{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        values = parse_config_text(text)
        command = values.pop("command", None)
        if command is None:
            raise UsageError("config has no command line")
        sub = _subparser(build_parser(), command)
        actions = _dest_actions(sub)
        params = {dest: action.default for dest, action in actions.items()}
        params.update(_config_values(text, command, actions))
        return cls(command, params)


def resolve(argv: list[str]) -> tuple[RunConfig, argparse.Namespace]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        sub = _subparser(parser, args.command)
        actions = _dest_actions(sub)
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        sub.set_defaults(**_config_values(text, args.command, actions))
        args = parser.parse_args(argv)
    params = {dest: getattr(args, dest) for dest in _dest_actions(_subparser(parser, args.command))}
    return RunConfig(args.command, params), args


# ---------------------------------------------------------------------------
# CSV


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.5e}"
    if value is None:
        return ""
    return str(value)


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns a list of (suffix, header, rows) tables plus a status


def _code_list(names: list[str]) -> list[codes.CssCodeSpec]:
    if not names:
        raise UsageError("the code list is empty")
    try:
        return [codes.build_code(name) for name in names]
    except codes.UnknownCodeError as exc:
        raise UsageError(str(exc.args[0])) from None


def cmd_table1(p: dict):
    if not 0 < p["f_star"] < 1:
        raise UsageError("--f-star must lie in (0, 1)")
    if not 0 <= p["q"] <= 1:
        raise UsageError("--q must lie in [0, 1]")
    if p["l0"] <= 0:
        raise UsageError("--l0 must be positive")
    header = ["code", "n", "k", "t", "qubits_per_station", "Q", "L_star", "distance_km"]
    rows = []
    for code in _code_list(p["codes"]):
        r = chain.chain_report(code, p["q"], p["f_star"], p["l0"])
        rows.append([r.code, r.n, r.k, r.t, r.qubits_per_station, r.Q, r.L, r.distance_km])
    return [("", header, rows)], EXIT_OK


def cmd_lstar(p: dict):
    if not 0 < p["q_min"] < p["q_max"] <= 1:
        raise UsageError("need 0 < --q-min < --q-max <= 1")
    if not 0 < p["f_star"] < 1:
        raise UsageError("--f-star must lie in (0, 1)")
    grid = np.logspace(np.log10(p["q_min"]), np.log10(p["q_max"]), p["points"])
    header = ["code", "t", "q", "Q", "L_star", "power_law_regime"]
    rows = []
    for code in _code_list(p["codes"]):
        for q in grid:
            Q = chain.logical_error_prob(code.n, code.t, float(q))
            L = chain.max_connections(Q, p["f_star"])
            if L > p["cap"]:
                L = math.inf
            rows.append([code.name, code.t, float(q), Q, L, q < 0.03])
    return [("", header, rows)], EXIT_OK


def _schedule(p: dict):
    try:
        return purification.purification_schedule(p["f0"], p["beta"], p["delta"], p["levels"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_pfail(p: dict):
    sched = _schedule(p)
    r, levels = sched.success, p["levels"]
    if not p["n"]:
        raise UsageError("--n is empty")
    sweep_header = ["n", "N0", "P_fail"]
    sweep = []
    for n in p["n"]:
        n0_values = p["n0"] or list(range(n * 2**levels, 30 * n + 1, max(1, n // 7)))
        for n0 in n0_values:
            sweep.append([n, n0, purification.failure_probability(n0, n, r, levels)])
    ratio_header = ["n", "P_target", "N0_min", "N0_over_n", "kappa"]
    ratios = []
    for target in p["targets"]:
        for n in p["ratio_n"]:
            n0 = purification.required_pairs(n, r, levels, target)
            ratios.append([n, target, n0, n0 / n, 2 * n0 / (4 * n)])
    return [("", sweep_header, sweep), ("ratio", ratio_header, ratios)], EXIT_OK


def _z(empirical: float, predicted: float, trials: int) -> float:
    sigma = math.sqrt(predicted * (1 - predicted) / trials)
    if sigma == 0:
        return 0.0 if empirical == predicted else math.inf
    return (empirical - predicted) / sigma


def cmd_simulate(p: dict, workers: int | None = None):
    code_list = _code_list(p["codes"])
    for code in code_list:
        if not code.decodable:
            raise UsageError(f"code {code.name!r} has no decoder and cannot be simulated")
    if p["q_b"] is not None or p["q_p"] is not None:
        q_b = p["q_b"] if p["q_b"] is not None else p["q_p"]
        q_p = p["q_p"] if p["q_p"] is not None else p["q_b"]
        pairs = [(q_b, q_p)]
    else:
        pairs = [(q, q) for q in p["q"]]
    header = [
        "code", "L", "q_b", "q_p", "trials", "seed",
        "error_free", "error_free_pred", "error_free_z",
        "x_correct", "x_pred", "x_z",
        "z_correct", "z_pred", "z_z",
        "block_error_rate", "exact_error_free",
    ]
    rows, worst = [], 0.0
    for code in code_list:
        for L in p["L"]:
            for q_b, q_p in pairs:
                try:
                    cfg = ChainConfig(code, L, q_b, q_p, p["trials"], p["seed"])
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
                out = simulate_chain(cfg, workers=workers or p["workers"])
                ef, xc, zc = analytic_predictions(code, L, q_b, q_p)
                zs = [
                    _z(out.logical_error_free_fraction, ef, out.trials),
                    _z(out.x_chain_correct_fraction, xc, out.trials),
                    _z(out.z_chain_correct_fraction, zc, out.trials),
                ]
                worst = max(worst, *(abs(z) for z in zs))
                exact = None
                if p["exact"]:
                    try:
                        exact = exact_chain_error(code, L, q_b, q_p)
                    except ValueError:
                        exact = None
                rows.append([
                    code.name, L, q_b, q_p, out.trials, p["seed"],
                    out.logical_error_free_fraction, ef, zs[0],
                    out.x_chain_correct_fraction, xc, zs[1],
                    out.z_chain_correct_fraction, zc, zs[2],
                    out.per_block_error_rate(), exact,
                ])
    status = EXIT_REGRESSION if worst > Z_GATE else EXIT_OK
    return [("", header, rows)], status


def cmd_rate(p: dict):
    try:
        code = codes.build_code(p["code"])
    except codes.UnknownCodeError as exc:
        raise UsageError(str(exc.args[0])) from None
    n = code.n
    n_eng = p["n_eng"] if p["n_eng"] is not None else 4 * n
    try:
        link = purification.LinkParams(p["l0"], p["l_att"], p["v"], p["eta"], n_eng)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sched = _schedule(p)
    n0 = purification.required_pairs(n, sched.success, p["levels"], p["p_target"])
    tau_c, kappa = purification.cycle_time(link, n0)
    rate = purification.key_rate(tau_c)
    header = [
        "code", "n", "L", "distance_km", "N0", "N0_over_n", "kappa", "tau_c_s",
        "purified_fidelity", "raw_rate", "sifted_rate", "reference_rate",
    ]
    rows = []
    for L in p["L"]:
        if L < 1:
            raise UsageError("--L values must be positive")
        reference = link.v_km_s / (link.l0_km * L)
        rows.append([
            code.name, n, L, L * link.l0_km, n0, n0 / n, kappa, tau_c,
            sched.final_fidelity, rate.raw, rate.sifted, reference,
        ])
    return [("", header, rows)], EXIT_OK


COMMANDS = {
    "table1": cmd_table1,
    "lstar": cmd_lstar,
    "pfail": cmd_pfail,
    "simulate": cmd_simulate,
    "rate": cmd_rate,
}


def run(config: RunConfig):
    """Execute a resolved config; returns ``(tables, exit status)``."""
    return COMMANDS[config.command](config.params)


def _output_path(args, suffix: str) -> Path:
    base = args.out or Path(f"{args.command}.csv")
    if not suffix:
        return base
    if suffix == "ratio" and getattr(args, "ratio_out", None):
        return args.ratio_out
    return base.with_name(f"{base.stem}.{suffix}{base.suffix or '.csv'}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config, args = resolve(argv)
        tables, status = run(config)
    except UsageError as exc:
        print(f"qrepeater: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    for i, (suffix, header, rows) in enumerate(tables):
        text = render_csv(header, rows)
        if args.stdout:
            if i:
                sys.stdout.write("\n")
            sys.stdout.write(text)
        else:
            _output_path(args, suffix).write_text(text)
    if status == EXIT_REGRESSION:
        print(f"qrepeater: regression gate failed (|z| > {Z_GATE})", file=sys.stderr)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
