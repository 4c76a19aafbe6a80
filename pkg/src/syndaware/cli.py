"""Command-line frontend.

Every output starts with ``# config: key = value`` lines holding the fully
resolved configuration.  Passing an output file back through ``--config``
re-runs the same computation, and the same seed gives byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import classify_syndromes, ml_normalize
from .codes import CodeError, parse_target, resolve_code
from .fisher import RATIO_COLUMNS, limit_ratio_classical, ratio_row
from .haar import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    AssumptionError,
    fig5_sweep,
    fig6_sweep,
    first_qubit_label,
    lemma1_average,
    prop3_average,
    sample_haar,
    sample_rngs,
    theta_sq_average,
    thm2_ratio,
)
from .noise import (
    EnumerationError,
    enumerate_exact,
    enumerate_leading,
    enumerate_truncated,
    noise_from_name,
)
from .protocols import PROTOCOL_COLUMNS, run_classical, run_quantum
from .surface_mc import SUMMARY_COLUMNS, SURFACE_COLUMNS, run_gap_experiment

EXIT_CONFIG = 2
EXIT_ASSUMPTION = 3
CONFIG_PREFIX = "# config:"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# value parsing


def parse_eta_grid(text: str) -> list[float]:
    """``a..b`` (20 log-spaced points), ``a..b:n`` or a comma list."""
    text = str(text).strip()
    try:
        if ".." in text:
            rng, _, num = text.partition(":")
            lo, hi = (float(x) for x in rng.split(".."))
            n = int(num) if num else 20
            if lo <= 0 or hi <= 0 or n < 1:
                raise ValueError
            return [float(x) for x in np.geomspace(lo, hi, n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad eta grid {text!r}") from None


def parse_int_range(text: str) -> list[int]:
    """``a..b`` inclusive or a comma list."""
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad integer range {text!r}") from None


def parse_count(text) -> int:
    """Integer that may be written as ``1e5``."""
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"bad count {text!r}") from None
    if v != int(v) or v < 1:
        raise ConfigError(f"bad count {text!r}")
    return int(v)


def parse_params(text: str) -> list[tuple[float, float, float]]:
    """Semicolon-separated ``ex,ey,ez`` triples."""
    out = []
    for chunk in str(text).split(";"):
        vals = [float(x) for x in chunk.split(",")]
        if len(vals) != 3:
            raise ConfigError(f"bad channel parameters {chunk!r}")
        out.append(tuple(vals))
    return out


def load_config(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; ``# config:`` header lines are accepted too."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for raw in lines:
        line = raw.strip()
        if line.startswith(CONFIG_PREFIX):
            line = line[len(CONFIG_PREFIX):].strip()
        elif not line or line.startswith("#"):
            continue
        elif "=" not in line:
            # data rows of an output file passed back as a config
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"bad config line {raw!r}")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


# ---------------------------------------------------------------------------
# argument parser

FIELDS = {
    "classical-ratio": ["code", "noise", "eta", "theta", "target", "backend", "w_cut", "z_only"],
    "quantum-ratio": ["blocks", "k", "noise", "n", "seed"],
    "haar": ["check", "k", "n", "seed", "params", "blocks", "noise"],
    "protocol-sim": ["protocol", "code", "noise", "eta", "theta", "target", "n", "reps", "seed",
                     "k", "p", "mode"],
    "surface-gap": ["d", "eta", "shots", "seed", "theta", "min_group_shots"],
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key = value lines")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--threads", type=int, default=None, help="worker threads (output does not depend on it)")

    parser = argparse.ArgumentParser(prog="syndaware", description="Syndrome-aware logical error rates.")
    parser.add_argument("--version", action="version", version=f"syndaware {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("classical-ratio", parents=[common], help="eps^cSynd / eps_i over an eta grid")
    p.add_argument("--code", default="steane", help="catalog name(s), comma separated, or code file")
    p.add_argument("--noise", default="depolarizing")
    p.add_argument("--eta", default="1e-4..1e-1")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--target", default="Z")
    p.add_argument("--backend", choices=["exact", "truncated", "leading"], default="exact")
    p.add_argument("--w-cut", dest="w_cut", type=int, default=None)
    p.add_argument("--z-only", dest="z_only", action="store_true", default=False)

    p = sub.add_parser("quantum-ratio", parents=[common], help="Haar-mean quantum low-error limit ratio")
    p.add_argument("--blocks", default="surface2", help="code name(s), comma separated")
    p.add_argument("--k", default="1..3")
    p.add_argument("--noise", default=None, help="default: bitflip for rep codes, depolarizing otherwise")
    p.add_argument("--n", default=str(DEFAULT_SAMPLES))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("haar", parents=[common], help="Haar-average identities and sweeps")
    p.add_argument("--check", choices=["theta2", "lemma1", "prop3", "thm2", "fig5", "fig6"], default="lemma1")
    p.add_argument("--k", default="1..4")
    p.add_argument("--n", default=str(DEFAULT_SAMPLES))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--params", default="0.5,0,0", help="fig5 channel triples ex,ey,ez separated by ';'")
    p.add_argument("--blocks", default="surface2", help="thm2/fig6 code name(s)")
    p.add_argument("--noise", default=None)

    p = sub.add_parser("protocol-sim", parents=[common], help="estimator variance against Cramer-Rao bounds")
    p.add_argument("--protocol", choices=["agnostic", "csynd", "shuffled", "quantum"], default="csynd")
    p.add_argument("--code", default="rep2")
    p.add_argument("--noise", default="bitflip")
    p.add_argument("--eta", default="0.1")
    p.add_argument("--theta", type=float, default=0.3)
    p.add_argument("--target", default="Z")
    p.add_argument("--n", default="1e5")
    p.add_argument("--reps", default="500")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--k", default="1", help="quantum: logical qubits of the Haar state")
    p.add_argument("--p", type=float, default=0.2, help="quantum: weight of the (I + Q.Q)/2 branch")
    p.add_argument("--mode", choices=["oracle_init", "rough_init"], default="oracle_init")

    p = sub.add_parser("surface-gap", parents=[common], help="complementary-gap Monte Carlo")
    p.add_argument("--d", default="2")
    p.add_argument("--eta", default="0.01")
    p.add_argument("--shots", default="1e6")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--min-group-shots", dest="min_group_shots", type=int, default=0)
    return parser


def resolve_args(argv: list[str] | None) -> argparse.Namespace:
    """Parse, then re-parse with config-file values as defaults for the subcommand."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = load_config(args.config)
        cmd = values.pop("command", args.command)
        if cmd != args.command:
            raise ConfigError(f"config is for {cmd!r}, not {args.command!r}")
        allowed = set(FIELDS[args.command])
        unknown = set(values) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        defaults = {}
        for key, val in values.items():
            if key == "z_only":
                defaults[key] = val.lower() in ("1", "true", "yes")
            elif key in ("theta", "p"):
                defaults[key] = float(val)
            elif key in ("seed", "min_group_shots"):
                defaults[key] = int(val)
            elif key == "w_cut":
                defaults[key] = None if val in ("", "None") else int(val)
            elif key == "noise" and val in ("", "None"):
                defaults[key] = None
            else:
                defaults[key] = val
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def config_items(args: argparse.Namespace) -> list[tuple[str, str]]:
    items = [("command", args.command)]
    for key in FIELDS[args.command]:
        items.append((key, str(getattr(args, key))))
    return items


# ---------------------------------------------------------------------------
# subcommands


def _table(code, noise, backend, w_cut, z_only):
    if backend == "exact":
        return enumerate_exact(code, noise, z_only)
    if backend == "truncated":
        return enumerate_truncated(code, noise, w_cut if w_cut is not None else code.d + 2, z_only)
    return enumerate_leading(code, noise, w_cut, z_only).evaluate(noise.eta)


def cmd_classical_ratio(args) -> tuple[list[str], list[dict]]:
    etas = parse_eta_grid(args.eta)
    rows = []
    for name in [c.strip() for c in args.code.split(",") if c.strip()]:
        code = resolve_code(name)
        i = parse_target(args.target, code.k)
        lead = enumerate_leading(code, noise_from_name(args.noise, etas[0]), z_only=args.z_only)
        limit = limit_ratio_classical(classify_syndromes(lead, i), args.theta)
        for eta in etas:
            table = ml_normalize(_table(code, noise_from_name(args.noise, eta), args.backend,
                                        args.w_cut, args.z_only), i)
            row = ratio_row(table, i, args.theta, limit).as_dict()
            row["code"] = name
            rows.append(row)
    return RATIO_COLUMNS, rows


def cmd_quantum_ratio(args):
    codes = [c.strip() for c in args.blocks.split(",") if c.strip()]
    rows = fig6_sweep(codes, parse_int_range(args.k), parse_count(args.n), args.seed, args.threads, args.noise)
    for r in rows:
        r["expected_even"] = 2.0 ** -(r["k"] + 1) if resolve_code(r["code"]).d % 2 == 0 else ""
    return ["quantity", "code", "k", "mean", "se", "n", "seed", "expected_even"], rows


def cmd_haar(args):
    ks = parse_int_range(args.k)
    n = parse_count(args.n)
    cols = ["quantity", "k", "param", "mean", "se", "n", "seed", "expected"]
    rows = []
    if args.check == "fig5":
        return cols[:-1], fig5_sweep(ks, parse_params(args.params), n, args.seed, args.threads)
    if args.check == "fig6":
        return cmd_quantum_ratio(args)
    for k in ks:
        if args.check == "theta2":
            avg, exp, param = theta_sq_average(k, None, n, args.seed, args.threads), 1.0 / (2**k + 1), "Z"
        elif args.check == "lemma1":
            avg, exp, param = lemma1_average(k, None, None, n, args.seed, args.threads), 2.0 ** -(k + 2), "Z/X"
        elif args.check == "thm2":
            for name in [c.strip() for c in args.blocks.split(",") if c.strip()]:
                avg = thm2_ratio(name, k, n, args.seed, args.noise, args.threads)
                rows.append({"quantity": "thm2_ratio", "k": k, "param": name, "mean": avg.mean, "se": avg.se,
                             "n": n, "seed": args.seed, "expected": 2.0 ** -(k + 1)})
            continue
        else:
            avg = prop3_average(k, None, n, args.seed, args.threads)
            for j, lab in enumerate(avg.labels):
                rows.append({"quantity": "prop3_diag", "k": k, "param": int(lab), "mean": avg.mean[j, j],
                             "se": avg.se[j, j], "n": n, "seed": args.seed, "expected": 2.0 ** -k})
            continue
        rows.append({"quantity": args.check, "k": k, "param": param, "mean": avg.mean, "se": avg.se,
                     "n": n, "seed": args.seed, "expected": exp})
    return cols, rows


def cmd_protocol_sim(args):
    n, reps = parse_count(args.n), parse_count(args.reps)
    if args.protocol == "quantum":
        k = parse_int_range(args.k)[0]
        state = sample_haar(k, sample_rngs(args.seed, 1)[0])
        i = parse_target(args.target, k)
        res = run_quantum(state.theta, args.p, first_qubit_label("X", k), i, n, reps, args.seed,
                          args.mode, label=f"haar_k{k}")
        return PROTOCOL_COLUMNS, [res.as_row()]
    code = resolve_code(args.code)
    i = parse_target(args.target, code.k)
    eta = parse_eta_grid(args.eta)[0]
    table = ml_normalize(enumerate_exact(code, noise_from_name(args.noise, eta)), i)
    res = run_classical(table, i, args.theta, n, reps, args.seed, args.protocol)
    row = res.as_row()
    row["label"] = args.code
    return PROTOCOL_COLUMNS, [row]


def cmd_surface_gap(args):
    rows = []
    summaries = []
    for d in parse_int_range(args.d):
        if d not in (2, 3, 4, 5):
            raise ConfigError("surface-gap supports d in 2..5")
        for eta in parse_eta_grid(args.eta):
            exp = run_gap_experiment(d, eta, parse_count(args.shots), args.seed, args.theta,
                                     args.min_group_shots, args.threads)
            rows += [dict(r, kind="group") for r in exp.rows()]
            summaries.append(dict(exp.summary(), kind="summary"))
    cols = ["kind"] + SURFACE_COLUMNS + [c for c in SUMMARY_COLUMNS if c not in SURFACE_COLUMNS]
    return cols, rows + summaries


COMMANDS = {
    "classical-ratio": cmd_classical_ratio,
    "quantum-ratio": cmd_quantum_ratio,
    "haar": cmd_haar,
    "protocol-sim": cmd_protocol_sim,
    "surface-gap": cmd_surface_gap,
}


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def render(items, columns, rows, fmt: str) -> str:
    if fmt == "json":
        payload = {"config": dict(items), "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows]}
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# syndaware {__version__}\n")
    for key, val in items:
        buf.write(f"{CONFIG_PREFIX} {key} = {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def main(argv: list[str] | None = None) -> int:
    try:
        args = resolve_args(argv)
    except ConfigError as exc:
        print(f"syndaware: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        columns, rows = COMMANDS[args.command](args)
    except AssumptionError as exc:
        print(f"syndaware: assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (ConfigError, CodeError, EnumerationError, KeyError, ValueError) as exc:
        print(f"syndaware: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(config_items(args), columns, rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
