"""Command-line front end.

Subcommands: ``operators``, ``simulate``, ``limits``, ``scan``.
Exit status: 0 success, 1 validation error, 2 limit-check failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dynamics import propagate
from .limits import CASES, crossover_scan, verify_limits
from .liouville import multi_site_vector
from .operators import ChannelRates, liouvillian

EXIT_OK, EXIT_INVALID, EXIT_LIMIT_FAIL = 0, 1, 2

CSV_HEADER = "t,rho_SS,re_rho_ST,im_rho_ST,rho_TT,purity,yield_S,yield_T"


def _g(x: float) -> str:
    return f"{x:.17g}"


def format_matrix(M: np.ndarray) -> str:
    """Aligned plain-text rendering; complex entries only when needed."""
    M = np.asarray(M, dtype=complex) + 0.0  # drop negative zeros
    if np.all(M.imag == 0):
        return "\n".join("".join(f"{x:>12.6g}" for x in row.real) for row in M)
    return "\n".join("".join(f"{f'{z.real:.6g}{z.imag:+.6g}j':>26}" for z in row) for row in M)


def _matrix_record(name: str, M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex) + 0.0
    return {"name": name, "shape": list(M.shape), "real": M.real.tolist(), "imag": M.imag.tolist()}


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output {path}: {exc.strerror}") from None


def cmd_operators(cfg: RunConfig, out: str | None = None, as_json: bool = False) -> int:
    ops = cfg.kinetic_operators()
    H = cfg.hamiltonian
    if np.any(H != 0):
        ops = {**ops, **{f"{name}+H": liouvillian(K, H) for name, K in list(ops.items())}}
    records = [_matrix_record(name, M) for name, M in ops.items()]
    doc = json.dumps({"kind": cfg.kind, "operators": records}, indent=2) + "\n"
    if as_json:
        sys.stdout.write(doc)
    else:
        for name, M in ops.items():
            sys.stdout.write(f"# {name} ({M.shape[0]}x{M.shape[1]})\n{format_matrix(M)}\n")
    if out is not None:
        _write(doc, out)
    return EXIT_OK


def simulate(cfg: RunConfig):
    """Trajectory for a configuration; the library call behind ``simulate``."""
    if cfg.kind == "single":
        K = cfg.kinetic_operators()[cfg.operator if cfg.operator != "both" else "haberkorn"]
        channels = [ChannelRates(cfg.rates["kS"], cfg.rates["kT"])]
        dist = [1.0]
    else:
        scheme = cfg.scheme()
        K = cfg.kinetic_operators()[cfg.kind]
        channels = scheme.channels
        dist = scheme.initial_distribution
    V = liouvillian(K, cfg.hamiltonian)
    v0 = multi_site_vector(cfg.spin_state.density(), dist)
    return propagate(V, v0, cfg.times(), channels=channels)


def trajectory_csv(traj) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for k, t in enumerate(traj.times):
        rho = traj.states[k]
        row = (t, rho[0, 0].real, rho[0, 1].real, rho[0, 1].imag, rho[1, 1].real, traj.purity[k],
               traj.product_singlet[k], traj.product_triplet[k])
        buf.write(",".join(_g(x) for x in row) + "\n")
    return buf.getvalue()


def cmd_simulate(cfg: RunConfig, out: str | None = None) -> int:
    traj = simulate(cfg)
    _write(trajectory_csv(traj), out or cfg.output)
    return EXIT_OK


def cmd_limits(cfg: RunConfig, cases=None, out: str | None = None) -> int:
    results = verify_limits(factor=cfg.factor, tol=cfg.tol, cases=cases or CASES)
    lines = [f"limit checks (separation factor {cfg.factor:g}, tolerance {cfg.tol:g})",
             f"{'case':<5}{'predicted':>14}{'fitted':>14}{'rel_err':>12}  result  description"]
    for r in results:
        lines.append(f"{r.case:<5}{r.predicted:>14.6g}{r.fitted:>14.6g}{r.rel_err:>12.3g}  "
                     f"{'PASS' if r.passed else 'FAIL':<6}  {r.description}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} cases pass")
    machine = "case,predicted,fitted,rel_err,pass\n" + "".join(r.csv_line() + "\n" for r in results)
    sys.stdout.write("\n".join(lines) + "\n")
    if out is None:
        sys.stdout.write("\n" + machine)
    else:
        _write(machine, out)
    return EXIT_OK if n_pass == len(results) else EXIT_LIMIT_FAIL


def cmd_scan(cfg: RunConfig, out: str | None = None, workers: int = 1) -> int:
    points = crossover_scan(cfg.scan_ratios, k12=cfg.scan_k12, k21=cfg.scan_k21, workers=workers)
    text = "ratio,dephasing_ratio\n" + "".join(f"{_g(p.ratio)},{_g(p.dephasing_ratio)}\n" for p in points)
    _write(text, out or cfg.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI-style run configuration")
    common.add_argument("--out", help="output path (default: stdout or [output] path)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config value (repeatable)")
    common.add_argument("--factor", type=float, help="separation factor used for '>>' in limit checks")
    common.add_argument("--tol", type=float, help="relative tolerance for limit checks")

    parser = argparse.ArgumentParser(prog="spinreact", description="Radical-pair reaction superoperators")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("operators", parents=[common], help="print assembled superoperators")
    p.add_argument("--json", action="store_true", help="write structured JSON to stdout instead of text")
    sub.add_parser("simulate", parents=[common], help="propagate and write a trajectory CSV")
    p = sub.add_parser("limits", parents=[common], help="verify the limiting-case reductions")
    p.add_argument("--case", action="append", choices=CASES, help="run only this case (repeatable)")
    p = sub.add_parser("scan", parents=[common], help="dephasing-ratio crossover scan")
    p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.factor is not None:
        overrides.append(f"limits.factor={args.factor!r}")
    if args.tol is not None:
        overrides.append(f"limits.tol={args.tol!r}")
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "operators":
            return cmd_operators(cfg, args.out, args.json)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out)
        if args.command == "limits":
            return cmd_limits(cfg, args.case, args.out)
        return cmd_scan(cfg, args.out, args.workers)
    except ConfigError as exc:
        print(f"spinreact: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"spinreact: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
