"""Command-line harness.

Subcommands:

    classify   spectral + isolation verdict for one spin
    certify    isolation verdict only
    witness    table of exact level-set solutions near the equilibrium
    simulate   one perturbed trajectory to CSV
    sweep      one CSV row per spin across a list/range of spins

Exit codes: 0 stable/isolated/success, 1 usage or input error,
2 unstable (classify), not isolated (certify), or isolated when
witnesses were requested.  Parameters come from flags, optionally
seeded by a flat ``key = value`` config file; flags win.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .core import TopParams, equilibrium, margin_tolerance
from .experiment import (
    ExperimentConfig,
    format_float,
    run_single,
    run_sweep,
    write_sweep_csv,
)
from .integrate import (
    IntegrationBlowupError,
    IntegrationConfig,
    drift_report,
    write_trajectory_csv,
)
from .levelset import certify_isolation, level_residuals
from .linear import classify_spectral

__all__ = ["main", "build_parser", "load_config", "parse_value_list"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2

CONFIG_KEYS = {
    "A", "C", "m", "g", "z",
    "m3", "step", "n_steps", "perturbation", "seed", "output",
}

_DEFAULTS = {
    "A": 1.0,
    "C": 1.0,
    "m": 1.0,
    "g": 1.0,
    "z": 1.0,
    "step": 1e-3,
    "n_steps": 200_000,
    "perturbation": 1e-4,
    "seed": 0,
    "record_every": 10,
}

WITNESS_CSV_HEADER = "gamma3,M1,M2,M3,g1,g2,g3,res_H,res_C1,res_C2,res_F,distance"


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the CLI contract
    reserves 2 for 'unstable', so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_value_list(tokens) -> list[float]:
    """Expand a list of CLI value tokens; each is a number or an
    inclusive range ``a:b:step``."""
    out: list[float] = []
    for tok in tokens:
        tok = str(tok).strip()
        if ":" in tok:
            parts = tok.split(":")
            if len(parts) != 3:
                raise ValueError(f"bad range spec {tok!r}; expected a:b:step")
            a, b, step = (float(p) for p in parts)
            if not (step > 0.0 and math.isfinite(step)):
                raise ValueError(f"range step must be > 0 in {tok!r}")
            if b < a:
                raise ValueError(f"empty range {tok!r}")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            out.extend(a + i * step for i in range(n))
        else:
            out.append(float(tok))
    return out


def load_config(path) -> dict[str, str]:
    """Read a flat ``key = value`` config file; '#' starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ValueError(f"cannot read config {path}: {e}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


class _Resolved:
    """Flag > config > default resolution for one invocation."""

    def __init__(self, args):
        self.cfg = load_config(args.config) if getattr(args, "config", None) else {}
        self.args = args

    def _pick(self, name, convert, key=None):
        key = key or name
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if key in self.cfg:
            try:
                return convert(self.cfg[key])
            except ValueError:
                raise ValueError(f"config key {key!r}: bad value {self.cfg[key]!r}")
        return _DEFAULTS.get(name)

    def params(self) -> TopParams:
        return TopParams(
            A=self._pick("A", float),
            C=self._pick("C", float),
            m=self._pick("m", float),
            g=self._pick("g", float),
            z=self._pick("z", float),
        )

    def m3_values(self) -> list[float]:
        tokens = self.args.m3
        if tokens is None and "m3" in self.cfg:
            tokens = [self.cfg["m3"]]
        if not tokens:
            raise ValueError("no m3 given (use --m3 or the config file)")
        return parse_value_list(tokens)

    def single_m3(self) -> float:
        values = self.m3_values()
        if len(values) != 1:
            raise ValueError(f"exactly one m3 required, got {len(values)}")
        return values[0]

    def integration(self) -> IntegrationConfig:
        return IntegrationConfig(
            step=self._pick("step", float),
            n_steps=self._pick("n_steps", int),
            project_gamma=bool(getattr(self.args, "project_gamma", False)),
            record_every=self._pick("record_every", int),
        )

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            params=self.params(),
            m3_values=tuple(self.m3_values()),
            perturbation=self._pick("perturbation", float),
            integration=self.integration(),
            seed=self._pick("seed", int),
            output_path=self.out_path(required=False),
        )

    def out_path(self, required=True):
        path = getattr(self.args, "out", None)
        if path is None and "output" in self.cfg:
            path = Path(self.cfg["output"])
        if path is None and required:
            raise ValueError("no output path (use --out or 'output' in the config)")
        return path


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _verdict_line(stable: bool, margin: float, tol: float) -> str:
    if stable and abs(margin) <= tol:
        return "STABLE (boundary)"
    return "STABLE" if stable else "UNSTABLE"


def cmd_classify(args) -> int:
    r = _Resolved(args)
    params = r.params()
    m3 = r.single_m3()
    report = classify_spectral(params, m3)
    cert = certify_isolation(params, m3)
    eigs = ", ".join(f"{lam:.12g}" for lam in report.eigenvalues)
    print(f"M3 = {_fmt(m3)}")
    print(f"threshold = {_fmt(report.threshold)}")
    print(f"margin = {_fmt(report.margin)}")
    print(f"eigenvalues = {eigs}")
    print(f"growth_rate = {_fmt(report.growth_rate)}")
    print(f"spectral: {report.verdict}")
    print(f"isolation: {cert.verdict}")
    print(f"verdict: {_verdict_line(report.stable, report.margin, margin_tolerance(params, m3))}")
    return EXIT_OK if report.stable else EXIT_UNSTABLE


def cmd_certify(args) -> int:
    r = _Resolved(args)
    params = r.params()
    m3 = r.single_m3()
    cert = certify_isolation(params, m3)
    print(f"M3 = {_fmt(m3)}")
    print(f"threshold = {_fmt(cert.threshold)}")
    print(f"margin = {_fmt(cert.margin)}")
    print(f"isolation: {cert.verdict}")
    if cert.witness_family is not None:
        print(f"witnesses exist for gamma3 in [{_fmt(cert.witness_family.gamma3_min)}, 1)")
    return EXIT_OK if cert.isolated else EXIT_UNSTABLE


def cmd_witness(args) -> int:
    r = _Resolved(args)
    params = r.params()
    m3 = r.single_m3()
    cert = certify_isolation(params, m3)
    if cert.isolated:
        print(
            f"equilibrium is isolated (margin = {_fmt(cert.margin)} >= 0); "
            "no witnesses exist"
        )
        return EXIT_UNSTABLE
    family = cert.witness_family
    gamma3_values = parse_value_list(args.gamma3) if args.gamma3 else [0.9, 0.99, 0.999]

    print(f"witness solutions for M3 = {_fmt(m3)} "
          f"(gamma3 domain [{_fmt(family.gamma3_min)}, 1)):")
    header = WITNESS_CSV_HEADER.split(",")
    print("  ".join(f"{h:>11s}" for h in header))
    csv_rows = []
    for g3 in gamma3_values:
        try:
            state = family(g3)
        except ValueError:
            print(f"{g3:>11.6g}  ERROR: outside [{_fmt(family.gamma3_min)}, 1)")
            continue
        res = level_residuals(params, m3, state)
        dist = state.distance_to(equilibrium(m3))
        row = [g3, *state.as_array(), *res, dist]
        print("  ".join(f"{x:>11.4g}" for x in row))
        csv_rows.append(row)

    out = r.out_path(required=False)
    if out is not None:
        with open(out, "w", newline="") as f:
            f.write(WITNESS_CSV_HEADER + "\n")
            for row in csv_rows:
                f.write(",".join(format_float(x) for x in row) + "\n")
        print(f"wrote {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    r = _Resolved(args)
    config = r.experiment()
    m3 = r.single_m3()
    out = r.out_path()
    try:
        initial, traj = run_single(config, m3)
    except IntegrationBlowupError as e:
        print(f"integration blew up at step {e.step} (non-finite state)", file=sys.stderr)
        return EXIT_USAGE
    try:
        write_trajectory_csv(traj, out)
    except OSError as e:
        print(f"cannot write {out}: {e}", file=sys.stderr)
        return EXIT_USAGE
    rep = drift_report(traj)
    print(f"wrote {out} ({len(traj)} samples)")
    print(
        f"max drift: dH={rep.H:.3e} dC1={rep.C1:.3e} "
        f"dC2={rep.C2:.3e} dF={rep.F:.3e}"
    )
    if args.plot:
        from .plots import figure_path_for, trajectory_figure

        fig = trajectory_figure(traj, reference=equilibrium(m3))
        fig_path = figure_path_for(out)
        fig.savefig(fig_path, dpi=150)
        print(f"wrote {fig_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    r = _Resolved(args)
    config = r.experiment()
    out = r.out_path()
    rows = run_sweep(config)
    try:
        write_sweep_csv(rows, out)
    except OSError as e:
        print(f"cannot write {out}: {e}", file=sys.stderr)
        return EXIT_USAGE
    for row in rows:
        measured = "" if row.growth_rate_measured is None else f"{row.growth_rate_measured:.6g}"
        print(
            f"m3={row.m3:<10.6g} {row.spectral_verdict:<9s} "
            f"margin={row.threshold_margin:<12.6g} "
            f"growth predicted={row.growth_rate_predicted:.6g} measured={measured}"
        )
    print(f"wrote {out} ({len(rows)} rows)")
    if args.plot:
        from .plots import figure_path_for, sweep_figure

        fig = sweep_figure(rows, config.params.critical_spin())
        fig_path = figure_path_for(out)
        fig.savefig(fig_path, dpi=150)
        print(f"wrote {fig_path}")
    return EXIT_OK


def _add_param_flags(p):
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--A", type=float, help="transverse moment of inertia [kg m^2]")
    p.add_argument("--C", type=float, help="axial moment of inertia [kg m^2]")
    p.add_argument("--m", type=float, help="mass [kg]")
    p.add_argument("--g", type=float, help="gravitational acceleration [m/s^2]")
    p.add_argument("--z", type=float, help="fixed point to center of gravity [m]")
    p.add_argument(
        "--m3",
        action="append",
        metavar="VALUE|A:B:STEP",
        help="axial momentum; repeatable, or an inclusive range a:b:step",
    )


def _add_run_flags(p):
    p.add_argument("--perturbation", type=float, help="transverse kick size (0 = none)")
    p.add_argument("--step", type=float, help="integration time step [s]")
    p.add_argument("--n-steps", dest="n_steps", type=int, help="number of RK4 steps")
    p.add_argument("--record-every", dest="record_every", type=int,
                   help="record every k-th step (default 10)")
    p.add_argument("--seed", type=int, help="seed for perturbation directions")
    p.add_argument("--project-gamma", dest="project_gamma", action="store_true",
                   help="renormalize gamma after every step")
    p.add_argument("--out", type=Path, help="output CSV path")
    p.add_argument("--plot", action="store_true",
                   help="also render a PNG figure next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sleepingtop",
        description="Stability of the vertical rotation of a symmetric heavy top.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="spectral + isolation verdict for one spin")
    _add_param_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("certify", help="level-set isolation verdict for one spin")
    _add_param_flags(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("witness", help="exact nontrivial level-set solutions")
    _add_param_flags(p)
    p.add_argument(
        "--gamma3",
        action="append",
        metavar="VALUE|A:B:STEP",
        help="gamma3 values for the witnesses (default 0.9 0.99 0.999)",
    )
    p.add_argument("--out", type=Path, help="also write the table as CSV")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("simulate", help="integrate one perturbed trajectory to CSV")
    _add_param_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="classify + integrate across several spins")
    _add_param_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
