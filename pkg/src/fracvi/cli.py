"""Command-line interface.

Subcommands:

* ``coeffs``   print the fractional coefficient table and its square
* ``run``      integrate a model and emit a ``k,t,x,p,E`` CSV
* ``compare``  run two integrators on one spec, print the max difference
* ``converge`` step-size sweep against a reference, emit a report CSV
* ``oracle``   run one of the reference solutions on the CSV contract

Numeric flags override config-file entries (flat ``key=value`` lines), which
override the model presets.  Floats are printed with 17 significant digits
so identical specs produce byte-identical files.  Exit codes: 0 success,
1 usage or domain error, 2 solver failure (no output file is left behind in
either failure case).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import (
    compare,
    convergence_summary,
    fit_slope,
    global_error,
    write_convergence_csv,
)
from .fracops import Grid, grunwald_coeffs
from .integrators import (
    IntegratorConfig,
    NewtonDiverged,
    Trajectory,
    euler_explicit_run,
    euler_implicit_run,
    fvi_run,
    ham_fvi_run,
    lda_run,
    vi_run,
)
from .models import ExternalForce, MechModel, Quadratic
from .oracles import (
    OscillatorParams,
    SingularMatrix,
    exact_trajectory,
    matrix_oracle_solve,
)

INTEGRATORS = ("fvi", "lda", "vi", "euler-exp", "euler-imp", "ham-fvi",
               "oracle-matrix", "oracle-exact")
MODELS = ("oscillator", "fractional-test", "quadratic")

# Per-model defaults, kept as strings and parsed through the same code path
# as command-line values.
_PRESETS = {
    "oscillator": {
        "alpha": "0.5", "kappa": "0.5", "mass": "1", "c": "1", "rho": "0.2",
        "x0": "1", "p0": "0.5", "h": "0.2", "steps": "150", "force": "",
    },
    "fractional-test": {
        "alpha": "0.75", "kappa": "0.5", "mass": "1", "c": "1", "rho": "1",
        "x0": "0", "p0": "0", "h": "0.05", "steps": "600", "force": "0:1:8",
    },
    "quadratic": {
        "alpha": "0.5", "kappa": "0.5", "mass": "1", "c": "1", "rho": "0",
        "x0": "0", "p0": "0", "h": "0.1", "steps": "100", "force": "",
    },
}
_GLOBALS = {"t0": "0", "newton-tol": "1e-12", "newton-max-iter": "50"}


class CliError(Exception):
    """Usage or domain problem; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


@dataclass(frozen=True)
class RunSpec:
    """Fully resolved description of one integration run."""

    integrator: str
    model: str
    alpha: float
    kappa: float
    mass: np.ndarray
    stiffness: np.ndarray
    damping: np.ndarray
    x0: np.ndarray
    p0: np.ndarray
    h: float
    n_steps: int
    t0: float
    force: ExternalForce | None
    newton_tol: float
    newton_max_iter: int
    kappa_explicit: bool = False


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(part) for part in text.split(",")])
    except ValueError as err:
        raise CliError(f"cannot parse vector {text!r}: {err}") from err


def _parse_force(text: str) -> ExternalForce | None:
    text = text.strip()
    if not text or text.lower() == "none":
        return None
    rows = []
    for chunk in text.split(";"):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise CliError(f"force row {chunk!r} is not of the form t0:t1:value")
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as err:
            raise CliError(f"cannot parse force row {chunk!r}: {err}") from err
    try:
        return ExternalForce(intervals=tuple(rows))
    except ValueError as err:
        raise CliError(str(err)) from err


def _parse_float(name: str, text: str) -> float:
    try:
        return float(text)
    except ValueError as err:
        raise CliError(f"cannot parse --{name} value {text!r}") from err


def _parse_int(name: str, text: str) -> int:
    try:
        return int(text)
    except ValueError as err:
        raise CliError(f"cannot parse --{name} value {text!r}") from err


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as err:
        raise CliError(f"cannot read config file {path}: {err}") from err
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("_", "-")] = value.strip()
    return values


def resolve_spec(args: argparse.Namespace) -> RunSpec:
    """Merge CLI flags, config file and model presets into a RunSpec."""
    model = args.model or "oscillator"
    if model not in MODELS:
        raise CliError(f"unknown model {model!r} (choices: {', '.join(MODELS)})")
    file_cfg = _read_config_file(args.config) if args.config else {}
    merged = dict(_GLOBALS)
    merged.update(_PRESETS[model])
    merged.update(file_cfg)
    explicit = set(file_cfg)

    for flag in ("alpha", "kappa", "rho", "c", "mass", "h", "steps", "x0", "p0",
                 "t0", "force", "newton-tol", "newton-max-iter"):
        attr = flag.replace("-", "_")
        value = getattr(args, attr, None)
        if value is not None:
            merged[flag] = value
            explicit.add(flag)

    mass = _parse_vector(merged["mass"])
    stiffness = np.broadcast_to(_parse_vector(merged["c"]), mass.shape).copy()
    damping = np.broadcast_to(_parse_vector(merged["rho"]), mass.shape).copy()
    x0 = _parse_vector(merged["x0"])
    p0 = _parse_vector(merged["p0"])
    if x0.shape != mass.shape or p0.shape != mass.shape:
        raise CliError("x0, p0 and mass must have matching lengths")
    return RunSpec(
        integrator=getattr(args, "integrator", None) or "fvi",
        model=model,
        alpha=_parse_float("alpha", merged["alpha"]),
        kappa=_parse_float("kappa", merged["kappa"]),
        mass=mass,
        stiffness=stiffness,
        damping=damping,
        x0=x0,
        p0=p0,
        h=_parse_float("h", merged["h"]),
        n_steps=_parse_int("steps", merged["steps"]),
        t0=_parse_float("t0", merged["t0"]),
        force=_parse_force(merged["force"]),
        newton_tol=_parse_float("newton-tol", merged["newton-tol"]),
        newton_max_iter=_parse_int("newton-max-iter", merged["newton-max-iter"]),
        kappa_explicit="kappa" in explicit,
    )


def build_model(spec: RunSpec) -> MechModel:
    return MechModel(
        mass=spec.mass,
        damping=spec.damping,
        potential=Quadratic(c=spec.stiffness),
        force=spec.force,
    )


def build_config(spec: RunSpec, kappa: float | None = None) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            h=spec.h,
            n_steps=spec.n_steps,
            x0=spec.x0,
            p0=spec.p0,
            alpha=spec.alpha,
            kappa=spec.kappa if kappa is None else kappa,
            t0=spec.t0,
            newton_tol=spec.newton_tol,
            newton_max_iter=spec.newton_max_iter,
        )
    except ValueError as err:
        raise CliError(str(err)) from err


_RUNNERS = {
    "fvi": fvi_run,
    "lda": lda_run,
    "vi": vi_run,
    "euler-exp": euler_explicit_run,
    "euler-imp": euler_implicit_run,
    "ham-fvi": ham_fvi_run,
}


def run_trajectory(spec: RunSpec) -> Trajectory:
    """Dispatch one RunSpec to its integrator or oracle."""
    tag = spec.integrator
    if tag not in INTEGRATORS:
        raise CliError(f"unknown integrator {tag!r} (choices: {', '.join(INTEGRATORS)})")
    if tag.startswith("euler") and spec.alpha != 0.5:
        raise CliError(f"{tag} is the classical damping scheme; it requires alpha=0.5")
    if tag == "ham-fvi":
        if spec.kappa_explicit and spec.kappa != 0.0:
            raise CliError("ham-fvi is the kappa=0 scheme; drop --kappa or pass 0")
        return ham_fvi_run(build_model(spec), build_config(spec, kappa=0.0))
    if tag == "oracle-matrix":
        if spec.x0.any() or spec.p0.any():
            raise CliError("oracle-matrix assumes zero initial data; set x0=0, p0=0")
        grid = Grid(t0=spec.t0, h=spec.h, n_steps=spec.n_steps)
        return matrix_oracle_solve(build_model(spec), grid, beta=2.0 * spec.alpha)
    if tag == "oracle-exact":
        return exact_trajectory(
            _oscillator_params(spec), Grid(spec.t0, spec.h, spec.n_steps), spec.force
        )
    return _RUNNERS[tag](build_model(spec), build_config(spec))


def _oscillator_params(spec: RunSpec) -> OscillatorParams:
    if spec.mass.shape != (1,):
        raise CliError("the exact oscillator reference is one-dimensional")
    if spec.alpha != 0.5:
        raise CliError("the exact oscillator reference requires alpha=0.5")
    try:
        return OscillatorParams(
            mass=float(spec.mass[0]),
            stiffness=float(spec.stiffness[0]),
            damping=float(spec.damping[0]),
            x0=float(spec.x0[0]),
            p0=float(spec.p0[0]),
        )
    except ValueError as err:
        raise CliError(str(err)) from err


def format_trajectory_csv(traj: Trajectory) -> str:
    """Render a trajectory on the ``k,t,x,p,E`` contract (LF, 17 digits)."""
    d = traj.dim
    if d == 1:
        header = "k,t,x,p,E"
    else:
        header = "k,t," + ",".join(
            [f"x_{i}" for i in range(d)] + [f"p_{i}" for i in range(d)]
        ) + ",E"
    times = traj.times
    rows = [header]
    for k in range(traj.grid.n_steps + 1):
        cells = [str(k), f"{times[k]:.17g}"]
        cells += [f"{v:.17g}" for v in traj.x[k]]
        cells += [f"{v:.17g}" for v in traj.p[k]]
        cells.append(f"{traj.energy[k]:.17g}")
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Atomically write the CSV so failed runs never leave partial files."""
    text = format_trajectory_csv(traj)
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)


def cmd_coeffs(args: argparse.Namespace) -> int:
    table = grunwald_coeffs(args.alpha, args.n)
    for n, (a, c) in enumerate(zip(table.coeffs, table.squared)):
        print(f"{n}, {a:.17g}, {c:.17g}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    spec = resolve_spec(args)
    if args.plot and not args.out:
        raise CliError("--plot needs --out to name the figure file")
    traj = run_trajectory(spec)
    if args.out:
        write_trajectory_csv(traj, args.out)
        if args.plot:
            from .report import save_trajectory_figure

            figure = Path(args.out).with_suffix(".png")
            save_trajectory_figure(
                [traj], [spec.integrator], figure,
                title=f"{spec.integrator} on {spec.model}",
            )
    else:
        sys.stdout.write(format_trajectory_csv(traj))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    spec = resolve_spec(args)
    a = run_trajectory(replace(spec, integrator=args.integrator_a))
    b = run_trajectory(replace(spec, integrator=args.integrator_b))
    print(f"max_abs_diff={compare(a, b):.17g}")
    return 0


def cmd_converge(args: argparse.Namespace) -> int:
    spec = resolve_spec(args)
    if args.plot and not args.out:
        raise CliError("--plot needs --out to name the figure file")
    h_values = [
        _parse_float("h-list", part) for part in args.h_list.split(",") if part.strip()
    ]
    if len(h_values) < 3:
        raise CliError("--h-list needs at least 3 step sizes")
    t_final = _parse_float("t-final", args.t_final)

    reference = None
    if args.reference == "matrix":
        if spec.x0.any() or spec.p0.any():
            raise CliError("the matrix reference assumes zero initial data")
        ref_h = args.reference_h
        ref_grid = Grid(spec.t0, ref_h, round(t_final / ref_h))
        reference = matrix_oracle_solve(build_model(spec), ref_grid, 2.0 * spec.alpha)

    errors = []
    for h in h_values:
        n = round(t_final / h)
        if n < 2:
            raise CliError(f"step h={h} leaves fewer than 2 steps before t={t_final}")
        run_spec = replace(spec, h=h, n_steps=n)
        traj = run_trajectory(run_spec)
        if args.reference == "exact":
            ref = exact_trajectory(
                _oscillator_params(run_spec), traj.grid, spec.force
            )
        else:
            ref = reference
        try:
            errors.append(global_error(traj, ref, quantity=args.quantity))
        except ValueError as err:
            raise CliError(str(err)) from err

    report = fit_slope(h_values, errors)
    print(convergence_summary(report))
    if args.out:
        write_convergence_csv(report, args.out)
        if args.plot:
            from .report import save_convergence_figure

            save_convergence_figure(
                report, Path(args.out).with_suffix(".png"),
                title=f"{spec.integrator} vs {args.reference} ({args.quantity})",
            )
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    args.integrator = {"matrix": "oracle-matrix", "exact": "oracle-exact"}[args.kind]
    return cmd_run(args)


def _add_spec_flags(parser: argparse.ArgumentParser, with_integrator=True) -> None:
    if with_integrator:
        parser.add_argument("--integrator", choices=INTEGRATORS)
    parser.add_argument("--model", choices=MODELS)
    parser.add_argument("--config", help="flat key=value file; flags override it")
    for flag, help_text in (
        ("--alpha", "half-order of the damping term"),
        ("--kappa", "quadrature weight of the discrete Lagrangian"),
        ("--rho", "damping coefficient(s)"),
        ("--c", "stiffness coefficient(s)"),
        ("--mass", "mass coefficient(s)"),
        ("--h", "time step"),
        ("--steps", "number of steps"),
        ("--x0", "initial position(s), comma-separated"),
        ("--p0", "initial momentum(-a), comma-separated"),
        ("--t0", "start time"),
        ("--force", "piecewise-constant force table t0:t1:value;..."),
        ("--newton-tol", "Newton residual tolerance"),
        ("--newton-max-iter", "Newton iteration cap"),
    ):
        parser.add_argument(flag, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracvi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    coeffs = sub.add_parser("coeffs", help="print the coefficient table")
    coeffs.add_argument("--alpha", type=float, required=True)
    coeffs.add_argument("--n", type=int, required=True, help="largest index")
    coeffs.set_defaults(func=cmd_coeffs)

    run = sub.add_parser("run", help="integrate and write a CSV")
    _add_spec_flags(run)
    run.add_argument("--out", help="output CSV path (stdout when omitted)")
    run.add_argument("--plot", action="store_true", help="also render a figure")
    run.set_defaults(func=cmd_run)

    cmp_parser = sub.add_parser("compare", help="max difference of two integrators")
    _add_spec_flags(cmp_parser, with_integrator=False)
    cmp_parser.add_argument("--integrator-a", required=True, choices=INTEGRATORS)
    cmp_parser.add_argument("--integrator-b", required=True, choices=INTEGRATORS)
    cmp_parser.set_defaults(func=cmd_compare)

    conv = sub.add_parser("converge", help="step-size sweep against a reference")
    _add_spec_flags(conv)
    conv.add_argument("--h-list", required=True, help="comma-separated step sizes")
    conv.add_argument("--t-final", required=True, help="common horizon of the sweep")
    conv.add_argument("--reference", choices=("exact", "matrix"), default="exact")
    conv.add_argument("--reference-h", type=float, default=5e-3,
                      help="step of the matrix reference solve")
    conv.add_argument("--quantity", choices=("x", "p", "energy"), default="x")
    conv.add_argument("--out", help="report CSV path")
    conv.add_argument("--plot", action="store_true", help="also render a figure")
    conv.set_defaults(func=cmd_converge)

    oracle = sub.add_parser("oracle", help="run a reference solution")
    _add_spec_flags(oracle, with_integrator=False)
    oracle.add_argument("--kind", choices=("matrix", "exact"), required=True)
    oracle.add_argument("--out", help="output CSV path (stdout when omitted)")
    oracle.add_argument("--plot", action="store_true", help="also render a figure")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except NewtonDiverged as err:
        where = "" if err.step is None else f" at step {err.step}"
        print(f"solver failure{where}: {err}", file=sys.stderr)
        return 2
    except SingularMatrix as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
