"""Command-line front end.

Subcommands
-----------
``run``             evolve a configured scenario, write CSV diagnostics,
                    snapshots and figures
``convergence``     repeat a scenario on a dt-halving ladder, print orders
``check-products``  decide every exponent matrix of a fixture file
``check-symbols``   sample the null symbols against their explicit bounds
``probe``           random-field bilinear probe of one exponent matrix

Exit status: 0 success, 1 check failure, 2 configuration or parse error,
3 constraint violation, 4 blow-up, 5 snapshot error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .config import SNAPSHOT_PRESET, ScenarioConfig, load_config
from .dynamics import IntegratorConfig, evolve
from .errors import (
    BlowUpError,
    ConfigurationError,
    ConstraintError,
    FixtureParseError,
    SnapshotError,
)
from .estimates.products import bundled_fixture, is_product, load_fixture, parse_matrix
from .estimates.symbols import check_symbol_bounds
from .estimates.wave_sobolev import bilinear_probe
from .gauge_data import HalfWaveState, build_potential_data, reconstruct_hat, split_half_waves
from .grid import make_grid
from .observables import CSV_HEADER, DiagnosticsRecord, constraint_residuals
from .presets import make_preset
from .snapshot import read_snapshot, write_snapshot

__all__ = ["main", "build_parser", "initial_state", "run_scenario", "RunResult", "convergence_ladder"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_CONSTRAINT = 3
EXIT_BLOWUP = 4
EXIT_SNAPSHOT = 5

# Residual level, relative to max(1, energy), above which a resumed snapshot
# is refused as constraint violating.
SNAPSHOT_CONSTRAINT_TOL = 1e-6


def initial_state(cfg: ScenarioConfig) -> HalfWaveState:
    """Half-wave state at the start of a run.

    Raises
    ------
    ConstraintError
        Preset data violating the Gauss law or charge neutrality, or a
        snapshot whose constraint residuals are too large.
    SnapshotError
        Unreadable snapshot.
    """
    if cfg.preset == SNAPSHOT_PRESET:
        state = read_snapshot(cfg.snapshot_in)
        rec = constraint_residuals(state)
        scale = max(1.0, abs(rec.energy))
        for name in ("gauss_res", "lorenz_res", "divB_res"):
            if getattr(rec, name) > SNAPSHOT_CONSTRAINT_TOL * scale:
                raise ConstraintError(f"snapshot violates a constraint: {name} = {getattr(rec, name):.3e}")
        return state
    grid = make_grid(cfg.n, cfg.L)
    cd = make_preset(cfg.preset, grid, cfg.m, **cfg.preset_kwargs())
    return split_half_waves(cd, build_potential_data(cd), validate=True)


@dataclass
class RunResult:
    """Artifacts and summary of :func:`run_scenario`."""

    records: list[DiagnosticsRecord]
    state: HalfWaveState
    steps: int
    csv_path: Path
    snapshots: list[Path] = field(default_factory=list)
    figures: list[Path] = field(default_factory=list)


class _Recorder:
    """Evolution callback writing CSV rows and snapshots as the run proceeds."""

    def __init__(self, cfg: ScenarioConfig, writer, t_end: float):
        self.cfg = cfg
        self.writer = writer
        self.t_end = t_end
        self.calls = 0
        self.records: list[DiagnosticsRecord] = []
        self.snapshots: list[Path] = []

    def _snapshot(self, state: HalfWaveState, step: int) -> None:
        path = Path(self.cfg.snapshot_out.format(step=step))
        write_snapshot(path, state)
        if path not in self.snapshots:
            self.snapshots.append(path)

    def __call__(self, state: HalfWaveState) -> None:
        step = self.calls
        self.calls += 1
        final = state.t == self.t_end
        if step % self.cfg.cadence == 0 or final:
            rec = constraint_residuals(state)
            self.records.append(rec)
            self.writer.writerow(rec.as_row())
        if self.cfg.snapshot_out:
            every = self.cfg.snapshot_cadence
            if final or (every and step > 0 and step % every == 0):
                self._snapshot(state, step)


def run_scenario(cfg: ScenarioConfig, log: Callable[[str], None] | None = None) -> RunResult:
    """Evolve the scenario described by ``cfg`` and write its artifacts.

    Diagnostics are written to ``cfg.csv`` one row per ``cfg.cadence`` steps
    plus the final state; rows already written survive a blow-up.

    Raises
    ------
    ConstraintError, SnapshotError, BlowUpError, ConfigurationError
    """
    log = log or (lambda msg: None)
    state = initial_state(cfg)
    t_end = state.t + cfg.T
    integ = IntegratorConfig(dt=cfg.dt, nonlinearity_form=cfg.nonlinearity_form)
    csv_path = Path(cfg.csv)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        rec = _Recorder(cfg, writer, t_end)
        traj = evolve(state, cfg.T, integ, callback=rec, cadence=1, regauge_at=cfg.regauge_at)
    figures = []
    if cfg.plots:
        from .plotting import plot_diagnostics

        figures = plot_diagnostics(csv_path)
    r0, r1 = rec.records[0], rec.records[-1]
    drift = (r1.energy - r0.energy) / r0.energy if r0.energy else math.nan
    log(f"steps: {traj.steps}, t = {r1.t:.6g}, relative energy drift = {drift:.3e}")
    log(f"diagnostics: {csv_path}")
    for p in rec.snapshots + figures:
        log(f"wrote {p}")
    return RunResult(rec.records, traj.state, traj.steps, csv_path, rec.snapshots, figures)


@dataclass
class LadderLevel:
    dt: float
    state: HalfWaveState
    energy_drift: float
    lorenz_max: float


def convergence_ladder(cfg: ScenarioConfig, levels: int = 3) -> list[LadderLevel]:
    """Run ``cfg`` with ``dt, dt/2, ...`` and keep final states and drifts."""
    state0 = initial_state(cfg)
    out = []
    for k in range(levels):
        dt = cfg.dt / 2**k
        integ = IntegratorConfig(dt=dt, nonlinearity_form=cfg.nonlinearity_form)
        traj = evolve(state0, cfg.T, integ, callback=constraint_residuals, cadence=max(1, 2**k * cfg.cadence))
        e0 = traj.records[0].energy
        drift = max(abs(r.energy - e0) for r in traj.records) / abs(e0)
        lorenz = max(r.lorenz_res for r in traj.records)
        out.append(LadderLevel(dt, traj.state, drift, lorenz))
    return out


def _phi_difference(a: HalfWaveState, b: HalfWaveState) -> float:
    return a.grid.l2_norm_hat(reconstruct_hat(a)[0] - reconstruct_hat(b)[0])


def format_ladder(levels: list[LadderLevel]) -> str:
    lines = [f"{'dt':>12} {'energy drift':>14} {'drift order':>12} {'phi change':>12} {'self order':>11}"]
    diffs = [None] + [_phi_difference(levels[i - 1].state, levels[i].state) for i in range(1, len(levels))]
    for i, lv in enumerate(levels):
        d_order = ""
        if i > 0 and lv.energy_drift > 0 and levels[i - 1].energy_drift > 0:
            d_order = f"{math.log2(levels[i - 1].energy_drift / lv.energy_drift):.3f}"
        s_order = ""
        if i > 1 and diffs[i] and diffs[i - 1]:
            s_order = f"{math.log2(diffs[i - 1] / diffs[i]):.3f}"
        change = "" if diffs[i] is None else f"{diffs[i]:.3e}"
        lines.append(f"{lv.dt:>12.4e} {lv.energy_drift:>14.3e} {d_order:>12} {change:>12} {s_order:>11}")
    return "\n".join(lines)


# ------------------------------------------------------------ subcommands


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _cmd_run(args, out) -> int:
    cfg = _load(args)
    log = (lambda msg: None) if args.quiet else out
    run_scenario(cfg, log=log)
    return EXIT_OK


def _cmd_convergence(args, out) -> int:
    cfg = _load(args)
    levels = convergence_ladder(cfg, args.levels)
    out(format_ladder(levels))
    return EXIT_OK


def _cmd_check_products(args, out) -> int:
    path = args.fixture or bundled_fixture("known_products")
    entries = load_fixture(path)
    failures = 0
    if not args.quiet:
        out(f"{'line':>5}  {'matrix':<44} {'verdict':<13} violated")
    for e in entries:
        rep = is_product(e.matrix)
        expected = e.expected
        if expected is None:
            ok = rep.accepted
        else:
            ok = rep.verdict == "rejected" and expected in rep.violated
        flag = "" if ok else "  <-- unexpected"
        failures += not ok
        if not args.quiet or not ok:
            violated = ",".join(rep.violated) or "-"
            out(f"{e.line:>5}  {str(e.matrix):<44} {rep.verdict:<13} {violated}{flag}")
    if not args.quiet:
        out(f"{len(entries)} matrices, {failures} unexpected")
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def _cmd_check_symbols(args, out) -> int:
    seed = 0 if args.seed is None else args.seed
    total = 0
    for m in args.m:
        rep = check_symbol_bounds(m, args.count, seed=seed)
        total += rep.total_violations
        out(rep.format() if not args.quiet else f"m = {m:g}: {rep.total_violations} violations")
    return EXIT_CHECK_FAILED if total else EXIT_OK


def _cmd_probe(args, out) -> int:
    M = parse_matrix(args.matrix)
    sizes = tuple(int(v) for v in args.sizes.replace(",", " ").split())
    seed = 0 if args.seed is None else args.seed
    rep = bilinear_probe(M, trials=args.trials, sizes=sizes, seed=seed)
    out(rep.format())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed override")
    common.add_argument("--quiet", action="store_true", help="print only essential output")

    parser = argparse.ArgumentParser(prog="mkg", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="evolve a configured scenario")
    p.add_argument("--config", required=True, type=Path, help="scenario file (key = value lines)")
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("convergence", parents=[common], help="dt-halving ladder with observed orders")
    p.add_argument("--config", required=True, type=Path, help="scenario file; time.dt is the coarsest step")
    p.add_argument("--levels", type=int, default=3, help="number of step sizes (default 3)")
    p.set_defaults(handler=_cmd_convergence)

    p = sub.add_parser("check-products", parents=[common], help="decide exponent matrices of a fixture file")
    p.add_argument("fixture", nargs="?", type=Path, default=None, help="fixture file (default: bundled set)")
    p.set_defaults(handler=_cmd_check_products)

    p = sub.add_parser("check-symbols", parents=[common], help="test null symbols against their bounds")
    p.add_argument("--m", type=float, nargs="+", default=[0.0, 1.0], help="masses to test (default 0 1)")
    p.add_argument("--count", type=int, default=100_000, help="samples per sign pair")
    p.set_defaults(handler=_cmd_check_symbols)

    p = sub.add_parser("probe", parents=[common], help="bilinear probe of one exponent matrix")
    p.add_argument("--matrix", required=True, help='six rationals "s0 s1 s2 b0 b1 b2"')
    p.add_argument("--trials", type=int, default=1000, help="random field pairs per grid size")
    p.add_argument("--sizes", default="8,12,16", help="comma-separated space-time grid sizes")
    p.set_defaults(handler=_cmd_probe)
    return parser


def main(argv=None, out: Callable[[str], None] | None = None) -> int:
    """Entry point; returns the process exit status."""
    out = out or print
    err = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args, out)
    except (ConfigurationError, FixtureParseError) as exc:
        err(f"error: {exc}")
        return EXIT_CONFIG
    except ConstraintError as exc:
        err(f"constraint error: {exc}")
        return EXIT_CONSTRAINT
    except BlowUpError as exc:
        err(f"blow-up: {exc}")
        return EXIT_BLOWUP
    except SnapshotError as exc:
        err(f"snapshot error: {exc}")
        return EXIT_SNAPSHOT


if __name__ == "__main__":
    sys.exit(main())
