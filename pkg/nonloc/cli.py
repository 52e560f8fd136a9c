# command-line front end: moments, profiles, variances and sweeps as CSV or JSON

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from nonloc.quadrature import QuadratureSpec
from nonloc.transform_core import (
    C0_DEFAULT,
    C0_RANGE,
    DEFAULT_R_MIN,
    PacketSpec,
    TransformKind,
    default_r_grid,
    gaussian_profile,
    moment,
    s0_profile,
    sz_profile,
    t0_profile,
    tz_profile,
)
from nonloc.variance import (
    GRID_AGREEMENT,
    SWEEP_POINTS,
    default_d_grid,
    variance_closed,
    variance_oracle_result,
    variance_sweep,
)
from shared.exceptions import DomainError, GridResolutionError, QuadratureError, ToleranceBreachError
from shared.util import format_number, get_message

COMMANDS = ("moments", "profile", "variance", "sweep")
DEFAULT_TOL = {"moments": 1e-6, "profile": 1e-10, "variance": GRID_AGREEMENT, "sweep": 1e-10}
DEFAULT_POINTS = {"profile": 300, "sweep": SWEEP_POINTS}
PROFILE_COLUMNS = ["r", "f", "2T0", "S0", "2Tz", "Sz"]
SWEEP_COLUMNS = ["d", "V_MO/d^2", "V_FW/d^2", "1.5"]
SMALL_WIDTH_LIMIT = 3.5
GAUSSIAN_LIMIT = 1.5
ENDPOINT_TOLERANCE = 0.01

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    transform: str = "both"
    d: float = 1.0
    r_max: float = 6.0
    points: int = 300
    format: str = "csv"
    tol: float = 1e-10
    output_path: Optional[str] = None
    c0: float = C0_DEFAULT

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.points < 2:
            raise DomainError(f"--points must be >= 2, got {self.points}")
        if not (self.r_max > DEFAULT_R_MIN and math.isfinite(self.r_max)):
            raise DomainError(f"--rmax must be finite and exceed {DEFAULT_R_MIN}, got {self.r_max}")
        if not self.tol > 0:
            raise DomainError(f"--tol must be positive, got {self.tol}")
        if not (self.d > 0 and math.isfinite(self.d)):
            raise DomainError(f"--d must be positive, got {self.d}")
        if not C0_RANGE[0] <= self.c0 <= C0_RANGE[1]:
            raise DomainError(f"--c0 must lie in [{C0_RANGE[0]}, {C0_RANGE[1]}], got {self.c0}")

    @classmethod
    def from_args(cls, args):
        return cls(
            command=args.command,
            transform=args.transform,
            d=args.d,
            r_max=args.rmax,
            points=args.points if args.points is not None else DEFAULT_POINTS.get(args.command, 300),
            format=args.format,
            tol=args.tol if args.tol is not None else DEFAULT_TOL[args.command],
            output_path=args.out,
            c0=args.c0,
        )

    @property
    def transforms(self):
        if self.transform == "both":
            return [TransformKind.FW, TransformKind.MO]
        return [TransformKind(self.transform)]

    @property
    def quadrature_spec(self):
        return QuadratureSpec(abs_tol=self.tol, rel_tol=self.tol)

##########################################################
# OUTPUT
##########################################################

def _cell(value):
    return value if isinstance(value, str) else format_number(value)


def render(cfg, columns, rows):
    """CSV or JSON text with every number at 12 significant digits."""
    cells = [[_cell(v) for v in row] for row in rows]
    if cfg.format == "json":
        payload = {
            "config": asdict(cfg),
            "columns": list(columns),
            "rows": [[c if isinstance(v, str) else float(c) for v, c in zip(row, cell_row)] for row, cell_row in zip(rows, cells)],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    lines = [",".join(columns)] + [",".join(cell_row) for cell_row in cells]
    return "\n".join(lines) + "\n"


def emit(cfg, columns, rows, stream=None):
    text = render(cfg, columns, rows)
    if cfg.output_path is None:
        (stream or sys.stdout).write(text)
        return text
    directory = os.path.dirname(os.path.abspath(cfg.output_path))
    handle = tempfile.NamedTemporaryFile("w", dir=directory, delete=False, suffix=".part", newline="")
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, cfg.output_path)
    except BaseException:
        if os.path.exists(handle.name):
            os.remove(handle.name)
        raise
    logging.info(f"[cli] {get_message('WROTE_OUTPUT', rows=len(rows), path=cfg.output_path)}")
    return text

##########################################################
# COMMANDS
##########################################################

def run_moments(cfg, stream=None):
    columns = ["transform", "order", "row", "col", "re", "im", "ref_re", "ref_im"]
    rows, breaches = [], []
    for kind in cfg.transforms:
        for order in (0, 2):
            result = moment(kind, order)
            for i in range(4):
                for j in range(4):
                    value, ref = result.matrix[i, j], result.analytic_reference[i, j]
                    rows.append([kind.value, order, i + 1, j + 1, value.real, value.imag, ref.real, ref.imag])
            logging.info(f"[cli] moments: {kind.value} order {order} max deviation {result.max_deviation:.3e}")
            if result.max_deviation > cfg.tol:
                breaches.append(f"{kind.value} M{order}: max deviation {result.max_deviation:.3e} > {cfg.tol:.1e}")
    if breaches:
        raise ToleranceBreachError("; ".join(breaches), report=breaches)
    return emit(cfg, columns, rows, stream)


def run_profile(cfg, stream=None):
    packet = PacketSpec(cfg.d)
    spec = cfg.quadrature_spec
    grid = default_r_grid(DEFAULT_R_MIN, cfg.r_max, cfg.points)
    f = gaussian_profile(packet, grid).values.real
    t0 = t0_profile(packet, grid, spec).values.real
    s0 = s0_profile(packet, grid, spec).values.real
    tz = tz_profile(packet, grid, spec).values.imag
    sz = sz_profile(packet, grid, spec).values.imag
    rows = [list(row) for row in zip(grid, f, 2.0 * t0, s0, 2.0 * tz, sz)]
    return emit(cfg, PROFILE_COLUMNS, rows, stream)


def run_variance(cfg, stream=None):
    columns = ["transform", "d", "V_closed", "V_oracle", "V_closed/d^2", "rel_diff", "norm"]
    rows, breaches = [], []
    for kind in cfg.transforms:
        closed = variance_closed(kind, cfg.d)
        oracle = variance_oracle_result(kind, cfg.d)
        rel_diff = abs(closed.value - oracle.value) / closed.value
        rows.append([kind.value, cfg.d, closed.value, oracle.value, closed.normalized, rel_diff, oracle.norm_check])
        if rel_diff > cfg.tol:
            breaches.append(f"{kind.value} d={cfg.d}: closed {closed.value:.12g} vs oracle {oracle.value:.12g}")
    if breaches:
        raise ToleranceBreachError("; ".join(breaches), report=breaches)
    return emit(cfg, columns, rows, stream)


def check_sweep(d_grid, mo_ratio, fw_ratio, slack):
    """Ordering, band, monotonicity and large-width endpoint of a variance sweep."""
    report = []
    for d, mo, fw in zip(d_grid, mo_ratio, fw_ratio):
        if not fw < mo:
            report.append(f"ordering V_FW < V_MO fails at d={d:.6g}")
        for label, ratio in (("MO", mo), ("FW", fw)):
            if not GAUSSIAN_LIMIT <= ratio <= SMALL_WIDTH_LIMIT:
                report.append(f"{label} ratio {ratio:.6g} outside [{GAUSSIAN_LIMIT}, {SMALL_WIDTH_LIMIT}] at d={d:.6g}")
    for label, ratios in (("MO", mo_ratio), ("FW", fw_ratio)):
        if np.any(np.diff(ratios) > slack):
            report.append(f"{label} ratio is not monotone decreasing")
        if abs(ratios[-1] - GAUSSIAN_LIMIT) > ENDPOINT_TOLERANCE * GAUSSIAN_LIMIT:
            report.append(f"{label} endpoint {ratios[-1]:.6g} not within 1% of {GAUSSIAN_LIMIT}")
    return report


def run_variance_sweep(cfg, stream=None):
    d_grid = default_d_grid(cfg.points)
    start_time = time.time()
    mo = np.array([r.normalized for r in variance_sweep(TransformKind.MO, d_grid)])
    fw = np.array([r.normalized for r in variance_sweep(TransformKind.FW, d_grid)])
    logging.info(f"[cli] sweep: finished {len(d_grid)} widths in {round(time.time() - start_time, 2)} seconds.")
    report = check_sweep(d_grid, mo, fw, cfg.tol)
    if report:
        raise ToleranceBreachError("; ".join(report), report=report)
    rows = [[d, m, w, GAUSSIAN_LIMIT] for d, m, w in zip(d_grid, mo, fw)]
    return emit(cfg, SWEEP_COLUMNS, rows, stream)


RUNNERS = {
    "moments": run_moments,
    "profile": run_profile,
    "variance": run_variance,
    "sweep": run_variance_sweep,
}

##########################################################
# ENTRY POINT
##########################################################

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--transform", choices=["fw", "mo", "both"], default="both", help="Transformation(s) to evaluate.")
    common.add_argument("--d", type=float, default=1.0, help="Gaussian packet width in Compton wavelengths.")
    common.add_argument("--rmax", type=float, default=6.0, help="Largest radius of profile grids.")
    common.add_argument("--points", type=int, default=None, help="Grid size (profile radii or sweep widths).")
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="Output format.")
    common.add_argument("--tol", type=float, default=None, help="Tolerance: acceptance bound or quadrature tolerance.")
    common.add_argument("--out", default=None, help="Output file; stdout when omitted.")
    common.add_argument("--c0", type=float, default=C0_DEFAULT, help="Constant for the B0 approximation.")
    parser = argparse.ArgumentParser(prog="nonloc", description="Non-locality of Dirac-equation transformations.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common])
    return parser


def main(argv=None, stream=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(args)
    except DomainError as e:
        sys.stderr.write(get_message("USAGE_ERROR", detail=e) + "\n")
        return EXIT_USAGE
    logging.info(f"[cli] {cfg.command}: starting with {cfg}.")
    try:
        RUNNERS[cfg.command](cfg, stream)
    except DomainError as e:
        logging.error(f"[cli] {cfg.command}: {e}")
        sys.stderr.write(get_message("USAGE_ERROR", detail=e) + "\n")
        return EXIT_USAGE
    except ToleranceBreachError as e:
        logging.error(f"[cli] {cfg.command}: {e}")
        sys.stderr.write(get_message("TOLERANCE_BREACH", detail=e) + "\n")
        return EXIT_NUMERICAL
    except QuadratureError as e:
        sys.stderr.write(get_message("QUADRATURE_FAILURE", detail=e, value=e.value, error=e.error_estimate) + "\n")
        return EXIT_NUMERICAL
    except GridResolutionError as e:
        sys.stderr.write(get_message("GRID_FAILURE", detail=e) + "\n")
        return EXIT_NUMERICAL
    return EXIT_OK
