"""Command-line front end: ``acoustic-lens <subcommand> ...``.

Settings come from built-in defaults, then an optional JSON config file
(``--config``), then the ``ACOUSTIC_LENS_OUTPUT_DIR`` environment
variable (output directory only), then command-line flags.

Exit status: 0 on success, 1 on domain or numerical errors, 2 on usage
or configuration errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import export, geodesic, lensing, metric, units
from .errors import AcousticLensError, ConvergenceError, DomainError

OUTPUT_ENV = "ACOUSTIC_LENS_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "acoustic_lens_output"
FORMATS = ("csv", "json")
SUBCOMMANDS = ("scales", "curvature", "potential", "trace", "deflect", "lens", "sweep")


class ConfigError(AcousticLensError):
    """Invalid or unreadable run configuration (usage error)."""


@dataclass
class RunConfig:
    c0: float = 1.0
    physical: Optional[units.PhysicalParams] = None
    integrator: geodesic.IntegratorConfig = field(default_factory=geodesic.IntegratorConfig)
    output_dir: str = DEFAULT_OUTPUT_DIR
    format: str = "csv"
    emit_plots: bool = False

    def validate(self):
        if isinstance(self.c0, bool) or not isinstance(self.c0, (int, float)) or not (math.isfinite(self.c0) and self.c0 > 0):
            raise ConfigError(f"c0: must be a positive number, got {self.c0!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format: must be one of {', '.join(FORMATS)}, got {self.format!r}")
        try:
            self.integrator.validate()
        except DomainError as exc:
            raise ConfigError(f"integrator: {exc}") from None


_INTEGRATOR_KEYS = {f.name for f in fields(geodesic.IntegratorConfig)}
_TOP_KEYS = {"c0", "physical", "integrator", "output_dir", "format", "emit_plots"}


def load_run_config(path) -> RunConfig:
    """Parse a JSON run configuration; errors name the offending field."""
    try:
        with Path(path).open(encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown config field")

    cfg = RunConfig()
    if "c0" in doc:
        cfg.c0 = doc["c0"]
    if "physical" in doc:
        if not isinstance(doc["physical"], dict):
            raise ConfigError("physical: must be an object")
        try:
            cfg.physical = units.PhysicalParams.from_mapping(doc["physical"])
        except DomainError as exc:
            raise ConfigError(f"physical: {exc}") from None
    if "integrator" in doc:
        section = doc["integrator"]
        if not isinstance(section, dict):
            raise ConfigError("integrator: must be an object")
        bad = set(section) - _INTEGRATOR_KEYS
        if bad:
            raise ConfigError(f"integrator.{sorted(bad)[0]}: unknown field")
        for key, value in section.items():
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise ConfigError(f"integrator.{key}: must be a number, got {value!r}")
        cfg.integrator = replace(cfg.integrator, **section)
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str):
            raise ConfigError("output_dir: must be a string")
        cfg.output_dir = doc["output_dir"]
    if "format" in doc:
        cfg.format = doc["format"]
    if "emit_plots" in doc:
        if not isinstance(doc["emit_plots"], bool):
            raise ConfigError("emit_plots: must be true or false")
        cfg.emit_plots = doc["emit_plots"]
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- output


class Reporter:
    def __init__(self, cfg: RunConfig, degrees=False, timestamp=False, stream=None):
        self.cfg = cfg
        self.degrees = degrees
        self.timestamp = timestamp
        self.stream = stream or sys.stdout
        self.written = []

    def value(self, label, x, unit=""):
        self.stream.write(f"{label}: {export.fmt_float(x)}{(' ' + unit) if unit else ''}\n")

    def angle(self, label, x):
        if self.degrees:
            self.value(label, math.degrees(x), "deg")
        else:
            self.value(label, x, "rad")

    def line(self, text):
        self.stream.write(text + "\n")

    @property
    def outdir(self) -> Path:
        return Path(self.cfg.output_dir)

    def metadata(self, **extra):
        meta = dict(extra)
        if self.timestamp:
            meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return meta

    def table(self, stem, columns: dict, meta: dict):
        """Write a column table as CSV or as JSON ``{"metadata": ..., "rows": [...]}``."""
        if self.cfg.format == "csv":
            path = export.write_csv(self.outdir / f"{stem}.csv", columns)
        else:
            names = list(columns)
            n = len(columns[names[0]]) if names else 0
            rows = [{k: columns[k][i] for k in names} for i in range(n)]
            path = export.write_json(self.outdir / f"{stem}.json", {"metadata": self.metadata(**meta), "rows": rows})
        self.written.append(path)
        return path

    def document(self, stem, doc: dict):
        path = export.write_json(self.outdir / f"{stem}.json", doc)
        self.written.append(path)
        return path

    def finish(self):
        for p in self.written:
            self.line(f"wrote {p}")


def _grid(lo, hi, count, log):
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    if not lo > 0 or not hi >= lo:
        raise DomainError(f"need 0 < min <= max, got {lo!r}, {hi!r}")
    if count == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, count) if log else np.linspace(lo, hi, count)


# ---------------------------------------------------------------- subcommands


def cmd_scales(args, cfg: RunConfig, out: Reporter):
    p = cfg.physical or units.PhysicalParams()
    overrides = {}
    if args.mass_kg is not None:
        overrides["photon_mass_kg"] = args.mass_kg
    if args.g_tilde is not None:
        overrides["g_tilde"] = args.g_tilde
    if args.density is not None:
        overrides["density_per_m2"] = args.density
    if overrides:
        p = units.PhysicalParams.from_mapping({**p.to_mapping(), **overrides})
    s = units.derive_scales(p)
    c0 = cfg.c0
    wavelength = 2.0
    deflection = lensing.max_deflection(c0, wavelength)
    focal_si = units.to_physical(lensing.focal_length(c0, wavelength), s) if wavelength >= 2 * c0 else math.nan
    out.value("photon_mass", p.photon_mass, "kg")
    out.value("g_tilde", p.interaction_dimensionless)
    out.value("density", p.density, "m^-2")
    out.value("sound_speed", s.sound_speed, "m/s")
    out.value("healing_length", s.healing_length, "m")
    out.value("interaction_si", s.interaction_si, "J m^2")
    out.line(f"estimates for c0={export.fmt_float(c0)} and wavelength = b = 2 healing lengths:")
    out.angle("max_deflection", deflection)
    out.value("focal_length", focal_si, "m")
    columns = {
        "photon_mass_kg": [p.photon_mass],
        "g_tilde": [p.interaction_dimensionless],
        "density_per_m2": [p.density],
        "sound_speed": [s.sound_speed],
        "healing_length": [s.healing_length],
        "interaction_si": [s.interaction_si],
        "c0": [c0],
        "max_deflection_2xi": [deflection],
        "focal_length_2xi_m": [focal_si],
    }
    out.table("scales", columns, {"hbar": p.hbar})


def cmd_curvature(args, cfg, out):
    m = metric.AcousticMetric(cfg.c0)
    r = _grid(args.r_min if args.r_min is not None else 0.5 * m.c0, args.r_max if args.r_max is not None else 10 * m.c0, args.count, args.log)
    columns = {
        "r": r,
        "warp_factor": [m.warp_factor(x) for x in r],
        "flow_velocity": [m.flow_velocity(x) for x in r],
        "kretschmann": [m.kretschmann(x) for x in r],
        "ricci_scalar": [m.ricci_scalar(x) for x in r],
    }
    out.value("horizon_radius", m.horizon_radius)
    out.value("kretschmann_at_horizon", m.kretschmann(m.horizon_radius))
    out.value("ricci_at_horizon", m.ricci_scalar(m.horizon_radius))
    out.table("curvature", columns, {"c0": m.c0})


def cmd_potential(args, cfg, out):
    c0, L = cfg.c0, args.L
    r = _grid(args.r_min if args.r_min is not None else c0, args.r_max if args.r_max is not None else 10 * c0, args.count, args.log)
    columns = {"r": r, "V": [geodesic.effective_potential(c0, L, x) for x in r]}
    meta = {"c0": c0, "L": L, "critical_impact_parameter": geodesic.critical_impact_parameter(c0)}
    if L != 0:
        r_m, v_m = geodesic.potential_peak(c0, L)
        out.value("r_m", r_m)
        out.value("V_m", v_m)
        meta.update(r_m=r_m, V_m=v_m)
    out.value("critical_impact_parameter", meta["critical_impact_parameter"])
    out.table("potential", columns, meta)


def _integrator_from_args(args, cfg):
    overrides = {
        k: getattr(args, k)
        for k in ("r_start", "r_escape", "r_capture", "rel_tol", "abs_tol", "max_steps")
        if getattr(args, k, None) is not None
    }
    return replace(cfg.integrator, **overrides)


def cmd_trace(args, cfg, out):
    m = metric.AcousticMetric(cfg.c0)
    charges = geodesic.ConservedCharges.from_impact_parameter(args.b, energy=args.energy)
    icfg = _integrator_from_args(args, cfg)
    try:
        traj = geodesic.trace(m, charges, icfg, with_tau=args.with_tau)
    except ConvergenceError as exc:
        if exc.partial is not None:
            _write_trajectory(exc.partial, out, args)
        raise
    out.line(f"classification: {traj.classification}")
    out.line(f"outcome: {traj.outcome}")
    out.value("samples", len(traj.samples))
    out.angle("swept_angle", traj.swept_angle)
    out.angle("raw_swept_angle", traj.raw_swept_angle)
    out.angle("far_field_correction", traj.far_field_correction)
    out.angle("far_field_truncation_estimate", traj.tail_truncation_estimate)
    out.value("b_over_r_start", abs(args.b) / traj.config.r_start)
    if traj.classification is geodesic.Classification.DEFLECTED:
        out.angle("deflection", traj.swept_angle - math.pi)
        out.value("min_radius", traj.min_radius)
        out.value("turning_point", geodesic.turning_point(m.c0, args.b))
    out.value("null_residual_max", traj.conservation_residual_max)
    out.value("angular_momentum_residual_max", traj.angular_momentum_residual_max)
    _write_trajectory(traj, out, args)
    if cfg.emit_plots:
        from .plots import plot_trajectory

        out.written.append(plot_trajectory(traj, out.outdir / "trajectory.svg"))


def trajectory_metadata(traj) -> dict:
    cfg = traj.config
    meta = {
        "c0": traj.c0,
        "b": traj.impact_parameter,
        "energy": traj.charges.energy,
        "angular_momentum": traj.charges.angular_momentum,
        "classification": str(traj.classification),
        "outcome": traj.outcome,
        "swept_angle": traj.swept_angle,
        "raw_swept_angle": traj.raw_swept_angle,
        "far_field_correction": traj.far_field_correction,
        "far_field_truncation_estimate": traj.tail_truncation_estimate,
        "null_residual_max": traj.conservation_residual_max,
        "angular_momentum_residual_max": traj.angular_momentum_residual_max,
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "r_start": cfg.r_start,
        "r_escape": cfg.r_escape,
        "r_capture": cfg.r_capture,
    }
    if traj.periapsis is not None:
        meta["periapsis_r"] = traj.periapsis.r
        meta["periapsis_phi"] = traj.periapsis.phi
    return meta


def _write_trajectory(traj, out, args):
    cols = traj.arrays()
    if out.cfg.format == "csv":
        out.written.append(export.write_csv(out.outdir / "trajectory.csv", cols))
    else:
        names = list(cols)
        samples = [{k: cols[k][i] for k in names} for i in range(len(traj.samples))]
        doc = {"metadata": out.metadata(**trajectory_metadata(traj)), "samples": samples}
        out.document("trajectory", doc)


def cmd_deflect(args, cfg, out):
    c0, b = cfg.c0, args.b
    exact = lensing.deflection_exact(c0, b, args.quad_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lensing.SeriesAccuracyWarning)
        series = lensing.deflection_series(c0, b)
    focal = lensing.focal_length(c0, b)
    out.angle("exact", exact)
    out.angle("series", series)
    out.angle("abs_error", abs(exact - series))
    out.value("remainder_bound", (c0 / b) ** 2 * abs(c0 / b))
    out.value("turning_point", geodesic.turning_point(c0, b))
    out.value("focal_length", focal)
    if abs(b) < 10 * c0:
        out.line("note: |b| < 10 c0, the series is outside its weak-field range")
    columns = {
        "b": [b],
        "deflection_exact": [exact],
        "deflection_series": [series],
        "abs_error": [abs(exact - series)],
        "focal_length": [focal],
    }
    out.table("deflection", columns, {"c0": c0, "quad_tol": args.quad_tol})


def cmd_lens(args, cfg, out):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lensing.SmallAngleWarning)
        geo = lensing.lens_solve(cfg.c0, args.dl, args.ds, args.quad_tol)
    out.value("b_solved", geo.b_solved)
    out.angle("theta_E", geo.theta_E)
    out.angle("theta_s", geo.theta_s)
    out.angle("deflection", geo.deflection)
    out.angle("theta_E_closed_form", geo.theta_E_closed_form)
    out.line(f"image_angles: +/-{export.fmt_float(math.degrees(geo.theta_E) if out.degrees else geo.theta_E)}")
    out.value("thin_lens_residual", geo.thin_lens_residual)
    out.value("angle_sum_residual", geo.angle_sum_residual)
    if geo.theta_E > 0.1:
        out.line("note: theta_E > 0.1 rad, outside the small-angle regime")
    out.document("lens", {"metadata": out.metadata(), **geo.to_mapping()})


def cmd_sweep(args, cfg, out):
    c0 = cfg.c0
    bs = _grid(args.b_min, args.b_max, args.count, args.log)
    rows = lensing.deflection_sweep(c0, bs, args.quad_tol, jobs=args.jobs)
    columns = {
        "b": [r.b for r in rows],
        "deflection_exact": [r.deflection_exact for r in rows],
        "deflection_series": [r.deflection_series for r in rows],
        "abs_error": [r.abs_error for r in rows],
        "focal_length": [r.focal_length for r in rows],
    }
    out.value("points", len(rows))
    out.angle("max_abs_error", max(r.abs_error for r in rows))
    out.table("sweep", columns, {"c0": c0, "quad_tol": args.quad_tol, "log": bool(args.log)})
    if cfg.emit_plots:
        from .plots import plot_sweep

        out.written.append(plot_sweep(rows, c0, out.outdir / "deflection_sweep.svg"))


COMMANDS = {
    "scales": cmd_scales,
    "curvature": cmd_curvature,
    "potential": cmd_potential,
    "trace": cmd_trace,
    "deflect": cmd_deflect,
    "lens": cmd_lens,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--output-dir", help=f"artifact directory (env {OUTPUT_ENV})")
    common.add_argument("--format", choices=FORMATS, help="table format (default csv)")
    common.add_argument("--plots", action="store_true", default=None, help="also write SVG figures")
    common.add_argument("--degrees", action="store_true", help="display angles in degrees (files stay in radians)")
    common.add_argument("--timestamp", action="store_true", help="add a timestamp to JSON metadata")
    common.add_argument("--c0", type=float, help="sink strength in healing-length units")

    parser = argparse.ArgumentParser(prog="acoustic-lens", description="Phonon lensing by a particle sink in a photon condensate.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scales", parents=[common], help="sound speed and healing length from SI parameters")
    p.add_argument("--mass-kg", type=float)
    p.add_argument("--g-tilde", type=float)
    p.add_argument("--density", type=float, help="particles per m^2")
    p.add_argument("--params", help="JSON parameter document")

    for name, helptext in (("curvature", "warp factor, flow and curvature on a radial grid"), ("potential", "effective potential on a radial grid")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        if name == "potential":
            p.add_argument("--L", type=float, default=1.0, help="angular momentum (default 1)")
        p.add_argument("--r-min", type=float)
        p.add_argument("--r-max", type=float)
        p.add_argument("--count", type=int, default=50)
        p.add_argument("--log", action="store_true")

    p = sub.add_parser("trace", parents=[common], help="integrate one null geodesic")
    p.add_argument("--b", type=float, required=True, help="impact parameter")
    p.add_argument("--energy", type=float, default=1.0)
    p.add_argument("--r-start", type=float)
    p.add_argument("--r-escape", type=float)
    p.add_argument("--r-capture", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--with-tau", action="store_true", help="also integrate the metric time tau")

    p = sub.add_parser("deflect", parents=[common], help="exact and series deflection at one impact parameter")
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--quad-tol", type=float, default=1e-12)

    p = sub.add_parser("lens", parents=[common], help="solve the thin-lens geometry")
    p.add_argument("--dl", type=float, required=True, help="lens-observer distance")
    p.add_argument("--ds", type=float, required=True, help="source-observer distance")
    p.add_argument("--quad-tol", type=float, default=1e-12)

    p = sub.add_parser("sweep", parents=[common], help="deflection over a grid of impact parameters")
    p.add_argument("--b-min", type=float, required=True)
    p.add_argument("--b-max", type=float, required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--log", action="store_true")
    p.add_argument("--quad-tol", type=float, default=1e-12)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (0: one per CPU)")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if getattr(args, "params", None):
        try:
            cfg.physical = units.load_physical_params(args.params)
        except OSError as exc:
            raise ConfigError(f"params: cannot read {args.params}: {exc.strerror}") from None
        except (json.JSONDecodeError, DomainError) as exc:
            raise ConfigError(f"params: {exc}") from None
    env_dir = os.environ.get(OUTPUT_ENV)
    if env_dir:
        cfg.output_dir = env_dir
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.format:
        cfg.format = args.format
    if args.plots:
        cfg.emit_plots = True
    if args.c0 is not None:
        cfg.c0 = args.c0
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"acoustic-lens: configuration error: {exc}", file=sys.stderr)
        return 2
    out = Reporter(cfg, degrees=args.degrees, timestamp=args.timestamp)
    try:
        COMMANDS[args.command](args, cfg, out)
    except ConvergenceError as exc:
        est = "" if exc.error_estimate is None else f" (achieved error estimate {exc.error_estimate:.3g})"
        print(f"acoustic-lens: numerical error: {exc}{est}", file=sys.stderr)
        out.finish()
        return 1
    except ConfigError as exc:
        print(f"acoustic-lens: configuration error: {exc}", file=sys.stderr)
        return 2
    except AcousticLensError as exc:
        print(f"acoustic-lens: {exc}", file=sys.stderr)
        return 1
    out.finish()
    return 0
