"""Batch front end: config parsing, experiment orchestration, reports.

Usage:

    sampdens generate --config run.cfg --out results/
    sampdens analyze  --config run.cfg --out results/
    sampdens verify   --config run.cfg --out results/
    sampdens report   --config run.cfg --out results/

The config is flat ``key = value`` text under ``[section]`` headers,
parsed strictly: unknown sections or keys are errors.  Identical config
and seed produce byte-identical artifacts.  Exit codes: 0 success, 2
validation error, 3 hypothesis violation, 4 accuracy (quadrature) error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import math
import os
import sys

import numpy as np

from . import densities, verification
from .densities import (
    DensityKernel,
    DensityReport,
    MetricModel,
    WeightModel,
    density_profile,
    disk_grid,
    plane_grid,
)
from .errors import (
    AccuracyError,
    ConfigError,
    HypothesisViolationError,
    SampdensError,
)
from .geometry import DISK, PLANE, SurfaceModel, rho_many
from .pointsets import (
    PointSet,
    Window,
    generate_hyperbolic_net,
    generate_square_lattice,
    load_points,
    save_points,
    separation_constant,
)
from .serialize import dump_json, load_json
from .verification import (
    TruncatedSpace,
    build_sampling_experiment,
    frame_bounds,
    min_norm_interpolate,
    riesz_lower_bound,
)

SCHEMA_VERSION = 1

_SECTIONS = {
    "run": {"surface", "seed"},
    "window": {"kind", "half_side", "radius", "rho_radius", "anchor_re", "anchor_im"},
    "generator": {"kind", "spacing", "delta", "trials"},
    "weight": {"kind"},
    "metric": {"kind", "tau_form"},
    "kernel": {"kind", "a", "path"},
    "analyze": {
        "r_schedule",
        "grid_n",
        "grid_m",
        "grid_extent",
        "margin_guard",
        "tail",
    },
    "verify": {"degrees", "ridge", "sigma", "window_radius", "window_rho"},
    "potentials": {"r", "epsilon", "t"},
    "output": {
        "points",
        "density_json",
        "density_csv",
        "potentials_csv",
        "verify_json",
        "summary",
    },
}

_OUTPUT_DEFAULTS = {
    "points": "points.txt",
    "density_json": "density.json",
    "density_csv": "density.csv",
    "potentials_csv": "potentials.csv",
    "verify_json": "verify_N{N}.json",
    "summary": "summary.txt",
}


def parse_config(path) -> dict:
    """Parse the strict key = value format into {section: {key: value}}."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    config: dict = {}
    section = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in _SECTIONS:
                    raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
                config.setdefault(section, {})
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            if section is None:
                raise ConfigError(f"{path}:{lineno}: key outside any section")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
            if key in config[section]:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            config[section][key] = value
    return config


def _get(config, section, key, default=None, required=False):
    value = config.get(section, {}).get(key)
    if value is None:
        if required:
            raise ConfigError(f"missing required key {key!r} in [{section}]")
        return default
    return value


def _get_float(config, section, key, default=None, required=False):
    value = _get(config, section, key, default=None, required=required)
    if value is None:
        return default
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {value!r} is not a number") from None


def _get_int(config, section, key, default=None, required=False):
    value = _get(config, section, key, default=None, required=required)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {value!r} is not an integer") from None


def _surface(config) -> SurfaceModel:
    kind = _get(config, "run", "surface", required=True)
    if kind not in (PLANE, DISK):
        raise ConfigError(f"[run] surface must be 'plane' or 'disk', got {kind!r}")
    return SurfaceModel(kind)


def _window(config, surface) -> Window:
    kind = _get(config, "window", "kind", required=True)
    anchor = complex(
        _get_float(config, "window", "anchor_re", 0.0),
        _get_float(config, "window", "anchor_im", 0.0),
    )
    try:
        if kind == "square":
            return Window.plane_square(
                _get_float(config, "window", "half_side", required=True), anchor
            )
        if kind == "ball":
            return Window.plane_ball(
                _get_float(config, "window", "radius", required=True), anchor
            )
        if kind == "diskball":
            return Window.disk_ball(
                _get_float(config, "window", "rho_radius", required=True), anchor
            )
    except ValueError as exc:
        raise ConfigError(f"bad window: {exc}") from None
    raise ConfigError(f"[window] kind must be square|ball|diskball, got {kind!r}")


def _weight(config, surface) -> WeightModel:
    kind = _get(config, "weight", "kind", required=True)
    if kind == "fock":
        if surface.is_disk:
            raise ConfigError("fock weight requires surface = plane")
        return WeightModel.classical_fock()
    if kind == "bergman":
        if not surface.is_disk:
            raise ConfigError("bergman weight requires surface = disk")
        return WeightModel.classical_bergman()
    raise ConfigError(f"[weight] kind must be fock|bergman, got {kind!r}")


def _metric(config, surface) -> MetricModel:
    kind = _get(config, "metric", "kind", "fundamental" if not surface.is_disk else "bergman-disk")
    tau_form = _get(config, "metric", "tau_form", "derived")
    if tau_form not in ("derived", "inline"):
        raise ConfigError(f"[metric] tau_form must be derived|inline, got {tau_form!r}")
    if kind == "fundamental":
        if surface.is_disk:
            raise ConfigError("fundamental metric requires surface = plane")
        return MetricModel.fundamental_plane()
    if kind == "bergman-disk":
        if not surface.is_disk:
            raise ConfigError("bergman-disk metric requires surface = disk")
        return MetricModel.bergman_disk(tau_form=tau_form)
    raise ConfigError(f"[metric] kind must be fundamental|bergman-disk, got {kind!r}")


def _kernel(config) -> DensityKernel:
    kind = _get(config, "kernel", "kind", "constant")
    if kind == "constant":
        return DensityKernel.constant()
    if kind == "exponential":
        return DensityKernel.exponential()
    if kind == "indicator":
        return DensityKernel.indicator(_get_float(config, "kernel", "a", required=True))
    if kind == "disklog":
        return DensityKernel.disk_log()
    if kind == "table":
        path = _get(config, "kernel", "path", required=True)
        if not os.path.exists(path):
            raise ConfigError(f"kernel table not found: {path}")
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 2:
            raise ConfigError("kernel table must have two columns: knot value")
        return DensityKernel.tabulated(data[:, 0], data[:, 1])
    raise ConfigError(
        f"[kernel] kind must be constant|exponential|indicator|disklog|table, got {kind!r}"
    )


def _float_list(text, what):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma list of numbers") from None
    if not values:
        raise ConfigError(f"{what} must be nonempty")
    return values


def _int_list(text, what):
    return [int(v) for v in _float_list(text, what)]


def _out_path(out_dir, config, key, **fmt):
    name = _get(config, "output", key, _OUTPUT_DEFAULTS[key])
    return os.path.join(out_dir, name.format(**fmt))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_generate(config, out_dir, seed) -> list:
    surface = _surface(config)
    window = _window(config, surface)
    kind = _get(config, "generator", "kind", required=True)
    if kind == "lattice":
        spacing = _get_float(config, "generator", "spacing", required=True)
        points = generate_square_lattice(spacing, window)
    elif kind == "net":
        delta = _get_float(config, "generator", "delta", required=True)
        trials = _get_int(config, "generator", "trials", 60000)
        points = generate_hyperbolic_net(delta, window, seed, trials=trials)
    else:
        raise ConfigError(f"[generator] kind must be lattice|net, got {kind!r}")
    if points.surface.kind != surface.kind:
        raise ConfigError("generator and surface disagree")
    path = _out_path(out_dir, config, "points")
    save_points(points, path)
    return [path]


def _load_pointset(config, out_dir, surface) -> PointSet:
    path = _out_path(out_dir, config, "points")
    if not os.path.exists(path):
        raise ConfigError(f"points file not found (run generate first): {path}")
    points = load_points(path)
    if points.surface.kind != surface.kind:
        raise ConfigError(
            f"points file surface {points.surface.kind!r} does not match config"
        )
    return points


def cmd_analyze(config, out_dir, seed) -> list:
    surface = _surface(config)
    window = _window(config, surface)
    points = _load_pointset(config, out_dir, surface)
    weight = _weight(config, surface)
    metric = _metric(config, surface)
    kernel = _kernel(config)
    r_schedule = _float_list(
        _get(config, "analyze", "r_schedule", required=True), "[analyze] r_schedule"
    )
    grid_n = _get_int(config, "analyze", "grid_n", 5)
    grid_extent = _get_float(config, "analyze", "grid_extent", required=True)
    margin_guard = _get_float(config, "analyze", "margin_guard", 0.02)
    tail = _get_int(config, "analyze", "tail", 1)
    if surface.is_disk:
        grid_m = _get_int(config, "analyze", "grid_m", 8)
        grid = disk_grid(grid_n, grid_m, grid_extent, window.anchor)
    else:
        grid = plane_grid(grid_n, grid_extent, window.anchor)
    report = density_profile(
        points,
        weight,
        metric,
        kernel,
        grid,
        r_schedule,
        window=window,
        margin_guard=margin_guard,
        tail=tail,
    )
    report.meta = {
        "kernel": kernel.kind,
        "weight": weight.kind,
        "metric": metric.kind,
        "tau_form": metric.tau_form,
        "n_points": len(points),
        "seed": seed,
    }
    json_path = _out_path(out_dir, config, "density_json")
    csv_path = _out_path(out_dir, config, "density_csv")
    report.save_json(json_path)
    report.save_csv(csv_path)
    written = [json_path, csv_path]
    if "potentials" in config:
        from .potentials import bump_weight, pole_weight, v_r, v_r_eps
        from .quadrature import QuadratureSpec

        r_pot = _get_float(config, "potentials", "r", required=True)
        eps = _get_float(config, "potentials", "epsilon", required=True)
        t_bump = _get_float(config, "potentials", "t", 0.9)
        pole = pole_weight(weight, points, kernel, r_pot)
        bump = bump_weight(weight, points, kernel, r_pot, eps=eps, t=t_bump)
        spec = QuadratureSpec(rel_tolerance=1e-6, abs_tolerance=1e-8, max_refinements=8)
        pot_path = _out_path(out_dir, config, "potentials_csv")
        with open(pot_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["z_re", "z_im", "v_pole", "at_pole", "v_bump"])
            for z in grid:
                z = complex(z)
                res = v_r(pole, z)
                vb = v_r_eps(bump, z, spec)
                writer.writerow(
                    [
                        format(z.real, ".17g"),
                        format(z.imag, ".17g"),
                        format(res.value, ".17g"),
                        int(res.at_pole),
                        format(vb, ".17g"),
                    ]
                )
        written.append(pot_path)
    return written


def cmd_verify(config, out_dir, seed) -> list:
    surface = _surface(config)
    window = _window(config, surface)
    points = _load_pointset(config, out_dir, surface)
    degrees = _int_list(
        _get(config, "verify", "degrees", required=True), "[verify] degrees"
    )
    ridge = _get_float(config, "verify", "ridge", 0.0)
    sigma = _get_float(config, "verify", "sigma", None)
    kind = verification.BERGMAN if surface.is_disk else verification.FOCK
    # window coupling: keep only points the degree-max(N) mass can see,
    # radius sqrt(2 N) + 2 on the plane (overridable)
    if surface.is_disk:
        clip_rho = _get_float(config, "verify", "window_rho", None)
        if clip_rho is not None:
            keep = rho_many(surface, window.anchor, points.coords) <= clip_rho
            points = PointSet(surface, points.coords[keep])
    else:
        clip = _get_float(
            config, "verify", "window_radius", math.sqrt(2.0 * max(degrees)) + 2.0
        )
        keep = np.abs(points.coords - window.anchor) <= clip
        points = PointSet(surface, points.coords[keep])
    if len(points) == 0:
        raise ConfigError("no points remain inside the verification window")
    rng = np.random.default_rng(seed)
    sep = separation_constant(points)
    written = []
    for degree in degrees:
        space = TruncatedSpace(kind, degree)
        exp = build_sampling_experiment(space, points, sigma=sigma)
        lam_min, lam_max = frame_bounds(exp)
        riesz = riesz_lower_bound(space, points)
        gen_kind = _get(config, "generator", "kind", None)
        if gen_kind == "lattice":
            spacing_or_delta = _get_float(config, "generator", "spacing", None)
        elif gen_kind == "net":
            spacing_or_delta = _get_float(config, "generator", "delta", None)
        else:
            spacing_or_delta = None
        record = {
            "schema_version": SCHEMA_VERSION,
            "space": kind,
            "N": degree,
            "n_points": len(points),
            "window_kind": window.kind,
            "window_extent": float(window.extent),
            "spacing_or_delta": spacing_or_delta,
            "separation": float(sep) if math.isfinite(sep) else "inf",
            "lambda_min": lam_min,
            "lambda_max": lam_max,
            "ratio": lam_min / lam_max if lam_max > 0 else 0.0,
            "riesz_lower_bound": riesz,
            "residual": None,
            "norm": None,
            "condition": None,
            "seed": seed,
        }
        if len(points) <= space.dim:
            phases = rng.uniform(0.0, 2.0 * np.pi, size=len(points))
            data = np.exp(1j * phases)
            result = min_norm_interpolate(space, points, data, ridge=ridge)
            record["residual"] = result.residual
            record["norm"] = result.norm
            record["condition"] = (
                result.condition if math.isfinite(result.condition) else "inf"
            )
        path = _out_path(out_dir, config, "verify_json", N=degree)
        dump_json(record, path)
        written.append(path)
    return written


def cmd_report(config, out_dir, seed) -> list:
    density_path = _out_path(out_dir, config, "density_json")
    if not os.path.exists(density_path):
        raise ConfigError(f"density report not found (run analyze first): {density_path}")
    report = DensityReport.from_json_dict(load_json(density_path))
    pattern = _out_path(out_dir, config, "verify_json", N="*")
    verify_paths = sorted(glob.glob(pattern))
    records = [load_json(p) for p in verify_paths]
    records.sort(key=lambda rec: rec["N"])

    lines = []
    lines.append("density / verification concordance")
    lines.append("=" * 35)
    lines.append(f"surface: {report.surface_kind}")
    lines.append(f"verdict: {report.verdict}  margin: {report.margin:.6g}")
    lines.append(
        "r schedule: " + ", ".join(format(r, ".6g") for r in report.r_schedule)
    )
    lines.append(
        "sup curve:  " + ", ".join(format(v, ".6g") for v in report.sup_curve)
    )
    lines.append(
        "inf curve:  " + ", ".join(format(v, ".6g") for v in report.inf_curve)
    )
    lines.append("")
    if records:
        lines.append("frame and interpolation experiments")
        lines.append("-" * 35)
        header = f"{'N':>5} {'lambda_min':>14} {'lambda_max':>14} {'ratio':>12} {'riesz':>10} {'residual':>12} {'norm':>12}"
        lines.append(header)
        for rec in records:
            resid = rec.get("residual")
            norm = rec.get("norm")
            lines.append(
                f"{rec['N']:>5} "
                f"{rec['lambda_min']:>14.6e} "
                f"{rec['lambda_max']:>14.6e} "
                f"{rec['ratio']:>12.6e} "
                f"{rec['riesz_lower_bound']:>10.4f} "
                + (f"{resid:>12.3e} " if resid is not None else f"{'-':>12} ")
                + (f"{norm:>12.6g}" if norm is not None else f"{'-':>12}")
            )
        lines.append("")
        first, last = records[0], records[-1]
        if first["ratio"] > 0 and last["ratio"] > 0:
            drop = first["ratio"] / last["ratio"]
            lines.append(
                f"frame ratio trend N={first['N']} -> N={last['N']}: factor {drop:.3g}"
            )
            if report.verdict == densities.SAMPLING_SUFFICIENT:
                concordant = drop < 10.0
            elif report.verdict == densities.INTERPOLATION_SUFFICIENT:
                concordant = drop > 3.0 or all(
                    rec.get("residual") is not None and rec["residual"] < 1e-6
                    for rec in records
                )
            else:
                concordant = True
            lines.append(f"concordant with density verdict: {'yes' if concordant else 'no'}")
    else:
        lines.append("no verification records found")
    summary_path = _out_path(out_dir, config, "summary")
    with open(summary_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return [summary_path]


_COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sampdens",
        description="Density functionals and frame experiments for point configurations.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override [run] seed")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker budget (recorded; evaluation is currently serial)",
    )
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config)
        seed = args.seed
        if seed is None:
            seed = _get_int(config, "run", "seed", 0)
        threads = args.threads
        if threads is None:
            env = os.environ.get("SAMPDENS_THREADS")
            threads = int(env) if env else 1
        if threads < 1:
            raise ConfigError("thread count must be positive")
        os.makedirs(args.out, exist_ok=True)
        artifacts = _COMMANDS[args.command](config, args.out, seed)
    except HypothesisViolationError as exc:
        print(f"sampdens: hypothesis violation: {exc}", file=sys.stderr)
        return 3
    except AccuracyError as exc:
        print(f"sampdens: accuracy error: {exc}", file=sys.stderr)
        return 4
    except (SampdensError, ValueError, OSError) as exc:
        print(f"sampdens: {exc}", file=sys.stderr)
        return 2
    for path in artifacts:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
