"""Experiment runner: scenario configs, presets, CSV/PNG emission.

Configs are plain ``key=value`` text files; command-line overrides use the
same keys (``--steps=200``).  Scenario presets reproduce the benchmark
setups; every number needed to rerun lands in the per-run manifest.

Exit codes: 0 success, 2 config error, 3 numerical failure.

The seeded generator is splitmix64 (increment 0x9E3779B97F4A7C15, mixing
constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB); uniforms on [-1, 1)
take the top 53 bits, so the benchmark matrices reproduce bit-for-bit on
any platform.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__, _accel, continuum, diagnostics, flows, integrators
from . import matrixcore, quantization, raster

_SM64_INC = 0x9E3779B97F4A7C15
_SM64_MIX1 = 0xBF58476D1CE4E5B9
_SM64_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


TRAJECTORY_COLUMNS = (
    "step",
    "time",
    "offdiag_norm",
    "inversions",
    "lyapunov",
    "spectral_drift",
    "I2",
    "I3",
    "I4",
)


def splitmix64_uniforms(seed, count):
    """``count`` doubles uniform on [0, 1) from the splitmix64 stream."""
    x = int(seed) & _MASK64
    out = np.empty(count)
    for i in range(count):
        x = (x + _SM64_INC) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * _SM64_MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _SM64_MIX2) & _MASK64
        z = z ^ (z >> 31)
        out[i] = (z >> 11) * 2.0**-53
    return out


def random_tridiagonal(n, seed):
    """Seeded symmetric tridiagonal matrix with bands uniform on [-1, 1).

    Draw order: n diagonal entries, then n-1 off-diagonal entries.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    u = 2.0 * splitmix64_uniforms(seed, 2 * n - 1) - 1.0
    L = np.zeros((n, n))
    idx = np.arange(n)
    L[idx, idx] = u[:n]
    L[idx[:-1], idx[:-1] + 1] = u[n:]
    L[idx[:-1] + 1, idx[:-1]] = u[n:]
    return L


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    flow: str
    n: int = 64
    seed: int = 1
    steps: int = 100
    h: float = 0.0  # 0 means auto: h = 0.2 / ||B(L0)||
    fp_tol: float = 1e-12
    fp_maxit: int = 100
    record_every: int = 10
    method: str = "isomp"
    traced: tuple = ()
    out: str = "out"
    run: str = ""
    rasters: tuple = ()
    raster_width: int = 720
    nlat: int = 181
    nlon: int = 360
    # continuum-only settings
    npoints: int = 256
    length: float = 1.0
    amplitude: float = 0.3
    width: float = 0.15
    center: float = 0.5

    def __post_init__(self):
        if self.flow not in flows.FLOW_KINDS + ("continuum",):
            raise ConfigError(f"unknown flow {self.flow!r}")
        for i in self.traced:
            if not 0 <= int(i) < self.n:
                raise ConfigError(f"traced index {i} outside [0, {self.n})")


_INT_KEYS = {"n", "seed", "steps", "fp_maxit", "record_every", "raster_width",
             "nlat", "nlon", "npoints"}
_FLOAT_KEYS = {"h", "fp_tol", "length", "amplitude", "width", "center"}
_TUPLE_KEYS = {"traced", "rasters"}


def _coerce(key, value):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _TUPLE_KEYS:
        value = value.strip()
        if not value:
            return ()
        return tuple(int(v) for v in value.split(","))
    return value


def parse_config_text(text, source="<config>"):
    """Parse key=value lines (# comments, blank lines allowed)."""
    items = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        try:
            items[key] = _coerce(key, value.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return items


def config_from_items(items, source="<config>"):
    known = set(ScenarioConfig.__dataclass_fields__)
    bad = set(items) - known
    if bad:
        raise ConfigError(f"{source}: unknown keys {sorted(bad)}")
    if "scenario" not in items:
        items = dict(items)
        items.setdefault("scenario", items.get("flow", "custom"))
    try:
        return ScenarioConfig(**items)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


# ----------------------------------------------------------------------
# Presets.  Step sizes were tuned once against the acceptance tolerances
# and are recorded here (and echoed into every manifest).

_BENCH_SEED = 7
_TRACED_256 = (9, 49, 99, 149, 199)  # 10th, 50th, 100th, 150th, 200th entries
_RASTERS_256 = (0, 100, 500, 1500)

PRESETS = {
    "toda-vs-ipm-256": (
        "Toda and IPM runs, N=256, shared seeded tridiagonal start, 1500 steps",
        [
            dict(scenario="toda-vs-ipm-256", run="toda", flow="toda", n=256,
                 seed=_BENCH_SEED, steps=1500, h=0.2, fp_tol=1e-10,
                 fp_maxit=300, record_every=50, traced=_TRACED_256,
                 rasters=_RASTERS_256),
            dict(scenario="toda-vs-ipm-256", run="ipm", flow="ipm", n=256,
                 seed=_BENCH_SEED, steps=1500, h=2000.0, fp_tol=1e-9,
                 fp_maxit=300, record_every=50, traced=_TRACED_256,
                 rasters=_RASTERS_256),
        ],
    ),
    "diagflow-256": (
        "Diagonalizing gradient flow, N=256 (deflates without sorting)",
        [
            dict(scenario="diagflow-256", run="", flow="diagflow", n=256,
                 seed=_BENCH_SEED, steps=600, h=1.0, fp_tol=1e-9,
                 fp_maxit=300, record_every=50, traced=_TRACED_256,
                 rasters=(0, 100, 300, 600)),
        ],
    ),
    "continuum-smoke": (
        "Dispersionless Toda on the Gaussian-bump default, J2 drift check",
        [
            dict(scenario="continuum-smoke", run="", flow="continuum",
                 npoints=256, steps=512, h=0.5 / 512, record_every=32),
        ],
    ),
}


def expand_preset(name):
    _, run_dicts = PRESETS[name]
    return [config_from_items(d, source=name) for d in run_dicts]


def load_scenario(arg):
    """An argument to ``run`` is either a preset name or a config file."""
    if arg in PRESETS:
        return expand_preset(arg)
    if not os.path.exists(arg):
        raise ConfigError(f"{arg!r} is neither a preset nor a config file")
    with open(arg, "r", encoding="utf-8") as fh:
        items = parse_config_text(fh.read(), source=arg)
    return [config_from_items(items, source=arg)]


def apply_overrides(cfgs, overrides):
    out = []
    for cfg in cfgs:
        items = {}
        for key, value in overrides.items():
            if key not in ScenarioConfig.__dataclass_fields__:
                raise ConfigError(f"unknown override key {key!r}")
            items[key] = _coerce(key, value)
        out.append(replace(cfg, **items) if items else cfg)
    return out


def parse_overrides(pairs):
    out = {}
    for item in pairs:
        if not item.startswith("--") or "=" not in item:
            raise ConfigError(f"override must look like --key=value, got {item!r}")
        key, value = item[2:].split("=", 1)
        out[key] = value
    return out


# ----------------------------------------------------------------------
# Emission.

def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_trajectory_csv(path, records, traced):
    cols = list(TRAJECTORY_COLUMNS) + [f"diag_{i}" for i in traced]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for r in records:
            row = [r.step, r.time, r.offdiag_norm, r.inversions, r.lyapunov,
                   r.spectral_drift, *r.traces, *r.traced_diagonals]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_final_spectrum_csv(path, oracle, final_diag):
    order = np.argsort(final_diag, kind="stable")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,oracle,final_unsorted,final_sorted\n")
        for i in range(len(oracle)):
            row = [i, oracle[i], final_diag[i], final_diag[order[i]]]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_continuum_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("time,J1,J2,sup_a,sup_b,j2_drift_rel\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_fields_csv(path, state):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("z,a,b\n")
        for z, a, b in zip(state.z, state.a, state.b):
            fh.write(f"{_fmt(z)},{_fmt(a)},{_fmt(b)}\n")


def _versions():
    import scipy

    try:
        import numba

        numba_version = numba.__version__
    except ImportError:
        numba_version = None
    return {
        "isoflow": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba_version,
        "kernel_backend": _accel.backend(),
    }


def _outdir(cfg):
    root = os.environ.get("ISOFLOW_OUT") or cfg.out
    parts = [root, cfg.scenario]
    if cfg.run:
        parts.append(cfg.run)
    path = os.path.join(*parts)
    os.makedirs(path, exist_ok=True)
    return path


def _auto_h(L0, spec):
    scale = float(np.linalg.norm(flows.generator(L0, spec)))
    if scale == 0.0:
        return 1.0
    return 0.2 / scale


def run_scenario(cfg):
    """Execute one run; returns the manifest dict (with artifact paths)."""
    if cfg.flow == "continuum":
        return _run_continuum(cfg)
    return _run_matrix(cfg)


def _run_matrix(cfg):
    outdir = _outdir(cfg)
    timings = {}
    t0 = time.perf_counter()
    L0 = random_tridiagonal(cfg.n, cfg.seed)
    if cfg.flow in ("ipm", "diagflow"):
        lap = quantization.band_coefficients(quantization.build_generators(cfg.n))
    else:
        lap = None
    potential = flows.potential_diagonal(cfg.n) if cfg.flow in ("toda", "ipm") else None
    spec = flows.FlowSpec(kind=cfg.flow, potential=potential, laplacian=lap)
    timings["setup_s"] = time.perf_counter() - t0

    h = cfg.h if cfg.h > 0 else _auto_h(L0, spec)
    icfg = integrators.IntegratorConfig(
        h=h, steps=cfg.steps, fp_tol=cfg.fp_tol, fp_maxit=cfg.fp_maxit,
        record_every=cfg.record_every, method=cfg.method,
    )
    t0 = time.perf_counter()
    traj = integrators.run_flow(L0, spec, icfg, traced=cfg.traced)
    timings["integrate_s"] = time.perf_counter() - t0

    artifacts = []
    t0 = time.perf_counter()
    traj_path = os.path.join(outdir, "trajectory.csv")
    write_trajectory_csv(traj_path, traj.records, cfg.traced)
    artifacts.append(traj_path)

    oracle = matrixcore.jacobi_spectrum(L0).eigenvalues
    spec_path = os.path.join(outdir, "final_spectrum.csv")
    write_final_spectrum_csv(spec_path, oracle, np.diag(traj.snapshots[-1]).copy())
    artifacts.append(spec_path)

    raster_steps = []
    if cfg.rasters:
        basis = quantization.quantized_basis(
            lap if lap is not None
            else quantization.band_coefficients(quantization.build_generators(cfg.n))
        )
        snap_steps = np.rint(np.asarray(traj.times) / h).astype(int)
        picks = []
        for want in cfg.rasters:
            k = int(np.argmin(np.abs(snap_steps - want)))
            if k not in picks:
                picks.append(k)
        fields = [
            quantization.matrix_to_field(traj.snapshots[k], basis,
                                         (cfg.nlat, cfg.nlon))
            for k in picks
        ]
        vmax = max(float(np.max(np.abs(f.values))) for f in fields)
        for k, fld in zip(picks, fields):
            actual = int(snap_steps[k])
            png = os.path.join(outdir, f"raster_step{actual:06d}.png")
            raster.render_raster(fld, png, width=cfg.raster_width, vmax=vmax)
            artifacts.append(png)
            raster_steps.append(actual)
    timings["emit_s"] = time.perf_counter() - t0

    manifest = {
        "scenario": cfg.scenario,
        "run": cfg.run,
        "config": {**asdict(cfg), "h": h},
        "versions": _versions(),
        "prng": "splitmix64",
        "l0_frobenius_norm": float(np.linalg.norm(L0)),
        "final_offdiag_norm": traj.records[-1].offdiag_norm,
        "final_inversions": traj.records[-1].inversions,
        "raster_steps": raster_steps,
        "timings": timings,
        "artifacts": artifacts,
    }
    mpath = os.path.join(outdir, "manifest.json")
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest["manifest_path"] = mpath
    return manifest


def _run_continuum(cfg):
    outdir = _outdir(cfg)
    timings = {}
    state = continuum.gaussian_bump_state(
        npoints=cfg.npoints, length=cfg.length, amplitude=cfg.amplitude,
        width=cfg.width, center=cfg.center,
    )
    h = cfg.h if cfg.h > 0 else 0.5 * state.dz
    j2_0 = continuum.j_integral(state, 2)
    rows = []
    artifacts = []

    def record(t, s):
        j2 = continuum.j_integral(s, 2)
        drift = abs(j2 - j2_0) / abs(j2_0) if j2_0 != 0 else 0.0
        rows.append((t, continuum.j_integral(s, 1), j2,
                     float(np.max(np.abs(s.a))), float(np.max(np.abs(s.b))),
                     drift))

    t0 = time.perf_counter()
    record(0.0, state)
    snap_path = os.path.join(outdir, "fields_initial.csv")
    write_fields_csv(snap_path, state)
    artifacts.append(snap_path)
    for step in range(1, cfg.steps + 1):
        state = continuum.step_ab(state, h)
        if step % cfg.record_every == 0 or step == cfg.steps:
            record(step * h, state)
    timings["integrate_s"] = time.perf_counter() - t0

    series_path = os.path.join(outdir, "continuum_series.csv")
    write_continuum_csv(series_path, rows)
    artifacts.append(series_path)
    snap_path = os.path.join(outdir, "fields_final.csv")
    write_fields_csv(snap_path, state)
    artifacts.append(snap_path)

    manifest = {
        "scenario": cfg.scenario,
        "run": cfg.run,
        "config": {**asdict(cfg), "h": h},
        "versions": _versions(),
        "j2_initial": j2_0,
        "j2_final_drift_rel": rows[-1][-1],
        "timings": timings,
        "artifacts": artifacts,
    }
    mpath = os.path.join(outdir, "manifest.json")
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest["manifest_path"] = mpath
    return manifest


# ----------------------------------------------------------------------
# Command line.

def _cmd_run(args):
    overrides = parse_overrides(args.overrides)
    cfgs = apply_overrides(load_scenario(args.config), overrides)
    for cfg in cfgs:
        label = f"{cfg.scenario}/{cfg.run}" if cfg.run else cfg.scenario
        print(f"running {label} (flow={cfg.flow}, n={cfg.n}, steps={cfg.steps})")
        manifest = run_scenario(cfg)
        print(f"  wrote {manifest['manifest_path']}")
    return 0


def _cmd_list(_args):
    for name, (desc, runs) in PRESETS.items():
        print(f"{name}: {desc} ({len(runs)} run{'s' if len(runs) != 1 else ''})")
    return 0


def _cmd_spectrum(args):
    try:
        M = matrixcore.read_matrix_text(args.matrix_file)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.matrix_file}: {exc}") from exc
    report = matrixcore.jacobi_spectrum(M)
    for w in report.eigenvalues:
        print(_fmt(w))
    print(f"# residual {_fmt(report.residual)}", file=sys.stderr)
    return 0


_NUMERICAL_ERRORS = (
    integrators.NumericalFailure,
    integrators.FixedPointError,
    continuum.BreakdownError,
    matrixcore.ConvergenceError,
    quantization.SolvabilityError,
    matrixcore.MatrixError,
)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="isoflow",
        description="Isospectral double-bracket flow laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a preset or a key=value config file")
    p_run.add_argument("config", help="preset name or path to config file")
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list-scenarios", help="list built-in presets")
    p_list.set_defaults(func=_cmd_list)

    p_spec = sub.add_parser("spectrum", help="print the spectrum of a matrix file")
    p_spec.add_argument("matrix_file")
    p_spec.set_defaults(func=_cmd_spectrum)

    try:
        args, extras = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.command == "run":
            args.overrides = extras
        elif extras:
            raise ConfigError(f"unexpected arguments: {extras}")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
