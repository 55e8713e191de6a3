"""Experiment orchestration: JSON configs, seeded campaigns, CSV/SVG artifacts.

Every experiment kind maps to one pipeline.  A run writes a CSV table with a
versioned schema line, an optional SVG plot and ``manifest.json``, which
records the config hash, seed, library versions and wall time.  Everything
but the wall time is a function of (config, seed).

Usage::

    volterra-levy verify-cf --config cf.json --out runs/cf
    volterra-levy report runs/*/manifest.json
"""

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .drift import synth_besov_drift
from .errors import ConfigurationError, NotFoundError, VolterraLevyError
from .kernels import kernel_from_spec
from .levy import model_from_spec
from .lnd import LndProbeConfig, lnd_infimum, min_admissible_zeta
from .occupation import (Lattice, estimate_spatial_regularity, estimate_time_regularity,
                         histogram_fourier, occupation_fourier, occupation_histogram, spectral_localtime)
from .pathsim import SamplePath, char_function_mc_array, char_function_theory, simulate_ensemble, uniform_grid
from .young import PicardConfig, build_gamma_from_drift, flow_derivative, picard_solve

KINDS = ("simulate", "verify-cf", "localtime", "regularity", "lnd", "solve-sde", "flow")
THREADS_ENV = "VOLTERRA_LEVY_THREADS"
SCHEMA_VERSION = 1

SCHEMAS = {
    "simulate": ["replica", "t", "z"],
    "verify-cf": ["xi", "t", "mc_re", "mc_im", "stderr", "theory_re", "z_score"],
    "localtime": ["x", "histogram", "spectral"],
    "regularity": ["kappa_hat", "ci_lo", "ci_hi", "r2", "gamma_hat", "gamma_ci_lo", "gamma_ci_hi",
                   "gamma_r2", "cutoff", "replicas"],
    "lnd": ["zeta", "infimum", "slope", "small_radius_inf", "zeta_min"],
    "solve-sde": ["t", "theta", "z", "x"],
    "flow": ["t", "theta", "flow", "flow_fd"],
}

# fields every kind needs, beyond kind/seed/out
REQUIRED = {
    "simulate": ("kernel", "model"),
    "verify-cf": ("kernel", "model"),
    "localtime": ("kernel", "model"),
    "regularity": ("kernel", "model"),
    "lnd": ("kernel", "model"),
    "solve-sde": ("kernel", "model", "drift"),
    "flow": ("kernel", "model", "drift"),
}


# ----------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """One experiment.

    ``kernel`` and ``model`` are the dicts understood by ``kernel_from_spec``
    and ``model_from_spec``; ``drift`` is ``{"beta": .., "seed": ..}``.
    ``params`` holds kind-specific knobs (frequency lists, lags, ...).
    """

    kind: str
    kernel: dict = None
    model: dict = None
    T: float = 1.0
    n_steps: int = 1024
    M: int = 512
    L: float = 2 * np.pi * 16
    xi_cutoff: float = 2000.0
    replicas: int = 1000
    seed: int = 0
    drift: dict = None
    out: str = "out"
    params: dict = field(default_factory=dict)

    def validate(self):
        errs = []
        if self.kind not in KINDS:
            errs.append(f"kind: must be one of {', '.join(KINDS)}, got {self.kind!r}")
        for name in ("T", "n_steps", "M", "L", "xi_cutoff", "replicas"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                errs.append(f"{name}: must be a positive number, got {v!r}")
        for name in ("n_steps", "M", "replicas"):
            if isinstance(getattr(self, name), float):
                errs.append(f"{name}: must be an integer")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            errs.append(f"seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        for name in REQUIRED.get(self.kind, ()):
            v = getattr(self, name)
            if not isinstance(v, dict) or ("kind" not in v and name != "drift"):
                errs.append(f"{name}: required for kind {self.kind!r}")
        if self.kind in ("solve-sde", "flow") and isinstance(self.drift, dict) and "beta" not in self.drift:
            errs.append("drift.beta: required")
        if errs:
            raise ConfigurationError("invalid config: " + "; ".join(errs))
        for name, build in (("kernel", kernel_from_spec), ("model", model_from_spec)):
            spec = getattr(self, name)
            if spec is not None:
                try:
                    build(spec)
                except (TypeError, ValueError) as e:
                    raise ConfigurationError(f"{name}: {e}") from e
        return self

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config is not valid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigurationError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigurationError(f"unknown config fields: {', '.join(sorted(extra))}")
        if "kind" not in raw:
            raise ConfigurationError("kind: required")
        return cls(**raw)

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text())

    def hash(self):
        canon = asdict(self)
        canon.pop("out")
        return hashlib.sha256(json.dumps(canon, sort_keys=True).encode()).hexdigest()


def default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as e:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer") from e
        if n < 1:
            raise ConfigurationError(f"{THREADS_ENV} must be positive")
        return n
    return os.cpu_count() or 1


# ----------------------------------------------------------------------------
# campaigns


def _batch(args):
    kernel_spec, model_spec, grid, seed, first, count = args
    return simulate_ensemble(kernel_from_spec(kernel_spec), model_from_spec(model_spec), grid, seed,
                             count, first_replica=first)


def parallel_ensemble(kernel_spec, model_spec, grid, seed, replicas, threads=1, batch=2000):
    """Replica array ``(R, N + 1, d)`` computed in batches, optionally in a process pool.

    Each replica owns its random stream, so the result does not depend on
    ``threads`` or ``batch``.
    """
    jobs = [(kernel_spec, model_spec, grid, seed, a, min(batch, replicas - a))
            for a in range(0, replicas, batch)]
    if threads <= 1 or len(jobs) == 1:
        parts = [_batch(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_batch, jobs))
    return np.concatenate(parts)


# ----------------------------------------------------------------------------
# tables


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_table(path, kind, rows):
    cols = SCHEMAS[kind]
    buf = io.StringIO()
    buf.write(f"# schema: {kind}/{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        if len(r) != len(cols):
            raise ValueError(f"row has {len(r)} fields, schema {kind} has {len(cols)}")
        w.writerow([_fmt(v) for v in r])
    Path(path).write_text(buf.getvalue())


def read_table(path):
    """Read a table written by ``write_table``, validating its schema line and header."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# schema: "):
        raise ConfigurationError(f"{path}: missing schema line")
    kind, _, ver = lines[0][len("# schema: "):].partition("/")
    if kind not in SCHEMAS or ver != str(SCHEMA_VERSION):
        raise ConfigurationError(f"{path}: unknown schema {lines[0]!r}")
    rows = list(csv.reader(lines[1:]))
    if rows[0] != SCHEMAS[kind]:
        raise ConfigurationError(f"{path}: header {rows[0]} does not match schema {kind}")
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(rows[0]))
    return kind, {c: data[:, i] for i, c in enumerate(rows[0])}


def _plot(path, series, xlabel, ylabel, title, logx=False, logy=False):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "volterra-levy"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, y, style in series:
        ax.plot(x, y, style, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


# ----------------------------------------------------------------------------
# pipelines; each returns (rows, extra manifest entries, checks, plot or None)


def _grid(cfg):
    return uniform_grid(cfg.T, int(cfg.n_steps))


def _run_simulate(cfg, threads):
    grid = _grid(cfg)
    z = parallel_ensemble(cfg.kernel, cfg.model, grid, cfg.seed, cfg.replicas, threads)
    keep = int(cfg.params.get("keep", min(cfg.replicas, 8)))
    rows = [(r, t, z[r, i, 0]) for r in range(keep) for i, t in enumerate(grid)]
    var = float(np.var(z[:, -1, 0]))
    return rows, {"var_final": var}, {}, None


def _run_verify_cf(cfg, threads):
    kernel, model = kernel_from_spec(cfg.kernel), model_from_spec(cfg.model)
    grid = _grid(cfg)
    xis = np.asarray(cfg.params.get("xi", np.linspace(0.2, 2.0, 10)), dtype=float)
    ts = np.asarray(cfg.params.get("t", grid[[len(grid) // 4, len(grid) // 2, 3 * len(grid) // 4, -1]]),
                    dtype=float)
    z = parallel_ensemble(cfg.kernel, cfg.model, grid, cfg.seed, cfg.replicas, threads)
    rows = []
    e1 = np.zeros(model.dim)
    e1[0] = 1.0
    for t in ts:
        i = int(np.argmin(np.abs(grid - t)))
        if abs(grid[i] - t) > 1e-9 * max(1.0, cfg.T):
            raise ConfigurationError(f"params.t: {t} is not a grid time")
        for x in xis:
            est, se = char_function_mc_array(z[:, i, :], x * e1)
            th = char_function_theory(kernel, model, x * e1, grid[i])
            zs = (est.real - th.real) / se.real if se.real > 0 else 0.0
            rows.append((x, grid[i], est.real, est.imag, se.real, th.real, zs))
    zsc = np.abs([r[-1] for r in rows])
    checks = {"cf_zscores": bool(np.all(zsc <= 3) and np.mean(zsc <= 2) >= 0.95)}
    last = [r for r in rows if r[1] == rows[-1][1]]
    plot = ([("MC", [r[0] for r in last], [r[2] for r in last], "o"),
             ("theory", [r[0] for r in last], [r[5] for r in last], "-")],
            "xi", "Re phi", f"characteristic function at t={rows[-1][1]:.4g}")
    return rows, {"max_abs_z": float(zsc.max())}, checks, plot


def _run_localtime(cfg, threads):
    grid = _grid(cfg)
    z = parallel_ensemble(cfg.kernel, cfg.model, grid, cfg.seed, 1, 1)
    lat = Lattice(int(cfg.M), float(cfg.L))
    path = SamplePath(grid, z[0])
    band = float(cfg.params.get("band", 0.5))
    ltf = occupation_histogram(path, 0.0, cfg.T, lat, periodic=True)
    hist = spectral_localtime(histogram_fourier(ltf), band=band)
    spec = spectral_localtime(occupation_fourier(path, 0.0, cfg.T, lat.dual()), band=band)
    gap = float(np.linalg.norm(hist - spec) / np.linalg.norm(hist))
    x = lat.centers()
    rows = list(zip(x, hist, spec))
    plot = ([("histogram", x, hist, "-"), ("spectral", x, spec, "--")], "x", "L_T(x)",
            "local time, two routes")
    return rows, {"route_gap": float(gap)}, {}, plot


def _run_regularity(cfg, threads):
    grid = _grid(cfg)
    z = parallel_ensemble(cfg.kernel, cfg.model, grid, cfg.seed, cfg.replicas, threads)
    ens = (grid, z)
    radii = np.geomspace(0.5, cfg.xi_cutoff, 60)
    fit_range = tuple(cfg.params.get("fit_range", (1 / 8, 1 / 2)))
    sp = estimate_spatial_regularity(ens, 0.0, cfg.T, freq=radii, seed=cfg.seed, fit_range=fit_range)
    kappa = float(cfg.params.get("kappa", 0.25))
    nl = int(cfg.params.get("n_lags", 6))
    lags = cfg.T / 2.0 ** np.arange(1, nl + 1)
    tr = estimate_time_regularity(ens, kappa, lags, seed=cfg.seed)
    rows = [(sp.kappa_hat, sp.ci[0], sp.ci[1], sp.r2, tr.gamma_hat, tr.ci[0], tr.ci[1], tr.r2, sp.cutoff,
             cfg.replicas)]
    checks = {}
    if "expect_kappa" in cfg.params:
        checks["kappa_in_ci"] = bool(sp.ci[0] <= cfg.params["expect_kappa"] <= sp.ci[1])
    plot = ([("E|mu_hat|^2", sp.radii, sp.moment, "o")], "|xi|", "moment", "spatial decay")
    return rows, {"lambda_hat": sp.lambda_hat}, checks, (plot[0], *plot[1:], True, True)


def _run_lnd(cfg, threads):
    kernel, model = kernel_from_spec(cfg.kernel), model_from_spec(cfg.model)
    alpha = float(cfg.params.get("alpha", model.alpha))
    zetas = cfg.params.get("zeta", [0.5, 1.0])
    probe = LndProbeConfig(alpha=alpha, seed=cfg.seed)
    try:
        zmin = min_admissible_zeta(kernel, model, alpha, probe)
    except NotFoundError:
        zmin = float("nan")
    rows = []
    for zeta in zetas:
        probe.zeta = float(zeta)
        res = lnd_infimum(kernel, model, probe)
        rows.append((zeta, res.infimum, res.slope, res.small_radius_inf, zmin))
    return rows, {"zeta_min": zmin}, {}, None


def _sde_setup(cfg, threads):
    grid = _grid(cfg)
    z = parallel_ensemble(cfg.kernel, cfg.model, grid, cfg.seed, 1, 1)[0]
    if z.shape[1] != 1:
        raise ConfigurationError("solve-sde and flow support d = 1")
    path = SamplePath(grid, z)
    lat = Lattice(int(cfg.M), float(cfg.L))
    if np.ptp(z) > 0.9 * cfg.L:
        import warnings

        warnings.warn("path excursion exceeds 90% of the period", stacklevel=2)
    step = int(cfg.params.get("mark_step", 1))
    ltf = occupation_histogram(path, 0.0, cfg.T, lat, marks=grid[::step], periodic=True)
    b = synth_besov_drift(float(cfg.drift["beta"]), 1, lat, int(cfg.drift.get("seed", cfg.seed)),
                          float(cfg.drift.get("amplitude", 1.0)))
    gam = build_gamma_from_drift(b, ltf, gamma=float(cfg.params.get("gamma", 0.5)))
    pc = PicardConfig(tol=float(cfg.params.get("tol", 1e-8)))
    return gam, z[::step, 0], pc


def _run_solve(cfg, threads):
    gam, z, pc = _sde_setup(cfg, threads)
    xi0 = float(cfg.params.get("xi0", 0.0))
    sol = picard_solve(gam, xi0, pc, z=z)
    rows = [(t, th, zz, th + zz) for t, th, zz in zip(sol.times, sol.theta[:, 0], z)]
    extra = {"residual": sol.residual, "max_factor": float(sol.factors.max()), "windows": len(sol.windows),
             "iterations": sol.iterations, "holder": sol.holder, "gamma_hat": gam.constants["gamma_hat"]}
    checks = {"fixed_point": bool(sol.residual <= pc.tol), "contraction": bool(sol.factors.max() <= 0.5)}
    plot = ([("theta", sol.times, sol.theta[:, 0], "-"), ("x", sol.times, sol.theta[:, 0] + z, "-")], "t", "",
            "regularized SDE")
    return rows, extra, checks, plot


def _run_flow(cfg, threads):
    gam, z, pc = _sde_setup(cfg, threads)
    xi0 = float(cfg.params.get("xi0", 0.0))
    h = float(cfg.params.get("h", 1e-4))
    tight = PicardConfig(tol=1e-13)
    sol = picard_solve(gam, xi0, pc)
    J = flow_derivative(gam, sol)[:, 0, 0]
    up = picard_solve(gam, xi0 + h, tight, euler_check=False).theta[:, 0]
    dn = picard_solve(gam, xi0 - h, tight, euler_check=False).theta[:, 0]
    fd = (up - dn) / (2 * h)
    rows = list(zip(sol.times, sol.theta[:, 0], J, fd))
    rel = float(np.max(np.abs(J - fd) / np.abs(fd)))
    return rows, {"flow_rel_err": rel}, {"flow_fd": bool(rel <= 1e-2)}, None


PIPELINES = {
    "simulate": _run_simulate,
    "verify-cf": _run_verify_cf,
    "localtime": _run_localtime,
    "regularity": _run_regularity,
    "lnd": _run_lnd,
    "solve-sde": _run_solve,
    "flow": _run_flow,
}


def _sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _versions():
    import scipy

    return {"volterra_levy": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def run_experiment(config, threads=None):
    """Run one experiment and write its artifacts to ``config.out``; returns the manifest dict."""
    cfg = config.validate()
    threads = default_threads() if threads is None else int(threads)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        rows, extra, checks, plot = PIPELINES[cfg.kind](cfg, threads)
    except VolterraLevyError as e:
        raise type(e)(f"[{cfg.kind}, config {cfg.hash()[:12]}] {e}") from e
    table = out / f"{cfg.kind}.csv"
    write_table(table, cfg.kind, rows)
    outputs = {table.name: _sha(table)}
    if plot is not None and cfg.params.get("plot", True):
        svg = out / f"{cfg.kind}.svg"
        _plot(svg, *plot)
        outputs[svg.name] = _sha(svg)
    (out / "config.json").write_text(cfg.to_json())
    manifest = {
        "kind": cfg.kind,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "versions": _versions(),
        "outputs": outputs,
        "results": {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in extra.items()},
        "criteria": {k: {"passed": bool(v)} for k, v in checks.items()},
        "wall_time": time.perf_counter() - t0,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


# ----------------------------------------------------------------------------
# reports


def emit_report(manifests):
    """Aggregate ``criteria`` entries of manifests into rows ``(id, passed, source)``.

    ``manifests`` are paths or already-loaded dicts.  Returns ``(rows,
    exit_code)`` with exit code 1 if any criterion failed.
    """
    rows = []
    for m in manifests:
        if isinstance(m, (str, os.PathLike)):
            p = Path(m)
            if p.is_dir():
                p = p / "manifest.json"
            if not p.exists():
                raise NotFoundError(f"missing manifest {p}")
            src, m = str(p), json.loads(p.read_text())
        else:
            src = m.get("kind", "?")
        for cid, rec in sorted(m.get("criteria", {}).items()):
            rows.append((cid, bool(rec["passed"]), src))
    code = 0 if all(r[1] for r in rows) else 1
    return rows, code


def format_report(rows):
    lines = [f"{'criterion':<24} {'result':<6} source"]
    for cid, ok, src in rows:
        lines.append(f"{cid:<24} {'PASS' if ok else 'FAIL':<6} {src}")
    return "\n".join(lines)


# ----------------------------------------------------------------------------
# command line


def build_parser():
    ap = argparse.ArgumentParser(prog="volterra-levy", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--replicas", type=int, help="override the replica count")
        p.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or all cores)")
    p = sub.add_parser("report", help="aggregate manifests into a pass/fail table")
    p.add_argument("manifests", nargs="*")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            rows, code = emit_report(args.manifests)
            print(format_report(rows))
            return code
        cfg = ExperimentConfig.load(args.config)
        if cfg.kind != args.command:
            raise ConfigurationError(f"config kind {cfg.kind!r} does not match command {args.command!r}")
        for name in ("seed", "out", "replicas"):
            v = getattr(args, name)
            if v is not None:
                setattr(cfg, name, v)
        manifest = run_experiment(cfg, threads=args.threads)
    except (ConfigurationError, FileNotFoundError, NotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    failed = [k for k, v in manifest["criteria"].items() if not v["passed"]]
    print(f"{cfg.kind}: wrote {', '.join(manifest['outputs'])} to {cfg.out}")
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
