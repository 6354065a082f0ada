"""Command-line runner: one subcommand per experiment kind plus figure presets.

    zerodist zeros --config run.json --seed 7 --threads 4 --out results/
    zerodist preset figure3 --out fig3/

Configs are flat JSON objects; unknown keys are rejected. Every run writes
a ``manifest.json`` listing each output file with its SHA-256 checksum.
Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .basis import Domain, WeightedSpace, build_basis, export_csv, gram_residual, requadrature_gram
from .clt import bump, clt_experiment
from .ensembles import CoefficientEnsemble
from .equilibrium import (ReferenceKind, ReferenceMeasure, bin_reference, boundary_fraction, tv_distance)
from .errors import (ConfigError, ContractError, DomainError, InsufficientSampleError, NoRootsError, NumericError,
                     ParameterError, ZeroDistError)
from .experiments import (FIGURE2_POINTS, MODELS, PRESETS, figure1_schedule, figure3_schedule, points_csv, run_zeros,
                          sample_fubini_study)
from .moments import moment_grid, report_json
from .realzeros import Model as RealModel, classical_constant, empirical_real_zeros, gaussian_real_zeros, kac_expected, \
    model_basis
from .zeros import EmpiricalMeasure2D, resolve_threads

log = logging.getLogger("zerodist")

KINDS = ("onb", "zeros", "equilibrium", "realzeros", "moments", "clt")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
_EPS = float(np.finfo(float).eps)

_DEFAULT_REFERENCE = {
    Domain.PLANE_GAUSSIAN: ReferenceKind.UNIT_DISK_UNIFORM,
    Domain.FUBINI_STUDY: ReferenceKind.FUBINI_STUDY,
    Domain.UNIT_SQUARE: ReferenceKind.SQUARE_BOUNDARY,
}


@dataclass
class ExperimentConfig:
    """Flat experiment description; JSON keys are the field names."""

    kind: str = "zeros"
    space: str = "plane_gaussian"
    ensemble: Any = "complex_gaussian"
    degrees: list = field(default_factory=lambda: [10])
    trials: int = 100
    np_constant: int | None = None
    seed: int = 0
    box: list = field(default_factory=lambda: [-2.0, 2.0, -2.0, 2.0])
    grid: list = field(default_factory=lambda: [256, 256])
    out: str = "out"
    threads: int = 1
    method: str = "auto"
    reference: str | None = None
    reference_degree: int = 40
    model: str = "kac"
    interval: list | None = None
    ks: list = field(default_factory=lambda: [1, 2, 3, 10, 50])
    nus: list = field(default_factory=lambda: [1, 2])
    directions: int = 20
    psi_radius: float = 0.5
    psi_center: list = field(default_factory=lambda: [0.0, 0.0])
    bulk_radius: float = 1.0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # validation -------------------------------------------------------------
    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        try:
            Domain(self.space)
        except ValueError:
            raise ConfigError(f"unknown space {self.space!r}") from None
        self.ensemble_obj()
        if not isinstance(self.degrees, list) or not self.degrees:
            raise ConfigError("degree list must be nonempty")
        if not all(_is_int(p) and p >= (0 if self.kind == "onb" else 1) for p in self.degrees):
            raise ConfigError(f"degrees must be integers >= 1, got {self.degrees}")
        for name in ("trials", "seed", "threads", "directions", "reference_degree"):
            if not _is_int(getattr(self, name)):
                raise ConfigError(f"{name} must be an integer")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.np_constant is not None and not (_is_int(self.np_constant) and self.np_constant >= 1):
            raise ConfigError("np_constant must be a positive integer")
        if not (isinstance(self.grid, list) and len(self.grid) == 2 and all(_is_int(g) and g >= 2 for g in self.grid)):
            raise ConfigError("grid must be [rows, cols] with both >= 2")
        if not (isinstance(self.box, list) and len(self.box) == 4 and all(_is_num(b) for b in self.box)):
            raise ConfigError("box must be [xmin, xmax, ymin, ymax]")
        if not (self.box[1] > self.box[0] and self.box[3] > self.box[2]):
            raise ConfigError(f"degenerate box {self.box}")
        if self.reference is not None:
            try:
                ReferenceKind(self.reference)
            except ValueError:
                raise ConfigError(f"unknown reference {self.reference!r}") from None
        if self.kind == "realzeros":
            try:
                RealModel(self.model)
            except ValueError:
                raise ConfigError(f"unknown real-zero model {self.model!r}") from None
        if self.method not in ("auto", "aberth", "companion"):
            raise ConfigError(f"unknown root method {self.method!r}")
        if self.interval is not None and not (isinstance(self.interval, list) and len(self.interval) == 2
                                              and all(_is_num(v) for v in self.interval)):
            raise ConfigError("interval must be [lo, hi]")
        if not (isinstance(self.psi_center, list) and len(self.psi_center) == 2 and all(_is_num(v) for v in self.psi_center)):
            raise ConfigError("psi_center must be [re, im]")
        if not (_is_num(self.psi_radius) and _is_num(self.bulk_radius)):
            raise ConfigError("psi_radius and bulk_radius must be numbers")
        if not all(_is_num(v) and v >= 1 for v in self.nus):
            raise ConfigError("nus must be numbers >= 1")
        if not all(_is_int(k) and k >= 1 for k in self.ks):
            raise ConfigError("ks must be integers >= 1")

    def ensemble_obj(self) -> CoefficientEnsemble:
        desc = {"kind": self.ensemble} if isinstance(self.ensemble, str) else self.ensemble
        try:
            return CoefficientEnsemble.from_dict(desc)
        except (ParameterError, TypeError, AttributeError) as exc:
            raise ConfigError(f"bad ensemble descriptor: {exc}") from None

    def schedule(self) -> list[tuple[int, int]]:
        """``(p, trials)`` pairs; ``np_constant`` fixes ``trials * p``."""
        if self.np_constant is None:
            return [(int(p), int(self.trials)) for p in self.degrees]
        return [(int(p), max(1, int(round(self.np_constant / max(p, 1))))) for p in self.degrees]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


# ----------------------------------------------------------------------------
# output bookkeeping
# ----------------------------------------------------------------------------


class OutputDir:
    """Writes files and records their checksums for the manifest."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            self.path.mkdir(parents=True, exist_ok=True)
            probe = self.path / ".write-test"
            probe.write_bytes(b"")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory {str(self.path)!r} is not writable: {exc}") from None
        self.files: dict[str, dict] = {}

    def write(self, name: str, data: str | bytes) -> None:
        raw = data.encode("utf-8") if isinstance(data, str) else data
        (self.path / name).write_bytes(raw)
        self.files[name] = {"sha256": hashlib.sha256(raw).hexdigest(), "bytes": len(raw)}

    def write_measure(self, stem: str, m: EmpiricalMeasure2D) -> None:
        self.write(f"{stem}.csv", m.to_csv())
        self.write(f"{stem}.pgm", m.to_pgm())


@dataclass
class RunManifest:
    kind: str
    config: dict
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True, default=_plain) + "\n"


def _plain(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


class _Timer:
    def __init__(self, sink: dict, key: str):
        self.sink, self.key = sink, key

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.sink[self.key] = round(time.perf_counter() - self.t0, 6)


# ----------------------------------------------------------------------------
# experiment kinds
# ----------------------------------------------------------------------------


def _basis_diagnostics(basis) -> dict:
    d = {"condition": basis.condition}
    if basis.space is not None:
        d["gram_residual"] = gram_residual(basis)
    return d


def _zero_diagnostics(run) -> dict:
    be = run.max_backward_error
    return {"trials": run.trials, "max_backward_error": be, "max_backward_error_eps": be / _EPS,
            "pairing_failures": run.pairing_failures, "in_box_fraction": run.measure.in_box_fraction()}


def run_onb(cfg: ExperimentConfig, out: OutputDir, man: RunManifest, threads: int) -> None:
    for p in cfg.degrees:
        with _Timer(man.timings, f"p{p}"):
            basis = build_basis(WeightedSpace(cfg.space, p))
            out.write(f"onb_p{p}.csv", export_csv(basis))
            G = requadrature_gram(basis)
            diag = _basis_diagnostics(basis)
            diag["requadrature_residual"] = float(np.abs(G - np.eye(p + 1)).max())
        man.diagnostics[f"p{p}"] = diag


def _zero_runs(cfg, out, man, threads, reference: bool):
    ens = cfg.ensemble_obj()
    shape = tuple(cfg.grid)
    rows = ["p,trials,tv,boundary_fraction"]
    for p, n in cfg.schedule():
        with _Timer(man.timings, f"p{p}"):
            basis = build_basis(WeightedSpace(cfg.space, p))
            run = run_zeros(basis, ens, n, (cfg.seed, p), cfg.box, shape, threads, cfg.method)
        diag = {**_basis_diagnostics(basis), **_zero_diagnostics(run)}
        out.write(f"zeros_p{p}.csv", run.zeros_csv())
        out.write_measure(f"bins_p{p}", run.measure)
        if reference:
            kind = ReferenceKind(cfg.reference) if cfg.reference else _DEFAULT_REFERENCE[Domain(cfg.space)]
            ref = bin_reference(ReferenceMeasure(kind, cfg.reference_degree), cfg.box, shape)
            tv = tv_distance(run.measure, ref)
            bf = boundary_fraction(run.measure) if kind is ReferenceKind.SQUARE_BOUNDARY else None
            diag["tv"] = tv
            rows.append(f"{p},{n},{tv!r},{'' if bf is None else repr(bf)}")
            if "reference.csv" not in out.files:
                out.write_measure("reference", ref)
        man.diagnostics[f"p{p}"] = diag
    if reference:
        out.write("tv.csv", "\n".join(rows) + "\n")


def run_zeros_kind(cfg, out, man, threads):
    _zero_runs(cfg, out, man, threads, reference=False)


def run_equilibrium(cfg, out, man, threads):
    _zero_runs(cfg, out, man, threads, reference=True)


def run_realzeros(cfg, out, man, threads):
    model = RealModel(cfg.model)
    # the default complex ensemble has no real zeros to count; fall back to real Gaussian
    ens = cfg.ensemble_obj() if cfg.ensemble != "complex_gaussian" else None
    lines = ["p,expected,leading_order,empirical_mean,empirical_se"]
    for p, n in cfg.schedule():
        with _Timer(man.timings, f"p{p}"):
            basis = model_basis(model, p)
            if model is RealModel.KAC:
                expected, lead = kac_expected(p), 2.0 / math.pi * math.log(p) if p > 1 else None
            else:
                expected = gaussian_real_zeros(2.0 * basis.log_coef, log=True)
                lead = classical_constant(model, p).value
            est = empirical_real_zeros(basis, ens, n, (cfg.seed, p), threads=threads,
                                       interval=None if cfg.interval is None else tuple(cfg.interval))
        lines.append(f"{p},{expected!r},{'' if lead is None else repr(lead)},{est.mean!r},{est.se!r}")
        man.diagnostics[f"p{p}"] = {"trials": n, "expected": expected, "empirical_mean": est.mean,
                                    "empirical_se": est.se}
    out.write("realzeros.csv", "\n".join(lines) + "\n")


def run_moments(cfg, out, man, threads):
    with _Timer(man.timings, "grid"):
        records = moment_grid([cfg.ensemble_obj()], cfg.ks, cfg.nus, cfg.directions, cfg.trials, cfg.seed)
    if not records:
        raise ConfigError("no (k, nu) cell of the grid has a bound for this ensemble")
    out.write("moments.json", report_json(records))
    man.diagnostics["records"] = len(records)
    man.diagnostics["violations"] = sum(not r["verdict"] for r in records)


def run_clt(cfg, out, man, threads):
    psi = bump(cfg.psi_radius, complex(*cfg.psi_center))
    for p, n in cfg.schedule():
        with _Timer(man.timings, f"p{p}"):
            rep = clt_experiment(psi, p, n, (cfg.seed, p), bulk_radius=cfg.bulk_radius, threads=threads)
        out.write(f"clt_p{p}.json", rep.to_json())
        out.write(f"clt_p{p}.csv", rep.sample_csv())
        man.diagnostics[f"p{p}"] = {"ks": rep.ks, "degenerate": rep.degenerate}


RUNNERS = {"onb": run_onb, "zeros": run_zeros_kind, "equilibrium": run_equilibrium, "realzeros": run_realzeros,
           "moments": run_moments, "clt": run_clt}


def run(cfg: ExperimentConfig, threads: int | None = None) -> RunManifest:
    """Execute ``cfg`` and write its outputs plus ``manifest.json`` into ``cfg.out``."""
    cfg.validate()
    threads = resolve_threads(cfg.threads if threads is None else threads)
    out = OutputDir(cfg.out)
    man = RunManifest(cfg.kind, {**cfg.to_dict(), "threads": threads})
    with _Timer(man.timings, "total"):
        RUNNERS[cfg.kind](cfg, out, man, threads)
    man.outputs = dict(sorted(out.files.items()))
    out.write("manifest.json", man.to_json())
    return man


# ----------------------------------------------------------------------------
# presets
# ----------------------------------------------------------------------------


def run_preset(name: str, out_dir: str, seed: int = 0, threads: int | None = None) -> RunManifest:
    """Figure presets; degree ``p`` of a figure uses seed ``(seed, p)``."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    threads = resolve_threads(threads)
    out = OutputDir(out_dir)
    man = RunManifest(f"preset:{name}", {"preset": name, "seed": seed, "threads": threads, "out": str(out_dir)})
    box, shape = (-2.0, 2.0, -2.0, 2.0), (256, 256)
    with _Timer(man.timings, "total"):
        if name == "figure2":
            z = sample_fubini_study(FIGURE2_POINTS, (seed, 2))
            m = EmpiricalMeasure2D(box, shape)
            m.add_points(z, 1)
            out.write("figure2_points.csv", points_csv(z))
            out.write_measure("figure2_bins", m)
            man.diagnostics["in_box"] = int(np.count_nonzero(m.bin_index(z)[2]))
        else:
            model = MODELS["square" if name == "figure1" else "su2"]
            sched = figure1_schedule() if name == "figure1" else figure3_schedule()
            for p, n in sched:
                with _Timer(man.timings, f"p{p}"):
                    basis = model.basis(p)
                    run = run_zeros(basis, model.ensemble, n, (seed, p), box, shape, threads)
                out.write(f"{name}_p{p}_zeros.csv", run.zeros_csv())
                out.write_measure(f"{name}_p{p}_bins", run.measure)
                man.diagnostics[f"p{p}"] = {**_basis_diagnostics(basis), **_zero_diagnostics(run)}
    man.outputs = dict(sorted(out.files.items()))
    out.write("manifest.json", man.to_json())
    return man


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------


def _load_config(path: str | None, kind: str, args) -> ExperimentConfig:
    raw: dict = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if raw.get("kind", kind) != kind:
            raise ConfigError(f"config kind {raw['kind']!r} does not match subcommand {kind!r}")
    raw = {**raw, "kind": kind}
    for key in ("seed", "threads", "out"):
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zerodist", description="Random polynomial zero experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run a '{kind}' experiment")
        sp.add_argument("--config", help="JSON config file (flat keys)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, help="worker threads (RZ_THREADS overrides)")
        sp.add_argument("--out", help="output directory")
    sp = sub.add_parser("preset", help="reproduce a figure")
    sp.add_argument("name", choices=PRESETS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--out", default=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "preset":
            man = run_preset(args.name, args.out or args.name, args.seed, args.threads)
            out = args.out or args.name
        else:
            cfg = _load_config(args.config, args.command, args)
            man = run(cfg, args.threads)
            out = cfg.out
    except (ConfigError, ParameterError, DomainError, ContractError, InsufficientSampleError) as exc:
        print(f"zerodist: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, NoRootsError, FloatingPointError, ZeroDivisionError) as exc:
        print(f"zerodist: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ZeroDistError as exc:  # pragma: no cover
        print(f"zerodist: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    log.info("wrote %d files to %s in %.2f s", len(man.outputs), out, man.timings.get("total", 0.0))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
