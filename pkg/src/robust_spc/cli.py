"""Command-line interface: calibrate | mse | arl | chart | reproduce.

Exit codes: 0 success, 2 usage error, 3 data error, 4 calibration failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .chart import CalibrationError, limits_for_alpha, phase1_sigma_hat, phase2_statistics, signal_probability
from .contamination import CLEAN, DIFFUSE_ASYMMETRIC, MODEL_KINDS, OutlierModel
from .estimators import LOCATION_KINDS, SCALE_NAMES
from .simulation import (
    DEFAULT_LOCATIONS,
    DEFAULT_PHI,
    DEFAULT_SCALES,
    FIGURES,
    Study,
    StudySpec,
    default_a_grid,
    emit_figure_data,
    ordering_checks,
    write_summary,
)
from .store import CalibrationFailed, CalibrationStore, default_cache_dir

__all__ = ["RunConfig", "UsageError", "DataError", "parse_a_grid", "parse_and_validate", "main"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CALIBRATION = 0, 2, 3, 4
COMMANDS = ("calibrate", "mse", "arl", "chart", "reproduce")

log = logging.getLogger("robust_spc")


class UsageError(Exception):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DataError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec: StudySpec
    out: Path
    cache_dir: Path
    phase1: Path | None = None
    phase2: Path | None = None
    extra: dict = field(default_factory=dict)

    def header(self) -> dict:
        """Resolved configuration for output headers (execution knobs omitted)."""
        head = {"command": self.command, **self.spec.header()}
        if self.command == "chart":
            for key in ("models", "phi", "mse_replicates", "arl_replicates"):
                head.pop(key, None)
            head["phase1"] = self.phase1.name if self.phase1 else ""
            head["phase2"] = self.phase2.name if self.phase2 else ""
        return head


# -- parsing ------------------------------------------------------------------

def parse_a_grid(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (inclusive), a comma list, or a single value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"a-grid {text!r} must be start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise ValueError(f"a-grid {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    vals = tuple(float(p) for p in text.split(",") if p.strip())
    if not vals:
        raise ValueError("empty a-grid")
    return vals


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in str(text).split(",") if p.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in str(text).split(",") if p.strip())


# (dest, type, help)
_OPTIONS = [
    ("n", int, "subgroup size"),
    ("k", int, "number of Phase I subgroups"),
    ("scale", str, f"scale estimator(s), comma separated: {', '.join(SCALE_NAMES)}"),
    ("loc", str, f"location estimator(s), comma separated: {', '.join(LOCATION_KINDS)}"),
    ("qn_variant", str, "Qn variant: median (median of pairs) or rc (order statistic)"),
    ("model", str, f"outlier model(s), comma separated: {' | '.join(MODEL_KINDS)}"),
    ("a", str, "severity grid, e.g. 1:0.5:4 or 2,3,4"),
    ("phi", str, "Phase II scale multipliers, comma separated"),
    ("replicates", int, "Monte Carlo replicates for the command's main study"),
    ("mse_replicates", int, "Phase I replicates N for the MSE study"),
    ("arl_replicates", int, "Phase I replicates M for the ARL study"),
    ("calibration_replicates", int, "clean replicates for alpha* calibration"),
    ("correction_replicates", int, "replicates for the unbiasing corrections"),
    ("target_arl0", float, "target in-control ARL"),
    ("kappa", float, "MSLOG breakdown constant"),
    ("huber_c", float, "Huber tuning constant"),
    ("seed", int, "root seed"),
    ("threads", int, "worker processes (default: all cores)"),
    ("out", str, "output directory"),
    ("cache_dir", str, "calibration cache directory"),
    ("phase1", str, "chart: Phase I CSV (one subgroup per row, header row required)"),
    ("phase2", str, "chart: Phase II CSV to monitor"),
]
_OPTION_TYPES = {dest: typ for dest, typ, _ in _OPTIONS}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for dest, _, help_text in _OPTIONS:
        common.add_argument("--" + dest.replace("_", "-"), dest=dest, default=None, help=help_text)
    common.add_argument("--config", default=None, help="flat key = value file; flags override it")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="robust-spc", description="Robust Phase I S-charts under contamination.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "calibrate": "pre-compute corrections and alpha* into the cache",
        "mse": "Phase I efficiency study",
        "arl": "Phase II ARL study",
        "chart": "build limits from Phase I data and monitor Phase II data",
        "reproduce": "run the full default grid with figure data and ordering checks",
    }
    for cmd in COMMANDS:
        sub.add_parser(cmd, parents=[common], help=helps[cmd])
    return parser


def read_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError([f"cannot read config file {path}: {exc}"]) from exc
    errors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not sep:
            errors.append(f"{path}:{lineno}: expected key = value")
        elif key not in _OPTION_TYPES:
            errors.append(f"{path}:{lineno}: unknown key {key!r}")
        else:
            values[key] = val.strip()
    if errors:
        raise UsageError(errors)
    return values


def parse_and_validate(argv=None) -> RunConfig:
    """Parse ``argv`` into a :class:`RunConfig`, reporting every violated constraint."""
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError([f"invalid command line (argparse exit {exc.code})"]) from exc
    raw = read_config_file(ns.config) if ns.config else {}
    raw.update({k: v for k, v in vars(ns).items() if k in _OPTION_TYPES and v is not None})

    errors: list[str] = []
    vals: dict = {}
    for key, text in raw.items():
        typ = _OPTION_TYPES[key]
        try:
            vals[key] = typ(text) if typ is not str else str(text)
        except ValueError:
            errors.append(f"--{key.replace('_', '-')}: expected {typ.__name__}, got {text!r}")

    cmd = ns.command
    kw: dict = {}
    for key in ("n", "k", "seed", "mse_replicates", "arl_replicates", "calibration_replicates",
                "correction_replicates", "target_arl0", "kappa", "huber_c"):
        if key in vals:
            kw[key] = vals[key]
    if "replicates" in vals:
        r = vals["replicates"]
        if cmd == "mse":
            kw.setdefault("mse_replicates", r)
        elif cmd == "arl":
            kw.setdefault("arl_replicates", r)
        elif cmd in ("calibrate", "chart"):
            kw.setdefault("calibration_replicates", r)
        else:
            kw.setdefault("mse_replicates", r)
            kw.setdefault("arl_replicates", max(100, r // 5))

    variant = vals.get("qn_variant", "median")
    if variant not in ("median", "rc"):
        errors.append(f"--qn-variant must be median or rc, got {variant!r}")
    default_scale = "sd" if cmd == "chart" else ",".join(DEFAULT_SCALES)
    default_loc = "mean" if cmd == "chart" else ",".join(DEFAULT_LOCATIONS)
    scales = []
    for name in _names(vals.get("scale", default_scale)):
        if name not in SCALE_NAMES:
            errors.append(f"unknown scale estimator {name!r}; choose from {', '.join(SCALE_NAMES)}")
        scales.append("qn-rc" if name == "qn" and variant == "rc" else name)
    locs = list(_names(vals.get("loc", default_loc)))
    for name in locs:
        if name not in LOCATION_KINDS:
            errors.append(f"unknown location estimator {name!r}; choose from {', '.join(LOCATION_KINDS)}")
    if cmd == "chart" and (len(scales) != 1 or len(locs) != 1):
        errors.append("chart needs exactly one --scale and one --loc")
    kw["scales"] = tuple(dict.fromkeys(scales))
    kw["locations"] = tuple(dict.fromkeys(locs))

    a_grid = None
    if "a" in vals:
        try:
            a_grid = parse_a_grid(vals["a"])
        except ValueError as exc:
            errors.append(f"--a: {exc}")
    kinds = _names(vals.get("model", ",".join(MODEL_KINDS)))
    models = []
    for kind in kinds:
        if kind not in MODEL_KINDS:
            errors.append(f"unknown model {kind!r}; choose from {' | '.join(MODEL_KINDS)}")
            continue
        grid = (1.0,) if kind == CLEAN else (a_grid if a_grid is not None else default_a_grid(kind))
        for a in grid:
            if kind == DIFFUSE_ASYMMETRIC and a != int(a):
                errors.append(f"model m2 needs integer chi-square degrees of freedom, got a={a:g}")
                continue
            try:
                models.append(OutlierModel(kind, a))
            except ValueError as exc:
                errors.append(str(exc))
    if models:
        kw["models"] = tuple(dict.fromkeys(models))

    if "phi" in vals:
        try:
            kw["phi_values"] = _floats(vals["phi"])
        except ValueError:
            errors.append(f"--phi: malformed list {vals['phi']!r}")
    else:
        kw["phi_values"] = DEFAULT_PHI

    threads = vals.get("threads", os.cpu_count() or 1)
    if threads < 1:
        errors.append("--threads must be at least 1")
    kw["threads"] = max(1, threads)

    n = kw.get("n", 5)
    if n < 2:
        errors.append(f"subgroup size n must be at least 2, got {n}")
    if kw.get("k", 50) < 2:
        errors.append(f"subgroup count k must be at least 2, got {kw['k']}")
    for key in ("replicates", "mse_replicates", "arl_replicates", "calibration_replicates", "correction_replicates"):
        if key in vals and vals[key] < 100:
            errors.append(f"--{key.replace('_', '-')} must be at least 100, got {vals[key]}")
    if any(p <= 0 for p in kw.get("phi_values", ())):
        errors.append("--phi values must be positive")
    if kw.get("target_arl0", 370.4) <= 1:
        errors.append("--target-arl0 must exceed 1")
    if not 0 < kw.get("kappa", 0.5) < 1:
        errors.append("--kappa must lie in (0, 1)")
    if kw.get("huber_c", 1.5) <= 0:
        errors.append("--huber-c must be positive")

    phase1 = Path(vals["phase1"]) if "phase1" in vals else None
    phase2 = Path(vals["phase2"]) if "phase2" in vals else None
    if cmd == "chart" and phase1 is None:
        errors.append("chart needs --phase1")

    spec = None
    if not errors:
        try:
            spec = StudySpec(**kw)
        except ValueError as exc:
            errors.append(str(exc))
    if errors:
        raise UsageError(errors)
    out = Path(vals.get("out", "."))
    cache = Path(vals["cache_dir"]) if "cache_dir" in vals else default_cache_dir()
    return RunConfig(cmd, spec, out, cache, phase1, phase2, {"verbose": ns.verbose, "n_given": "n" in vals})


# -- commands -----------------------------------------------------------------

def _header_text(header: dict, calibration=()) -> str:
    lines = [f"# {k}: {v}" for k, v in header.items()]
    lines += [f"# calibration: {k} = {v!r}" for k, v in calibration]
    return "\n".join(lines) + "\n"


def run_calibrate(cfg: RunConfig) -> list[Path]:
    study = Study(cfg.spec, CalibrationStore(cfg.cache_dir))
    specs = study.scale_specs()
    alphas = study.alpha_stars()
    cfg.out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(_header_text(cfg.header(), list(dict.fromkeys(study.calibration_used))))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("artifact", "scale", "location", "value"))
    for s in specs:
        w.writerow(("correction", s.name, "", repr(s.correction)))
    for (s, l), a in alphas.items():
        w.writerow(("alpha_star", s, l, repr(a)))
    path = cfg.out / "calibration.csv"
    path.write_text(buf.getvalue(), encoding="utf-8")
    print(buf.getvalue().split("\n", len(cfg.header()))[-1], end="")
    return [path]


def _study_outputs(cfg: RunConfig, results: dict, figure_dir: Path) -> list[Path]:
    paths = []
    cfg.out.mkdir(parents=True, exist_ok=True)
    for kind, result in results.items():
        result.meta = {"command": cfg.command, **result.meta}
        paths.append(result.to_csv(cfg.out / f"{kind}.csv"))
        models = {r["model"] for r in result.rows}
        for fig, (fkind, model, setting) in FIGURES.items():
            if fkind != kind or model not in models:
                continue
            if setting == "disturbed" and not any(p != 1.0 for p in cfg.spec.phi_values):
                continue
            if setting == "in-control" and 1.0 not in cfg.spec.phi_values:
                continue
            paths.extend(emit_figure_data(result, fig, figure_dir))
    return paths


def run_study_command(cfg: RunConfig) -> list[Path]:
    study = Study(cfg.spec, CalibrationStore(cfg.cache_dir))
    results = study.run((cfg.command,))
    return _study_outputs(cfg, results, cfg.out / "figures")


def run_reproduce(cfg: RunConfig) -> list[Path]:
    study = Study(cfg.spec, CalibrationStore(cfg.cache_dir))
    results = study.run(("mse", "arl"))
    paths = _study_outputs(cfg, results, cfg.out / "figures")
    try:
        checks = ordering_checks(results["mse"], results["arl"], cfg.spec.target_arl0)
    except (KeyError, ValueError) as exc:
        log.warning("ordering checks skipped: grid does not cover them (%s)", exc)
        checks = []
    paths.append(write_summary(checks, cfg.out / "summary.csv", cfg.header()))
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] criterion {c.criterion}: {c.description} ({c.detail})")
    manifest = cfg.out / "manifest.txt"
    lines = [f"{hashlib.sha256(p.read_bytes()).hexdigest()}  {p.relative_to(cfg.out).as_posix()}"
             for p in sorted(paths)]
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return paths + [manifest]


def read_subgroups(path: Path, n: int | None = None) -> np.ndarray:
    """Rows of a subgroup CSV (header row mandatory, comma separated, '.' decimals)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one subgroup")
    width = len(rows[0])
    data = []
    for i, row in enumerate(rows[1:], 2):
        if len(row) != width:
            raise DataError(f"{path}:{i}: expected {width} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise DataError(f"{path}:{i}: non-numeric cell ({exc})") from exc
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"{path}:{i}: non-finite value")
        data.append(vals)
    if n is not None and width != n:
        raise DataError(f"{path}: rows have {width} values but n = {n}")
    if width < 2:
        raise DataError(f"{path}: subgroups need at least 2 observations")
    return np.array(data)


def run_chart(cfg: RunConfig, n_given: bool) -> list[Path]:
    phase1 = read_subgroups(cfg.phase1, cfg.spec.n if n_given else None)
    k, n = phase1.shape
    if k < 2:
        raise DataError(f"{cfg.phase1}: need at least 2 Phase I subgroups")
    phase2 = read_subgroups(cfg.phase2, n) if cfg.phase2 else None
    spec = replace(cfg.spec, n=n, k=k)
    cfg = replace(cfg, spec=spec)
    study = Study(spec, CalibrationStore(cfg.cache_dir))
    sspec = study.scale_specs()[0]
    lspec = study.location_specs()[0]
    alpha = study.alpha_stars()[(sspec.name, lspec.name)]
    try:
        sigma = phase1_sigma_hat(phase1, sspec, lspec)
    except ValueError as exc:
        raise DataError(f"{cfg.phase1}: {exc}") from exc
    lim = limits_for_alpha(sigma, n, alpha)
    header = {
        **cfg.header(),
        "alpha_star": repr(alpha),
        "l_factor": repr(lim.l_factor),
        "u_factor": repr(lim.u_factor),
        "correction": repr(sspec.correction),
        "in_control_signal_probability": repr(signal_probability(limits_for_alpha(1.0, n, alpha))),
    }
    calib = list(dict.fromkeys(study.calibration_used))
    cfg.out.mkdir(parents=True, exist_ok=True)
    lines = [_header_text(header, calib), "quantity,value\n"]
    lines += [f"{name},{val!r}\n" for name, val in (("center", lim.center), ("lcl", lim.lcl), ("ucl", lim.ucl))]
    limits_path = cfg.out / "limits.csv"
    limits_path.write_text("".join(lines), encoding="utf-8")
    print(f"center={lim.center!r} lcl={lim.lcl!r} ucl={lim.ucl!r} alpha*={alpha!r}")
    paths = [limits_path]
    if phase2 is not None:
        stats = phase2_statistics(phase2)
        flags = lim.signals(stats)
        buf = io.StringIO()
        buf.write(_header_text(header, calib))
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("subgroup", "sd", "signal"))
        for i, (s, f) in enumerate(zip(stats, flags), 1):
            w.writerow((i, repr(float(s)), int(f)))
        p2 = cfg.out / "phase2.csv"
        p2.write_text(buf.getvalue(), encoding="utf-8")
        paths.append(p2)
        print(f"phase II: {int(flags.sum())} of {flags.size} subgroups signal")
    return paths


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_and_validate(argv)
    except UsageError as exc:
        for err in exc.errors:
            print(f"robust-spc: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if cfg.extra.get("verbose") else logging.WARNING,
                        format="%(asctime)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if cfg.command == "calibrate":
            run_calibrate(cfg)
        elif cfg.command in ("mse", "arl"):
            run_study_command(cfg)
        elif cfg.command == "chart":
            run_chart(cfg, n_given=cfg.extra.get("n_given", False))
        else:
            run_reproduce(cfg)
    except DataError as exc:
        print(f"robust-spc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (CalibrationFailed, CalibrationError) as exc:
        print(f"robust-spc: calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except OSError as exc:
        print(f"robust-spc: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
