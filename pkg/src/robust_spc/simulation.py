"""Monte Carlo studies of Phase I efficiency (MSE) and Phase II ARL.

Each (model, a) cell draws its Phase I replicates from its own substreams
and evaluates every (scale, location) combination on the same draws. When
both studies run, the ARL study reuses the first M of the N MSE
replicates. Work is split into fixed replicate chunks and reduced in
replicate order, so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .chart import DEFAULT_TARGET_ARL0, alpha_for_target, arl_from_sigma_hats
from .contamination import CLEAN, DIFFUSE_ASYMMETRIC, DIFFUSE_SYMMETRIC, LOCALIZED, OutlierModel, phase1_replicates
from .estimators import (
    LOCATION_KINDS,
    LocationEstimatorSpec,
    ScaleEstimatorSpec,
    correction_factor,
    locate_rows,
    scale_rows,
)
from .rng import Role
from .store import SEED_POLICY_VERSION, CalibrationStore, canonical_key

__all__ = [
    "DEFAULT_SCALES",
    "DEFAULT_LOCATIONS",
    "DEFAULT_PHI",
    "FIGURES",
    "StudySpec",
    "StudyResult",
    "Study",
    "default_a_grid",
    "default_models",
    "run_mse_study",
    "run_arl_study",
    "emit_figure_data",
    "read_study_csv",
    "Check",
    "ordering_checks",
    "write_summary",
]

log = logging.getLogger(__name__)

DEFAULT_SCALES = ("sd", "mad", "qn", "mslog")
DEFAULT_LOCATIONS = LOCATION_KINDS
DEFAULT_PHI = (1.0, 1.4)
CHUNK = 1000

COLUMNS = ("model", "a", "scale", "location", "phi", "metric", "value", "se", "excluded", "replicates", "valid")

# figure id -> (study kind, model, phase II setting)
FIGURES = {
    2: ("mse", DIFFUSE_SYMMETRIC, None),
    3: ("mse", DIFFUSE_ASYMMETRIC, None),
    4: ("mse", LOCALIZED, None),
    5: ("arl", DIFFUSE_SYMMETRIC, "in-control"),
    6: ("arl", DIFFUSE_SYMMETRIC, "disturbed"),
    7: ("arl", DIFFUSE_ASYMMETRIC, "in-control"),
    8: ("arl", DIFFUSE_ASYMMETRIC, "disturbed"),
    9: ("arl", LOCALIZED, "in-control"),
    10: ("arl", LOCALIZED, "disturbed"),
}


def default_a_grid(kind: str) -> tuple[float, ...]:
    if kind == CLEAN:
        return (1.0,)
    if kind == DIFFUSE_ASYMMETRIC:
        return (2.0, 3.0, 4.0)
    return tuple(1.0 + 0.5 * i for i in range(7))


def default_models() -> tuple[OutlierModel, ...]:
    cells = [OutlierModel(CLEAN)]
    for kind in (DIFFUSE_SYMMETRIC, DIFFUSE_ASYMMETRIC, LOCALIZED):
        cells.extend(OutlierModel(kind, a) for a in default_a_grid(kind))
    return tuple(cells)


@dataclass(frozen=True)
class StudySpec:
    models: tuple[OutlierModel, ...] = field(default_factory=default_models)
    scales: tuple[str, ...] = DEFAULT_SCALES
    locations: tuple[str, ...] = DEFAULT_LOCATIONS
    phi_values: tuple[float, ...] = DEFAULT_PHI
    n: int = 5
    k: int = 50
    mse_replicates: int = 50_000
    arl_replicates: int = 10_000
    calibration_replicates: int = 20_000
    correction_replicates: int = 1_000_000
    seed: int = 0
    target_arl0: float = DEFAULT_TARGET_ARL0
    kappa: float = 0.5
    huber_c: float = 1.5
    # execution only; never part of the results
    threads: int = 1

    def __post_init__(self):
        errors = []
        if not self.models:
            errors.append("no outlier models")
        if not self.scales or not self.locations:
            errors.append("empty estimator grid")
        if not self.phi_values or any(p <= 0 for p in self.phi_values):
            errors.append("phi values must be positive and nonempty")
        if self.n < 2 or self.k < 2:
            errors.append("n and k must be at least 2")
        for name in ("mse_replicates", "arl_replicates", "calibration_replicates", "correction_replicates"):
            if getattr(self, name) < 100:
                errors.append(f"{name} must be at least 100")
        if errors:
            raise ValueError("; ".join(errors))

    def scale_spec(self, name: str) -> ScaleEstimatorSpec:
        return ScaleEstimatorSpec.from_name(name, kappa=self.kappa)

    def location_spec(self, name: str) -> LocationEstimatorSpec:
        return LocationEstimatorSpec(name, huber_c=self.huber_c)

    def header(self) -> dict:
        return {
            "software": f"robust_spc {__version__}",
            "seed": self.seed,
            "seed_policy": SEED_POLICY_VERSION,
            "n": self.n,
            "k": self.k,
            "models": " ".join(m.label for m in self.models),
            "scales": " ".join(self.scales),
            "locations": " ".join(self.locations),
            "phi": " ".join(f"{p:g}" for p in self.phi_values),
            "mse_replicates": self.mse_replicates,
            "arl_replicates": self.arl_replicates,
            "calibration_replicates": self.calibration_replicates,
            "correction_replicates": self.correction_replicates,
            "target_arl0": self.target_arl0,
            "kappa": self.kappa,
            "huber_c": self.huber_c,
        }


@dataclass
class StudyResult:
    kind: str
    rows: list[dict]
    meta: dict
    calibration: list[tuple[str, float]] = field(default_factory=list)

    def lookup(self, model: str, a: float, scale: str, location: str, phi: float | None = None) -> dict:
        for row in self.rows:
            if (row["model"] == model and math.isclose(row["a"], a) and row["scale"] == scale
                    and row["location"] == location
                    and (phi is None or (row["phi"] is not None and math.isclose(row["phi"], phi)))):
                return row
        raise KeyError((model, a, scale, location, phi))

    def to_csv(self, path) -> Path:
        path = Path(path)
        buf = io.StringIO()
        buf.write(f"# study: {self.kind}\n")
        for key, val in self.meta.items():
            buf.write(f"# {key}: {val}\n")
        for key, val in self.calibration:
            buf.write(f"# calibration: {key} = {val!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in COLUMNS])
        path.write_text(buf.getvalue(), encoding="utf-8")
        return path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_study_csv(path) -> StudyResult:
    meta, calibration, body = {}, [], []
    kind = ""
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# study: "):
            kind = line[len("# study: "):]
        elif line.startswith("# calibration: "):
            key, _, val = line[len("# calibration: "):].rpartition(" = ")
            calibration.append((key, float(val)))
        elif line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = val
        else:
            body.append(line)
    rows = []
    for rec in csv.DictReader(body):
        rows.append({
            "model": rec["model"],
            "a": float(rec["a"]),
            "scale": rec["scale"],
            "location": rec["location"],
            "phi": float(rec["phi"]) if rec["phi"] else None,
            "metric": rec["metric"],
            "value": float(rec["value"]),
            "se": float(rec["se"]),
            "excluded": int(rec["excluded"]),
            "replicates": int(rec["replicates"]),
            "valid": rec["valid"] == "1",
        })
    return StudyResult(kind, rows, meta, calibration)


def _sigma_chunk(task):
    model, k, n, root_seed, start, stop, role, scale_specs, loc_specs = task
    data = phase1_replicates(model, k, n, root_seed, start, stop, role)
    cols, oks = [], []
    for sspec in scale_specs:
        # scale once per subgroup, then each location over the k values
        r = stop - start
        scales, _ = scale_rows(data.reshape(r * k, n), sspec)
        scales = scales.reshape(r, k)
        for lspec in loc_specs:
            sig, flag = locate_rows(scales, lspec)
            cols.append(sig)
            oks.append((flag == 0) & np.isfinite(sig) & (sig > 0.0))
    return np.column_stack(cols), np.column_stack(oks)


class Study:
    """Resolves calibration artifacts and evaluates study cells for one spec."""

    def __init__(self, spec: StudySpec, store: CalibrationStore | None = None):
        self.spec = spec
        self.store = store if store is not None else CalibrationStore()
        self._scale_specs: list[ScaleEstimatorSpec] | None = None
        self._alphas: dict[tuple[str, str], float] | None = None
        self._calibration_sigma = None
        self.calibration_used: list[tuple[str, float]] = []

    # -- calibration ------------------------------------------------------

    def correction_key(self, sspec: ScaleEstimatorSpec) -> dict:
        return {
            "artifact": "correction",
            **sspec.identity(),
            "n": self.spec.n,
            "replicates": self.spec.correction_replicates,
            "seed": self.spec.seed,
            "seed_policy": SEED_POLICY_VERSION,
        }

    def alpha_key(self, sspec: ScaleEstimatorSpec, lspec: LocationEstimatorSpec) -> dict:
        return {
            "artifact": "alpha_star",
            **sspec.identity(),
            **lspec.identity(),
            "n": self.spec.n,
            "k": self.spec.k,
            "target_arl0": self.spec.target_arl0,
            "replicates": self.spec.calibration_replicates,
            "correction_replicates": self.spec.correction_replicates,
            "seed": self.spec.seed,
            "seed_policy": SEED_POLICY_VERSION,
        }

    def _record(self, key: dict, calibrator) -> float:
        rec = self.store.get_or_calibrate(key, calibrator)
        self.calibration_used.append((canonical_key(key), rec.value))
        return rec.value

    def scale_specs(self) -> list[ScaleEstimatorSpec]:
        if self._scale_specs is None:
            specs = []
            for name in self.spec.scales:
                base = self.spec.scale_spec(name)
                f = self._record(
                    self.correction_key(base),
                    lambda key, base=base: correction_factor(
                        base, self.spec.n, self.spec.correction_replicates, self.spec.seed
                    ),
                )
                specs.append(base.with_correction(f))
            self._scale_specs = specs
        return self._scale_specs

    def location_specs(self) -> list[LocationEstimatorSpec]:
        return [self.spec.location_spec(name) for name in self.spec.locations]

    def combos(self) -> list[tuple[str, str]]:
        return [(s, l) for s in self.spec.scales for l in self.spec.locations]

    def _calibration_sigmas(self):
        if self._calibration_sigma is None:
            log.info("drawing %d clean calibration replicates", self.spec.calibration_replicates)
            self._calibration_sigma = self._sigma_hats(
                OutlierModel(CLEAN), self.spec.calibration_replicates, self.spec.seed, Role.CALIBRATION
            )
        return self._calibration_sigma

    def alpha_stars(self) -> dict[tuple[str, str], float]:
        if self._alphas is None:
            alphas = {}
            sspecs = self.scale_specs()
            lspecs = self.location_specs()
            for i, sspec in enumerate(sspecs):
                for j, lspec in enumerate(lspecs):
                    col = i * len(lspecs) + j

                    def calibrate(key, col=col):
                        sig, ok = self._calibration_sigmas()
                        return alpha_for_target(sig[:, col], ok[:, col], self.spec.n, self.spec.target_arl0)

                    alphas[(sspec.name, lspec.name)] = self._record(self.alpha_key(sspec, lspec), calibrate)
            self._alphas = alphas
        return self._alphas

    # -- evaluation -------------------------------------------------------

    def _sigma_hats(self, model: OutlierModel, replicates: int, root_seed: int, role: int = Role.PHASE1_DATA):
        sspecs = self.scale_specs()
        lspecs = self.location_specs()
        tasks = [
            (model, self.spec.k, self.spec.n, root_seed, s, min(s + CHUNK, replicates), role, sspecs, lspecs)
            for s in range(0, replicates, CHUNK)
        ]
        if self.spec.threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.spec.threads) as ex:
                parts = list(ex.map(_sigma_chunk, tasks))
        else:
            parts = [_sigma_chunk(t) for t in tasks]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def cell_sigma_hats(self, model: OutlierModel, replicates: int):
        """(replicates, combos) Phase I estimates for one model cell."""
        return self._sigma_hats(model, replicates, model.cell_seed(self.spec.seed))

    def run(self, kinds=("mse", "arl")) -> dict[str, StudyResult]:
        kinds = tuple(kinds)
        spec = self.spec
        self.scale_specs()
        alphas = self.alpha_stars() if "arl" in kinds else {}
        need = max(spec.mse_replicates if "mse" in kinds else 0, spec.arl_replicates if "arl" in kinds else 0)
        mse_rows, arl_rows = [], []
        for model in spec.models:
            log.info("cell %s: %d replicates", model.label, need)
            sig, ok = self.cell_sigma_hats(model, need)
            for col, (sname, lname) in enumerate(self.combos()):
                base = {"model": model.kind, "a": float(model.a), "scale": sname, "location": lname}
                if "mse" in kinds:
                    s = sig[: spec.mse_replicates, col]
                    good = ok[: spec.mse_replicates, col]
                    err = (s[good] - 1.0) ** 2
                    m = err.size
                    mse_rows.append({
                        **base, "phi": None, "metric": "mse",
                        "value": float(err.mean()) if m else math.nan,
                        "se": float(err.std(ddof=1) / math.sqrt(m)) if m > 1 else math.nan,
                        "excluded": int(spec.mse_replicates - m),
                        "replicates": spec.mse_replicates,
                        "valid": m > 0.99 * spec.mse_replicates,
                    })
                if "arl" in kinds:
                    s = sig[: spec.arl_replicates, col]
                    good = ok[: spec.arl_replicates, col]
                    for phi in spec.phi_values:
                        est = arl_from_sigma_hats(s, good, spec.n, alphas[(sname, lname)], phi)
                        arl_rows.append({
                            **base, "phi": float(phi), "metric": "arl", "value": est.arl, "se": est.se,
                            "excluded": est.excluded, "replicates": est.replicates, "valid": est.valid,
                        })
        header = spec.header()
        calibration = list(dict.fromkeys(self.calibration_used))
        out = {}
        if "mse" in kinds:
            out["mse"] = StudyResult("mse", mse_rows, header, [c for c in calibration if '"correction"' in c[0]])
        if "arl" in kinds:
            out["arl"] = StudyResult("arl", arl_rows, header, calibration)
        return out


def run_mse_study(spec: StudySpec, store: CalibrationStore | None = None) -> StudyResult:
    return Study(spec, store).run(("mse",))["mse"]


def run_arl_study(spec: StudySpec, store: CalibrationStore | None = None) -> StudyResult:
    return Study(spec, store).run(("arl",))["arl"]


def _figure_phi(result: StudyResult, setting: str) -> float:
    phis = sorted({r["phi"] for r in result.rows if r["phi"] is not None})
    if setting == "in-control":
        return 1.0
    disturbed = [p for p in phis if not math.isclose(p, 1.0)]
    if not disturbed:
        raise ValueError("result has no disturbed (phi != 1) rows")
    return disturbed[0]


def emit_figure_data(result: StudyResult, figure_id: int, out_dir) -> list[Path]:
    """Write one plot-data file per location estimator for a figure analogue.

    x column is the severity ``a``; each scale estimator contributes a value
    column and a standard-error column. Model m2 borrows the clean cell as
    its a = 1 baseline.
    """
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure {figure_id}; choose from {sorted(FIGURES)}")
    kind, model, setting = FIGURES[figure_id]
    if result.kind != kind:
        raise ValueError(f"figure {figure_id} needs a {kind} study, got {result.kind}")
    if not result.rows:
        raise ValueError("empty study result")
    phi = _figure_phi(result, setting) if setting else None
    scales = list(dict.fromkeys(r["scale"] for r in result.rows))
    locations = list(dict.fromkeys(r["location"] for r in result.rows))
    a_values = sorted({r["a"] for r in result.rows if r["model"] == model})
    if not a_values:
        raise ValueError(f"result has no cells for model {model}")
    baseline = model == DIFFUSE_ASYMMETRIC and any(r["model"] == CLEAN for r in result.rows)
    grid = ([(CLEAN, 1.0)] if baseline else []) + [(model, a) for a in a_values]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metric = "MSE of sigma-hat (true sigma = 1)" if kind == "mse" else "unconditional ARL (subgroups)"
    paths, missing = [], []
    tables = []
    for loc in locations:
        lines = []
        for cell_model, a in grid:
            vals = [f"{a:g}"]
            for sc in scales:
                try:
                    row = result.lookup(cell_model, a, sc, loc, phi)
                except KeyError:
                    missing.append((cell_model, a, sc, loc, phi))
                    vals += ["", ""]
                    continue
                vals += [repr(row["value"]), repr(row["se"])]
            lines.append(",".join(vals))
        tables.append((loc, lines))
    if missing:
        raise ValueError(f"figure {figure_id}: missing cells {missing}")
    for loc, lines in tables:
        tag = f"fig{figure_id:02d}_{kind}_{model}" + (f"_phi{phi:g}" if phi is not None else "") + f"_loc-{loc}"
        path = out_dir / f"{tag}.csv"
        head = [
            f"# figure: {figure_id}",
            f"# metric: {metric}",
            f"# model: {model}" + (" (a=1 row is the clean baseline)" if baseline else ""),
            f"# location: {loc}",
        ]
        if phi is not None:
            head.append(f"# phi: {phi:g}")
        cols = ["a"] + [c for sc in scales for c in (sc, f"{sc}_se")]
        path.write_text("\n".join(head + [",".join(cols)] + lines) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def backend_name() -> str:
    return BACKEND


# -- ordering checks ---------------------------------------------------------

@dataclass(frozen=True)
class Check:
    criterion: int
    description: str
    passed: bool
    detail: str


def _gap(hi: dict, lo: dict, z: float = 3.0) -> bool:
    """hi exceeds lo by more than z pooled standard errors."""
    return hi["value"] - lo["value"] > z * math.hypot(hi["se"], lo["se"])


def _fmt_rows(rows: dict) -> str:
    return ", ".join(f"{k}={r['value']:.4g}+-{r['se']:.2g}" for k, r in rows.items())


def ordering_checks(mse: StudyResult, arl: StudyResult, target: float = DEFAULT_TARGET_ARL0) -> list[Check]:
    """Qualitative orderings of the default study (Figures 2 to 10 analogues)."""
    checks = []
    scales = [s for s in DEFAULT_SCALES if any(r["scale"] == s for r in mse.rows)]
    robust_locs = [l for l in ("huber", "hd", "hl") if any(r["location"] == l for r in arl.rows)]

    def a_grid(result, model):
        return sorted({r["a"] for r in result.rows if r["model"] == model})

    # m1 MSE
    a_hi = a_grid(mse, DIFFUSE_SYMMETRIC)[-1]
    m = {s: mse.lookup(DIFFUSE_SYMMETRIC, a_hi, s, "mean") for s in ("sd", "qn", "mad")}
    ok = _gap(m["sd"], m["qn"]) and _gap(m["qn"], m["mad"])
    checks.append(Check(6, f"m1 a={a_hi:g}, mean: MSE sd > qn > mad beyond 3 SE", ok, _fmt_rows(m)))
    ratio = m["sd"]["value"] / m["mad"]["value"]
    checks.append(Check(6, f"m1 a={a_hi:g}, mean: MSE(sd)/MSE(mad) >= 2", ratio >= 2.0, f"ratio={ratio:.4g}"))
    m = {s: mse.lookup(DIFFUSE_SYMMETRIC, 1.0, s, "mean") for s in scales}
    ok = all(_gap(m[s], m["sd"]) for s in scales if s != "sd")
    checks.append(Check(6, "m1 a=1, mean: sd has the smallest MSE beyond 3 SE", ok, _fmt_rows(m)))

    # m1 ARL
    grid = a_grid(arl, DIFFUSE_SYMMETRIC)
    seq = [arl.lookup(DIFFUSE_SYMMETRIC, a, "sd", "mean", 1.0)["value"] for a in grid]
    ok = all(x > y for x, y in zip(seq, seq[1:]))
    checks.append(Check(7, "m1: conventional ARL0 (sd, mean) strictly decreasing in a", ok,
                        " ".join(f"{v:.4g}" for v in seq)))
    checks.append(Check(7, f"m1 a={grid[-1]:g}: ARL0(sd, mean) < 0.4 x {target:g}", seq[-1] < 0.4 * target,
                        f"{seq[-1]:.4g}"))
    phi2 = _figure_phi(arl, "disturbed")
    m = {"mslog,hd": arl.lookup(DIFFUSE_SYMMETRIC, grid[-1], "mslog", "hd", phi2),
         "sd,mean": arl.lookup(DIFFUSE_SYMMETRIC, grid[-1], "sd", "mean", phi2)}
    checks.append(Check(7, f"m1 a={grid[-1]:g}, phi={phi2:g}: ARL(mslog, hd) < ARL(sd, mean)",
                        m["mslog,hd"]["value"] < m["sd,mean"]["value"], _fmt_rows(m)))

    # m2 ARL
    a2 = a_grid(arl, DIFFUSE_ASYMMETRIC)[-1]
    m = {loc: arl.lookup(DIFFUSE_ASYMMETRIC, a2, "qn", loc, 1.0) for loc in robust_locs}
    checks.append(Check(8, f"m2 a={a2:g}: ARL0(qn, robust location) >= 0.9 x {target:g}",
                        all(r["value"] >= 0.9 * target for r in m.values()), _fmt_rows(m)))
    r = arl.lookup(DIFFUSE_ASYMMETRIC, a2, "sd", "mean", 1.0)
    checks.append(Check(8, f"m2 a={a2:g}: ARL0(sd, mean) <= 0.2 x {target:g}", r["value"] <= 0.2 * target,
                        f"{r['value']:.4g}"))
    best = {}
    for loc in dict.fromkeys(r["location"] for r in arl.rows):
        vals = {s: arl.lookup(DIFFUSE_ASYMMETRIC, a2, s, loc, phi2)["value"] for s in scales}
        best[loc] = min(vals, key=vals.get)
    checks.append(Check(8, f"m2 a={a2:g}, phi={phi2:g}: qn has the smallest ARL among scales",
                        all(v == "qn" for v in best.values()),
                        ", ".join(f"{loc}: argmin={s}" for loc, s in best.items())))

    # m3 ARL
    grid = a_grid(arl, LOCALIZED)
    a3 = grid[-1]
    m0 = {s: arl.lookup(LOCALIZED, a3, s, "hd", 1.0)["value"] for s in scales}
    m1 = {s: arl.lookup(LOCALIZED, a3, s, "hd", phi2)["value"] for s in scales}
    checks.append(Check(9, f"m3 a={a3:g}, hd: sd has the highest ARL0 among scales",
                        max(m0, key=m0.get) == "sd", " ".join(f"{s}={v:.4g}" for s, v in m0.items())))
    checks.append(Check(9, f"m3 a={a3:g}, hd, phi={phi2:g}: sd has the smallest ARL among scales",
                        min(m1, key=m1.get) == "sd", " ".join(f"{s}={v:.4g}" for s, v in m1.items())))
    seq = [arl.lookup(LOCALIZED, a, "sd", "mean", 1.0)["value"] for a in grid]
    ok = all(x > y for x, y in zip(seq, seq[1:])) and seq[-1] <= 0.4 * seq[0]
    checks.append(Check(9, "m3: ARL0(sd, mean) strictly decreasing in a, total drop >= 60%", ok,
                        " ".join(f"{v:.4g}" for v in seq)))
    return checks


def write_summary(checks: list[Check], path, header: dict | None = None) -> Path:
    path = Path(path)
    buf = io.StringIO()
    for key, val in (header or {}).items():
        buf.write(f"# {key}: {val}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("criterion", "check", "result", "detail"))
    for c in checks:
        writer.writerow((c.criterion, c.description, "PASS" if c.passed else "FAIL", c.detail))
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path
