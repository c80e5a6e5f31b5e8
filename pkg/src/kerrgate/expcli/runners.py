"""Experiment drivers: each returns a RunReport and writes its CSV artifacts."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..channels import LossSpec, conditional_evolve, evolve, evolve_iter
from ..fockcore import DensityMatrix, FockSpace, Ket, coherent_amplitudes, coherent_ket
from ..gatesynth import KerrSpec, repeated_conditional, target_unitary
from ..metrics import (
    conditional_fidelity,
    default_axis,
    deterministic_fidelity,
    fidelity_scaling_probe,
    negative_regions,
    negativity,
    negativity_report,
    self_kerr_deterministic_deficit,
    self_kerr_model_deficit,
    support_bound,
    wigner,
)
from .config import DEFAULTS, ExperimentConfig

log = logging.getLogger(__name__)

BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float | None = None
    expected: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value, "expected": self.expected}


@dataclass
class RunReport:
    config: ExperimentConfig
    results: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, value=None, expected: str = "") -> None:
        value = None if value is None else float(value)
        self.checks.append(Check(name, bool(passed), value, expected))

    def to_dict(self) -> dict:
        return {
            "experiment": self.config.experiment,
            "version": __version__,
            "config": self.config.to_dict(),
            "results": self.results,
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
            "artifacts": sorted(self.artifacts),
            "timing": self.timing,
        }

    def write(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _fmt(v: float) -> str:
    return repr(float(v))


def write_wigner_csv(path: Path, grid) -> None:
    """First row: x coordinates (after a nan corner); first column: p coordinates."""
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["nan"] + [_fmt(v) for v in grid.x])
        for pv, row in zip(grid.p, grid.values):
            w.writerow([_fmt(pv)] + [_fmt(v) for v in row])


def read_wigner_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",")
    return data[0, 1:], data[1:, 0], data[1:, 1:]


def _snapshots(rho0: DensityMatrix, spec, steps, loss=None) -> dict[int, DensityMatrix]:
    """One evolution, keeping the state after each requested step count."""
    wanted = set(steps)
    out = {}
    if 0 in wanted:
        out[0] = rho0
    for rec, rho in evolve_iter(rho0, spec, loss, track_success=False):
        if rec.step in wanted:
            out[rec.step] = DensityMatrix(spec.space, 0.5 * (rho + rho.conj().T))
    return out


def _map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _tag(T: float) -> str:
    return f"{T:.4g}"


def _reference_setting(cfg: ExperimentConfig, keys) -> bool:
    ref = DEFAULTS[cfg.experiment]
    for k in keys:
        a, b = getattr(cfg, k), ref[k]
        if isinstance(b, list):
            if tuple(a) != tuple(b):
                return False
        elif abs(complex(a) - complex(b)) > 1e-15:
            return False
    return True


def run_self_kerr(cfg: ExperimentConfig) -> RunReport:
    report = RunReport(cfg)
    out = cfg.output_path
    out.mkdir(parents=True, exist_ok=True)
    psi, _ = coherent_ket(cfg.beta, cfg.n_max)
    rho0 = psi.dm()
    n0 = abs(cfg.beta) ** 2
    T_sorted = sorted(cfg.T_list)
    top = KerrSpec("self", T_sorted[-1], cfg.tau, cfg.n_max).gate_spec()
    steps = {T: KerrSpec("self", T, cfg.tau, cfg.n_max).repetitions for T in T_sorted}

    t0 = time.perf_counter()
    lossless = _snapshots(rho0, top, steps.values())
    loss = LossSpec(cfg.eta, (0,)) if cfg.eta < 1 else None
    lossy = _snapshots(rho0, top, steps.values(), loss) if loss else lossless
    report.timing["evolution_s"] = time.perf_counter() - t0

    axis = default_axis(cfg.grid_extent, cfg.grid_points)

    def point(T):
        R = steps[T]
        spec = top.with_steps(cfg.tau, R)
        OT = target_unitary(spec)
        target = Ket(spec.space, OT.entries @ psi.amplitudes)
        OR = repeated_conditional(spec)
        _, p_s = conditional_evolve(psi, spec)
        f_c = conditional_fidelity(psi, OT, OR)
        grids = {
            "ideal": wigner(target.dm(), axis, axis),
            "lossless": wigner(lossless[R], axis, axis),
            "lossy": wigner(lossy[R], axis, axis),
        }
        return T, R, spec.T, p_s, f_c, deterministic_fidelity(lossless[R], target), \
            deterministic_fidelity(lossy[R], target), lossy[R], grids

    t0 = time.perf_counter()
    rows = _map(point, T_sorted, cfg.threads)
    report.timing["metrics_s"] = time.perf_counter() - t0

    per_T = []
    for T, R, T_eff, p_s, f_c, F, F_lossy, rho_lossy, grids in rows:
        n_lossy = float(np.real(np.dot(np.arange(cfg.n_max + 1), rho_lossy.populations())))
        regions = {}
        for kind, grid in grids.items():
            name = f"wigner_T{_tag(T)}_{kind}.csv"
            write_wigner_csv(out / name, grid)
            report.artifacts.append(name)
            regions[kind] = negative_regions(grid)
            report.check(f"T={_tag(T)} {kind} Wigner normalization", abs(grid.integral() - 1) < 1e-3,
                         grid.integral(), "1 +- 1e-3")
        row = {
            "T": T, "R": R, "T_effective": T_eff, "F": F, "F_lossy": F_lossy, "P_s": p_s, "F_c": f_c,
            "energy_kept": n_lossy / n0 if n0 > 0 else 1.0,
            "regions_ideal": regions["ideal"], "regions_lossless": regions["lossless"],
            "regions_lossy": regions["lossy"],
        }
        per_T.append(row)
        report.check(f"T={_tag(T)} F >= P_s F_c", F >= p_s * f_c - BOUND_SLACK, F - p_s * f_c, ">= 0")
    report.results["per_T"] = per_T

    if _reference_setting(cfg, ("tau", "beta", "eta")):
        by_T = {round(r["T"], 12): r for r in per_T}
        if 0.8 in by_T:
            r = by_T[0.8]
            report.check("T=0.8 lossless 1-F = 0.8e-4 +- 0.5e-4", abs((1 - r["F"]) - 0.8e-4) <= 0.5e-4,
                         1 - r["F"], "[0.3e-4, 1.3e-4]")
            report.check("T=0.8 ideal has 3 negative regions", r["regions_ideal"] == 3, r["regions_ideal"], "3")
            report.check("T=0.8 lossy has 2 negative regions", r["regions_lossy"] == 2, r["regions_lossy"], "2")
            loss_frac = 1 - r["energy_kept"]
            report.check("T=0.8 energy loss in [0.40, 0.43]", 0.40 <= loss_frac <= 0.43, loss_frac, "[0.40, 0.43]")
        if 0.2 in by_T:
            kept = by_T[0.2]["energy_kept"]
            report.check("T=0.2 energy kept 0.87 +- 0.01", abs(kept - 0.87) <= 0.01, kept, "0.87 +- 0.01")
    return report


def _cross_T_grid(cfg: ExperimentConfig) -> list[float]:
    T_max = max(cfg.T_list)
    count = int(math.floor(T_max / cfg.T_step + 1e-9))
    grid = [k * cfg.T_step for k in range(count + 1)]
    if T_max - grid[-1] > 1e-9:
        grid.append(T_max)
    return grid


def _product_ket(alpha, beta, n_max) -> Ket:
    a, wa = coherent_amplitudes(alpha, n_max)
    b, wb = coherent_amplitudes(beta, n_max)
    for w in (wa, wb):
        if w > 1e-6:
            log.warning("coherent truncation weight %.2e at n_max=%d", w, n_max)
    v = np.kron(a, b)
    return Ket(FockSpace.oscillators(n_max, n_max), v / np.linalg.norm(v))


def run_cross_kerr(cfg: ExperimentConfig) -> RunReport:
    report = RunReport(cfg)
    out = cfg.output_path
    out.mkdir(parents=True, exist_ok=True)
    psi = _product_ket(cfg.alpha, cfg.beta, cfg.n_max)
    rho0 = psi.dm()
    Ts = _cross_T_grid(cfg)
    steps = [0] + [KerrSpec("cross", T, cfg.tau, cfg.n_max).repetitions for T in Ts[1:]]
    top = KerrSpec("cross", Ts[-1], cfg.tau, cfg.n_max).gate_spec()

    t0 = time.perf_counter()
    sim = _snapshots(rho0, top, steps)
    loss = LossSpec(cfg.eta, (0, 1)) if cfg.eta < 1 else None
    lossy = _snapshots(rho0, top, steps, loss) if loss else sim
    report.timing["evolution_s"] = time.perf_counter() - t0

    def point(k):
        T, R = Ts[k], steps[k]
        ideal = Ket(psi.space, target_unitary(top, T).entries @ psi.amplitudes).dm()
        return negativity_report(ideal), negativity_report(sim[R]), negativity_report(lossy[R])

    t0 = time.perf_counter()
    reps = _map(point, range(len(Ts)), cfg.threads)
    report.timing["metrics_s"] = time.perf_counter() - t0

    columns = ["T", "N_ideal", "N_G_ideal", "N_sim", "N_G_sim", "N_lossy", "N_G_lossy"]
    rows = []
    for T, (i, s, l) in zip(Ts, reps):
        rows.append([T, i.N, i.N_G, s.N, s.N_G, l.N, l.N_G])
    with (out / "cross_kerr.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    report.artifacts.append("cross_kerr.csv")

    table = np.array(rows)
    gap = table[:, 5] - table[:, 6]
    k_max = int(np.argmax(gap))
    sim_dev = float(np.max(np.abs(table[:, 1] - table[:, 3])))
    report.results["scan"] = [dict(zip(columns, map(float, r)), R=steps[k]) for k, r in enumerate(rows)]
    report.results["max_gap_lossy"] = float(gap[k_max])
    report.results["max_gap_lossy_T"] = float(Ts[k_max])
    report.results["max_ideal_vs_sim_N"] = sim_dev

    report.check("T=0 gives N = N_G = 0", abs(table[0, 1:]).max() <= 1e-12, abs(table[0, 1:]).max(), "0")
    for label, col in (("ideal", 1), ("sim", 3), ("lossy", 5)):
        bad = table[:, col] - table[:, col + 1]
        # Gaussian negativity need not bound N from below in general; reported only
        report.results[f"min_N_minus_N_G_{label}"] = float(bad.min())

    # coherent-state fidelities of the full gate at the top strength
    T_top = Ts[-1]
    fids = []
    for R in cfg.R_list:
        spec = KerrSpec.from_repetitions("cross", T_top, R, cfg.n_max).gate_spec()
        rho, _ = evolve(rho0, spec, track_success=False)
        OT = target_unitary(spec)
        target = Ket(spec.space, OT.entries @ psi.amplitudes)
        _, p_s = conditional_evolve(psi, spec)
        f_c = conditional_fidelity(psi, OT, repeated_conditional(spec))
        F = deterministic_fidelity(rho, target)
        fids.append({"R": R, "tau": spec.tau, "F": F, "P_s": p_s, "F_c": f_c})
        report.check(f"R={R} F >= P_s F_c", F >= p_s * f_c - BOUND_SLACK, F - p_s * f_c, ">= 0")
    report.results["coherent_fidelity"] = fids

    if _reference_setting(cfg, ("tau", "alpha", "beta", "eta", "T_list")):
        report.check("lossy max(N - N_G) = 0.31 +- 0.03", abs(gap[k_max] - 0.31) <= 0.03, gap[k_max], "0.31 +- 0.03")
        late = table[table[:, 0] > 0.8]
        report.check("T>0.8 ideal N_G < 0.02", late[:, 2].max() < 0.02, late[:, 2].max(), "< 0.02")
        report.check("T>0.8 ideal N > 0.1", late[:, 1].min() > 0.1, late[:, 1].min(), "> 0.1")
        report.check("ideal vs simulated N within 0.01", sim_dev <= 0.01, sim_dev, "<= 0.01")
        for row in fids:
            if row["R"] == 1000:
                report.check("R=1000 coherent F = 0.989 +- 0.003", abs(row["F"] - 0.989) <= 0.003, row["F"],
                             "0.989 +- 0.003")
            if row["R"] == 2500:
                report.check("R=2500 coherent F >= 0.999", row["F"] >= 0.999, row["F"], ">= 0.999")
    return report


def control_z_input(n_max: int) -> Ket:
    """(|0> + |1>)(|0> + |1>)/2 embedded in two modes of ``n_max + 1`` levels."""
    one = np.zeros(n_max + 1)
    one[:2] = 1 / math.sqrt(2)
    return Ket(FockSpace.oscillators(n_max, n_max), np.kron(one, one).astype(complex))


def run_control_z(cfg: ExperimentConfig) -> RunReport:
    report = RunReport(cfg)
    psi = control_z_input(cfg.n_max)
    T = cfg.T_list[0]
    rows = []
    t0 = time.perf_counter()
    for R in sorted(cfg.R_list):
        spec = KerrSpec.from_repetitions("cross", T, R, cfg.n_max).gate_spec()
        OT = target_unitary(spec)
        target = Ket(spec.space, OT.entries @ psi.amplitudes)
        out_c, p_s = conditional_evolve(psi, spec)
        f_c = conditional_fidelity(psi, OT, repeated_conditional(spec))
        rho, _ = evolve(psi.dm(), spec, track_success=False)
        F = deterministic_fidelity(rho, target)
        rows.append({
            "R": R, "tau": spec.tau, "F_c": f_c, "P_s": p_s, "F": F,
            "negativity": negativity(rho), "negativity_conditional": negativity(out_c.dm()),
        })
        report.check(f"R={R} F >= P_s F_c", F >= p_s * f_c - BOUND_SLACK, F - p_s * f_c, ">= 0")
    report.timing["total_s"] = time.perf_counter() - t0
    report.results["per_R"] = rows
    fc = [r["F_c"] for r in rows]
    report.check("F_c increases with R", all(a < b for a, b in zip(fc, fc[1:])), None, "monotone")
    if abs(T - math.pi) < 1e-12:
        last = rows[-1]
        report.check("output negativity 0.5 +- 1e-3", abs(last["negativity"] - 0.5) <= 1e-3, last["negativity"],
                     "0.5 +- 1e-3")
        for r in rows:
            if r["R"] == 1000:
                report.check("R=1000 F_c >= 1 - 2e-5", r["F_c"] >= 1 - 2e-5, r["F_c"], ">= 1 - 2e-5")
    return report


def run_scaling(cfg: ExperimentConfig) -> RunReport:
    report = RunReport(cfg)
    T = cfg.T_list[0]
    t0 = time.perf_counter()
    rows = fidelity_scaling_probe(cfg.beta, T, sorted(cfg.R_list), cfg.n_max)
    report.timing["total_s"] = time.perf_counter() - t0
    report.results["rows"] = [
        {"R": r.R, "tau": r.tau, "deficit": r.deficit, "model": r.model, "ratio_to_model": r.ratio} for r in rows
    ]
    by_R = {r.R: r for r in rows}
    pairs = []
    for r in rows:
        if 2 * r.R in by_R:
            ratio = r.deficit / by_R[2 * r.R].deficit
            pairs.append({"R": r.R, "ratio": ratio})
            report.check(f"deficit(R={r.R}) / deficit(R={2 * r.R}) in [3, 5]", 3 <= ratio <= 5, ratio, "[3, 5]")
    report.results["doubling_ratios"] = pairs
    return report


def run_bound_check(cfg: ExperimentConfig) -> RunReport:
    report = RunReport(cfg)
    T = cfg.T_list[0]
    rows = []
    for R in sorted(cfg.R_list):
        deficit, p_s, f_c = self_kerr_deterministic_deficit(cfg.beta, T, R, cfg.n_max)
        rows.append({
            "R": R,
            "support_bound": support_bound(cfg.epsilon, R, T),
            "measured_deficit": deficit,
            "support_bound_measured": support_bound(deficit, R, T),
            "model_deficit": self_kerr_model_deficit(cfg.beta, T, R),
        })
        report.check(f"R={R} bound finite", math.isfinite(rows[-1]["support_bound"]), rows[-1]["support_bound"], "finite")
    report.results["rows"] = rows
    return report


RUNNERS = {
    "self_kerr": run_self_kerr,
    "cross_kerr": run_cross_kerr,
    "control_z": run_control_z,
    "scaling": run_scaling,
    "bound_check": run_bound_check,
}


def run(cfg: ExperimentConfig) -> RunReport:
    t0 = time.perf_counter()
    report = RUNNERS[cfg.experiment](cfg)
    report.timing["wall_s"] = time.perf_counter() - t0
    report.write(cfg.output_path)
    return report
