"""Problem-file ingestion, multi-trial experiments and report/trace output.

Experiments run each solver `trials` times with seeds base_seed + index and
reduce the results in index order, so a report's deterministic section is
byte-identical across repeats of the same spec; wall-clock figures live in
a separate timing section because they never reproduce exactly.
"""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import mean, median
from typing import Optional, Sequence, Union

import numpy as np

from . import ga, pso
from .model import (
    ALL_GASES,
    DispatchError,
    DispatchProblem,
    DispatchSolution,
    Gas,
    GeneratorUnit,
    LossMatrix,
    LOSS_SYMMETRY_TOL,
)
from .penalty import PenaltyFactors, penalty_factors_all

SOLVER_NAMES = ("pso", "ga")


def load_problem(
    path: Union[str, Path],
    demand: Optional[float] = None,
    k1: int = 1,
    k2: int = 1,
) -> DispatchProblem:
    """Parse and validate a problem file.

    The file supplies units, gases and optionally a loss matrix and a
    default demand; a demand passed here overrides the file.  Mild loss
    asymmetry is averaged away with a warning, anything beyond the model
    tolerance is rejected.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise DispatchError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DispatchError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc

    if "units" not in raw or not raw["units"]:
        raise DispatchError(f"{path}: problem file defines no units")
    try:
        gases = tuple(Gas(g) for g in raw.get("gases", [g.value for g in ALL_GASES]))
    except ValueError as exc:
        raise DispatchError(f"{path}: unknown gas in 'gases': {exc}") from exc

    units = []
    for idx, entry in enumerate(raw["units"]):
        try:
            units.append(
                GeneratorUnit(
                    id=int(entry["id"]),
                    p_min=float(entry["p_min"]),
                    p_max=float(entry["p_max"]),
                    cost=tuple(float(v) for v in entry["cost"]),
                    emissions={
                        Gas(g): tuple(float(v) for v in coeffs)
                        for g, coeffs in entry["emissions"].items()
                    },
                )
            )
        except KeyError as exc:
            raise DispatchError(f"{path}: unit #{idx + 1} is missing field {exc}") from exc

    losses = None
    if raw.get("b_matrix") is not None:
        b = np.array(raw["b_matrix"], dtype=float)
        if b.ndim == 2 and b.shape[0] == b.shape[1]:
            asym = float(np.max(np.abs(b - b.T)))
            scale = float(np.max(np.abs(b))) or 1.0
            if 0.0 < asym <= LOSS_SYMMETRY_TOL * scale:
                warnings.warn(
                    f"{path}: loss matrix asymmetric by {asym:g}, symmetrizing",
                    stacklevel=2,
                )
        losses = LossMatrix(b)

    if demand is None:
        demand = raw.get("demand")
    if demand is None:
        raise DispatchError(f"{path}: no demand in file and none supplied")
    return DispatchProblem(
        units=tuple(units),
        demand=float(demand),
        gases=gases,
        losses=losses,
        k1=k1,
        k2=k2,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a problem file, demands, solver choice and trial protocol."""

    problem_path: str
    demands: tuple[float, ...]
    solver: str = "both"  # pso | ga | both
    trials: int = 50
    base_seed: int = 0
    k1: int = 1
    k2: int = 1
    iterations: Optional[int] = None  # overrides both solvers' budget when set
    pso_config: Optional[pso.PsoConfig] = None
    ga_config: Optional[ga.GaConfig] = None
    workers: int = 0  # 0 = run trials serially
    out_dir: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "demands", tuple(float(d) for d in self.demands))
        if not self.demands:
            raise ValueError("an experiment needs at least one demand")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.solver not in (*SOLVER_NAMES, "both"):
            raise ValueError(f"solver must be pso, ga or both, got {self.solver!r}")

    @property
    def solver_names(self) -> tuple[str, ...]:
        return SOLVER_NAMES if self.solver == "both" else (self.solver,)


@dataclass(frozen=True)
class Trial:
    index: int
    seed: int
    solution: DispatchSolution
    seconds: float
    trace: np.ndarray


@dataclass(frozen=True)
class TrialReport:
    """All trials of one (solver, demand) pair plus the factors they used."""

    solver: str
    demand: float
    h: Optional[PenaltyFactors]
    trials: tuple[Trial, ...]

    @property
    def best_trial(self) -> Trial:
        return min(self.trials, key=lambda t: (t.solution.total_cost, t.index))

    @property
    def representative_trial(self) -> Trial:
        """Trial whose wall-clock time sits nearest the mean time."""
        avg = mean(t.seconds for t in self.trials)
        return min(self.trials, key=lambda t: (abs(t.seconds - avg), t.index))

    @property
    def total_costs(self) -> list[float]:
        return [t.solution.total_cost for t in self.trials]


def _solver_config(spec: ExperimentSpec, solver: str, seed: int):
    if solver == "pso":
        cfg = spec.pso_config or pso.PsoConfig()
    else:
        cfg = spec.ga_config or ga.GaConfig()
    if spec.iterations is not None:
        budget = "iterations" if solver == "pso" else "generations"
        cfg = replace(cfg, **{budget: spec.iterations})
    return replace(cfg, seed=seed)


def _run_trial(args) -> Trial:
    problem, solver, config, h, index, seed = args
    runner = pso.run if solver == "pso" else ga.run
    start = time.perf_counter()
    solution, trace = runner(problem, config, h)
    return Trial(
        index=index,
        seed=seed,
        solution=solution,
        seconds=time.perf_counter() - start,
        trace=trace,
    )


def run_experiment(spec: ExperimentSpec) -> list[TrialReport]:
    """Execute the full trial protocol; one report per (solver, demand) pair."""
    reports = []
    for demand in spec.demands:
        problem = load_problem(spec.problem_path, demand, spec.k1, spec.k2)
        h = penalty_factors_all(problem) if spec.k2 else None
        for solver in spec.solver_names:
            jobs = [
                (problem, solver, _solver_config(spec, solver, spec.base_seed + i), h, i, spec.base_seed + i)
                for i in range(spec.trials)
            ]
            if spec.workers > 0:
                with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                    trials = tuple(pool.map(_run_trial, jobs))
            else:
                trials = tuple(_run_trial(job) for job in jobs)
            reports.append(TrialReport(solver=solver, demand=demand, h=h, trials=trials))
    if spec.out_dir is not None:
        write_outputs(reports, Path(spec.out_dir))
    return reports


def export_trace(trace: Sequence[float], path: Union[str, Path]) -> None:
    """Write a convergence trace as 'iteration,objective' rows."""
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise ValueError("refusing to export an empty trace")
    lines = ["iteration,objective"]
    lines += [f"{i},{v:.12g}" for i, v in enumerate(trace, start=1)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path: Union[str, Path]) -> np.ndarray:
    """Inverse of export_trace; returns the objective column."""
    rows = Path(path).read_text().strip().splitlines()
    if not rows or rows[0] != "iteration,objective":
        raise ValueError(f"{path}: not a trace file")
    return np.array([float(r.split(",")[1]) for r in rows[1:]])


def _solution_lines(tag: str, solution: DispatchSolution) -> list[str]:
    lines = [f"  {tag}:"]
    powers = "  ".join(f"P{i + 1}={p:.2f}" for i, p in enumerate(solution.powers))
    lines.append(f"    {powers}")
    for gas, value in solution.emissions.items():
        lines.append(f"    E_{gas.value} = {value:.2f} kg/h")
    lines.append(f"    FC = {solution.fuel_cost:.2f} $/h")
    lines.append(f"    EC = {solution.emission_cost:.2f} $/h")
    lines.append(f"    TC = {solution.total_cost:.2f} $/h")
    return lines


def format_report(report: TrialReport) -> str:
    """Human-readable report; everything above the timing marker is deterministic."""
    costs = sorted(report.total_costs)
    lines = [
        f"solver={report.solver} demand={report.demand:g} MW trials={len(report.trials)}",
    ]
    if report.h is not None:
        factors = "  ".join(
            f"h_{gas.value}={report.h[gas]:.4f}" for gas in report.h.values
        )
        lines.append(f"  penalty factors ($/kg): {factors}")
    lines += _solution_lines("best trial", report.best_trial.solution)
    lines.append(
        f"  TC over trials ($/h): best={costs[0]:.2f} "
        f"median={median(costs):.2f} mean={mean(costs):.2f} worst={costs[-1]:.2f}"
    )
    lines.append("  -- timing (machine-dependent) --")
    secs = [t.seconds for t in report.trials]
    lines.append(
        f"  wall clock (s): mean={mean(secs):.3f} min={min(secs):.3f} max={max(secs):.3f}"
    )
    rep = report.representative_trial
    lines.append(f"  trial nearest mean time: #{rep.index} ({rep.seconds:.3f} s)")
    lines += _solution_lines("its solution", rep.solution)
    return "\n".join(lines) + "\n"


def write_outputs(reports: list[TrialReport], out_dir: Path) -> None:
    """Per-trial traces plus one combined report file."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in reports:
        stem = f"{report.solver}_pd{report.demand:g}"
        for trial in report.trials:
            export_trace(trial.trace, out_dir / f"{stem}_trial{trial.index:03d}.csv")
    (out_dir / "report.txt").write_text("\n".join(format_report(r) for r in reports))
