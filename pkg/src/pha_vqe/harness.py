"""Seeded VQE ensembles, box-plot statistics and plot-ready CSV reports.

An experiment runs ``runs`` VQE optimizations for every (setting, mode)
pair. Run ``i`` uses the same derived seed in every setting and mode, so
full, partial and PHA-initialized runs with the same index start from the
same parameters.

Output layout::

    <out>/<molecule>/experiment.json
    <out>/<molecule>/<setting>/<mode>/run_<i>.json
    <out>/<molecule>/energies.csv
    <out>/<molecule>/summary.csv

CSV files never contain wall-clock times, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .ansatz import vqe_ansatz
from .hamiltonian import PartialSpec, QubitHamiltonian, load_hamiltonian, make_partial
from .pauli import group_terms
from .vqe import VqeConfig, cross_evaluate, pha_initialized_vqe, vqe_minimize

__all__ = [
    "SETTINGS",
    "MODES",
    "NOTCH_FACTOR",
    "NothingToReport",
    "ExperimentSpec",
    "BoxStats",
    "RunResult",
    "ExperimentResult",
    "run_seed",
    "compute_box_stats",
    "run_experiment",
    "load_runs",
    "report",
]

SETTINGS = ("ideal", "noisy", "realistic")
MODES = ("full", "partial", "pha-init")
NOTCH_FACTOR = 1.57
WHISKER = 1.5


class NothingToReport(LookupError):
    """``report`` found no completed experiment."""


@dataclass(frozen=True)
class ExperimentSpec:
    hamiltonian: str
    settings: tuple[str, ...] = ("ideal",)
    modes: tuple[str, ...] = ("full", "partial")
    runs: int = 100
    master_seed: int = 0
    output: str = "results"
    extra_terms: int = 0
    molecule: str | None = None
    layers: int | None = None
    max_iterations: int | None = None
    shots: int = 8192
    exclude_failed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.settings:
            raise ValueError("settings must be nonempty")
        if not self.modes:
            raise ValueError("modes must be nonempty")
        for s in self.settings:
            if s not in SETTINGS:
                raise ValueError(f"unknown setting {s!r}; expected one of {SETTINGS}")
        for m in self.modes:
            if m not in MODES:
                raise ValueError(f"unknown mode {m!r}; expected one of {MODES}")
        if self.extra_terms < 0:
            raise ValueError("extra_terms must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["settings"] = list(self.settings)
        d["modes"] = list(self.modes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentSpec:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment fields: {sorted(unknown)}")
        if "hamiltonian" not in d:
            raise ValueError("experiment config needs a 'hamiltonian' path")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> ExperimentSpec:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class BoxStats:
    """Notched box-plot summary.

    Quartiles use linear interpolation between order statistics
    (``numpy.percentile`` default), so the median of an even-length list is
    the midpoint of the two central values.
    """

    n: int
    mean: float
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    notch_low: float
    notch_high: float
    outliers: tuple[float, ...] = ()

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def compute_box_stats(values: Sequence[float]) -> BoxStats:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("box statistics need at least one value")
    q1, median, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - WHISKER * iqr, q3 + WHISKER * iqr
    inside = v[(v >= lo) & (v <= hi)]
    half_notch = NOTCH_FACTOR * iqr / np.sqrt(v.size)
    return BoxStats(
        n=int(v.size),
        mean=float(v.mean()),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        notch_low=float(median - half_notch),
        notch_high=float(median + half_notch),
        outliers=tuple(float(x) for x in np.sort(v[(v < lo) | (v > hi)])),
    )


def run_seed(master_seed: int, run_index: int) -> int:
    """Per-run seed from the ``(master_seed, run_index)`` seed-sequence node."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(run_index,))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RunResult:
    """One ensemble member.

    ``energy`` is the full-Hamiltonian energy the statistics use: the final
    energy for ``full`` and ``pha-init``, and the cross-evaluated energy for
    ``partial``. ``objective`` is the final value of the optimized objective.
    """

    setting: str
    mode: str
    run_index: int
    seed: int
    status: str
    energy: float | None = None
    objective: float | None = None
    iterations: int = 0
    records: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _config(setting: str, seed: int, spec: ExperimentSpec) -> VqeConfig:
    kw = {"shots": spec.shots}
    if spec.max_iterations is not None:
        kw["max_iterations"] = spec.max_iterations
    if setting == "ideal":
        return VqeConfig.ideal(seed=seed, **kw)
    return VqeConfig.noisy(setting, seed=seed, **kw)


def _execute(task) -> RunResult:
    spec, h_full, h_partial, setting, mode, i = task
    seed = run_seed(spec.master_seed, i)
    try:
        cfg = _config(setting, seed, spec)
        circuit = vqe_ansatz(h_full.n_qubits, spec.layers)
        if mode == "full":
            rec = vqe_minimize(h_full, circuit, cfg)
            return RunResult(setting, mode, i, seed, rec.status, rec.energy, rec.energy, rec.n_iterations, {"full": rec.to_dict()})
        if mode == "partial":
            rec = vqe_minimize(h_partial, circuit, cfg)
            rec = rec.with_cross(cross_evaluate(rec, h_full))
            return RunResult(
                setting, mode, i, seed, rec.status, rec.e_cross, rec.energy, rec.n_iterations, {"partial": rec.to_dict()}
            )
        stage1, stage2 = pha_initialized_vqe(h_full, h_partial, circuit, cfg)
        return RunResult(
            setting,
            mode,
            i,
            seed,
            stage2.status,
            stage2.energy,
            stage2.energy,
            stage2.total_iterations,
            {"stage1": stage1.to_dict(), "stage2": stage2.to_dict()},
        )
    except Exception as exc:  # recorded, the batch carries on
        return RunResult(setting, mode, i, seed, "failed", error="".join(traceback.format_exception_only(exc)).strip())


@dataclass
class ExperimentResult:
    directory: Path
    molecule: str
    runs: list[RunResult]
    summary: dict[tuple[str, str], BoxStats | None]

    def energies(self, setting: str, mode: str) -> np.ndarray:
        return np.array(
            [r.energy for r in self.runs if r.setting == setting and r.mode == mode and r.energy is not None]
        )


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, float):
        return f"{x:.10f}"
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    path.write_text(buf.getvalue())


SUMMARY_HEADER = (
    "setting", "mode", "n", "n_failed", "mean", "median", "q1", "q3",
    "whisker_low", "whisker_high", "notch_low", "notch_high", "n_outliers",
)  # fmt: skip


def _included(r: RunResult, exclude_failed: bool) -> bool:
    if r.energy is None:
        return False
    return not (exclude_failed and r.status != "converged")


def _summarize(runs: list[RunResult], spec: ExperimentSpec) -> dict:
    out = {}
    for setting in spec.settings:
        for mode in spec.modes:
            vals = [r.energy for r in runs if r.setting == setting and r.mode == mode and _included(r, spec.exclude_failed)]
            out[(setting, mode)] = compute_box_stats(vals) if vals else None
    return out


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Execute every (setting, mode, run) and write records, energies and summary."""
    h_full = load_hamiltonian(spec.hamiltonian, molecule=spec.molecule)
    h_partial = make_partial(h_full, PartialSpec(spec.extra_terms))
    molecule = spec.molecule or h_full.source.get("molecule") or Path(spec.hamiltonian).stem
    tasks = [
        (spec, h_full, h_partial, s, m, i) for s in spec.settings for m in spec.modes for i in range(spec.runs)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_execute, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        runs = [_execute(t) for t in tasks]

    root = Path(spec.output) / molecule
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "spec": spec.to_dict(),
        "molecule": molecule,
        "n_qubits": h_full.n_qubits,
        "full_terms": len(h_full),
        "partial_terms": len(h_partial),
        "full_groups": len(group_terms(h_full.sum)),
        "partial_groups": len(group_terms(h_partial.sum)),
        "hamiltonian_source": h_full.source,
    }
    (root / "experiment.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for r in runs:
        d = root / r.setting / r.mode
        d.mkdir(parents=True, exist_ok=True)
        (d / f"run_{r.run_index}.json").write_text(json.dumps(r.to_dict(), sort_keys=True) + "\n")

    _write_csv(
        root / "energies.csv",
        ("setting", "mode", "run", "seed", "status", "energy_full", "objective", "iterations"),
        ((r.setting, r.mode, r.run_index, r.seed, r.status, r.energy, r.objective, r.iterations) for r in runs),
    )
    summary = _summarize(runs, spec)
    rows = []
    for (setting, mode), b in summary.items():
        n_failed = sum(r.status == "failed" for r in runs if r.setting == setting and r.mode == mode)
        if b is None:
            rows.append((setting, mode, 0, n_failed) + (None,) * 8 + (0,))
        else:
            rows.append(
                (setting, mode, b.n, n_failed, b.mean, b.median, b.q1, b.q3,
                 b.whisker_low, b.whisker_high, b.notch_low, b.notch_high, len(b.outliers))
            )  # fmt: skip
    _write_csv(root / "summary.csv", SUMMARY_HEADER, rows)
    return ExperimentResult(root, molecule, runs, summary)


def load_runs(molecule_dir) -> list[RunResult]:
    runs = []
    for path in sorted(Path(molecule_dir).glob("*/*/run_*.json")):
        runs.append(RunResult(**json.loads(path.read_text())))
    runs.sort(key=lambda r: (SETTINGS.index(r.setting), MODES.index(r.mode), r.run_index))
    return runs


def _trace_rows(molecule: str, r: RunResult):
    if r.mode == "pha-init":
        parts = [r.records.get("stage1"), r.records.get("stage2")]
    else:
        parts = [r.records.get(r.mode)]
    it = 0
    for rec in parts:
        if rec is None:
            continue
        for e in rec["trace"]:
            yield (molecule, r.setting, r.mode, r.run_index, it, float(e))
            it += 1


def report(results_dir, out_dir=None, traces: bool = False, exclude_failed: bool = False) -> dict[str, Path]:
    """Per-molecule comparison table, term counts and optional convergence traces.

    Reads every ``<molecule>/experiment.json`` under ``results_dir``. Means
    that cannot be formed (mode not run, or every run failed) are written as
    ``NA``. Raises ``NothingToReport`` when no experiment is present.
    """
    results_dir = Path(results_dir)
    metas = sorted(results_dir.glob("*/experiment.json"))
    if not metas:
        raise NothingToReport(f"no experiments under {results_dir}")
    out_dir = Path(out_dir) if out_dir is not None else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    table, counts, trace_rows = [], [], []
    for meta_path in metas:
        meta = json.loads(meta_path.read_text())
        molecule = meta["molecule"]
        counts.append((molecule, meta["full_terms"], meta["partial_terms"]))
        runs = load_runs(meta_path.parent)
        for setting in SETTINGS:
            here = [r for r in runs if r.setting == setting]
            if not here:
                continue

            def mean(mode):
                v = [r.energy for r in here if r.mode == mode and _included(r, exclude_failed)]
                return float(np.mean(v)) if v else None

            table.append((molecule, setting.capitalize(), meta["n_qubits"], mean("full"), mean("partial"), mean("pha-init")))
            if traces:
                for r in here:
                    trace_rows.extend(_trace_rows(molecule, r))

    paths = {"table": out_dir / "table2.csv", "term_counts": out_dir / "term_counts.csv"}
    _write_csv(paths["table"], ("molecule", "setting", "qubits", "full_mean", "pha_mean", "pha_init_mean"), table)
    _write_csv(paths["term_counts"], ("molecule", "full_terms", "partial_terms"), counts)
    if traces:
        paths["traces"] = out_dir / "convergence_traces.csv"
        _write_csv(paths["traces"], ("molecule", "setting", "mode", "run", "iteration", "energy"), trace_rows)
    return paths
