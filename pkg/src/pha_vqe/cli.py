"""Command-line entry point: ``pha-vqe <subcommand>``.

Exit codes: 0 success, 2 parse or configuration error, 3 numeric failure,
4 nothing to report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .ansatz import vqe_ansatz
from .exact import ground_state
from .fermion import IntegrityError, jw_transform, load_fermion_hamiltonian
from .hamiltonian import (
    HamiltonianParseError,
    PartialSpec,
    QubitHamiltonian,
    load_hamiltonian,
    make_partial,
    save_hamiltonian,
)
from .harness import MODES, SETTINGS, ExperimentSpec, NothingToReport, report, run_experiment
from .pauli import group_terms
from .simulator import expectation_exact
from .vqe import VqeConfig, cross_evaluate, pha_initialized_vqe, vqe_minimize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_EMPTY = 0, 2, 3, 4
OUTPUT_ENV = "PHA_VQE_OUTPUT"


def _emit(h: QubitHamiltonian, out: str | None) -> None:
    if out:
        save_hamiltonian(h, out)
        print(f"wrote {len(h)} terms on {h.n_qubits} qubits to {out}")
    else:
        json.dump(h.to_dict(), sys.stdout, indent=1)
        print()


def cmd_transform(args) -> int:
    fh = load_fermion_hamiltonian(args.integrals)
    h = jw_transform(fh)
    if args.molecule:
        h = QubitHamiltonian(h.sum, h.identity_offset, {**h.source, "molecule": args.molecule})
    _emit(h, args.output)
    return EXIT_OK


def cmd_partial(args) -> int:
    h = load_hamiltonian(args.hamiltonian)
    if args.sweep is not None:
        # energies for k = 0..K: full energy of the partial ground state
        print("k,terms,groups,e_partial_ground,e_cross")
        for k in range(args.sweep + 1):
            hp = make_partial(h, PartialSpec(k))
            e, psi = ground_state(hp)
            print(f"{k},{len(hp)},{len(group_terms(hp.sum))},{e:.10f},{expectation_exact(psi, h):.10f}")
        return EXIT_OK
    hp = make_partial(h, PartialSpec(args.extra_terms))
    _emit(hp, args.output)
    return EXIT_OK


def cmd_exact(args) -> int:
    h = load_hamiltonian(args.hamiltonian)
    e, psi = ground_state(h)
    print(f"{e:.12f}")
    if args.vector:
        np.save(args.vector, psi.amplitudes)
    return EXIT_OK


def _vqe_config(args) -> VqeConfig:
    kw = {"seed": args.seed, "shots": args.shots}
    if args.max_iterations is not None:
        kw["max_iterations"] = args.max_iterations
    if args.optimizer:
        kw["optimizer"] = args.optimizer
    if args.setting == "ideal":
        return VqeConfig.ideal(**kw) if args.evaluation == "exact" else VqeConfig(evaluation_mode="sampled", **kw)
    return VqeConfig.noisy(args.setting, **kw)


def cmd_vqe(args) -> int:
    h = load_hamiltonian(args.hamiltonian)
    cfg = _vqe_config(args)
    circuit = vqe_ansatz(h.n_qubits, args.layers)
    if args.mode == "full":
        rec = vqe_minimize(h, circuit, cfg)
        out = {"energy": rec.energy, "record": rec.to_dict()}
    elif args.mode == "partial":
        rec = vqe_minimize(make_partial(h, PartialSpec(args.extra_terms)), circuit, cfg)
        rec = rec.with_cross(cross_evaluate(rec, h))
        out = {"energy": rec.e_cross, "objective": rec.energy, "record": rec.to_dict()}
    else:
        s1, s2 = pha_initialized_vqe(h, make_partial(h, PartialSpec(args.extra_terms)), circuit, cfg)
        rec = s2
        out = {"energy": s2.energy, "stage1": s1.to_dict(), "record": s2.to_dict()}
    print(f"energy {out['energy']:.10f}  iterations {rec.n_iterations}  status {rec.status}")
    if args.output:
        Path(args.output).write_text(json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def cmd_batch(args) -> int:
    if args.config:
        d = json.loads(Path(args.config).read_text())
    else:
        if not args.hamiltonian:
            raise ValueError("batch needs --config or --hamiltonian")
        d = {"hamiltonian": args.hamiltonian}
    for key in ("settings", "modes", "runs", "master_seed", "output", "extra_terms", "molecule", "layers", "max_iterations", "shots"):
        value = getattr(args, key)
        if value is not None:
            d[key] = value
    if args.exclude_failed:
        d["exclude_failed"] = True
    d.setdefault("output", os.environ.get(OUTPUT_ENV, "results"))
    spec = ExperimentSpec.from_dict(d)
    result = run_experiment(spec, jobs=args.jobs)
    for (setting, mode), b in result.summary.items():
        text = "no completed runs" if b is None else f"mean {b.mean:.6f}  median {b.median:.6f}  n {b.n}"
        print(f"{setting:>9} {mode:>8}  {text}")
    print(f"results in {result.directory}")
    return EXIT_OK


def cmd_report(args) -> int:
    directory = args.directory or os.environ.get(OUTPUT_ENV, "results")
    paths = report(directory, args.output, traces=args.traces, exclude_failed=args.exclude_failed)
    print(Path(paths["table"]).read_text(), end="")
    for p in paths.values():
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pha-vqe", description="Partial qubit Hamiltonians for VQE.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("transform", help="fermionic integrals -> qubit Hamiltonian (Jordan-Wigner)")
    s.add_argument("integrals")
    s.add_argument("-o", "--output")
    s.add_argument("--molecule")
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("partial", help="keep I/Z-only terms plus the k largest others")
    s.add_argument("hamiltonian")
    s.add_argument("-k", "--extra-terms", type=int, default=0)
    s.add_argument("--sweep", type=int, metavar="K", help="print exact energies for k = 0..K instead")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_partial)

    s = sub.add_parser("exact", help="ground-state energy by exact diagonalization")
    s.add_argument("hamiltonian")
    s.add_argument("--vector", help="save the ground eigenvector as .npy")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("vqe", help="single VQE run")
    s.add_argument("hamiltonian")
    s.add_argument("--mode", choices=MODES, default="full")
    s.add_argument("--setting", choices=SETTINGS, default="ideal")
    s.add_argument("--evaluation", choices=("exact", "sampled"), default="exact", help="ideal setting only")
    s.add_argument("--optimizer", choices=("CG", "SPSA"))
    s.add_argument("-k", "--extra-terms", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--layers", type=int)
    s.add_argument("--max-iterations", type=int)
    s.add_argument("--shots", type=int, default=8192)
    s.add_argument("-o", "--output", help="write the run record as JSON")
    s.set_defaults(func=cmd_vqe)

    s = sub.add_parser("batch", help="run an experiment ensemble")
    s.add_argument("--config", help="JSON file mirroring ExperimentSpec")
    s.add_argument("--hamiltonian")
    s.add_argument("--settings", nargs="+", choices=SETTINGS)
    s.add_argument("--modes", nargs="+", choices=MODES)
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", dest="master_seed", type=int)
    s.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} or ./results)")
    s.add_argument("-k", "--extra-terms", type=int)
    s.add_argument("--molecule")
    s.add_argument("--layers", type=int)
    s.add_argument("--max-iterations", type=int)
    s.add_argument("--shots", type=int)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--exclude-failed", action="store_true", help="leave non-converged runs out of statistics")
    s.set_defaults(func=cmd_batch)

    s = sub.add_parser("report", help="comparison table CSV, term counts, traces")
    s.add_argument("directory", nargs="?")
    s.add_argument("-o", "--output", help="directory for the CSV files (default: the results directory)")
    s.add_argument("--traces", action="store_true")
    s.add_argument("--exclude-failed", action="store_true")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IntegrityError, ArithmeticError, MemoryError, RuntimeError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NothingToReport as exc:
        print(f"nothing to report: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (HamiltonianParseError, json.JSONDecodeError, FileNotFoundError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
