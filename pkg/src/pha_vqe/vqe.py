"""Variational loop: CG with parameter-shift gradients, SPSA, cross-evaluation.

Every run is reproducible from ``VqeConfig.seed``. The seed is split into
three independent streams: initial parameters, optimizer randomness (SPSA
directions) and measurement randomness (shots, noise trajectories). Runs
sharing a seed therefore start from the same parameters whatever Hamiltonian
they optimize.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from .ansatz import Circuit, random_parameters
from .hamiltonian import QubitHamiltonian
from .simulator import (
    MeasurementPlan,
    NoiseModel,
    expectation_exact_batch,
    expectation_sampled,
    run_circuit_batch,
)

__all__ = [
    "VqeError",
    "SpsaHyperparams",
    "VqeConfig",
    "VqeRunRecord",
    "EnergyObjective",
    "parameter_shift_gradient",
    "finite_difference_gradient",
    "vqe_minimize",
    "cross_evaluate",
    "pha_initialized_vqe",
]


class VqeError(ArithmeticError):
    """Non-finite energy or a diverging optimizer."""


@dataclass(frozen=True)
class SpsaHyperparams:
    """Spall's gain sequences ``a_k = a / (k + 1 + A)**alpha``, ``c_k = c / (k + 1)**gamma``.

    ``a=None`` calibrates ``a`` so the first update moves each parameter by
    about ``target_step`` radians; ``A=None`` means ``0.1 * max_iterations``.
    """

    a: float | None = None
    c: float = 0.1
    A: float | None = None
    alpha: float = 0.602
    gamma: float = 0.101
    target_step: float = 0.1
    calibration_samples: int = 5


@dataclass(frozen=True)
class VqeConfig:
    optimizer: str = "CG"
    max_iterations: int | None = None
    gradient_method: str = "parameter-shift"
    spsa: SpsaHyperparams = field(default_factory=SpsaHyperparams)
    convergence_tol: float | None = None
    evaluation_mode: str = "exact"
    noise: str = "ideal"
    noise_model: NoiseModel | None = None
    shots: int = 8192
    seed: int = 0
    window: int = 10
    fd_step: float = 1e-5
    n_trajectories: int = 128

    def __post_init__(self):
        if self.optimizer not in ("CG", "SPSA"):
            raise ValueError(f"optimizer must be CG or SPSA, got {self.optimizer!r}")
        if self.gradient_method not in ("parameter-shift", "central-difference"):
            raise ValueError(f"unknown gradient method {self.gradient_method!r}")
        if self.evaluation_mode not in ("exact", "sampled"):
            raise ValueError(f"unknown evaluation mode {self.evaluation_mode!r}")
        if self.max_iterations is None:
            object.__setattr__(self, "max_iterations", 500 if self.optimizer == "CG" else 1000)
        if self.convergence_tol is None:
            object.__setattr__(self, "convergence_tol", 1e-6 if self.evaluation_mode == "exact" else 1e-3)
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.evaluation_mode == "exact" and not self.noise_model_resolved.is_trivial:
            raise ValueError("noisy simulation requires evaluation_mode='sampled'")

    @classmethod
    def ideal(cls, seed: int = 0, **kwargs) -> VqeConfig:
        return cls(optimizer="CG", evaluation_mode="exact", noise="ideal", seed=seed, **kwargs)

    @classmethod
    def noisy(cls, preset: str = "noisy", seed: int = 0, **kwargs) -> VqeConfig:
        return cls(optimizer="SPSA", evaluation_mode="sampled", noise=preset, seed=seed, **kwargs)

    @property
    def noise_model_resolved(self) -> NoiseModel:
        return self.noise_model if self.noise_model is not None else NoiseModel.preset(self.noise)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise_model"] = asdict(self.noise_model_resolved)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> VqeConfig:
        d = dict(d)
        d["spsa"] = SpsaHyperparams(**d.get("spsa", {}))
        if d.get("noise_model") is not None:
            d["noise_model"] = NoiseModel(**d["noise_model"])
        return cls(**d)


@dataclass(frozen=True)
class VqeRunRecord:
    """Outcome of one optimization.

    ``trace`` holds the objective value per iteration (for SPSA the mean of
    the two perturbed evaluations, closed by a fresh evaluation at the final
    parameters). ``energy`` is the last trace entry.
    """

    config: dict
    hamiltonian: str
    circuit: dict
    initial_params: list
    trace: list
    final_params: list
    energy: float
    status: str = "converged"
    e_cross: float | None = None
    n_evaluations: int = 0
    prior_iterations: int = 0
    wall_time: float = 0.0
    spsa_gain: float | None = None

    @property
    def n_iterations(self) -> int:
        return len(self.trace)

    @property
    def total_iterations(self) -> int:
        return self.prior_iterations + self.n_iterations

    @property
    def best_trace(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.trace, dtype=float))

    @property
    def vqe_config(self) -> VqeConfig:
        return VqeConfig.from_dict(self.config)

    def with_cross(self, value: float) -> VqeRunRecord:
        return replace(self, e_cross=float(value))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> VqeRunRecord:
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> VqeRunRecord:
        return cls.from_dict(json.loads(text))


def _streams(seed: int) -> tuple[np.random.Generator, ...]:
    ss = np.random.SeedSequence(seed)
    return tuple(np.random.default_rng(s) for s in ss.spawn(3))


class EnergyObjective:
    """``theta -> <psi(theta)|H|psi(theta)>`` in exact or sampled mode; counts evaluations."""

    def __init__(self, h: QubitHamiltonian, circuit: Circuit, cfg: VqeConfig, rng: np.random.Generator | None = None):
        if circuit.n_qubits != h.n_qubits:
            raise ValueError(f"circuit has {circuit.n_qubits} qubits, Hamiltonian {h.n_qubits}")
        self.h = h
        self.circuit = circuit
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.noise = cfg.noise_model_resolved
        self.plan = MeasurementPlan.grouped(h, cfg.shots) if cfg.evaluation_mode == "sampled" else None
        self.n_evals = 0

    def batch(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(thetas)
        self.n_evals += thetas.shape[0]
        if self.cfg.evaluation_mode == "exact":
            values = expectation_exact_batch(run_circuit_batch(self.circuit, thetas), self.h)
        else:
            values = np.array(
                [
                    expectation_sampled(
                        self.circuit, t, self.h, self.plan, self.noise, self.rng, self.cfg.n_trajectories
                    )[0]
                    for t in thetas
                ]
            )
        if not np.all(np.isfinite(values)):
            raise VqeError("non-finite energy")
        return values

    def __call__(self, theta: np.ndarray) -> float:
        return float(self.batch(np.asarray(theta, dtype=float)[None, :])[0])


def parameter_shift_gradient(f: EnergyObjective, theta: np.ndarray) -> np.ndarray:
    """``g_i = [E(theta + pi/2 e_i) - E(theta - pi/2 e_i)] / 2``, exact for RY/RZ parameters."""
    p = theta.size
    shifts = np.eye(p) * (np.pi / 2)
    values = f.batch(np.vstack([theta + shifts, theta - shifts]))
    return (values[:p] - values[p:]) / 2


def finite_difference_gradient(f: EnergyObjective, theta: np.ndarray, step: float = 1e-5) -> np.ndarray:
    p = theta.size
    shifts = np.eye(p) * step
    values = f.batch(np.vstack([theta + shifts, theta - shifts]))
    return (values[:p] - values[p:]) / (2 * step)


def _gradient(f: EnergyObjective, cfg: VqeConfig) -> Callable[[np.ndarray], np.ndarray]:
    if cfg.gradient_method == "parameter-shift":
        return lambda th: parameter_shift_gradient(f, th)
    return lambda th: finite_difference_gradient(f, th, cfg.fd_step)


def _windowed(best: list, window: int, tol: float) -> bool:
    """Best-so-far energy improved by less than ``tol`` over the last ``window`` iterations."""
    return len(best) >= window and abs(best[-window] - best[-1]) < tol


def _drift_settled(trace: list, window: int, tol: float, span_windows: int = 10) -> bool:
    """Noisy-trace version of the window test.

    The expected change over one window is estimated from a least-squares
    slope across the last ``span_windows * window`` iterations; a plain
    difference of two window means is dominated by shot noise.
    """
    span = span_windows * window
    if len(trace) < span:
        return False
    y = np.asarray(trace[-span:])
    x = np.arange(span) - (span - 1) / 2
    slope = float(x @ (y - y.mean()) / (x @ x))
    return abs(slope * window) < tol


def _line_search(f, theta, d, energy, slope, step, c1=1e-4, max_step=np.pi):
    """Armijo backtracking with parabolic step estimates.

    Each rejected trial is replaced by the minimizer of the parabola through
    ``(0, energy)`` with slope ``slope`` and the trial point, clipped to
    [0.1, 0.5] of the step. The accepted step gets one parabolic refinement,
    or is doubled while the energy keeps falling if the fit is concave.
    Returns ``(step, energy)`` or None when no acceptable step exists.
    """
    norm = np.linalg.norm(d)
    while True:
        e = f(theta + step * d)
        if e <= energy + c1 * step * slope:
            break
        curv = e - energy - slope * step
        step = float(np.clip(-slope * step**2 / (2 * curv), 0.1 * step, 0.5 * step))
        if step * norm < 1e-14:
            return None
    curv = e - energy - slope * step
    if curv > 0:
        refined = min(-slope * step**2 / (2 * curv), 4 * step, max_step / norm)
        if abs(refined - step) > 1e-3 * step:
            e_refined = f(theta + refined * d)
            if e_refined < e:
                return refined, e_refined
        return step, e
    # locally concave along d: keep doubling while the energy still drops
    while 2 * step * norm <= max_step:
        e_next = f(theta + 2 * step * d)
        if e_next >= e:
            break
        step, e = 2 * step, e_next
    return step, e


def _minimize_cg(f, grad, theta, cfg):
    """Polak-Ribiere+ conjugate gradient with an Armijo/parabolic line search."""
    max_step = np.pi
    energy = f(theta)
    trace = [energy]
    if cfg.max_iterations == 1:
        return theta, trace, "max_iterations"
    g = grad(theta)
    d = -g
    prev = None  # (accepted step, directional slope) of the last iteration
    status = "max_iterations"
    while len(trace) < cfg.max_iterations:
        if np.linalg.norm(g) < 1e-10:
            status = "converged"
            break
        slope = g @ d
        if slope >= 0:
            d, slope = -g, -(g @ g)
        step = 1.0 if prev is None else prev[0] * prev[1] / slope
        step = min(step, max_step / np.linalg.norm(d))
        found = _line_search(f, theta, d, energy, slope, step, max_step=max_step)
        if found is None:
            if np.array_equal(d, -g):
                status = "converged"
                break
            d, prev = -g, None
            continue
        step, energy = found
        prev = (step, slope)
        theta = theta + step * d
        g_new = grad(theta)
        beta = max(0.0, g_new @ (g_new - g) / (g @ g))
        d = -g_new + beta * d
        g = g_new
        trace.append(energy)
        if _windowed(trace, cfg.window, cfg.convergence_tol):
            status = "converged"
            break
    return theta, trace, status


def _minimize_spsa(f, theta, cfg, rng, k0: int = 0):
    """SPSA; ``k0`` offsets the gain schedule when continuing an earlier run."""
    hp = cfg.spsa
    n_iter = cfg.max_iterations - 1
    big_a = 0.1 * cfg.max_iterations if hp.A is None else hp.A
    p = theta.size
    a = hp.a
    if a is None:
        mags = []
        for _ in range(hp.calibration_samples):
            delta = rng.choice((-1.0, 1.0), size=p)
            e_plus, e_minus = f.batch(np.vstack([theta + hp.c * delta, theta - hp.c * delta]))
            mags.append(abs(e_plus - e_minus) / (2 * hp.c))
        mag = float(np.mean(mags))
        a = hp.target_step * (1 + big_a) ** hp.alpha / mag if mag > 0 else hp.target_step
    trace: list[float] = []
    status = "max_iterations"
    w = cfg.window
    for k in range(n_iter):
        ak = a / (k0 + k + 1 + big_a) ** hp.alpha
        ck = hp.c / (k0 + k + 1) ** hp.gamma
        delta = rng.choice((-1.0, 1.0), size=p)
        e_plus, e_minus = f.batch(np.vstack([theta + ck * delta, theta - ck * delta]))
        theta = theta - ak * (e_plus - e_minus) / (2 * ck) * delta
        trace.append(float(e_plus + e_minus) / 2)
        if not np.all(np.isfinite(theta)):
            raise VqeError("SPSA parameters diverged")
        if _drift_settled(trace, w, cfg.convergence_tol):
            status = "converged"
            break
    trace.append(f(theta))
    return theta, trace, status, a


def vqe_minimize(
    h: QubitHamiltonian,
    circuit: Circuit,
    cfg: VqeConfig,
    initial_params: np.ndarray | None = None,
    prior_iterations: int = 0,
) -> VqeRunRecord:
    """Minimize ``<psi(theta)|h|psi(theta)>`` over the circuit parameters.

    Starts from i.i.d. uniform parameters on [-pi, pi] drawn from the seed
    unless ``initial_params`` is given. For SPSA, ``prior_iterations`` also
    advances the gain schedule, so a warm start continues with small steps.
    """
    if circuit.n_qubits != h.n_qubits:
        raise ValueError(f"circuit has {circuit.n_qubits} qubits, Hamiltonian {h.n_qubits}")
    rng_init, rng_opt, rng_meas = _streams(cfg.seed)
    theta0 = random_parameters(circuit, rng_init)
    if initial_params is not None:
        theta0 = np.asarray(initial_params, dtype=float).copy()
        if theta0.size != circuit.n_parameters:
            raise ValueError("initial_params length does not match the circuit")
    f = EnergyObjective(h, circuit, cfg, rng_meas)
    start = time.perf_counter()
    gain = None
    if cfg.optimizer == "CG":
        theta, trace, status = _minimize_cg(f, _gradient(f, cfg), theta0.copy(), cfg)
    else:
        theta, trace, status, gain = _minimize_spsa(f, theta0.copy(), cfg, rng_opt, prior_iterations)
    return VqeRunRecord(
        config=cfg.to_dict(),
        hamiltonian=h.label,
        circuit=circuit.to_dict(),
        initial_params=theta0.tolist(),
        trace=[float(e) for e in trace],
        final_params=np.asarray(theta).tolist(),
        energy=float(trace[-1]),
        status=status,
        n_evaluations=f.n_evals,
        prior_iterations=prior_iterations,
        wall_time=time.perf_counter() - start,
        spsa_gain=gain,
    )


def cross_evaluate(record: VqeRunRecord, h_full: QubitHamiltonian) -> float:
    """``<psi(theta_final)|h_full|psi(theta_final)>`` in the record's evaluation mode."""
    circuit = Circuit.from_dict(record.circuit)
    if circuit.n_qubits != h_full.n_qubits:
        raise ValueError(f"record circuit has {circuit.n_qubits} qubits, Hamiltonian {h_full.n_qubits}")
    cfg = record.vqe_config
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(7,)))
    f = EnergyObjective(h_full, circuit, cfg, rng)
    return f(np.asarray(record.final_params))


def pha_initialized_vqe(
    h_full: QubitHamiltonian, h_partial: QubitHamiltonian, circuit: Circuit, cfg: VqeConfig
) -> tuple[VqeRunRecord, VqeRunRecord]:
    """Optimize the partial Hamiltonian, then continue on the full one from there.

    With SPSA the second stage reuses the first stage's calibrated gain
    instead of recalibrating near the optimum, where the gradient estimate is
    mostly shot noise.
    """
    if h_full.n_qubits != h_partial.n_qubits:
        raise ValueError("full and partial Hamiltonians act on different qubit counts")
    stage1 = vqe_minimize(h_partial, circuit, cfg)
    stage1 = stage1.with_cross(cross_evaluate(stage1, h_full))
    if cfg.optimizer == "SPSA" and cfg.spsa.a is None:
        cfg = replace(cfg, spsa=replace(cfg.spsa, a=stage1.spsa_gain))
    stage2 = vqe_minimize(
        h_full, circuit, cfg, initial_params=np.asarray(stage1.final_params), prior_iterations=stage1.n_iterations
    )
    return stage1, stage2
