"""Time evolution of Bloch vectors.

The generator is time independent, so :func:`evolve_exact` is the primary
path: one matrix exponential of the augmented generator
``[[Lambda, b], [0, 0]]`` acting on ``(r0, 1)``.  :func:`evolve_rk4` is a
fixed-step Runge-Kutta integrator kept deliberately free of any matrix
exponential so it can serve as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import OperatorBasis, make_basis, reconstruct
from .errors import PositivityViolation, StepTooLarge, ValidationError
from .liouvillian import BlochGenerator, LindbladModel, bloch_generator
from .linalg import real_expm

POSITIVITY_TOL = 1e-9
RK4_STABILITY = 0.5


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    model_id: str = ""

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.shape[0] != self.times.size:
            raise ValidationError("times and states must have matching lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")
        self.times.setflags(write=False)
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return self.times.size


def _augmented(gen: BlochGenerator) -> np.ndarray:
    d = gen.dim
    a = np.zeros((d + 1, d + 1))
    a[:d, :d] = gen.Lambda
    a[:d, d] = gen.b
    return a


def evolve_exact(gen: BlochGenerator, r0, t: float) -> np.ndarray:
    """Solution of ``dr/dt = Lambda r + b`` at time ``t >= 0``."""
    if not t >= 0:
        raise ValidationError(f"t must be non-negative, got {t}")
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (gen.dim,):
        raise ValidationError(f"r0 must have length {gen.dim}")
    if t == 0:
        return r0.copy()
    prop = real_expm(_augmented(gen), t)
    return prop[:-1, :-1] @ r0 + prop[:-1, -1]


def evolve_exact_grid(gen: BlochGenerator, r0, t_max: float, dt: float, model_id: str = "") -> Trajectory:
    """Exact propagation sampled on the uniform grid ``0, h, 2h, ..., t_max``.

    ``h = t_max / ceil(t_max / dt)``.  A single step propagator is
    exponentiated once and applied repeatedly.
    """
    times = uniform_grid(t_max, dt)
    r0 = np.asarray(r0, dtype=float)
    prop = real_expm(_augmented(gen), times[1] - times[0])
    a, c = prop[:-1, :-1], prop[:-1, -1]
    states = np.empty((times.size, gen.dim))
    states[0] = r0
    for i in range(1, times.size):
        states[i] = a @ states[i - 1] + c
    return Trajectory(times=times, states=states, model_id=model_id)


def uniform_grid(t_max: float, dt: float) -> np.ndarray:
    if not (dt > 0 and t_max > 0):
        raise ValidationError("t_max and dt must be positive")
    if dt > t_max:
        raise ValidationError(f"dt={dt} exceeds t_max={t_max}")
    steps = int(math.ceil(t_max / dt - 1e-9))
    return np.linspace(0.0, t_max, steps + 1)


def evolve_rk4(model: LindbladModel, basis: OperatorBasis | None, r0, t_max: float, dt: float) -> Trajectory:
    """Classical fourth-order Runge-Kutta on the Bloch flow, sampled every step."""
    gen = bloch_generator(model, basis)
    lam, b = gen.Lambda, gen.b
    times = uniform_grid(t_max, dt)
    h = times[1] - times[0]
    norm = float(np.linalg.norm(lam, 2)) if lam.size else 0.0
    if h * norm > RK4_STABILITY:
        raise StepTooLarge(f"dt * |Lambda| = {h * norm:.3g} exceeds {RK4_STABILITY}")
    r = np.array(r0, dtype=float)
    states = np.empty((times.size, r.size))
    states[0] = r
    for i in range(1, times.size):
        k1 = lam @ r + b
        k2 = lam @ (r + 0.5 * h * k1) + b
        k3 = lam @ (r + 0.5 * h * k2) + b
        k4 = lam @ (r + h * k3) + b
        r = r + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i] = r
    return Trajectory(times=times, states=states, model_id=model.name)


def min_eigenvalues(traj: Trajectory, basis: OperatorBasis) -> np.ndarray:
    rhos = np.array([reconstruct(r, basis) for r in traj.states])
    return np.linalg.eigvalsh(rhos)[:, 0]


def assert_positive(traj: Trajectory, basis: OperatorBasis | None = None, tol: float = POSITIVITY_TOL) -> None:
    """Raise :class:`PositivityViolation` if any sample leaves the state space."""
    if basis is None:
        n = int(round(math.sqrt(traj.states.shape[1] + 1)))
        basis = make_basis(n)
    low = min_eigenvalues(traj, basis)
    worst = int(np.argmin(low))
    if low[worst] < -tol:
        raise PositivityViolation(
            f"density matrix at t={traj.times[worst]:.6g} has eigenvalue {low[worst]:.3e}"
        )
