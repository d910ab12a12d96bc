"""Quantum-jump (Monte Carlo wave-function) unravelling of the Lindblad equation.

Each trajectory is a pure state that drifts under the effective generator
``H_eff = H - (i/2) sum_k L_k^+ L_k`` and jumps to ``L_k psi / |L_k psi|``
with probability ``dt <L_k^+ L_k>`` per step.  The ensemble average of
``|psi><psi|`` solves the master equation up to O(dt).

Trajectory ``i`` of a run with seed ``s`` draws its uniforms from its own
generator seeded by ``SeedSequence(s, spawn_key=(i,))``, so every estimate
is reproducible bit for bit and independent of how trajectories are
batched or distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import OperatorBasis, coordinates, make_basis
from .errors import NotNormalized, StepTooLarge, ValidationError, ZeroNormJump
from .liouvillian import LindbladModel
from .linalg import dag

JUMP_GUARD = 0.1
NORM_TOL = 1e-10
MIN_TRAJECTORIES = 100
CHUNK = 1024


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent random stream for trajectory ``index``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def shifted_channels(model: LindbladModel, shift: complex) -> LindbladModel:
    """Same master equation, different unravelling.

    Each ``L_k`` is replaced by the pair ``(L_k + c)/sqrt(2)`` and
    ``(L_k - c)/sqrt(2)``; the cross terms cancel in both the jump and the
    anticommutator parts, so the generator is unchanged.  For
    ``L = sqrt(gamma) pauli_z`` and ``c = sqrt(gamma)`` the two channels are
    projectors onto the ``pauli_z`` eigenstates: every jump is a projective
    measurement and trajectories collapse with Born-rule frequencies.
    """
    ident = np.eye(model.n)
    chans = []
    for l in model.lindblads:
        chans.append((l + shift * ident) / math.sqrt(2))
        chans.append((l - shift * ident) / math.sqrt(2))
    return LindbladModel(H=model.H, lindblads=tuple(chans), name=model.name)


class _Stepper:
    """Precomputed operators for fixed-``dt`` jump steps on a batch of kets."""

    def __init__(self, model: LindbladModel, dt: float):
        if not dt > 0:
            raise ValidationError(f"dt must be positive, got {dt}")
        n = model.n
        ls = np.array(model.lindblads, dtype=complex).reshape(-1, n, n)
        rates = ls.conj().transpose(0, 2, 1) @ ls
        worst = max((float(np.linalg.norm(k, 2)) for k in rates), default=0.0)
        if dt * worst > JUMP_GUARD:
            raise StepTooLarge(f"dt * max|L^+ L| = {dt * worst:.3g} exceeds {JUMP_GUARD}")
        heff = model.H - 0.5j * rates.sum(axis=0)
        a = -1j * dt * heff
        self.drift = np.eye(n) + a + 0.5 * (a @ a)
        self.ls = ls
        self.dt = dt

    def __call__(self, psi: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out = psi @ self.drift.T
        out /= np.linalg.norm(out, axis=1, keepdims=True)
        if not len(self.ls):
            return out, np.zeros(psi.shape[0], dtype=bool)
        lpsi = np.einsum("kab,mb->mka", self.ls, psi)
        norms2 = np.einsum("mka,mka->mk", lpsi.conj(), lpsi).real
        cum = np.cumsum(self.dt * norms2, axis=1)
        jumped = u < cum[:, -1]
        if np.any(jumped):
            idx = np.nonzero(jumped)[0]
            chan = np.argmax(u[idx, None] < cum[idx], axis=1)
            sel = norms2[idx, chan]
            if np.any(sel <= 1e-300):
                raise ZeroNormJump("selected a jump channel that annihilates the state")
            out[idx] = lpsi[idx, chan] / np.sqrt(sel)[:, None]
        return out, jumped


def _ket(model: LindbladModel, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (model.n,):
        raise ValidationError(f"state vector must have length {model.n}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise NotNormalized(f"|psi| = {np.linalg.norm(psi)!r}")
    return psi


def jump_step(model: LindbladModel, psi, dt: float, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """Advance one ket by ``dt``; returns the new unit ket and whether it jumped."""
    psi = _ket(model, psi)
    out, jumped = _Stepper(model, dt)(psi[None, :], np.array([rng.random()]))
    return out[0], bool(jumped[0])


def _steps(t: float, dt: float) -> tuple[int, float]:
    if not t >= 0:
        raise ValidationError(f"t must be non-negative, got {t}")
    if t == 0:
        return 0, dt
    steps = int(math.ceil(t / dt - 1e-9))
    return steps, t / steps


@dataclass(frozen=True, eq=False)
class JumpTrajectory:
    times: np.ndarray
    states: np.ndarray
    jump_times: np.ndarray
    rng_stream_id: int


def jump_trajectory(model: LindbladModel, psi0, t_max: float, dt: float, seed: int, stream_id: int = 0) -> JumpTrajectory:
    """One recorded trajectory; identical to trajectory ``stream_id`` of :func:`ensemble_mean`."""
    psi = _ket(model, psi0)
    steps, h = _steps(t_max, dt)
    stepper = _Stepper(model, h)
    u = stream(seed, stream_id).random(steps)
    states = np.empty((steps + 1, model.n), dtype=complex)
    states[0] = psi
    jumps = []
    for i in range(steps):
        nxt, jumped = stepper(states[i][None, :], u[i : i + 1])
        states[i + 1] = nxt[0]
        if jumped[0]:
            jumps.append((i + 1) * h)
    times = np.arange(steps + 1) * h
    return JumpTrajectory(times=times, states=states, jump_times=np.array(jumps), rng_stream_id=stream_id)


@dataclass(frozen=True, eq=False)
class EnsembleEstimate:
    """Ensemble average of ``|psi><psi|`` and per-component standard errors.

    ``bloch`` and ``standard_error`` are indexed like the Bloch vector of the
    basis used (length ``n^2 - 1``).
    """

    mean_rho: np.ndarray
    bloch: np.ndarray
    standard_error: np.ndarray
    n_traj: int
    seed: int
    t: float
    dt: float


def _run_chunk(stepper: _Stepper | None, psi0: np.ndarray, steps: int, seed: int, start: int, stop: int):
    psi = np.tile(psi0, (stop - start, 1))
    if steps:
        u = np.stack([stream(seed, i).random(steps) for i in range(start, stop)])
        for k in range(steps):
            psi, _ = stepper(psi, u[:, k])
    return psi


def final_kets(model: LindbladModel, psi0, t: float, dt: float, n_traj: int, seed: int, workers: int = 1) -> np.ndarray:
    """Kets of ``n_traj`` independent trajectories at time ``t`` (row ``i`` = stream ``i``)."""
    psi0 = _ket(model, psi0)
    if isinstance(n_traj, bool) or not isinstance(n_traj, (int, np.integer)) or n_traj < 1:
        raise ValidationError(f"n_traj must be a positive integer, got {n_traj!r}")
    steps, h = _steps(t, dt)
    stepper = _Stepper(model, h) if steps else None
    bounds = [(a, min(a + CHUNK, n_traj)) for a in range(0, n_traj, CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _run_chunk(stepper, psi0, steps, seed, *b), bounds))
    else:
        parts = [_run_chunk(stepper, psi0, steps, seed, *b) for b in bounds]
    return np.concatenate(parts)


def ensemble_mean(
    model: LindbladModel,
    psi0,
    t: float,
    dt: float,
    n_traj: int,
    seed: int,
    basis: OperatorBasis | None = None,
    workers: int = 1,
) -> EnsembleEstimate:
    """Monte Carlo estimate of ``rho(t)`` from ``n_traj`` jump trajectories."""
    if isinstance(n_traj, bool) or not isinstance(n_traj, (int, np.integer)) or n_traj < MIN_TRAJECTORIES:
        raise ValidationError(f"n_traj must be an integer >= {MIN_TRAJECTORIES}, got {n_traj!r}")
    basis = basis or make_basis(model.n)
    kets = final_kets(model, psi0, t, dt, n_traj, seed, workers)
    # r_j = <psi|sigma_j|psi> per trajectory
    comps = np.einsum("ma,jab,mb->mj", kets.conj(), basis.sigmas[1:], kets).real
    bloch = comps.mean(axis=0)
    se = comps.std(axis=0, ddof=1) / math.sqrt(n_traj)
    rho = np.einsum("ma,mb->ab", kets, kets.conj()) / n_traj
    rho = 0.5 * (rho + dag(rho))
    return EnsembleEstimate(
        mean_rho=rho, bloch=bloch, standard_error=se, n_traj=int(n_traj), seed=int(seed), t=float(t), dt=float(dt)
    )


def bloch_of(rho: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    return coordinates(rho, basis)[1:]
