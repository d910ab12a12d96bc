"""Randomised cross-checks between independent code paths.

Every check compares two routes that share no numerical helpers: operator
traces against Bloch-space algebra, the matrix exponential against RK4 and
the closed form, jump trajectories against the deterministic flow.  Cases
are generated from ``SeedSequence(seed, spawn_key=(i,))`` so case ``i`` is
the same whatever ``n_cases`` or the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import coordinates, embed, make_basis, reconstruct
from .errors import ValidationError
from .liouvillian import BlochGenerator, LindbladModel, apply_liouvillian, bloch_generator
from .linalg import spectrum
from .metric import hermitian_counterpart
from .models import TwoLevelParams, pt_closed_form, pt_model
from .propagator import evolve_exact, evolve_rk4
from .speed import (
    modified_skew,
    radial_speed,
    speed_decomposition,
    speed_squared,
    tangential_speed,
    variance,
    wy_skew,
)
from .unravel import ensemble_mean

# Monte Carlo checks are costly; one in every MC_STRIDE cases runs one.
MC_STRIDE = 100
MC_TRAJ = 2000
MC_SIGMAS = 5.0


@dataclass(frozen=True)
class ModelGenerator:
    n: int = 2
    hamiltonian_scale: float = 1.0
    lindblad_scale: float = 1.0
    n_lindblads: int = 1
    hermitian_lindblads: bool = False
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or not 2 <= self.n <= 8:
            raise ValidationError(f"n must be an integer in [2, 8], got {self.n!r}")
        if not (self.hamiltonian_scale > 0 and self.lindblad_scale > 0):
            raise ValidationError("scales must be positive")
        if self.n_lindblads < 0:
            raise ValidationError("n_lindblads must be non-negative")


def _gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)


def random_model(gen: ModelGenerator) -> LindbladModel:
    """Gaussian Hermitian ``H`` and Gaussian (optionally Hermitian) ``L_k``; deterministic per seed."""
    rng = np.random.default_rng(gen.seed)
    a = _gaussian(rng, gen.n)
    h = gen.hamiltonian_scale * (a + a.conj().T) / 2
    ls = []
    for _ in range(gen.n_lindblads):
        m = _gaussian(rng, gen.n)
        if gen.hermitian_lindblads:
            m = (m + m.conj().T) / 2
        ls.append(gen.lindblad_scale * m)
    return LindbladModel(H=h, lindblads=tuple(ls), name=f"random-{gen.seed}")


def random_state(rng: np.random.Generator, n: int, pure: bool = False) -> np.ndarray:
    """Random density matrix; full rank unless ``pure``."""
    if pure:
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    a = _gaussian(rng, n)
    rho = a @ a.conj().T + 1e-3 * np.eye(n)
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# Report


@dataclass
class Counterexample:
    case: int
    config: dict
    detail: str


@dataclass
class CheckResult:
    name: str
    runs: int = 0
    failures: list[Counterexample] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def minimal(self) -> Counterexample | None:
        """Smallest failing case: lowest dimension, fewest channels, then lowest index."""
        if not self.failures:
            return None
        return min(self.failures, key=lambda c: (c.config.get("n", 0), c.config.get("n_lindblads", 0), c.case))


@dataclass
class PropertyReport:
    seed: int
    n_cases: int
    checks: dict[str, CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def summary(self) -> str:
        lines = [f"property suite: seed={self.seed} cases={self.n_cases}"]
        for c in self.checks.values():
            status = "PASS" if c.passed else f"FAIL ({len(c.failures)}/{c.runs})"
            lines.append(f"  {c.name:<28s} {status}")
            m = c.minimal()
            if m is not None:
                lines.append(f"    minimal counterexample: case {m.case} {m.config} :: {m.detail}")
        lines.append("ALL PASS" if self.passed else "FAILURES PRESENT")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        out = {"seed": self.seed, "n_cases": self.n_cases, "passed": self.passed, "checks": {}}
        for name, c in self.checks.items():
            m = c.minimal()
            out["checks"][name] = {
                "runs": c.runs,
                "failures": len(c.failures),
                "minimal": None if m is None else {"case": m.case, "config": m.config, "detail": m.detail},
            }
        return out


# ---------------------------------------------------------------------------
# Individual checks.  Each returns None on success or a failure message.


def _close(a, b, tol: float) -> str | None:
    err = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    return None if err <= tol else f"deviation {err:.3e} > {tol:.1e}"


def check_roundtrip(model, gen, rho, rng) -> str | None:
    basis = make_basis(model.n)
    return _close(reconstruct(embed(rho, basis), basis), rho, 1e-12)


def check_generator_consistency(model, gen, rho, rng) -> str | None:
    """``Lambda r + b`` against the coordinates of ``L rho`` computed with matrices."""
    basis = make_basis(model.n)
    r = embed(rho, basis)
    lhs = gen.Lambda @ r + gen.b
    rhs = coordinates(apply_liouvillian(model, rho), basis)[1:]
    return _close(lhs, rhs, 1e-10 * max(1.0, float(np.max(np.abs(rhs)))))


def check_conjugate_spectrum(model, gen, rho, rng) -> str | None:
    vals = spectrum(gen.full).values
    scale = max(1.0, float(np.max(np.abs(vals))))
    for v in vals:
        if np.min(np.abs(vals - np.conj(v))) > 1e-7 * scale:
            return f"eigenvalue {v:.6g} has no conjugate partner"
    if np.min(np.abs(vals)) > 1e-8 * scale:
        return "no zero eigenvalue"
    return None


def check_pythagoras(model, gen, rho, rng) -> str | None:
    v2 = speed_squared(model, rho)
    vr, vt = radial_speed(model, rho), tangential_speed(model, rho)
    return _close(vr * vr + vt * vt, v2, 1e-10 * max(1.0, v2))


def check_three_terms(model, gen, rho, rng) -> str | None:
    v2 = speed_squared(model, rho)
    return _close(sum(speed_decomposition(model, rho)), v2, 1e-10 * max(1.0, v2))


def check_skew_sandwich(model, gen, rho, rng) -> str | None:
    skew, var = wy_skew(model.H, rho), variance(model.H, rho)
    tol = 1e-10 * max(1.0, var)
    if skew < -tol or skew > var + tol:
        return f"skew {skew:.6g} outside [0, {var:.6g}]"
    pure = random_state(rng, model.n, pure=True)
    return _close(wy_skew(model.H, pure), variance(model.H, pure), tol)


def check_radial_identity(model, gen, rho, rng) -> str | None:
    n = model.n
    dev = rho - np.eye(n) / n
    rad = math.sqrt(np.einsum("ij,ji->", dev, dev).real)
    rhs = abs(sum(modified_skew(l, rho) for l in model.lindblads)) / rad
    lhs = radial_speed(model, rho)
    return _close(lhs, rhs, 1e-9 * max(lhs, 1.0))


def check_triple_agreement(model, gen, rho, rng) -> str | None:
    """PT model at random parameters: closed form, matrix exponential and RK4."""
    g = rng.uniform(0.2, 3.0)
    gamma = g if rng.random() < 0.2 else rng.uniform(0.0, 3.0)
    p = TwoLevelParams(g, gamma)
    pt = pt_model(p)
    r0 = rng.standard_normal(3)
    r0 *= rng.uniform(0, 1 / math.sqrt(2)) / np.linalg.norm(r0)
    dt = 0.01
    traj = evolve_rk4(pt, None, r0, 5.0, dt)
    closed = pt_closed_form(p, r0, traj.times)
    pgen = bloch_generator(pt)
    exact = np.array([evolve_exact(pgen, r0, t) for t in traj.times[::50]])
    err = _close(exact, closed[::50], 1e-9)
    if err:
        return f"expm vs closed form at g={g:.4g}, gamma={gamma:.4g}: {err}"
    err = _close(traj.states, closed, 1e-6)
    if err:
        return f"RK4 vs closed form at g={g:.4g}, gamma={gamma:.4g}: {err}"
    return None


def check_pseudo_hermitian(model, gen, rho, rng) -> str | None:
    """``F = u h0 u^-1`` with a random metric ``u^2``; its counterpart must have ``h0``'s spectrum."""
    n = model.n
    b = _gaussian(rng, n)
    metric = b @ b.conj().T + 0.05 * np.eye(n)
    w, v = np.linalg.eigh(metric)
    u = (v * np.sqrt(w)) @ v.conj().T
    a = _gaussian(rng, n)
    h0 = (a + a.conj().T) / 2
    f = u @ h0 @ np.linalg.inv(u)
    got = np.linalg.eigvalsh(hermitian_counterpart(f, metric))
    return _close(got, np.linalg.eigvalsh(h0), 1e-9 * max(1.0, float(np.max(np.abs(got)))))


def check_unravelling(model, gen, rho, rng) -> str | None:
    """Jump-trajectory mean against the exact flow for a random pure initial ket."""
    n = model.n
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    worst = max(float(np.linalg.norm(l.conj().T @ l, 2)) for l in model.lindblads)
    dt = min(1e-3, 0.05 / worst)
    t = 0.3
    seed = int(rng.integers(2**31))
    est = ensemble_mean(model, psi, t, dt, MC_TRAJ, seed)
    basis = make_basis(n)
    exact = evolve_exact(gen, embed(np.outer(psi, psi.conj()), basis), t)
    bound = MC_SIGMAS * est.standard_error + 1e-10
    dev = np.abs(est.bloch - exact)
    if np.any(dev > bound):
        k = int(np.argmax(dev - bound))
        return f"component {k}: |{est.bloch[k]:.5f} - {exact[k]:.5f}| > {bound[k]:.2e}"
    return None


CHECKS: dict[str, Callable] = {
    "embed_roundtrip": check_roundtrip,
    "generator_consistency": check_generator_consistency,
    "conjugate_spectrum": check_conjugate_spectrum,
    "pythagorean_split": check_pythagoras,
    "three_term_sum": check_three_terms,
    "skew_sandwich": check_skew_sandwich,
    "radial_identity": check_radial_identity,
    "closed_rk4_expm": check_triple_agreement,
    "pseudo_hermitian": check_pseudo_hermitian,
    "unravelling": check_unravelling,
}


# ---------------------------------------------------------------------------
# Orchestration


def case_generator(seed: int, index: int) -> ModelGenerator:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    return ModelGenerator(
        n=int(rng.integers(2, 4)),
        hamiltonian_scale=float(rng.uniform(0.2, 2.0)),
        lindblad_scale=float(rng.uniform(0.1, 1.0)),
        n_lindblads=int(rng.integers(1, 3)),
        hermitian_lindblads=bool(rng.random() < 0.3),
        seed=int(rng.integers(2**31)),
    )


def _config(mg: ModelGenerator) -> dict:
    return {
        "n": mg.n,
        "n_lindblads": mg.n_lindblads,
        "hermitian_lindblads": mg.hermitian_lindblads,
        "hamiltonian_scale": mg.hamiltonian_scale,
        "lindblad_scale": mg.lindblad_scale,
        "seed": mg.seed,
    }


def run_case(seed: int, index: int, corrupt: Callable[[BlochGenerator], BlochGenerator] | None = None) -> dict:
    """Outcome of every check on case ``index``: ``{name: None | message}``; skipped checks are absent."""
    mg = case_generator(seed, index)
    model = random_model(mg)
    gen = bloch_generator(model)
    if corrupt is not None:
        gen = corrupt(gen)
    rng = np.random.default_rng(mg.seed + 1)
    rho = random_state(rng, model.n)
    out = {}
    for name, check in CHECKS.items():
        if name == "unravelling" and index % MC_STRIDE:
            continue
        try:
            out[name] = check(model, gen, rho, rng)
        except Exception as exc:  # a raised error is a failed check, not a crashed suite
            out[name] = f"{type(exc).__name__}: {exc}"
    return out


def corrupt_lambda(delta: float = 1e-3) -> Callable[[BlochGenerator], BlochGenerator]:
    """Fault-injection hook: perturb ``Lambda[0, 0]`` by ``delta``."""

    def hook(gen: BlochGenerator) -> BlochGenerator:
        lam = gen.Lambda.copy()
        lam[0, 0] += delta
        full = gen.full.copy()
        full[1:, 1:] = lam
        return BlochGenerator(Lambda=lam, b=gen.b, full=full, n=gen.n)

    return hook


def run_property_suite(
    seed: int = 0,
    n_cases: int = 1000,
    workers: int = 1,
    corrupt: Callable[[BlochGenerator], BlochGenerator] | None = None,
) -> PropertyReport:
    if isinstance(n_cases, bool) or not isinstance(n_cases, (int, np.integer)) or n_cases < 1:
        raise ValidationError(f"cases: need at least one case, got {n_cases!r}")
    indices = range(int(n_cases))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda i: run_case(seed, i, corrupt), indices))
    else:
        outcomes = [run_case(seed, i, corrupt) for i in indices]
    checks = {name: CheckResult(name) for name in CHECKS}
    for i, outcome in enumerate(outcomes):
        for name, message in outcome.items():
            res = checks[name]
            res.runs += 1
            if message is not None:
                res.failures.append(Counterexample(case=i, config=_config(case_generator(seed, i)), detail=message))
    return PropertyReport(seed=int(seed), n_cases=int(n_cases), checks=checks)
