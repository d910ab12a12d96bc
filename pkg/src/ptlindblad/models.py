"""Built-in two-level models with closed-form solutions.

``dephasing``: ``H = g/2 pauli_z``, ``L = sqrt(gamma) pauli_z``; H and L
commute, coherences decay, populations are conserved.

``pt``: ``H = g/2 pauli_x``, ``L = sqrt(gamma) pauli_z``.  The Liouvillian
eigenvalues are ``0, -2 gamma, -gamma +- sqrt(gamma^2 - g^2)`` with an
exceptional point at ``g = gamma``.

Bloch coordinates are in the orthonormal basis ``pauli/sqrt(2)``, so the
pure-state sphere has radius ``1/sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import PAULI_X, PAULI_Z
from .errors import ValidationError
from .liouvillian import LindbladModel

EP_RTOL = 1e-12
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class TwoLevelParams:
    g: float
    gamma: float

    def __post_init__(self):
        g, gamma = float(self.g), float(self.gamma)
        if not (math.isfinite(g) and math.isfinite(gamma)):
            raise ValidationError("g and gamma must be finite")
        if g <= 0:
            raise ValidationError(f"g must be positive, got {g}")
        if gamma < 0:
            raise ValidationError(f"gamma must be non-negative, got {gamma}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "gamma", gamma)

    @property
    def phase(self) -> str:
        """Analytic phase: 'unbroken' (g > gamma), 'ep' or 'broken'."""
        if abs(self.g - self.gamma) <= EP_RTOL * self.g:
            return "ep"
        return "unbroken" if self.g > self.gamma else "broken"


def _params(p) -> TwoLevelParams:
    return p if isinstance(p, TwoLevelParams) else TwoLevelParams(*p)


def dephasing_model(p: TwoLevelParams) -> LindbladModel:
    p = _params(p)
    return LindbladModel(H=0.5 * p.g * PAULI_Z, lindblads=(math.sqrt(p.gamma) * PAULI_Z,), name="dephasing")


def pt_model(p: TwoLevelParams) -> LindbladModel:
    p = _params(p)
    return LindbladModel(H=0.5 * p.g * PAULI_X, lindblads=(math.sqrt(p.gamma) * PAULI_Z,), name="pt")


BUILTIN_MODELS = {"dephasing": dephasing_model, "pt": pt_model}


def pt_eigenvalues(p: TwoLevelParams) -> np.ndarray:
    """Closed-form superoperator spectrum ``0, -2 gamma, -gamma +- sqrt(gamma^2 - g^2)``."""
    p = _params(p)
    disc = (p.gamma - p.g) * (p.gamma + p.g)
    root = np.sqrt(complex(disc))
    return np.array([0.0, -2 * p.gamma, -p.gamma + root, -p.gamma - root], dtype=complex)


def dephasing_speed_closed_form(p: TwoLevelParams, r0, t):
    """Squared speed ``exp(-4 gamma t) (4 gamma^2 + g^2) (r_x(0)^2 + r_y(0)^2)``."""
    p = _params(p)
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (3,):
        raise ValidationError("closed forms are for n = 2 (Bloch vectors of length 3)")
    t = np.asarray(t, dtype=float)
    return np.exp(-4 * p.gamma * t) * (4 * p.gamma**2 + p.g**2) * (r0[0] ** 2 + r0[1] ** 2)


def _damped_kernels(p: TwoLevelParams, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``exp(-gamma t) * (cos wt, sin(wt)/w)`` continued through the EP."""
    g, gam = p.g, p.gamma
    phase = p.phase
    if phase == "ep":
        damp = np.exp(-gam * t)
        return damp, damp * t
    if phase == "unbroken":
        w = math.sqrt((g - gam) * (g + gam))
        damp = np.exp(-gam * t)
        wt = w * t
        sinc = np.where(np.abs(wt) < _SERIES_CUTOFF, t * (1 - wt**2 / 6), np.sin(wt) / w)
        return damp * np.cos(wt), damp * sinc
    k = math.sqrt((gam - g) * (gam + g))
    # exp(-gam t) cosh(kt) and exp(-gam t) sinh(kt)/k without overflow
    up = np.exp((k - gam) * t)
    down = np.exp(-(k + gam) * t)
    return 0.5 * (up + down), 0.5 * (up - down) / k


def pt_closed_form(p: TwoLevelParams, r0, t):
    """Bloch vector of the PT model at time(s) ``t`` from the analytic solution.

    Unbroken phase uses trigonometric kernels with ``w = sqrt(g^2 - gamma^2)``,
    the broken phase hyperbolic ones with ``k = sqrt(gamma^2 - g^2)``, and
    within ``|g - gamma| <= 1e-12 g`` the polynomial limit ``(1, t)``.
    Returns shape ``(3,)`` for scalar ``t`` and ``(len(t), 3)`` otherwise.
    """
    p = _params(p)
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (3,):
        raise ValidationError("closed forms are for n = 2 (Bloch vectors of length 3)")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValidationError("t must be non-negative")
    c, sn = _damped_kernels(p, t)
    rx, ry, rz = r0
    out = np.empty((t.size, 3))
    out[:, 0] = np.exp(-2 * p.gamma * t) * rx
    out[:, 1] = (c - p.gamma * sn) * ry - p.g * sn * rz
    out[:, 2] = p.g * sn * ry + (c + p.gamma * sn) * rz
    return out[0] if scalar else out


def oscillation_period(p: TwoLevelParams) -> float:
    """``pi / sqrt(g^2 - gamma^2)`` in the unbroken phase, ``inf`` otherwise."""
    p = _params(p)
    if p.phase != "unbroken":
        return math.inf
    return math.pi / math.sqrt((p.g - p.gamma) * (p.g + p.gamma))


NAMED_STATES = {
    "up_z": np.array([0.0, 0.0, 1 / math.sqrt(2)]),
    "down_z": np.array([0.0, 0.0, -1 / math.sqrt(2)]),
    "plus_x": np.array([1 / math.sqrt(2), 0.0, 0.0]),
}

NAMED_KETS = {
    "up_z": np.array([1.0, 0.0], dtype=complex),
    "down_z": np.array([0.0, 1.0], dtype=complex),
    "plus_x": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
}
