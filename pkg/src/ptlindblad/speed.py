"""Speeds of state evolution and the information measures that govern them.

Mixed states are measured with the Euclidean norm of the Bloch velocity,
``v^2 = sum_j (dr_j/dt)^2 = tr[(L rho)^2]``, split into the radial
(purity-changing) part ``v_R = |r . dr/dt| / |r|`` and the tangential rest.
Every trace functional is evaluated with matrix products; the Bloch-space
value ``|Lambda r + b|^2`` is computed alongside as an independent check.

Unitary pure-state speeds use the Fubini-Study convention
``v^2 = 4 <v|v> = 4 Var(H)``, whereas the Euclidean speed of the same
motion is ``2 Var(H)``: the two metrics differ by a constant factor 2.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .basis import OperatorBasis, coordinates, make_basis
from .errors import ImaginaryResidue, MaximallyMixed, NotNormalized, NumericalError, ValidationError
from .liouvillian import BlochGenerator, LindbladModel, apply_dissipator, apply_liouvillian, bloch_generator
from .linalg import as_hermitian, comm, dag, hermitian_sqrt

ROUTE_RTOL = 1e-10
IMAG_TOL = 1e-12
NORM_TOL = 1e-12
FUBINI_STUDY_RATIO = 2.0  # aa_speed / Euclidean speed^2 for unitary pure-state motion

_GENERATORS: "weakref.WeakKeyDictionary[LindbladModel, BlochGenerator]" = weakref.WeakKeyDictionary()


def _generator(model: LindbladModel, basis: OperatorBasis | None) -> BlochGenerator:
    if basis is not None and basis is not make_basis(model.n):
        return bloch_generator(model, basis)
    gen = _GENERATORS.get(model)
    if gen is None:
        gen = _GENERATORS[model] = bloch_generator(model)
    return gen


def _tr(a: np.ndarray, b: np.ndarray) -> complex:
    """``tr(a @ b)`` without forming the product."""
    return complex(np.einsum("ij,ji->", a, b))


def _real(z: complex, what: str, scale: float = 1.0) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, scale):
        raise ImaginaryResidue(f"{what} has imaginary part {z.imag:.3e}")
    return float(z.real)


def _rho(rho, n: int | None = None) -> np.ndarray:
    rho = as_hermitian(rho, "rho")
    if n is not None and rho.shape != (n, n):
        raise ValidationError(f"state has shape {rho.shape}, expected ({n}, {n})")
    return rho


# ---------------------------------------------------------------------------
# Open-system speeds


def speed_squared(model: LindbladModel, rho, basis: OperatorBasis | None = None) -> float:
    """``tr[(L rho)^2]``, cross-checked against ``|Lambda r + b|^2``."""
    rho = _rho(rho, model.n)
    lr = apply_liouvillian(model, rho)
    v2 = _real(_tr(lr, lr), "tr[(L rho)^2]")
    if basis is None:
        basis = make_basis(model.n)
    gen = _generator(model, basis)
    rdot = gen.rate(coordinates(rho, basis)[1:])
    v2_bloch = float(rdot @ rdot)
    if abs(v2 - v2_bloch) > ROUTE_RTOL * max(1.0, v2):
        raise NumericalError(f"operator ({v2!r}) and Bloch ({v2_bloch!r}) speeds disagree")
    return max(v2, 0.0)


def speed_decomposition(model: LindbladModel, rho) -> tuple[float, float, float]:
    """Unitary, cross and dissipative contributions to ``v^2``.

    ``2[tr(H^2 rho^2) - tr(H rho H rho)]``, ``-2i tr(rho [D rho, H])`` and
    ``tr[(D rho)^2]``; they sum to :func:`speed_squared`.
    """
    rho = _rho(rho, model.n)
    h = model.H
    rho2 = rho @ rho
    hr = h @ rho
    unitary = 2.0 * (_tr(h @ h, rho2) - _tr(hr, hr))
    drho = apply_dissipator(model, rho)
    cross = -2j * _tr(rho, comm(drho, h))
    diss = _tr(drho, drho)
    scale = abs(unitary) + abs(cross) + abs(diss)
    return (
        _real(unitary, "unitary term", scale),
        _real(cross, "cross term", scale),
        _real(diss, "dissipator term", scale),
    )


def _radius(rho: np.ndarray) -> float:
    n = rho.shape[0]
    dev = rho - np.eye(n) / n
    return math.sqrt(max(_tr(dev, dev).real, 0.0))


def radial_rate(model: LindbladModel, rho) -> float:
    """Signed radial velocity ``r . dr/dt / |r|``; negative while purity falls.

    Returns 0 at the maximally mixed state.
    """
    rho = _rho(rho, model.n)
    rad = _radius(rho)
    if rad <= 1e-12:
        return 0.0
    return _tr(rho, apply_liouvillian(model, rho)).real / rad


def tangential_speed(model: LindbladModel, rho) -> float:
    """Norm of the velocity component orthogonal to ``r`` (purity-preserving part)."""
    rho = _rho(rho, model.n)
    lr = apply_liouvillian(model, rho)
    dev = rho - np.eye(model.n) / model.n
    rad2 = _tr(dev, dev).real
    if rad2 > 1e-24:
        lr = lr - (_tr(rho, lr).real / rad2) * dev
    return math.sqrt(max(_tr(lr, lr).real, 0.0))


def radial_speed(model: LindbladModel, rho, basis: OperatorBasis | None = None) -> float:
    """``|tr(rho L rho)| / sqrt(tr[(rho - 1/n)^2])``, 0 at ``rho = 1/n``."""
    return abs(radial_rate(model, rho))


def modified_skew(x, rho) -> float:
    """``tr(X^+ X rho^2) - tr(X rho X^+ rho)``.

    Equals the variance of ``X`` on pure states and is nonnegative for
    Hermitian ``X``; for non-normal ``X`` it can be negative.
    """
    rho = _rho(rho)
    x = np.asarray(x, dtype=complex)
    xd = dag(x)
    a = _tr(xd @ x, rho @ rho)
    b = _tr(x @ rho, xd @ rho)
    return _real(a - b, "modified skew information", abs(a) + abs(b))


def radial_speed_identity_check(model: LindbladModel, rho, basis: OperatorBasis | None = None) -> tuple[float, float]:
    """Both sides of ``v_R = |sum_k S(L_k)| / sqrt(tr[(rho - 1/n)^2])``.

    The signed form underneath is ``r . dr/dt = -sum_k S(L_k)``, see
    :func:`radial_rate`.
    """
    rho = _rho(rho, model.n)
    rad = _radius(rho)
    if rad <= 1e-12:
        raise MaximallyMixed("identity is undefined at the maximally mixed state")
    lhs = radial_speed(model, rho, basis)
    rhs = abs(sum(modified_skew(l, rho) for l in model.lindblads)) / rad
    return lhs, rhs


# ---------------------------------------------------------------------------
# Unitary speeds


def variance(h, rho) -> float:
    """``tr(H^2 rho) - tr(H rho)^2``."""
    h = as_hermitian(h, "H")
    rho = _rho(rho, h.shape[0])
    return _real(_tr(h @ h, rho) - _tr(h, rho) ** 2, "variance")


def wy_skew(h, rho) -> float:
    """Wigner-Yanase skew information ``tr(H^2 rho) - tr(H sqrt(rho) H sqrt(rho))``."""
    h = as_hermitian(h, "H")
    rho = _rho(rho, h.shape[0])
    xi = hermitian_sqrt(rho)
    hx = h @ xi
    a = _tr(h @ h, rho)
    return _real(a - _tr(hx, hx), "skew information", abs(a))


def unitary_speed_sqrt_embedding(h, rho) -> float:
    """Squared Hilbert-Schmidt speed of ``sqrt(rho)`` under ``H``: twice the skew information."""
    return 2.0 * wy_skew(h, rho)


def _ket(h, psi) -> tuple[np.ndarray, np.ndarray]:
    h = as_hermitian(h, "H")
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (h.shape[0],):
        raise ValidationError(f"state vector has shape {psi.shape}, H is {h.shape}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise NotNormalized(f"|psi| = {np.linalg.norm(psi)!r}")
    return h, psi


def sk_velocity(h, psi) -> np.ndarray:
    """Schrodinger-Kibble tangent ``-i (H - <H>) psi``, orthogonal to ``psi``."""
    h, psi = _ket(h, psi)
    hpsi = h @ psi
    energy = np.vdot(psi, hpsi).real
    return -1j * (hpsi - energy * psi)


def energy_variance(h, psi) -> float:
    """``<H^2> - <H>^2`` of a unit ket."""
    h, psi = _ket(h, psi)
    hpsi = h @ psi
    mean = np.vdot(psi, hpsi).real
    return max(float(np.vdot(hpsi, hpsi).real) - mean * mean, 0.0)


def aa_speed(h, psi) -> float:
    """Squared Fubini-Study speed ``4 Var(H)`` of a pure state (hbar = 1).

    Also forms the horizontal velocity ``|v> = |psi'> - <psi|psi'> |psi>``
    from the plain Schrodinger tangent and checks ``4 <v|v>`` agrees.
    The Euclidean (Bloch) speed of the same motion is ``2 Var(H)``, smaller
    by :data:`FUBINI_STUDY_RATIO`.
    """
    h, psi = _ket(h, psi)
    hpsi = h @ psi
    var = energy_variance(h, psi)
    psidot = -1j * hpsi
    v = psidot - np.vdot(psi, psidot) * psi
    vv = float(np.vdot(v, v).real)
    scale = max(1.0, float(np.vdot(hpsi, hpsi).real))
    if abs(4 * vv - 4 * var) > 1e-12 * scale:
        raise NumericalError(f"velocity-vector speed {4 * vv!r} disagrees with 4 Var(H) = {4 * var!r}")
    return 4.0 * var


# ---------------------------------------------------------------------------
# Samples along trajectories


@dataclass(frozen=True)
class SpeedSample:
    t: float
    v: float
    v_R: float
    v_T: float
    purity: float
    r: tuple[float, ...]
    decomposition: tuple[float, float, float]
    radial_rate: float


def speed_sample(model: LindbladModel, rho, t: float = 0.0, basis: OperatorBasis | None = None) -> SpeedSample:
    rho = _rho(rho, model.n)
    basis = basis or make_basis(model.n)
    v2 = speed_squared(model, rho, basis)
    rate = radial_rate(model, rho)
    return SpeedSample(
        t=float(t),
        v=math.sqrt(v2),
        v_R=abs(rate),
        v_T=tangential_speed(model, rho),
        purity=_tr(rho, rho).real,
        r=tuple(coordinates(rho, basis)[1:]),
        decomposition=speed_decomposition(model, rho),
        radial_rate=rate,
    )


@dataclass(frozen=True, eq=False)
class SpeedTable:
    """Columns ``t, v, v_R, v_T, r_1..r_d, purity`` along a trajectory."""

    t: np.ndarray
    v: np.ndarray
    v_R: np.ndarray
    v_T: np.ndarray
    r: np.ndarray
    purity: np.ndarray
    radial_rate: np.ndarray

    def __len__(self) -> int:
        return self.t.size


def trajectory_speeds(model: LindbladModel, times, states, basis: OperatorBasis | None = None) -> SpeedTable:
    """Speeds at every sample of a Bloch trajectory (batched operator route).

    The Bloch-space velocities ``Lambda r + b`` are evaluated as well and
    must agree with the operator traces to ``1e-10`` relative.
    """
    basis = basis or make_basis(model.n)
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    n = model.n
    rhos = np.eye(n) / n + np.einsum("ma,aij->mij", states, basis.sigmas[1:])
    h = model.H
    lr = -1j * (h @ rhos - rhos @ h)
    for l in model.lindblads:
        ld = dag(l)
        k = ld @ l
        lr = lr + l @ rhos @ ld - 0.5 * (k @ rhos + rhos @ k)
    v2 = np.einsum("mij,mji->m", lr, lr).real
    gen = _generator(model, basis)
    rdot = states @ gen.Lambda.T + gen.b
    v2_bloch = np.einsum("ma,ma->m", rdot, rdot)
    if np.any(np.abs(v2 - v2_bloch) > ROUTE_RTOL * np.maximum(1.0, v2)):
        raise NumericalError("operator and Bloch speed routes disagree along the trajectory")
    v2 = np.maximum(v2, 0.0)
    dev = rhos - np.eye(n) / n
    rad2 = np.einsum("mij,mji->m", dev, dev).real
    rad = np.sqrt(np.maximum(rad2, 0.0))
    dot = np.einsum("mij,mji->m", rhos, lr).real
    mixed = rad <= 1e-12
    rate = np.divide(dot, rad, out=np.zeros_like(dot), where=~mixed)
    # tangential part L rho - (r.rdot/|r|^2)(rho - 1/n), formed directly to
    # avoid the cancellation in v^2 - v_R^2 when the motion is nearly radial
    coef = np.divide(dot, rad2, out=np.zeros_like(dot), where=~mixed)
    lt = lr - coef[:, None, None] * dev
    vt2 = np.maximum(np.einsum("mij,mji->m", lt, lt).real, 0.0)
    purity = np.einsum("mij,mji->m", rhos, rhos).real
    return SpeedTable(
        t=times,
        v=np.sqrt(v2),
        v_R=np.abs(rate),
        v_T=np.sqrt(vt2),
        r=states,
        purity=purity,
        radial_rate=rate,
    )
