"""Orthonormal Hermitian operator bases and Bloch-vector coordinates.

A density matrix on C^n is written as

    rho = sigma_0 / sqrt(n) + sum_j r_j sigma_j,    r_j = tr(rho sigma_j),

with ``sigma_0 = 1/sqrt(n)`` and ``sigma_1 .. sigma_{n^2-1}`` trace free and
orthonormal for the Hilbert-Schmidt product.  Pure states then sit on the
sphere ``|r|^2 = 1 - 1/n``.

The trace-free elements are generalised Gell-Mann matrices scaled to unit
norm, ordered symmetric off-diagonal, antisymmetric off-diagonal, then
diagonal, pairs ``(h, k)`` row-major.  For ``n = 2`` this is exactly
``(pauli_x, pauli_y, pauli_z) / sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionOutOfRange, ImaginaryResidue, LengthMismatch, TraceViolation, ValidationError
from .linalg import as_hermitian

MIN_DIM = 2
MAX_DIM = 8
TRACE_TOL = 1e-10
RADIUS_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Immutable orthonormal basis; ``sigmas[0]`` is the scaled identity."""

    n: int
    sigmas: np.ndarray = field(repr=False)
    labels: tuple[str, ...] = field(repr=False)

    def __post_init__(self):
        self.sigmas.setflags(write=False)

    @property
    def dim(self) -> int:
        """Number of Bloch coordinates, ``n^2 - 1``."""
        return self.n * self.n - 1

    @property
    def radius_squared(self) -> float:
        """Squared radius of the sphere of pure states."""
        return 1.0 - 1.0 / self.n

    def gram(self) -> np.ndarray:
        s = self.sigmas
        return np.einsum("aij,bij->ab", s.conj(), s)


_BASIS_CACHE: dict[int, OperatorBasis] = {}


def make_basis(n: int) -> OperatorBasis:
    """Normalised generalised Gell-Mann basis for ``2 <= n <= 8``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not MIN_DIM <= n <= MAX_DIM:
        raise DimensionOutOfRange(f"Hilbert dimension must be an integer in [{MIN_DIM}, {MAX_DIM}], got {n!r}")
    n = int(n)
    if n in _BASIS_CACHE:
        return _BASIS_CACHE[n]
    mats = [np.eye(n, dtype=complex) / math.sqrt(n)]
    labels = ["I"]
    pairs = [(h, k) for h in range(n) for k in range(h + 1, n)]
    for h, k in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[h, k] = m[k, h] = 1 / math.sqrt(2)
        mats.append(m)
        labels.append(f"S{h}{k}")
    for h, k in pairs:
        m = np.zeros((n, n), dtype=complex)
        m[h, k] = -1j / math.sqrt(2)
        m[k, h] = 1j / math.sqrt(2)
        mats.append(m)
        labels.append(f"A{h}{k}")
    for l in range(1, n):
        diag = np.zeros(n)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / math.sqrt(l * (l + 1))).astype(complex))
        labels.append(f"D{l}")
    basis = OperatorBasis(n=n, sigmas=np.array(mats), labels=tuple(labels))
    _BASIS_CACHE[n] = basis
    return basis


def coordinates(x: np.ndarray, basis: OperatorBasis, *, tol: float = 1e-10) -> np.ndarray:
    """All ``n^2`` real components ``tr(sigma_j x)`` of a Hermitian operator."""
    c = np.einsum("aij,ji->a", basis.sigmas, x)
    scale = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c.imag)) > tol * scale:
        raise ImaginaryResidue(f"operator is not Hermitian: imaginary component {np.max(np.abs(c.imag)):.3e}")
    return c.real.copy()


def from_coordinates(c: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    return np.einsum("a,aij->ij", np.asarray(c, dtype=float), basis.sigmas)


def _check_dim(rho: np.ndarray, basis: OperatorBasis) -> None:
    if rho.shape != (basis.n, basis.n):
        raise ValidationError(f"state has shape {rho.shape}, basis is for n={basis.n}")


def _check_state(rho, basis: OperatorBasis) -> np.ndarray:
    rho = as_hermitian(rho, "rho")
    _check_dim(rho, basis)
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceViolation(f"density matrix has trace {tr.real:.12g}")
    return rho


def embed(rho, basis: OperatorBasis) -> np.ndarray:
    """Bloch vector ``r_j = tr(rho sigma_j)``, ``j = 1 .. n^2-1``."""
    rho = _check_state(rho, basis)
    return coordinates(rho, basis)[1:]


def reconstruct(r, basis: OperatorBasis) -> np.ndarray:
    """Unit-trace Hermitian matrix with Bloch vector ``r``.

    Positivity is not checked; a vector outside the state space gives a
    matrix with negative eigenvalues.
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (basis.dim,):
        raise LengthMismatch(f"Bloch vector must have length {basis.dim}, got shape {r.shape}")
    c = np.concatenate(([1.0 / math.sqrt(basis.n)], r))
    return from_coordinates(c, basis)


def purity_radius(rho, basis: OperatorBasis) -> tuple[float, float]:
    """``(tr(rho^2), |r|^2)``; the two differ by exactly ``1/n``."""
    rho = _check_state(rho, basis)
    purity = float(np.einsum("ij,ji->", rho, rho).real)
    r = coordinates(rho, basis)[1:]
    return purity, float(r @ r)


def check_bloch(r, basis: OperatorBasis) -> np.ndarray:
    """Validate a Bloch vector: right length, finite, inside the outer sphere."""
    r = np.asarray(r, dtype=float)
    if r.shape != (basis.dim,):
        raise LengthMismatch(f"Bloch vector must have length {basis.dim}, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValidationError("Bloch vector has non-finite entries")
    if r @ r > basis.radius_squared + RADIUS_TOL:
        raise ValidationError(f"|r|^2 = {r @ r:.12g} exceeds the pure-state radius^2 {basis.radius_squared:.12g}")
    return r


def pure_state(psi) -> np.ndarray:
    """Projector onto the normalised ray of ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
