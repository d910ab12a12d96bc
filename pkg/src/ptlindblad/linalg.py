"""Dense linear-algebra kernel for small operators.

Matrices are plain ``numpy.ndarray`` objects.  The three algorithms that
carry real numerical weight are written out here rather than delegated:

* cyclic Jacobi diagonalisation of complex Hermitian matrices
  (:func:`eigh_jacobi`, used for square roots of density matrices),
* scaling-and-squaring with a degree-13 Padé approximant
  (:func:`real_expm`),
* Householder-Hessenberg reduction followed by Francis double-shift QR
  (:func:`spectrum`).

numpy is used for array arithmetic, linear solves and the SVDs behind the
eigenvector condition number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian, NotPositive, Overflow, ValidationError

EPS = np.finfo(float).eps

HERMITIAN_RTOL = 1e-12
SQRT_CLAMP = 1e-10
EP_CONDITION = 1e8
MAX_SPECTRUM_DIM = 64


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def hermitian_deviation(a: np.ndarray) -> float:
    """Largest entry of ``a - a^dagger`` relative to the max-norm of ``a``."""
    scale = max_norm(a)
    if scale == 0.0:
        return 0.0
    return max_norm(a - dag(a)) / scale


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return hermitian_deviation(a) <= rtol


def as_hermitian(a, name: str = "matrix", rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    m = as_matrix(a, name)
    dev = hermitian_deviation(m)
    if dev > rtol:
        raise NotHermitian(f"{name} is not Hermitian (relative deviation {dev:.3e})")
    return m


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition


def eigh_jacobi(a, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a complex Hermitian matrix by cyclic Jacobi sweeps.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and
    then applies the classical real Jacobi rotation, so the combined
    unitary zeroes the pivot exactly.

    Returns
    -------
    w : ndarray of float, ascending eigenvalues
    v : ndarray of complex, columns are the matching orthonormal eigenvectors
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    total = np.linalg.norm(a)
    if n == 1 or total == 0.0:
        w = a.diagonal().real.copy()
        return w, v
    a = 0.5 * (a + dag(a))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= EPS * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag <= 1e-3 * EPS * (abs(a[p, p]) + abs(a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = apq / mag
                theta = 0.5 * (a[q, q].real - a[p, p].real) / mag
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = dag(u) @ a[idx, :]
                v[:, idx] = v[:, idx] @ u
                a[p, q] = a[q, p] = 0.0
    else:
        raise NoConvergence("Jacobi sweeps did not converge", values=a.diagonal().real.copy())
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_sqrt(rho) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-10, 0)`` are rounding noise and are clamped to 0;
    anything more negative raises :class:`NotPositive`.  Positive eigenvalues
    within a few ulps of zero are zeroed as well: their square roots
    (``~1e-8``) would otherwise leak into rank-deficient results.
    """
    m = as_hermitian(rho, "rho")
    w, v = eigh_jacobi(m)
    if w[0] < -SQRT_CLAMP:
        raise NotPositive(f"matrix has negative eigenvalue {w[0]:.3e}")
    floor = 4 * m.shape[0] * EPS * max(float(np.max(np.abs(w))), 0.0)
    root = np.sqrt(np.where(w > floor, w, 0.0))
    xi = (v * root) @ dag(v)
    return 0.5 * (xi + dag(xi))


# ---------------------------------------------------------------------------
# Matrix exponential

_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def real_expm(m, t: float = 1.0) -> np.ndarray:
    """``exp(m * t)`` for a real square matrix.

    Scaling and squaring with the [13/13] Padé approximant: the argument is
    halved ``s`` times until its 1-norm is below theta_13, the approximant
    is evaluated there and the result squared ``s`` times.
    """
    a = np.asarray(m)
    if np.iscomplexobj(a):
        raise ValidationError("real_expm needs a real matrix")
    a = a.astype(float) * float(t)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise Overflow("non-finite entries in exponent")
    n = a.shape[0]
    ident = np.eye(n)
    norm1 = float(np.max(np.sum(np.abs(a), axis=0))) if n else 0.0
    if norm1 == 0.0:
        return ident
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    if s > 1000:
        raise Overflow(f"exponent norm {norm1:.3e} is too large")
    a = a / 2.0**s
    b = _PADE13
    try:
        with np.errstate(over="raise", invalid="raise"):
            a2 = a @ a
            a4 = a2 @ a2
            a6 = a4 @ a2
            u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
            v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
            r = np.linalg.solve(v - u, v + u)
            for _ in range(s):
                r = r @ r
    except FloatingPointError as exc:
        raise Overflow(f"matrix exponential overflowed: {exc}") from exc
    if not np.all(np.isfinite(r)):
        raise Overflow("matrix exponential overflowed")
    return r


# ---------------------------------------------------------------------------
# Non-symmetric spectra


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real matrix plus the conditioning of its eigenbasis.

    ``vector_condition`` is the 2-norm condition number of the matrix of unit
    eigenvectors; it is ``inf`` when the matrix is (numerically) defective.
    """

    values: np.ndarray
    vector_condition: float

    @property
    def ep_suspect(self) -> bool:
        return not self.vector_condition <= EP_CONDITION

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    @property
    def max_imag(self) -> float:
        return float(np.max(np.abs(self.values.imag))) if len(self.values) else 0.0


def _house(x: np.ndarray) -> tuple[np.ndarray, float]:
    v = np.array(x, dtype=float)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        return v, 0.0
    alpha = -math.copysign(nrm, v[0])
    v[0] -= alpha
    return v, 2.0 / float(v @ v)


def hessenberg(m) -> np.ndarray:
    """Upper Hessenberg form of a real matrix by Householder similarity."""
    h = np.array(m, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        v, beta = _house(h[k + 1 :, k])
        if beta == 0.0:
            continue
        h[k + 1 :, k:] -= beta * np.outer(v, v @ h[k + 1 :, k:])
        h[:, k + 1 :] -= beta * np.outer(h[:, k + 1 :] @ v, v)
        h[k + 2 :, k] = 0.0
    return h


def _eig2(a: float, b: float, c: float, d: float) -> tuple[complex, complex]:
    p = 0.5 * (a - d)
    disc = p * p + b * c
    if disc >= 0.0:
        z = p + math.copysign(math.sqrt(disc), p)
        if z == 0.0:
            return complex(d), complex(d)
        return complex(d + z), complex(d - b * c / z)
    mid = 0.5 * (a + d)
    im = math.sqrt(-disc)
    return complex(mid, im), complex(mid, -im)


def _francis_step(h: np.ndarray, lo: int, hi: int, s: float, t: float) -> None:
    x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - s * h[lo, lo] + t
    y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - s)
    z = h[lo + 1, lo] * h[lo + 2, lo + 1]
    for k in range(lo, hi - 1):
        v, beta = _house(np.array([x, y, z]))
        if beta != 0.0:
            q = max(lo, k - 1)
            blk = h[k : k + 3, q : hi + 1]
            h[k : k + 3, q : hi + 1] = blk - beta * np.outer(v, v @ blk)
            r = min(k + 3, hi)
            blk = h[lo : r + 1, k : k + 3]
            h[lo : r + 1, k : k + 3] = blk - beta * np.outer(blk @ v, v)
        x = h[k + 1, k]
        y = h[k + 2, k]
        if k < hi - 2:
            z = h[k + 3, k]
    v, beta = _house(np.array([x, y]))
    if beta != 0.0:
        blk = h[hi - 1 : hi + 1, hi - 2 : hi + 1]
        h[hi - 1 : hi + 1, hi - 2 : hi + 1] = blk - beta * np.outer(v, v @ blk)
        blk = h[lo : hi + 1, hi - 1 : hi + 1]
        h[lo : hi + 1, hi - 1 : hi + 1] = blk - beta * np.outer(blk @ v, v)


def eigvals_qr(m, max_iter_per_value: int = 60) -> np.ndarray:
    """All eigenvalues of a real square matrix (Hessenberg + Francis QR)."""
    h = hessenberg(m)
    n = h.shape[0]
    vals = np.zeros(n, dtype=complex)
    anorm = float(np.sum(np.abs(h)))
    hi = n - 1
    its = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = anorm
            if abs(h[lo, lo - 1]) <= EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            vals[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            vals[hi - 1], vals[hi] = _eig2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
            hi -= 2
            its = 0
            continue
        if its >= max_iter_per_value:
            vals[: hi + 1] = np.diag(h)[: hi + 1]
            raise NoConvergence(f"QR iteration stalled on a {hi - lo + 1}x{hi - lo + 1} block", values=vals)
        its += 1
        if its % 10 == 0:
            # exceptional shift to break cycles
            w = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
            s, t = 1.5 * w, w * w
        else:
            s = h[hi - 1, hi - 1] + h[hi, hi]
            t = h[hi - 1, hi - 1] * h[hi, hi] - h[hi - 1, hi] * h[hi, hi - 1]
        _francis_step(h, lo, hi, s, t)
    return vals


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, lam in enumerate(values):
        for g in groups:
            if abs(values[g[0]] - lam) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def eigenvector_condition(m, values: np.ndarray) -> float:
    """Condition number of the unit-eigenvector matrix of ``m``.

    Eigenvectors come from the numerical null space of ``m - lambda I``
    (smallest right singular vectors).  A cluster whose null space is
    smaller than its multiplicity makes the matrix defective: ``inf``.
    """
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    scale = max(float(np.max(np.abs(values))) if n else 0.0, float(np.linalg.norm(a, 2)) if n else 0.0)
    if scale == 0.0:
        return 1.0
    cols = []
    for group in _clusters(values, 1e-10 * scale):
        mult = len(group)
        lam = np.mean(values[group])
        _, sing, vh = np.linalg.svd(a - lam * np.eye(n))
        if sing[n - mult] > math.sqrt(EPS) * scale:
            return math.inf
        cols.extend(vh[n - mult :].conj())
    vecs = np.array(cols).T
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    sing = np.linalg.svd(vecs, compute_uv=False)
    if sing[-1] == 0.0:
        return math.inf
    return float(sing[0] / sing[-1])


def spectrum(m) -> Spectrum:
    """Eigenvalues (with multiplicity) and eigenvector conditioning of a real matrix.

    Values are ordered by decreasing real part, then increasing imaginary
    part, so repeated calls give identical output.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_SPECTRUM_DIM:
        raise ValidationError(f"dimension {a.shape[0]} exceeds {MAX_SPECTRUM_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    vals = eigvals_qr(a)
    order = sorted(range(len(vals)), key=lambda i: (-vals[i].real, vals[i].imag))
    vals = vals[order]
    return Spectrum(values=vals, vector_condition=eigenvector_condition(a, vals))
