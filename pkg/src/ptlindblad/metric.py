"""Pseudo-Hermitian operators and their metric operators (finite dimensions).

An operator ``F`` is pseudo-Hermitian with respect to a positive metric
``g`` when ``F^+ = g^-1 F g``.  Factorising ``g = u u^+`` with the
principal square root ``u = sqrt(g)`` gives the Hermitian counterpart
``h = u^-1 F u`` and maps the inner product ``<psi|g|phi>`` onto the
standard one, ``<u^+ psi|u^+ phi>``.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import NotPseudoHermitian, SingularMetric, ValidationError
from .linalg import as_matrix, dag, eigh_jacobi, hermitian_deviation, hermitian_sqrt, max_norm

METRIC_RTOL = 1e-12


class Kind(str, Enum):
    HERMITIAN = "hermitian"
    PT_SYMMETRIC = "pt"


def param_count(n: int, kind: Kind | str) -> int:
    """Real parameters of an ``n``-level Hamiltonian: ``n^2`` or ``n(2n - 1)``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    kind = Kind(kind)
    return n * n if kind is Kind.HERMITIAN else n * (2 * n - 1)


def check_metric(g) -> np.ndarray:
    """Validate a metric operator: Hermitian and positive definite."""
    g = as_matrix(g, "metric")
    if hermitian_deviation(g) > METRIC_RTOL:
        raise SingularMetric("metric is not Hermitian")
    w, _ = eigh_jacobi(g)
    if not w[0] > METRIC_RTOL * w[-1]:
        raise SingularMetric(f"metric is not positive definite (eigenvalues {w[0]:.3e} .. {w[-1]:.3e})")
    return g


def metric_condition(g) -> float:
    w, _ = eigh_jacobi(check_metric(g))
    return float(w[-1] / w[0])


def pseudo_hermitian_residual(f, g) -> float:
    """``max|F^+ - g^-1 F g| / max|F|``."""
    f = as_matrix(f, "F")
    g = check_metric(g)
    if f.shape != g.shape:
        raise ValidationError(f"F has shape {f.shape}, metric has shape {g.shape}")
    scale = max_norm(f)
    if scale == 0.0:
        return 0.0
    return max_norm(dag(f) - np.linalg.solve(g, f @ g)) / scale


def is_pseudo_hermitian(f, g, tol: float = 1e-10) -> bool:
    return pseudo_hermitian_residual(f, g) <= tol


def metric_factor(g) -> np.ndarray:
    """Canonical ``u`` with ``u u^+ = g``: the Hermitian positive square root."""
    return hermitian_sqrt(check_metric(g))


def hermitian_counterpart(h, g, tol: float | None = None) -> np.ndarray:
    """Similarity transform ``u^-1 H u`` of a pseudo-Hermitian ``H`` to Hermitian form.

    ``tol`` defaults to ``1e-10`` widened by the metric condition number,
    since forming ``g^-1 H g`` loses that many digits.
    """
    g = check_metric(g)
    if tol is None:
        tol = max(1e-10, 100 * np.finfo(float).eps * metric_condition(g))
    resid = pseudo_hermitian_residual(h, g)
    if resid > tol:
        raise NotPseudoHermitian(f"H^+ differs from g^-1 H g by {resid:.3e} (relative)")
    u = metric_factor(g)
    out = np.linalg.solve(u, as_matrix(h, "H") @ u)
    return 0.5 * (out + dag(out))


def metric_from_eigenbasis(f, cond_limit: float = 1e12) -> np.ndarray:
    """Metric ``g = V V^+`` built from the right eigenvectors of ``F``.

    Requires a real spectrum and a well-conditioned eigenbasis; at an
    exceptional point no positive metric exists and
    :class:`NotPseudoHermitian` is raised.
    """
    f = as_matrix(f, "F")
    w, v = np.linalg.eig(f)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w.imag)) > 1e-10 * scale:
        raise NotPseudoHermitian("spectrum is not real")
    if np.linalg.cond(v) > cond_limit:
        raise NotPseudoHermitian("eigenbasis is (nearly) defective")
    g = v @ dag(v)
    return 0.5 * (g + dag(g))
