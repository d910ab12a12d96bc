"""Lindblad generators in operator form and in Bloch coordinates.

The same generator is available in two independent forms:

* :func:`apply_liouvillian` acts on a density matrix with matrix products,
* :func:`bloch_generator` evaluates the trace formulas for the real matrix
  ``Lambda`` and vector ``b`` of the affine flow ``dr/dt = Lambda r + b``.

Keeping them separate lets the test-suite check one against the other.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .basis import OperatorBasis, make_basis
from .errors import DimensionMismatch, ImaginaryResidue, ValidationError
from .linalg import Spectrum, as_hermitian, as_matrix, comm, dag, spectrum

IMAG_TOL = 1e-10
GAP_RTOL = 1e-7
ZERO_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian ``H`` (hbar = 1) and Lindblad operators ``L_k`` on C^n."""

    H: np.ndarray
    lindblads: tuple[np.ndarray, ...] = ()
    name: str = ""

    def __post_init__(self):
        h = as_hermitian(self.H, "H")
        ls = tuple(as_matrix(l, f"L[{k}]") for k, l in enumerate(self.lindblads))
        for k, l in enumerate(ls):
            if l.shape != h.shape:
                raise DimensionMismatch(f"L[{k}] has shape {l.shape}, H has shape {h.shape}")
        for m in (h, *ls):
            m.setflags(write=False)
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "lindblads", ls)

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def is_unitary(self) -> bool:
        return all(not np.any(l) for l in self.lindblads)


def _check_rho(model: LindbladModel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.n, model.n):
        raise DimensionMismatch(f"state has shape {rho.shape}, model has n={model.n}")
    return rho


def apply_dissipator(model: LindbladModel, rho) -> np.ndarray:
    """``sum_k L rho L^+ - (L^+ L rho + rho L^+ L) / 2``."""
    rho = _check_rho(model, rho)
    out = np.zeros_like(rho)
    for l in model.lindblads:
        ld = dag(l)
        k = ld @ l
        out += l @ rho @ ld - 0.5 * (k @ rho + rho @ k)
    return out


def apply_liouvillian(model: LindbladModel, rho) -> np.ndarray:
    """Right-hand side of the GKLS equation, ``-i[H, rho] + D(rho)``."""
    rho = _check_rho(model, rho)
    return -1j * comm(model.H, rho) + apply_dissipator(model, rho)


@dataclass(frozen=True, eq=False)
class BlochGenerator:
    """Affine Bloch flow ``dr/dt = Lambda r + b`` and the full real superoperator.

    ``full`` acts on all ``n^2`` coordinates ``(tr(sigma_0 rho), r)``:
    its first row vanishes (trace preservation), ``full[1:, 0] = sqrt(n) b``
    and ``full[1:, 1:] = Lambda``.
    """

    Lambda: np.ndarray
    b: np.ndarray
    full: np.ndarray
    n: int

    def __post_init__(self):
        for m in (self.Lambda, self.b, self.full):
            m.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.Lambda.shape[0]

    def rate(self, r: np.ndarray) -> np.ndarray:
        return self.Lambda @ r + self.b


def _real_part(x: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(x))) if x.size else 0.0)
    resid = float(np.max(np.abs(x.imag))) if x.size else 0.0
    if resid > IMAG_TOL * scale:
        raise ImaginaryResidue(f"{what} has imaginary residue {resid:.3e}")
    return np.ascontiguousarray(x.real)


def bloch_generator(model: LindbladModel, basis: OperatorBasis | None = None) -> BlochGenerator:
    """Evaluate ``Lambda`` and ``b`` from their trace formulas.

    ``Lambda_ij = tr[-i[s_j, s_i] H + sum_k L s_j L^+ s_i
    - 1/2 sum_k (L^+L s_j s_i + L^+L s_i s_j)]`` and
    ``b_i = (1/n) sum_k tr([L, L^+] s_i)``.
    """
    if basis is None:
        basis = make_basis(model.n)
    if basis.n != model.n:
        raise DimensionMismatch(f"basis is for n={basis.n}, model has n={model.n}")
    n = model.n
    s = basis.sigmas[1:]
    # tr(s_j s_i H) indexed [j, i]
    ssh = np.einsum("jab,ibc,ca->ji", s, s, model.H)
    lam = -1j * (ssh.T - ssh)
    b = np.zeros(len(s), dtype=complex)
    for l in model.lindblads:
        ld = dag(l)
        k = ld @ l
        lam += np.einsum("ab,jbc,cd,ida->ij", l, s, ld, s)
        kss = np.einsum("ab,jbc,ica->ji", k, s, s)
        lam -= 0.5 * (kss + kss.T)
        b += np.einsum("ab,iba->i", comm(l, ld), s) / n
    lam = _real_part(lam, "Lambda")
    b = _real_part(b, "b")
    full = np.zeros((n * n, n * n))
    full[1:, 1:] = lam
    full[1:, 0] = math.sqrt(n) * b
    return BlochGenerator(Lambda=lam, b=b, full=full, n=n)


class Phase(str, Enum):
    UNBROKEN = "Unbroken"
    EXCEPTIONAL_POINT = "ExceptionalPoint"
    BROKEN = "Broken"


@dataclass(frozen=True)
class PhaseClassification:
    label: Phase
    eigenvalues: Spectrum
    max_imag: float
    coalescence_gap: float
    unitary: bool = False

    def to_dict(self) -> dict:
        return {
            "label": self.label.value,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues.values],
            "max_imag": self.max_imag,
            "coalescence_gap": self.coalescence_gap,
            "vector_condition": self.eigenvalues.vector_condition,
            "unitary": self.unitary,
        }


def coalescence_gap(values: np.ndarray, zero_tol: float) -> float:
    """Smallest distance between two eigenvalues that are not (numerically) zero."""
    nz = [v for v in values if abs(v) > zero_tol]
    gap = math.inf
    for i in range(len(nz)):
        for j in range(i + 1, len(nz)):
            gap = min(gap, abs(nz[i] - nz[j]))
    return gap


def classify_phase(
    model: LindbladModel,
    basis: OperatorBasis | None = None,
    tol_imag: float = 1e-9,
    tol_cond: float = 1e8,
) -> PhaseClassification:
    """Classify the PT phase from the spectrum of the full superoperator.

    Coalescence is tested first: at an exceptional point rounding may split
    the double eigenvalue into a pair with imaginary parts around
    ``sqrt(eps)``, which must not be read as oscillation.  All thresholds
    are relative to the spectral scale ``max |lambda|``.
    """
    gen = bloch_generator(model, basis)
    spec = spectrum(gen.full)
    scale = spec.scale
    max_imag = spec.max_imag
    gap = coalescence_gap(spec.values, ZERO_RTOL * scale)
    if scale == 0.0:
        label = Phase.BROKEN
    elif gap <= GAP_RTOL * scale or spec.vector_condition > tol_cond:
        label = Phase.EXCEPTIONAL_POINT
    elif max_imag > tol_imag * scale:
        label = Phase.UNBROKEN
    else:
        label = Phase.BROKEN
    return PhaseClassification(
        label=label, eigenvalues=spec, max_imag=max_imag, coalescence_gap=gap, unitary=model.is_unitary
    )


# ---------------------------------------------------------------------------
# JSON model files: {"n": int, "H": [[[re, im], ...], ...], "L": [matrix, ...]}


def _decode_matrix(data, n: int, what: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what}: entries must be [re, im] number pairs") from exc
    if arr.shape != (n, n, 2):
        raise ValidationError(f"{what}: expected shape ({n}, {n}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def model_from_dict(data: dict, name: str = "") -> LindbladModel:
    if not isinstance(data, dict):
        raise ValidationError("model file must contain a JSON object")
    missing = {"n", "H"} - data.keys()
    if missing:
        raise ValidationError(f"model file missing keys: {sorted(missing)}")
    n = data["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    H = _decode_matrix(data["H"], n, "H")
    Ls = data.get("L", [])
    if not isinstance(Ls, list):
        raise ValidationError("L must be a list of matrices")
    lindblads = tuple(_decode_matrix(l, n, f"L[{k}]") for k, l in enumerate(Ls))
    return LindbladModel(H=H, lindblads=lindblads, name=name)


def model_to_dict(model: LindbladModel) -> dict:
    return {"n": model.n, "H": _encode_matrix(model.H), "L": [_encode_matrix(l) for l in model.lindblads]}


def load_model(path) -> LindbladModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(data, name=path.stem)


def save_model(model: LindbladModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)) + "\n", encoding="utf-8")
