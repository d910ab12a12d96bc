"""Speed of evolution, PT phases and quantum-jump unravellings of Lindblad dynamics.

The package works with dense ``n x n`` density matrices (``2 <= n <= 8``)
and their real Bloch vectors in the normalised generalised Gell-Mann basis.
"""

from .basis import OperatorBasis, coordinates, embed, make_basis, purity_radius, reconstruct
from .errors import NumericalError, PTLindbladError, ValidationError
from .liouvillian import (
    BlochGenerator,
    LindbladModel,
    Phase,
    PhaseClassification,
    apply_liouvillian,
    bloch_generator,
    classify_phase,
    load_model,
    save_model,
)
from .metric import Kind, hermitian_counterpart, is_pseudo_hermitian, metric_from_eigenbasis, param_count
from .models import (
    NAMED_KETS,
    NAMED_STATES,
    TwoLevelParams,
    dephasing_model,
    dephasing_speed_closed_form,
    oscillation_period,
    pt_closed_form,
    pt_eigenvalues,
    pt_model,
)
from .propagator import Trajectory, evolve_exact, evolve_exact_grid, evolve_rk4
from .speed import (
    SpeedSample,
    SpeedTable,
    aa_speed,
    modified_skew,
    radial_speed,
    radial_speed_identity_check,
    speed_decomposition,
    speed_sample,
    speed_squared,
    tangential_speed,
    trajectory_speeds,
    variance,
    wy_skew,
)
from .unravel import EnsembleEstimate, ensemble_mean, jump_trajectory, shifted_channels

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
