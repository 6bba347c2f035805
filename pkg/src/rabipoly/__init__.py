"""Spectra of a two-level system coupled to one bosonic mode, computed
through a three-term recurrence, its monic orthogonal polynomial
families, and the matching continued fraction.
"""

from .analysis import (
    CapacityReport,
    CompareResult,
    ScanSeries,
    SpacingStats,
    capacity_probe,
    compare_methods,
    scan_F,
    spacing_stats,
)
from .braak import braak_G, braak_spectrum
from .dho import (
    CollapseReport,
    charlier_phi,
    charlier_phi_scaled,
    dho_collapse_check,
    dho_eigenvalue,
    shift_identity_deviation,
)
from .errors import (
    InconsistentWeights,
    MethodUnstable,
    NearPole,
    NoConvergence,
    NoRootInBracket,
    PoleAtInteger,
    RabipolyError,
    TooFewLevels,
)
from .model import (
    TOL_POLE,
    EnergyValue,
    ModelParams,
    MonicRecurrence,
    Parity,
    RabiCoeffs,
    SchweberCoeffs,
    condition45_threshold,
    energy_convert,
    rabi_monic_family,
)
from .ops import (
    QuadratureRule,
    convergent,
    eval_monic,
    eval_monic_vec,
    moments,
    pfd_eval,
    poly_zeros,
    quadrature_weights,
    sturm_count,
)
from .scaled import ScaledValue
from .serialize import parse, serialize
from .solver import (
    EnergyLevel,
    SolverOptions,
    Spectrum,
    WavefunctionCoeffs,
    F_cf,
    F_many,
    detect_baseline_crossings,
    find_root,
    merge_spectra,
    pole_brackets,
    schweber_spectrum,
    solve_spectrum,
    wavefunction,
)

__version__ = "1.0.0"
