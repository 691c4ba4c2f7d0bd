"""instanton1d: multi-instanton corrections to 1D same-level multi-well spectra.

Library layout
--------------
potential    polynomial potentials, well detection, same-level check
instanton    classical 1-instanton: trajectory, action, zero mode, amplitudes
fluctuation  Gelfand-Yaglom determinant ratio, K0, lambda0 estimate
twolevel     dilute-gas resummation: energies, overlaps, resolvents
oracle       grid diagonalization and quadrature ground truths
pipeline     config-driven orchestration and reports
cli          command-line interface (`instanton1d --help`)
"""

__version__ = "0.1.0"

from .errors import (AmplitudeError, ConfigError, GridTooCoarseError,
                     GridTooNarrowError, Instanton1DError, NegativeModeError,
                     NotMultiWellError, NotSameLevelError, ResolventPoleError,
                     WindowError)
from .potential import (PotentialModel, Well, WellPair, adjacent_pairs,
                        find_wells, same_level_check, symmetric_double_well,
                        triple_well)
from .instanton import (InstantonSolution, action_between, action_quadrature,
                        extract_amplitudes, solve_trajectory, zero_mode)
from .fluctuation import (FluctuationOperator, GYResult, ReferenceOperator,
                          fluctuation_operator, gy_analysis, gy_forward_solve,
                          k0_analytic, k0_numeric, lambda0_estimate,
                          reference_psi0, reference_psi0_numeric,
                          wronskian_drift)
from .twolevel import (TwoLevelSystem, kay_factor, overlap_even, overlap_odd,
                       resolvent_even, resolvent_odd, simplex_term_even,
                       simplex_term_odd, two_level_energies,
                       wavefunction_amplitudes)
from .oracle import (FluctuationSpectrum, GridSpec, SpectralResult,
                     default_grid, diagonalize_fluctuation,
                     diagonalize_schrodinger, endpoint_wavefunction_values,
                     nested_simplex_integral, propagator_2x2)
from .pipeline import AnalysisConfig, analyze, overlap_series, sweep

__all__ = [name for name in dir() if not name.startswith("_")]
