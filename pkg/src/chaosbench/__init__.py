"""chaosbench: how far can digital simulation of chaos be trusted, and what
would a noisy analog device buy instead.

Measures reliable-simulation horizons of chaotic flows across a ladder of
arithmetic precisions, Lyapunov spectra and the derived entropy rate,
classical coarse-grained and quantum (measured cat map) dynamical-entropy
curves, and the useful cycle count of an emulated noisy Duffing device.
"""

__version__ = "0.1.0"

from .analog import (DecorrelationResult, HistogramGrid, NoiseSpec, SampleSet,
                     attractor_diameter, batched_section_samples,
                     decorrelation_cycles, distribution_distance, histogram,
                     ou_path, simulate_noisy, stroboscopic_samples,
                     supremacy_ratio)
from .entropy import (EntropyCurve, PartitionSpec, auto_slope_window,
                      average_curves, coarse_entropy_curve, evolve_ensemble,
                      fit_entropy_slope)
from .errors import ConfigError, DivergedError, ResourceLimitError
from .integrate import (HorizonReport, PrecisionConfig, Trajectory,
                        divergence_time, horizon_fit, horizon_in_cycles,
                        integrate, reliable_horizon)
from .lyapunov import LyapunovSpectrum, ks_entropy, lyapunov_spectrum
from .presets import load_preset, preset_names
from .quantum import (DensityMatrix, MeasurementPartition, QuantumModel,
                      cat_map_unitary, classical_cat_entropy_curve,
                      coherent_state, initial_slope_window, maximally_mixed,
                      measured_step, position_block_state, position_state,
                      quantum_entropy_curve, von_neumann_entropy)
from .systems import (DuffingParams, LorenzParams, SystemSpec, duffing_field,
                      duffing_jacobian, forcing_period, lorenz_field,
                      lorenz_jacobian, make_custom, make_duffing,
                      make_harmonic, make_linear_diag, make_lorenz)
