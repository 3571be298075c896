"""Photoacoustic tomography simulation and multiscale compressed-sensing reconstruction."""

from .errors import *  # noqa: F401,F403
from .filters import (DEFAULT_BANK, FrequencyBand, TemporalFilterBank, canonical_dual,
                      convolve_spatial, convolve_temporal, frame_bounds,
                      radial_radon_oracle, radon_dual_filter_analytic,
                      spatial_filter_spectrum, temporal_filter_eval,
                      temporal_filter_spectrum)
from .grid import (Grid2D, ScalarField2D, SpectrumField2D, crop_physical, dft2_forward,
                   dft2_inverse, embed_pad)
from .phantom import (BUNDLED_PHANTOM, Feature, PhantomSpec, make_phantom,
                      relative_l2_error, render_image, sparsity_fraction)
from .recon import (FactorEstimates, ReconResult, reconstruct_baseline_l1,
                    reconstruct_landweber, reconstruct_multiscale)
from .sensing import (CSData, MeasurementMatrix, gaussian_matrix, identity_matrix, measure,
                      measure_adjoint, subsampling_matrix)
from .solvers import SolveResult, SolverConfig, estimate_operator_norm, ista, landweber, soft_threshold
from .wave import (DetectorRing, TimeGrid, WaveData, dense_forward_matrix, wave_adjoint,
                   wave_forward)

__version__ = "0.1.0"
