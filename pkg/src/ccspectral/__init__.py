"""Pseudo-spectral multipliers, H-distribution estimates and compensated compactness experiments."""
from .grid import Field, Grid, GridMismatchError, forward_transform, inverse_transform, lp_norm, pair
from .symbols import (AnisotropicWeight, MultiOrder, Symbol, cutoff_theta, even_odd_split,
                      hoermander_weight, marcinkiewicz_estimate, project_to_P, rho, symbol_from_label)
from .multipliers import (MultiplierOp, anisotropic_norm, apply_multiplier, apply_projected_symbol,
                          fractional_derivative, localisation_op, projected_multiplier, smoothing_op, truncate)
from .profiles import CompactBump, ConstantProfile, GaussianBump
from .sequences import (AliasingError, SequenceFamily, concentration_family, divcurl_pair,
                        oscillation_family, paper_counterexample_family, parabolic_pair, stack_families)
from .extrapolation import Extrapolation, last_value, richardson
from .hdist import (ConstraintViolation, DifferentialConstraint, HDistEstimate, QuadraticForm, TestBank,
                    consistency_check, estimate_hdistribution, localization_residual, pairing, product_bank,
                    strong_consistency_check, wavecone_membership)
from .compcomp import (ExperimentReport, Tolerances, run_compcomp, run_optimal_variant,
                       run_parabolic_application)
from .config import ConfigError, ExperimentConfig, load_config, run_experiment

__version__ = "0.1.0"
