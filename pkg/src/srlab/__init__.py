"""Sparse recovery from samples: discretization, least-squares recovery, best n-term oracles and lower bounds."""

from .analysis import MeasureSpec, Quadrature, build_quadrature, evaluation_grid, mixture_measure, norm_lp
from .classes import ClassSpec, class_membership_check, sample_class, thm83_witness_class
from .dictionaries import (Dictionary, Expansion, FrequencySet, GegenbauerParams, build_frequency_set,
                           gegenbauer_dictionary, gegenbauer_eval, load_dictionary, trig_centered, trig_dictionary)
from .discretization import (DiscretizationReport, PointSet, equispaced_points, estimate_m_required,
                             find_universal_points, random_points, verify_universal_discretization)
from .errors import CapExceededError, DomainError, ParameterError, SizeError, SrlabError
from .experiments import ExperimentConfig, ExperimentReport, emit_report, run_experiment
from .lower_bounds import check_condition_D1, lorentz_vertex_search, nullspace_basis, tau_m_witness
from .oracles import (bp1_approximant, greedy_minimax, kashin_oracle_sigma, oga_approximate, sigma_v,
                      gegenbauer_block_construction)
from .recovery import (SparseApproximant, estimate_rho_ls, ideal_projection_recover, least_p_fit,
                       recover_function, sparse_ls_recover, weighted_least_squares_fit)

__all__ = [name for name in dir() if not name.startswith("_")]
