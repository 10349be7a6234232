"""Quadratic embeddings of p-spin models found by a genetic algorithm.

The package covers the target and effective energy models, exact spectra and
the spectral fitness, the genetic search with its design-study harness, and
dense closed-system annealing of small registers.
"""
__version__ = "0.1.0"

from ._backend import BACKEND, HAS_NUMBA, resolve_backend
from .anneal import (AnnealConfig, AnnealResult, NumericalError, adiabatic_bound, adiabatic_diagnostics,
                     build_pspin_hamiltonian, build_quadratic_hamiltonian, build_transverse_field, evolve,
                     instantaneous_spectrum)
from .ga import (COMBOS, DesignStudyTable, GaConfig, GeneBounds, Problem, RunRecord, design_study,
                 gaussian_mutation, init_population, one_point_crossover, run_ga, run_many, tournament_select,
                 two_point_crossover)
from .model import (DimensionError, IsingModel, PSpinModel, QuadraticModel, analytic_model, analytic_solution,
                    and_embed_cubic, chromosome_length, ising_energy, penalty_energy, pspin_energy, quad_to_ising,
                    quadratic_energy)
from .spectrum import (DegeneracyGroups, FitnessReport, ResourceLimitError, Spectrum, degeneracy_groups,
                       enumerate_spectrum, fitness, model_spectrum, rms, rms_report)
