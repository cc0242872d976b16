"""Charging dynamics of a two-qubit quantum battery in a non-Markovian reservoir."""

__version__ = "0.1.0"

from .model import (AmplitudePair, CrossSign, InitialState, Issue, ParameterError,
                    SystemParams, TimeGrid, check_params, kernel, spectral_density,
                    validate)
from .dynamics import (CrossValidationReport, LaplaceSolution, SolverDivergence,
                       Trajectory, cross_validate, evaluate, solve, solve_laplace,
                       solve_ode_aux, solve_quadrature)
from .observables import (MetricsSeries, QubitState, TwoQubitState, average_power,
                          battery_hamiltonian, battery_state, energy_variation,
                          ergotropy_general, ergotropy_two_level, metrics,
                          passive_state, two_qubit_state)
from .sweep import (CriticalPoint, PhaseDiagram, SweepPoint, derivative_Wmax,
                    find_critical_detuning, maximize_over_time, phase_diagram,
                    scan_delta)
