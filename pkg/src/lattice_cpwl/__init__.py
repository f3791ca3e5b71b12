"""CPWL approximation on two-dimensional regular lattices.

Box splines, the L2-projection error kernel, the lattice error constant
``C(theta1, theta2)``, numerical projection with rate studies, and exact
ReLU-network forms of CPWL functions.
"""

from .asymptotics import (
    AsymConstants,
    SweepTable,
    abg,
    asym_error_fourier,
    asym_error_spatial,
    error_constant,
    fourier_disk_asym,
    sweep_landscape,
    upper_bound,
)
from .boxspline import BoxSpline, eval_cartesian, fourier, fourier_cartesian
from .errors import DegenerateLattice, InvalidStepsize, QuadratureUnderResolved, SolverDiverged
from .functions import TestFunction, make_function
from .lattice import IndexBox, LatticeSpec, build_grid, lattice_points, preset
from .projection import CoefficientGrid, RateReport, measure_error, project, rate_study
from .relunet import ReluNetwork, build_network, forward, relu_eval_cartesian
from .spectral import a_phi, a_phi_bruteforce, autocorrelation, error_kernel, taylor_dominant

__version__ = "0.1.0"
