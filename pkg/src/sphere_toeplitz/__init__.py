"""Toeplitz determinants, Moser-Trudinger type inequalities and the spherical ensemble on S^2."""

__version__ = "0.1.0"

from .geometry import MobiusMap, SpherePoint, StereoCoord, lift_array, project_array
from .quadrature import QuadratureRule, build_quadrature, integrate, integrate_ambient
from .functions import (
    TestFunction,
    constant,
    dilation,
    harmonic1,
    make_test_function,
    mobius,
    radial_bump,
    random_fourier,
    random_radial,
    saturating_potential,
    standard_battery,
)
from .energy import dirichlet_energy, energy_E, j_functional, mean_value
from .toeplitz import GramMatrix, assemble_gram, bergman, kernel, logdet_L, toeplitz_matrix
from .inequalities import SlackReport, check_det_bound, check_mgf_bound, check_moser, check_onofri, fluctuation_mgf
from .dpp import PointConfiguration, chernoff_experiment, mc_linear_statistic, sample_batch
from .envelope import RadialFunction, critical_point_solver, geodesic_radial, project_envelope
from .lattice import LatticeCount, count_lattice_points, minkowski_check, volume_identity_check
