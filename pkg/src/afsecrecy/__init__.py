"""Secure amplify-and-forward rates in symmetric layered relay networks.

Closed-form optimal relay scaling, brute-force validation, and bounds on
the rate lost when only k of the N relays per layer are used.
"""

from .gaps import BoundId, GapReport, Kind, bound_asymptotic, bound_diamond, bound_two_layer, sweep
from .network import (
    EcgalNetwork,
    LayerGainProducts,
    NetworkError,
    ScalingAssignment,
    check_feasible,
    h_relay_dest,
    h_source_dest,
    h_source_dest_pathsum,
    layer_products,
    receive_power,
)
from .oracle import GridSpec, finite_diff_gradient, grid_search, second_derivative_sign
from .rates import RateResult, evaluate, secrecy_rate, snr_destination, snr_eavesdropper
from .scaling import Case, ScalingSolution, diamond_beta_opt, layered_beta_L_glb, layered_beta_max, optimal_rate, solve

__version__ = "0.1.0"
