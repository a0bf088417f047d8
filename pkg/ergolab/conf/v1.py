# -*- coding: utf-8 -*-
# Licensed under a 3-clause BSD style license - see LICENSE.rst
#
# ergolab shared numerical defaults, version 1.
#
# All values are module-level constants; experiment configs override the
# model and experiment parameters, never the tolerances.

# -- Measures -----------------------------------------------------------------

# Probability vectors must sum to one within this tolerance.
PROB_TOL = 1e-12

# Total variation is reported as sum |p - q|, so it is capped at 2.
TV_MAX = 2.0

# Largest combined atom count handed to the bounded-Lipschitz LP.
BL_ATOM_CAP = 2000

# Accepted gap between the primal and the reconstructed dual LP objective.
BL_DUALITY_GAP = 1e-9

# -- Finite chains ------------------------------------------------------------

# Rows of a transition matrix must sum to one within this tolerance.
ROW_TOL = 1e-12

# Residual ||lambda P - lambda||_1 accepted for a stationary vector.
STATIONARY_TOL = 1e-10

# Path laws must sum to one within this tolerance.
PATH_LAW_TOL = 1e-10

# Largest number of symbol strings enumerated for one path law.
PATH_ENUMERATION_CAP = 200000

# Largest materialized product chain.
PRODUCT_STATE_CAP = 4096

# Window length used for the future sigma-field and the convergence
# threshold of the k -> infinity heuristic.
K_MAX = 10
K_CONVERGENCE = 1e-6

# -- Conditional chains and filters -------------------------------------------

# Conditional kernels must be row-stochastic within this tolerance.
CONDITIONAL_ROW_TOL = 1e-10

# Fraction of the observation window kept away from its right end.
WINDOW_MARGIN_FRACTION = 0.25

# Largest conditional TV at the last lag still counted as decay, and the
# change accepted when the observation window is doubled.
INHERITANCE_TOL = 1e-3
TRUNCATION_TOL = 1e-8

# Brute-force oracle limits.
BRUTE_FORCE_MAX_T = 10
BRUTE_FORCE_MAX_STATES = 8
BRUTE_FORCE_MAX_PATHS = 2000000

# Particle filter.
PARTICLES = 1000
RESAMPLE_THRESHOLD = 0.5

# Atoms per cloud handed to the bounded-Lipschitz LP by stability runs.
BL_SUBSAMPLE = 200

# Pre-registered final/initial ratio for stability curves.
STABILITY_RATIO = 0.1

# -- Couplings ----------------------------------------------------------------

COUPLING_HORIZON = 400
COUPLING_EPSILON = 1e-6

# -- Models -------------------------------------------------------------------

HEAT = {
    'modes': 8,
    'sigma_decay': 1.0,
    'delta': 0.1,
    'obs_points': (0.25, 0.5, 0.75),
    'obs_var': 0.05,
}

NAVIER_STOKES = {
    'k_max': 8,
    'viscosity': 0.5,
    'forced': ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)),
    'amplitude': 1.0,
    'inner_step': 0.01,
    'delta': 0.2,
    'obs_points': ((0.0, 0.0), (1.5707963267948966, 1.5707963267948966)),
    'obs_var': 0.05,
}

SPIN = {
    'length': 32,
    'beta': 0.4,
    'alpha_scale': 0.5,
    'alpha_width': 2.0,
    'base_rate': 1.0,
    'delta': 0.5,
}

DELAY = {
    'a': 2.0,
    'b': 0.5,
    'sigma': 0.5,
    'delay': 1.0,
    'euler_step': 0.01,
    'delta': 1.0,
    'obs_var': 0.1,
    'guard': 1e6,
}
