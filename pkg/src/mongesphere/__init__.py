"""Distances between finite-dimensional quantum states via sphere transport.

Standard metrics (trace, Hilbert-Schmidt, Bures, Fubini-Study), the
Monge-Kantorovich distance between Husimi densities on the sphere (closed
forms plus an exact discrete transport solver), the discrete stellar-zero
distance for pure states, Wehrl-entropy localization, and degeneracy
classification of density-matrix spectra.
"""

from .errors import MongesphereError, PathRefusal, SolverError, ValidationError
from .husimi import (HusimiField, coherent_amplitudes, husimi, mean_wehrl,
                     wehrl_entropy)
from .monge_analytic import (WPolynomial, build_w_polynomial,
                             coherent_pair_distance, coherent_to_star,
                             eigenstate_distance, eigenstate_gap, monge_bloch,
                             monge_prop6, monge_symmetric, pole_distance,
                             prop2_upper_bound, salvemini, zero_state_to_star)
from .ot_numeric import (DiscreteMeasure, MongeBracket, TransportPlan,
                         discretize, monge_numeric, rotation_invariance_check,
                         solve_transport)
from .paths import MongeResult, monge_auto
from .qstate import (DensityMatrix, PureState, bures_distance, fubini_study,
                     hs_distance, kicked_step, maximally_mixed, named_state,
                     trace_distance)
from .sphere import SphereGrid, SpherePoint, build_grid, default_grid, \
    geodesic, meridian_cdf
from .stellar import (StellarRoots, cross_basis_distance, random_pair_scaling,
                      random_state_distance_stats, simplified_monge,
                      stellar_roots)
from .topology import (SpectrumType, classify_spectrum, partition_census,
                       stratum_dimension, stratum_table)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
