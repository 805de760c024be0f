"""Numerical laboratory for the free massive boson on circles and flat cylinders.

Layers, bottom up: opalg (block positive operators, Schur composition, Cayley
transforms), symplectic (positive Lagrangian relations), fock (truncated
Gaussian vectors, norms, the composition cocycle), bargmann (Hermite/quadrature
oracle layer), geom (circles, cylinders, mode spectra, gluing), zeta
(regularized determinants), fqft (amplitudes, composition, traces,
verification), cli (scene files, reports, calculators).
"""

from .opalg import BlockPosOp, CayleyForm, SymMatrix, cayley, cayley_inverse, logdet_pos, schur_compose
from .geom import BordismScene, CircleObject, CylinderMorphism, TheoryConfig, glue, mode_frequencies
from .fock import FockVector, exp_vector, fock_norm_sq, fock_pairing, cocycle_constant
from .zeta import EpsteinZeta1D, LogDet, logdet_circle, logdet_cylinder_dirichlet, logdet_torus
from .fqft import Amplitude, amplitude, compose_amplitudes, trace_amplitude, verify_functoriality

__version__ = "0.1.0"
