"""Carathéodory–Fejér style interpolation for free polynomials on matrix convex domains.

Free-semigroup polynomials with matrix coefficients, their evaluation on
matrix tuples, truncated Fock-space shifts, Λ-nilpotent tuples in concrete
matrix convex domains, and lower bounds for the interpolation criterion
checked against the classical one-variable Toeplitz oracle.
"""

from .cfp import (
    NormCertificate,
    OptimizerConfig,
    Pencil,
    Verdict,
    circled_lmi_sweep,
    classical_problem,
    feasibility,
    lmi_check,
    nilpotent_norm,
    phi_transform,
    schur_matrix,
    toeplitz_norm,
)
from .domains import DomainSpec, mixedball, polydisc, rowball
from .fock import coeff_decay_check, coeff_extract, creation_truncated, lambda_shift
from .freewords import InitialSegment, Word, ball_segment, concat, parse_word, validate_initial_segment
from .ncpoly import MatPoly, MatTuple, circle_sup, convolve, evaluate, homogeneous_part, word_eval
from .nilpotent import NilpotentSampleConfig, compress, is_lambda_nilpotent, sample_nilpotent

__version__ = "0.1.0"
