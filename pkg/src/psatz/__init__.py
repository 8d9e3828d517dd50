"""Positivstellensatz certificates: assemble, search numerically, verify exactly."""
from .exactlinalg import RatMatrix, is_psd_exact
from .parse import parse_polynomial, parse_problem
from .ratpoly import Monomial, Polynomial, Problem
from .reduction import Pencil, WitnessShape, assemble, default_shape, slice
from .sdpnum import SolveStatus, degeneracy_probe, rationalize, solve_feasibility
from .verifier import Certificate, GramBlock, Verdict, verify, verify_from_alpha

__all__ = [
    "Certificate",
    "GramBlock",
    "Monomial",
    "Pencil",
    "Polynomial",
    "Problem",
    "RatMatrix",
    "SolveStatus",
    "Verdict",
    "WitnessShape",
    "assemble",
    "default_shape",
    "degeneracy_probe",
    "is_psd_exact",
    "parse_polynomial",
    "parse_problem",
    "rationalize",
    "slice",
    "solve_feasibility",
    "verify",
    "verify_from_alpha",
]
