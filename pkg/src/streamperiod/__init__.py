"""Streaming detection of approximate string periods.

A string of length n has k-period p when its length-(n-p) prefix and suffix
differ in at most k positions.  This package finds every k-period of a byte
stream in two passes (any period length) or one pass (periods up to n/2),
keeping sublinear state via fingerprint sketches and gcd-compressed
candidate sets, and ships the brute-force oracle, structural-bound
validators and corpus generators used to test it.
"""

from .errors import (
    AdjacencyError,
    DegenerateInputError,
    GenerationError,
    IncompatibleSketchError,
    LengthMismatchError,
    PreconditionError,
    RangeError,
    StreamMutationError,
    StreamOrderError,
    StreamPeriodError,
)
from .fingerprint import Fingerprint, FingerprintContext, MODULUS
from .onepass import OnePassScanner, find_k_periods_one_pass
from .oracle import brute_force_k_periods, gcd_bound_validate, hop_sequence
from .report import PeriodReport, SpaceStats
from .twopass import collect_candidates, find_k_periods_two_pass, verify_candidates

__all__ = [
    "AdjacencyError",
    "DegenerateInputError",
    "Fingerprint",
    "FingerprintContext",
    "GenerationError",
    "IncompatibleSketchError",
    "LengthMismatchError",
    "MODULUS",
    "OnePassScanner",
    "PeriodReport",
    "PreconditionError",
    "RangeError",
    "SpaceStats",
    "StreamMutationError",
    "StreamOrderError",
    "StreamPeriodError",
    "brute_force_k_periods",
    "collect_candidates",
    "find_k_periods_one_pass",
    "find_k_periods_two_pass",
    "gcd_bound_validate",
    "hop_sequence",
    "verify_candidates",
]
