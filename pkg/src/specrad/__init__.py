"""Spectral radius of heavy-tailed i.i.d. random matrices: sampling, bounds and cycle statistics."""

from .dist import EntryDistribution, moment, normalize_to_unit_second_moment, sample
from .ensemble import MatrixSample, load, sample_matrix, save
from .errors import (
    BudgetError,
    CapacityError,
    ConfigurationError,
    MatrixFormatError,
    NumericalError,
    SpecradError,
    UnsupportedError,
)
from .spectral import (
    eigenvalues,
    markov_tail_bound,
    power_norm_bound,
    radius_bounds,
    spectral_radius,
    trace_moment_bound,
)

__version__ = "0.1.0"
