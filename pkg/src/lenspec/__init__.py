"""Length-spectrum toolkit for free-group metrics and matrix representations.

Core surfaces:

- :mod:`lenspec.words` - reduced/cyclic words, automorphisms, canonical forms
- :mod:`lenspec.subgroups` - folded subgroup automata and membership
- :mod:`lenspec.metrics` - distance-like functions and translation lengths
- :mod:`lenspec.census` - element/conjugacy censuses and growth rates
- :mod:`lenspec.manhattan` - Manhattan curves, growth gaps, dilations
- :mod:`lenspec.spectral` - joint spectral radii and rigidity-bound formulas
- :mod:`lenspec.cli` - scenario runner (``python -m lenspec ...``)
"""

from .words import (
    Alphabet,
    Automorphism,
    CyclicWord,
    Word,
    abelianize,
    apply_automorphism,
    canonical,
    cyclic_reduce,
    format_word,
    inverse,
    multiply,
    parse_word,
    power,
)
from .subgroups import SubgroupGraph, membership, stallings_build
from .metrics import (
    CombinationMetric,
    ConedOffMetric,
    GeneratingSet,
    LengthBracket,
    MatrixLogNormMetric,
    MetricHandle,
    PulledBackMetric,
    SymmetrizedMatrixLogNormMetric,
    WordMetric,
    coned_off_distance,
    estimate_delta,
    standard_generating_set,
    threshold_generating_set,
    translation_length_bracket,
    translation_length_exact,
)
from .census import (
    AllFilter,
    CommutatorFilter,
    ConjCensus,
    CorrelationFilter,
    ElementCensus,
    GrowthEstimate,
    GrowthResult,
    HomologyClassFilter,
    SubgroupFilter,
    conjugate_count_bound_check,
    correlation_census,
    enumerate_conjugacy,
    enumerate_elements,
    enumerate_pullback_pair,
    enumerate_word_pair,
    growth_rate,
    intersection_number,
    restricted_growth,
)
from .manhattan import BetaReport, CurveSamples, beta, check_bounds, dilation, sample_theta
from .matrices import MatrixSet, Representation, operator_norm, spectral_radius
from .spectral import (
    BoundReport,
    SandwichEstimate,
    bochi_bound,
    domination_profile,
    geometry_bounds,
    joint_translation_length,
    jsr_estimate,
    pinched_rigidity_constants,
    rigidity_bound_anosov,
    rigidity_bound_hyperbolic,
)

__version__ = "0.1.0"
