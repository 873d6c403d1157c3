"""Brownian-plane hull laws: exact formulas, simulators, and verification.

The package has three layers:

* :mod:`brownian_hulls.formulas`: every closed-form law as a pure function;
* :mod:`brownian_hulls.csbp`, :mod:`brownian_hulls.hulls`,
  :mod:`brownian_hulls.maps`: seeded simulators for the branching process,
  decorated hull volumes, and finite random quadrangulations;
* :mod:`brownian_hulls.harness`: named Monte Carlo suites that certify
  simulator-versus-formula agreement, reachable from the command line via
  ``brownian-hulls verify <suite>``.
"""

from . import formulas
from .csbp import (
    CsbpParams,
    JumpRecord,
    McEstimate,
    SampledPath,
    bm_exit_functional,
    sample_xi,
    sample_xi_by_inversion,
    simulate_csbp,
    simulate_reversed_boundary,
    stable_increments,
)
from .errors import BudgetError, ConfigError, DomainError, HullError, StructureError
from .hulls import HullSample, decorate, forward_pair
from .maps import (
    HullSeries,
    LabeledTree,
    Quadrangulation,
    growth_stats,
    hull_series,
    sample_labeled_tree,
    schaeffer,
)
from .rng import DEFAULT_SEED, substream

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "ConfigError",
    "CsbpParams",
    "DEFAULT_SEED",
    "DomainError",
    "HullError",
    "HullSample",
    "HullSeries",
    "JumpRecord",
    "LabeledTree",
    "McEstimate",
    "Quadrangulation",
    "SampledPath",
    "StructureError",
    "bm_exit_functional",
    "decorate",
    "formulas",
    "forward_pair",
    "growth_stats",
    "hull_series",
    "sample_labeled_tree",
    "sample_xi",
    "sample_xi_by_inversion",
    "schaeffer",
    "simulate_csbp",
    "simulate_reversed_boundary",
    "stable_increments",
    "substream",
]
