"""Observed-remove sets, their tombstone-free variant and a simulator to compare them.

The two add-wins designs live in :mod:`orsetlab.orset` and
:mod:`orsetlab.opt_orset`; :mod:`orsetlab.legacy` holds two earlier
designs kept as counterexamples. :mod:`orsetlab.sim` runs scenarios over
any of them and :mod:`orsetlab.explore` enumerates small scenarios
exhaustively.
"""

from __future__ import annotations

from .causal import ADD, REMOVE, Dot, History, UpdateEvent, VersionVector
from .errors import (
    ConfigurationError,
    DeliveryContractError,
    EnumerationLimitError,
    InvalidReplicaError,
    InvariantViolation,
    LookupFailure,
    OrsetLabError,
    ScenarioError,
)
from .legacy import CSet, RegisterCart
from .opt_orset import OptORSet
from .orset import ORSet
from .semantics import Update, add_wins_oracle, permutation_equivalence_check
from .sim import RunReport, Scenario, Simulator, run

__version__ = "0.1.0"

__all__ = [
    "ADD",
    "REMOVE",
    "CSet",
    "ConfigurationError",
    "DeliveryContractError",
    "Dot",
    "EnumerationLimitError",
    "History",
    "InvalidReplicaError",
    "InvariantViolation",
    "LookupFailure",
    "ORSet",
    "OptORSet",
    "OrsetLabError",
    "RegisterCart",
    "RunReport",
    "Scenario",
    "ScenarioError",
    "Simulator",
    "Update",
    "UpdateEvent",
    "VersionVector",
    "add_wins_oracle",
    "permutation_equivalence_check",
    "run",
]
