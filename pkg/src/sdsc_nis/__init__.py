"""Revealed-preference tests of costly attention on state-dependent stochastic choice data."""

from __future__ import annotations

from .conditions import (
    ConditionReport,
    audit,
    check_niac,
    check_nias,
    check_nis,
    cycle_gain,
    improvability_difference_index,
    improvability_efficiency_index,
    nis_matrices,
)
from .core import (
    DatasetError,
    DecisionProblem,
    PrizeSpec,
    SdscDataset,
    StateSpace,
    TrialRecord,
    aggregate_trials,
    expected_utility,
    make_dataset,
    make_problem,
    validate_dataset,
)
from .inference import bootstrap_nias, joint_test, pairwise_switch_test, pairwise_table
from .io import load_fixture, load_problems, read_trials, save_problems
from .revealed import Experiment, generate_sdsc, indirect_utility, revealed_experiment
from .synth import (
    CapacityModel,
    ElasticModel,
    mutual_information,
    solve_fixed_capacity,
    solve_shannon_elastic,
)

__all__ = [
    "CapacityModel", "ConditionReport", "DatasetError", "DecisionProblem", "ElasticModel",
    "Experiment", "PrizeSpec", "SdscDataset", "StateSpace", "TrialRecord", "aggregate_trials",
    "audit", "bootstrap_nias", "check_niac", "check_nias", "check_nis", "cycle_gain",
    "expected_utility", "generate_sdsc", "improvability_difference_index",
    "improvability_efficiency_index", "indirect_utility", "joint_test", "load_fixture",
    "load_problems", "make_dataset", "make_problem", "mutual_information", "nis_matrices",
    "pairwise_switch_test", "pairwise_table", "read_trials", "revealed_experiment",
    "save_problems", "solve_fixed_capacity", "solve_shannon_elastic", "validate_dataset",
]
