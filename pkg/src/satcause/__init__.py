"""Causal-effect analysis of clause features in CDCL SAT solvers.

Learn a causal graph from clause snapshots under domain constraints,
identify effects through backdoor adjustment, estimate them by linear
regression, and check them with refutation tests.
"""

from .causal import (
    BackdoorSet,
    EffectEstimate,
    LinearModel,
    RefutationResult,
    estimate_effect,
    find_backdoor_set,
    fit_ols,
    refute,
    refute_all,
    stratified_estimand,
)
from .dag import Dag, EdgeConstraints, Edit, apply_edit, d_separated, default_sat_constraints, to_dot
from .dataset import SAT_SCHEMA, ColumnSchema, Dataset, filter_rows, kfold_split, load_csv, normalize_standard_score, write_csv
from .fitness import FitReport, evaluate_fit, pearson
from .learn import cv_learn, hill_climb
from .query import CompositeQuery, QuerySpec, parse_query, preset_queries, run_query
from .score import BicScorer, bic_score, local_score
from .synth import Scm, generate_trace_like, oracle_ate, overcontrol_scenario, sample

__version__ = "0.1.0"
