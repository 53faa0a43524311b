from .parser import parse_rules, parse_fact_file
from .facts import FactBase, DeltaSet, normalize_seeds, apply_delta_set
from .engine import evaluate, evaluate_query, stratify
from .transform import TransformOptions, transform
from .propagation import propagate, check_against_oracle
from .model import CohesionModel, ProgramElementFacts, derive_model
from .metrics import lcom1, lcom1_all, lcom1_rules, remap_incremental
from .refactoring import MoveMethod, MoveField, ExistingClass, NewClass, seeds_for, whatif
from .version import __version__
