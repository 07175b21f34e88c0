"""Gene expression programming for symbolic regression, with the carbonate
rock UCS case study (published formula, test set and error metrics)."""

from .dataset import Dataset, DensityMeasurement, RockSample, load_csv, porosity, split, table1
from .evolver import EvolutionConfig, EvolutionResult, TrainingSet, evolve, fitness
from .karva import (
    Chromosome,
    ExprTree,
    FunctionSet,
    Gene,
    decode,
    evaluate_chromosome,
    evaluate_tree,
    tail_length,
    to_infix,
)
from .metrics import MetricsReport, mape, r2_residual, r_squared, rmse
from .modelfile import ModelFile
from .reference import eq2_chromosome, predict_ucs_eq2

__version__ = "0.1.0"
