"""Link-stealing attacks against inductive graph neural networks."""

from ._linksteal import (
    StageError,
    attack_names,
    auc,
    config_text,
    pearson,
    run_defense_sweep,
    run_experiment,
    spearman,
)

__all__ = [
    "StageError",
    "attack_names",
    "auc",
    "config_text",
    "pearson",
    "run_defense_sweep",
    "run_experiment",
    "spearman",
]
