"""Signed relations from repeated interactions via a hypergeometric null model."""

from .graph import (
    InteractionGraph,
    NodeAttributes,
    RelationLabels,
    degrees,
    ingest_interactions,
    load_attributes,
    load_relations,
    make_relations,
    read_edge_list,
    write_edge_list,
)
from .hype import (
    DyadMarginals,
    PossibilityMatrix,
    all_marginals,
    build_possibility_matrix,
    dyad_marginals,
    hypergeom_tails,
)
from .phi import DEFAULT_COEFFICIENTS, PhiCoefficients, SignedNetwork, build_signed_network, phi_score
from .models import FitResult, FitSpec, TrainingSet, assemble_training_set, fit, modularity_score, predict
from .evaluation import EvalReport, SplitPolicy, classification_metrics, compare_methods, evaluate, regression_metrics, split
from .social import HomophilyReport, TriadReport, binomial_upper_tail, homophily, triad_importance
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_COEFFICIENTS",
    "DyadMarginals",
    "EvalReport",
    "FitResult",
    "FitSpec",
    "HomophilyReport",
    "InteractionGraph",
    "NodeAttributes",
    "PhiCoefficients",
    "PossibilityMatrix",
    "RelationLabels",
    "SignedNetwork",
    "SplitPolicy",
    "SynthConfig",
    "TrainingSet",
    "TriadReport",
    "all_marginals",
    "assemble_training_set",
    "binomial_upper_tail",
    "build_possibility_matrix",
    "build_signed_network",
    "classification_metrics",
    "compare_methods",
    "degrees",
    "dyad_marginals",
    "evaluate",
    "fit",
    "generate",
    "homophily",
    "hypergeom_tails",
    "ingest_interactions",
    "load_attributes",
    "load_relations",
    "make_relations",
    "modularity_score",
    "phi_score",
    "predict",
    "read_edge_list",
    "regression_metrics",
    "split",
    "triad_importance",
    "write_edge_list",
]
