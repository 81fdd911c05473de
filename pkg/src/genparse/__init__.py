"""Generative semantic grammar toolkit.

A production-rule grammar whose rule selection conditions on semantic
statements through per-nonterminal hierarchical Dirichlet processes, trained
by collapsed Gibbs sampling, with an exact agenda-based k-best parser guided
by a pluggable knowledge-base prior.
"""

from .ontology import (Belief, Concept, KnowledgeBase, PriorConfig, Relation,
                       is_type_correct, load_knowledge_base, prior_log_weight,
                       set_prior_upper_bound)
from .semantics import (ABSENT, Feature, Statement, StatementSet, Tense,
                        TransformOp, apply_op, feature_path, intersect,
                        partition_cell, preimage, preimage_set)
from .hdp import (CrfState, HdpTree, PosteriorSample, bound_at_root,
                  collapsed_likelihood, gibbs_sweep, init_state, make_tree,
                  path_iterator, predictive_prob, sample_posterior)
from .grammar import (AugmentedRule, Grammar, SyntaxTree, TrainedGrammar,
                      build_hdp_tree, generate, parse_grammar_file,
                      prior_only, rule_log_prob, train)
from .parser import ParseOutput, ParseResult, compute_inner_bounds, parse
from .evaluation import (PrCurve, Prediction, auc_vs_k, score_predictions,
                         synthesize_corpus)

__version__ = "0.1.0"

__all__ = [
    "ABSENT", "AugmentedRule", "Belief", "Concept", "CrfState", "Feature",
    "Grammar", "HdpTree", "KnowledgeBase", "ParseOutput", "ParseResult",
    "PosteriorSample", "PrCurve", "Prediction", "PriorConfig", "Relation",
    "Statement", "StatementSet", "SyntaxTree", "Tense", "TrainedGrammar",
    "TransformOp", "apply_op", "auc_vs_k", "bound_at_root",
    "build_hdp_tree", "collapsed_likelihood", "compute_inner_bounds",
    "feature_path", "generate", "gibbs_sweep", "init_state", "intersect",
    "is_type_correct", "load_knowledge_base", "make_tree", "parse",
    "parse_grammar_file", "partition_cell", "path_iterator", "predictive_prob",
    "preimage", "preimage_set", "prior_log_weight", "prior_only",
    "rule_log_prob", "sample_posterior", "score_predictions",
    "set_prior_upper_bound", "synthesize_corpus", "train",
]
