"""Semisupervised manifold alignment (SS-MA) of multiple data domains."""

from .alignment import AlignmentModel, AlignmentParams, fit, fit_and_select, project, select_dims, synthesize
from .data import DomainDataset, MultiDomainDataset, assemble_block_diagonal, split_train_test, subsample_labeled
from .eigen import EigenSolution, solve_generalized
from .evaluate import ExperimentConfig, cohen_kappa, confusion_matrix, run_experiment, train_linear
from .synth import Deformation, apply_deformation, make_spiral_pair, toy_dataset

__all__ = [
    "AlignmentModel",
    "AlignmentParams",
    "Deformation",
    "DomainDataset",
    "EigenSolution",
    "ExperimentConfig",
    "MultiDomainDataset",
    "apply_deformation",
    "assemble_block_diagonal",
    "cohen_kappa",
    "confusion_matrix",
    "fit",
    "fit_and_select",
    "make_spiral_pair",
    "project",
    "run_experiment",
    "select_dims",
    "solve_generalized",
    "split_train_test",
    "subsample_labeled",
    "synthesize",
    "toy_dataset",
    "train_linear",
]
