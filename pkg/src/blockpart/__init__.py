"""Block-wise co-clustering of instances and labels for fast multi-label prediction.

Train-time, the label matrix is co-partitioned into q paired instance/label
clusters by alternating minimization; a logistic router then sends each test
instance to one cluster so that only that cluster's labels are scored.
"""

from .errors import DataFormatError, OptimizationError
from .sparse import (BinaryLabelMatrix, Dataset, SparseMatrix, column_sums,
                     normalize_rows, restrict_columns, take_dataset_rows, take_rows,
                     validate)
from .dataio import (holdout_split, kfold_split, load_dataset, parse_dataset,
                     save_dataset, write_dataset)
from .logistic import LinearModel, TrainConfig, loss_and_grad, predict_class, score, score_rows, train_ova
from .partition import (DEFAULT_LAMBDA_GRID, BpConfig, ObjectiveValue, Partition,
                        export_permuted_matrix, fit_partition, init_instance_clusters,
                        objective, select_instance_clusters, select_label_clusters)
from .pipeline import (BpModel, MultCounter, PredictionResult, predict_bp,
                       predict_naive, train_bp, train_naive, train_with_partition)
from .tuning import LambdaSelection, QSearchResult, search_q, select_lambda
from .metrics import (PropensityParams, label_propensities, precision_at_k,
                      psp_at_k, recall_at_k, speedup)
from .synth import PartitionAgreement, PlantedSpec, generate, partition_agreement
from . import serialize

__version__ = "0.1.0"

__all__ = [
    "BinaryLabelMatrix", "BpConfig", "BpModel", "DataFormatError", "Dataset",
    "DEFAULT_LAMBDA_GRID", "LambdaSelection", "LinearModel", "MultCounter",
    "ObjectiveValue", "OptimizationError", "Partition", "PartitionAgreement",
    "PlantedSpec", "PredictionResult", "PropensityParams", "QSearchResult",
    "SparseMatrix", "TrainConfig", "column_sums", "export_permuted_matrix",
    "fit_partition", "generate", "holdout_split", "init_instance_clusters",
    "kfold_split", "label_propensities", "load_dataset", "loss_and_grad",
    "normalize_rows", "objective", "parse_dataset", "partition_agreement",
    "precision_at_k", "predict_bp", "predict_class", "predict_naive",
    "psp_at_k", "recall_at_k", "restrict_columns", "save_dataset", "score",
    "score_rows", "search_q", "select_instance_clusters", "select_label_clusters",
    "select_lambda", "serialize", "speedup", "take_dataset_rows", "take_rows",
    "train_bp", "train_naive", "train_ova", "train_with_partition", "validate",
    "write_dataset",
]
