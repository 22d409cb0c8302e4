"""Counter-attribute explanations for classifier decisions.

Train a bilinear attribute-embedding classifier next to a general softmax
baseline, push inputs into counter classes with iterative signed-gradient
perturbations, robustify by adversarial training, and explain every class
change through discriminative attributes, attribute-space distances, and
nearest counter-examples.
"""

__version__ = "0.1.0"

from .data import (Dataset, Sample, SplitAssignment, SyntheticSpec,
                   generate_synthetic, load_dataset, save_dataset, split_dataset)
from .embed import (EmbeddingModel, FeatureMap, GeneralClassifier, TrainConfig,
                    accuracy, compatibility, cross_entropy, cross_entropy_grads,
                    effective_class_attributes, predict_attributes, predict_class,
                    predict_class_general, ranking_loss, ranking_loss_grads,
                    train_general, train_sje)
from .exceptions import NumericalError, ValidationError
from .explain import (DistanceSummary, ExplanationRecord, build_explanation,
                      counter_class_gallery, distance_analysis_robust,
                      distance_analysis_standard, eligible_indices,
                      histogram_overlap, select_counter_examples,
                      select_discriminative_adv, select_discriminative_clean,
                      write_records_jsonl)
from .modelio import load_model, save_model
from .perturb import (AttackConfig, AttackSummary, PerturbedSample, attack_dataset,
                      ifgsm, ifgsm_steps, loss_grad_wrt_input)
from .rng import derive_seed, substream
from .robust import (RobustTrainConfig, RobustificationReport, adversarial_train,
                     make_report, robustification_measure, write_sweep_csv)

__all__ = [
    "__version__",
    "ValidationError", "NumericalError",
    "substream", "derive_seed",
    "Sample", "Dataset", "SyntheticSpec", "SplitAssignment",
    "generate_synthetic", "save_dataset", "load_dataset", "split_dataset",
    "FeatureMap", "TrainConfig", "EmbeddingModel", "GeneralClassifier",
    "effective_class_attributes", "compatibility", "predict_attributes",
    "predict_class", "predict_class_general", "ranking_loss", "ranking_loss_grads",
    "cross_entropy", "cross_entropy_grads", "train_sje", "train_general", "accuracy",
    "save_model", "load_model",
    "AttackConfig", "PerturbedSample", "AttackSummary", "loss_grad_wrt_input",
    "ifgsm_steps", "ifgsm", "attack_dataset",
    "RobustTrainConfig", "RobustificationReport", "robustification_measure",
    "make_report", "adversarial_train", "write_sweep_csv",
    "ExplanationRecord", "DistanceSummary", "select_discriminative_clean",
    "select_discriminative_adv", "counter_class_gallery", "select_counter_examples",
    "build_explanation", "eligible_indices", "distance_analysis_standard",
    "distance_analysis_robust", "histogram_overlap", "write_records_jsonl",
]
