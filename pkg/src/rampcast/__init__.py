"""Wind-power ramp-event forecasting.

The pipeline: ingest a 10-minute power/temperature series, label ramp
events by the rate of change over a 30-minute look-ahead, justify the
nonlinear model with a largest-Lyapunov-exponent analysis, turn trailing
windows into wavelet band features, optionally prune candidates with
greedy forward selection, and classify upcoming ramps {down, none, up}
with an RBM-pretrained deep network.
"""

from .chaos import (EmbeddingConfig, LyapunovResult, embed, largest_lyapunov,
                    lyapunov_surface, mean_period)
from .config import RunConfig
from .data import (CSV_HEADER, CleanResult, QuarterSplit, RampConfig, RampInjection,
                   RampLabels, SampleRecord, clean_series, find_gaps, label_ramps,
                   load_series, split_quarters, synth_series, write_series_csv)
from .dbn import (CLASS_ORDER, DbnClassifier, ModelBundle, finetune, load_model,
                  loss_and_gradients, pretrain_stack, save_model)
from .errors import (ChaosError, DataShapeError, InputDataError, ModelFormatError,
                     TrainingError)
from .metrics import (MetricsReport, OutcomeCounts, ROC_PAIRS, RocCurve, count_outcomes,
                      outcome_metrics, roc_curve, write_metrics_csv, write_roc_csv)
from .preprocessing import (Dataset, MinMaxNormalizer, build_dataset,
                            build_lag_candidates, write_dataset_csv)
from .rbm import (JointTable, RbmLayer, TrainConfig, cd1_update, energy, hidden_prob,
                  joint_prob_bruteforce, train_rbm, visible_prob)
from .selection import (FeatureSubset, GreedyFeatureSelector, greedy_select,
                        make_dbn_evaluator, pearson, write_selection_csv)
from .wavelet import (BandSet, WaveletBandFeatures, WaveletFilter, band_feature_names,
                      dwt_step, get_filter, idwt_step, mra_bands, qmf_highpass,
                      window_band_features)

__version__ = "0.1.0"
