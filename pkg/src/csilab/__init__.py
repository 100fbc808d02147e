"""csilab: a desk-scale lab for uplink-assisted implicit CSI feedback.

Stages, in pipeline order: paired channel synthesis (channel), per-subband
dominant eigenvectors (eigen), bi-directional correlation enhancement (bce),
angular-delay alignment (ifa), the learned quantized codec (codec), metrics,
and the training/experiment/CLI harness on top.
"""

from .bce import enhance_matrix, enhance_subband, extract_reference
from .channel import (EnvironmentSpec, PathSet, generate_pair, los_pathset,
                      make_environments, render_channel, sample_paths)
from .codec import (CsiCodec, Quantizer, pack_codeword, seed_all,
                    tokens_from_complex, unpack_codeword)
from .config import (ChannelPair, SystemConfig, as_cmatrix, default_config,
                     desk_config, load_config, save_config)
from .dataset import (load_checkpoint, load_dataset, save_checkpoint,
                      save_dataset)
from .eigen import dominant_eigenpair, dominant_eigenspace, eigenvector_matrix
from .errors import (BenchmarkAmbiguous, ConstantInput, CorruptRecord,
                     CsilabError, DegenerateProjection, DimensionMismatch,
                     EmptyInput, NonFiniteLoss, RangeViolation,
                     VersionMismatch, ZeroChannel, ZeroRow)
from .ifa import (align, circular_shift, dft2, inverse_dft2, make_benchmark,
                  make_benchmarks, optimal_shift, restore, row_col_sums)
from .metrics import (CdfSummary, cdf, decile_dominates, nmse_db, pearson,
                      pearson_mag, sgcs, sgcs_batch)
from .pipeline import (Batch, PipelineFlags, Sample, bs_decode_pipeline,
                       codec_loss, collate, evaluate_codec, prepare_sample,
                       prepare_users, restore_tokens, ue_encode_pipeline)
from .training import train_codec

__version__ = "0.1.0"
