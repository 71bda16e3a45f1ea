"""Zero-shot and few-shot named-entity tagging with label-name embeddings.

Tokens are encoded into contextual feature vectors, projected down to the
word-embedding dimension by a trained affine head, and classified by dot
product against the embedding of each candidate label's name.  Because the
label set only enters at scoring time, a head trained on one domain can tag
another domain's labels without ever having seen them.
"""

from .clustering import ClusterAssignment, adjusted_rand, kmeans, v_measure
from .corpus import (
    DomainCorpus,
    Sentence,
    Token,
    collapse_bio,
    parse_conll,
    read_conll,
    sample_few_shot,
    serialize_conll,
    vocabulary,
)
from .embeddings import (
    EmbeddingTable,
    LabelEmbedding,
    embed_label,
    embed_label_set,
    load_embeddings,
    save_embeddings,
)
from .encoder import EncoderConfig, TokenFeatures, encode, load_precomputed_features, window_config
from .errors import (
    ConfigError,
    DataError,
    DegenerateFitError,
    FormatError,
    MissingEmbeddingError,
    ShapeError,
    TaggerError,
    TrainingDivergedError,
)
from .evaluation import (
    DomainSplit,
    EvalReport,
    GridResult,
    PipelineConfig,
    macro_f1,
    run_few_shot,
    run_in_domain,
    run_zero_shot_grid,
    split_corpus,
)
from .head import (
    ProjectionHead,
    TrainConfig,
    TrainResult,
    loss_and_gradient,
    predict,
    project,
    score,
    softmax,
    train,
)
from .similarity import (
    DomainDistribution,
    RegressionFit,
    build_distribution,
    distribution_from_counts,
    fit_regression,
    global_vocabulary,
    kl_divergence,
    transfer_distance,
)

__version__ = "0.1.0"
