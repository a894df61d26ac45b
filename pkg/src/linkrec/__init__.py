"""Linear item-item models for session-based recommendation.

Trains closed-form similarity and transition models over sparse session
matrices, optionally regularized toward a row-stochastic teacher matrix
distilled from any next-item scorer, and evaluates them with full-ranking
Recall/MRR/NDCG under iterative-revealing and leave-one-out protocols.
"""

from .data import (
    Interaction,
    ItemVocab,
    LogFormat,
    SessionDataset,
    build_session_matrix,
    filter_and_split,
    ingest_sessions,
)
from .errors import (
    ConfigError,
    DataError,
    EmptyDatasetError,
    FormatError,
    LinkrecError,
    NumericalError,
)
from .evaluate import (
    EvalReport,
    evaluate_iterative,
    evaluate_leave_one_out,
    head_tail_partition,
)
from .inference import (
    InferenceVector,
    RankedList,
    build_inference_vector,
    count_inference_flops,
    predict_topn,
)
from .modelio import read_model, write_model
from .partial import DecayParams, PartialMatrices, build_partial_matrices, row_normalize
from .pipeline import fit_model
from .solvers import (
    ItemItemModel,
    SolverConfig,
    SolverInternals,
    extend_sessions,
    solve_constrained_similarity,
    solve_link,
    solve_lis,
    solve_nit,
)
from .teacher import (
    MarkovTeacher,
    TeacherMatrix,
    extract_teacher,
    markov_teacher,
    read_teacher,
    uniform_teacher,
    write_teacher,
)

__version__ = "0.1.0"
