from .base import Backend, ScoreRequest, TokenScores
from .ngram import BOS, EOS, UNK, NGramConfig, ReferenceBackend, train_ngram
from .remote import RemoteBackend, remote_backend
from .uniform import UniformBackend

__all__ = [
    "Backend",
    "ScoreRequest",
    "TokenScores",
    "NGramConfig",
    "ReferenceBackend",
    "train_ngram",
    "RemoteBackend",
    "remote_backend",
    "UniformBackend",
    "BOS",
    "EOS",
    "UNK",
]
