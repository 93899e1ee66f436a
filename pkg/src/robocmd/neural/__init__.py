from .config import ModelConfig  # noqa: F401
from .model import EmptyTrainSet, NaNLoss, Seq2SeqModel, bilinear_attention  # noqa: F401
from .train import TrainReport, train, validation_exact_match  # noqa: F401
from .beam import BeamHypothesis, decode_beam, greedy_decode  # noqa: F401
from .gradcheck import GradientMismatch, gradient_check  # noqa: F401
from .vectors import InconsistentDimension, MalformedLine, load_pretrained_vectors  # noqa: F401
from .checkpoint import load_model, save_model  # noqa: F401
