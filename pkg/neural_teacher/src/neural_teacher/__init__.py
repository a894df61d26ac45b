"""Toy-scale neural next-item model whose single-item-session logits are
exported as a row-stochastic TCH1 teacher file.

Talks to the linear-model toolkit purely through files: it reads the
toolkit's session and vocabulary formats and writes its teacher format.
"""

from .data import load_sessions, load_vocab
from .export import export_teacher, read_teacher_file, write_teacher_file
from .model import ToyNeuralModel
from .train import TrainSettings, train_toy_teacher

__version__ = "0.1.0"
