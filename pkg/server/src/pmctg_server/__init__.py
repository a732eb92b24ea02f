"""HTTP service wrapping pretrained masked-LM and causal-LM checkpoints
behind the JSON endpoints the constrained-generation engine's remote
backends speak."""

from .config import ServerConfig
from .app import create_app

__version__ = "0.1.0"
