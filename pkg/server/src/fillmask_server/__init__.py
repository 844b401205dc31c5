"""HTTP service exposing masked-LM tokenization and top-k fill-mask prediction."""

from .app import create_app
from .backend import DEFAULT_MODEL, MASK_SENTINEL, FillMaskBackend

__version__ = "0.1.0"
