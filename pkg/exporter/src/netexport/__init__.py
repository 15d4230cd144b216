"""Convert dense framework checkpoints to the weight interchange JSON."""

from .convert import (
    AmbiguousActivation,
    ExportError,
    UnsupportedLayer,
    export_checkpoint,
    export_keras,
    export_torch,
)

__version__ = "0.1.0"
