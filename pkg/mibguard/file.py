"""
Versioned JSON model files
"""

import json
import logging
from pathlib import Path
from typing import IO

from .classifiers import MODEL_TYPES
from .errors import ModelError
from .model import TrainedModel, decode_model

log = logging.getLogger(__name__)


def dumps_model(model: TrainedModel) -> str:
    """
    Get the JSON document of a model. Reals are written with full precision,
    so a loaded model predicts exactly like the saved one.
    """
    return json.dumps(model.to_dict(), indent=1) + "\n"


def loads_model(text: str) -> TrainedModel:
    """Parse a model JSON document"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelError("model file must hold a JSON object")
    return decode_model(data, MODEL_TYPES)


def save_model(model: TrainedModel, sink: str | Path | IO[str]):
    """Write a model to a path or an open text stream"""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as file:
            file.write(dumps_model(model))
        log.info("saved %s model to %s", model.kind.value, sink)
    else:
        sink.write(dumps_model(model))


def load_model(source: str | Path | IO[str]) -> TrainedModel:
    """Read a model from a path or an open text stream"""
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as file:
                text = file.read()
        except (OSError, UnicodeDecodeError) as exc:
            raise ModelError(f"cannot read model {source}: {exc}") from exc
    else:
        text = source.read()
    return loads_model(text)
