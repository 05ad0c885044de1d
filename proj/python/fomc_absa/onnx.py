"""Model-mode runtimes backed by the onnxruntime Python package.

The encoder graph takes int64 ``input_ids`` and ``attention_mask`` of shape
[batch, seq] and exposes float32 ``hidden_<k>`` outputs of shape
[batch, seq, dim]. The classifier graph takes the same inputs and returns
``logits`` of shape [batch, 3].
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Sequence

import numpy as np

from ._core import ConfigError, Pipeline, PipelineConfig, SENTIMENT_LABELS

POOLED_LAYERS = 4
_HIDDEN = re.compile(r"hidden_(\d+)$")


def _session(path):
    try:
        import onnxruntime as ort
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise ConfigError("the model backend needs the onnxruntime package") from exc
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"model file not found: {path}")
    return ort.InferenceSession(str(path), providers=["CPUExecutionProvider"])


def _pad(batch: Sequence[Sequence[int]], pad_id: int):
    width = max(len(ids) for ids in batch)
    input_ids = np.full((len(batch), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(batch), width), dtype=np.int64)
    for row, ids in enumerate(batch):
        input_ids[row, : len(ids)] = ids
        mask[row, : len(ids)] = 1
    return input_ids, mask


class OnnxEncoder:
    """Callable suitable for ``Pipeline.set_encoder``."""

    def __init__(self, path, pad_id: int = 0):
        self.session = _session(path)
        self.pad_id = pad_id
        layers = {}
        for out in self.session.get_outputs():
            match = _HIDDEN.match(out.name)
            if match:
                layers[int(match.group(1))] = out
        if len(layers) < POOLED_LAYERS:
            raise ConfigError(f"encoder exposes {len(layers)} hidden_<k> outputs, needs {POOLED_LAYERS}")
        self.output_names = [layers[k].name for k in sorted(layers)[-POOLED_LAYERS:]]
        dim = layers[max(layers)].shape[-1]
        self.hidden_size = dim if isinstance(dim, int) else None

    def __call__(self, batch):
        input_ids, mask = _pad(batch, self.pad_id)
        outputs = self.session.run(self.output_names, {"input_ids": input_ids, "attention_mask": mask})
        stacked = np.stack(outputs, axis=1).astype(np.float32, copy=False)  # [batch, layers, seq, dim]
        if self.hidden_size is None:
            self.hidden_size = stacked.shape[-1]
        return [np.ascontiguousarray(stacked[i, :, : len(ids), :]) for i, ids in enumerate(batch)]


class OnnxClassifier:
    """Callable suitable for ``Pipeline.set_classifier``."""

    def __init__(self, path, pad_id: int = 0):
        self.session = _session(path)
        self.pad_id = pad_id

    def __call__(self, batch):
        input_ids, mask = _pad(batch, self.pad_id)
        (logits,) = self.session.run(["logits"], {"input_ids": input_ids, "attention_mask": mask})
        return np.asarray(logits, dtype=np.float64)


def check_labels(path) -> None:
    labels = json.loads(Path(path).read_text()).get("labels")
    if tuple(labels or ()) != SENTIMENT_LABELS:
        raise ConfigError(f"labels sidecar {path} must list {', '.join(SENTIMENT_LABELS)} in that order")


def model_pipeline(config: PipelineConfig, hidden_size: int | None = None) -> Pipeline:
    """A model-mode Pipeline whose encoder and classifier run in onnxruntime."""
    if config.backend != "model":
        raise ConfigError("model_pipeline needs backend 'model'")
    if config.vocab_path is None:
        raise ConfigError("model backend requires vocab_path")
    from ._core import WordPieceTokenizer

    pad_id = WordPieceTokenizer(config.vocab_path).pad_id
    if config.labels_path is not None:
        check_labels(config.labels_path)
    pipeline = Pipeline(config)
    if config.encoder_path is not None:
        encoder = OnnxEncoder(config.encoder_path, pad_id)
        size = hidden_size or encoder.hidden_size
        if size is None:
            raise ConfigError("encoder hidden size is symbolic; pass hidden_size")
        pipeline.set_encoder(encoder, size)
    if config.classifier_path is not None:
        pipeline.set_classifier(OnnxClassifier(config.classifier_path, pad_id))
    return pipeline
