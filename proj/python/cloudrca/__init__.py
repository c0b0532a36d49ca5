"""Root cause analysis over metrics, logs and topology.

Thin Python layer over the native core. Structured results come back as plain dicts.
"""

import json

from ._cloudrca import (
    Corpus,
    ValidationError,
    decompose,
    detect_period,
    load_corpus,
    mann_kendall_s,
    preprocess,
    standard_benchmark,
)
from . import _cloudrca

__all__ = [
    "Corpus",
    "ValidationError",
    "decompose",
    "detect",
    "detect_period",
    "infer",
    "load_corpus",
    "mann_kendall_s",
    "normalize_config",
    "preprocess",
    "run_pipeline",
    "standard_benchmark",
    "train_khbn",
]


def _dump(obj):
    return None if obj is None else (obj if isinstance(obj, str) else json.dumps(obj))


def run_pipeline(corpus, config=None):
    """Split, detect, featurize, train and evaluate one corpus; returns the evaluation report."""
    report, nodes, seconds = _cloudrca.run_pipeline_json(corpus, _dump(config))
    out = json.loads(report)
    out["node_count"] = nodes
    out["seconds"] = seconds
    return out


def detect(values, split=None, detection=None, step=1):
    """Anomaly report for one series; points at index >= split form the window under test."""
    text = _cloudrca.detect_json(list(values), -1 if split is None else int(split), _dump(detection), step)
    return json.loads(text)[0]


def train_khbn(topology, dataset, config=None):
    """Trains a model from topology and dataset JSON (str or dict); returns the model as a dict."""
    return json.loads(_cloudrca.train_khbn_json(_dump(topology), _dump(dataset), _dump(config)))


def infer(model, bits, confidence_floor=None):
    """Diagnoses one feature vector; with a confidence floor, low-confidence types are flagged novel."""
    return json.loads(_cloudrca.infer_json(_dump(model), [int(b) for b in bits], confidence_floor))


def normalize_config(config):
    """Validates a run configuration and returns it with every default filled in."""
    return json.loads(_cloudrca.validate_config(_dump(config)))
