"""JSON run reports with deterministic, 17-significant-digit numbers."""

from __future__ import annotations

import json
import math

import numpy as np

from . import __version__

TOOL = "multiuntil"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot encode non-finite number {x!r}")
        return "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(report, indent=2):
    """Serialise a report; ``dumps(json.loads(dumps(r))) == dumps(r)``."""
    return _encode(report, indent, 0) + "\n"


def loads(text):
    return json.loads(text)


def new_report(command, model, query_text, canonical, settings):
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "model": model,
        "query": query_text,
        "canonical_query": canonical,
        "settings": settings,
    }


def prob_vector_entry(result, threshold=None):
    entry = {
        "variant": result.variant.value,
        "unsafe": result.variant.value == "original",
        "initial": result.initial,
        "probabilities": [float(p) for p in result.values],
        "error_bound": result.error_bound,
    }
    if threshold is not None:
        entry["initial_verdict"] = bool(threshold.holds(result.initial))
        entry["verdicts"] = [bool(threshold.holds(float(p))) for p in result.values]
    return entry


def estimate_entry(est, threshold=None):
    lo, hi = est.interval
    entry = {
        "p_hat": est.p_hat,
        "successes": est.successes,
        "samples": est.samples,
        "radius": est.radius,
        "interval": [lo, hi],
        "confidence": est.confidence,
        "seed": est.seed,
    }
    if threshold is not None:
        entry["verdict"] = bool(threshold.holds(est.p_hat))
    return entry
