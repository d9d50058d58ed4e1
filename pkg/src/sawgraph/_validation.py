"""Input coercion shared by the estimators and the command line."""

from __future__ import annotations

import os

import numpy as np

from .exceptions import PreconditionViolated
from .graph import Graph, generate
from .io import load_graph


def check_graph(obj) -> Graph:
    """Accept a :class:`Graph`, a family string (``"torus:3,2"``) or a file path."""
    if isinstance(obj, Graph):
        return obj
    if isinstance(obj, (str, os.PathLike)):
        text = os.fspath(obj)
        if os.path.exists(text):
            return load_graph(text)
        return generate(text)
    raise PreconditionViolated(f"cannot interpret {type(obj).__name__} as a graph")


def check_x_values(X) -> np.ndarray:
    """Flatten to a 1-d float array of strictly positive fugacities."""
    x = np.asarray(X, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise PreconditionViolated(f"expected a column of x values, got shape {x.shape}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise PreconditionViolated("x values must be finite and positive")
    return x
