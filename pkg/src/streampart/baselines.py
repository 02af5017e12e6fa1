"""One-step (degree based) streaming baselines."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import default_capacity
from .streams import Stream


@dataclass(frozen=True)
class LwdParams:
    capacity: int | None = None
    weight: str = "linear"


def lwd_run(stream: Stream, k: int, params: LwdParams | None = None) -> np.ndarray:
    """Linear Weighted Deterministic greedy.

    Each arrival goes to ``argmax_i |N(v) & S_i| * (1 - |S_i| / C)`` over
    machines with room, lowest index on ties, and is never moved.
    """
    params = params or LwdParams()
    if params.weight != "linear":
        raise ValueError(f"unsupported LWD weight {params.weight!r}")
    n = len(stream)
    cap = default_capacity(n, k) if params.capacity is None else params.capacity
    if cap * k < n:
        raise ValueError(f"capacity {cap} must be at least ceil(n/k) = {default_capacity(n, k)}")
    return _kernels.lwd_pass(stream.order, stream.indptr, stream.indices, stream.n, k, cap)


def hash_run(stream: Stream, k: int) -> np.ndarray:
    """Control baseline: vertex ``v`` goes to machine ``v mod k``."""
    return np.arange(stream.n, dtype=np.int64) % k
