"""Training losses: pairwise margin ranking and binary cross entropy."""

from __future__ import annotations

import numpy as np

from . import autograd as ag
from .autograd import Tensor


def margin_ranking_loss(s1, s2, y: float, m: float):
    """max(0, -y*(s1 - s2) + m) with ranking label y in {-1, +1}.

    Accepts floats (returns float) or Tensors (returns a Tensor for
    backprop). y = -1 means the first item should score lower.
    """
    if m <= 0:
        raise ValueError("margin must be positive")
    if isinstance(s1, Tensor) or isinstance(s2, Tensor):
        s1 = s1 if isinstance(s1, Tensor) else Tensor(s1)
        s2 = s2 if isinstance(s2, Tensor) else Tensor(s2)
        return ag.relu((s1 - s2) * (-y) + m)
    return max(0.0, -y * (s1 - s2) + m)


def bce_with_logits(logit, label: float):
    """Numerically stable binary cross entropy on a raw logit.

    Uses max(z,0) - z*y + log1p(exp(-|z|)); never overflows.
    """
    if isinstance(logit, Tensor):
        z = logit.data
        value = float(np.maximum(z, 0.0) - z * label + np.log1p(np.exp(-np.abs(z))))
        out = ag._make(np.asarray(value), (logit,))
        # d/dz = sigmoid(z) - y
        sig = 1.0 / (1.0 + np.exp(-np.abs(z)))
        sig = np.where(z >= 0, sig, 1.0 - sig)
        out._backward = lambda g: logit._accum(g * (sig - label))
        return out
    z = float(logit)
    return float(np.maximum(z, 0.0) - z * label + np.log1p(np.exp(-np.abs(z))))
