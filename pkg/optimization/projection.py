import numpy as np
from scipy.optimize import brentq

from core.errors import ParameterError


def projection_polytope(v, box_hi: float, cap: float) -> np.ndarray:
    """
    Euclidean projection of v onto {a : 0 <= a_i <= box_hi, sum(a) <= cap}.

    The projection is clip(v - tau, 0, box_hi) for the smallest tau >= 0
    that meets the cap. cap may be np.inf (box only).
    """
    if not box_hi > 0:
        raise ParameterError(f"box_hi must be positive, got {box_hi}")
    if not cap > 0:
        raise ParameterError(f"cap must be positive, got {cap}")

    v = np.asarray(v, dtype=float)
    clipped = np.clip(v, 0.0, box_hi)
    if clipped.sum() <= cap:
        return clipped

    def excess(tau: float) -> float:
        return np.clip(v - tau, 0.0, box_hi).sum() - cap

    # excess(0) > 0 and excess(max v) = -cap < 0
    tau = brentq(excess, 0.0, float(v.max()), xtol=1e-14, rtol=4 * np.finfo(float).eps)

    # solve exactly on the active pattern found by the root finder
    projected = np.clip(v - tau, 0.0, box_hi)
    free = (projected > 0.0) & (projected < box_hi)
    if free.any():
        at_top = int(np.sum(projected >= box_hi))
        tau_exact = (v[free].sum() + at_top * box_hi - cap) / free.sum()
        candidate = np.clip(v - tau_exact, 0.0, box_hi)
        if abs(candidate.sum() - cap) <= abs(projected.sum() - cap):
            projected = candidate
    return projected
