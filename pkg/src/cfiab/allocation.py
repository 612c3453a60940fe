"""Bandwidth split between access and backhaul, and the resulting end-to-end rate."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UndefinedSplitError

SCHEMES = ("centralized_fd", "decentralized_fd", "decentralized_hybrid")


@dataclass
class RateSummary:
    """Full-band capacities (bit/s) and the rate at the optimal split."""

    c_a: float
    c_b: float
    eta: float
    end_to_end: float
    diagnostic: Optional[str] = None


def optimal_eta(c_a, c_b):
    """Access share of the band that makes both links carry the same rate.

    With a share ``eta`` the access link delivers ``eta * c_a`` and the
    backhaul ``(1 - eta) * c_b``; the largest eta with the backhaul still
    keeping up is c_b / (c_a + c_b).
    """
    if c_a < 0 or c_b < 0:
        raise ValueError("capacities must be nonnegative")
    if c_a == 0 and c_b == 0:
        raise UndefinedSplitError("both capacities are zero")
    return c_b / (c_a + c_b)


def end_to_end_rate(c_a, c_b):
    """c_a c_b / (c_a + c_b); zero when either link has no capacity."""
    if c_a < 0 or c_b < 0:
        raise ValueError("capacities must be nonnegative")
    if c_a == 0 or c_b == 0:
        return 0.0
    return c_a * c_b / (c_a + c_b)


def eta_curve(c_a, c_b, etas):
    """End-to-end rate min(eta c_a, (1 - eta) c_b) at arbitrary splits."""
    etas = np.asarray(etas, dtype=float)
    return np.minimum(etas * c_a, (1.0 - etas) * c_b)


def summarize(c_a, c_b) -> RateSummary:
    diag = None
    if c_a == 0 and c_b == 0:
        return RateSummary(0.0, 0.0, float("nan"), 0.0, "both links have zero capacity")
    if c_a == 0:
        diag = "access capacity is zero; no user can be served"
    elif c_b == 0:
        diag = "backhaul capacity is zero; eta collapses to 0"
    return RateSummary(float(c_a), float(c_b), float(optimal_eta(c_a, c_b)),
                       float(end_to_end_rate(c_a, c_b)), diag)


def backhaul_signaling_load(scheme, m, n_a, k):
    """Uplink and downlink backhaul resource counts needed to coordinate the
    access-link beamforming under each design scheme.

    A centralized design ships every AP's full channel to the CPU and the
    resulting precoders back; decentralized designs exchange only each
    user's desired and interference terms.
    """
    if min(m, n_a, k) < 1:
        raise ValueError("counts must be positive")
    if scheme == "centralized_fd":
        return m * n_a * k, 1 + m * n_a * k
    if scheme in ("decentralized_fd", "decentralized_hybrid"):
        return 2 * m * k, 1
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
