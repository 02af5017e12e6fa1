"""Expected walk counts on the planted partition model and gap thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DENSE_LIMIT = 512


@dataclass(frozen=True)
class WalkProfile:
    t: int
    p_t: float
    q_t: float
    m: int
    k: int
    p: float
    q: float


def closed_walk_entries(m: int, k: int, p: float, q: float, t: int) -> tuple[float, float]:
    """Same-cluster and cross-cluster entries of A^t for the (p, q) matrix.

    ``m`` is the per-cluster size.  With a = m(p - q) and b = m(p + (k-1)q),
    the two entries are ((k-1) a^t + b^t) / (k m) and (b^t - a^t) / (k m).
    """
    if t < 1:
        raise ValueError(f"walk length must be at least 1, got {t}")
    if m < 1:
        raise ValueError(f"cluster size must be positive, got {m}")
    if t == 1:
        return float(p), float(q)
    scale = m ** (t - 1)
    diff = scale * (p - q) ** t / k
    tot = scale * (p + (k - 1) * q) ** t / k
    return (k - 1) * diff + tot, tot - diff


def walk_profile(m: int, k: int, p: float, q: float, t: int) -> WalkProfile:
    p_t, q_t = closed_walk_entries(m, k, p, q, t)
    return WalkProfile(t, p_t, q_t, m, k, p, q)


def expected_step4_counts(p: float, q: float, k: int, r_size: int,
                          per_cluster: bool = False) -> tuple[float, float]:
    """Expected common-neighbour counts in R for same- and cross-cluster pairs.

    With ``per_cluster`` the counts are divided by ``k``, matching a reference
    set spread evenly over the clusters.
    """
    if r_size < 1:
        raise ValueError("reference set must be non-empty")
    e_y = (p * p + (k - 1) * q * q) * r_size
    e_z = (2 * p * q + (k - 2) * q * q) * r_size
    if per_cluster:
        e_y, e_z = e_y / k, e_z / k
    return e_y, e_z


def gap_threshold(n: int, k: int, t: int) -> float:
    """Smallest gap p - q for which length-t walks separate clusters.

    Solves m^(t-1) (p-q)^t > 4 n^(t-3/2) sqrt(ln n) with m = n/k, i.e.
    (4 k^(t-1) sqrt(ln n / n))^(1/t).  The constant 4 is a convention.
    """
    if t < 2:
        raise ValueError("gap threshold is defined for t >= 2")
    if n < 2:
        raise ValueError("need n >= 2")
    return (4.0 * k ** (t - 1) * math.sqrt(math.log(n) / n)) ** (1.0 / t)


def pq_matrix(psi, p: float, q: float) -> np.ndarray:
    psi = np.asarray(getattr(psi, "psi", psi))
    return np.where(psi[:, None] == psi[None, :], p, q).astype(np.float64)


def matrix_power_oracle(truth, p: float, q: float, t: int) -> np.ndarray:
    """Dense A^t with A_uv = p for same-cluster pairs (diagonal included), else q."""
    psi = np.asarray(getattr(truth, "psi", truth))
    if len(psi) > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to n <= {DENSE_LIMIT}, got {len(psi)}")
    if t < 1:
        raise ValueError("t must be at least 1")
    return np.linalg.matrix_power(pq_matrix(psi, p, q), t)


def profile_table(m: int, k: int, p: float, q: float, t_max: int) -> list[WalkProfile]:
    return [walk_profile(m, k, p, q, t) for t in range(1, t_max + 1)]
