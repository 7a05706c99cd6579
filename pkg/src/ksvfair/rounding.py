"""Sampling exactly-K subsets with prescribed per-arm inclusion probabilities.

The sampler is systematic: permute the arms, lay their probabilities end to
end on [0, K), and slice with K points spaced exactly one apart at a random
offset.  Total mass K gives exactly K picks; entries capped at 1 make a
double pick impossible; each arm's interval length equals its probability,
so marginals are matched exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUM_TOL = 1e-9


@dataclass(frozen=True)
class MarginalVector:
    """Per-arm inclusion probabilities summing to an integer budget."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("probs must be a nonempty 1-d array")
        if np.any(p < -SUM_TOL) or np.any(p > 1 + SUM_TOL):
            raise ValueError("entries must lie in [0, 1]")
        total = float(p.sum())
        if abs(total - round(total)) > SUM_TOL:
            raise ValueError(f"entries must sum to an integer budget, got {total}")
        object.__setattr__(self, "probs", p)

    @property
    def budget(self) -> int:
        return int(round(float(self.probs.sum())))


def normalize_to_marginals(raw, K: int) -> MarginalVector:
    """Scale nonnegative scores to inclusion probabilities summing to K.

    Starts from K * raw / sum(raw); any entry above 1 is capped and the
    excess mass is redistributed proportionally over the uncapped entries,
    iterating until all entries fit (water-filling).  Zero scores stay at
    probability zero, so at least K entries must be positive; otherwise no
    valid vector exists and a ValueError is raised.  The result preserves
    the ranking of the raw scores up to ties created by capping.
    """
    raw = np.asarray(raw, dtype=float)
    M = len(raw)
    if np.any(raw < 0):
        raise ValueError("raw scores must be nonnegative")
    if not 1 <= K <= M:
        raise ValueError(f"need 1 <= K <= M, got K={K}, M={M}")
    total = float(raw.sum())
    if total <= 0:
        raise ValueError("raw scores sum to zero")
    support = int(np.count_nonzero(raw))
    if support < K:
        raise ValueError(
            f"only {support} positive scores but K={K}; marginals <= 1 cannot sum to K"
        )
    probs = K * raw / total
    capped = np.zeros(M, dtype=bool)
    while True:
        over = (probs > 1.0) & ~capped
        if not over.any():
            break
        capped |= over
        probs[capped] = 1.0
        free = ~capped
        mass = K - int(capped.sum())
        free_total = float(raw[free].sum())
        if mass <= 0 or free_total <= 0:
            probs[free] = 0.0
            break
        probs[free] = mass * raw[free] / free_total
    # absorb float drift into the largest uncapped entry
    drift = K - float(probs.sum())
    if drift != 0.0:
        free_idx = np.flatnonzero(~capped & (probs > 0))
        target = free_idx[np.argmax(probs[free_idx])] if len(free_idx) else int(np.argmax(probs))
        probs[target] = min(probs[target] + drift, 1.0)
    return MarginalVector(probs)


def rrs_sample(pi, K: int, rng) -> tuple[int, ...]:
    """Draw exactly K distinct arms with inclusion probabilities matching pi."""
    probs = pi.probs if isinstance(pi, MarginalVector) else MarginalVector(np.asarray(pi, dtype=float)).probs
    M = len(probs)
    total = float(probs.sum())
    if abs(total - K) > SUM_TOL:
        raise ValueError(f"marginals sum to {total}, expected budget {K}")
    probs = np.clip(probs, 0.0, 1.0)
    perm = rng.permutation(M)
    cuts = np.cumsum(probs[perm])
    cuts[-1] = float(K)
    offset = rng.random()
    points = offset + np.arange(K)
    picked = perm[np.searchsorted(cuts, points, side="right")]
    return tuple(sorted(int(a) for a in picked))
