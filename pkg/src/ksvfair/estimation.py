"""Monte-Carlo marginal-contribution estimation from noisy coalition pulls.

Two estimators live here.  ``shapley_estimation`` works within a selected
coalition: it walks random orderings and credits each member with smoothed
prefix marginals.  ``muras_round`` covers every arm in one shot: members of
a uniformly drawn coalition get prefix marginals, outsiders get their
marginal on top of the full coalition (which touches a coalition one past
the budget, so the oracle must allow the extra query size).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RoundEstimates:
    """Per-arm estimates from one estimation call.

    ``estimates`` maps arm -> mean marginal over the sampled orderings;
    ``squares`` carries the matching mean of squared per-ordering marginals
    (lets callers pool variances across rounds); ``n_perms`` is the number
    of orderings behind each mean.  ``pulls_consumed`` counts every oracle
    pull the call made, with no sharing assumed.
    """

    estimates: dict[int, float]
    squares: dict[int, float]
    n_perms: int
    pulls_consumed: int
    coalition: tuple[int, ...] | None = None


def shapley_estimation(
    S,
    oracle,
    R: int,
    L: int,
    rng,
    *,
    reuse_prefix: bool = False,
    permutations=None,
) -> RoundEstimates:
    """Estimate within-coalition marginals for every member of S.

    Draws R orderings of S uniformly with replacement (or takes
    ``permutations`` verbatim, mainly for exhaustive-coverage tests).  For
    each ordering and each member, the values of the prefix with and
    without the member are estimated as means of L fresh pulls each, and
    the differences are averaged over orderings.  Pull accounting is
    literal: R * |S| * 2 * L, every prefix value drawn independently.
    With ``reuse_prefix`` the with-member value is carried over as the next
    prefix value, for R * (|S| + 1) * L pulls; this halves cost but
    correlates consecutive marginals, so it is off by default.
    """
    members = [int(a) for a in S]
    if not members:
        raise ValueError("cannot estimate an empty coalition")
    if len(set(members)) != len(members):
        raise ValueError(f"duplicate members in {members}")
    if R < 1 or L < 1:
        raise ValueError("R and L must be >= 1")
    if permutations is None:
        perms = [[members[j] for j in rng.permutation(len(members))] for _ in range(R)]
    else:
        perms = [list(p) for p in permutations]
        if any(sorted(p) != sorted(members) for p in perms):
            raise ValueError("supplied permutations must reorder S exactly")
        R = len(perms)

    sets: list[tuple[int, ...]] = []
    for perm in perms:
        prefix: list[int] = []
        for a in perm:
            if not reuse_prefix or not prefix:
                sets.append(tuple(sorted(prefix)))
            sets.append(tuple(sorted(prefix + [a])))
            prefix.append(a)
    means = oracle.pull_mean_many(sets, L, rng)

    est = {a: 0.0 for a in members}
    sq = {a: 0.0 for a in members}
    idx = 0
    for perm in perms:
        prev = None
        for a in perm:
            if not reuse_prefix or prev is None:
                base = means[idx]
                idx += 1
            else:
                base = prev
            with_a = means[idx]
            idx += 1
            d = with_a - base
            est[a] += d / R
            sq[a] += d * d / R
            prev = with_a
    if reuse_prefix:
        pulls = R * (len(members) + 1) * L
    else:
        pulls = R * len(members) * 2 * L
    return RoundEstimates(est, sq, R, pulls, coalition=tuple(sorted(members)))


def muras_round(oracle, M: int, K: int, L: int, rng) -> RoundEstimates:
    """One uniform-sampling estimation round covering all M arms.

    Samples a random ordering of all arms, keeps a uniform K-subsequence S
    (relative order preserved).  Arms inside S get prefix marginals along
    S; arms outside get the marginal of joining the full S, a coalition of
    size K + 1, which the oracle must accept.  Every marginal is the mean
    of L paired fresh pulls, so the round consumes 2 * L * M pulls.
    """
    if K > M:
        raise ValueError(f"K={K} exceeds M={M}")
    if L < 1:
        raise ValueError("L must be >= 1")
    order = rng.permutation(M)
    positions = np.sort(rng.choice(M, size=K, replace=False))
    in_order = [int(order[j]) for j in positions]
    coalition = tuple(sorted(in_order))
    chosen = set(in_order)
    outside = [int(a) for a in order if int(a) not in chosen]

    sets: list[tuple[int, ...]] = []
    for j, a in enumerate(in_order):
        prefix = in_order[:j]
        sets.append(tuple(sorted(prefix)))
        sets.append(tuple(sorted(prefix + [a])))
    for a in outside:
        sets.append(coalition)
        sets.append(tuple(sorted(coalition + (a,))))
    means = oracle.pull_mean_many(sets, L, rng)

    est: dict[int, float] = {}
    sq: dict[int, float] = {}
    idx = 0
    for a in in_order:
        d = float(means[idx + 1] - means[idx])
        est[a], sq[a] = d, d * d
        idx += 2
    for a in outside:
        d = float(means[idx + 1] - means[idx])
        est[a], sq[a] = d, d * d
        idx += 2
    return RoundEstimates(est, sq, 1, 2 * L * M, coalition=coalition)


def running_mean_update(prev_mean: float, prev_count: int, new_value: float):
    """Fold one observation into a running mean; returns (new_mean, new_count)."""
    if prev_count < 0:
        raise ValueError("count must be nonnegative")
    new_count = prev_count + 1
    return (prev_count * prev_mean + new_value) / new_count, new_count
