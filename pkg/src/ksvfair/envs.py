"""Stochastic full-feedback valuation oracles.

Every environment exposes two surfaces: ``pull`` draws one noisy reward for
a coalition (what a bandit run observes) and ``exact`` returns the
ground-truth mean (a backdoor used only to build the fair target policy and
in tests).  Pulls take an explicit RNG so callers own determinism; an
environment never mutates after construction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .games import RestrictedGame, canon

log = logging.getLogger(__name__)


class ValuationOracle:
    """Interface shared by all environments.

    ``budget`` is the selection budget K.  ``query_limit`` is the largest
    coalition a query may name: equal to K in strict mode, K + 1 when the
    environment was built with ``allow_extra_query`` (needed by estimators
    that probe one arm beyond a full coalition).
    """

    n_arms: int
    budget: int
    query_limit: int

    def exact(self, members) -> float:
        raise NotImplementedError

    def pull(self, members, rng) -> float:
        raise NotImplementedError

    def _checked(self, members) -> tuple[int, ...]:
        S = canon(members)
        if len(S) > self.query_limit:
            raise ValueError(
                f"coalition of size {len(S)} exceeds query limit {self.query_limit}"
            )
        if S and (S[0] < 0 or S[-1] >= self.n_arms):
            raise ValueError(f"arm index out of range in {S} (M={self.n_arms})")
        return S

    def pull_mean(self, members, n: int, rng) -> float:
        """Mean of n independent pulls of the same coalition."""
        return float(np.mean([self.pull(members, rng) for _ in range(n)]))

    def pull_mean_many(self, sets, n: int, rng) -> np.ndarray:
        """pull_mean applied to a list of coalitions, in order."""
        return np.array([self.pull_mean(S, n, rng) for S in sets])

    def restricted_game(self, *, memoize: bool = True) -> RestrictedGame:
        """The noiseless game over ``exact``, for fair-target computation."""
        return RestrictedGame(self.n_arms, self.budget, lambda S: self.exact(S), memoize=memoize)


class _GaussianOracle(ValuationOracle):
    """Shared machinery: exact mean plus additive Gaussian noise, clipped to [0,1].

    Clipping (rather than resampling) keeps rewards bounded for the
    Hoeffding-style analysis; the induced mean bias is small in the
    benchmark parameter ranges and is accepted by the empirical-mean tests.
    """

    def _noise_scale(self, S) -> float:
        raise NotImplementedError

    def pull(self, members, rng) -> float:
        S = self._checked(members)
        mu = self.exact(S)
        sigma = self._noise_scale(S)
        if sigma == 0.0:
            return float(min(max(mu, 0.0), 1.0))
        return float(np.clip(mu + rng.normal(0.0, sigma), 0.0, 1.0))

    def pull_mean(self, members, n: int, rng) -> float:
        S = self._checked(members)
        mu = self.exact(S)
        sigma = self._noise_scale(S)
        if sigma == 0.0:
            return float(min(max(mu, 0.0), 1.0))
        draws = np.clip(mu + rng.normal(0.0, sigma, size=n), 0.0, 1.0)
        return float(draws.mean())

    def pull_mean_many(self, sets, n: int, rng) -> np.ndarray:
        checked = [self._checked(S) for S in sets]
        mus = np.array([self.exact(S) for S in checked])
        sigmas = np.array([self._noise_scale(S) for S in checked])
        if not sigmas.any():
            return np.clip(mus, 0.0, 1.0)
        draws = rng.standard_normal((len(checked), n)) * sigmas[:, None] + mus[:, None]
        means = np.clip(draws, 0.0, 1.0).mean(axis=1)
        # noiseless rows stay exact rather than picking up mean-of-copies rounding
        return np.where(sigmas == 0.0, np.clip(mus, 0.0, 1.0), means)


class SyntheticEnv(_GaussianOracle):
    """Monotone submodular benchmark: concave transform of additive arm means.

    exact(S) = g(sum of member means) with
    g(x) = (1 - exp(-c x)) / (1 - exp(-c * total mean)), so the worth of the
    all-arms sum is normalized to 1; curvature c = 0 is the linear limit
    g(x) = x / total.  Coalition noise is the RMS of the member noise
    levels (independent per-arm noise observed only in aggregate), or a
    fixed global level when ``shared_noise_std`` is given.
    """

    def __init__(
        self,
        means,
        noise_stds=None,
        *,
        budget: int,
        curvature: float = 1.0,
        shared_noise_std: float | None = None,
        allow_extra_query: bool = False,
    ):
        self.means = np.asarray(means, dtype=float)
        M = len(self.means)
        if noise_stds is None:
            noise_stds = np.zeros(M)
        self.noise_stds = np.asarray(noise_stds, dtype=float)
        if len(self.noise_stds) != M:
            raise ValueError("means and noise_stds must have the same length")
        if np.any(self.means <= 0) or np.any(self.means > 1):
            raise ValueError("arm means must lie in (0, 1]")
        if np.any(self.noise_stds < 0):
            raise ValueError("noise levels must be nonnegative")
        if curvature < 0:
            raise ValueError("curvature must be nonnegative")
        if not 1 <= budget <= M:
            raise ValueError(f"need 1 <= K <= M, got K={budget}, M={M}")
        self.n_arms = M
        self.budget = int(budget)
        self.query_limit = self.budget + (1 if allow_extra_query else 0)
        self.curvature = float(curvature)
        self.shared_noise_std = shared_noise_std
        self._total = float(self.means.sum())
        self._noise_sq = self.noise_stds**2

    def exact(self, members) -> float:
        S = self._checked(members)
        if not S:
            return 0.0
        x = float(self.means[list(S)].sum())
        return self._transform(x)

    def _transform(self, x):
        c = self.curvature
        if c == 0.0:
            return x / self._total
        return -np.expm1(-c * x) / -np.expm1(-c * self._total)

    def _noise_scale(self, S) -> float:
        if not S:
            return 0.0
        if self.shared_noise_std is not None:
            return float(self.shared_noise_std)
        return float(math.sqrt(self._noise_sq[list(S)].mean()))

    def pull_mean_many(self, sets, n: int, rng) -> np.ndarray:
        """Vectorized batch of L-pull means; members must be distinct per set.

        Segment sums run left to right like the scalar path, so batched and
        one-at-a-time queries agree bitwise on the noiseless values.
        """
        sets = [tuple(s) for s in sets]
        lengths = np.array([len(s) for s in sets], dtype=np.intp)
        if len(lengths) == 0:
            return np.zeros(0)
        if lengths.max() > self.query_limit:
            raise ValueError(
                f"coalition of size {int(lengths.max())} exceeds query limit {self.query_limit}"
            )
        flat = np.array([a for s in sets for a in s], dtype=np.intp)
        if flat.size and (flat.min() < 0 or flat.max() >= self.n_arms):
            raise ValueError("arm index out of range")
        offsets = np.zeros(len(sets) + 1, dtype=np.intp)
        np.cumsum(lengths, out=offsets[1:])
        nonempty = lengths > 0
        sum_means = np.zeros(len(sets))
        sigmas = np.zeros(len(sets))
        if flat.size:
            starts = offsets[:-1][nonempty]
            sum_means[nonempty] = np.add.reduceat(self.means[flat], starts)
            if self.shared_noise_std is not None:
                sigmas[nonempty] = self.shared_noise_std
            else:
                noise_sums = np.add.reduceat(self._noise_sq[flat], starts)
                sigmas[nonempty] = np.sqrt(noise_sums / lengths[nonempty])
        mus = np.where(nonempty, self._transform(sum_means), 0.0)
        if not sigmas.any():
            return np.clip(mus, 0.0, 1.0)
        draws = rng.standard_normal((len(sets), n)) * sigmas[:, None] + mus[:, None]
        means = np.clip(draws, 0.0, 1.0).mean(axis=1)
        return np.where(sigmas == 0.0, np.clip(mus, 0.0, 1.0), means)


class GameOracle(_GaussianOracle):
    """Noisy wrapper around any restricted game, with one global noise level.

    ``budget`` defaults to the game's own; pass a smaller budget together
    with ``allow_extra_query`` to model an estimator that may name one arm
    beyond a full coalition (the wrapped game must cover that size).
    """

    def __init__(
        self,
        game: RestrictedGame,
        noise_std: float = 0.0,
        *,
        budget: int | None = None,
        allow_extra_query: bool = False,
    ):
        self.game = game
        self.n_arms = game.n_arms
        self.budget = int(budget) if budget is not None else game.budget
        self.query_limit = self.budget + (1 if allow_extra_query else 0)
        if self.query_limit > game.budget:
            raise ValueError(
                f"query limit {self.query_limit} exceeds the wrapped game's budget {game.budget}"
            )
        if noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        self.noise_std = float(noise_std)

    def exact(self, members) -> float:
        return self.game.value(members)

    def _noise_scale(self, S) -> float:
        return self.noise_std if S else 0.0


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with densely indexed nodes."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def load_edge_list(path) -> Graph:
    """Parse whitespace-separated integer pairs, one edge per line.

    Lines starting with '#' are comments.  Self-loops and duplicate edges
    (in either orientation) are dropped and counted; nodes are re-indexed
    densely in order of first appearance on kept edges.
    """
    index: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two tokens, got {parts!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer token in {parts!r}") from exc
            if a == b:
                self_loops += 1
                continue
            key = (min(a, b), max(a, b))
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            for node in (a, b):
                if node not in index:
                    index[node] = len(index)
            edges.append((index[a], index[b]))
    if not edges:
        raise ValueError(f"{path}: no edges found")
    if self_loops or duplicates:
        log.warning(
            "%s: dropped %d self-loop(s) and %d duplicate edge(s)",
            path,
            self_loops,
            duplicates,
        )
    return Graph(
        n_nodes=len(index),
        edges=tuple(edges),
        dropped_self_loops=self_loops,
        dropped_duplicates=duplicates,
    )


class CascadeEnv(ValuationOracle):
    """Influence diffusion over an undirected graph.

    One pull seeds the coalition's nodes and runs a single cascade: each
    newly activated node gets one chance per currently inactive neighbour,
    succeeding with probability ``activation_p``; the reward is the
    activated fraction of the graph.  ``exact`` is a memoized Monte-Carlo
    estimate (the true spread is intractable) with per-coalition standard
    error at most 1 / (2 sqrt(exact_sims)); its RNG is derived from the
    coalition itself so the estimate does not depend on query order.
    """

    def __init__(
        self,
        graph: Graph,
        activation_p: float,
        *,
        budget: int,
        exact_sims: int = 10_000,
        exact_seed: int = 0,
        allow_extra_query: bool = False,
    ):
        if not 0.0 <= activation_p <= 1.0:
            raise ValueError("activation probability must lie in [0, 1]")
        if not 1 <= budget <= graph.n_nodes:
            raise ValueError(f"need 1 <= K <= n, got K={budget}, n={graph.n_nodes}")
        if exact_sims < 1:
            raise ValueError("exact_sims must be >= 1")
        self.graph = graph
        self.activation_p = float(activation_p)
        self.n_arms = graph.n_nodes
        self.budget = int(budget)
        self.query_limit = self.budget + (1 if allow_extra_query else 0)
        self.exact_sims = int(exact_sims)
        self.exact_seed = int(exact_seed)
        self._exact_memo: dict[tuple[int, ...], float] = {}

    def pull(self, members, rng) -> float:
        S = self._checked(members)
        if not S:
            return 0.0
        n = self.graph.n_nodes
        p = self.activation_p
        adjacency = self.graph.adjacency
        active = np.zeros(n, dtype=bool)
        active[list(S)] = True
        frontier = list(S)
        n_active = len(S)
        while frontier:
            new: list[int] = []
            for node in frontier:
                for nbr in adjacency[node]:
                    if not active[nbr] and rng.random() < p:
                        active[nbr] = True
                        new.append(nbr)
            n_active += len(new)
            frontier = new
        return n_active / n

    def exact(self, members) -> float:
        S = self._checked(members)
        if not S:
            return 0.0
        cached = self._exact_memo.get(S)
        if cached is None:
            rng = np.random.default_rng((self.exact_seed, *S))
            cached = cascade_exact(self, S, self.exact_sims, rng)
            self._exact_memo[S] = cached
        return cached


def cascade_exact(env: CascadeEnv, members, n_sims: int, rng) -> float:
    """Mean activated fraction over n_sims independent cascades from the seed set."""
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    total = 0.0
    for _ in range(n_sims):
        total += env.pull(members, rng)
    return total / n_sims
