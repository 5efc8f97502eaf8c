"""Families of candidate index-set classes.

Each family describes a class C of K-element subsets of {1..n} with exact
cardinality, an exactly-uniform sampler, canonical (lexicographic) member
enumeration under a cap, an exact maximum-weight member, and the batch hooks
the risk estimators run on.  Graph families live on the complete graph K_m
(edges numbered lexicographically by endpoint pair, 1-based) or on the
complete bipartite graph K_{m,m} (edge (i, j) numbered (i-1)m + j).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from ._assignment import assignment_value, lexmin_max_weight_assignment
from .core import (
    DEFAULT_ENUMERATION_CAP,
    CapExceededError,
    IndexSet,
    MTooLargeForClassError,
    SeededRng,
    _as_generator,
    canonical_distance,
)

#: soft ceiling on elements touched per member-sum block, keeps temporaries small
_BLOCK_BUDGET = 8_000_000


def complete_graph_edges(m: int) -> np.ndarray:
    """(n, 2) array of 0-based endpoint pairs of K_m in lexicographic order."""
    a, b = np.triu_indices(m, 1)
    return np.stack([a, b], axis=1).astype(np.int32)


class SetClass:
    """Base class: a family of equal-size index sets with sampling,
    enumeration, and maximization capabilities."""

    family = "abstract"
    is_symmetric = False

    n: int
    K: int

    def cardinality(self) -> int:
        raise NotImplementedError

    def sample(self, rng: SeededRng | np.random.Generator) -> IndexSet:
        """Draw one member, exactly uniformly."""
        raise NotImplementedError

    def contains(self, s: IndexSet) -> bool:
        raise NotImplementedError

    def to_params(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        items = ", ".join(f"{k}={v}" for k, v in self.to_params().items() if k != "family")
        return f"{type(self).__name__}({items})"

    # -- enumeration ---------------------------------------------------

    def _build_member_matrix(self) -> np.ndarray:
        raise NotImplementedError

    def _check_cap(self, cap: int | None) -> int:
        cap = DEFAULT_ENUMERATION_CAP if cap is None else int(cap)
        size = self.cardinality()
        if size > cap:
            raise CapExceededError(size, cap)
        return cap

    def member_matrix(self, cap: int | None = None) -> np.ndarray:
        """(N, K) int32 matrix of 0-based members, canonical row order."""
        self._check_cap(cap)
        cached = getattr(self, "_member_cache", None)
        if cached is None:
            cached = np.ascontiguousarray(self._build_member_matrix(), dtype=np.int32)
            self._member_cache = cached
        return cached

    def enumerate_members(self, cap: int | None = None) -> Iterator[IndexSet]:
        """Members in canonical order: lexicographic on the index sequence."""
        for row in self.member_matrix(cap):
            yield IndexSet(tuple(int(i) + 1 for i in row), self.n)

    # -- batch evaluation hooks ----------------------------------------

    def member_sums_iter(self, X: np.ndarray, cap: int | None = None) -> Iterator[np.ndarray]:
        """Yield (B, chunk) blocks of member sums X_S over canonical order."""
        M = self.member_matrix(cap)
        B = X.shape[0]
        chunk = max(1, _BLOCK_BUDGET // max(1, B * self.K))
        for s in range(0, M.shape[0], chunk):
            yield X[:, M[s : s + chunk]].sum(axis=2)

    def max_values_batch(self, X: np.ndarray, cap: int | None = None) -> np.ndarray:
        """max_S X_S per row of X."""
        best = np.full(X.shape[0], -np.inf)
        for blk in self.member_sums_iter(X, cap):
            np.maximum(best, blk.max(axis=1), out=best)
        return best

    def log_mean_exp_batch(self, mu: float, X: np.ndarray, cap: int | None = None) -> np.ndarray:
        """log((1/N) sum_S exp(mu * X_S)) per row, streaming log-sum-exp."""
        if mu == 0.0:
            return np.zeros(X.shape[0])
        hi = np.full(X.shape[0], -np.inf)
        acc = np.zeros(X.shape[0])
        for blk in self.member_sums_iter(X, cap):
            t = mu * blk
            top = np.maximum(hi, t.max(axis=1))
            acc = acc * np.exp(hi - top) + np.exp(t - top[:, None]).sum(axis=1)
            hi = top
        return hi + np.log(acc) - math.log(self.cardinality())

    def max_weight(self, x: np.ndarray, cap: int | None = None) -> tuple[IndexSet, float]:
        """Exact argmax_S X_S with lexicographic tie-breaking.

        Canonical enumeration order is lexicographic, so the first maximum in
        order is the tie winner.
        """
        x = np.asarray(x, dtype=np.float64)
        best_val = -np.inf
        best_row = -1
        offset = 0
        for blk in self.member_sums_iter(x[None, :], cap):
            vals = blk[0]
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val = float(vals[j])
                best_row = offset + j
            offset += vals.size
        row = self.member_matrix(cap)[best_row]
        return IndexSet(tuple(int(i) + 1 for i in row), self.n), best_val

    def overlap_pmf(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Exact law of |S ∩ S'| for two independent uniform members, when known."""
        return None


class DisjointSets(SetClass):
    """N pairwise-disjoint blocks of K consecutive indices; n = N*K."""

    family = "disjoint"
    is_symmetric = True

    def __init__(self, N: int, K: int):
        if N < 1 or K < 1:
            raise ValueError("DisjointSets requires N >= 1 and K >= 1")
        self.N = int(N)
        self.K = int(K)
        self.n = self.N * self.K

    def cardinality(self) -> int:
        return self.N

    def to_params(self) -> dict:
        return {"family": self.family, "N": self.N, "K": self.K}

    def sample(self, rng):
        gen = _as_generator(rng)
        j = int(gen.integers(self.N))
        return IndexSet(tuple(range(j * self.K + 1, (j + 1) * self.K + 1)), self.n)

    def contains(self, s: IndexSet) -> bool:
        if s.n != self.n or len(s) != self.K:
            return False
        first = s.indices[0]
        if (first - 1) % self.K != 0:
            return False
        return s.indices == tuple(range(first, first + self.K))

    def _build_member_matrix(self) -> np.ndarray:
        return np.arange(self.n, dtype=np.int32).reshape(self.N, self.K)

    def member_sums_iter(self, X, cap=None):
        yield X.reshape(X.shape[0], self.N, self.K).sum(axis=2)

    def overlap_pmf(self):
        if self.N == 1:
            return np.array([self.K]), np.array([1.0])
        return np.array([0, self.K]), np.array([1 - 1 / self.N, 1 / self.N])


class KSets(SetClass):
    """All K-element subsets of {1..n}."""

    family = "ksets"
    is_symmetric = True

    def __init__(self, n: int, K: int):
        if not 1 <= K <= n:
            raise ValueError("KSets requires 1 <= K <= n")
        self.n = int(n)
        self.K = int(K)

    def cardinality(self) -> int:
        return math.comb(self.n, self.K)

    def to_params(self) -> dict:
        return {"family": self.family, "n": self.n, "K": self.K}

    def sample(self, rng):
        gen = _as_generator(rng)
        idx = np.sort(gen.choice(self.n, size=self.K, replace=False))
        return IndexSet(tuple(int(i) + 1 for i in idx), self.n)

    def contains(self, s: IndexSet) -> bool:
        return s.n == self.n and len(s) == self.K

    def _build_member_matrix(self) -> np.ndarray:
        combos = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(self.n), self.K)),
            dtype=np.int32,
        )
        return combos.reshape(-1, self.K)

    def max_weight(self, x, cap=None):
        x = np.asarray(x, dtype=np.float64)
        # stable greedy: value descending, index ascending; lex-least under ties
        order = np.lexsort((np.arange(self.n), -x))
        top = np.sort(order[: self.K])
        return IndexSet(tuple(int(i) + 1 for i in top), self.n), float(x[top].sum())

    def max_values_batch(self, X, cap=None):
        if self.K == self.n:
            return X.sum(axis=1)
        part = np.partition(X, self.n - self.K, axis=1)
        return part[:, self.n - self.K :].sum(axis=1)

    def log_mean_exp_batch(self, mu, X, cap=None):
        # log-domain elementary symmetric polynomial recurrence, O(nK) per row;
        # evaluates the same sum over all C(n, K) members without enumerating.
        if mu == 0.0:
            return np.zeros(X.shape[0])
        logt = mu * X
        B = X.shape[0]
        dp = np.full((B, self.K + 1), -np.inf)
        dp[:, 0] = 0.0
        for i in range(self.n):
            ti = logt[:, i]
            for k in range(min(i + 1, self.K), 0, -1):
                np.logaddexp(dp[:, k], dp[:, k - 1] + ti, out=dp[:, k])
        return dp[:, self.K] - math.log(self.cardinality())

    def overlap_pmf(self):
        n, K = self.n, self.K
        total = math.comb(n, K)
        zs = list(range(max(0, 2 * K - n), K + 1))
        probs = [
            float(Fraction(math.comb(K, z) * math.comb(n - K, K - z), total)) for z in zs
        ]
        return np.array(zs), np.array(probs)


class Stars(SetClass):
    """All m stars of K_m: the m-1 edges incident to one center vertex."""

    family = "stars"
    is_symmetric = True

    def __init__(self, m: int):
        if m < 3:
            raise ValueError("Stars requires m >= 3")
        self.m = int(m)
        self.n = math.comb(self.m, 2)
        self.K = self.m - 1
        self.edges = complete_graph_edges(self.m)
        inc = np.empty((self.m, self.K), dtype=np.int32)
        for c in range(self.m):
            inc[c] = np.flatnonzero((self.edges[:, 0] == c) | (self.edges[:, 1] == c))
        self.incident = inc

    def cardinality(self) -> int:
        return self.m

    def to_params(self) -> dict:
        return {"family": self.family, "m": self.m}

    def sample(self, rng):
        gen = _as_generator(rng)
        c = int(gen.integers(self.m))
        return IndexSet(tuple(int(e) + 1 for e in self.incident[c]), self.n)

    def contains(self, s: IndexSet) -> bool:
        if s.n != self.n or len(s) != self.K:
            return False
        pairs = self.edges[s.zero_based()]
        counts = np.bincount(pairs.ravel(), minlength=self.m)
        return bool(counts.max() == self.K)

    def _build_member_matrix(self) -> np.ndarray:
        return self.incident

    def _center_sums(self, X: np.ndarray) -> np.ndarray:
        return X[:, self.incident].sum(axis=2)

    def member_sums_iter(self, X, cap=None):
        yield self._center_sums(X)

    def max_weight(self, x, cap=None):
        sums = self._center_sums(np.asarray(x, dtype=np.float64)[None, :])[0]
        c = int(np.argmax(sums))  # first max: smaller center wins, which is lex-least
        return IndexSet(tuple(int(e) + 1 for e in self.incident[c]), self.n), float(sums[c])

    def overlap_pmf(self):
        # same center w.p. 1/m (full overlap), else exactly the shared edge
        return np.array([1, self.K]), np.array([1 - 1 / self.m, 1 / self.m])


class PerfectMatchings(SetClass):
    """All m! perfect matchings of K_{m,m}; member of sigma is
    {(i-1)m + sigma(i)}."""

    family = "matchings"
    is_symmetric = True

    def __init__(self, m: int):
        if m < 2:
            raise ValueError("PerfectMatchings requires m >= 2")
        self.m = int(m)
        self.n = self.m * self.m
        self.K = self.m

    def cardinality(self) -> int:
        return math.factorial(self.m)

    def to_params(self) -> dict:
        return {"family": self.family, "m": self.m}

    def sample(self, rng):
        gen = _as_generator(rng)
        sigma = gen.permutation(self.m)
        ids = np.arange(self.m) * self.m + sigma
        return IndexSet(tuple(int(e) + 1 for e in ids), self.n)

    def contains(self, s: IndexSet) -> bool:
        if s.n != self.n or len(s) != self.K:
            return False
        ids = s.zero_based()
        rows = ids // self.m
        cols = ids % self.m
        return len(set(rows.tolist())) == self.m and len(set(cols.tolist())) == self.m

    def _build_member_matrix(self) -> np.ndarray:
        perms = np.fromiter(
            itertools.chain.from_iterable(itertools.permutations(range(self.m))),
            dtype=np.int32,
        ).reshape(-1, self.m)
        return (np.arange(self.m, dtype=np.int32) * self.m)[None, :] + perms

    def _weight_matrix(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64).reshape(self.m, self.m)

    def max_weight(self, x, cap=None):
        sigma, value = lexmin_max_weight_assignment(self._weight_matrix(x))
        ids = np.arange(self.m) * self.m + sigma
        return IndexSet(tuple(int(e) + 1 for e in ids), self.n), value

    def max_values_batch(self, X, cap=None):
        return np.array([assignment_value(self._weight_matrix(row)) for row in X])

    def overlap_pmf(self):
        # overlap of two uniform matchings = fixed points of a uniform permutation
        m = self.m
        der = [1, 0]
        for j in range(2, m + 1):
            der.append((j - 1) * (der[j - 1] + der[j - 2]))
        total = math.factorial(m)
        zs, probs = [], []
        for z in range(m + 1):
            p = Fraction(math.comb(m, z) * der[m - z], total)
            if p > 0:
                zs.append(z)
                probs.append(float(p))
        return np.array(zs), np.array(probs)


class _UnionFind:
    def __init__(self, m: int):
        self.parent = list(range(m))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


class SpanningTrees(SetClass):
    """All m^(m-2) spanning trees of K_m, as (m-1)-element edge sets."""

    family = "trees"
    is_symmetric = False

    def __init__(self, m: int):
        if m < 2:
            raise ValueError("SpanningTrees requires m >= 2")
        self.m = int(m)
        self.n = math.comb(self.m, 2)
        self.K = self.m - 1
        self.edges = complete_graph_edges(self.m)
        pid = np.zeros((self.m, self.m), dtype=np.int32)
        pid[self.edges[:, 0], self.edges[:, 1]] = np.arange(self.n, dtype=np.int32)
        pid += pid.T
        self._pair_id0 = pid

    def cardinality(self) -> int:
        return self.m ** (self.m - 2)

    def to_params(self) -> dict:
        return {"family": self.family, "m": self.m}

    def sample(self, rng):
        # first-entrance edges of a simple random walk from a uniform start
        gen = _as_generator(rng)
        m = self.m
        if m == 2:
            return IndexSet((1,), self.n)
        visited = np.zeros(m, dtype=bool)
        cur = int(gen.integers(m))
        visited[cur] = True
        count = 1
        ids = []
        while count < m:
            r = int(gen.integers(m - 1))
            nxt = r + (r >= cur)
            if not visited[nxt]:
                visited[nxt] = True
                count += 1
                ids.append(int(self._pair_id0[cur, nxt]))
            cur = nxt
        return IndexSet(tuple(e + 1 for e in sorted(ids)), self.n)

    def _is_tree(self, edge_ids0) -> bool:
        uf = _UnionFind(self.m)
        for e in edge_ids0:
            a, b = self.edges[e]
            if not uf.union(int(a), int(b)):
                return False
        return True

    def contains(self, s: IndexSet) -> bool:
        return s.n == self.n and len(s) == self.K and self._is_tree(s.zero_based())

    def _build_member_matrix(self) -> np.ndarray:
        rows = [
            combo
            for combo in itertools.combinations(range(self.n), self.K)
            if self._is_tree(combo)
        ]
        return np.array(rows, dtype=np.int32)

    def _kruskal(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        # weight descending, edge id ascending; greedy basis of the graphic
        # matroid is the lex-least maximizer under ties
        order = np.lexsort((np.arange(self.n), -x))
        uf = _UnionFind(self.m)
        chosen = []
        for e in order:
            a, b = self.edges[e]
            if uf.union(int(a), int(b)):
                chosen.append(int(e))
                if len(chosen) == self.K:
                    break
        ids = np.sort(np.array(chosen, dtype=np.int64))
        return ids, float(x[ids].sum())

    def max_weight(self, x, cap=None):
        x = np.asarray(x, dtype=np.float64)
        ids, value = self._kruskal(x)
        return IndexSet(tuple(int(e) + 1 for e in ids), self.n), value

    def max_values_batch(self, X, cap=None):
        return np.array([self._kruskal(row)[1] for row in X])


class Cliques(SetClass):
    """Edge sets of k-cliques of K_m; K = C(k,2), N = C(m,k)."""

    family = "cliques"
    is_symmetric = True

    def __init__(self, m: int, k: int):
        if not 2 <= k <= m:
            raise ValueError("Cliques requires 2 <= k <= m")
        self.m = int(m)
        self.k = int(k)
        self.n = math.comb(self.m, 2)
        self.K = math.comb(self.k, 2)
        self.edges = complete_graph_edges(self.m)
        pid = np.zeros((self.m, self.m), dtype=np.int32)
        pid[self.edges[:, 0], self.edges[:, 1]] = np.arange(self.n, dtype=np.int32)
        pid += pid.T
        self._pair_id0 = pid
        self._ia, self._ib = np.triu_indices(self.k, 1)

    def cardinality(self) -> int:
        return math.comb(self.m, self.k)

    def to_params(self) -> dict:
        return {"family": self.family, "m": self.m, "k": self.k}

    def _vertices_to_member(self, vs: np.ndarray) -> np.ndarray:
        return self._pair_id0[vs[self._ia], vs[self._ib]]

    def sample(self, rng):
        gen = _as_generator(rng)
        vs = np.sort(gen.choice(self.m, size=self.k, replace=False))
        ids = self._vertices_to_member(vs)
        return IndexSet(tuple(int(e) + 1 for e in ids), self.n)

    def contains(self, s: IndexSet) -> bool:
        if s.n != self.n or len(s) != self.K:
            return False
        pairs = self.edges[s.zero_based()]
        vs = np.unique(pairs)
        if vs.size != self.k:
            return False
        expect = np.sort(self._vertices_to_member(vs))
        return bool(np.array_equal(expect, s.zero_based()))

    def _build_member_matrix(self) -> np.ndarray:
        vc = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(self.m), self.k)),
            dtype=np.int32,
        ).reshape(-1, self.k)
        return self._pair_id0[vc[:, self._ia], vc[:, self._ib]]

    def overlap_pmf(self):
        # shared vertices Y are hypergeometric; shared edges are C(Y, 2)
        m, k = self.m, self.k
        total = math.comb(m, k)
        acc: dict[int, Fraction] = {}
        for y in range(max(0, 2 * k - m), k + 1):
            z = math.comb(y, 2)
            p = Fraction(math.comb(k, y) * math.comb(m - k, k - y), total)
            acc[z] = acc.get(z, Fraction(0)) + p
        zs = sorted(acc)
        return np.array(zs), np.array([float(acc[z]) for z in zs])


class GridSquares(SetClass):
    """Axis-aligned sqrt_K x sqrt_K subsquares of a sqrt_n x sqrt_n grid,
    row-major 1-based cell numbering."""

    family = "grid"
    is_symmetric = False

    def __init__(self, sqrt_n: int, sqrt_K: int):
        if not 1 <= sqrt_K <= sqrt_n:
            raise ValueError("GridSquares requires 1 <= sqrt_K <= sqrt_n")
        self.sqrt_n = int(sqrt_n)
        self.sqrt_K = int(sqrt_K)
        self.n = self.sqrt_n**2
        self.K = self.sqrt_K**2
        self.side = self.sqrt_n - self.sqrt_K + 1

    def cardinality(self) -> int:
        return self.side**2

    def to_params(self) -> dict:
        return {"family": self.family, "sqrt_n": self.sqrt_n, "sqrt_K": self.sqrt_K}

    def _member_ids0(self, r0: int, c0: int) -> np.ndarray:
        rows = np.arange(r0, r0 + self.sqrt_K)
        cols = np.arange(c0, c0 + self.sqrt_K)
        return (rows[:, None] * self.sqrt_n + cols[None, :]).ravel()

    def sample(self, rng):
        gen = _as_generator(rng)
        r0 = int(gen.integers(self.side))
        c0 = int(gen.integers(self.side))
        return IndexSet(tuple(int(i) + 1 for i in self._member_ids0(r0, c0)), self.n)

    def contains(self, s: IndexSet) -> bool:
        if s.n != self.n or len(s) != self.K:
            return False
        first = s.indices[0] - 1
        r0, c0 = divmod(first, self.sqrt_n)
        if r0 > self.side - 1 or c0 > self.side - 1:
            return False
        return bool(np.array_equal(self._member_ids0(r0, c0), s.zero_based()))

    def _build_member_matrix(self) -> np.ndarray:
        rows = [
            self._member_ids0(r0, c0)
            for r0 in range(self.side)
            for c0 in range(self.side)
        ]
        return np.array(rows, dtype=np.int32)

    def member_sums_iter(self, X, cap=None):
        # summed-area table; output order is row-major over positions,
        # matching canonical enumeration
        B = X.shape[0]
        s, a = self.sqrt_n, self.sqrt_K
        grid = X.reshape(B, s, s)
        sat = np.zeros((B, s + 1, s + 1))
        sat[:, 1:, 1:] = grid.cumsum(axis=1).cumsum(axis=2)
        win = sat[:, a:, a:] - sat[:, :-a, a:] - sat[:, a:, :-a] + sat[:, :-a, :-a]
        yield win.reshape(B, -1)

    def overlap_pmf(self):
        R, a = self.side, self.sqrt_K
        d = np.arange(R)
        pd = np.where(d == 0, R, 2.0 * (R - d)) / R**2  # law of |delta| per axis
        ov = np.maximum(0, a - d)
        acc: dict[int, float] = {}
        for o1, p1 in zip(ov, pd):
            for o2, p2 in zip(ov, pd):
                z = int(o1) * int(o2)
                acc[z] = acc.get(z, 0.0) + p1 * p2
        zs = sorted(acc)
        return np.array(zs), np.array([acc[z] for z in zs])


class ExplicitClass(SetClass):
    """A class given by an explicit member list (e.g. a sampled subclass)."""

    family = "explicit"
    is_symmetric = False

    def __init__(self, n: int, members: list[IndexSet] | tuple[IndexSet, ...]):
        members = sorted(members, key=lambda s: s.indices)
        if not members:
            raise ValueError("ExplicitClass requires at least one member")
        sizes = {len(s) for s in members}
        if len(sizes) != 1:
            raise ValueError("all members must have equal size")
        if any(s.n != n for s in members):
            raise ValueError("all members must share the ambient dimension")
        keys = [s.indices for s in members]
        if len(set(keys)) != len(keys):
            raise ValueError("members must be distinct")
        self.n = int(n)
        self.K = len(members[0])
        self.members = tuple(members)
        self._key_set = frozenset(keys)
        self._member_cache = np.array([s.zero_based() for s in members], dtype=np.int32)

    def cardinality(self) -> int:
        return len(self.members)

    def to_params(self) -> dict:
        return {"family": self.family, "n": self.n, "K": self.K, "N": len(self.members)}

    def sample(self, rng):
        gen = _as_generator(rng)
        return self.members[int(gen.integers(len(self.members)))]

    def contains(self, s: IndexSet) -> bool:
        return s.n == self.n and s.indices in self._key_set

    def _build_member_matrix(self) -> np.ndarray:
        return self._member_cache


FAMILIES: dict[str, type[SetClass]] = {
    "disjoint": DisjointSets,
    "ksets": KSets,
    "stars": Stars,
    "matchings": PerfectMatchings,
    "trees": SpanningTrees,
    "cliques": Cliques,
    "grid": GridSquares,
}

_FAMILY_PARAMS = {
    "disjoint": ("N", "K"),
    "ksets": ("n", "K"),
    "stars": ("m",),
    "matchings": ("m",),
    "trees": ("m",),
    "cliques": ("m", "k"),
    "grid": ("sqrt_n", "sqrt_K"),
}


def make_class(family: str, **params) -> SetClass:
    """Build a family instance from flat parameters (CLI/serialization entry)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}, expected one of {sorted(FAMILIES)}")
    wanted = _FAMILY_PARAMS[family]
    missing = [p for p in wanted if params.get(p) is None]
    if missing:
        raise ValueError(f"family {family!r} requires parameters {wanted}, missing {missing}")
    extra = [p for p, v in params.items() if p not in wanted and v is not None]
    if extra:
        raise ValueError(f"family {family!r} does not take parameters {extra}")
    return FAMILIES[family](**{p: int(params[p]) for p in wanted})


# -- pairwise overlap sampling and derived estimates ---------------------


@dataclass(frozen=True)
class OverlapSample:
    """Overlap of one independently drawn pair of members."""

    z: int
    pair_count: int = 1

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("overlap must be nonnegative")


def sample_overlap_pair(spec: SetClass, rng: SeededRng | np.random.Generator) -> OverlapSample:
    """|S ∩ S'| for two independent uniform members.

    A SeededRng names a fixed stream, so repeated calls with the same SeededRng
    repeat the same pair; pass rng.child(i) per draw, or a Generator, to sweep.
    """
    gen = _as_generator(rng)
    s = spec.sample(gen)
    t = spec.sample(gen)
    return OverlapSample(len(set(s.indices) & set(t.indices)))


def exact_overlap_mgf(spec: SetClass, mu: float) -> float | None:
    """E exp(mu^2 |S ∩ S'|) from the exact overlap law, when the family has one."""
    pmf = spec.overlap_pmf()
    if pmf is None:
        return None
    zs, probs = pmf
    return float(np.sum(probs * np.exp(mu * mu * zs.astype(np.float64))))


def estimate_overlap_mgf(
    spec: SetClass,
    mu: float,
    pairs: int,
    rng: SeededRng,
) -> tuple[float, float]:
    """(estimate, std_error) of E exp(mu^2 |S ∩ S'|) over independent pairs.

    DisjointSets, Stars and PerfectMatchings use their exact overlap law
    (std_error 0); every other family is Monte Carlo.
    """
    if pairs < 2:
        raise ValueError("pairs must be >= 2")
    if isinstance(spec, (DisjointSets, Stars, PerfectMatchings)):
        return exact_overlap_mgf(spec, mu), 0.0
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    zs = np.empty(pairs)
    for i in range(pairs):
        zs[i] = sample_overlap_pair(spec, gen).z
    vals = np.exp(mu * mu * zs)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(pairs))


def estimate_tC(
    spec: SetClass,
    M: int,
    rng: SeededRng,
    repetitions: int = 101,
    cap: int | None = None,
) -> float:
    """Median (over repetitions) of the minimum pairwise canonical distance
    among M members sampled uniformly without replacement.

    Rejection sampling needs slack (N >= 4M); below that the class must be
    enumerable so the M distinct members can be drawn by rank.
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    N = spec.cardinality()
    if M > N:
        raise MTooLargeForClassError(f"M = {M} exceeds class cardinality {N}")
    by_rank = N < 4 * M
    if by_rank:
        try:
            spec.member_matrix(cap)
        except CapExceededError as exc:
            raise MTooLargeForClassError(
                f"N = {N} < 4M = {4 * M} and the class is not enumerable: {exc}"
            ) from exc

    mins = np.empty(repetitions)
    for r in range(repetitions):
        gen = rng.child(r).generator() if isinstance(rng, SeededRng) else rng
        if by_rank:
            ranks = gen.choice(int(N), size=M, replace=False)
            rows = spec.member_matrix(cap)[np.sort(ranks)]
            members = [IndexSet(tuple(int(i) + 1 for i in row), spec.n) for row in rows]
        else:
            seen: dict[tuple, IndexSet] = {}
            while len(seen) < M:
                s = spec.sample(gen)
                seen.setdefault(s.indices, s)
            members = list(seen.values())
        dmin = math.inf
        for a, b in itertools.combinations(members, 2):
            dmin = min(dmin, canonical_distance(a, b))
        mins[r] = dmin
    return float(np.median(mins))
