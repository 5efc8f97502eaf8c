import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats
from scipy.special import logsumexp

from combidetect import (
    CapExceededError,
    Cliques,
    ExplicitClass,
    IndexSet,
    KSets,
    MTooLargeForClassError,
    SeededRng,
    SpanningTrees,
    Stars,
    estimate_overlap_mgf,
    estimate_tC,
    exact_overlap_mgf,
    make_class,
    sample_overlap_pair,
)
from combidetect.classes import complete_graph_edges

# family name -> (constructor kwargs, expected n, K, N)
SMALL = {
    "disjoint": (dict(N=5, K=3), 15, 3, 5),
    "ksets": (dict(n=7, K=3), 7, 3, 35),
    "stars": (dict(m=5), 10, 4, 5),
    "matchings": (dict(m=4), 16, 4, 24),
    "trees": (dict(m=4), 6, 3, 16),
    "cliques": (dict(m=6, k=3), 15, 3, 20),
    "grid": (dict(sqrt_n=4, sqrt_K=2), 16, 4, 9),
}


def small(family):
    return make_class(family, **SMALL[family][0])


@pytest.fixture(params=sorted(SMALL))
def family(request):
    return request.param


class TestRegistry:
    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            make_class("pentagons", n=5)

    def test_missing_parameter(self):
        with pytest.raises(ValueError, match="missing"):
            make_class("ksets", n=9)

    def test_extra_parameter(self):
        with pytest.raises(ValueError, match="does not take"):
            make_class("stars", m=5, K=3)

    @pytest.mark.parametrize(
        "fam,kwargs",
        [
            ("disjoint", dict(N=0, K=2)),
            ("ksets", dict(n=4, K=5)),
            ("stars", dict(m=2)),
            ("matchings", dict(m=1)),
            ("trees", dict(m=1)),
            ("cliques", dict(m=3, k=1)),
            ("cliques", dict(m=3, k=4)),
            ("grid", dict(sqrt_n=2, sqrt_K=3)),
        ],
    )
    def test_degenerate_parameters(self, fam, kwargs):
        with pytest.raises(ValueError):
            make_class(fam, **kwargs)


class TestGeometry:
    def test_shape(self, family):
        _, n, K, N = SMALL[family]
        spec = small(family)
        assert (spec.n, spec.K, spec.cardinality()) == (n, K, N)

    def test_cardinality_closed_forms(self):
        assert make_class("disjoint", N=7, K=2).cardinality() == 7
        assert make_class("ksets", n=10, K=4).cardinality() == math.comb(10, 4)
        assert make_class("stars", m=9).cardinality() == 9
        assert make_class("matchings", m=5).cardinality() == 120
        assert make_class("trees", m=5).cardinality() == 125
        assert make_class("cliques", m=8, k=4).cardinality() == math.comb(8, 4)
        assert make_class("grid", sqrt_n=10, sqrt_K=3).cardinality() == 64

    def test_members_are_sorted_distinct_in_range(self, family):
        spec = small(family)
        M = spec.member_matrix()
        assert M.shape == (spec.cardinality(), spec.K)
        assert np.all(M[:, 1:] > M[:, :-1]) if spec.K > 1 else True
        assert M.min() >= 0 and M.max() < spec.n
        assert len({tuple(r) for r in M.tolist()}) == M.shape[0]

    def test_enumeration_is_lexicographic(self, family):
        spec = small(family)
        rows = [tuple(r) for r in spec.member_matrix().tolist()]
        assert rows == sorted(rows)

    def test_every_member_passes_contains(self, family):
        spec = small(family)
        for s in spec.enumerate_members():
            assert spec.contains(s)

    def test_contains_rejects_non_members(self, family):
        spec = small(family)
        members = {s.indices for s in spec.enumerate_members()}
        gen = SeededRng(55).child(hash(family) % 1000).generator()
        rejected = 0
        for _ in range(200):
            idx = np.sort(gen.choice(spec.n, size=spec.K, replace=False))
            cand = IndexSet(tuple(int(i) + 1 for i in idx), spec.n)
            assert spec.contains(cand) == (cand.indices in members)
            rejected += cand.indices not in members
        if family != "ksets":  # every K-set is a member there
            assert rejected > 0

    def test_contains_rejects_wrong_size_and_dimension(self, family):
        spec = small(family)
        first = next(spec.enumerate_members())
        assert not spec.contains(IndexSet(first.indices[:1], spec.n)) or spec.K == 1
        assert not spec.contains(IndexSet(first.indices, spec.n + 3))


class TestSampling:
    def test_samples_are_members(self, family):
        spec = small(family)
        gen = SeededRng(77).child(hash(family) % 1000).generator()
        for _ in range(200):
            assert spec.contains(spec.sample(gen))

    def test_sampler_is_uniform(self, family):
        spec = small(family)
        N = spec.cardinality()
        rank = {s.indices: i for i, s in enumerate(spec.enumerate_members())}
        draws = max(2000, 300 * N)
        gen = SeededRng(101).child(sorted(SMALL).index(family)).generator()
        counts = np.zeros(N)
        for _ in range(draws):
            counts[rank[spec.sample(gen).indices]] += 1
        p = stats.chisquare(counts).pvalue
        assert p > 1e-3, f"{family}: chi-square p = {p}"

    def test_sampling_with_seeded_rng_is_deterministic(self):
        spec = small("trees")
        a = spec.sample(SeededRng(9).child(4))
        b = spec.sample(SeededRng(9).child(4))
        assert a == b


def brute_lexmin_max(spec, x):
    x = np.asarray(x, dtype=np.float64)
    best_set, best_val = None, -np.inf
    for s in spec.enumerate_members():
        v = float(x[s.zero_based()].sum())
        if v > best_val:
            best_set, best_val = s, v
    return best_set, best_val


class TestMaxWeight:
    def test_matches_bruteforce_on_gaussian_weights(self, family):
        spec = small(family)
        gen = SeededRng(202).child(sorted(SMALL).index(family)).generator()
        for _ in range(60):
            x = gen.standard_normal(spec.n)
            s, v = spec.max_weight(x)
            bs, bv = brute_lexmin_max(spec, x)
            assert s == bs
            assert v == pytest.approx(bv, abs=1e-9)
            assert spec.contains(s)

    def test_lexicographic_tie_break_on_integer_weights(self, family):
        spec = small(family)
        gen = SeededRng(203).child(sorted(SMALL).index(family)).generator()
        for _ in range(120):
            x = gen.integers(-2, 3, size=spec.n).astype(np.float64)
            s, v = spec.max_weight(x)
            bs, bv = brute_lexmin_max(spec, x)
            assert v == bv
            assert s == bs, f"{family}: tie broken away from lexicographic minimum"

    def test_all_equal_weights_give_first_member(self, family):
        spec = small(family)
        s, v = spec.max_weight(np.ones(spec.n))
        assert s == next(spec.enumerate_members())
        assert v == spec.K

    def test_matchings_lexmin_against_full_permutation_scan(self):
        # the assignment solver does its own tie canonicalization; hammer it
        spec = make_class("matchings", m=4)
        gen = SeededRng(204).generator()
        for _ in range(300):
            x = gen.integers(-2, 3, size=16).astype(np.float64)
            assert spec.max_weight(x) == brute_lexmin_max(spec, x)

    def test_trees_kruskal_against_full_scan(self):
        spec = make_class("trees", m=5)
        gen = SeededRng(205).generator()
        for _ in range(200):
            x = gen.integers(-1, 2, size=10).astype(np.float64)
            s, v = spec.max_weight(x)
            bs, bv = brute_lexmin_max(spec, x)
            assert (s, v) == (bs, bv)

    def test_ksets_beyond_enumeration_cap(self):
        spec = make_class("ksets", n=200, K=30)  # C(200,30) is astronomical
        gen = SeededRng(206).generator()
        x = gen.standard_normal(200)
        s, v = spec.max_weight(x)
        assert v == pytest.approx(np.sort(x)[-30:].sum())
        assert spec.contains(s)


class TestBatchEvaluation:
    def test_member_sums_match_direct_gather(self, family):
        spec = small(family)
        gen = SeededRng(301).child(sorted(SMALL).index(family)).generator()
        X = gen.standard_normal((7, spec.n))
        M = spec.member_matrix()
        direct = X[:, M].sum(axis=2)
        got = np.concatenate(list(spec.member_sums_iter(X)), axis=1)
        np.testing.assert_allclose(got, direct, atol=1e-10)

    def test_max_values_batch_matches_scalar(self, family):
        spec = small(family)
        gen = SeededRng(302).child(sorted(SMALL).index(family)).generator()
        X = gen.standard_normal((9, spec.n))
        vals = spec.max_values_batch(X)
        for i in range(X.shape[0]):
            assert vals[i] == pytest.approx(spec.max_weight(X[i])[1], abs=1e-9)

    def test_log_mean_exp_matches_logsumexp(self, family):
        spec = small(family)
        gen = SeededRng(303).child(sorted(SMALL).index(family)).generator()
        X = gen.standard_normal((6, spec.n))
        sums = X[:, spec.member_matrix()].sum(axis=2)
        for mu in (0.0, 0.3, 2.0, 25.0):
            expect = logsumexp(mu * sums, axis=1) - math.log(spec.cardinality())
            got = spec.log_mean_exp_batch(mu, X)
            np.testing.assert_allclose(got, expect, rtol=1e-10, atol=1e-12)

    def test_ksets_recurrence_equals_enumeration(self):
        spec = make_class("ksets", n=8, K=3)
        gen = SeededRng(304).generator()
        X = gen.standard_normal((5, 8))
        sums = X[:, spec.member_matrix()].sum(axis=2)
        for mu in (0.05, 1.0, 10.0):
            expect = logsumexp(mu * sums, axis=1) - math.log(spec.cardinality())
            np.testing.assert_allclose(
                spec.log_mean_exp_batch(mu, X), expect, rtol=1e-11
            )

    def test_chunked_iteration_covers_all_members(self):
        spec = make_class("ksets", n=22, K=3)  # N = 1540 forces several chunks
        gen = SeededRng(305).generator()
        X = gen.standard_normal((2000, 22))
        blocks = list(spec.member_sums_iter(X))
        assert len(blocks) > 1
        got = np.concatenate(blocks, axis=1)
        direct = X[:, spec.member_matrix()].sum(axis=2)
        np.testing.assert_allclose(got, direct, atol=1e-10)


class TestEdgeNumbering:
    def test_complete_graph_edges_are_lexicographic_pairs(self):
        np.testing.assert_array_equal(
            complete_graph_edges(4),
            [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]],
        )

    @staticmethod
    def pair_id(i, j, m):
        # 1-based vertices i < j -> 1-based edge id
        return (i - 1) * (2 * m - i) // 2 + (j - i)

    def test_star_members_use_pair_numbering(self):
        m = 5
        spec = make_class("stars", m=m)
        members = list(spec.enumerate_members())
        for c in range(1, m + 1):
            expect = tuple(
                sorted(self.pair_id(min(c, v), max(c, v), m) for v in range(1, m + 1) if v != c)
            )
            assert members[c - 1].indices == expect

    def test_clique_members_use_pair_numbering(self):
        spec = make_class("cliques", m=5, k=3)
        got = {s.indices for s in spec.enumerate_members()}
        expect = set()
        import itertools

        for vs in itertools.combinations(range(1, 6), 3):
            expect.add(tuple(sorted(self.pair_id(a, b, 5) for a, b in itertools.combinations(vs, 2))))
        assert got == expect

    def test_matching_identity_permutation_member(self):
        spec = make_class("matchings", m=4)
        # sigma = identity pairs left i with right i: bipartite ids (i-1)m + i
        assert next(spec.enumerate_members()).indices == (1, 6, 11, 16)

    def test_grid_first_member_is_top_left_square(self):
        spec = make_class("grid", sqrt_n=4, sqrt_K=2)
        assert next(spec.enumerate_members()).indices == (1, 2, 5, 6)


class TestSpanningTreeLaw:
    def test_every_enumerated_member_is_connected_acyclic(self):
        spec = make_class("trees", m=5)
        edges = complete_graph_edges(5)
        for s in spec.enumerate_members():
            adj = {v: [] for v in range(5)}
            for e in s.zero_based():
                a, b = edges[e]
                adj[a].append(b)
                adj[b].append(a)
            seen = {0}
            stack = [0]
            while stack:
                for w in adj[stack.pop()]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            assert len(seen) == 5 and len(s) == 4

    @pytest.mark.parametrize("m,expected", [(4, Fraction(2, 4)), (5, Fraction(2, 5))])
    def test_edge_frequency_is_two_over_m(self, m, expected):
        spec = make_class("trees", m=m)
        M = spec.member_matrix()
        counts = np.bincount(M.ravel(), minlength=spec.n)
        assert set(counts.tolist()) == {int(expected * spec.cardinality())}


class TestOverlapLaws:
    def test_pmf_matches_pair_enumeration(self, family):
        spec = small(family)
        pmf = spec.overlap_pmf()
        if pmf is None:
            assert family == "trees"
            return
        zs, probs = pmf
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        M = spec.member_matrix()
        N = M.shape[0]
        acc: dict[int, int] = {}
        for i in range(N):
            ov = np.isin(M, M[i]).sum(axis=1)
            for z in ov:
                acc[int(z)] = acc.get(int(z), 0) + 1
        brute_z = sorted(acc)
        brute_p = [acc[z] / N**2 for z in brute_z]
        assert list(zs) == brute_z
        np.testing.assert_allclose(probs, brute_p, atol=1e-12)

    def test_exact_mgf_matches_pair_enumeration(self):
        spec = small("cliques")
        mu = 0.45
        M = spec.member_matrix()
        N = M.shape[0]
        total = 0.0
        for i in range(N):
            ov = np.isin(M, M[i]).sum(axis=1)
            total += np.exp(mu * mu * ov).sum()
        assert exact_overlap_mgf(spec, mu) == pytest.approx(total / N**2, rel=1e-12)

    def test_trees_have_no_closed_form(self):
        assert exact_overlap_mgf(make_class("trees", m=4), 0.5) is None

    def test_estimator_is_exact_for_listed_families(self):
        for fam in ("disjoint", "stars", "matchings"):
            spec = small(fam)
            est, se = estimate_overlap_mgf(spec, 0.6, 50, SeededRng(3))
            assert se == 0.0
            assert est == pytest.approx(exact_overlap_mgf(spec, 0.6), rel=1e-12)

    def test_estimator_monte_carlo_tracks_exact_law(self):
        spec = make_class("ksets", n=10, K=3)
        exact = exact_overlap_mgf(spec, 0.5)
        est, se = estimate_overlap_mgf(spec, 0.5, 4000, SeededRng(8))
        assert se > 0
        assert abs(est - exact) < 5 * se

    def test_pair_sampler_draws_independent_members(self):
        spec = small("stars")
        samples = [sample_overlap_pair(spec, SeededRng(4).child(i)) for i in range(500)]
        zs = np.array([s.z for s in samples])
        # same-center pairs have overlap K, others exactly 1
        assert set(np.unique(zs)) <= {1, spec.K}
        frac_full = float(np.mean(zs == spec.K))
        assert abs(frac_full - 1 / 5) < 0.07


class TestSubclassDistance:
    def test_disjoint_distance_is_constant(self):
        spec = make_class("disjoint", N=6, K=3)
        t = estimate_tC(spec, 4, SeededRng(21))
        assert t == pytest.approx(math.sqrt(6.0))

    def test_stars_distance_is_constant(self):
        spec = make_class("stars", m=6)
        t = estimate_tC(spec, 6, SeededRng(22))  # forces the by-rank path, M = N
        assert t == pytest.approx(math.sqrt(2 * (spec.K - 1)))

    def test_rejection_path_is_reproducible(self):
        spec = make_class("ksets", n=30, K=5)
        a = estimate_tC(spec, 10, SeededRng(23))
        b = estimate_tC(spec, 10, SeededRng(23))
        assert a == b
        assert 0 < a <= math.sqrt(2 * spec.K)

    def test_oversized_subclass_is_refused(self):
        with pytest.raises(MTooLargeForClassError):
            estimate_tC(make_class("stars", m=5), 6, SeededRng(1))


class TestCapsAndExplicit:
    def test_member_matrix_respects_cap(self):
        spec = make_class("cliques", m=20, k=3)  # N = 1140
        with pytest.raises(CapExceededError) as exc:
            spec.member_matrix(cap=100)
        assert exc.value.cardinality == 1140
        assert exc.value.cap == 100
        assert spec.member_matrix(cap=2000).shape == (1140, 3)

    def test_default_cap_blocks_huge_classes(self):
        spec = make_class("ksets", n=100, K=10)
        with pytest.raises(CapExceededError):
            spec.member_matrix()

    def test_explicit_class_validation(self):
        a = IndexSet((1, 2), 6)
        b = IndexSet((3, 4), 6)
        spec = ExplicitClass(6, [b, a])
        assert [s.indices for s in spec.enumerate_members()] == [(1, 2), (3, 4)]
        assert spec.contains(a) and not spec.contains(IndexSet((1, 3), 6))
        with pytest.raises(ValueError):
            ExplicitClass(6, [a, a])
        with pytest.raises(ValueError):
            ExplicitClass(6, [a, IndexSet((1, 2, 3), 6)])
        with pytest.raises(ValueError):
            ExplicitClass(7, [a])
        with pytest.raises(ValueError):
            ExplicitClass(6, [])

    def test_symmetry_flags(self):
        assert make_class("ksets", n=5, K=2).is_symmetric
        assert make_class("stars", m=4).is_symmetric
        assert make_class("matchings", m=3).is_symmetric
        assert make_class("cliques", m=5, k=3).is_symmetric
        assert make_class("disjoint", N=3, K=2).is_symmetric
        assert not make_class("trees", m=4).is_symmetric
        assert not make_class("grid", sqrt_n=3, sqrt_K=2).is_symmetric
