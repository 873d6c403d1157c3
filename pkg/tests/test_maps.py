"""Labeled trees, the corner-linking bijection, and hull extraction."""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from brownian_hulls.errors import ConfigError, DomainError, StructureError
from brownian_hulls.maps import (
    LabeledTree,
    canonical_code,
    growth_stats,
    hull_series,
    sample_labeled_tree,
    schaeffer,
    tree_from_contour,
    tree_geodesic_min_label,
    _hull_radii,
)
from brownian_hulls.rng import substream


def dyck_words(n):
    def rec(ups, downs, prefix):
        if ups == 0 and downs == 0:
            yield prefix
            return
        if ups > 0:
            yield from rec(ups - 1, downs, prefix + [1])
        if downs > ups:
            yield from rec(ups, downs - 1, prefix + [-1])

    yield from rec(n, n, [])


def all_labeled_trees(n):
    for w in dyck_words(n):
        for incs in itertools.product((-1, 0, 1), repeat=n):
            yield tree_from_contour(w, incs)


def rooted_quad_count(n):
    return 2 * 3 ** n * math.comb(2 * n, n) // (n + 1) // (n + 2)


class TestTreeSampler:
    def test_single_edge_label_distribution(self):
        # the non-root label is uniform on {0, 1, 2}; well-labeled keeps {1, 2}
        counts = {0: 0, 1: 0, 2: 0}
        for i in range(3000):
            t = sample_labeled_tree(1, "free-pointed", seed=2, stream_index=i)
            counts[int(t.label[1])] += 1
        for v in counts.values():
            assert abs(v - 1000) < 4 * math.sqrt(3000 * (1 / 3) * (2 / 3))

    def test_well_labeled_accepts_positive(self):
        for i in range(200):
            t = sample_labeled_tree(1, "well-labeled", seed=3, stream_index=i)
            assert int(t.label[1]) in (1, 2)

    def test_acceptance_rate_small_n_exact(self):
        # acceptance probability is 2/(n+2); at n=1 that is 2/3
        draws = 400
        attempts = sum(
            sample_labeled_tree(1, "well-labeled", seed=5, stream_index=i).attempts
            for i in range(draws)
        )
        p_hat = draws / attempts
        se = math.sqrt((2 / 3) * (1 / 3) / attempts) / (2 / 3) * (2 / 3)
        assert p_hat == pytest.approx(2 / 3, abs=4 * se + 0.02)

    def test_acceptance_rate_n100(self):
        draws = 60
        attempts = sum(
            sample_labeled_tree(100, "well-labeled", seed=7, stream_index=i).attempts
            for i in range(draws)
        )
        p, p_hat = 2 / 102, draws / attempts
        rel_se = math.sqrt((1 - p) / (p * attempts) * p) / p  # geometric-count delta rule
        assert p_hat == pytest.approx(p, rel=3.5 * rel_se)

    def test_uniformity_exhaustive_n3(self):
        # chi-squared against the uniform law over all well-labeled trees
        keys = {}
        for t in all_labeled_trees(3):
            if t.label.min() >= 1:
                key = (tuple(t.corner_vertex.tolist()), tuple(t.label.tolist()))
                keys[key] = 0
        assert len(keys) == 54
        per = 150
        draws = per * len(keys)
        for i in range(draws):
            t = sample_labeled_tree(3, "well-labeled", seed=11, stream_index=i)
            keys[(tuple(t.corner_vertex.tolist()), tuple(t.label.tolist()))] += 1
        res = stats.chisquare(list(keys.values()))
        assert res.pvalue > 1e-3

    def test_free_variant_uniform_n2(self):
        keys = {}
        for t in all_labeled_trees(2):
            keys[(tuple(t.corner_vertex.tolist()), tuple(t.label.tolist()))] = 0
        assert len(keys) == 18  # Cat(2)=2 trees x 9 labelings
        for i in range(18 * 150):
            t = sample_labeled_tree(2, "free-pointed", seed=13, stream_index=i)
            keys[(tuple(t.corner_vertex.tolist()), tuple(t.label.tolist()))] += 1
        assert stats.chisquare(list(keys.values())).pvalue > 1e-3

    def test_validation_and_errors(self):
        with pytest.raises(DomainError):
            sample_labeled_tree(0, "well-labeled", seed=1)
        with pytest.raises(ConfigError):
            sample_labeled_tree(3, "mislabeled", seed=1)
        with pytest.raises(ConfigError):
            tree_from_contour([1, 1, -1, -1], [1])  # one increment per edge


class TestBijection:
    def test_single_edge_images(self):
        q = schaeffer(tree_from_contour([1, -1], [1]))  # labels (1, 2)
        assert q.n_faces == 1 and q.n_vertices == 3 and q.n_edges == 2
        assert list(q.face_vertices[0]) == [1, 0, 1, 2]
        q2 = schaeffer(tree_from_contour([1, -1], [0]))  # labels (1, 1)
        assert sorted(q2.face_vertices[0].tolist()) == [0, 0, 1, 2]

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_exhaustive_enumeration(self, n):
        codes = {}
        total = 0
        for t in all_labeled_trees(n):
            if t.label.min() < 1:
                continue
            total += 1
            q = schaeffer(t)  # internal validation: structure + distance=label
            code = canonical_code(q)
            codes[code] = codes.get(code, 0) + 1
        expected = rooted_quad_count(n)
        assert total == expected
        assert len(codes) == expected
        assert set(codes.values()) == {1}

    def test_distance_equals_label_random_maps(self):
        for i in range(20):
            variant = "well-labeled" if i % 2 == 0 else "free-pointed"
            t = sample_labeled_tree(1000, variant, seed=17, stream_index=i)
            q = schaeffer(t)
            shift = q.meta["label_shift"]
            assert np.array_equal(q.dist[1:], t.label + shift)
            q.validate()  # face degrees, Euler, bipartite, edge parity

    def test_free_pointed_distance_offset(self):
        t = sample_labeled_tree(500, "free-pointed", seed=19)
        q = schaeffer(t)
        assert q.meta["label_shift"] == 1 - int(t.label.min())
        assert q.dist[1:].min() == 1


class TestHullSeries:
    def test_single_face_map_whole(self):
        q = schaeffer(tree_from_contour([1, -1], [1]))
        hs = hull_series(q, k_max=1)
        assert hs.hull_faces[0] == 1 and hs.ball_faces[0] == 1
        assert hs.hull_vertices[0] == 3
        assert hs.boundary_edges[0] == 0

    def test_k_max_too_large(self):
        q = schaeffer(tree_from_contour([1, -1], [1]))  # max distance 2
        with pytest.raises(DomainError):
            hull_series(q, k_max=2)

    def test_monotone_and_sandwiched(self):
        for i in range(10):
            t = sample_labeled_tree(2000, "free-pointed", seed=23, stream_index=i)
            q = schaeffer(t)
            k_max = int(q.dist.max()) - 1
            hs = hull_series(q, k_max=k_max)
            assert np.all(np.diff(hs.hull_faces) >= 0)
            assert np.all(hs.ball_faces <= hs.hull_faces)
            assert np.all(hs.hull_vertices >= hs.hull_faces)  # n faces -> n+2 verts overall
            assert np.all(
                hs.hull_vertices <= hs.hull_faces + hs.boundary_edges + 2
            )

    def test_idempotent_filling(self):
        # filling the hull again changes nothing: every complement
        # component of the hull contains the marker component
        t = sample_labeled_tree(2000, "free-pointed", seed=29)
        q = schaeffer(t)
        radii = _hull_radii(q)
        neighbor = q.face_of[np.arange(len(q.face_of)) ^ 1].reshape(q.n_faces, 4)
        for k in (2, 4):
            hull = radii.hull_radius <= k
            outside = np.flatnonzero(~hull)
            if outside.size == 0:
                continue
            # flood the complement from the marker's faces; all must be reached
            marker_faces = [
                int(q.face_of[h])
                for h in np.flatnonzero(q.halfedge_origin == radii.marker_vertex)
            ]
            seen = np.zeros(q.n_faces, dtype=bool)
            stack = [f for f in marker_faces if not hull[f]]
            for f in stack:
                seen[f] = True
            while stack:
                f = stack.pop()
                for g in neighbor[f]:
                    if not hull[g] and not seen[g]:
                        seen[g] = True
                        stack.append(int(g))
            assert np.all(seen[outside])

    def test_cactus_sandwich_with_marker(self):
        # vertices whose tree-geodesic minimum toward the marker is <= k lie
        # in the hull; those with minimum >= k+3 lie outside (away from the
        # marker's neighborhood)
        for i in range(6):
            t = sample_labeled_tree(3000, "well-labeled", seed=31, stream_index=i)
            q = schaeffer(t)
            radii = _hull_radii(q)
            marker_tree = radii.marker_vertex - 1  # quad id -> tree id
            m_u = tree_geodesic_min_label(t, marker_tree)
            vertex_hull_k = radii.vertex_hull_radius[1:]  # tree vertices
            # map-distance exclusion zone around the marker
            from collections import deque

            adj = [[] for _ in range(q.n_vertices)]
            for u, w in q.edge_endpoints():
                adj[u].append(w)
                adj[w].append(u)
            distm = np.full(q.n_vertices, -1)
            distm[radii.marker_vertex] = 0
            dq = deque([radii.marker_vertex])
            while dq:
                u = dq.popleft()
                for w in adj[u]:
                    if distm[w] < 0:
                        distm[w] = distm[u] + 1
                        dq.append(w)
            for k in (3, 5):
                far_enough = distm[1:] > 2 * k
                inside = (m_u <= k) & far_enough
                outside = (m_u >= k + 3) & far_enough
                assert np.all(vertex_hull_k[inside] <= k)
                assert np.all(vertex_hull_k[outside] > k)


class TestGrowthStats:
    def test_degenerate_grid(self):
        gs = growth_stats(4, 300, [1], seed=37)
        assert gs.slope is None
        assert gs.mean_hull_faces[0] > 0

    def test_small_ensemble_fields(self):
        gs = growth_stats(6, 2000, [2, 3, 4], seed=41)
        assert gs.mean_hull_faces.shape == (3,)
        assert gs.boundary_sample.shape == (6,)
        assert gs.slope is not None
        rows = gs.rows()
        assert rows[0]["k"] == 2 and "mean_hull_faces" in rows[0]

    def test_desk_scale_exponent(self):
        gs = growth_stats(12, 20_000, range(3, 13), seed=43)
        assert 3.0 <= gs.slope <= 5.5  # loose band at small size
