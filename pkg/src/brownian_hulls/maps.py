"""Finite random quadrangulations via corner-linked labeled trees.

A plane tree with n edges and integer labels (root label 1, increments in
{-1, 0, +1} along edges) is turned into a rooted quadrangulation with n
faces and n + 2 vertices by the classical corner-linking rule: enumerate
the 2n corners in contour order, link every corner whose (shifted) label
exceeds 1 to the last preceding corner with strictly smaller label, and
link label-1 corners to a fresh vertex ``origin``.  Graph distance from
``origin`` then equals the shifted label.

The construction is carried out on an explicit half-edge embedding so that
faces come out as genuine 4-walks: the linking chords are mutually
non-crossing in the disk cut along the contour, which pins the rotation
order of edge ends around every vertex (incoming chords by source corner,
outgoing chord last, corners traversed in reverse contour order; around
``origin``, minimum corners in contour order).  Faces are the orbits of
the face permutation of that embedding, and the builder verifies that
every orbit has length four.

Hulls: the ball of radius k is the set of faces incident to a vertex at
distance <= k - 1; the hull additionally absorbs every connected component
of the complement except the one containing a marker vertex of maximal
distance (the stand-in for infinity on a finite map).  Both are encoded by
two per-face radii: the ball entry radius, and the bottleneck radius
M(f) = min over face paths to the marker of the maximal ball entry radius
en route; face f belongs to the hull of radius k exactly when M(f) <= k,
which yields every hull count in one sweep.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ConfigError, DomainError, StructureError
from .rng import substream

VARIANTS = ("free-pointed", "well-labeled")


@dataclass
class LabeledTree:
    """Plane tree with vertex labels and its contour corner sequence.

    Vertices are numbered in creation (contour) order with root 0.
    ``corner_vertex[i]`` is the vertex sitting at the i-th contour corner;
    there are exactly 2 * n_edges corners.
    """

    parent: np.ndarray
    label: np.ndarray
    corner_vertex: np.ndarray
    variant: str = "well-labeled"
    attempts: int = 1  # rejection attempts consumed to produce this tree

    @property
    def n_edges(self) -> int:
        return len(self.parent) - 1

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    def validate(self) -> None:
        if self.label[0] != 1:
            raise StructureError("root label must be 1")
        diffs = np.abs(self.label[1:] - self.label[self.parent[1:]])
        if diffs.size and diffs.max() > 1:
            raise StructureError("adjacent labels must differ by at most 1")
        if self.variant == "well-labeled" and self.label.min() < 1:
            raise StructureError("well-labeled tree has a label below 1")
        if len(self.corner_vertex) != 2 * self.n_edges and self.n_edges > 0:
            raise StructureError("corner sequence must have 2 n_edges entries")


def tree_from_contour(steps, increments) -> LabeledTree:
    """Build a labeled tree from its contour word and per-edge increments.

    ``steps``: sequence of +1 (descend into a new child) / -1 (return to
    the parent) forming a Dyck word; ``increments``: label change of each
    new edge, consumed in creation order.
    """
    steps = np.asarray(steps, dtype=int)
    n = steps.size // 2
    if steps.size != 2 * n or steps.sum() != 0 or np.any(np.cumsum(steps) < 0):
        raise ConfigError("steps must form a Dyck word")
    increments = list(increments)
    if len(increments) != n:
        raise ConfigError("need one increment per edge")
    parent = [-1]
    label = [1]
    corner = np.empty(2 * n, dtype=np.int64)
    stack = [0]
    nxt = 1
    ei = 0
    for i, s in enumerate(steps):
        corner[i] = stack[-1]
        if s == 1:
            parent.append(stack[-1])
            label.append(label[stack[-1]] + increments[ei])
            ei += 1
            stack.append(nxt)
            nxt += 1
        else:
            stack.pop()
    return LabeledTree(
        parent=np.asarray(parent, dtype=np.int64),
        label=np.asarray(label, dtype=np.int64),
        corner_vertex=corner,
    )


def _random_dyck(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform Dyck word of semilength n by the cycle lemma.

    A uniform arrangement of n up-steps and n+1 down-steps has exactly one
    cyclic rotation that stays nonnegative until the final step; dropping
    that final down-step leaves a uniform Dyck word.
    """
    w = np.concatenate([np.ones(n, dtype=np.int64), -np.ones(n + 1, dtype=np.int64)])
    rng.shuffle(w)
    k = int(np.argmin(np.cumsum(w)))  # first position attaining the minimum
    w = np.roll(w, -(k + 1))
    return w[:-1]


def sample_labeled_tree(
    n_edges: int,
    variant: str = "well-labeled",
    seed: int = 0,
    stream_index: int = 0,
    max_attempts: int | None = None,
) -> LabeledTree:
    """Uniform labeled plane tree with ``n_edges`` edges.

    ``free-pointed``: uniform tree and i.i.d. uniform {-1, 0, +1} edge
    increments from root label 1, no constraint.  ``well-labeled``:
    rejection until all labels are >= 1 (acceptance probability
    2 / (n_edges + 2)); both tree and labels are redrawn on rejection.
    Rejected attempts abort as soon as a label drops below 1.
    """
    if n_edges < 1:
        raise DomainError(f"n_edges must be >= 1, got {n_edges}")
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}")
    rng = substream(seed, stream_index)
    if max_attempts is None:
        max_attempts = 60 * (n_edges + 2)
    attempts = 0
    while True:
        attempts += 1
        if attempts > max_attempts:
            raise BudgetError(f"rejection budget {max_attempts} exhausted")
        steps = _random_dyck(rng, n_edges)
        incs = rng.integers(-1, 2, size=n_edges)
        if variant == "free-pointed":
            tree = tree_from_contour(steps, incs)
            tree.variant = variant
            tree.attempts = attempts
            return tree
        built = _build_well_labeled(steps, incs)
        if built is not None:
            built.variant = variant
            built.attempts = attempts
            return built


def _build_well_labeled(steps: np.ndarray, incs: np.ndarray) -> LabeledTree | None:
    """Build a tree, aborting early if any label drops below 1."""
    n = steps.size // 2
    parent = [-1]
    label = [1]
    corner = np.empty(2 * n, dtype=np.int64)
    stack = [0]
    nxt = 1
    ei = 0
    for i in range(steps.size):
        corner[i] = stack[-1]
        if steps[i] == 1:
            lab = label[stack[-1]] + incs[ei]
            if lab < 1:
                return None
            ei += 1
            parent.append(stack[-1])
            label.append(lab)
            stack.append(nxt)
            nxt += 1
        else:
            stack.pop()
    return LabeledTree(
        parent=np.asarray(parent, dtype=np.int64),
        label=np.asarray(label, dtype=np.int64),
        corner_vertex=corner,
    )


# ---------------------------------------------------------------------------
# Corner linking
# ---------------------------------------------------------------------------


@dataclass
class Quadrangulation:
    """Rooted quadrangulation with its embedding and distances.

    Vertex 0 is the distinguished vertex ``origin``; tree vertex v maps to
    quadrangulation vertex v + 1.  Half-edges: arc a (one per corner) owns
    half-edges 2a (at its source corner) and 2a + 1 (at its target); twins
    are h ^ 1.  ``sigma_next[h]`` is the next half-edge counterclockwise
    around the origin vertex of h, and faces are the orbits of
    h -> sigma_next[h ^ 1].
    """

    n_faces: int
    origin_vertex: int
    halfedge_origin: np.ndarray      # (4 n_faces,) vertex at each half-edge
    sigma_next: np.ndarray           # (4 n_faces,) rotation successor
    face_vertices: np.ndarray        # (n_faces, 4) vertex walk of each face
    face_of: np.ndarray              # (4 n_faces,) face id of each half-edge
    dist: np.ndarray                 # BFS distance from origin_vertex
    root_halfedge: int
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.dist)

    @property
    def n_edges(self) -> int:
        return len(self.halfedge_origin) // 2

    def edge_endpoints(self) -> np.ndarray:
        """(n_edges, 2) array of arc endpoints."""
        return self.halfedge_origin.reshape(-1, 2)

    def validate(self) -> None:
        if self.n_vertices != self.n_faces + 2:
            raise StructureError("vertex count must be n_faces + 2")
        if self.n_edges != 2 * self.n_faces:
            raise StructureError("edge count must be 2 n_faces")
        ends = self.edge_endpoints()
        parity = (self.dist[ends[:, 0]] + self.dist[ends[:, 1]]) % 2
        if np.any(parity == 0):
            raise StructureError("an edge joins vertices of equal distance parity")
        if np.any(np.abs(self.dist[ends[:, 0]] - self.dist[ends[:, 1]]) != 1):
            raise StructureError("edges must join consecutive distance levels")
        if self.dist[self.origin_vertex] != 0:
            raise StructureError("origin must be at distance 0")


def schaeffer(tree: LabeledTree) -> Quadrangulation:
    """Corner-linking construction from a labeled tree.

    Labels are shifted to ``l - min(l) + 1`` in the free-pointed variant
    (no-op for well-labeled trees, whose minimum is 1).  Every corner with
    shifted label 1 is linked to ``origin``; every other corner to the last
    preceding corner, in cyclic contour order, with strictly smaller label.
    The output has n faces and n + 2 vertices, and the graph distance from
    ``origin`` equals the shifted label everywhere.
    """
    tree.validate()
    n = tree.n_edges
    if n < 1:
        raise DomainError("tree must have at least one edge")
    shift = 1 - int(tree.label.min())
    labels = tree.label + shift
    two_n = 2 * n

    # Rotate the corner sequence to start at a minimum-label corner: the
    # cyclic "last preceding smaller corner" then never wraps.
    clab_raw = labels[tree.corner_vertex]
    start = int(np.argmax(clab_raw == 1))
    cv = np.roll(tree.corner_vertex, -start)
    clab = clab_raw if start == 0 else np.roll(clab_raw, -start)

    # pred[i]: corner receiving the arc of corner i; -1 encodes origin.
    pred = np.full(two_n, -1, dtype=np.int64)
    last_seen: dict[int, int] = {}
    for i in range(two_n):
        li = int(clab[i])
        if li > 1:
            j = last_seen.get(li - 1)
            if j is None:
                raise StructureError("corner with label > 1 lacks a smaller predecessor")
            pred[i] = j
        last_seen[li] = i

    # Per-corner incoming arcs, ascending source position (nesting order).
    in_arcs: list[list[int]] = [[] for _ in range(two_n)]
    for i in range(two_n):
        if pred[i] >= 0:
            in_arcs[pred[i]].append(i)

    # Corners of each tree vertex in contour order.
    n_v = tree.n_vertices + 1  # + origin
    corners_of: list[list[int]] = [[] for _ in range(tree.n_vertices)]
    for i in range(two_n):
        corners_of[cv[i]].append(i)

    # Rotation: around a tree vertex, corners in reverse contour order,
    # within a corner incoming ends by ascending source then the outgoing
    # end; around origin, the minimum corners in contour order.
    n_h = 4 * n
    sigma_next = np.empty(n_h, dtype=np.int64)
    origin_he = np.empty(n_h, dtype=np.int64)
    for v in range(tree.n_vertices):
        cycle: list[int] = []
        for c in reversed(corners_of[v]):
            cycle.extend(2 * a + 1 for a in in_arcs[c])
            cycle.append(2 * c)
        for pos, h in enumerate(cycle):
            sigma_next[h] = cycle[(pos + 1) % len(cycle)]
            origin_he[h] = v + 1
    origin_cycle = [2 * i + 1 for i in range(two_n) if pred[i] < 0 and clab[i] == 1]
    for pos, h in enumerate(origin_cycle):
        sigma_next[h] = origin_cycle[(pos + 1) % len(origin_cycle)]
        origin_he[h] = 0

    # Faces: orbits of h -> sigma_next[h ^ 1]; all must have length 4.
    face_of = np.full(n_h, -1, dtype=np.int64)
    face_vertices = np.empty((n, 4), dtype=np.int64)
    fid = 0
    for h0 in range(n_h):
        if face_of[h0] >= 0:
            continue
        if fid >= n:
            raise StructureError("more faces than tree edges")
        walk = []
        h = h0
        for _ in range(4):
            face_of[h] = fid
            walk.append(origin_he[h])
            h = sigma_next[h ^ 1]
        if h != h0:
            raise StructureError("face orbit is not a 4-cycle")
        face_vertices[fid] = walk
        fid += 1
    if fid != n:
        raise StructureError(f"expected {n} faces, traced {fid}")

    dist = _bfs_distances(origin_he, n_v)
    if np.any(dist[1:] != labels):
        raise StructureError("graph distance does not equal the shifted label")

    root_corner = (0 - start) % two_n  # the tree's root corner, post-rotation
    quad = Quadrangulation(
        n_faces=n,
        origin_vertex=0,
        halfedge_origin=origin_he,
        sigma_next=sigma_next,
        face_vertices=face_vertices,
        face_of=face_of,
        dist=dist,
        root_halfedge=2 * root_corner,
        meta={"variant": tree.variant, "label_shift": shift},
    )
    quad.validate()
    return quad


def _bfs_distances(origin_he: np.ndarray, n_v: int) -> np.ndarray:
    adj: list[list[int]] = [[] for _ in range(n_v)]
    ends = origin_he.reshape(-1, 2)
    for u, w in ends:
        adj[u].append(w)
        adj[w].append(u)
    dist = np.full(n_v, -1, dtype=np.int64)
    dist[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    if np.any(dist < 0):
        raise StructureError("quadrangulation is not connected")
    return dist


def canonical_code(quad: Quadrangulation) -> tuple:
    """Isomorphism-invariant code of the rooted embedded map.

    Relabels half-edges in first-visit order of the walk generated by the
    rotation and twin permutations from the root half-edge, then writes
    both permutations in that labeling.  Equal codes mean equal rooted
    maps.
    """
    n_h = len(quad.sigma_next)
    order = np.full(n_h, -1, dtype=np.int64)
    order[quad.root_halfedge] = 0
    found = 1
    pos = 0
    seq = [quad.root_halfedge]
    while pos < len(seq):
        h = seq[pos]
        pos += 1
        for g in (int(quad.sigma_next[h]), h ^ 1):
            if order[g] < 0:
                order[g] = found
                found += 1
                seq.append(g)
    if found != n_h:
        raise StructureError("root half-edge does not reach the whole map")
    inv = np.empty(n_h, dtype=np.int64)
    inv[order] = np.arange(n_h)
    code = []
    for new in range(n_h):
        h = int(inv[new])
        code.append((int(order[quad.sigma_next[h]]), int(order[h ^ 1])))
    return tuple(code)


# ---------------------------------------------------------------------------
# Balls and hulls
# ---------------------------------------------------------------------------


@dataclass
class HullSeries:
    """Per-radius ball and hull sizes of one quadrangulation."""

    k: np.ndarray
    ball_faces: np.ndarray
    hull_faces: np.ndarray
    hull_vertices: np.ndarray
    boundary_edges: np.ndarray
    marker_vertex: int

    def write_csv(self, path: str) -> None:
        from .csbp import _atomic_write, _csv_bytes

        rows = zip(self.k, self.ball_faces, self.hull_faces, self.hull_vertices, self.boundary_edges)
        _atomic_write(
            path,
            _csv_bytes(
                ["k", "ball_faces", "hull_faces", "hull_vertices", "boundary_edges"],
                ([int(a), int(b), int(c), int(d), int(e)] for a, b, c, d, e in rows),
            ),
        )


@dataclass
class _HullRadii:
    """Per-face entry radii; everything else is bincount arithmetic."""

    ball_radius: np.ndarray    # face enters the ball at this k
    hull_radius: np.ndarray    # face enters the hull at this k (bottleneck)
    vertex_hull_radius: np.ndarray
    marker_vertex: int


def _choose_marker(dist: np.ndarray) -> int:
    # smallest-id vertex at maximal distance: deterministic stand-in for
    # infinity; any far vertex works, ids break ties reproducibly
    return int(np.argmax(dist == dist.max()))


def _hull_radii(quad: Quadrangulation) -> _HullRadii:
    n = quad.n_faces
    fv = quad.face_vertices
    ball_r = quad.dist[fv].min(axis=1) + 1

    marker = _choose_marker(quad.dist)
    # faces incident to the marker seed the escape flood
    seed_mask = np.zeros(n, dtype=bool)
    for h in np.flatnonzero(quad.halfedge_origin == marker):
        seed_mask[quad.face_of[h]] = True
        seed_mask[quad.face_of[h ^ 1]] = True  # faces on both sides of incident edges
    seeds = np.flatnonzero(seed_mask)

    # widest-path flood: M(f) = max over face paths to a seed of the
    # minimum ball radius along the path; f is outside the hull of radius
    # k exactly when M(f) > k
    neighbor = quad.face_of[np.arange(len(quad.face_of)) ^ 1].reshape(n, 4)
    m_val = np.full(n, -1, dtype=np.int64)
    heap = [(-int(ball_r[f]), int(f)) for f in seeds]
    for negv, f in heap:
        m_val[f] = -negv
    heapq.heapify(heap)
    while heap:
        negv, f = heapq.heappop(heap)
        v = -negv
        if v < m_val[f]:
            continue
        for g in neighbor[f]:
            cand = min(v, int(ball_r[g]))
            if cand > m_val[g]:
                m_val[g] = cand
                heapq.heappush(heap, (-cand, int(g)))
    if np.any(m_val < 0):
        raise StructureError("dual graph is not connected")

    vertex_r = np.full(quad.n_vertices, np.iinfo(np.int64).max)
    for j in range(4):
        np.minimum.at(vertex_r, fv[:, j], m_val)
    return _HullRadii(ball_r, m_val, vertex_r, marker)


def hull_series(quad: Quadrangulation, k_max: int) -> HullSeries:
    """Ball, hull, vertex, and boundary counts for k = 1, ..., k_max.

    Requires ``k_max`` below the maximal distance so that the complement of
    every ball is nonempty and the outer marker stays outside.
    """
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    if k_max >= quad.dist.max():
        raise DomainError(
            f"k_max={k_max} must be below the maximal distance {int(quad.dist.max())}"
        )
    radii = _hull_radii(quad)
    ks = np.arange(1, k_max + 1)
    ball = np.cumsum(np.bincount(radii.ball_radius, minlength=k_max + 2)[: k_max + 1])[1:]
    hull = np.cumsum(np.bincount(radii.hull_radius, minlength=k_max + 2)[: k_max + 1])[1:]
    vr = radii.vertex_hull_radius
    vr = vr[vr <= k_max]
    verts = np.cumsum(np.bincount(vr, minlength=k_max + 2)[: k_max + 1])[1:]
    boundary = _boundary_counts(quad, radii.hull_radius, k_max)
    return HullSeries(
        k=ks,
        ball_faces=ball,
        hull_faces=hull,
        hull_vertices=verts,
        boundary_edges=boundary,
        marker_vertex=radii.marker_vertex,
    )


def _boundary_counts(quad: Quadrangulation, hull_radius: np.ndarray, k_max: int) -> np.ndarray:
    """boundary_edges[k] = edges with exactly one side in the hull of radius k."""
    h = np.arange(0, len(quad.face_of), 2)
    f1 = hull_radius[quad.face_of[h]]
    f2 = hull_radius[quad.face_of[h + 1]]
    lo = np.minimum(f1, f2)
    hi = np.maximum(f1, f2)
    # an edge is on the boundary for k in [lo, hi)
    diff = np.zeros(k_max + 2, dtype=np.int64)
    lo_c = np.clip(lo, 0, k_max + 1)
    hi_c = np.clip(hi, 0, k_max + 1)
    np.add.at(diff, lo_c, 1)
    np.add.at(diff, hi_c, -1)
    return np.cumsum(diff)[1 : k_max + 1]


def tree_geodesic_min_label(tree: LabeledTree, target: int) -> np.ndarray:
    """Minimum label on the tree path from each vertex to ``target``.

    ``target`` is a tree vertex id; labels are the tree's shifted labels
    when the tree is free-pointed (shift applied by the caller if needed).
    """
    n_v = tree.n_vertices
    # ancestor path of the target, walked explicitly
    anc_path = []
    u = target
    while u != -1:
        anc_path.append(u)
        u = int(tree.parent[u]) if u != 0 else -1
    anc_index = {v: i for i, v in enumerate(anc_path)}
    anc_labels = tree.label[np.asarray(anc_path)]
    # prefix_min[i] = min label on the path target .. anc_path[i]
    prefix_min = np.minimum.accumulate(anc_labels)

    out = np.empty(n_v, dtype=np.int64)
    for v in range(n_v):
        u = v
        m = int(tree.label[v])
        while u not in anc_index:
            u = int(tree.parent[u])
            m = min(m, int(tree.label[u]))
        out[v] = min(m, int(prefix_min[anc_index[u]]))
    return out


# ---------------------------------------------------------------------------
# Ensemble statistics
# ---------------------------------------------------------------------------


@dataclass
class GrowthStats:
    """Ensemble growth statistics of hulls on finite quadrangulations.

    ``slope`` is the headline growth exponent: a log-log fit of the
    GEOMETRIC mean hull size against k, restricted to the bulk window where
    that curve stays below ``bulk_fraction`` of the map.  The growth law
    only holds well inside the bulk: on a finite sphere the arithmetic mean
    is dominated by maps whose ball complement splits into two macroscopic
    lobes, one of which is swallowed, and the top of the k range saturates
    the map; the geometric mean is insensitive to both and its fitted slope
    is stable against the guard choice.  The unrestricted arithmetic-mean
    fit is kept in ``slope_mean_full`` for comparison.
    """

    k: np.ndarray
    mean_hull_faces: np.ndarray
    se_hull_faces: np.ndarray
    geomean_hull_faces: np.ndarray
    median_hull_faces: np.ndarray
    mean_ball_faces: np.ndarray
    mean_hull_vertices: np.ndarray
    mean_boundary_edges: np.ndarray
    se_boundary_edges: np.ndarray
    slope: float | None
    intercept: float | None
    slope_mean_full: float | None
    fit_k: np.ndarray | None
    boundary_k: int
    boundary_sample: np.ndarray
    rescaled_boundary_quantiles: dict
    hull_ball_ratio: float

    def rows(self) -> list[dict]:
        out = []
        for i, k in enumerate(self.k):
            out.append(
                {
                    "k": int(k),
                    "mean_hull_faces": float(self.mean_hull_faces[i]),
                    "se_hull_faces": float(self.se_hull_faces[i]),
                    "geomean_hull_faces": float(self.geomean_hull_faces[i]),
                    "median_hull_faces": float(self.median_hull_faces[i]),
                    "mean_ball_faces": float(self.mean_ball_faces[i]),
                    "mean_hull_vertices": float(self.mean_hull_vertices[i]),
                    "mean_boundary_edges": float(self.mean_boundary_edges[i]),
                    "se_boundary_edges": float(self.se_boundary_edges[i]),
                }
            )
        return out


def growth_stats(
    samples: int,
    n_faces: int,
    k_grid,
    seed: int = 0,
    variant: str = "free-pointed",
    boundary_k: int | None = None,
    bulk_fraction: float = 0.1,
) -> GrowthStats:
    """Hull growth statistics over an ensemble of uniform quadrangulations.

    For each map the per-face radii are computed once and every requested k
    is read off by counting.  The growth exponent is fitted on the median
    hull size over the bulk window {k: median <= bulk_fraction * n_faces}
    (see :class:`GrowthStats`); the boundary-length sample is taken at
    ``boundary_k``, by default the grid point nearest to n_faces**0.25 / 2,
    safely inside the bulk, and is returned for unit-mean shape
    comparisons.
    """
    k_grid = np.asarray(sorted(int(k) for k in k_grid), dtype=np.int64)
    if k_grid.size == 0 or k_grid[0] < 1:
        raise ConfigError("k_grid must contain positive integers")
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    k_top = int(k_grid[-1])
    if boundary_k is None:
        target = 0.5 * n_faces ** 0.25
        boundary_k = int(k_grid[int(np.argmin(np.abs(k_grid - target)))])

    hull_counts = np.empty((samples, k_grid.size))
    ball_counts = np.empty((samples, k_grid.size))
    vert_counts = np.empty((samples, k_grid.size))
    bnd_counts = np.empty((samples, k_grid.size))
    bnd_sample = np.empty(samples)
    for s in range(samples):
        tree = sample_labeled_tree(n_faces, variant=variant, seed=seed, stream_index=s)
        quad = schaeffer(tree)
        radii = _hull_radii(quad)
        hull_counts[s] = _counts_at(radii.hull_radius, k_grid)
        ball_counts[s] = _counts_at(radii.ball_radius, k_grid)
        vert_counts[s] = _counts_at(radii.vertex_hull_radius, k_grid)
        bnd = _boundary_counts(quad, radii.hull_radius, k_top)
        bnd_counts[s] = bnd[k_grid - 1]
        bnd_sample[s] = bnd[boundary_k - 1]

    mean_h = hull_counts.mean(axis=0)
    se_h = hull_counts.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.zeros_like(mean_h)
    med_h = np.median(hull_counts, axis=0)
    gm_h = np.exp(np.log(hull_counts).mean(axis=0))
    mean_bnd = bnd_counts.mean(axis=0)
    se_bnd = bnd_counts.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 else np.zeros_like(mean_bnd)

    slope = intercept = slope_mean = None
    fit_k = None
    if k_grid.size >= 2:
        slope_mean = float(np.polyfit(np.log(k_grid.astype(float)), np.log(mean_h), 1)[0])
        bulk = gm_h <= bulk_fraction * n_faces
        if bulk.sum() < 3:
            bulk = np.zeros_like(bulk)
            bulk[: min(3, k_grid.size)] = True
        fit_k = k_grid[bulk]
        coeffs = np.polyfit(np.log(fit_k.astype(float)), np.log(gm_h[bulk]), 1)
        slope, intercept = float(coeffs[0]), float(coeffs[1])

    rescaled = bnd_sample / bnd_sample.mean() if bnd_sample.mean() > 0 else bnd_sample
    quantiles = {
        "q10": float(np.quantile(rescaled, 0.10)),
        "q25": float(np.quantile(rescaled, 0.25)),
        "q50": float(np.quantile(rescaled, 0.50)),
        "q75": float(np.quantile(rescaled, 0.75)),
        "q90": float(np.quantile(rescaled, 0.90)),
    }
    mean_ball = ball_counts.mean(axis=0)
    ref = int(np.argmin(np.abs(k_grid - boundary_k)))
    ratio = float(mean_h[ref] / mean_ball[ref]) if mean_ball[ref] > 0 else float("nan")
    return GrowthStats(
        k=k_grid,
        mean_hull_faces=mean_h,
        se_hull_faces=se_h,
        geomean_hull_faces=gm_h,
        median_hull_faces=med_h,
        mean_ball_faces=mean_ball,
        mean_hull_vertices=vert_counts.mean(axis=0),
        mean_boundary_edges=mean_bnd,
        se_boundary_edges=se_bnd,
        slope=slope,
        intercept=intercept,
        slope_mean_full=slope_mean,
        fit_k=fit_k,
        boundary_k=int(boundary_k),
        boundary_sample=bnd_sample,
        rescaled_boundary_quantiles=quantiles,
        hull_ball_ratio=ratio,
    )


def _counts_at(radii: np.ndarray, k_grid: np.ndarray) -> np.ndarray:
    sorted_r = np.sort(radii)
    return np.searchsorted(sorted_r, k_grid, side="right").astype(float)
