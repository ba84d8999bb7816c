"""Gilbert graphs on the torus and detection of wrapping components.

Devices at distance strictly below the connection radius share an edge.  On
the torus a component stands in for an infinite cluster when it wraps around
the window: it contains a cycle whose edges, unrolled in the plane, do not
return to the starting copy.  Wrapping is detected with a union-find that
tracks, per node, the integer copy offset relative to its root; merging two
nodes already in one component with an inconsistent offset exposes a
wrapping cycle.  Flags are monotone and independent of edge insertion order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall
from scipy.spatial import cKDTree

from .geometry import TorusWindow

METRICS = ("torus", "planar")


class WrapUnionFind:
    """Union-find over graph nodes with per-edge integer windings.

    ``union(u, v, wx, wy)`` asserts that v's copy reached from u's canonical
    copy is shifted by ``(wx, wy)`` windows.  A union of two nodes already
    sharing a root checks this assertion against the stored offsets; any
    mismatch marks the component as wrapping in the mismatched axes.
    """

    def __init__(self, n: int = 0):
        self.parent = list(range(n))
        self.size = [1] * n
        self.offx = [0] * n
        self.offy = [0] * n
        self.wrapx = [False] * n
        self.wrapy = [False] * n
        self.any_wrap = False

    def __len__(self) -> int:
        return len(self.parent)

    def add_node(self) -> int:
        i = len(self.parent)
        self.parent.append(i)
        self.size.append(1)
        self.offx.append(0)
        self.offy.append(0)
        self.wrapx.append(False)
        self.wrapy.append(False)
        return i

    def find(self, i: int) -> int:
        parent, offx, offy = self.parent, self.offx, self.offy
        path = []
        while parent[i] != i:
            path.append(i)
            i = parent[i]
        accx = accy = 0
        for j in reversed(path):
            accx += offx[j]
            accy += offy[j]
            parent[j] = i
            offx[j] = accx
            offy[j] = accy
        return i

    def union(self, u: int, v: int, wx: int, wy: int) -> None:
        ru = self.find(u)
        rv = self.find(v)
        oux, ouy = (0, 0) if u == ru else (self.offx[u], self.offy[u])
        ovx, ovy = (0, 0) if v == rv else (self.offx[v], self.offy[v])
        if ru == rv:
            if ovx - oux != wx:
                self.wrapx[ru] = True
                self.any_wrap = True
            if ovy - ouy != wy:
                self.wrapy[ru] = True
                self.any_wrap = True
            return
        # attach the smaller tree; off[child root] = its copy offset vs new root
        if self.size[ru] < self.size[rv]:
            ru, rv = rv, ru
            oux, ouy, ovx, ovy = ovx, ovy, oux, ouy
            wx, wy = -wx, -wy
        self.parent[rv] = ru
        self.offx[rv] = oux + wx - ovx
        self.offy[rv] = ouy + wy - ovy
        self.size[ru] += self.size[rv]
        if self.wrapx[rv]:
            self.wrapx[ru] = True
        if self.wrapy[rv]:
            self.wrapy[ru] = True

    def wrapped_axes(self, i: int) -> tuple[bool, bool]:
        r = self.find(i)
        return self.wrapx[r], self.wrapy[r]

    def wrapped(self, i: int) -> bool:
        """True if i's component wraps the torus in at least one axis."""
        r = self.find(i)
        return self.wrapx[r] or self.wrapy[r]

    def component_size(self, i: int) -> int:
        return self.size[self.find(i)]


class SpatialGrid:
    """Uniform bucket grid for fixed-radius neighbor candidates.

    Cell side is at least ``r``, so all points within ``r`` of a query lie in
    the 3 x 3 block around its cell.  With ``torus=True`` the block wraps;
    duplicate cells from very coarse grids are collapsed.
    """

    def __init__(self, window: TorusWindow, r: float, torus: bool = True):
        if not r > 0.0:
            raise ValueError(f"r must be > 0, got {r}")
        self.window = window
        self.r = r
        self.torus = torus
        self.n = max(1, int(window.side / r))
        self.cell = window.side / self.n
        self.buckets: dict[tuple[int, int], list[int]] = {}
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def _cell_of(self, x: float, y: float) -> tuple[int, int]:
        n = self.n
        ix = int(x / self.cell)
        iy = int(y / self.cell)
        # right-boundary points fall into the last cell
        return (min(ix, n - 1), min(iy, n - 1))

    def insert(self, index: int, x: float, y: float) -> None:
        self.buckets.setdefault(self._cell_of(x, y), []).append(index)
        self._count += 1

    def neighbor_candidates(self, x: float, y: float) -> list[int]:
        """Indices whose cells touch the 3 x 3 block around ``(x, y)``."""
        ix, iy = self._cell_of(x, y)
        n = self.n
        out: list[int] = []
        seen = set()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cx, cy = ix + dx, iy + dy
                if self.torus:
                    cx %= n
                    cy %= n
                elif not (0 <= cx < n and 0 <= cy < n):
                    continue
                if (cx, cy) in seen:
                    continue
                seen.add((cx, cy))
                bucket = self.buckets.get((cx, cy))
                if bucket:
                    out.extend(bucket)
        return out


@dataclass
class GilbertGraph:
    """Devices with edges between pairs at distance strictly below ``r``.

    With the torus metric, positions are canonical representatives in
    ``[0, side)^2`` and distances are minimum-image.  ``edges`` is an
    ``(m, 2)`` integer array with ``u < v`` in each row, lexicographically
    sorted.
    """

    positions: np.ndarray
    r: float
    window: TorusWindow
    edges: np.ndarray
    metric: str = "torus"
    _adjacency: Optional[csr_matrix] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> csr_matrix:
        """Symmetric unweighted CSR adjacency (cached)."""
        if self._adjacency is None:
            n = self.n_nodes
            u, v = self.edges[:, 0], self.edges[:, 1]
            row = np.concatenate([u, v])
            col = np.concatenate([v, u])
            data = np.ones(len(row), dtype=np.int8)
            self._adjacency = csr_matrix((data, (row, col)), shape=(n, n))
        return self._adjacency


def _check_radius(r: float, window: TorusWindow, metric: str) -> None:
    if not (np.isfinite(r) and r > 0.0):
        raise ValueError(f"r must be finite and > 0, got {r}")
    if metric == "torus" and r >= window.side / 2.0:
        raise ValueError(
            f"torus metric needs r < side/2 ({window.side / 2.0}), got {r}"
        )


def build_gilbert(
    positions, r: float, window: TorusWindow, metric: str = "torus"
) -> GilbertGraph:
    """Batch-build the graph over all pairs at distance strictly below ``r``."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    _check_radius(r, window, metric)
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if metric == "torus":
        pos = window.wrap(pos)
    if len(pos) < 2:
        return GilbertGraph(pos, r, window, np.empty((0, 2), dtype=np.int64), metric)
    if metric == "torus":
        tree = cKDTree(pos, boxsize=window.side)
    else:
        tree = cKDTree(pos)
    pairs = tree.query_pairs(r, output_type="ndarray")
    if len(pairs):
        d = pos[pairs[:, 0]] - pos[pairs[:, 1]]
        if metric == "torus":
            d -= np.round(d / window.side) * window.side
        dist = np.hypot(d[:, 0], d[:, 1])
        pairs = pairs[dist < r]  # query_pairs includes distance == r
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return GilbertGraph(pos, r, window, pairs, metric)


def edge_windings(g: GilbertGraph) -> np.ndarray:
    """Integer copy shift per edge: edge (u, v) joins u to v's copy shifted by
    ``w`` windows, ``w = round((pos[u] - pos[v]) / side)``.

    All zeros under the planar metric.
    """
    if g.metric == "planar" or g.n_edges == 0:
        return np.zeros((g.n_edges, 2), dtype=np.int64)
    d = g.positions[g.edges[:, 0]] - g.positions[g.edges[:, 1]]
    return np.round(d / g.window.side).astype(np.int64)


def wrap_union_find(g: GilbertGraph) -> WrapUnionFind:
    """Union-find over all edges with wrap flags resolved."""
    uf = WrapUnionFind(g.n_nodes)
    w = edge_windings(g)
    for (u, v), (wx, wy) in zip(g.edges.tolist(), w.tolist()):
        uf.union(u, v, wx, wy)
    return uf


def has_wrapping_component(g: GilbertGraph) -> bool:
    """True if some component wraps the torus in at least one axis."""
    uf = WrapUnionFind(g.n_nodes)
    w = edge_windings(g)
    for (u, v), (wx, wy) in zip(g.edges.tolist(), w.tolist()):
        uf.union(u, v, wx, wy)
        if uf.any_wrap:
            return True
    return False


def largest_wrapping_component(g: GilbertGraph) -> Optional[np.ndarray]:
    """Node indices of the largest wrapping component, or None if none wraps."""
    uf = wrap_union_find(g)
    roots = np.fromiter((uf.find(i) for i in range(g.n_nodes)), dtype=np.int64,
                        count=g.n_nodes)
    best_root, best_size = -1, 0
    for rt in np.unique(roots):
        if (uf.wrapx[rt] or uf.wrapy[rt]) and uf.size[rt] > best_size:
            best_root, best_size = int(rt), uf.size[rt]
    if best_root < 0:
        return None
    return np.flatnonzero(roots == best_root)


def planar_subgraph(g: GilbertGraph) -> GilbertGraph:
    """Restriction to zero-winding edges.

    Equals the planar Gilbert graph on the canonical positions: an edge has
    zero winding exactly when the direct (unwrapped) difference realizes the
    minimum-image distance, so paths in this subgraph never take shortcuts
    around the torus.
    """
    if g.metric == "planar":
        return g
    w = edge_windings(g)
    keep = np.all(w == 0, axis=1)
    return GilbertGraph(g.positions, g.r, g.window, g.edges[keep], "planar")


class IncrementalGilbert:
    """Gilbert graph grown one device at a time.

    Each insert connects the new device to all earlier devices within the
    radius and updates the wrap detector, so stopping rules of the form
    "grow until some component wraps" cost amortized constant work per
    device.  Edges are recorded only with ``store_edges=True``.
    """

    def __init__(
        self,
        window: TorusWindow,
        r: float,
        metric: str = "torus",
        store_edges: bool = False,
    ):
        if metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
        _check_radius(r, window, metric)
        self.window = window
        self.r = r
        self.metric = metric
        self.grid = SpatialGrid(window, r, torus=(metric == "torus"))
        self.uf = WrapUnionFind()
        self.xs: list[float] = []
        self.ys: list[float] = []
        self.edges: Optional[list[tuple[int, int]]] = [] if store_edges else None

    def __len__(self) -> int:
        return len(self.xs)

    def insert(self, x: float, y: float) -> int:
        """Add a device, connect it, and return its index."""
        side = self.window.side
        torus = self.metric == "torus"
        if torus:
            x %= side
            y %= side
            if x >= side:
                x = 0.0
            if y >= side:
                y = 0.0
        i = self.uf.add_node()
        r2 = self.r * self.r
        half = side / 2.0
        for j in self.grid.neighbor_candidates(x, y):
            dx = x - self.xs[j]
            dy = y - self.ys[j]
            wx = wy = 0
            if torus:
                if dx > half:
                    dx -= side
                    wx = -1
                elif dx < -half:
                    dx += side
                    wx = 1
                if dy > half:
                    dy -= side
                    wy = -1
                elif dy < -half:
                    dy += side
                    wy = 1
            if dx * dx + dy * dy < r2:
                self.uf.union(i, j, wx, wy)
                if self.edges is not None:
                    self.edges.append((j, i))
        self.grid.insert(i, x, y)
        self.xs.append(x)
        self.ys.append(y)
        return i

    def wrapped(self, i: int) -> bool:
        return self.uf.wrapped(i)

    @property
    def any_wrapped(self) -> bool:
        return self.uf.any_wrap

    def to_graph(self) -> GilbertGraph:
        """Snapshot as a :class:`GilbertGraph` (requires ``store_edges=True``)."""
        if self.edges is None:
            raise ValueError("graph was built with store_edges=False")
        pos = np.column_stack([self.xs, self.ys]) if self.xs else np.empty((0, 2))
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        edges = np.sort(edges, axis=1)
        if len(edges):
            edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
        return GilbertGraph(pos, self.r, self.window, edges, self.metric)


def _bfs_hops(adj: csr_matrix, sources: np.ndarray, n: int) -> np.ndarray:
    indptr, indices = adj.indptr, adj.indices
    out = np.full((len(sources), n), np.inf)
    for si, s in enumerate(sources):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        frontier = np.array([s], dtype=np.int64)
        d = 0
        while frontier.size:
            starts = indptr[frontier]
            counts = indptr[frontier + 1] - starts
            total = int(counts.sum())
            if total == 0:
                break
            base = np.repeat(starts, counts)
            step = np.arange(total) - np.repeat(counts.cumsum() - counts, counts)
            nbrs = indices[base + step]
            fresh = nbrs[dist[nbrs] < 0]
            if fresh.size == 0:
                break
            d += 1
            dist[fresh] = d
            frontier = np.flatnonzero(dist == d)
        reached = dist >= 0
        out[si, reached] = dist[reached]
    return out


def hop_distances(
    g: GilbertGraph, sources=None, method: str = "auto"
) -> np.ndarray:
    """Hop counts from each source to every node (``inf`` if unreachable).

    ``method`` picks between repeated breadth-first search (``"bfs"``) and
    the dense all-pairs routine (``"floyd-warshall"``); ``"auto"`` uses the
    dense routine only for small all-pairs queries.
    """
    n = g.n_nodes
    if sources is None:
        sources = np.arange(n)
    sources = np.asarray(sources, dtype=np.int64).reshape(-1)
    if np.any((sources < 0) | (sources >= n)):
        raise ValueError("source index out of range")
    if method == "auto":
        method = "floyd-warshall" if len(sources) == n and n <= 400 else "bfs"
    if method == "floyd-warshall":
        full = floyd_warshall(g.adjacency(), directed=False, unweighted=True)
        return full[sources]
    if method == "bfs":
        return _bfs_hops(g.adjacency(), sources, n)
    raise ValueError(f"unknown method {method!r}")
