"""Topology diagnostics: hop coverage, reference graphs, centrality contrast.

Hop coverage measures which fraction of a graph a breadth-first frontier
reaches per hop when launched from a node sample; the union over per-source
balls equals a single multi-source BFS from the sample, which is what the
implementation runs. Reference generators produce scale-free (preferential
attachment), uniform-random and 2-D mesh graphs of matched size for
comparison against the tracing DAG, and a Brandes-style betweenness kernel
supports ranking contact-graph nodes against the path-centrality ranking.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .centrality import IpcResult
from .contact_graph import ContactGraph
from .csvio import write_csv
from .errors import ConfigError
from .tracing import TracingDag

EXACT_BETWEENNESS_LIMIT = 5000


@dataclass
class UGraph:
    """Undirected simple graph in CSR form."""

    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    label: str = ""

    @property
    def n_edges(self) -> int:
        return int(len(self.indices) // 2)

    def degree(self, node: int) -> int:
        return int(self.indptr[node + 1] - self.indptr[node])


def ugraph_from_edges(n_nodes: int, edges: np.ndarray, label: str = "") -> UGraph:
    """Build a CSR graph from an (m, 2) array of distinct undirected pairs.

    Callers must pass deduplicated, loop-free pairs; both directions are
    materialized internally.
    """
    if len(edges) == 0:
        indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        return UGraph(n_nodes, indptr, np.empty(0, dtype=np.int64), label)
    both = np.concatenate([edges, edges[:, ::-1]])
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    counts = np.bincount(both[:, 0], minlength=n_nodes)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return UGraph(n_nodes, indptr, both[:, 1].copy(), label)


def dag_to_undirected(dag: TracingDag, label: str = "tracing") -> tuple[UGraph, dict[int, int]]:
    """Collapse the tracing DAG to an undirected simple graph.

    Returns the graph and the person-id -> dense-index mapping.
    """
    ids = sorted(dag.nodes)
    index = {p: i for i, p in enumerate(ids)}
    pairs = {
        (min(index[e.parent], index[e.child]), max(index[e.parent], index[e.child]))
        for e in dag.edges
    }
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return ugraph_from_edges(len(ids), edges, label), index


def union_contact_graph(graphs: list[ContactGraph], n_people: int) -> UGraph:
    """Union of the daily contact graphs with parallel edges collapsed."""
    pairs = {
        (e.person_a, e.person_b) for g in graphs for e in g.edges
    }
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return ugraph_from_edges(n_people, edges, "contact_union")


@dataclass
class CoverageCurve:
    label: str
    fractions: list[float]  # fractions[h] = unique nodes within <= h hops / n


def hop_coverage(
    graph: UGraph, sample_size: int = 500, max_hops: int = 8, rng_seed: int = 0
) -> CoverageCurve:
    """Fraction of all nodes within h hops of a random node sample.

    Equivalent to BFS from each sampled node with per-hop unions: a node is
    within h hops of some sample member iff its multi-source BFS depth is
    <= h. Coverage is cumulative, hence nondecreasing.
    """
    if graph.n_nodes < sample_size:
        raise ConfigError(
            f"graph has {graph.n_nodes} nodes, fewer than sample size {sample_size}"
        )
    rng = np.random.default_rng(rng_seed)
    sources = rng.choice(graph.n_nodes, size=sample_size, replace=False)

    visited = np.zeros(graph.n_nodes, dtype=bool)
    visited[sources] = True
    frontier = np.array(sorted(sources), dtype=np.int64)
    fractions = [visited.sum() / graph.n_nodes]
    for _ in range(max_hops):
        if len(frontier) == 0:
            fractions.append(fractions[-1])
            continue
        neighbors = _gather_neighbors(graph, frontier)
        fresh = neighbors[~visited[neighbors]]
        visited[fresh] = True
        frontier = np.unique(fresh)
        fractions.append(visited.sum() / graph.n_nodes)
    return CoverageCurve(graph.label, [float(f) for f in fractions])


def _gather_neighbors(graph: UGraph, frontier: np.ndarray) -> np.ndarray:
    starts = graph.indptr[frontier]
    lengths = graph.indptr[frontier + 1] - starts
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    # positions[i] enumerates each frontier node's CSR slice contiguously
    offsets = np.repeat(np.cumsum(lengths) - lengths, lengths)
    positions = np.arange(total) - offsets + np.repeat(starts, lengths)
    return graph.indices[positions]


def generate_reference_graph(
    kind: str, n_nodes: int, n_edges: int, rng_seed: int = 0
) -> UGraph:
    """Deterministic reference topologies of a requested size.

    * scale_free: preferential attachment; per-node attachment counts are
      spread so the final edge count is hit exactly.
    * random: n_edges distinct pairs sampled uniformly.
    * mesh: non-wrapping 2-D lattice with the node count nearest to
      n_nodes (rows x cols); the edge count follows from the lattice.
    """
    if kind == "mesh":
        return _mesh_graph(n_nodes)
    if kind == "random":
        return _uniform_random_graph(n_nodes, n_edges, rng_seed)
    if kind == "scale_free":
        return _preferential_attachment_graph(n_nodes, n_edges, rng_seed)
    raise ConfigError(f"unknown reference graph kind {kind!r}")


def _mesh_graph(n_nodes: int) -> UGraph:
    rows = max(1, int(round(np.sqrt(n_nodes))))
    cols = max(1, int(round(n_nodes / rows)))
    edges = []
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                edges.append((node, node + 1))
            if r + 1 < rows:
                edges.append((node, node + cols))
    arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    return ugraph_from_edges(rows * cols, arr, "mesh")


def _uniform_random_graph(n_nodes: int, n_edges: int, rng_seed: int) -> UGraph:
    max_edges = n_nodes * (n_nodes - 1) // 2
    if n_edges > max_edges:
        raise ConfigError(f"{n_edges} edges impossible on {n_nodes} nodes")
    rng = np.random.default_rng(rng_seed)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < n_edges:
        need = n_edges - len(chosen)
        a = rng.integers(0, n_nodes, size=need * 2)
        b = rng.integers(0, n_nodes, size=need * 2)
        for x, y in zip(a, b):
            if x == y:
                continue
            pair = (int(min(x, y)), int(max(x, y)))
            if pair not in chosen:
                chosen.add(pair)
                if len(chosen) == n_edges:
                    break
    edges = np.array(sorted(chosen), dtype=np.int64).reshape(-1, 2)
    return ugraph_from_edges(n_nodes, edges, "random")


def _preferential_attachment_graph(n_nodes: int, n_edges: int, rng_seed: int) -> UGraph:
    if n_nodes < 2 or n_edges < n_nodes - 1:
        raise ConfigError("scale_free graph needs n_nodes >= 2 and n_edges >= n_nodes - 1")
    rng = np.random.default_rng(rng_seed)

    # Pick a seed-star size so every later node can attach `base` or
    # `base + 1` distinct targets.
    hub_size = 2
    while True:
        budget = n_edges - (hub_size - 1)
        newcomers = n_nodes - hub_size
        if newcomers <= 0:
            raise ConfigError(f"{n_edges} edges too many for {n_nodes}-node scale_free graph")
        base = budget // newcomers
        extra = budget % newcomers
        if base >= 1 and base + 1 <= hub_size:
            break
        hub_size += 1

    edges: list[tuple[int, int]] = [(0, i) for i in range(1, hub_size)]
    # One entry per edge endpoint; sampling it uniformly is degree-biased.
    endpoint_pool: list[int] = [0] * (hub_size - 1) + list(range(1, hub_size))
    for idx, node in enumerate(range(hub_size, n_nodes)):
        m = base + 1 if idx < extra else base
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(endpoint_pool[rng.integers(0, len(endpoint_pool))])
        for t in sorted(targets):
            edges.append((t, node))
            endpoint_pool.append(t)
        endpoint_pool.extend([node] * m)
    arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return ugraph_from_edges(n_nodes, arr, "scale_free")


def betweenness_centrality(
    graph: UGraph, pivots: int | None = None, rng_seed: int = 0
) -> np.ndarray:
    """Shortest-path betweenness via Brandes' dependency accumulation.

    Exact when the source set is all nodes; `pivots` switches to a sampled
    source subset scaled up by n/pivots (used automatically above
    EXACT_BETWEENNESS_LIMIT nodes since Fig-style contrasts only need a
    ranking). Undirected convention: pair contributions are halved.
    """
    n = graph.n_nodes
    if pivots is None:
        pivots = n if n <= EXACT_BETWEENNESS_LIMIT else 1000
    if pivots >= n:
        sources = np.arange(n)
        scale = 1.0
    else:
        rng = np.random.default_rng(rng_seed)
        sources = np.sort(rng.choice(n, size=pivots, replace=False))
        scale = n / pivots

    centrality = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)

    for s in sources:
        dist.fill(-1)
        sigma.fill(0.0)
        dist[s] = 0
        sigma[s] = 1.0
        layers: list[np.ndarray] = []
        frontier = np.array([s], dtype=np.int64)
        depth = 0
        while len(frontier):
            layers.append(frontier)
            nbrs = _gather_neighbors(graph, frontier)
            src = np.repeat(frontier, graph.indptr[frontier + 1] - graph.indptr[frontier])
            undiscovered = dist[nbrs] == -1
            if undiscovered.any():
                dist[nbrs[undiscovered]] = depth + 1
            on_shortest = dist[nbrs] == depth + 1
            np.add.at(sigma, nbrs[on_shortest], sigma[src[on_shortest]])
            frontier = np.unique(nbrs[undiscovered])
            depth += 1

        delta.fill(0.0)
        for frontier in reversed(layers[1:]):
            nbrs = _gather_neighbors(graph, frontier)
            src = np.repeat(frontier, graph.indptr[frontier + 1] - graph.indptr[frontier])
            pred = dist[nbrs] == dist[src] - 1
            contrib = (sigma[nbrs[pred]] / sigma[src[pred]]) * (1.0 + delta[src[pred]])
            np.add.at(delta, nbrs[pred], contrib)
        delta[s] = 0.0
        centrality += delta * scale

    return centrality / 2.0


@dataclass
class ContrastReport:
    top_k: int
    jaccard: float
    betweenness_ranking: list[int]  # person ids, most central first
    ipc_ranking: list[int]


def centrality_contrast(
    graphs: list[ContactGraph],
    dag: TracingDag,
    ipc_results: list[IpcResult],
    n_people: int,
    top_k: int = 50,
    pivots: int | None = None,
    rng_seed: int = 0,
) -> ContrastReport:
    """Rank overlap between contact-graph betweenness and DAG path centrality.

    Betweenness is computed on the union of the daily contact graphs. A
    node's path-centrality rank uses its best raw score over every leaf
    context it appears in as a candidate. Overlap is Jaccard over top-k sets.
    """
    union = union_contact_graph(graphs, n_people)
    bc = betweenness_centrality(union, pivots=pivots, rng_seed=rng_seed)
    bc_ranking = sorted(range(n_people), key=lambda p: (-bc[p], p))[:top_k]

    best_pi: dict[int, float] = defaultdict(float)
    for result in ipc_results:
        for candidate, raw in result.raw.items():
            if raw > best_pi[candidate]:
                best_pi[candidate] = raw
    ipc_ranking = sorted(best_pi, key=lambda p: (-best_pi[p], p))[:top_k]

    a, b = set(bc_ranking), set(ipc_ranking)
    union_size = len(a | b)
    jaccard = (len(a & b) / union_size) if union_size else 1.0
    return ContrastReport(top_k, jaccard, bc_ranking, ipc_ranking)


def write_coverage(path: str, curves: list[CoverageCurve], comment: str | None = None) -> None:
    write_csv(
        path,
        ("topology", "hop", "fraction"),
        (
            (c.label, hop, repr(frac))
            for c in curves
            for hop, frac in enumerate(c.fractions)
        ),
        comment=comment,
    )


def write_degree_histogram(path: str, histogram: dict[int, int], comment: str | None = None) -> None:
    write_csv(
        path,
        ("degree", "count"),
        sorted(histogram.items()),
        comment=comment,
    )


def write_contrast(path: str, report: ContrastReport, comment: str | None = None) -> None:
    rows = []
    for rank in range(report.top_k):
        b = report.betweenness_ranking[rank] if rank < len(report.betweenness_ranking) else ""
        i = report.ipc_ranking[rank] if rank < len(report.ipc_ranking) else ""
        rows.append((rank + 1, b, i))
    write_csv(path, ("rank", "betweenness_node", "ipc_node"), rows, comment=comment)
