"""Infectious-path centrality over the tracing DAG.

The metric scores each candidate parent v of a positive leaf by how much
attenuated "infection signal" flows through v from all positive leaves.
Two passes:

1. Signal pass: edges are walked against their direction, outward from
   every leaf, for at most H hops. A walk edge at hop h carries weight
   alpha**(h-1), and every leaf-originated path of length h ending at node y
   adds that weight to phi[y]. Parallel edges are distinct contact events
   and contribute once per edge.

2. Collection pass: with directions restored, a candidate v in the leaf's
   1-hop neighborhood scores
       pi_v = (weight of the leaf-v edges, alpha**0 each)
            + sum of phi over the distinct nodes upstream of v within H-1
              further hops.
   Scores are then normalized by the per-leaf candidate maximum.

With alpha = 0 the convention 0**0 = 1 applies, so hop-1 edges still carry
weight 1 while deeper hops contribute nothing.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .csvio import write_csv
from .errors import ConfigError
from .tracing import TracingDag


@dataclass
class IpcParams:
    alpha: float = 0.5
    max_hops: int = 2

    def validate(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must be in [0, 1]")
        if self.max_hops < 1:
            raise ConfigError("max_hops must be >= 1")


@dataclass
class IpcResult:
    leaf: int
    scores: dict[int, float] = field(default_factory=dict)  # candidate -> normalized pi
    raw: dict[int, float] = field(default_factory=dict)  # candidate -> unnormalized pi


def edge_weight(hop: int, params: IpcParams) -> float:
    """Attenuated weight of a walk edge at hop `hop` (1-based): alpha**(hop-1)."""
    if hop < 1:
        raise ConfigError(f"hop index must be >= 1, got {hop}")
    return float(params.alpha ** (hop - 1))


def accumulate_phi(
    dag: TracingDag,
    leaf_set: set[int] | frozenset[int],
    params: IpcParams,
) -> dict[int, float]:
    """Signal pass: phi[y] summed over all reversed paths of length <= H.

    For each leaf, a dynamic program counts reversed paths of each length;
    a node reached by a length-h path gains alpha**(h-1) per path. Parallel
    edges multiply path counts. Nodes beyond H hops are absent (phi 0).
    """
    params.validate()
    phi: dict[int, float] = defaultdict(float)
    for leaf in sorted(leaf_set):
        frontier: dict[int, int] = {leaf: 1}  # node -> number of paths ending here
        for hop in range(1, params.max_hops + 1):
            weight = edge_weight(hop, params)
            nxt: dict[int, int] = defaultdict(int)
            for node, count in frontier.items():
                for e in dag.parents_of(node):
                    nxt[e.parent] += count
            if not nxt:
                break
            for node in sorted(nxt):
                phi[node] += weight * nxt[node]
            frontier = nxt
    return dict(phi)


def upstream_nodes(dag: TracingDag, start: int, max_hops: int) -> set[int]:
    """Distinct nodes reachable from `start` against edge direction in <= max_hops."""
    seen: set[int] = set()
    frontier = {start}
    for _ in range(max_hops):
        nxt = set()
        for node in frontier:
            for e in dag.parents_of(node):
                if e.parent != start and e.parent not in seen:
                    seen.add(e.parent)
                    nxt.add(e.parent)
        if not nxt:
            break
        frontier = nxt
    return seen


def infectious_path_centrality(
    dag: TracingDag,
    leaf: int,
    params: IpcParams,
    exclude_focal: bool = False,
    _phi: dict[int, float] | None = None,
) -> IpcResult:
    """Collection pass for one leaf; returns normalized and raw scores.

    The signal pass uses every leaf in the DAG as a source; set
    `exclude_focal` to drop the scored leaf from the sources (sensitivity
    analysis). A leaf without recorded contacts yields an empty result.
    """
    params.validate()
    if leaf not in dag.leaf_set:
        raise ConfigError(f"person {leaf} is not in the DAG leaf set")
    candidates = dag.parents_of(leaf)
    if not candidates:
        return IpcResult(leaf)

    if _phi is None:
        sources = set(dag.leaf_set)
        if exclude_focal:
            sources.discard(leaf)
        phi = accumulate_phi(dag, sources, params)
    else:
        phi = _phi

    w1 = edge_weight(1, params)
    raw: dict[int, float] = defaultdict(float)
    for e in candidates:
        raw[e.parent] += w1
    for candidate in sorted(raw):
        for node in sorted(upstream_nodes(dag, candidate, params.max_hops - 1)):
            raw[candidate] += phi.get(node, 0.0)

    peak = max(raw.values())
    scores = {c: v / peak for c, v in raw.items()}
    return IpcResult(leaf, scores=scores, raw=dict(raw))


def batch_ipc(
    dag: TracingDag,
    leaves: set[int] | frozenset[int],
    params: IpcParams,
    exclude_focal: bool = False,
) -> list[IpcResult]:
    """Score many leaves, sharing one signal pass when sources are common.

    Results are identical (bit-for-bit) to per-leaf calls: the shared pass
    iterates sources in the same sorted order a single call would.
    """
    params.validate()
    for leaf in leaves:
        if leaf not in dag.leaf_set:
            raise ConfigError(f"person {leaf} is not in the DAG leaf set")
    if exclude_focal:
        return [
            infectious_path_centrality(dag, leaf, params, exclude_focal=True)
            for leaf in sorted(leaves)
        ]
    phi = accumulate_phi(dag, set(dag.leaf_set), params)
    return [
        infectious_path_centrality(dag, leaf, params, _phi=phi)
        for leaf in sorted(leaves)
    ]


def write_ipc(path: str, results: list[IpcResult], comment: str | None = None) -> None:
    rows = []
    for r in results:
        for candidate in sorted(r.scores):
            rows.append((r.leaf, candidate, repr(r.raw[candidate]), repr(r.scores[candidate])))
    write_csv(path, ("leaf", "candidate", "raw_pi", "normalized_pi"), rows, comment=comment)


def read_ipc(path: str) -> list[IpcResult]:
    from .csvio import read_rows

    by_leaf: dict[int, IpcResult] = {}
    for lineno, fields in read_rows(path, ("leaf", "candidate", "raw_pi", "normalized_pi")):
        leaf, candidate = int(fields[0]), int(fields[1])
        raw, norm = float(fields[2]), float(fields[3])
        result = by_leaf.setdefault(leaf, IpcResult(leaf))
        result.raw[candidate] = raw
        result.scores[candidate] = norm
    return [by_leaf[k] for k in sorted(by_leaf)]
