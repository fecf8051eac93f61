"""Per-day person-to-person contact graphs from co-location.

Two people interact when they are at the same venue within the same hour,
and everyone sharing a (poi, day, hour) bucket is pairwise connected. A pair
co-visiting at several (hour, poi) buckets on one day yields one edge record
per bucket: each is an independent contact event downstream.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .csvio import write_csv
from .mobility import VisitRecord


class ContactEdge(NamedTuple):
    person_a: int  # always < person_b
    person_b: int
    hour: int
    poi_id: int


class Contact(NamedTuple):
    """One contact event seen from a single person's side."""

    neighbor: int
    hour: int
    poi_id: int


@dataclass
class ContactGraph:
    """Immutable-by-convention contact graph for one day.

    `edges` is sorted by (hour, poi, person_a, person_b), which is the order
    the epidemic engine processes contacts in.
    """

    day: int
    edges: list[ContactEdge]
    _adjacency: dict[int, list[Contact]] | None = field(default=None, repr=False)

    def adjacency(self) -> dict[int, list[Contact]]:
        if self._adjacency is None:
            adj: dict[int, list[Contact]] = defaultdict(list)
            for a, b, hour, poi in self.edges:
                adj[a].append(Contact(b, hour, poi))
                adj[b].append(Contact(a, hour, poi))
            for contacts in adj.values():
                contacts.sort(key=lambda c: (c.hour, c.neighbor, c.poi_id))
            self._adjacency = dict(adj)
        return self._adjacency


def build_contact_graphs(
    visits: Iterable[VisitRecord], horizon_days: int | None = None
) -> list[ContactGraph]:
    """Build one ContactGraph per day from validated visit records.

    Every (poi, day, hour) bucket with k >= 2 distinct devices emits exactly
    k*(k-1)/2 edges. Days without any co-location still get an (empty) graph
    so the returned list covers days 0..horizon_days-1; when horizon_days is
    None it is inferred as max visit day + 1.
    """
    buckets: dict[tuple[int, int, int], set[int]] = defaultdict(set)
    max_day = -1
    for v in visits:
        buckets[(v.day, v.hour, v.poi_id)].add(v.device_id)
        max_day = max(max_day, v.day)
    if horizon_days is None:
        horizon_days = max_day + 1

    per_day: dict[int, list[ContactEdge]] = defaultdict(list)
    for (day, hour, poi), devices in buckets.items():
        if len(devices) < 2:
            continue
        members = sorted(devices)
        day_edges = per_day[day]
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                day_edges.append(ContactEdge(a, b, hour, poi))

    graphs = []
    for day in range(horizon_days):
        edges = per_day.get(day, [])
        edges.sort(key=lambda e: (e.hour, e.poi_id, e.person_a, e.person_b))
        graphs.append(ContactGraph(day, edges))
    return graphs


def daily_edge_list(graph: ContactGraph, person: int) -> list[Contact]:
    """All contact events incident to `person` that day.

    Sorted by (hour, neighbor, poi); unknown person yields an empty list.
    """
    return list(graph.adjacency().get(person, ()))


def write_contact_edges(path: str, graphs: list[ContactGraph], comment: str | None = None) -> None:
    write_csv(
        path,
        ("day", "person_a", "person_b", "hour", "poi_id"),
        (
            (g.day, e.person_a, e.person_b, e.hour, e.poi_id)
            for g in graphs
            for e in g.edges
        ),
        comment=comment,
    )
