"""Contact-tracing DAG built incrementally from infection events.

When a person is infected, their full same-day contact neighborhood is
recorded with edges pointing into them; the edge matching the actual
transmission carries a hidden is_transmission label. Contacts are recorded
regardless of health state, so most DAG nodes are bystanders with no
incoming edges.

The structure is kept acyclic. A contact edge that would close a directed
cycle is skipped (the contact still becomes a node); the transmission edge
is never skipped — if it would close a cycle, the infectee's own earlier
outgoing edges sustaining the cycle are removed instead. Those are always
non-transmission edges: someone infected today cannot have infected anyone
earlier, so its prior outgoing edges are bystander records.

The leaf set tracks the trace frontier: an infectee joins it when recorded
and its infector (if currently a leaf) is demoted to an interior node.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .contact_graph import Contact, ContactGraph, daily_edge_list
from .csvio import parse_int_fields, read_rows, write_csv
from .epidemic import TransmissionEvent
from .errors import IntegrityError

DAG_HEADER = ("parent", "child", "day", "hour", "poi", "is_transmission")


class TraceEdge(NamedTuple):
    parent: int
    child: int
    day: int
    hour: int
    poi: int
    is_transmission: bool


@dataclass
class TracingDag:
    nodes: set[int] = field(default_factory=set)
    in_edges: dict[int, list[TraceEdge]] = field(default_factory=lambda: defaultdict(list))
    out_edges: dict[int, list[TraceEdge]] = field(default_factory=lambda: defaultdict(list))
    leaf_set: set[int] = field(default_factory=set)
    infection_day: dict[int, int] = field(default_factory=dict)

    @property
    def edges(self) -> list[TraceEdge]:
        return [e for child_edges in self.in_edges.values() for e in child_edges]

    def n_edges(self) -> int:
        return sum(len(v) for v in self.in_edges.values())

    def parents_of(self, node: int) -> list[TraceEdge]:
        return self.in_edges.get(node, [])

    def children_of(self, node: int) -> list[TraceEdge]:
        return self.out_edges.get(node, [])

    def in_degree(self, node: int) -> int:
        return len(self.in_edges.get(node, ()))

    def out_degree(self, node: int) -> int:
        return len(self.out_edges.get(node, ()))

    def infected_children(self) -> set[int]:
        return set(self.infection_day)

    def reachable_from(self, start: int) -> set[int]:
        """All strict descendants of `start` along edge direction."""
        seen: set[int] = set()
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for e in self.out_edges.get(node, ()):
                if e.child not in seen:
                    seen.add(e.child)
                    queue.append(e.child)
        return seen

    def _add_edge(self, edge: TraceEdge) -> None:
        self.in_edges[edge.child].append(edge)
        self.out_edges[edge.parent].append(edge)

    def _remove_out_edges(self, parent: int, to_children: set[int]) -> None:
        removed = [e for e in self.out_edges.get(parent, ()) if e.child in to_children]
        if not removed:
            return
        self.out_edges[parent] = [e for e in self.out_edges[parent] if e.child not in to_children]
        for e in removed:
            self.in_edges[e.child].remove(e)


def record_infection(
    dag: TracingDag, event: TransmissionEvent, day_contacts: list[Contact]
) -> TracingDag:
    """Record an infectee's same-day neighborhood; mutates and returns `dag`.

    One edge per contact event, all pointing into the infectee; the contact
    matching `event` gets is_transmission=True. Raises IntegrityError when
    the infector is absent from day_contacts.
    """
    child = event.infectee
    if not any(
        c.neighbor == event.infector and c.hour == event.hour and c.poi_id == event.poi
        for c in day_contacts
    ):
        raise IntegrityError(
            f"infector {event.infector} not among day-{event.day} contacts of {event.infectee}"
        )

    dag.nodes.add(child)
    descendants = dag.reachable_from(child)
    if event.infector in descendants:
        # The true edge must exist; break the cycle by dropping the child's
        # own outgoing (necessarily non-transmission) edges that lead back
        # to the infector.
        on_cycle = {
            e.child
            for e in dag.out_edges.get(child, ())
            if e.child == event.infector or event.infector in dag.reachable_from(e.child)
        }
        dag._remove_out_edges(child, on_cycle)
        descendants = dag.reachable_from(child)

    labeled = False
    for contact in day_contacts:
        dag.nodes.add(contact.neighbor)
        is_true = (
            not labeled
            and contact.neighbor == event.infector
            and contact.hour == event.hour
            and contact.poi_id == event.poi
        )
        if contact.neighbor in descendants:
            continue  # would close a directed cycle; keep the node only
        if is_true:
            labeled = True
        dag._add_edge(
            TraceEdge(contact.neighbor, child, event.day, contact.hour, contact.poi_id, is_true)
        )
    if not labeled:
        raise IntegrityError(
            f"transmission edge for infectee {event.infectee} could not be recorded"
        )

    dag.infection_day[child] = event.day
    dag.leaf_set.add(child)
    dag.leaf_set.discard(event.infector)
    return dag


def build_tracing_dag(
    graphs: list[ContactGraph], events: Iterable[TransmissionEvent]
) -> TracingDag:
    """Replay a completed epidemic's events into a tracing DAG."""
    dag = TracingDag()
    for event in events:
        contacts = daily_edge_list(graphs[event.day], event.infectee)
        record_infection(dag, event, contacts)
    return dag


def in_degree_histogram(dag: TracingDag) -> dict[int, int]:
    """Map in-degree -> node count over all DAG nodes; sums to len(nodes)."""
    hist: dict[int, int] = defaultdict(int)
    for node in dag.nodes:
        hist[dag.in_degree(node)] += 1
    return dict(hist)


def class_imbalance(dag: TracingDag) -> float:
    """(#non-transmission edges) / (#transmission edges); 0.0 for an empty DAG."""
    total = dag.n_edges()
    n_true = sum(1 for e in dag.edges if e.is_transmission)
    if n_true == 0:
        return 0.0
    return (total - n_true) / n_true


def filter_dag_by_day(dag: TracingDag, max_day: int) -> TracingDag:
    """Sub-DAG of records from days strictly before `max_day`.

    Used to train on an early window of an outbreak. The leaf set is
    reconstructed the same way `read_dag` does.
    """
    out = TracingDag()
    true_parents: set[int] = set()
    for e in dag.edges:
        if e.day >= max_day:
            continue
        out.nodes.add(e.parent)
        out.nodes.add(e.child)
        out._add_edge(e)
        if e.is_transmission:
            out.infection_day[e.child] = e.day
            true_parents.add(e.parent)
    out.leaf_set = set(out.infection_day) - true_parents
    return out


def write_dag(path: str, dag: TracingDag, comment: str | None = None) -> None:
    rows = sorted(
        (e.parent, e.child, e.day, e.hour, e.poi, int(e.is_transmission))
        for e in dag.edges
    )
    write_csv(path, DAG_HEADER, rows, comment=comment)


def read_dag(path: str) -> TracingDag:
    """Rebuild a TracingDag from its CSV export.

    The leaf set is reconstructed as infected children that are not the
    transmission parent of any child — exactly the set maintained
    incrementally, since only a transmission record demotes a leaf.
    """
    dag = TracingDag()
    true_parents: set[int] = set()
    for lineno, fields in read_rows(path, DAG_HEADER):
        parent, child, day, hour, poi, flag = parse_int_fields(path, lineno, fields, 6)
        edge = TraceEdge(parent, child, day, hour, poi, bool(flag))
        dag.nodes.add(parent)
        dag.nodes.add(child)
        dag._add_edge(edge)
        if edge.is_transmission:
            dag.infection_day[child] = day
            true_parents.add(parent)
    dag.leaf_set = set(dag.infection_day) - true_parents
    return dag
