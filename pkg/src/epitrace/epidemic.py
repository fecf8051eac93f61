"""Agent-based SEIR simulation over daily contact graphs.

Each agent carries an immunity threshold delta in [0,1] (drawn at
initialization) and a virality v in [0,1] (assigned when it becomes
infectious). A susceptible j exposed to an infectious i on a contact edge is
infected iff v_i > delta_j, strictly. Newly infected agents are Exposed,
become Infectious after incubation_days, and Recover after infectious_days;
nobody is reinfected within the horizon.

Within a day, edges are processed in (hour, poi, pair) order and state
updates commit immediately, so the first qualifying contact is the infector.
Seeds start Infectious on day 0 with no infector. Everything is
deterministic for a fixed seed.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .contact_graph import ContactEdge, ContactGraph
from .csvio import write_csv
from .errors import ConfigError


class Compartment(IntEnum):
    S = 0
    E = 1
    I = 2
    R = 3


COMPARTMENT_LETTERS = ("S", "E", "I", "R")


@dataclass
class DiseaseParams:
    incubation_days: int = 5
    infectious_days: int = 7
    horizon_days: int = 30
    seed_fraction: float = 0.01
    symptomatic_virality_threshold: float = 0.5
    rng_seed: int = 0

    def validate(self) -> None:
        if self.incubation_days < 1 or self.infectious_days < 1 or self.horizon_days < 1:
            raise ConfigError("incubation_days, infectious_days, horizon_days must be >= 1")
        if not 0.0 < self.seed_fraction <= 1.0:
            raise ConfigError("seed_fraction must be in (0, 1]")
        if not 0.0 <= self.symptomatic_virality_threshold <= 1.0:
            raise ConfigError("symptomatic_virality_threshold must be in [0, 1]")


class TransmissionEvent(NamedTuple):
    infector: int
    infectee: int
    day: int
    hour: int
    poi: int


@dataclass
class AgentState:
    """Read-only view of one agent, materialized on demand."""

    compartment: Compartment
    immunity_delta: float
    virality_v: float | None
    day_infected: int | None
    day_infectious: int | None
    infector: int | None


class Outbreak:
    """Stepping SEIR engine; drives one day at a time.

    delta, virality and the seed set are drawn up front from the seed so a
    run's randomness does not depend on the order quantities are consumed in
    (policy engines diverging mid-run still share identical agents).
    Explicit arrays can be injected for tests.
    """

    def __init__(
        self,
        params: DiseaseParams,
        n_people: int,
        delta: np.ndarray | None = None,
        virality: np.ndarray | None = None,
        seed_set: Sequence[int] | None = None,
    ):
        params.validate()
        if n_people < 1:
            raise ConfigError("n_people must be >= 1")
        self.params = params
        self.n_people = n_people
        rng = np.random.default_rng(params.rng_seed)
        self.delta = np.asarray(delta, dtype=np.float64) if delta is not None else rng.random(n_people)
        self._virality = (
            np.asarray(virality, dtype=np.float64) if virality is not None else rng.random(n_people)
        )
        if seed_set is None:
            n_seeds = int(round(n_people * params.seed_fraction))
            n_seeds = min(n_seeds, n_people)
            seed_set = sorted(int(s) for s in rng.choice(n_people, size=n_seeds, replace=False))
        self.seed_set = frozenset(seed_set)

        self.compartment = np.full(n_people, Compartment.S, dtype=np.int8)
        self.day_infected: dict[int, int] = {}
        self.day_infectious: dict[int, int] = {}
        self.infector: dict[int, int] = {}
        self.events: list[TransmissionEvent] = []
        self._infectious_due: dict[int, list[int]] = defaultdict(list)
        self._recovery_due: dict[int, list[int]] = defaultdict(list)
        self.ever_infectious: set[int] = set()

        for s in sorted(self.seed_set):
            self.compartment[s] = Compartment.I
            self.day_infected[s] = 0
            self.day_infectious[s] = 0
            self.ever_infectious.add(s)
            self._recovery_due[params.infectious_days].append(s)

    def is_symptomatic(self, person: int) -> bool:
        return self._virality[person] > self.params.symptomatic_virality_threshold

    def virality_of(self, person: int) -> float | None:
        """The assigned virality; None until the agent has become infectious."""
        if person in self.ever_infectious:
            return float(self._virality[person])
        return None

    def advance_timers(self, day: int) -> list[int]:
        """Apply the day's E->I and I->R transitions; returns newly infectious ids."""
        newly_infectious = sorted(self._infectious_due.pop(day, []))
        for p in newly_infectious:
            self.compartment[p] = Compartment.I
            self.ever_infectious.add(p)
            self._recovery_due[day + self.params.infectious_days].append(p)
        for p in self._recovery_due.pop(day, []):
            self.compartment[p] = Compartment.R
        return newly_infectious

    def process_contacts(self, day: int, edges: Iterable[ContactEdge]) -> list[TransmissionEvent]:
        """Run the day's exposure checks in deterministic edge order."""
        new_events: list[TransmissionEvent] = []
        comp = self.compartment
        for a, b, hour, poi in edges:
            ca, cb = comp[a], comp[b]
            if ca == Compartment.I and cb == Compartment.S:
                i, s = a, b
            elif cb == Compartment.I and ca == Compartment.S:
                i, s = b, a
            else:
                continue
            if self._virality[i] > self.delta[s]:
                comp[s] = Compartment.E
                self.day_infected[s] = day
                self.day_infectious[s] = day + self.params.incubation_days
                self.infector[s] = i
                self._infectious_due[day + self.params.incubation_days].append(s)
                event = TransmissionEvent(i, s, day, hour, poi)
                new_events.append(event)
                self.events.append(event)
        return new_events

    def snapshot(self) -> np.ndarray:
        return self.compartment.copy()

    def agent_state(self, person: int) -> AgentState:
        return AgentState(
            compartment=Compartment(int(self.compartment[person])),
            immunity_delta=float(self.delta[person]),
            virality_v=self.virality_of(person),
            day_infected=self.day_infected.get(person),
            day_infectious=self.day_infectious.get(person),
            infector=self.infector.get(person),
        )


def run_epidemic(
    graphs: list[ContactGraph],
    params: DiseaseParams,
    n_people: int | None = None,
    delta: np.ndarray | None = None,
    virality: np.ndarray | None = None,
    seed_set: Sequence[int] | None = None,
) -> tuple[list[np.ndarray], list[TransmissionEvent]]:
    """Run the full horizon; returns (daily snapshots, transmission events).

    snapshots[d] is the compartment array at the start of day d, after that
    day's timer transitions and before its contacts (so snapshots[0] reflects
    pure seeding). Infections from the final day appear in the event list but
    in no snapshot.
    """
    params.validate()
    if len(graphs) < params.horizon_days:
        raise ConfigError(
            f"need contact graphs for {params.horizon_days} days, got {len(graphs)}"
        )
    if n_people is None:
        n_people = 0
        for g in graphs:
            for e in g.edges:
                n_people = max(n_people, e.person_b + 1)
        if n_people == 0:
            raise ConfigError("cannot infer population size from empty graphs")

    outbreak = Outbreak(params, n_people, delta=delta, virality=virality, seed_set=seed_set)
    snapshots: list[np.ndarray] = []
    for day in range(params.horizon_days):
        outbreak.advance_timers(day)
        snapshots.append(outbreak.snapshot())
        outbreak.process_contacts(day, graphs[day].edges)
    return snapshots, outbreak.events


def count_compartments(snapshot: np.ndarray) -> dict[str, int]:
    counts = np.bincount(snapshot, minlength=4)
    return {letter: int(counts[i]) for i, letter in enumerate(COMPARTMENT_LETTERS)}


def write_snapshots(path: str, snapshots: list[np.ndarray], comment: str | None = None) -> None:
    write_csv(
        path,
        ("day", "person", "compartment"),
        (
            (day, person, COMPARTMENT_LETTERS[snap[person]])
            for day, snap in enumerate(snapshots)
            for person in range(len(snap))
        ),
        comment=comment,
    )


def write_events(path: str, events: list[TransmissionEvent], comment: str | None = None) -> None:
    write_csv(
        path,
        ("infector", "infectee", "day", "hour", "poi"),
        events,
        comment=comment,
    )
