"""Online mitigation scenarios: none vs forward vs bidirectional tracing.

The scenario engine replays the epidemic day by day. From `start_day` on,
each agent that turns infectious with virality above the symptomatic
threshold is tested with probability `test_fraction` (one pre-drawn coin
per agent, so higher fractions test supersets and different policies test
identical people). Positives are traced into an online DAG built only from
tested cases.

Policies:
  * none          — no intervention.
  * forward       — quarantine each positive for quarantine_days.
  * bidirectional — additionally predict the positive's infector with the
    trained edge classifier and quarantine that person plus (by default)
    everyone they contacted over the previous lookback_days: the unseen
    sibling branch of the transmission tree.

Quarantine starts on the test day and suppresses every contact edge
touching the person for its whole interval. Day order: timer transitions,
testing + quarantine decisions, then the day's contacts on the filtered
graph — so a day-t quarantine already suppresses day-t edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .centrality import IpcParams, batch_ipc
from .classifier import EdgeClassifier, PI_FEATURES, leaf_examples, predict_infector
from .contact_graph import ContactGraph, build_contact_graphs, daily_edge_list
from .csvio import write_csv
from .epidemic import (
    Compartment,
    DiseaseParams,
    Outbreak,
    TransmissionEvent,
    count_compartments,
)
from .errors import ConfigError
from .mobility import VisitRecord
from .tracing import TracingDag, record_infection


class PolicyKind(str, Enum):
    NONE = "none"
    FORWARD = "forward"
    BIDIRECTIONAL = "bidirectional"


SCOPE_INFECTOR_ONLY = "infector_only"
SCOPE_INFECTOR_PLUS_NEIGHBORS = "infector_plus_neighbors"


@dataclass
class MitigationPolicy:
    kind: PolicyKind = PolicyKind.NONE
    test_fraction: float = 1.0
    start_day: int = 8
    quarantine_days: int = 7
    lookback_days: int = 5
    scope: str = SCOPE_INFECTOR_PLUS_NEIGHBORS

    def validate(self) -> None:
        if not 0.0 < self.test_fraction <= 1.0:
            raise ConfigError("test_fraction must be in (0, 1]")
        if self.start_day < 1:
            raise ConfigError("start_day must be >= 1")
        if self.quarantine_days < 1 or self.lookback_days < 0:
            raise ConfigError("quarantine_days must be >= 1 and lookback_days >= 0")
        if self.scope not in (SCOPE_INFECTOR_ONLY, SCOPE_INFECTOR_PLUS_NEIGHBORS):
            raise ConfigError(f"unknown bidirectional scope {self.scope!r}")


REASON_TESTED = "tested_positive"
REASON_PREDICTED = "predicted_exposure"


@dataclass
class QuarantineLedger:
    intervals: dict[int, list[tuple[int, int, str]]] = field(default_factory=dict)

    def add(self, person: int, start_day: int, days: int, reason: str) -> None:
        self.intervals.setdefault(person, []).append((start_day, start_day + days - 1, reason))

    def is_quarantined(self, person: int, day: int) -> bool:
        return any(s <= day <= e for s, e, _ in self.intervals.get(person, ()))

    def active_count(self, day: int) -> int:
        return sum(1 for p in self.intervals if self.is_quarantined(p, day))

    def person_days(self, horizon_days: int) -> int:
        """Distinct quarantined person-days within the horizon."""
        total = 0
        for spans in self.intervals.values():
            days: set[int] = set()
            for s, e, _ in spans:
                days.update(range(max(0, s), min(horizon_days - 1, e) + 1))
            total += len(days)
        return total


@dataclass
class ScenarioResult:
    policy: PolicyKind
    test_fraction: float
    run_index: int
    daily_counts: list[dict[str, int]]
    events: list[TransmissionEvent]
    r_t: float
    total_infected: int
    quarantine_person_days: int
    ledger: QuarantineLedger


def effective_reproduction(
    events: Sequence[TransmissionEvent],
    ever_infectious: set[int] | frozenset[int],
    horizon_days: int | None = None,
) -> float:
    """Mean offspring infections per ever-infectious individual at run end.

    Returns NaN when nobody was ever infectious (undefined, never a
    division by zero).
    """
    if not ever_infectious:
        return math.nan
    n_events = sum(
        1 for e in events if horizon_days is None or e.day < horizon_days
    )
    return n_events / len(ever_infectious)


def derive_run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, run_index]))


@dataclass
class RunDraws:
    """Per-run random material, shared by every policy/fraction cell."""

    delta: np.ndarray
    virality: np.ndarray
    seed_set: list[int]
    test_coins: np.ndarray

    @classmethod
    def draw(cls, master_seed: int, run_index: int, n_people: int, seed_fraction: float):
        rng = derive_run_rng(master_seed, run_index)
        delta = rng.random(n_people)
        virality = rng.random(n_people)
        n_seeds = min(int(round(n_people * seed_fraction)), n_people)
        seed_set = sorted(int(s) for s in rng.choice(n_people, size=n_seeds, replace=False))
        test_coins = rng.random(n_people)
        return cls(delta, virality, seed_set, test_coins)


def run_scenario(
    visits: list[VisitRecord],
    params: DiseaseParams,
    policy: MitigationPolicy,
    model: EdgeClassifier | None,
    n_people: int,
    ipc_params: IpcParams | None = None,
    draws: RunDraws | None = None,
    run_index: int = 0,
    master_seed: int = 0,
) -> ScenarioResult:
    """Run one policy scenario over a visit dataset."""
    graphs = build_contact_graphs(visits, horizon_days=params.horizon_days)
    return run_scenario_on_graphs(
        graphs, params, policy, model, n_people,
        ipc_params=ipc_params, draws=draws, run_index=run_index, master_seed=master_seed,
    )


def run_scenario_on_graphs(
    graphs: list[ContactGraph],
    params: DiseaseParams,
    policy: MitigationPolicy,
    model: EdgeClassifier | None,
    n_people: int,
    ipc_params: IpcParams | None = None,
    draws: RunDraws | None = None,
    run_index: int = 0,
    master_seed: int = 0,
) -> ScenarioResult:
    params.validate()
    policy.validate()
    ipc_params = ipc_params or IpcParams()
    if policy.kind == PolicyKind.BIDIRECTIONAL:
        if model is None:
            raise ConfigError("bidirectional policy needs a trained edge classifier")
    if model is not None:
        known = set(PI_FEATURES) | {
            "candidate_out_degree", "candidate_in_degree",
            "same_day_contact_count", "hour_of_contact",
        }
        if not set(model.feature_names) <= known:
            raise ConfigError("model feature schema does not match this toolkit version")
    if draws is None:
        draws = RunDraws.draw(master_seed, run_index, n_people, params.seed_fraction)

    outbreak = Outbreak(
        params, n_people,
        delta=draws.delta, virality=draws.virality, seed_set=draws.seed_set,
    )
    ledger = QuarantineLedger()
    online_dag = TracingDag()
    event_of: dict[int, TransmissionEvent] = {}
    use_pi = model is not None and model.feature_names[0] in PI_FEATURES
    daily_counts: list[dict[str, int]] = []

    for day in range(params.horizon_days):
        newly_infectious = outbreak.advance_timers(day)

        if policy.kind != PolicyKind.NONE and day >= policy.start_day:
            positives = sorted(
                p for p in newly_infectious
                if outbreak.is_symptomatic(p)
                and draws.test_coins[p] < policy.test_fraction
                and p in event_of  # seeds have no traceable infection event
            )
            for p in positives:
                ev = event_of[p]
                record_infection(online_dag, ev, daily_edge_list(graphs[ev.day], p))
            for p in positives:
                ledger.add(p, day, policy.quarantine_days, REASON_TESTED)
            if policy.kind == PolicyKind.BIDIRECTIONAL and positives:
                to_score = {p for p in positives if p in online_dag.leaf_set}
                results = {r.leaf: r for r in batch_ipc(online_dag, to_score, ipc_params)}
                for p in positives:
                    result = results.get(p)
                    if result is None or not result.scores:
                        continue
                    examples = leaf_examples(online_dag, p, result, include_pi=use_pi)
                    prediction = predict_infector(model, p, examples)
                    if prediction is None:
                        continue
                    suspect = prediction[0]
                    ledger.add(suspect, day, policy.quarantine_days, REASON_PREDICTED)
                    if policy.scope == SCOPE_INFECTOR_PLUS_NEIGHBORS:
                        neighborhood: set[int] = set()
                        for past in range(max(0, day - policy.lookback_days), day):
                            neighborhood.update(
                                c.neighbor for c in daily_edge_list(graphs[past], suspect)
                            )
                        neighborhood.discard(suspect)
                        for q in sorted(neighborhood):
                            ledger.add(q, day, policy.quarantine_days, REASON_PREDICTED)

        counts = count_compartments(outbreak.snapshot())
        counts["quarantined"] = ledger.active_count(day)
        daily_counts.append(counts)

        edges = graphs[day].edges
        if ledger.intervals:
            edges = [
                e for e in edges
                if not ledger.is_quarantined(e.person_a, day)
                and not ledger.is_quarantined(e.person_b, day)
            ]
        for ev in outbreak.process_contacts(day, edges):
            event_of[ev.infectee] = ev

    return ScenarioResult(
        policy=policy.kind,
        test_fraction=policy.test_fraction,
        run_index=run_index,
        daily_counts=daily_counts,
        events=list(outbreak.events),
        r_t=effective_reproduction(outbreak.events, outbreak.ever_infectious, params.horizon_days),
        total_infected=len(outbreak.day_infected),
        quarantine_person_days=ledger.person_days(params.horizon_days),
        ledger=ledger,
    )


def sweep(
    graphs: list[ContactGraph],
    params: DiseaseParams,
    policies: Sequence[MitigationPolicy],
    test_fractions: Sequence[float],
    n_runs: int,
    n_people: int,
    model: EdgeClassifier | None,
    master_seed: int,
    ipc_params: IpcParams | None = None,
    threads: int = 1,
) -> list[ScenarioResult]:
    """Cartesian product of (policy, fraction) x run seeds, in stable order.

    Every cell of one run index shares identical agent draws and seed
    infections, so policy comparisons are paired. Results are ordered by
    (policy, fraction, run) regardless of `threads`.
    """
    tasks = []
    for base_policy in policies:
        for fraction in test_fractions:
            for run in range(n_runs):
                policy = MitigationPolicy(
                    kind=base_policy.kind,
                    test_fraction=fraction,
                    start_day=base_policy.start_day,
                    quarantine_days=base_policy.quarantine_days,
                    lookback_days=base_policy.lookback_days,
                    scope=base_policy.scope,
                )
                tasks.append((policy, run))

    draws_cache = {
        run: RunDraws.draw(master_seed, run, n_people, params.seed_fraction)
        for run in range(n_runs)
    }

    def run_one(task: tuple[MitigationPolicy, int]) -> ScenarioResult:
        policy, run = task
        return run_scenario_on_graphs(
            graphs, params, policy, model, n_people,
            ipc_params=ipc_params, draws=draws_cache[run],
            run_index=run, master_seed=master_seed,
        )

    if threads <= 1:
        return [run_one(t) for t in tasks]

    import multiprocessing as mp

    ctx = mp.get_context("fork")
    global _SWEEP_RUNNER
    _SWEEP_RUNNER = run_one
    try:
        with ctx.Pool(processes=threads) as pool:
            return pool.map(_call_sweep_runner, tasks)
    finally:
        _SWEEP_RUNNER = None


_SWEEP_RUNNER = None


def _call_sweep_runner(task):
    return _SWEEP_RUNNER(task)


def write_sweep(path: str, results: list[ScenarioResult], comment: str | None = None) -> None:
    write_csv(
        path,
        ("policy", "test_fraction", "run", "rt", "total_infected", "quarantine_person_days"),
        (
            (
                r.policy.value,
                repr(r.test_fraction),
                r.run_index,
                repr(r.r_t),
                r.total_infected,
                r.quarantine_person_days,
            )
            for r in results
        ),
        comment=comment,
    )


def write_daily(path: str, result: ScenarioResult, comment: str | None = None) -> None:
    write_csv(
        path,
        ("day", "S", "E", "I", "R", "quarantined"),
        (
            (day, c["S"], c["E"], c["I"], c["R"], c["quarantined"])
            for day, c in enumerate(result.daily_counts)
        ),
        comment=comment,
    )
