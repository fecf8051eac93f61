"""Co-location epidemic simulation and bidirectional contact-tracing toolkit.

Pipeline: synthetic mobility visits -> per-day contact graphs -> agent-based
SEIR outbreak -> contact-tracing DAG -> infectious-path centrality ->
transmission-edge classification -> quarantine policy comparison via the
effective reproduction number.
"""

from .analysis import (
    CoverageCurve,
    betweenness_centrality,
    centrality_contrast,
    generate_reference_graph,
    hop_coverage,
)
from .centrality import (
    IpcParams,
    IpcResult,
    accumulate_phi,
    batch_ipc,
    edge_weight,
    infectious_path_centrality,
)
from .classifier import (
    EdgeClassifier,
    EdgeExample,
    TrainConfig,
    ablate_alpha,
    ablate_hops,
    build_training_set,
    f1_score,
    predict_infector,
    train,
)
from .contact_graph import ContactGraph, build_contact_graphs, daily_edge_list
from .epidemic import (
    AgentState,
    Compartment,
    DiseaseParams,
    Outbreak,
    TransmissionEvent,
    count_compartments,
    run_epidemic,
)
from .mitigation import (
    MitigationPolicy,
    PolicyKind,
    QuarantineLedger,
    ScenarioResult,
    effective_reproduction,
    run_scenario,
    sweep,
)
from .mobility import MobilityConfig, VisitRecord, generate_visits, read_visits, write_visits
from .tracing import (
    TracingDag,
    build_tracing_dag,
    class_imbalance,
    in_degree_histogram,
    record_infection,
)

__version__ = "0.1.0"
