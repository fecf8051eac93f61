"""Command-line front door for the pipeline.

Commands mirror the pipeline stages:

    generate -> visits.csv
    simulate -> snapshots.csv events.csv tracing_dag.csv
    ipc      -> ipc.csv
    train    -> model.json metrics.csv
    ablate   -> ablation_hops.csv | ablation_alpha.csv
    mitigate -> sweep.csv daily/<policy>_<fraction>_<run>.csv
    analyze  -> coverage.csv degree_histogram.csv contrast.csv

Science parameters live in one TOML config; flags cover paths, seed
override, threads and verbosity. Every output CSV starts with a comment
carrying the resolved config hash. Exit codes: 0 ok, 2 config error,
3 missing prerequisite, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import analysis as an
from . import centrality as ce
from . import classifier as cl
from . import mitigation as mi
from . import mobility as mo
from . import tracing as tr
from .config import RunConfig, derive_seed, load_config
from .contact_graph import build_contact_graphs
from .csvio import write_csv
from .epidemic import run_epidemic, write_events, write_snapshots
from .errors import ConfigError, PrerequisiteError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epitrace",
        description="co-location epidemic simulation and tracing toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("generate", "write a synthetic visit dataset"),
        ("simulate", "run the outbreak and build the tracing DAG"),
        ("ipc", "score candidate infectors of every leaf"),
        ("train", "fit the transmission-edge classifier"),
        ("ablate", "retrain over a hop-depth or decay grid"),
        ("mitigate", "run the policy comparison sweep"),
        ("analyze", "topology diagnostics and centrality contrast"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="TOML config path")
        cmd.add_argument("--out", default=None, help="output directory override")
        cmd.add_argument("--seed", type=int, default=None, help="master seed override")
        cmd.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
        cmd.add_argument("--quiet", action="store_true", help="suppress progress output")
        if name == "ablate":
            cmd.add_argument("--which", choices=("hops", "alpha"), required=True)
    return parser


class _Ctx:
    def __init__(self, args):
        self.config: RunConfig = load_config(args.config)
        if args.seed is not None:
            _override_master_seed(self.config, args.seed)
        if args.out is not None:
            self.config.out_dir = args.out
        self.quiet: bool = args.quiet
        self.threads: int = max(1, args.threads)
        os.makedirs(self.config.out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.config.out_dir, name)

    def require(self, name: str, produced_by: str) -> str:
        path = self.path(name)
        if not os.path.exists(path):
            raise PrerequisiteError(path, produced_by)
        return path

    def stamp(self, command: str) -> str:
        return f"config_hash={self.config.config_hash()} command={command}"

    def say(self, message: str) -> None:
        if not self.quiet:
            print(message)


def _override_master_seed(config: RunConfig, seed: int) -> None:
    config.master_seed = seed
    config.mobility.rng_seed = derive_seed(seed, "mobility")
    config.disease.rng_seed = derive_seed(seed, "disease")
    config.classifier.rng_seed = derive_seed(seed, "classifier")


def cmd_generate(ctx: _Ctx) -> None:
    visits = mo.generate_visits(ctx.config.mobility)
    mo.write_visits(ctx.path("visits.csv"), visits, comment=ctx.stamp("generate"))
    ctx.say(f"wrote {len(visits)} visits to {ctx.path('visits.csv')}")


def cmd_simulate(ctx: _Ctx) -> None:
    visits = mo.read_visits(ctx.require("visits.csv", "generate"))
    graphs = build_contact_graphs(visits, horizon_days=ctx.config.mobility.horizon_days)
    snapshots, events = run_epidemic(
        graphs, ctx.config.disease, n_people=ctx.config.mobility.n_people
    )
    dag = tr.build_tracing_dag(graphs, events)
    stamp = ctx.stamp("simulate")
    write_snapshots(ctx.path("snapshots.csv"), snapshots, comment=stamp)
    write_events(ctx.path("events.csv"), events, comment=stamp)
    tr.write_dag(ctx.path("tracing_dag.csv"), dag, comment=stamp)
    ctx.say(
        f"{len(events)} infections; tracing DAG: {len(dag.nodes)} nodes, "
        f"{dag.n_edges()} edges, {len(dag.leaf_set)} leaves"
    )


def cmd_ipc(ctx: _Ctx) -> None:
    dag = tr.read_dag(ctx.require("tracing_dag.csv", "simulate"))
    results = ce.batch_ipc(dag, dag.leaf_set, ctx.config.ipc)
    ce.write_ipc(ctx.path("ipc.csv"), results, comment=ctx.stamp("ipc"))
    ctx.say(f"scored {len(results)} leaves at alpha={ctx.config.ipc.alpha} "
            f"H={ctx.config.ipc.max_hops}")


def _training_dag(ctx: _Ctx) -> tuple[tr.TracingDag, list[ce.IpcResult]]:
    dag = tr.read_dag(ctx.require("tracing_dag.csv", "simulate"))
    window = ctx.config.train_window_days
    if window > 0:
        dag = tr.filter_dag_by_day(dag, window)
        results = ce.batch_ipc(dag, dag.leaf_set, ctx.config.ipc)
    else:
        ctx.require("ipc.csv", "ipc")
        results = ce.read_ipc(ctx.path("ipc.csv"))
    return dag, results


def cmd_train(ctx: _Ctx) -> None:
    dag, results = _training_dag(ctx)
    examples = cl.build_training_set(dag, results)
    model = cl.train(examples, ctx.config.classifier)
    cl.save_model(ctx.path("model.json"), model)
    cl.write_metrics(ctx.path("metrics.csv"), model, comment=ctx.stamp("train"))
    ctx.say(
        f"trained {model.kind} on {len(examples)} edges; "
        f"final held-out F1 = {cl.final_holdout_f1(model):.3f}"
    )


def cmd_ablate(ctx: _Ctx, which: str) -> None:
    dag = tr.read_dag(ctx.require("tracing_dag.csv", "simulate"))
    if which == "hops":
        table = cl.ablate_hops(
            dag, ctx.config.ablation.hops, ctx.config.ipc.alpha, ctx.config.classifier
        )
        rows = [(h, repr(f1)) for h, f1 in sorted(table.items())]
        write_csv(ctx.path("ablation_hops.csv"), ("hops", "f1"), rows,
                  comment=ctx.stamp("ablate"))
    else:
        table = cl.ablate_alpha(
            dag, ctx.config.ablation.alphas, ctx.config.ipc.max_hops, ctx.config.classifier
        )
        rows = [(repr(a), repr(f1)) for a, f1 in sorted(table.items())]
        write_csv(ctx.path("ablation_alpha.csv"), ("alpha", "f1"), rows,
                  comment=ctx.stamp("ablate"))
    ctx.say(f"{which} ablation: " + ", ".join(f"{k}: {v:.3f}" for k, v in sorted(table.items())))


def cmd_mitigate(ctx: _Ctx) -> None:
    visits = mo.read_visits(ctx.require("visits.csv", "generate"))
    model = cl.load_model(ctx.require("model.json", "train"))
    graphs = build_contact_graphs(visits, horizon_days=ctx.config.mobility.horizon_days)
    m = ctx.config.mitigation
    policies = [m.policy(kind, 1.0) for kind in m.policies]
    results = mi.sweep(
        graphs,
        ctx.config.disease,
        policies,
        m.test_fractions,
        m.n_runs,
        ctx.config.mobility.n_people,
        model,
        master_seed=ctx.config.master_seed,
        ipc_params=ctx.config.ipc,
        threads=ctx.threads,
    )
    stamp = ctx.stamp("mitigate")
    mi.write_sweep(ctx.path("sweep.csv"), results, comment=stamp)
    daily_dir = ctx.path("daily")
    os.makedirs(daily_dir, exist_ok=True)
    for r in results:
        name = f"{r.policy.value}_{r.test_fraction!r}_{r.run_index}.csv"
        mi.write_daily(os.path.join(daily_dir, name), r, comment=stamp)
    ctx.say(f"swept {len(results)} scenarios into {ctx.path('sweep.csv')}")


def cmd_analyze(ctx: _Ctx) -> None:
    cfg = ctx.config.analysis
    dag = tr.read_dag(ctx.require("tracing_dag.csv", "simulate"))
    stamp = ctx.stamp("analyze")

    curves = []
    tracing_graph, _ = an.dag_to_undirected(dag)
    sample = min(cfg.coverage_sample, tracing_graph.n_nodes)
    curves.append(
        an.hop_coverage(tracing_graph, sample, cfg.coverage_max_hops,
                        rng_seed=derive_seed(ctx.config.master_seed, "coverage", "tracing"))
    )
    for kind in ("scale_free", "random", "mesh"):
        graph = an.generate_reference_graph(
            kind, cfg.reference_nodes, cfg.reference_edges,
            rng_seed=derive_seed(ctx.config.master_seed, "reference", kind),
        )
        curves.append(
            an.hop_coverage(graph, min(cfg.coverage_sample, graph.n_nodes),
                            cfg.coverage_max_hops,
                            rng_seed=derive_seed(ctx.config.master_seed, "coverage", kind))
        )
    an.write_coverage(ctx.path("coverage.csv"), curves, comment=stamp)

    an.write_degree_histogram(
        ctx.path("degree_histogram.csv"), tr.in_degree_histogram(dag), comment=stamp
    )

    ctx.require("ipc.csv", "ipc")
    results = ce.read_ipc(ctx.path("ipc.csv"))
    visits = mo.read_visits(ctx.require("visits.csv", "generate"))
    graphs = build_contact_graphs(visits, horizon_days=ctx.config.mobility.horizon_days)
    report = an.centrality_contrast(
        graphs, dag, results, ctx.config.mobility.n_people,
        top_k=cfg.contrast_top_k,
        pivots=cfg.betweenness_pivots or None,
        rng_seed=derive_seed(ctx.config.master_seed, "betweenness"),
    )
    an.write_contrast(ctx.path("contrast.csv"), report, comment=stamp)
    ctx.say(f"coverage curves for {len(curves)} topologies; "
            f"top-{report.top_k} ranking Jaccard = {report.jaccard:.3f}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ctx = _Ctx(args)
        if args.command == "generate":
            cmd_generate(ctx)
        elif args.command == "simulate":
            cmd_simulate(ctx)
        elif args.command == "ipc":
            cmd_ipc(ctx)
        elif args.command == "train":
            cmd_train(ctx)
        elif args.command == "ablate":
            cmd_ablate(ctx, args.which)
        elif args.command == "mitigate":
            cmd_mitigate(ctx)
        elif args.command == "analyze":
            cmd_analyze(ctx)
        return 0
    except ConfigError as exc:
        print(f'epitrace-error code=2 kind=config msg="{exc}"', file=sys.stderr)
        return 2
    except PrerequisiteError as exc:
        print(f'epitrace-error code=3 kind=prerequisite msg="{exc}"', file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f'epitrace-error code=4 kind=runtime msg="{exc}"', file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
