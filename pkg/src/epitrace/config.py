"""TOML run configuration: schema validation, defaults, seed derivation.

One config file drives the whole pipeline so sweeps are diffable. Unknown
sections or keys are rejected. Every CLI output embeds a hash of the fully
resolved configuration, making results traceable to their exact settings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .centrality import IpcParams
from .classifier import TrainConfig
from .epidemic import DiseaseParams
from .errors import ConfigError
from .mitigation import (
    SCOPE_INFECTOR_ONLY,
    SCOPE_INFECTOR_PLUS_NEIGHBORS,
    MitigationPolicy,
    PolicyKind,
)
from .mobility import MobilityConfig


@dataclass
class MitigationConfig:
    policies: list[str] = field(
        default_factory=lambda: ["none", "forward", "bidirectional"]
    )
    test_fractions: list[float] = field(default_factory=lambda: [0.01, 0.1, 0.3, 1.0])
    n_runs: int = 20
    start_day: int = 8
    quarantine_days: int = 7
    lookback_days: int = 5
    bidirectional_scope: str = SCOPE_INFECTOR_PLUS_NEIGHBORS

    def validate(self) -> None:
        for p in self.policies:
            if p not in ("none", "forward", "bidirectional"):
                raise ConfigError(f"unknown policy {p!r}")
        if self.n_runs < 1:
            raise ConfigError("n_runs must be >= 1")
        if self.bidirectional_scope not in (
            SCOPE_INFECTOR_ONLY, SCOPE_INFECTOR_PLUS_NEIGHBORS,
        ):
            raise ConfigError(f"unknown bidirectional_scope {self.bidirectional_scope!r}")
        # Per-policy fields are validated when policies are instantiated.

    def policy(self, kind: str, fraction: float) -> MitigationPolicy:
        return MitigationPolicy(
            kind=PolicyKind(kind),
            test_fraction=fraction,
            start_day=self.start_day,
            quarantine_days=self.quarantine_days,
            lookback_days=self.lookback_days,
            scope=self.bidirectional_scope,
        )


@dataclass
class AblationConfig:
    hops: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    alphas: list[float] = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])

    def validate(self) -> None:
        if any(h < 0 for h in self.hops):
            raise ConfigError("ablation hops must be >= 0")
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ConfigError("ablation alphas must be in [0, 1]")


@dataclass
class AnalysisConfig:
    coverage_sample: int = 500
    coverage_max_hops: int = 8
    reference_nodes: int = 20000
    reference_edges: int = 116000
    contrast_top_k: int = 50
    betweenness_pivots: int = 0  # 0 = exact up to the built-in node limit

    def validate(self) -> None:
        if self.coverage_sample < 1 or self.coverage_max_hops < 1:
            raise ConfigError("coverage_sample and coverage_max_hops must be >= 1")
        if self.reference_nodes < 2 or self.reference_edges < 1:
            raise ConfigError("reference graph size must be positive")
        if self.contrast_top_k < 1:
            raise ConfigError("contrast_top_k must be >= 1")
        if self.betweenness_pivots < 0:
            raise ConfigError("betweenness_pivots must be >= 0")


@dataclass
class RunConfig:
    out_dir: str = "out"
    master_seed: int = 0
    train_window_days: int = 0  # 0 = full horizon of the training outbreak
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    disease: DiseaseParams = field(default_factory=DiseaseParams)
    ipc: IpcParams = field(default_factory=IpcParams)
    classifier: TrainConfig = field(default_factory=TrainConfig)
    ablation: AblationConfig = field(default_factory=AblationConfig)
    mitigation: MitigationConfig = field(default_factory=MitigationConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def validate(self) -> None:
        self.mobility.validate()
        self.disease.validate()
        self.ipc.validate()
        self.classifier.validate()
        self.ablation.validate()
        self.mitigation.validate()
        self.analysis.validate()
        if self.train_window_days < 0:
            raise ConfigError("train_window_days must be >= 0")
        if self.disease.horizon_days > self.mobility.horizon_days:
            raise ConfigError(
                "disease horizon exceeds mobility horizon: no contact graphs for trailing days"
            )

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_dump(self).encode()).hexdigest()[:12]


_SECTION_FIELDS = {
    "run": ("out_dir", "master_seed", "train_window_days"),
    "mobility": None,
    "disease": None,
    "ipc": None,
    "classifier": None,
    "ablation": None,
    "mitigation": None,
    "analysis": None,
}


def _apply_section(obj, section: str, data: dict) -> None:
    valid = {f.name for f in fields(obj)}
    for key, value in data.items():
        if key not in valid:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        setattr(obj, key, value)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None

    config = RunConfig()
    for section, data in raw.items():
        if section not in _SECTION_FIELDS:
            raise ConfigError(f"unknown section [{section}] in {path}")
        if not isinstance(data, dict):
            raise ConfigError(f"[{section}] must be a table")
        if section == "run":
            for key, value in data.items():
                if key not in _SECTION_FIELDS["run"]:
                    raise ConfigError(f"unknown key {key!r} in [run]")
                setattr(config, key, value)
        else:
            _apply_section(getattr(config, section), section, data)

    # Seeds for individual stages derive from the master seed unless the
    # config pins them explicitly.
    if "mobility" not in raw or "rng_seed" not in raw.get("mobility", {}):
        config.mobility.rng_seed = derive_seed(config.master_seed, "mobility")
    if "disease" not in raw or "rng_seed" not in raw.get("disease", {}):
        config.disease.rng_seed = derive_seed(config.master_seed, "disease")
    if "classifier" not in raw or "rng_seed" not in raw.get("classifier", {}):
        config.classifier.rng_seed = derive_seed(config.master_seed, "classifier")

    config.validate()
    return config


def derive_seed(master_seed: int, *labels) -> int:
    """Stable 63-bit sub-seed for a named purpose."""
    payload = f"{master_seed}|" + "|".join(str(x) for x in labels)
    return int.from_bytes(hashlib.sha256(payload.encode()).digest()[:8], "big") >> 1


def canonical_dump(config: RunConfig) -> str:
    """Deterministic flat text rendering of the resolved configuration."""

    def render(prefix: str, obj) -> list[str]:
        lines = []
        for f in sorted(fields(obj), key=lambda f: f.name):
            value = getattr(obj, f.name)
            if hasattr(value, "__dataclass_fields__"):
                lines.extend(render(f"{prefix}{f.name}.", value))
            else:
                lines.append(f"{prefix}{f.name}={value!r}")
        return lines

    return "\n".join(render("", config))
