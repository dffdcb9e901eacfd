"""Scenario definition, validation, and file round-tripping.

Scenarios are plain JSON with a versioned ``schema`` field. Validation
collects every offending field instead of stopping at the first, so a
broken file is diagnosed in one pass.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .community import FormationParams
from .crypto import SUPPORTED_WIDTHS
from .errors import ScenarioError, UnknownParameterError

SCHEMA_VERSION = 1

_BEHAVIOR_NAMES = {"tampered_server", "tocttou_swapper", "lying_verifier", "free_rider"}


@dataclass
class ProtocolParams:
    digest_width_bits: int = 224
    mac_fanout: int = 10
    quorum: float = 0.5
    min_key_bits: int = 128
    hop_limit: int | None = None
    # When False the requester accepts the claimed digest as the reference
    # instead of binding the delivery to a prior vote. Used by studies that
    # measure what the verifier quorum achieves on its own.
    vote_binding: bool = True


@dataclass
class TrustParams:
    smoothing_alpha: float = 0.1


@dataclass
class AppSpec:
    name: str
    version: str = "1"
    payload_bytes: int = 256
    # "all", an explicit id list, or {"fraction": f} resolved at setup.
    holders: object = "all"
    # Explicit id list or {"fraction": f}; these holders start with a
    # corrupted copy instead of the store package.
    tampered_holders: object = field(default_factory=list)

    def label(self) -> str:
        return f"{self.name}@{self.version}"


@dataclass
class CompromiseSpec:
    fraction: float = 0.0
    mix: dict[str, float] = field(default_factory=dict)
    # One corrupted variant per app shared by all compromised holders, as a
    # single campaign would produce. False gives each node its own variant.
    shared_payload: bool = True


@dataclass
class WorkloadSpec:
    requests_per_epoch: int = 0
    # Explicit entries: {"epoch": e, "requester": node, "app": "name@ver"}.
    explicit: list[dict] = field(default_factory=list)


@dataclass
class OldDeviceSpec:
    fraction: float = 0.0
    key_bits: int = 64


@dataclass
class StudySpec:
    # In-flight payload substitution after MAC computation; exercises the
    # path where the delivered bytes no longer match what was authenticated.
    delivery_substitution: bool = False
    # When set, each polled verifier independently lies positive with this
    # probability, overriding node behaviors for the verification step.
    verifier_compromise_p: float | None = None


@dataclass
class Scenario:
    seed: int = 0
    epochs: int = 1
    node_count: int = 10
    type_distribution: dict[str, float] = field(default_factory=lambda: {"default": 1.0})
    topology: str = "none"                 # "none" | "complete"
    initial_edges: list[list[int]] = field(default_factory=list)
    default_key_bits: int = 256
    formation: FormationParams = field(default_factory=FormationParams)
    trust: TrustParams = field(default_factory=TrustParams)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    apps: list[AppSpec] = field(default_factory=list)
    compromise: CompromiseSpec = field(default_factory=CompromiseSpec)
    workload: WorkloadSpec = field(default_factory=WorkloadSpec)
    old_devices: OldDeviceSpec = field(default_factory=OldDeviceSpec)
    study: StudySpec = field(default_factory=StudySpec)
    store_blocked: bool = False
    record_trust: bool = False
    schema: int = SCHEMA_VERSION

    # -- validation ----------------------------------------------------

    def validate(self) -> None:
        problems: list[str] = []

        def check(ok: bool, message: str) -> None:
            if not ok:
                problems.append(message)

        check(self.schema == SCHEMA_VERSION,
              f"schema: expected {SCHEMA_VERSION}, got {self.schema!r}")
        check(isinstance(self.seed, int), "seed: must be an integer")
        check(isinstance(self.epochs, int) and self.epochs >= 0,
              f"epochs: must be a non-negative integer, got {self.epochs!r}")
        check(isinstance(self.node_count, int) and self.node_count >= 0,
              f"node_count: must be a non-negative integer, got {self.node_count!r}")
        check(bool(self.type_distribution), "type_distribution: must not be empty")
        for t, w in self.type_distribution.items():
            check(w >= 0, f"type_distribution.{t}: negative weight {w}")
        check(sum(self.type_distribution.values()) > 0,
              "type_distribution: weights sum to zero")
        check(self.topology in ("none", "complete"),
              f"topology: must be 'none' or 'complete', got {self.topology!r}")
        if self.topology == "complete" and self.node_count > 1:
            check(self.formation.max_degree >= self.node_count - 1,
                  "formation.max_degree: too small for a complete initial topology")
        for e in self.initial_edges:
            ok = (isinstance(e, (list, tuple)) and len(e) == 2
                  and all(isinstance(x, int) and 0 <= x < self.node_count for x in e)
                  and e[0] != e[1])
            check(ok, f"initial_edges: bad entry {e!r}")

        f = self.formation
        for name in ("join_rate", "leave_rate"):
            v = getattr(f, name)
            check(0.0 <= v <= 1.0, f"formation.{name}: {v} outside [0, 1]")
        check(f.proposals_per_round >= 0, "formation.proposals_per_round: negative")
        check(f.max_degree >= 1, "formation.max_degree: must be at least 1")
        check(f.supernode_count >= 0, "formation.supernode_count: negative")
        check(f.supernode_multiplier >= 1, "formation.supernode_multiplier: below 1")
        check(f.link_cost >= 0.0, f"formation.link_cost: {f.link_cost} negative")
        check(0.0 <= f.severance_threshold <= 1.0,
              f"formation.severance_threshold: {f.severance_threshold} outside [0, 1]")

        check(0.0 < self.trust.smoothing_alpha <= 1.0,
              f"trust.smoothing_alpha: {self.trust.smoothing_alpha} outside (0, 1]")

        p = self.protocol
        check(p.digest_width_bits in SUPPORTED_WIDTHS,
              f"protocol.digest_width_bits: {p.digest_width_bits} unsupported")
        check(p.mac_fanout >= 1, f"protocol.mac_fanout: {p.mac_fanout} below 1")
        check(0.0 < p.quorum < 1.0, f"protocol.quorum: {p.quorum} outside (0, 1)")
        check(p.min_key_bits >= 8, "protocol.min_key_bits: below 8")
        check(p.hop_limit is None or p.hop_limit >= 1,
              f"protocol.hop_limit: {p.hop_limit} invalid")

        labels = set()
        for a in self.apps:
            check(bool(a.name), "apps: empty name")
            check(a.payload_bytes >= 0, f"apps.{a.name}: negative payload_bytes")
            check(a.label() not in labels, f"apps: duplicate app {a.label()}")
            labels.add(a.label())
            if isinstance(a.holders, dict):
                frac = a.holders.get("fraction")
                check(isinstance(frac, (int, float)) and 0.0 <= frac <= 1.0,
                      f"apps.{a.name}.holders: bad fraction {a.holders!r}")
            elif isinstance(a.holders, list):
                check(all(isinstance(h, int) and 0 <= h < self.node_count for h in a.holders),
                      f"apps.{a.name}.holders: ids out of range")
            else:
                check(a.holders == "all",
                      f"apps.{a.name}.holders: expected 'all', list, or fraction")
            if isinstance(a.tampered_holders, dict):
                frac = a.tampered_holders.get("fraction")
                check(isinstance(frac, (int, float)) and 0.0 <= frac <= 1.0,
                      f"apps.{a.name}.tampered_holders: bad fraction")
            else:
                check(isinstance(a.tampered_holders, list),
                      f"apps.{a.name}.tampered_holders: expected list or fraction")

        c = self.compromise
        check(0.0 <= c.fraction <= 1.0, f"compromise.fraction: {c.fraction} outside [0, 1]")
        for name, w in c.mix.items():
            check(name in _BEHAVIOR_NAMES, f"compromise.mix: unknown strategy {name!r}")
            check(w >= 0, f"compromise.mix.{name}: negative weight")
        if c.fraction > 0:
            check(bool(c.mix), "compromise.mix: empty while fraction > 0")
            check(abs(sum(c.mix.values()) - 1.0) < 1e-9,
                  "compromise.mix: weights must sum to 1")

        w = self.workload
        check(w.requests_per_epoch >= 0, "workload.requests_per_epoch: negative")
        for entry in w.explicit:
            ok = (isinstance(entry, dict) and isinstance(entry.get("epoch"), int)
                  and isinstance(entry.get("requester"), int)
                  and isinstance(entry.get("app"), str))
            check(ok, f"workload.explicit: bad entry {entry!r}")
            if ok:
                check(entry["app"] in labels,
                      f"workload.explicit: unknown app {entry['app']!r}")
                check(0 <= entry["requester"] < self.node_count,
                      f"workload.explicit: requester {entry['requester']} out of range")
                check(0 <= entry["epoch"] < max(self.epochs, 1),
                      f"workload.explicit: epoch {entry['epoch']} out of range")

        check(0.0 <= self.old_devices.fraction <= 1.0,
              f"old_devices.fraction: {self.old_devices.fraction} outside [0, 1]")
        check(self.old_devices.key_bits >= 8 and self.old_devices.key_bits % 8 == 0,
              "old_devices.key_bits: must be a positive byte multiple")
        check(self.default_key_bits >= 8 and self.default_key_bits % 8 == 0,
              "default_key_bits: must be a positive byte multiple")

        s = self.study
        check(s.verifier_compromise_p is None or 0.0 <= s.verifier_compromise_p <= 1.0,
              "study.verifier_compromise_p: outside [0, 1]")

        if problems:
            raise ScenarioError(problems)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "Scenario":
        data = copy.deepcopy(data)
        problems: list[str] = []

        def build(cls, sub: object, where: str):
            if not isinstance(sub, dict):
                problems.append(f"{where}: expected an object, got {type(sub).__name__}")
                return cls()
            known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
            unknown = set(sub) - known
            if unknown:
                problems.append(f"{where}: unknown fields {sorted(unknown)}")
            return cls(**{k: v for k, v in sub.items() if k in known})

        top_known = {f.name for f in Scenario.__dataclass_fields__.values()}
        unknown = set(data) - top_known
        if unknown:
            problems.append(f"scenario: unknown fields {sorted(unknown)}")
            for k in unknown:
                data.pop(k)

        if "formation" in data:
            data["formation"] = build(FormationParams, data["formation"], "formation")
        if "trust" in data:
            data["trust"] = build(TrustParams, data["trust"], "trust")
        if "protocol" in data:
            data["protocol"] = build(ProtocolParams, data["protocol"], "protocol")
        if "compromise" in data:
            data["compromise"] = build(CompromiseSpec, data["compromise"], "compromise")
        if "workload" in data:
            data["workload"] = build(WorkloadSpec, data["workload"], "workload")
        if "old_devices" in data:
            data["old_devices"] = build(OldDeviceSpec, data["old_devices"], "old_devices")
        if "study" in data:
            data["study"] = build(StudySpec, data["study"], "study")
        if "apps" in data:
            apps = data["apps"]
            if not isinstance(apps, list):
                problems.append("apps: expected a list")
                data["apps"] = []
            else:
                data["apps"] = [build(AppSpec, a, f"apps[{i}]") for i, a in enumerate(apps)]
        if problems:
            raise ScenarioError(problems)
        scenario = Scenario(**data)
        scenario.validate()
        return scenario

    @staticmethod
    def from_file(path: str | Path) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError([f"file: not valid JSON ({exc})"]) from None
        if not isinstance(data, dict):
            raise ScenarioError(["file: top level must be an object"])
        return Scenario.from_dict(data)

    def to_file(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def apply_overrides(base: Scenario, overrides: dict[str, object]) -> Scenario:
    """Rebuild a scenario with dotted-path parameter overrides.

    Paths must name existing scalar parameters ("compromise.fraction",
    "protocol.quorum", "seed"); anything else is rejected so sweeps cannot
    silently fall through to defaults.
    """
    data = base.to_dict()
    for path, value in overrides.items():
        parts = path.split(".")
        node = data
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise UnknownParameterError(f"unknown parameter path {path!r}")
            node = node[part]
        leaf = parts[-1]
        if not isinstance(node, dict) or leaf not in node:
            raise UnknownParameterError(f"unknown parameter path {path!r}")
        node[leaf] = value
    return Scenario.from_dict(data)
