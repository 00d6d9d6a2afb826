"""Network data model and the canonical JSON format.

A Network is the deterministic pre-cascade state: the all-in-service
topology plus a balanced initial dispatch. Instances are treated as
immutable after construction (dataclasses are frozen) so they are safe to
share across threads and worker processes.

Units: powers in MW, reactances in per-unit on ``base_mva``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError

FORMAT_VERSION = 1

LINE = "line"
TRANSFORMER = "transformer"


@dataclass(frozen=True)
class Bus:
    id: int
    name: str = ""


@dataclass(frozen=True)
class Branch:
    id: int
    from_bus: int
    to_bus: int
    reactance: float
    flow_limit: float
    kind: str = LINE
    maintainable: bool = False


@dataclass(frozen=True)
class Generator:
    bus: int
    p_max: float
    p_min: float
    dispatch: float


@dataclass(frozen=True)
class Load:
    bus: int
    demand: float
    served: float


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    base_mva: float = 100.0

    # index caches, rebuilt on construction
    _bus_ids: frozenset[int] = field(init=False, repr=False, compare=False, default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "_bus_ids", frozenset(b.id for b in self.buses))

    def bus_ids(self) -> frozenset[int]:
        return self._bus_ids

    def branch_by_id(self, branch_id: int) -> Branch:
        for br in self.branches:
            if br.id == branch_id:
                return br
        raise KeyError(f"no branch with id {branch_id}")

    def maintainable_ids(self) -> list[int]:
        return [br.id for br in self.branches if br.maintainable]

    def total_demand(self) -> float:
        return sum(ld.demand for ld in self.loads)

    def digest(self) -> str:
        """Stable content hash of the canonical JSON form."""
        return hashlib.sha256(to_json(self).encode()).hexdigest()


@dataclass(frozen=True)
class Violation:
    entity: str
    invariant: str

    def __str__(self) -> str:
        return f"{self.entity}: {self.invariant}"


def validate(network: Network) -> list[Violation]:
    """Check every model invariant; violations are data, not exceptions."""
    out: list[Violation] = []
    seen: set[int] = set()
    for bus in network.buses:
        if bus.id < 1:
            out.append(Violation(f"bus {bus.id}", "bus id must be >= 1"))
        if bus.id in seen:
            out.append(Violation(f"bus {bus.id}", "bus id not unique"))
        seen.add(bus.id)

    bus_ids = network.bus_ids()
    branch_seen: set[int] = set()
    for br in network.branches:
        ent = f"branch {br.id}"
        if br.id in branch_seen:
            out.append(Violation(ent, "branch id not unique"))
        branch_seen.add(br.id)
        if br.from_bus not in bus_ids:
            out.append(Violation(ent, f"from_bus {br.from_bus} does not exist"))
        if br.to_bus not in bus_ids:
            out.append(Violation(ent, f"to_bus {br.to_bus} does not exist"))
        if br.reactance == 0:
            out.append(Violation(ent, "reactance must be nonzero"))
        if not br.flow_limit > 0:
            out.append(Violation(ent, "flow_limit must be strictly positive"))
        if br.kind not in (LINE, TRANSFORMER):
            out.append(Violation(ent, f"unknown kind {br.kind!r}"))

    any_capacity = False
    for i, gen in enumerate(network.generators):
        ent = f"generator {i} (bus {gen.bus})"
        if gen.bus not in bus_ids:
            out.append(Violation(ent, f"bus {gen.bus} does not exist"))
        if gen.p_min < 0:
            out.append(Violation(ent, "p_min must be >= 0"))
        if not (gen.p_min <= gen.dispatch <= gen.p_max + 1e-9):
            out.append(Violation(ent, f"dispatch {gen.dispatch} outside [{gen.p_min}, {gen.p_max}]"))
        if gen.p_max > 0:
            any_capacity = True
    if not any_capacity:
        out.append(Violation("generators", "no generator with positive capacity"))

    for i, ld in enumerate(network.loads):
        ent = f"load {i} (bus {ld.bus})"
        if ld.bus not in bus_ids:
            out.append(Violation(ent, f"bus {ld.bus} does not exist"))
        if ld.demand < 0:
            out.append(Violation(ent, "demand must be >= 0"))
        if not (0 <= ld.served <= ld.demand + 1e-9):
            out.append(Violation(ent, f"served {ld.served} outside [0, {ld.demand}]"))

    if network.base_mva <= 0:
        out.append(Violation("network", "base_mva must be positive"))
    return out


def require_valid(network: Network) -> Network:
    violations = validate(network)
    if violations:
        raise ValidationError("; ".join(str(v) for v in violations))
    return network


def to_json(network: Network) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "base_mva": network.base_mva,
        "buses": [{"id": b.id, "name": b.name} for b in network.buses],
        "branches": [
            {
                "id": br.id,
                "from_bus": br.from_bus,
                "to_bus": br.to_bus,
                "reactance": br.reactance,
                "flow_limit": br.flow_limit,
                "kind": br.kind,
                "maintainable": br.maintainable,
            }
            for br in network.branches
        ],
        "generators": [
            {"bus": g.bus, "p_max": g.p_max, "p_min": g.p_min, "dispatch": g.dispatch}
            for g in network.generators
        ],
        "loads": [{"bus": ld.bus, "demand": ld.demand, "served": ld.served} for ld in network.loads],
    }
    return json.dumps(doc, indent=1)


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise ParseError(f"missing key at {path}.{key}")
    return doc[key]


def _field(doc: dict, key: str, path: str, kind, index: int):
    where = f"{path}[{index}].{key}"
    if key not in doc:
        raise ParseError(f"missing key at {where}")
    value = doc[key]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ParseError(f"bad value at {where}: {value!r}") from None


def from_json(text: str) -> Network:
    """Parse the canonical document; errors name the offending JSON path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object at $")

    for key in ("base_mva", "buses", "branches", "generators", "loads"):
        if key not in doc:
            raise ParseError(f"missing key at $.{key}")
        if key != "base_mva" and not isinstance(doc[key], list):
            raise ParseError(f"expected array at $.{key}")

    buses = tuple(
        Bus(id=_field(b, "id", "$.buses", int, i), name=str(b.get("name", "")))
        for i, b in enumerate(doc["buses"])
    )
    branches = tuple(
        Branch(
            id=_field(br, "id", "$.branches", int, i),
            from_bus=_field(br, "from_bus", "$.branches", int, i),
            to_bus=_field(br, "to_bus", "$.branches", int, i),
            reactance=_field(br, "reactance", "$.branches", float, i),
            flow_limit=_field(br, "flow_limit", "$.branches", float, i),
            kind=str(br.get("kind", LINE)),
            maintainable=bool(br.get("maintainable", False)),
        )
        for i, br in enumerate(doc["branches"])
    )
    generators = tuple(
        Generator(
            bus=_field(g, "bus", "$.generators", int, i),
            p_max=_field(g, "p_max", "$.generators", float, i),
            p_min=_field(g, "p_min", "$.generators", float, i),
            dispatch=_field(g, "dispatch", "$.generators", float, i),
        )
        for i, g in enumerate(doc["generators"])
    )
    loads = tuple(
        Load(
            bus=_field(ld, "bus", "$.loads", int, i),
            demand=_field(ld, "demand", "$.loads", float, i),
            served=_field(ld, "served", "$.loads", float, i),
        )
        for i, ld in enumerate(doc["loads"])
    )
    network = Network(
        buses=buses,
        branches=branches,
        generators=generators,
        loads=loads,
        base_mva=float(_need(doc, "base_mva", "$")),
    )
    return require_valid(network)
