"""Component failure-probability functions and maintenance effects.

The per-branch failure probability is piecewise linear in the loading
ratio: flat at ``p_base`` up to ``ell_knee``, rising linearly to ``p_peak``
at ``ell_sat`` and flat beyond. The parameters are uncalibrated defaults
and fully configurable; absolute risk numbers therefore carry no field
meaning out of the box.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import GridRiskError, ValidationError
from .network import LINE, TRANSFORMER, Network

SCALE = "scale"
REPLACE = "replace"

CONFIG_FORMAT_VERSION = 1

DEFAULT_LINE = None  # assigned below, after PhiParams exists
DEFAULT_TRANSFORMER = None
DEFAULT_STAGE_CAP = 100
DEFAULT_SHED_WEIGHT = 100.0
DEFAULT_SCALE_FACTOR = 0.1


@dataclass(frozen=True)
class PhiParams:
    p_base: float
    p_peak: float
    ell_knee: float
    ell_sat: float

    def __post_init__(self):
        if not (0.0 <= self.p_base <= self.p_peak <= 1.0):
            raise ValidationError(
                f"need 0 <= p_base <= p_peak <= 1, got ({self.p_base}, {self.p_peak})"
            )
        if not (0.0 <= self.ell_knee < self.ell_sat):
            raise ValidationError(
                f"need 0 <= ell_knee < ell_sat, got ({self.ell_knee}, {self.ell_sat})"
            )

    def probability(self, loading_ratio: float) -> float:
        if loading_ratio <= self.ell_knee:
            return self.p_base
        if loading_ratio >= self.ell_sat:
            return self.p_peak
        frac = (loading_ratio - self.ell_knee) / (self.ell_sat - self.ell_knee)
        return self.p_base + frac * (self.p_peak - self.p_base)

    def probability_array(self, loading_ratios: np.ndarray) -> np.ndarray:
        frac = np.clip(
            (loading_ratios - self.ell_knee) / (self.ell_sat - self.ell_knee), 0.0, 1.0
        )
        return self.p_base + frac * (self.p_peak - self.p_base)

    def as_dict(self) -> dict:
        return {
            "p_base": self.p_base,
            "p_peak": self.p_peak,
            "ell_knee": self.ell_knee,
            "ell_sat": self.ell_sat,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PhiParams":
        try:
            return cls(
                p_base=float(doc["p_base"]),
                p_peak=float(doc["p_peak"]),
                ell_knee=float(doc["ell_knee"]),
                ell_sat=float(doc["ell_sat"]),
            )
        except KeyError as exc:
            raise ValidationError(f"failure-model parameters missing key {exc}") from None


DEFAULT_LINE = PhiParams(p_base=1e-4, p_peak=0.999, ell_knee=1.0, ell_sat=1.4)
DEFAULT_TRANSFORMER = PhiParams(p_base=5e-4, p_peak=0.999, ell_knee=1.0, ell_sat=1.3)


@dataclass(frozen=True)
class FailureModel:
    """Per-branch failure parameters, resolved for one concrete network."""

    params: dict[int, PhiParams]
    line_default: PhiParams = DEFAULT_LINE
    transformer_default: PhiParams = DEFAULT_TRANSFORMER

    @classmethod
    def for_network(
        cls,
        network: Network,
        line_default: PhiParams = DEFAULT_LINE,
        transformer_default: PhiParams = DEFAULT_TRANSFORMER,
        overrides: dict[int, PhiParams] | None = None,
    ) -> "FailureModel":
        overrides = overrides or {}
        params = {}
        for br in network.branches:
            default = transformer_default if br.kind == TRANSFORMER else line_default
            params[br.id] = overrides.get(br.id, default)
        return cls(params=params, line_default=line_default, transformer_default=transformer_default)

    def params_for(self, branch_id: int) -> PhiParams:
        try:
            return self.params[branch_id]
        except KeyError:
            raise GridRiskError(f"unknown branch id {branch_id} in failure model") from None

    def with_maintenance(self, effect: "MaintenanceEffect", maintained: set[int]) -> "FailureModel":
        params = dict(self.params)
        for branch_id in maintained:
            params[branch_id] = effect.apply(self.params_for(branch_id))
        return FailureModel(params, self.line_default, self.transformer_default)


def failure_probability(model: FailureModel, branch_id: int, loading_ratio: float) -> float:
    if loading_ratio < 0:
        raise ValidationError(f"loading ratio must be >= 0, got {loading_ratio}")
    return model.params_for(branch_id).probability(loading_ratio)


@dataclass(frozen=True)
class MaintenanceEffect:
    mode: str = SCALE
    scale_factor: float = DEFAULT_SCALE_FACTOR
    replacement: PhiParams | None = None

    def __post_init__(self):
        if self.mode not in (SCALE, REPLACE):
            raise ValidationError(f"unknown maintenance mode {self.mode!r}")
        if self.mode == SCALE and not (0.0 < self.scale_factor <= 1.0):
            raise ValidationError(f"scale_factor must be in (0, 1], got {self.scale_factor}")
        if self.mode == REPLACE and self.replacement is None:
            raise ValidationError("replace mode requires replacement parameters")

    def apply(self, params: PhiParams) -> PhiParams:
        if self.mode == SCALE:
            return PhiParams(
                p_base=params.p_base * self.scale_factor,
                p_peak=params.p_peak * self.scale_factor,
                ell_knee=params.ell_knee,
                ell_sat=params.ell_sat,
            )
        return self.replacement

    def as_dict(self) -> dict:
        doc = {"mode": self.mode}
        if self.mode == SCALE:
            doc["scale_factor"] = self.scale_factor
        else:
            doc["replacement"] = self.replacement.as_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "MaintenanceEffect":
        mode = doc.get("mode", SCALE)
        if mode == REPLACE:
            return cls(mode=REPLACE, replacement=PhiParams.from_dict(doc["replacement"]))
        return cls(mode=SCALE, scale_factor=float(doc.get("scale_factor", DEFAULT_SCALE_FACTOR)))


@dataclass(frozen=True)
class SimulationConfig:
    """Everything that parameterizes sample generation, loadable from JSON."""

    line_default: PhiParams = DEFAULT_LINE
    transformer_default: PhiParams = DEFAULT_TRANSFORMER
    overrides: dict[int, PhiParams] = field(default_factory=dict)
    maintenance: MaintenanceEffect = field(default_factory=MaintenanceEffect)
    stage_cap: int = DEFAULT_STAGE_CAP
    shed_weight: float = DEFAULT_SHED_WEIGHT
    full_traces: bool = False

    def __post_init__(self):
        if self.stage_cap < 1:
            raise ValidationError("stage_cap must be >= 1")

    def model_for(self, network: Network) -> FailureModel:
        return FailureModel.for_network(
            network, self.line_default, self.transformer_default, self.overrides
        )

    def as_dict(self) -> dict:
        return {
            "format_version": CONFIG_FORMAT_VERSION,
            "failure_defaults": {
                "line": self.line_default.as_dict(),
                "transformer": self.transformer_default.as_dict(),
            },
            "overrides": {str(k): v.as_dict() for k, v in sorted(self.overrides.items())},
            "maintenance": self.maintenance.as_dict(),
            "stage_cap": self.stage_cap,
            "shed_weight": self.shed_weight,
            "full_traces": self.full_traces,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> "SimulationConfig":
        defaults = doc.get("failure_defaults", {})
        return cls(
            line_default=(
                PhiParams.from_dict(defaults["line"]) if "line" in defaults else DEFAULT_LINE
            ),
            transformer_default=(
                PhiParams.from_dict(defaults["transformer"])
                if "transformer" in defaults
                else DEFAULT_TRANSFORMER
            ),
            overrides={
                int(k): PhiParams.from_dict(v) for k, v in doc.get("overrides", {}).items()
            },
            maintenance=MaintenanceEffect.from_dict(doc.get("maintenance", {})),
            stage_cap=int(doc.get("stage_cap", DEFAULT_STAGE_CAP)),
            shed_weight=float(doc.get("shed_weight", DEFAULT_SHED_WEIGHT)),
            full_traces=bool(doc.get("full_traces", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "SimulationConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid config JSON: {exc}") from None
        return cls.from_dict(doc)

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.as_dict(), sort_keys=True).encode()
        ).hexdigest()

    def sampling_digest(self) -> str:
        """Hash of the parts that shape sample generation.

        The maintenance effect is excluded: samples are always generated
        under the baseline model, so editing the effect must not orphan an
        existing sample set (it only invalidates derived matrices).
        """
        doc = self.as_dict()
        del doc["maintenance"]
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()
