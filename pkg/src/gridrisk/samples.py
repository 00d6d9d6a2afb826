"""Cascade sample records, per-component path factors, and persistence.

Trace convention: a branch's trace holds its loading ratio at every stage
where it was tested for failure. A branch that failed at stage s therefore
has s survival points followed by the loading at its failure stage; a
surviving branch has one point per executed stage, including the final
all-survive stage that terminates the cascade. With this convention the
product of per-component factors is exactly the probability of the
simulated path, which is what makes reweighting between failure models
unbiased.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import GridRiskError, ValidationError
from .failure import FailureModel, PhiParams

SAMPLES_FORMAT_VERSION = 1
_HEADER_WIDTH = 256


@dataclass(frozen=True)
class CascadeSample:
    stages: int
    shed: float
    events: tuple[tuple[int, int], ...]  # (stage, branch id)
    traces: dict[int, tuple[float, ...]]
    fail_stage: dict[int, int]
    seed_path: str = ""
    truncated: bool = False

    def failed(self, branch_id: int) -> bool:
        return branch_id in self.fail_stage


@dataclass(frozen=True)
class SampleSet:
    samples: tuple[CascadeSample, ...]
    network_hash: str
    model_hash: str
    master_seed: int
    count: int = field(default=-1)

    def __post_init__(self):
        if self.count == -1:
            object.__setattr__(self, "count", len(self.samples))
        if self.count != len(self.samples):
            raise ValidationError(
                f"sample set count {self.count} != stored samples {len(self.samples)}"
            )

    def extend(self, more: "SampleSet") -> "SampleSet":
        if (more.network_hash, more.model_hash, more.master_seed) != (
            self.network_hash,
            self.model_hash,
            self.master_seed,
        ):
            raise ValidationError("cannot extend a sample set generated under different inputs")
        return SampleSet(
            samples=self.samples + more.samples,
            network_hash=self.network_hash,
            model_hash=self.model_hash,
            master_seed=self.master_seed,
        )


def gamma_factor(phi, sample: CascadeSample, branch_id: int) -> float:
    """Path-probability factor of one component given its evaluated
    failure probabilities ``phi`` (one per recorded trace point)."""
    trace = sample.traces.get(branch_id)
    if trace is None:
        raise GridRiskError(
            f"no trace recorded for branch {branch_id}; it is not maintainable in this sample set"
        )
    if len(phi) != len(trace):
        raise GridRiskError(
            f"branch {branch_id}: {len(phi)} probabilities for {len(trace)} trace points"
        )
    gamma = 1.0
    if sample.failed(branch_id):
        for p in phi[:-1]:
            gamma *= 1.0 - p
        gamma *= phi[-1]
    else:
        for p in phi:
            gamma *= 1.0 - p
    return gamma


def gamma_for_params(params: PhiParams, sample: CascadeSample, branch_id: int) -> float:
    trace = sample.traces.get(branch_id)
    if trace is None:
        raise GridRiskError(
            f"no trace recorded for branch {branch_id}; it is not maintainable in this sample set"
        )
    return gamma_factor([params.probability(l) for l in trace], sample, branch_id)


def sample_probability(sample: CascadeSample, models: FailureModel) -> float:
    """Path probability g(z), stage-major over the per-stage failure sets.

    Requires full traces (every modeled branch recorded), i.e. samples
    generated with ``full_traces`` enabled.
    """
    missing = [k for k in models.params if k not in sample.traces]
    if missing:
        raise GridRiskError(
            f"full traces unavailable: no trace for branches {missing[:5]}"
            f"{'...' if len(missing) > 5 else ''}"
        )
    rounds = max((len(t) for t in sample.traces.values()), default=0)
    g = 1.0
    for j in range(rounds):
        for branch_id, trace in sample.traces.items():
            if j >= len(trace):
                continue
            prob = models.params_for(branch_id).probability(trace[j])
            if sample.fail_stage.get(branch_id) == j:
                g *= prob
            else:
                g *= 1.0 - prob
    return g


def check_sample(sample: CascadeSample, total_demand: float, stage_cap: int) -> list[str]:
    """Invariant check used by tests and by load-time verification."""
    problems = []
    if sample.shed > total_demand + 1e-6:
        problems.append(f"shed {sample.shed} exceeds total demand {total_demand}")
    if sample.shed < 0:
        problems.append("negative shed")
    if sample.stages > stage_cap:
        problems.append(f"stages {sample.stages} above cap {stage_cap}")
    from_events = {bid: stage for stage, bid in sample.events}
    if from_events != sample.fail_stage:
        problems.append("events and fail_stage disagree")
    for bid, stage in sample.fail_stage.items():
        trace = sample.traces.get(bid)
        if trace is not None and len(trace) != stage + 1:
            problems.append(f"branch {bid}: failed at stage {stage} but trace has {len(trace)} points")
        if stage >= sample.stages:
            problems.append(f"branch {bid}: fail stage {stage} not below sample stages {sample.stages}")
    for bid, trace in sample.traces.items():
        if bid in sample.fail_stage:
            continue
        expect = sample.stages if sample.truncated else sample.stages + 1
        if len(trace) != expect:
            problems.append(f"branch {bid}: survivor trace has {len(trace)} points, expected {expect}")
    return problems


# --------------------------------------------------------------------------- #
# Persistence: one fixed-width JSON header line, then one JSON doc per sample
# --------------------------------------------------------------------------- #

def _header_line(network_hash: str, model_hash: str, master_seed: int, count: int) -> bytes:
    doc = json.dumps(
        {
            "format_version": SAMPLES_FORMAT_VERSION,
            "network_hash": network_hash,
            "model_hash": model_hash,
            "master_seed": master_seed,
            "count": count,
        },
        separators=(",", ":"),
    )
    if len(doc) > _HEADER_WIDTH - 1:
        raise GridRiskError("sample-set header too large")
    return (doc + " " * (_HEADER_WIDTH - 1 - len(doc))).encode() + b"\n"


def _sample_line(sample: CascadeSample) -> str:
    return json.dumps(
        {
            "stages": sample.stages,
            "shed": sample.shed,
            "events": [[stage, bid] for stage, bid in sample.events],
            "traces": {str(k): list(v) for k, v in sample.traces.items()},
            "fail_stage": {str(k): v for k, v in sample.fail_stage.items()},
            "seed_path": sample.seed_path,
            "truncated": sample.truncated,
        },
        separators=(",", ":"),
    )


def _sample_from_line(line: str) -> CascadeSample:
    doc = json.loads(line)
    return CascadeSample(
        stages=doc["stages"],
        shed=doc["shed"],
        events=tuple((stage, bid) for stage, bid in doc["events"]),
        traces={int(k): tuple(v) for k, v in doc["traces"].items()},
        fail_stage={int(k): v for k, v in doc["fail_stage"].items()},
        seed_path=doc.get("seed_path", ""),
        truncated=doc.get("truncated", False),
    )


def save_samples(path: str, sample_set: SampleSet) -> None:
    with open(path, "wb") as fh:
        fh.write(
            _header_line(
                sample_set.network_hash,
                sample_set.model_hash,
                sample_set.master_seed,
                sample_set.count,
            )
        )
        for sample in sample_set.samples:
            fh.write(_sample_line(sample).encode() + b"\n")


def append_samples(path: str, sample_set: SampleSet, new_samples) -> SampleSet:
    """Append sample lines and patch the fixed-width header count in place."""
    extended = sample_set.extend(
        SampleSet(
            samples=tuple(new_samples),
            network_hash=sample_set.network_hash,
            model_hash=sample_set.model_hash,
            master_seed=sample_set.master_seed,
        )
    )
    with open(path, "r+b") as fh:
        fh.seek(0, os.SEEK_END)
        for sample in new_samples:
            fh.write(_sample_line(sample).encode() + b"\n")
        fh.seek(0)
        fh.write(
            _header_line(
                extended.network_hash,
                extended.model_hash,
                extended.master_seed,
                extended.count,
            )
        )
    return extended


def read_header(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = fh.readline()
    try:
        return json.loads(raw.decode())
    except json.JSONDecodeError:
        raise ValidationError(f"{path}: corrupt sample-set header") from None


def load_samples(path: str) -> SampleSet:
    with open(path, "rb") as fh:
        header_raw = fh.readline()
        try:
            header = json.loads(header_raw.decode())
        except json.JSONDecodeError:
            raise ValidationError(f"{path}: corrupt sample-set header") from None
        if header.get("format_version") != SAMPLES_FORMAT_VERSION:
            raise ValidationError(
                f"{path}: unsupported sample format {header.get('format_version')!r}"
            )
        samples = []
        for line in fh:
            if line.strip():
                samples.append(_sample_from_line(line.decode()))
    if len(samples) != header["count"]:
        raise ValidationError(
            f"{path}: header count {header['count']} != stored samples {len(samples)}"
        )
    return SampleSet(
        samples=tuple(samples),
        network_hash=header["network_hash"],
        model_hash=header["model_hash"],
        master_seed=header["master_seed"],
    )
