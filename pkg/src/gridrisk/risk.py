"""Consequence/survival matrices and blackout-risk estimators.

From a sample set we build the consequence vector C and, for every
maintainable component, the baseline and post-maintenance path factors
(P and Q). Any maintenance strategy's risk is then a masked row product
of the precomputed Q/P ratio matrix against C; no resimulation is ever
needed. ``exact_risk_tiny`` is the brute-force enumeration oracle used to
verify unbiasedness on small fixtures.
"""

from __future__ import annotations

import csv
import struct
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from math import comb as math_comb

import numpy as np

from .errors import GridRiskError, RefusalError, ValidationError
from .failure import FailureModel, MaintenanceEffect
from .samples import SampleSet, gamma_factor

_BLOB_MAGIC = b"GRMX"
_BLOB_VERSION = 1

ENUMERATION_PATH_CAP = 10_000_000


@dataclass(frozen=True)
class Strategy:
    maintained: frozenset[int]

    @classmethod
    def of(cls, ids) -> "Strategy":
        return cls(maintained=frozenset(int(i) for i in ids))

    def ordered(self) -> tuple[int, ...]:
        return tuple(sorted(self.maintained))

    def __len__(self) -> int:
        return len(self.maintained)


EMPTY_STRATEGY = Strategy(frozenset())


@dataclass(frozen=True)
class MatrixBundle:
    """Y0-independent part of the risk matrices for one sample set."""

    component_ids: tuple[int, ...]
    shed: np.ndarray    # (N,)
    p: np.ndarray       # (K, N)
    q: np.ndarray       # (K, N)
    ratio: np.ndarray   # (K, N), q / p
    network_hash: str = ""
    model_hash: str = ""

    @property
    def n(self) -> int:
        return len(self.shed)

    def at(self, y0: float) -> "RiskMatrices":
        c = np.where(self.shed >= y0, self.shed, 0.0)
        return RiskMatrices(
            c=c,
            p=self.p,
            q=self.q,
            ratio=self.ratio,
            y0=y0,
            component_ids=self.component_ids,
            n=self.n,
            shed=self.shed,
        )


@dataclass(frozen=True)
class RiskMatrices:
    c: np.ndarray
    p: np.ndarray
    q: np.ndarray
    ratio: np.ndarray
    y0: float
    component_ids: tuple[int, ...]
    n: int
    shed: np.ndarray

    def row_of(self, component_id: int) -> int:
        try:
            return self.component_ids.index(component_id)
        except ValueError:
            raise GridRiskError(f"unknown component id {component_id}") from None


def build_bundle(
    sample_set: SampleSet,
    baseline: FailureModel,
    effect: MaintenanceEffect,
    component_ids: tuple[int, ...] | None = None,
) -> MatrixBundle:
    samples = sample_set.samples
    if component_ids is None:
        if not samples:
            raise ValidationError("cannot infer component ids from an empty sample set")
        component_ids = tuple(sorted(samples[0].traces.keys()))
    k_count, n = len(component_ids), len(samples)
    shed = np.array([s.shed for s in samples])
    p = np.empty((k_count, n))
    q = np.empty((k_count, n))

    # most samples share short identical traces, so memoize per-trace factors
    memo: dict[tuple, tuple[float, float]] = {}
    for row, cid in enumerate(component_ids):
        base_params = baseline.params_for(cid)
        maint_params = effect.apply(base_params)
        for i, sample in enumerate(samples):
            trace = sample.traces.get(cid)
            if trace is None:
                raise GridRiskError(
                    f"sample {i} carries no trace for component {cid}"
                )
            failed = cid in sample.fail_stage
            key = (cid, trace, failed)
            hit = memo.get(key)
            if hit is None:
                phi = [base_params.probability(l) for l in trace]
                phib = [maint_params.probability(l) for l in trace]
                hit = (
                    gamma_factor(phi, sample, cid),
                    gamma_factor(phib, sample, cid),
                )
                memo[key] = hit
            p[row, i], q[row, i] = hit
    bad = np.argwhere(p <= 0.0)
    if bad.size:
        row, i = bad[0]
        raise GridRiskError(
            f"P is zero for component {component_ids[row]} in sample {i}: the sample "
            "has zero probability under the baseline model (model/sample-set mismatch)"
        )
    return MatrixBundle(
        component_ids=component_ids,
        shed=shed,
        p=p,
        q=q,
        ratio=q / p,
        network_hash=sample_set.network_hash,
        model_hash=sample_set.model_hash,
    )


def build_matrices(
    sample_set: SampleSet,
    baseline: FailureModel,
    effect: MaintenanceEffect,
    y0: float,
    component_ids: tuple[int, ...] | None = None,
) -> RiskMatrices:
    return build_bundle(sample_set, baseline, effect, component_ids).at(y0)


def estimate_risk(m: RiskMatrices) -> float:
    if m.n < 1:
        raise ValidationError("need at least one sample")
    return float(np.sum(m.c) / m.n)


def strategy_weights(m: RiskMatrices, strategy: Strategy) -> np.ndarray:
    if not strategy.maintained:
        return np.ones(m.n)
    rows = [m.row_of(cid) for cid in strategy.ordered()]
    return np.prod(m.ratio[rows, :], axis=0)


def estimate_risk_strategy(m: RiskMatrices, strategy: Strategy) -> float:
    weights = strategy_weights(m, strategy)
    return float(np.sum(weights * m.c) / m.n)


# --------------------------------------------------------------------------- #
# Exact enumeration oracle for tiny systems
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class TinySystem:
    """Finite cascade space: components fail independently per stage with a
    probability that may depend on the already-failed set; consequence is a
    function of the final failed set."""

    components: tuple[int, ...]
    shed: Callable[[frozenset[int]], float]
    stage_cap: int = 100


def _path_count_bound(n_components: int) -> int:
    """Paths enumerated for n components (every stage picks a survivor subset,
    empty subset terminates); counts subsets visited, an upper bound when the
    stage cap binds."""
    counts = [1]
    for n in range(1, n_components + 1):
        total = 1  # the terminal empty subset
        for k in range(1, n + 1):
            total += math_comb(n, k) * counts[n - k]
        counts.append(total)
    return counts[n_components]


def exact_risk_tiny(
    system: TinySystem,
    phi: Mapping[int, float] | Callable[[int, frozenset[int]], float],
    y0: float,
) -> float:
    """Risk by full path enumeration; refuses beyond ENUMERATION_PATH_CAP paths."""
    bound = _path_count_bound(len(system.components))
    if bound > ENUMERATION_PATH_CAP:
        raise RefusalError(
            f"enumeration would visit about {bound} paths, beyond the "
            f"{ENUMERATION_PATH_CAP} cap"
        )
    if callable(phi):
        phi_of = phi
    else:
        table = dict(phi)
        phi_of = lambda k, failed: table[k]

    paths = 0

    def consequence(failed: frozenset[int]) -> float:
        h = system.shed(failed)
        return h if h >= y0 else 0.0

    def recurse(failed: frozenset[int], prob: float, depth: int) -> float:
        nonlocal paths
        survivors = [k for k in system.components if k not in failed]
        probs = {k: phi_of(k, failed) for k in survivors}
        total = 0.0
        for mask in range(1 << len(survivors)):
            paths += 1
            if paths > ENUMERATION_PATH_CAP:
                raise RefusalError(
                    f"enumeration exceeds {ENUMERATION_PATH_CAP} paths"
                )
            branch_prob = prob
            tripped = []
            for bit, k in enumerate(survivors):
                if mask >> bit & 1:
                    branch_prob *= probs[k]
                    tripped.append(k)
                else:
                    branch_prob *= 1.0 - probs[k]
            if branch_prob == 0.0:
                continue
            if not tripped:
                total += branch_prob * consequence(failed)
            elif depth + 1 >= system.stage_cap:
                # truncation mirrors the simulator: consequence of the state
                # reached by the final trips
                total += branch_prob * consequence(failed | frozenset(tripped))
            else:
                total += recurse(failed | frozenset(tripped), branch_prob, depth + 1)
        return total

    return recurse(frozenset(), 1.0, 0)


# --------------------------------------------------------------------------- #
# Export formats
# --------------------------------------------------------------------------- #

def save_blob(path: str, bundle: MatrixBundle) -> None:
    """dims header + little-endian float64 payload; see docs/formats.md."""
    k_count, n = bundle.p.shape
    with open(path, "wb") as fh:
        fh.write(_BLOB_MAGIC)
        fh.write(struct.pack("<IQQ", _BLOB_VERSION, k_count, n))
        fh.write(("%-64s" % bundle.network_hash[:64]).encode())
        fh.write(("%-64s" % bundle.model_hash[:64]).encode())
        fh.write(np.asarray(bundle.component_ids, dtype="<i8").tobytes())
        fh.write(bundle.shed.astype("<f8").tobytes())
        fh.write(bundle.p.astype("<f8").tobytes())
        fh.write(bundle.q.astype("<f8").tobytes())


def load_blob(path: str) -> MatrixBundle:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BLOB_MAGIC:
            raise ValidationError(f"{path}: not a matrix blob")
        version, k_count, n = struct.unpack("<IQQ", fh.read(20))
        if version != _BLOB_VERSION:
            raise ValidationError(f"{path}: unsupported blob version {version}")
        network_hash = fh.read(64).decode().strip()
        model_hash = fh.read(64).decode().strip()
        ids = np.frombuffer(fh.read(8 * k_count), dtype="<i8")
        shed = np.frombuffer(fh.read(8 * n), dtype="<f8")
        p = np.frombuffer(fh.read(8 * k_count * n), dtype="<f8").reshape(k_count, n)
        q = np.frombuffer(fh.read(8 * k_count * n), dtype="<f8").reshape(k_count, n)
    if p.size and p.min() <= 0:
        raise ValidationError(f"{path}: blob contains nonpositive P entries")
    return MatrixBundle(
        component_ids=tuple(int(i) for i in ids),
        shed=shed,
        p=p,
        q=q,
        ratio=q / p,
        network_hash=network_hash,
        model_hash=model_hash,
    )


def export_csv(path: str, bundle: MatrixBundle) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["sample", "shed"]
        header += [f"P_{cid}" for cid in bundle.component_ids]
        header += [f"Q_{cid}" for cid in bundle.component_ids]
        writer.writerow(header)
        for i in range(bundle.n):
            row = [i, repr(float(bundle.shed[i]))]
            row += [repr(float(v)) for v in bundle.p[:, i]]
            row += [repr(float(v)) for v in bundle.q[:, i]]
            writer.writerow(row)
