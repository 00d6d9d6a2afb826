"""Cascade simulator: staged random branch tripping over redispatch + DC flow.

Each stage evaluates the current topology (LP redispatch, then B-theta
flows), records loading ratios, and draws one independent Bernoulli trip
per in-service branch. No trips ends the cascade; the stage cap truncates
runaways. Stage evaluations are memoized by outage set, which makes large
sample runs cheap because most samples never leave the base topology.

Sample i of a run draws from a counter-based RNG keyed by
(master_seed, i), so a sample set is fully determined by its seed and is
independent of worker count and scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .failure import SimulationConfig
from .network import Network
from .redispatch import redispatch
from .samples import CascadeSample, SampleSet
from . import dcflow

_TOPOLOGY_CACHE_CAP = 200_000


@dataclass(frozen=True)
class StageState:
    outaged: frozenset[int]
    live: tuple[int, ...]          # in-service branch ids, ascending
    loading: dict[int, float]      # live branch id -> |flow| / limit
    phi: np.ndarray                # failure probability per live branch
    shed: float


class CascadeEngine:
    def __init__(self, network: Network, config: SimulationConfig):
        self.network = network
        self.config = config
        self.model = config.model_for(network)
        self.branch_ids = tuple(sorted(br.id for br in network.branches))
        self._limits = {br.id: br.flow_limit for br in network.branches}
        self._params = {bid: self.model.params_for(bid) for bid in self.branch_ids}
        if config.full_traces:
            self.trace_ids = self.branch_ids
        else:
            self.trace_ids = tuple(sorted(network.maintainable_ids()))
        self._cache: dict[frozenset[int], StageState] = {}
        self._base_state: StageState | None = None
        self._base_traces: dict[int, tuple[float, ...]] | None = None

    def stage_state(self, outaged: frozenset[int]) -> StageState:
        state = self._cache.get(outaged)
        if state is not None:
            return state
        in_service = frozenset(self.branch_ids) - outaged
        dispatch, served, shed = redispatch(
            self.network, in_service, self.config.shed_weight
        )
        flows = dcflow.dc_power_flow(self.network, in_service, dispatch, served)
        live = tuple(bid for bid in self.branch_ids if bid not in outaged)
        loading = {bid: abs(flows[bid]) / self._limits[bid] for bid in live}
        phi = np.array([self._params[bid].probability(loading[bid]) for bid in live])
        state = StageState(outaged, live, loading, phi, shed)
        if len(self._cache) >= _TOPOLOGY_CACHE_CAP:
            self._cache.clear()
        self._cache[outaged] = state
        return state

    def simulate(self, rng: np.random.Generator, seed_path: str = "") -> CascadeSample:
        if self._base_state is None:
            self._base_state = self.stage_state(frozenset())
            self._base_traces = {
                bid: (self._base_state.loading[bid],) for bid in self.trace_ids
            }
        state = self._base_state
        draws = rng.random(len(state.live))
        hits = np.flatnonzero(draws < state.phi)
        if hits.size == 0:
            # by far the common case: nothing trips at the base state
            return CascadeSample(
                stages=0,
                shed=state.shed,
                events=(),
                traces=self._base_traces,
                fail_stage={},
                seed_path=seed_path,
                truncated=False,
            )

        traces: dict[int, list[float]] = {
            bid: [state.loading[bid]] for bid in self.trace_ids
        }
        fail_stage: dict[int, int] = {}
        events: list[tuple[int, int]] = []
        tripped = [state.live[i] for i in hits]
        outaged: frozenset[int] = frozenset()
        truncated = False
        stage = 0
        while True:
            for bid in tripped:
                fail_stage[bid] = stage
                events.append((stage, bid))
            outaged = outaged | frozenset(tripped)
            stage += 1
            if stage >= self.config.stage_cap:
                truncated = True
                break
            state = self.stage_state(outaged)
            for bid in self.trace_ids:
                if bid not in outaged:
                    traces[bid].append(state.loading[bid])
            draws = rng.random(len(state.live))
            hits = np.flatnonzero(draws < state.phi)
            if hits.size == 0:
                break
            tripped = [state.live[i] for i in hits]
        final = self.stage_state(outaged)
        return CascadeSample(
            stages=stage,
            shed=final.shed,
            events=tuple(events),
            traces={bid: tuple(vals) for bid, vals in traces.items()},
            fail_stage=fail_stage,
            seed_path=seed_path,
            truncated=truncated,
        )

    def simulate_index(self, master_seed: int, index: int) -> CascadeSample:
        rng = substream(master_seed, index)
        return self.simulate(rng, seed_path=f"philox:{master_seed}:{index}")


def substream(master_seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for sample ``index`` of a run."""
    if not 0 <= master_seed < 2**64:
        raise ValidationError(f"master seed must be a uint64, got {master_seed}")
    if index < 0:
        raise ValidationError(f"sample index must be >= 0, got {index}")
    return np.random.Generator(np.random.Philox(key=np.array([master_seed, index], dtype=np.uint64)))


def simulate_cascade(
    network: Network,
    config: SimulationConfig,
    rng: np.random.Generator,
    seed_path: str = "",
) -> CascadeSample:
    return CascadeEngine(network, config).simulate(rng, seed_path)


_worker_engine: CascadeEngine | None = None


def _worker_init(network: Network, config: SimulationConfig):
    global _worker_engine
    _worker_engine = CascadeEngine(network, config)


def _worker_run(args: tuple[int, int, int]) -> list[CascadeSample]:
    master_seed, start, stop = args
    return [_worker_engine.simulate_index(master_seed, i) for i in range(start, stop)]


def generate_samples(
    network: Network,
    config: SimulationConfig,
    n: int,
    master_seed: int,
    start_index: int = 0,
    workers: int = 1,
    engine: CascadeEngine | None = None,
) -> SampleSet:
    """Simulate samples ``start_index .. start_index + n - 1`` of a run.

    The substream indexing makes this an append: generating [0, N) and then
    [N, N + n2) yields exactly the same set as one [0, N + n2) run.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if workers > 1 and n >= 4 * workers:
        chunk = (n + workers - 1) // workers
        jobs = [
            (master_seed, start_index + lo, start_index + min(lo + chunk, n))
            for lo in range(0, n, chunk)
        ]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_worker_init, initargs=(network, config)
        ) as pool:
            chunks = list(pool.map(_worker_run, jobs))
        samples = [s for chunk_samples in chunks for s in chunk_samples]
    else:
        engine = engine or CascadeEngine(network, config)
        samples = [
            engine.simulate_index(master_seed, i)
            for i in range(start_index, start_index + n)
        ]
    return SampleSet(
        samples=tuple(samples),
        network_hash=network.digest(),
        model_hash=config.sampling_digest(),
        master_seed=master_seed,
    )


def default_workers() -> int:
    return min(8, os.cpu_count() or 1)
