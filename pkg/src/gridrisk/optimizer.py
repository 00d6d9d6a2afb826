"""Maintenance-strategy search under a cardinality budget.

Three solvers over one set of risk matrices: exhaustive enumeration (the
oracle), a sensitivity-shortlist-then-enumerate heuristic, and greedy
forward selection. ``procedure_one`` wraps any of them in the adaptive
sample-growth loop driven by the credibility report.

Scenario accounting: ``scenarios_evaluated`` follows the convention of
counting only size-budget subsets for the enumeration phase (and the
closed-form total for greedy); ``scenarios_total`` additionally counts
smaller subsets and sensitivity passes actually evaluated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from . import cascade, credibility, risk as riskmod
from .errors import RefusalError, ValidationError
from .failure import SimulationConfig
from .network import Network
from .risk import EMPTY_STRATEGY, MatrixBundle, RiskMatrices, Strategy, build_bundle

ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class OptimizerConfig:
    m_max: int
    m_k: int | None = None
    beta: float = 0.95
    eps_bar: float = 0.1
    y0: float = 0.0
    n0: int = 5000
    max_rounds: int = 10
    max_n: int = 2_000_000  # hard budget on adaptive sample growth
    # minimum per-round growth: the required sample size is itself a noisy
    # estimate, and topping up by less than its own uncertainty stalls the
    # loop just above the target error for many rounds
    growth_floor: float = 1.25

    def validated(self, k_star: int) -> "OptimizerConfig":
        if not 1 <= self.m_max <= k_star:
            raise ValidationError(f"m_max must be in [1, {k_star}], got {self.m_max}")
        if self.m_k is not None and not self.m_max <= self.m_k <= k_star:
            raise ValidationError(
                f"m_k must be in [m_max, {k_star}], got {self.m_k}"
            )
        if self.n0 < 2:
            raise ValidationError("n0 must be >= 2")
        if self.max_rounds < 1:
            raise ValidationError("max_rounds must be >= 1")
        if self.max_n < self.n0:
            raise ValidationError("max_n must be >= n0")
        return self


@dataclass(frozen=True)
class RoundRecord:
    round: int
    n: int
    strategy: tuple[int, ...]
    risk: float
    epsilon_hat: float | None
    required_n: int | None

    def as_dict(self) -> dict:
        return {
            "round": self.round,
            "n": self.n,
            "strategy": list(self.strategy),
            "risk": self.risk,
            "epsilon_hat": self.epsilon_hat,
            "required_n": self.required_n,
        }


@dataclass(frozen=True)
class OptimizationResult:
    strategy: Strategy
    risk: float
    baseline_risk: float
    reduction_ratio: float | None
    scenarios_evaluated: int
    scenarios_total: int
    algorithm: str
    credibility: credibility.CredibilityReport | None = None
    history: tuple[RoundRecord, ...] = field(default_factory=tuple)
    converged: bool = True

    def as_dict(self) -> dict:
        return {
            "strategy": list(self.strategy.ordered()),
            "risk": self.risk,
            "baseline_risk": self.baseline_risk,
            "reduction_ratio": self.reduction_ratio,
            "scenarios_evaluated": self.scenarios_evaluated,
            "scenarios_total": self.scenarios_total,
            "algorithm": self.algorithm,
            "credibility": self.credibility.as_dict() if self.credibility else None,
            "history": [record.as_dict() for record in self.history],
            "converged": self.converged,
        }


def _reduction(baseline: float, value: float) -> float | None:
    if baseline <= 0:
        return None
    return 1.0 - value / baseline


def _result(m, best_strategy, best_risk, evaluated, total, algorithm) -> OptimizationResult:
    baseline = riskmod.estimate_risk(m)
    return OptimizationResult(
        strategy=best_strategy,
        risk=best_risk,
        baseline_risk=baseline,
        reduction_ratio=_reduction(baseline, best_risk),
        scenarios_evaluated=evaluated,
        scenarios_total=total,
        algorithm=algorithm,
    )


def enumerate_optimal(
    m: RiskMatrices, m_max: int, candidate_set=None
) -> OptimizationResult:
    """Global minimizer over all subsets of size <= m_max.

    Ties break toward smaller cardinality, then lexicographic ids; both come
    free from the ascending-size, lexicographic iteration order.
    """
    candidates = sorted(candidate_set) if candidate_set is not None else list(m.component_ids)
    total_subsets = sum(math.comb(len(candidates), j) for j in range(m_max + 1))
    if total_subsets > ENUMERATION_CAP:
        raise RefusalError(
            f"enumeration over {total_subsets} strategies exceeds the "
            f"{ENUMERATION_CAP} cap"
        )
    best_strategy = EMPTY_STRATEGY
    best_risk = riskmod.estimate_risk_strategy(m, EMPTY_STRATEGY)
    for size in range(1, m_max + 1):
        for combo in itertools.combinations(candidates, size):
            strategy = Strategy.of(combo)
            value = riskmod.estimate_risk_strategy(m, strategy)
            if value < best_risk:
                best_risk = value
                best_strategy = strategy
    return _result(
        m,
        best_strategy,
        best_risk,
        evaluated=math.comb(len(candidates), m_max),
        total=total_subsets,
        algorithm="enumeration",
    )


def single_component_risks(m: RiskMatrices) -> list[tuple[int, float]]:
    """(component, risk when only it is maintained), ascending risk then id."""
    rows = [
        (cid, riskmod.estimate_risk_strategy(m, Strategy.of([cid])))
        for cid in m.component_ids
    ]
    return sorted(rows, key=lambda item: (item[1], item[0]))


def algorithm_one(m: RiskMatrices, cfg: OptimizerConfig) -> OptimizationResult:
    """Sensitivity shortlist of the m_k best singles, then enumeration inside it."""
    cfg = cfg.validated(len(m.component_ids))
    if cfg.m_k is None:
        raise ValidationError("algorithm one requires m_k")
    shortlist = [cid for cid, _ in single_component_risks(m)[: cfg.m_k]]
    inner = enumerate_optimal(m, cfg.m_max, candidate_set=shortlist)
    return OptimizationResult(
        strategy=inner.strategy,
        risk=inner.risk,
        baseline_risk=inner.baseline_risk,
        reduction_ratio=inner.reduction_ratio,
        scenarios_evaluated=math.comb(cfg.m_k, cfg.m_max),
        scenarios_total=len(m.component_ids) + inner.scenarios_total,
        algorithm="one",
    )


def algorithm_two(m: RiskMatrices, cfg: OptimizerConfig) -> OptimizationResult:
    """Greedy forward selection, one commitment per round.

    All m_max rounds run (the closed-form scenario count assumes so);
    the returned strategy is the best prefix of the greedy path, so risk is
    non-increasing in the budget.
    """
    cfg = cfg.validated(len(m.component_ids))
    chosen: list[int] = []
    path: list[tuple[tuple[int, ...], float]] = [
        ((), riskmod.estimate_risk_strategy(m, EMPTY_STRATEGY))
    ]
    remaining = list(m.component_ids)
    for _ in range(cfg.m_max):
        best_cid = None
        best_value = math.inf
        for cid in remaining:
            value = riskmod.estimate_risk_strategy(m, Strategy.of(chosen + [cid]))
            if value < best_value:
                best_value = value
                best_cid = cid
        chosen.append(best_cid)
        remaining.remove(best_cid)
        path.append((tuple(chosen), best_value))

    k_star = len(m.component_ids)
    count = (2 * k_star - cfg.m_max + 1) * cfg.m_max // 2
    best_prefix, best_risk = min(path, key=lambda item: (item[1], len(item[0])))
    return _result(
        m,
        Strategy.of(best_prefix),
        best_risk,
        evaluated=count,
        total=count,
        algorithm="two",
    )


@dataclass(frozen=True)
class SensitivityRow:
    component: int
    risk: float
    reduction_ratio: float | None

    def as_dict(self) -> dict:
        return {
            "component": self.component,
            "risk": self.risk,
            "reduction_ratio": self.reduction_ratio,
        }


@dataclass(frozen=True)
class SensitivityReport:
    baseline_risk: float
    rows: tuple[SensitivityRow, ...]
    mean_risk: float
    mean_reduction: float | None
    y0: float
    n: int

    def as_dict(self) -> dict:
        return {
            "baseline_risk": self.baseline_risk,
            "rows": [row.as_dict() for row in self.rows],
            "mean": {"risk": self.mean_risk, "reduction_ratio": self.mean_reduction},
            "y0": self.y0,
            "n": self.n,
        }


def sensitivity_report(m: RiskMatrices) -> SensitivityReport:
    baseline = riskmod.estimate_risk(m)
    ranked = single_component_risks(m)
    rows = tuple(
        SensitivityRow(cid, value, _reduction(baseline, value)) for cid, value in ranked
    )
    mean_risk = sum(r.risk for r in rows) / len(rows) if rows else baseline
    return SensitivityReport(
        baseline_risk=baseline,
        rows=rows,
        mean_risk=mean_risk,
        mean_reduction=_reduction(baseline, mean_risk),
        y0=m.y0,
        n=m.n,
    )


_ALGORITHMS = {
    "enum": lambda m, cfg: enumerate_optimal(m, cfg.m_max),
    "one": algorithm_one,
    "two": algorithm_two,
}


class SampleProvider:
    """Grows one deterministic sample set on demand (in memory)."""

    def __init__(self, network: Network, config: SimulationConfig, master_seed: int, workers: int = 1):
        self.network = network
        self.config = config
        self.master_seed = master_seed
        self.workers = workers
        self._set = None

    def ensure(self, total: int):
        have = self._set.count if self._set is not None else 0
        if total > have:
            more = cascade.generate_samples(
                self.network,
                self.config,
                n=total - have,
                master_seed=self.master_seed,
                start_index=have,
                workers=self.workers,
            )
            self._set = self._set.extend(more) if self._set is not None else more
        return self._set


def procedure_one(
    network: Network,
    config: SimulationConfig,
    cfg: OptimizerConfig,
    algorithm: str,
    master_seed: int,
    workers: int = 1,
    provider: SampleProvider | None = None,
) -> OptimizationResult:
    """Adaptive loop: optimize, assess credibility, grow samples, repeat."""
    if algorithm not in _ALGORITHMS:
        raise ValidationError(f"unknown algorithm {algorithm!r}")
    provider = provider or SampleProvider(network, config, master_seed, workers)
    model = config.model_for(network)
    component_ids = tuple(sorted(network.maintainable_ids()))
    cfg.validated(len(component_ids))

    history: list[RoundRecord] = []
    n = cfg.n0
    result = None
    report = None
    converged = False
    for round_no in range(1, cfg.max_rounds + 1):
        sample_set = provider.ensure(n)
        bundle = build_bundle(sample_set, model, config.maintenance, component_ids)
        matrices = bundle.at(cfg.y0)
        result = _ALGORITHMS[algorithm](matrices, cfg)
        report = credibility.report(matrices, result.strategy, cfg.beta, cfg.eps_bar)
        history.append(
            RoundRecord(
                round=round_no,
                n=sample_set.count,
                strategy=result.strategy.ordered(),
                risk=result.risk,
                epsilon_hat=report.epsilon_hat,
                required_n=report.required_n,
            )
        )
        if report.required_n is None:
            # estimate is exactly zero: no relative target to meet, double up
            wanted = sample_set.count * 2
        elif report.required_n > sample_set.count:
            wanted = max(
                report.required_n, math.ceil(sample_set.count * cfg.growth_floor)
            )
        else:
            converged = True
            break
        if sample_set.count >= cfg.max_n:
            break  # sample budget exhausted; report unconverged
        n = min(wanted, cfg.max_n)

    return OptimizationResult(
        strategy=result.strategy,
        risk=result.risk,
        baseline_risk=result.baseline_risk,
        reduction_ratio=result.reduction_ratio,
        scenarios_evaluated=result.scenarios_evaluated,
        scenarios_total=result.scenarios_total,
        algorithm=result.algorithm,
        credibility=report,
        history=tuple(history),
        converged=converged,
    )
