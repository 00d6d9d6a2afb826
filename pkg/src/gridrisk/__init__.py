"""gridrisk: cascading-blackout risk from simulation data.

Simulate cascades once, then re-estimate blackout risk under any
component-maintenance strategy by reweighting the stored samples;
quantify estimate credibility, size the sample set adaptively, and
optimize which components to maintain under a cardinality budget.
"""

from .cascade import CascadeEngine, generate_samples, simulate_cascade, substream
from .credibility import (
    CredibilityReport,
    estimate_variance,
    normal_quantile,
    relative_error_bound,
    report,
    required_samples,
)
from .errors import GridRiskError, ParseError, RefusalError, ValidationError
from .failure import (
    FailureModel,
    MaintenanceEffect,
    PhiParams,
    SimulationConfig,
    failure_probability,
)
from .matpower import parse_matpower
from .network import Branch, Bus, Generator, Load, Network, from_json, to_json, validate
from .optimizer import (
    OptimizationResult,
    OptimizerConfig,
    algorithm_one,
    algorithm_two,
    enumerate_optimal,
    procedure_one,
    sensitivity_report,
)
from .risk import (
    MatrixBundle,
    RiskMatrices,
    Strategy,
    TinySystem,
    build_bundle,
    build_matrices,
    estimate_risk,
    estimate_risk_strategy,
    exact_risk_tiny,
    strategy_weights,
)
from .samples import CascadeSample, SampleSet, gamma_factor, sample_probability
from .workspace import Workspace

__version__ = "0.1.0"
