"""Read-only HTTP API over one workspace.

The service loads the network and the cached risk matrices once at
startup and serves what-if queries from memory; it never simulates.
Sample growth stays a CLI concern, so every endpoint here is
side-effect-free on the workspace.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from . import credibility, optimizer, risk as riskmod
from .errors import GridRiskError, RefusalError, ValidationError
from .network import TRANSFORMER
from .risk import Strategy
from .schemas import (
    ComponentInfo,
    NetworkResponse,
    OptimizeRequest,
    OptimizeResponse,
    RiskRequest,
    RiskResponse,
    SensitivityRequest,
    SensitivityResponse,
    SensitivityRow,
    StatsResponse,
)
from .workspace import Workspace


class ServiceState:
    def __init__(self, workspace: Workspace):
        self.workspace = workspace
        self.network = workspace.network()
        self.manifest = workspace.manifest()
        self.maintainable = {
            br.id: br for br in self.network.branches if br.maintainable
        }
        try:
            self.bundle = workspace.bundle()
            self.bundle_problem = None
        except ValidationError as exc:
            self.bundle = None
            self.bundle_problem = str(exc)

    def matrices(self, y0: float) -> riskmod.RiskMatrices:
        if self.bundle is None:
            raise HTTPException(status_code=409, detail=self.bundle_problem)
        return self.bundle.at(y0)

    def strategy(self, maintained: list[int]) -> Strategy:
        seen = set()
        for cid in maintained:
            if cid in seen:
                raise HTTPException(status_code=422, detail=f"duplicate component id {cid}")
            seen.add(cid)
            if cid not in self.maintainable:
                raise HTTPException(status_code=422, detail=f"unknown component id {cid}")
        return Strategy.of(maintained)


def create_app(workspace: Workspace | str) -> FastAPI:
    if isinstance(workspace, str):
        workspace = Workspace(workspace)
    state = ServiceState(workspace)
    app = FastAPI(title="gridrisk", version="0.1.0")
    app.state.gridrisk = state
    # local read-only planning tool: let the what-if page call from any origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.get("/api/network", response_model=NetworkResponse)
    def network_summary():
        net = state.network
        return NetworkResponse(
            buses=len(net.buses),
            branches=len(net.branches),
            lines=sum(1 for br in net.branches if br.kind != TRANSFORMER),
            transformers=sum(1 for br in net.branches if br.kind == TRANSFORMER),
            base_mva=net.base_mva,
            total_demand=net.total_demand(),
            maintainable=[
                ComponentInfo(
                    id=br.id, kind=br.kind, from_bus=br.from_bus, to_bus=br.to_bus
                )
                for br in net.branches
                if br.maintainable
            ],
        )

    @app.get("/api/stats", response_model=StatsResponse)
    def stats(y0: float = Query(default=0.0)):
        matrices = state.matrices(y0)
        return StatsResponse(
            n=matrices.n,
            y0=y0,
            baseline_risk=riskmod.estimate_risk(matrices),
            network_hash=state.manifest.network_hash,
            model_hash=state.manifest.config_digest,
            master_seed=state.manifest.master_seed,
            truncated_samples=state.manifest.truncated_samples,
        )

    @app.post("/api/risk", response_model=RiskResponse)
    def risk_query(req: RiskRequest):
        matrices = state.matrices(req.y0)
        strategy = state.strategy(req.maintained)
        baseline = riskmod.estimate_risk(matrices)
        report = credibility.report(matrices, strategy, req.beta, req.eps_bar)
        reduction = None if baseline <= 0 else 1.0 - report.risk / baseline
        return RiskResponse(
            risk=report.risk,
            baseline_risk=baseline,
            reduction_ratio=reduction,
            epsilon_hat=report.epsilon_hat,
            interval=report.interval,
            required_n=report.required_n,
            n=report.n,
        )

    @app.post("/api/sensitivity", response_model=SensitivityResponse)
    def sensitivity(req: SensitivityRequest):
        matrices = state.matrices(req.y0)
        report = optimizer.sensitivity_report(matrices)
        return SensitivityResponse(
            baseline_risk=report.baseline_risk,
            rows=[SensitivityRow(**row.as_dict()) for row in report.rows],
            mean=SensitivityRow(
                component=-1, risk=report.mean_risk, reduction_ratio=report.mean_reduction
            ),
            y0=report.y0,
            n=report.n,
        )

    @app.post("/api/optimize", response_model=OptimizeResponse)
    def optimize(req: OptimizeRequest):
        matrices = state.matrices(req.y0)
        cfg = optimizer.OptimizerConfig(
            m_max=req.m_max,
            m_k=req.m_k,
            beta=req.beta,
            eps_bar=req.eps_bar,
            y0=req.y0,
        )
        try:
            cfg.validated(len(matrices.component_ids))
            if req.alg == "enum":
                result = optimizer.enumerate_optimal(matrices, req.m_max)
            elif req.alg == "one":
                result = optimizer.algorithm_one(matrices, cfg)
            else:
                result = optimizer.algorithm_two(matrices, cfg)
            report = credibility.report(matrices, result.strategy, req.beta, req.eps_bar)
        except RefusalError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except (ValidationError, GridRiskError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        payload = result.as_dict()
        payload["credibility"] = report.as_dict()
        return OptimizeResponse(**payload)

    return app


def serve(workspace_path: str, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    # generous keep-alive: what-if clients hold a connection across think time
    uvicorn.run(create_app(workspace_path), host=host, port=port, timeout_keep_alive=75)
