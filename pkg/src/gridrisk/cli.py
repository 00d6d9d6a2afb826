"""Command-line interface.

Subcommands: import, simulate, risk, sensitivity, optimize, serve.
Everything emits JSON on stdout (tables with --pretty). Exit codes:
0 success, 2 validation error, 3 refusal (combinatorial cap), 64 usage.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import cascade, credibility, optimizer, risk as riskmod
from .errors import GridRiskError, ParseError, RefusalError, ValidationError
from .failure import SimulationConfig
from .matpower import parse_matpower
from .risk import Strategy
from .workspace import Workspace

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridrisk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--workspace", default=".", help="workspace directory")
        p.add_argument("--pretty", action="store_true", help="human-readable output")

    p_import = sub.add_parser("import", help="import a MATPOWER case into the workspace")
    p_import.add_argument("case", help="path to the MATPOWER .m case file")
    p_import.add_argument("--force", action="store_true", help="discard stale samples")
    common(p_import)

    p_sim = sub.add_parser("simulate", help="generate or extend the cascade sample set")
    p_sim.add_argument("--n", type=int, required=True, help="target total sample count")
    p_sim.add_argument("--seed", type=int, required=True, help="master seed")
    p_sim.add_argument("--workers", type=int, default=1)
    common(p_sim)

    p_risk = sub.add_parser("risk", help="estimate risk for a maintenance selection")
    p_risk.add_argument("--y0", type=float, default=0.0)
    p_risk.add_argument("--maintain", default="", help="comma-separated component ids")
    p_risk.add_argument("--beta", type=float, default=0.95)
    p_risk.add_argument("--eps-bar", type=float, default=0.1)
    common(p_risk)

    p_sens = sub.add_parser("sensitivity", help="rank single-component maintenance")
    p_sens.add_argument("--y0", type=float, default=0.0)
    p_sens.add_argument("--csv", default=None, help="also write the ranking as CSV")
    common(p_sens)

    p_opt = sub.add_parser("optimize", help="search for the best maintenance strategy")
    p_opt.add_argument("--alg", choices=("enum", "one", "two"), required=True)
    p_opt.add_argument("--mmax", type=int, required=True)
    p_opt.add_argument("--mk", type=int, default=None)
    p_opt.add_argument("--eps", type=float, default=0.1, help="target relative error")
    p_opt.add_argument("--beta", type=float, default=0.95)
    p_opt.add_argument("--y0", type=float, default=0.0)
    p_opt.add_argument("--adaptive", action="store_true", help="grow samples until credible")
    p_opt.add_argument("--n0", type=int, default=5000)
    p_opt.add_argument("--max-rounds", type=int, default=10)
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.add_argument("--workers", type=int, default=1)
    common(p_opt)

    p_serve = sub.add_parser("serve", help="serve the read-only what-if API")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    common(p_serve)

    return parser


def _emit(payload: dict, pretty_lines=None, pretty: bool = False) -> None:
    if pretty and pretty_lines is not None:
        for line in pretty_lines:
            print(line)
    else:
        print(json.dumps(payload, indent=2))


def _parse_maintained(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"--maintain must be comma-separated integers, got {text!r}") from None


def _cmd_import(args) -> int:
    ws = Workspace(args.workspace)
    with open(args.case) as fh:
        network = parse_matpower(fh.read())
    ws.set_network(network, force=args.force)
    lines = sum(1 for br in network.branches if br.kind == "line")
    transformers = len(network.branches) - lines
    payload = {
        "buses": len(network.buses),
        "branches": len(network.branches),
        "lines": lines,
        "transformers": transformers,
        "generators": len(network.generators),
        "loads": len(network.loads),
        "total_demand": network.total_demand(),
        "network_hash": network.digest(),
    }
    _emit(
        payload,
        pretty=args.pretty,
        pretty_lines=[
            f"imported {len(network.buses)} buses, {len(network.branches)} branches "
            f"({lines} lines, {transformers} transformers)",
            f"total demand {network.total_demand():.1f} MW",
            f"network hash {network.digest()[:12]}",
        ],
    )
    return 0


def _cmd_simulate(args) -> int:
    ws = Workspace(args.workspace)
    sample_set, added = ws.ensure_samples(args.n, args.seed, workers=args.workers)
    payload = {
        "n": sample_set.count,
        "added": added,
        "master_seed": sample_set.master_seed,
        "network_hash": sample_set.network_hash,
        "model_hash": sample_set.model_hash,
        "truncated": sum(1 for s in sample_set.samples if s.truncated),
    }
    _emit(
        payload,
        pretty=args.pretty,
        pretty_lines=[f"sample set at {sample_set.count} samples ({added} new)"],
    )
    return 0


def _risk_payload(ws: Workspace, maintained, y0, beta, eps_bar) -> dict:
    matrices = ws.bundle().at(y0)
    for cid in maintained:
        if cid not in matrices.component_ids:
            raise ValidationError(f"unknown component id {cid}")
    if len(set(maintained)) != len(maintained):
        raise ValidationError("duplicate component ids in --maintain")
    strategy = Strategy.of(maintained)
    baseline = riskmod.estimate_risk(matrices)
    rep = credibility.report(matrices, strategy, beta, eps_bar)
    return {
        "risk": rep.risk,
        "baseline_risk": baseline,
        "reduction_ratio": None if baseline <= 0 else 1.0 - rep.risk / baseline,
        "epsilon_hat": rep.epsilon_hat,
        "interval": list(rep.interval),
        "required_n": rep.required_n,
        "n": rep.n,
        "variance": rep.variance,
        "beta": rep.beta,
        "absolute_half_width": rep.absolute_half_width,
        "normality_warning": rep.normality_warning,
    }


def _cmd_risk(args) -> int:
    ws = Workspace(args.workspace)
    maintained = _parse_maintained(args.maintain)
    payload = _risk_payload(ws, maintained, args.y0, args.beta, args.eps_bar)
    eps = payload["epsilon_hat"]
    _emit(
        payload,
        pretty=args.pretty,
        pretty_lines=[
            f"risk {payload['risk']:.6g} MW (baseline {payload['baseline_risk']:.6g})",
            f"epsilon_hat {eps:.4%}" if eps is not None else "epsilon_hat n/a (zero risk)",
            f"interval [{payload['interval'][0]:.6g}, {payload['interval'][1]:.6g}]",
            f"n {payload['n']}, required_n {payload['required_n']}",
        ],
    )
    return 0


def _cmd_sensitivity(args) -> int:
    ws = Workspace(args.workspace)
    matrices = ws.bundle().at(args.y0)
    report = optimizer.sensitivity_report(matrices)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("component,risk,reduction_ratio\n")
            for row in report.rows:
                fh.write(f"{row.component},{row.risk!r},{row.reduction_ratio!r}\n")
            fh.write(f"mean,{report.mean_risk!r},{report.mean_reduction!r}\n")
    pretty_lines = [f"baseline risk {report.baseline_risk:.6g} MW"]
    for row in report.rows:
        ratio = f"{row.reduction_ratio:.2%}" if row.reduction_ratio is not None else "n/a"
        pretty_lines.append(f"  component {row.component:>4}  risk {row.risk:.6g}  reduction {ratio}")
    _emit(report.as_dict(), pretty=args.pretty, pretty_lines=pretty_lines)
    return 0


def _cmd_optimize(args) -> int:
    ws = Workspace(args.workspace)
    cfg = optimizer.OptimizerConfig(
        m_max=args.mmax,
        m_k=args.mk,
        beta=args.beta,
        eps_bar=args.eps,
        y0=args.y0,
        n0=args.n0,
        max_rounds=args.max_rounds,
    )
    if args.adaptive:
        seed = args.seed
        if seed is None:
            seed = ws.manifest().master_seed
        if seed is None:
            raise ValidationError("adaptive optimize needs --seed (no existing sample set)")
        provider = _WorkspaceProvider(ws, seed, args.workers)
        network = ws.network()
        result = optimizer.procedure_one(
            network, ws.config(), cfg, args.alg, seed, workers=args.workers, provider=provider
        )
    else:
        matrices = ws.bundle().at(args.y0)
        cfg.validated(len(matrices.component_ids))
        if args.alg == "enum":
            result = optimizer.enumerate_optimal(matrices, args.mmax)
        elif args.alg == "one":
            result = optimizer.algorithm_one(matrices, cfg)
        else:
            result = optimizer.algorithm_two(matrices, cfg)
        rep = credibility.report(matrices, result.strategy, args.beta, args.eps)
        result = optimizer.OptimizationResult(
            strategy=result.strategy,
            risk=result.risk,
            baseline_risk=result.baseline_risk,
            reduction_ratio=result.reduction_ratio,
            scenarios_evaluated=result.scenarios_evaluated,
            scenarios_total=result.scenarios_total,
            algorithm=result.algorithm,
            credibility=rep,
            history=result.history,
            converged=result.converged,
        )
    payload = result.as_dict()
    ratio = f"{result.reduction_ratio:.2%}" if result.reduction_ratio is not None else "n/a"
    pretty_lines = [
        f"strategy {list(result.strategy.ordered())}",
        f"risk {result.risk:.6g} MW (baseline {result.baseline_risk:.6g}, reduction {ratio})",
        f"scenarios {result.scenarios_evaluated} (total evaluated {result.scenarios_total})",
        f"converged {result.converged}",
    ]
    for record in result.history:
        pretty_lines.append(
            f"  round {record.round}: n={record.n} strategy={list(record.strategy)} "
            f"risk={record.risk:.6g} eps={record.epsilon_hat}"
        )
    _emit(payload, pretty=args.pretty, pretty_lines=pretty_lines)
    return 0


class _WorkspaceProvider:
    """Sample provider that persists growth into the workspace."""

    def __init__(self, ws: Workspace, master_seed: int, workers: int):
        self.ws = ws
        self.master_seed = master_seed
        self.workers = workers

    def ensure(self, total: int):
        sample_set, _ = self.ws.ensure_samples(total, self.master_seed, self.workers)
        return sample_set


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.workspace, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "import": _cmd_import,
    "simulate": _cmd_simulate,
    "risk": _cmd_risk,
    "sensitivity": _cmd_sensitivity,
    "optimize": _cmd_optimize,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except RefusalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ParseError, GridRiskError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
