"""MATPOWER case text -> Network importer.

Only the ``baseMVA``, ``bus``, ``gen`` and ``branch`` blocks are read.
Import policy:

* out-of-service branches and generators are dropped (the initial state is
  all-in-service);
* a branch is a transformer iff its tap-ratio field is nonzero, and
  transformers are the maintainable set by default;
* negative bus demands (net injections in the archive data) become
  curtailable zero-floor generators;
* initial dispatch is rescaled per island so generation matches demand;
* flow limits come from rateA; ratings that are absent (0) or the archive
  placeholder (>= 9900) are replaced by 1.5x the base-case DC flow with a
  10 MW floor, so every branch has a meaningful finite limit.
"""

from __future__ import annotations

import re

import numpy as np

from . import dcflow
from .errors import ParseError, ValidationError
from .network import (
    LINE,
    TRANSFORMER,
    Branch,
    Bus,
    Generator,
    Load,
    Network,
    require_valid,
)

RATE_PLACEHOLDER = 9900.0
LIMIT_MARGIN = 1.5
LIMIT_FLOOR_MW = 10.0

_MATRIX_RE = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\];", re.DOTALL)
_SCALAR_RE = re.compile(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)\s*;")


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _parse_matrix(name: str, body: str, min_cols: int) -> list[list[float]]:
    rows: list[list[float]] = []
    for rownum, chunk in enumerate(re.split(r"[;\n]", body), start=1):
        if not chunk.strip():
            continue
        values = []
        for colnum, token in enumerate(chunk.split(), start=1):
            try:
                values.append(float(token))
            except ValueError:
                raise ParseError(
                    f"mpc.{name} row {len(rows) + 1} column {colnum}: "
                    f"cannot parse {token!r}"
                ) from None
        if len(values) < min_cols:
            raise ParseError(
                f"mpc.{name} row {len(rows) + 1}: expected at least {min_cols} "
                f"columns, got {len(values)}"
            )
        rows.append(values)
    if not rows:
        raise ParseError(f"mpc.{name} is empty")
    return rows


def parse_matpower(case_text: str) -> Network:
    text = _strip_comments(case_text)
    scalar = _SCALAR_RE.search(text)
    if scalar is None:
        raise ParseError("missing mpc.baseMVA")
    base_mva = float(scalar.group(1))

    blocks = {m.group(1): m.group(2) for m in _MATRIX_RE.finditer(text)}
    for required in ("bus", "gen", "branch"):
        if required not in blocks:
            raise ParseError(f"missing mpc.{required} block")

    bus_rows = _parse_matrix("bus", blocks["bus"], 3)
    gen_rows = _parse_matrix("gen", blocks["gen"], 10)
    branch_rows = _parse_matrix("branch", blocks["branch"], 11)

    buses = tuple(Bus(id=int(row[0]), name=f"Bus {int(row[0])}") for row in bus_rows)

    branches: list[Branch] = []
    raw_limits: list[float] = []
    for rownum, row in enumerate(branch_rows, start=1):
        status = row[10]
        if status == 0:
            continue
        ratio = row[8]
        kind = TRANSFORMER if ratio != 0 else LINE
        branches.append(
            Branch(
                id=rownum,
                from_bus=int(row[0]),
                to_bus=int(row[1]),
                reactance=row[3],
                flow_limit=1.0,  # provisional; finalized below
                kind=kind,
                maintainable=kind == TRANSFORMER,
            )
        )
        raw_limits.append(row[5])

    generators: list[Generator] = []
    for row in gen_rows:
        if row[7] == 0:
            continue
        generators.append(
            Generator(
                bus=int(row[0]),
                p_max=row[8],
                p_min=max(0.0, row[9]),
                dispatch=max(0.0, row[1]),
            )
        )

    loads: list[Load] = []
    for row in bus_rows:
        demand = row[2]
        if demand > 0:
            loads.append(Load(bus=int(row[0]), demand=demand, served=demand))
        elif demand < 0:
            # net injection recorded as negative demand in the archive data
            generators.append(
                Generator(bus=int(row[0]), p_max=-demand, p_min=0.0, dispatch=-demand)
            )

    for br in branches:
        if br.reactance == 0:
            raise ValidationError(f"branch {br.id}: reactance must be nonzero")

    provisional = require_valid(
        Network(
            buses=buses,
            branches=tuple(branches),
            generators=tuple(generators),
            loads=tuple(loads),
            base_mva=base_mva,
        )
    )
    balanced = _balance_initial_dispatch(provisional)

    all_ids = frozenset(br.id for br in balanced.branches)
    dispatch = {gi: g.dispatch for gi, g in enumerate(balanced.generators)}
    served = {li: ld.served for li, ld in enumerate(balanced.loads)}
    flows = dcflow.dc_power_flow(balanced, all_ids, dispatch, served)

    final_branches = []
    for br, rate in zip(balanced.branches, raw_limits):
        if 0 < rate < RATE_PLACEHOLDER:
            limit = rate
        else:
            limit = max(LIMIT_MARGIN * abs(flows[br.id]), LIMIT_FLOOR_MW)
        final_branches.append(
            Branch(br.id, br.from_bus, br.to_bus, br.reactance, limit, br.kind, br.maintainable)
        )

    return require_valid(
        Network(
            buses=balanced.buses,
            branches=tuple(final_branches),
            generators=balanced.generators,
            loads=balanced.loads,
            base_mva=base_mva,
        )
    )


def _balance_initial_dispatch(network: Network) -> Network:
    """Rescale dispatch per island so generation equals demand exactly."""
    gens = list(network.generators)
    new_dispatch = [g.dispatch for g in gens]
    all_ids = frozenset(br.id for br in network.branches)

    for comp in dcflow.islands(network, all_ids):
        members = set(comp)
        gen_idx = [gi for gi, g in enumerate(gens) if g.bus in members]
        demand = sum(ld.demand for ld in network.loads if ld.bus in members)
        if not gen_idx:
            if demand > 0:
                raise ValidationError(
                    f"island anchored at bus {comp[0]} has {demand:g} MW demand "
                    "and no generation"
                )
            continue
        p_max = np.array([gens[gi].p_max for gi in gen_idx])
        p_min = np.array([gens[gi].p_min for gi in gen_idx])
        initial = np.array([gens[gi].dispatch for gi in gen_idx])
        if demand > p_max.sum() + 1e-9:
            raise ValidationError(
                f"island anchored at bus {comp[0]}: demand {demand:g} MW exceeds "
                f"generation capacity {p_max.sum():g} MW"
            )
        if p_min.sum() > demand:
            p_min = np.zeros_like(p_min)
        out = _waterfill(initial, p_min, p_max, demand)
        for k, gi in enumerate(gen_idx):
            new_dispatch[gi] = float(out[k])

    return Network(
        buses=network.buses,
        branches=network.branches,
        generators=tuple(
            Generator(g.bus, g.p_max, g.p_min, new_dispatch[gi]) for gi, g in enumerate(gens)
        ),
        loads=network.loads,
        base_mva=network.base_mva,
    )


def _waterfill(initial: np.ndarray, p_min: np.ndarray, p_max: np.ndarray, target: float) -> np.ndarray:
    """Proportional rescale of ``initial`` onto [p_min, p_max] summing to target."""
    n = len(initial)
    out = np.clip(initial, p_min, p_max)
    pinned = np.zeros(n, dtype=bool)
    for _ in range(n + 1):
        free = ~pinned
        residual = target - out[pinned].sum()
        base = initial[free]
        if base.sum() > 0:
            scaled = base * (residual / base.sum())
        else:
            cap = p_max[free]
            scaled = cap * (residual / cap.sum()) if cap.sum() > 0 else np.zeros(free.sum())
        clipped = np.clip(scaled, p_min[free], p_max[free])
        out[free] = clipped
        newly = np.abs(clipped - scaled) > 1e-12
        if not newly.any():
            break
        # pin saturated entries; redistribute the remainder among the rest
        idx = np.where(free)[0][newly]
        pinned[idx] = True
        if pinned.all():
            break
    gap = target - out.sum()
    if abs(gap) > 1e-6:
        # distribute any residue over whatever headroom is left
        head = p_max - out if gap > 0 else out - p_min
        total = head.sum()
        if total < abs(gap) - 1e-9:
            raise ValidationError("cannot balance initial dispatch against demand")
        out += np.sign(gap) * head * (abs(gap) / total)
    return out
