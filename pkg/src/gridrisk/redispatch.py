"""Generation redispatch and load shedding via per-island linear programs.

Each island solves: minimize shed_weight * total_shed + total |dispatch change|
subject to the DC flow equations, branch flow limits, generator bounds and
load bounds. Islands without generation shed everything; islands without
load are de-energized (all generation backed down to zero).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .errors import GridRiskError
from .network import Network
from . import dcflow

SHED_WEIGHT = 100.0


def redispatch(
    network: Network,
    in_service: frozenset[int],
    shed_weight: float = SHED_WEIGHT,
) -> tuple[dict[int, float], dict[int, float], float]:
    """Return (dispatch by generator index, served by load index, total shed MW)."""
    gens_at: dict[int, list[int]] = {}
    for gi, gen in enumerate(network.generators):
        gens_at.setdefault(gen.bus, []).append(gi)
    loads_at: dict[int, list[int]] = {}
    for li, load in enumerate(network.loads):
        loads_at.setdefault(load.bus, []).append(li)

    dispatch: dict[int, float] = {gi: 0.0 for gi in range(len(network.generators))}
    served: dict[int, float] = {li: 0.0 for li in range(len(network.loads))}
    total_shed = 0.0

    for comp in dcflow.islands(network, in_service):
        gen_idx = [gi for bus in comp for gi in gens_at.get(bus, [])]
        load_idx = [li for bus in comp for li in loads_at.get(bus, [])]
        demand = sum(network.loads[li].demand for li in load_idx)

        if not load_idx or demand == 0.0:
            # de-energized island: nothing to serve, generation backed to zero
            continue
        if not gen_idx or sum(network.generators[gi].p_max for gi in gen_idx) <= 0:
            total_shed += demand
            continue

        disp, srv, shed = _solve_island(network, in_service, comp, gen_idx, load_idx, shed_weight)
        dispatch.update(disp)
        served.update(srv)
        total_shed += shed
    if total_shed < 1e-6:
        # solver tolerance noise around an unshed optimum
        total_shed = 0.0
    return dispatch, served, total_shed


def _solve_island(
    network: Network,
    in_service: frozenset[int],
    comp: list[int],
    gen_idx: list[int],
    load_idx: list[int],
    shed_weight: float,
) -> tuple[dict[int, float], dict[int, float], float]:
    pos = {bus: i for i, bus in enumerate(comp)}
    nb, ng, nl = len(comp), len(gen_idx), len(load_idx)
    members = [
        br for br in network.branches
        if br.id in in_service and br.from_bus in pos and br.to_bus in pos
    ]
    nbr = len(members)
    base = network.base_mva

    demand_total = sum(network.loads[li].demand for li in load_idx)
    p_min = np.array([network.generators[gi].p_min for gi in gen_idx])
    p_max = np.array([network.generators[gi].p_max for gi in gen_idx])
    disp0 = np.array([network.generators[gi].dispatch for gi in gen_idx])
    if p_min.sum() > demand_total:
        # lower bounds would exceed servable demand; allow full back-down
        p_min = np.zeros_like(p_min)

    # variables: theta[1:nb] (ref bus angle fixed 0), g, up, dn, s
    ntheta = nb - 1
    nvar = ntheta + 3 * ng + nl
    sl_g = slice(ntheta, ntheta + ng)
    sl_up = slice(ntheta + ng, ntheta + 2 * ng)
    sl_dn = slice(ntheta + 2 * ng, ntheta + 3 * ng)
    sl_s = slice(ntheta + 3 * ng, nvar)

    cost = np.zeros(nvar)
    cost[sl_up] = 1.0
    cost[sl_dn] = 1.0
    cost[sl_s] = -shed_weight

    # nodal balance: base * (B theta)_b - gen_b + served_b = 0 for every bus
    a_eq = np.zeros((nb + ng, nvar))
    b_eq = np.zeros(nb + ng)
    for br in members:
        susceptance = base / br.reactance
        i, j = pos[br.from_bus], pos[br.to_bus]
        for row, sign in ((i, 1.0), (j, -1.0)):
            if i > 0:
                a_eq[row, i - 1] += sign * susceptance
            if j > 0:
                a_eq[row, j - 1] -= sign * susceptance
    for k, gi in enumerate(gen_idx):
        a_eq[pos[network.generators[gi].bus], ntheta + k] -= 1.0
    for k, li in enumerate(load_idx):
        a_eq[pos[network.loads[li].bus], ntheta + 3 * ng + k] += 1.0
    # dispatch-change split: g - up + dn = disp0
    for k in range(ng):
        row = nb + k
        a_eq[row, ntheta + k] = 1.0
        a_eq[row, ntheta + ng + k] = -1.0
        a_eq[row, ntheta + 2 * ng + k] = 1.0
        b_eq[row] = disp0[k]

    # branch limits: |base * (theta_f - theta_t) / x| <= limit
    a_ub = np.zeros((2 * nbr, nvar))
    b_ub = np.zeros(2 * nbr)
    for r, br in enumerate(members):
        i, j = pos[br.from_bus], pos[br.to_bus]
        coef = base / br.reactance
        if i > 0:
            a_ub[2 * r, i - 1] += coef
            a_ub[2 * r + 1, i - 1] -= coef
        if j > 0:
            a_ub[2 * r, j - 1] -= coef
            a_ub[2 * r + 1, j - 1] += coef
        b_ub[2 * r] = br.flow_limit
        b_ub[2 * r + 1] = br.flow_limit

    bounds = (
        [(None, None)] * ntheta
        + [(float(p_min[k]), float(p_max[k])) for k in range(ng)]
        + [(0.0, None)] * (2 * ng)
        + [(0.0, float(network.loads[li].demand)) for li in load_idx]
    )

    res = linprog(
        cost,
        A_ub=a_ub if nbr else None,
        b_ub=b_ub if nbr else None,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
    )
    if res.status != 0:
        raise GridRiskError(
            f"redispatch LP unexpectedly {res.message!r} in island anchored at bus {comp[0]}"
        )

    g_val = np.clip(res.x[sl_g], p_min, p_max)
    s_val = np.clip(res.x[sl_s], 0.0, [network.loads[li].demand for li in load_idx])
    # absorb LP tolerance residue so generation equals served load exactly
    gap = g_val.sum() - s_val.sum()
    for k in np.argsort(-(p_max - p_min)):
        corrected = min(max(g_val[k] - gap, p_min[k]), p_max[k])
        gap -= g_val[k] - corrected
        g_val[k] = corrected
        if abs(gap) < 1e-12:
            break
    if abs(gap) > 1e-9:
        raise GridRiskError(
            f"could not rebalance island anchored at bus {comp[0]} (residual {gap:.3g} MW)"
        )

    disp = {gi: float(g_val[k]) for k, gi in enumerate(gen_idx)}
    srv = {li: float(s_val[k]) for k, li in enumerate(load_idx)}
    shed = demand_total - float(s_val.sum())
    return disp, srv, shed
