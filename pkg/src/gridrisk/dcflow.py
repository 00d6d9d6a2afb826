"""DC (B-theta) power flow with islanding.

All solves are per-island dense linear algebra; the systems handled here
are desk scale (hundreds of buses), so no sparse machinery is used.
"""

from __future__ import annotations

import numpy as np

from .errors import GridRiskError, ValidationError
from .network import Network

BALANCE_TOL_MW = 1e-6


def islands(network: Network, in_service: frozenset[int]) -> list[list[int]]:
    """Connected components of the bus graph over in-service branches.

    Returns bus-id lists, each sorted ascending, ordered by smallest member.
    """
    adjacency: dict[int, list[int]] = {b.id: [] for b in network.buses}
    for br in network.branches:
        if br.id in in_service:
            adjacency[br.from_bus].append(br.to_bus)
            adjacency[br.to_bus].append(br.from_bus)

    seen: set[int] = set()
    comps: list[list[int]] = []
    for start in sorted(adjacency):
        if start in seen:
            continue
        stack = [start]
        comp = []
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for nxt in adjacency[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        comps.append(sorted(comp))
    return comps


def dc_power_flow(
    network: Network,
    in_service: frozenset[int],
    dispatch: dict[int, float],
    served: dict[int, float],
) -> dict[int, float]:
    """Solve B-theta per island and return branch flows in MW.

    ``dispatch`` maps generator index -> MW, ``served`` maps load index -> MW.
    Each island must be internally balanced to within ``BALANCE_TOL_MW``;
    flows on out-of-service branches are reported as 0. The reference bus of
    each island is its smallest bus id.
    """
    injection: dict[int, float] = {b.id: 0.0 for b in network.buses}
    for gi, gen in enumerate(network.generators):
        injection[gen.bus] += dispatch.get(gi, 0.0)
    for li, load in enumerate(network.loads):
        injection[load.bus] -= served.get(li, 0.0)

    flows = {br.id: 0.0 for br in network.branches}
    live = [br for br in network.branches if br.id in in_service]

    for comp in islands(network, in_service):
        imbalance = sum(injection[b] for b in comp)
        if abs(imbalance) > BALANCE_TOL_MW:
            raise ValidationError(
                f"island anchored at bus {comp[0]} imbalanced by {imbalance:.3g} MW"
            )
        if len(comp) == 1:
            continue
        pos = {bus: i for i, bus in enumerate(comp)}
        n = len(comp)
        b_mat = np.zeros((n, n))
        members = [br for br in live if br.from_bus in pos and br.to_bus in pos]
        for br in members:
            susceptance = 1.0 / br.reactance
            i, j = pos[br.from_bus], pos[br.to_bus]
            b_mat[i, i] += susceptance
            b_mat[j, j] += susceptance
            b_mat[i, j] -= susceptance
            b_mat[j, i] -= susceptance
        p = np.array([injection[b] for b in comp]) / network.base_mva

        # reference bus = comp[0]; drop its row/column
        reduced = b_mat[1:, 1:]
        try:
            theta_rest = np.linalg.solve(reduced, p[1:])
        except np.linalg.LinAlgError:
            raise GridRiskError(
                f"singular susceptance matrix in island anchored at bus {comp[0]}"
            ) from None
        theta = np.concatenate(([0.0], theta_rest))
        for br in members:
            angle_diff = theta[pos[br.from_bus]] - theta[pos[br.to_bus]]
            flows[br.id] = angle_diff / br.reactance * network.base_mva
    return flows
