import os

import pytest

from gridrisk.failure import PhiParams, SimulationConfig
from gridrisk.matpower import parse_matpower
from gridrisk.network import Branch, Bus, Generator, Load, Network
from gridrisk.risk import TinySystem

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "gridrisk", "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


TWO_BUS_CASE = """\
function mpc = twobus
%% two buses, one generator, one load, one line
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
\t1\t3\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
\t2\t1\t100\t0\t0\t0\t1\t1\t0\t138\t1\t1.1\t0.9;
];
mpc.gen = [
\t1\t100\t0\t50\t-50\t1\t100\t1\t200\t0;
];
mpc.branch = [
\t1\t2\t0.01\t0.1\t0\t0\t0\t0\t0\t0\t1\t-360\t360;
];
"""


def star_network(
    demands=(100.0, 100.0, 100.0),
    limits=None,
    maintainable=None,
) -> Network:
    """Radial star: one generator bus feeding one load bus per branch.

    Branch k's loading ratio is demand_k / limit_k no matter which other
    branches are out, so with per-branch constant failure probabilities the
    cascade space is exactly enumerable.
    """
    n = len(demands)
    if limits is None:
        limits = tuple(2.0 * d for d in demands)
    if maintainable is None:
        maintainable = tuple(True for _ in demands)
    buses = [Bus(1, "source")] + [Bus(2 + i, f"load {i + 1}") for i in range(n)]
    branches = [
        Branch(
            id=i + 1,
            from_bus=1,
            to_bus=2 + i,
            reactance=0.1,
            flow_limit=limits[i],
            kind="line",
            maintainable=maintainable[i],
        )
        for i in range(n)
    ]
    total = sum(demands)
    return Network(
        buses=tuple(buses),
        branches=tuple(branches),
        generators=(Generator(bus=1, p_max=2 * total, p_min=0.0, dispatch=total),),
        loads=tuple(Load(bus=2 + i, demand=d, served=d) for i, d in enumerate(demands)),
        base_mva=100.0,
    )


def star_config(p_bases=(0.3, 0.2, 0.1), **kwargs) -> SimulationConfig:
    overrides = {
        i + 1: PhiParams(p_base=p, p_peak=max(p, 0.999), ell_knee=1.0, ell_sat=1.4)
        for i, p in enumerate(p_bases)
    }
    return SimulationConfig(overrides=overrides, **kwargs)


def star_tiny_system(demands=(100.0, 100.0, 100.0), stage_cap=100) -> TinySystem:
    per_branch = dict(enumerate(demands, start=1))

    def shed(failed):
        return sum(per_branch[k] for k in failed)

    return TinySystem(
        components=tuple(sorted(per_branch)), shed=shed, stage_cap=stage_cap
    )


@pytest.fixture(scope="session")
def case57():
    with open(data_path("case57.m")) as fh:
        return parse_matpower(fh.read())


@pytest.fixture(scope="session")
def case300():
    with open(data_path("case300.m")) as fh:
        return parse_matpower(fh.read())


@pytest.fixture()
def star3():
    return star_network()


@pytest.fixture()
def star3_config():
    return star_config()
