import numpy as np
import pytest

from twinmig.simcore.channel import ChannelParams
from twinmig.simcore.geometry import Position
from twinmig.simcore.nodes import EdgeNode, NodeKind, VehicleState
from twinmig.simcore.scenario import preset_scenario


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


@pytest.fixture
def toy_scenario():
    return preset_scenario("toy-2rsu-overload")


@pytest.fixture
def route_scenario():
    return preset_scenario("route-16rsu")


@pytest.fixture
def default_scenario():
    return preset_scenario("default-16rsu")


def make_node(node_id=0, x=0.0, y=0.0, z=0.0, compute=6e10, load=0.0,
              load_max=3e11, backhaul=1e9, kind=NodeKind.RSU, channel=None):
    return EdgeNode(
        id=node_id,
        kind=kind,
        pos=Position(x, y, z),
        compute_cps=compute,
        workload_max=load_max,
        inter_node_bandwidth_bps=backhaul,
        coverage_radius_m=400.0,
        workload_cycles=load,
        channel=channel or ChannelParams(),
    )


def make_vehicle(x=0.0, y=0.0, power=0.1, cycles_per_bit=200.0):
    return VehicleState(pos=Position(x, y, 0.0), transmit_power_w=power,
                        cycles_per_bit=cycles_per_bit)


@pytest.fixture
def node_factory():
    return make_node


@pytest.fixture
def vehicle_factory():
    return make_vehicle
