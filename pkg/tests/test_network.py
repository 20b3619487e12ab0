import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiscale_lab.network import (
    ChannelNetwork,
    Junction,
    JunctionEdge,
    NetworkConfigError,
    build_network,
    junction_fluxes,
    network_mass,
    regular_junction,
    run_network,
    step_network,
)
from multiscale_lab.shallow_water import ChannelState


def star(n_arms, h_arms, h_junction=1.0, cells=40):
    """Arms leaving a regular 2n-gon through every other side."""
    sides = 2 * n_arms
    channels, links = {}, {}
    for k in range(n_arms):
        side = 2 * k
        angle = math.remainder(2 * math.pi * side / sides, 2 * math.pi)
        name = f"c{k}"
        channels[name] = ChannelState(np.full(cells, h_arms[k]), np.zeros(cells), 1.0, bc_left="junction",
                                      bc_right="wall", angle=angle, name=name)
        links[side] = (name, "left")
    return ChannelNetwork(channels, [regular_junction("J", links, sides, [h_junction, 0.0, 0.0])])


def test_empty_network_has_no_mass():
    assert network_mass(ChannelNetwork({}, [])) == 0.0


def test_single_channel_mass():
    ch = ChannelState(np.array([1.0, 2.0, 3.0]), np.zeros(3), 1.5)
    assert network_mass(ChannelNetwork({"a": ch}, [])) == pytest.approx(3.0)


def test_still_water_junction_is_stationary():
    net = star(3, [1.0, 1.0, 1.0])
    rate, faces = junction_fluxes(net.junctions[0], net.channels)
    np.testing.assert_allclose(rate, 0.0, atol=1e-13)
    for fh, _ in faces.values():
        assert abs(fh) < 1e-15
    out = step_network(net)
    for ch in out.channels.values():
        np.testing.assert_allclose(ch.h, 1.0, atol=1e-14)
    np.testing.assert_allclose(out.junctions[0].q, [1.0, 0.0, 0.0], atol=1e-14)


@settings(max_examples=4, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_closed_network_conserves_mass(n_arms, seed):
    rng = np.random.default_rng(seed)
    net = star(n_arms, rng.uniform(0.3, 1.5, n_arms), rng.uniform(0.5, 1.5), cells=20)
    m0 = network_mass(net)
    for _ in range(1000):
        net = step_network(net)
    assert abs(network_mass(net) - m0) <= 1e-11 * m0


def test_symmetric_split_is_equal():
    net = ChannelNetwork(
        {
            "in": ChannelState(np.ones(50), np.zeros(50), 1.0, bc_right="junction", angle=0.0, name="in"),
            "up": ChannelState(np.full(50, 0.4), np.zeros(50), 1.0, bc_left="junction", angle=math.pi / 3, name="up"),
            "dn": ChannelState(np.full(50, 0.4), np.zeros(50), 1.0, bc_left="junction", angle=-math.pi / 3, name="dn"),
        },
        [regular_junction("J", {3: ("in", "right"), 1: ("up", "left"), 5: ("dn", "left")}, 6, [0.7, 0.0, 0.0])],
    )
    net = run_network(net, 0.1)
    np.testing.assert_allclose(net.channels["up"].h, net.channels["dn"].h, atol=1e-12)
    assert net.channels["up"].h.max() > 0.45


def test_edges_must_close():
    with pytest.raises(ValueError, match="do not close"):
        Junction("J", 1.0, (JunctionEdge(0.0, 1.0), JunctionEdge(math.pi / 2, 1.0)), [1.0, 0.0, 0.0])


def test_double_linked_end_names_both_edges():
    a = ChannelState(np.ones(4), np.zeros(4), 1.0, bc_right="junction", name="a")
    j1 = regular_junction("J1", {2: ("a", "right")}, 4, [1.0, 0.0, 0.0])
    j2 = regular_junction("J2", {2: ("a", "right")}, 4, [1.0, 0.0, 0.0])
    with pytest.raises(NetworkConfigError) as info:
        ChannelNetwork({"a": a}, [j1, j2])
    msg = str(info.value)
    assert "J1.edge[2]" in msg and "J2.edge[2]" in msg


def test_link_inconsistencies_are_all_reported():
    a = ChannelState(np.ones(4), np.zeros(4), 1.0, bc_right="junction", name="a")
    j = regular_junction("J", {0: ("a", "right"), 1: ("ghost", "left")}, 4, [1.0, 0.0, 0.0])
    with pytest.raises(NetworkConfigError) as info:
        ChannelNetwork({"a": a}, [j])
    assert len(info.value.errors) == 2
    assert any("unknown channel" in e for e in info.value.errors)
    assert any("does not match" in e for e in info.value.errors)


def test_build_network_from_mapping():
    cfg = {
        "channels": [
            {"id": "a", "length": 1.0, "cells": 10, "bc_right": "junction", "initial": {"h": 1.0}},
            {"id": "b", "length": 1.0, "cells": 10, "bc_left": "junction",
             "initial": {"h_left": 0.5, "h_right": 0.2, "x_split": 0.5}},
        ],
        "junctions": [{"id": "J", "sides": 4, "edges": [{"channel": "a", "end": "right"},
                                                       {"channel": "b", "end": "left"}],
                       "initial": {"h": 0.8}}],
    }
    net = build_network(cfg)
    assert set(net.channels) == {"a", "b"}
    np.testing.assert_allclose(net.channels["b"].h, [0.5] * 5 + [0.2] * 5)
    assert net.junctions[0].area == pytest.approx(1.0)
    assert network_mass(net) == pytest.approx(1.0 + 0.35 + 0.8)


def test_build_network_collects_errors():
    cfg = {"channels": [{"id": "a", "length": -1.0, "cells": 10, "initial": {"h": 1.0}},
                        {"id": "b", "length": 1.0, "cells": 1, "initial": {"h": 1.0}},
                        {"id": "c", "length": 1.0, "cells": 5}]}
    with pytest.raises(NetworkConfigError) as info:
        build_network(cfg)
    assert len(info.value.errors) == 3
    assert info.value.errors[0].startswith("network.channels[0].length")
