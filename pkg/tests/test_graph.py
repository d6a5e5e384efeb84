import numpy as np
import pytest

from sparse_ofdm.channel import ActiveScenario, draw_scenario
from sparse_ofdm.codebook import Codebook
from sparse_ofdm.config import SystemConfig, reference_config
from sparse_ofdm.graph import DiscoveryGraph, build_graph, classify_components, peel

# the bipartite example graph: N=4, K=3, B=5, one bin per device;
# bins 0, 1, 4 empty, bin 3 singleton, bin 2 shared by two devices
EXAMPLE_BINS = {0: (2,), 1: (3,), 3: (2,)}


def test_single_device_component():
    g = DiscoveryGraph({7: (0, 4, 9)}, 10)
    (comp,) = g.components()
    assert comp.edges == 3 and comp.vertices == 4 and comp.is_tree
    assert g.edge_count == 3


def test_example_graph_bin_degrees():
    cfg = SystemConfig(n_population=4, k_active=3, b_bins=5, t_degree=1, c1=2, code_rate=1.0)
    cb = Codebook(cfg, bins_override=EXAMPLE_BINS)
    g = build_graph(ActiveScenario((0, 1, 3), (1, 1, 1), (0, 0, 0)), cb, cfg)
    degree = [len(g.bin_members.get(b, ())) for b in range(5)]
    assert degree == [0, 0, 2, 1, 0]
    # one device per bin: the shared bin can never be resolved by peeling
    assert peel(g) == {1}


def test_two_device_bin_schedule_peels_everything():
    # T=2 chain: device 1 alone in bin 0, shares bin 2 with device 2
    g = DiscoveryGraph({1: (0, 2), 2: (2, 3), 3: (3, 4)}, 5)
    assert g.bin_members[0] == [1]
    assert peel(g) == {1, 2, 3}


def test_shared_pair_is_unicyclic_and_stuck():
    g = DiscoveryGraph({0: (1, 3), 1: (1, 3)}, 5)
    (comp,) = g.components()
    assert (comp.edges, comp.vertices) == (4, 4)
    assert comp.is_unicyclic and not comp.is_tree
    assert peel(g) == set()


def test_classification_matches_edge_vertex_arithmetic(rng):
    for _ in range(200):
        k = int(rng.integers(1, 15))
        b = int(rng.integers(3, 30))
        adj = {d: tuple(rng.choice(b, 3, replace=False)) for d in range(k)}
        g = DiscoveryGraph(adj, b)
        summary = classify_components(g)
        assert sum(c.device_count for c in g.components()) == k
        for c, row in zip(g.components(), summary["components"]):
            assert row["is_tree"] == (c.edges == c.vertices - 1)
            assert row["is_unicyclic"] == (c.edges == c.vertices)
        assert summary["n_components"] == len(g.components())


def test_device_degrees_are_exactly_t():
    cfg = reference_config(100)
    cb = Codebook(cfg)
    g = build_graph(draw_scenario(cfg, 0), cb)
    assert all(g.degree(k) == 3 for k in g.devices)
    assert len(g.devices) == 100


def test_peel_is_confluent(rng):
    for s in range(50):
        k = int(rng.integers(2, 30))
        b = int(np.ceil(3.0 * k))
        adj = {d: tuple(rng.choice(b, 3, replace=False)) for d in range(k)}
        g = DiscoveryGraph(adj, b)
        ref = peel(g)
        for t in range(10):
            assert peel(g, np.random.default_rng(1000 * s + t)) == ref


def test_peel_matches_two_core():
    # devices that survive peeling are exactly those in the 2-core of bins
    g = DiscoveryGraph({0: (0, 1), 1: (1, 2), 2: (0, 2), 3: (2, 5), 4: (5, 6)}, 7)
    assert peel(g) == {3, 4}


@pytest.mark.parametrize("b_bins", [900, 1800])
def test_small_components_when_bins_are_plentiful(b_bins):
    # with B above K T (T - 1) the hypergraph is subcritical: almost no complex components
    cfg = reference_config(100, b_bins=b_bins)
    good = 0
    for s in range(200):
        g = build_graph(draw_scenario(cfg, s), Codebook(cfg.replace(master_seed=s)), cfg)
        good += classify_components(g)["all_tree_or_unicyclic"]
    assert good / 200 >= 0.95
