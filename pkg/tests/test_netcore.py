import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdsma.netcore import (Network, class_table, cross_alters_all,
                           cross_group_ties, edgewise_shared_partners, gwesp,
                           load_network, mixing_and_ratios, node_cross_alters,
                           save_network)

from oracles import brute_cross_ties


@st.composite
def small_networks(draw):
    n = draw(st.integers(2, 10))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, m in zip(pairs, mask) if m]
    z = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    return Network(n, np.array(edges, dtype=np.int64).reshape(-1, 2), z), edges, z


def triangle(z=(1, 0, 0)):
    return Network(3, [(0, 1), (0, 2), (1, 2)], z)


class TestNetworkConstruction:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Network(3, [(1, 1)], [0, 0, 0])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError, match="duplicate"):
            Network(3, [(0, 1), (1, 0)], [0, 0, 0])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            Network(3, [(0, 5)], [0, 0, 0])

    def test_rejects_bad_infection(self):
        with pytest.raises(ValueError):
            Network(2, [], [0, 2])

    def test_neighbors_sorted_and_lookup(self):
        net = Network(4, [(2, 0), (0, 1), (3, 0)], [0, 1, 0, 1])
        assert net.neighbors(0).tolist() == [1, 2, 3]
        assert net.has_edge(0, 2) and net.has_edge(2, 0)
        assert not net.has_edge(1, 2)
        assert net.degree(0) == 3 and net.degree(1) == 1


class TestCrossTies:
    def test_all_infected_zero(self):
        net = Network(4, [(0, 1), (1, 2), (2, 3)], [1, 1, 1, 1])
        assert cross_group_ties(net) == 0

    def test_single_discordant_edge(self):
        assert cross_group_ties(Network(2, [(0, 1)], [1, 0])) == 1

    def test_five_node_example(self):
        # 1-based edges {12,13,24,35,45} with first two nodes infected
        edges = [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4)]
        z = [1, 1, 0, 0, 0]
        expected = brute_cross_ties(5, edges, z)
        assert expected == 2
        assert cross_group_ties(Network(5, edges, z)) == expected

    @given(small_networks())
    def test_matches_brute_force(self, nz):
        net, edges, z = nz
        assert cross_group_ties(net) == brute_cross_ties(net.n, edges, z)


class TestCrossAlters:
    def test_isolated_node(self):
        net = Network(3, [(0, 1)], [1, 1, 1])
        assert node_cross_alters(net, 2) == 0

    def test_star_center(self):
        net = Network(4, [(0, 1), (0, 2), (0, 3)], [0, 1, 1, 1])
        assert node_cross_alters(net, 0) == 3

    def test_invalid_id(self):
        with pytest.raises(ValueError):
            node_cross_alters(triangle(), 7)

    @given(small_networks())
    def test_factor_two_identity(self, nz):
        # sum of x*(1-z) + (d-x)*z double counts the discordant edges
        net, _, _ = nz
        x = cross_alters_all(net)
        d = net.degrees
        z = net.infection.astype(np.int64)
        total = int(np.sum(x * (1 - z) + (d - x) * z))
        assert total == 2 * cross_group_ties(net)

    @given(small_networks())
    def test_degree_sum_even(self, nz):
        net, _, _ = nz
        assert int(net.degrees.sum()) % 2 == 0


class TestClassTable:
    def test_empty_graph(self):
        tbl = class_table(Network(3, [], [0, 0, 0]))
        assert tbl.entries == {(0, 0): 3}
        assert tbl.scale == "count"

    def test_triangle(self):
        tbl = class_table(triangle())
        assert tbl.entries == {(2, 1): 1, (2, 0): 2}

    @given(small_networks())
    def test_sums_to_n(self, nz):
        net, _, _ = nz
        assert class_table(net).total() == net.n


class TestMixingAndRatios:
    @given(small_networks())
    def test_tie_partition(self, nz):
        net, _, _ = nz
        z = net.infection
        if z.sum() < 2 or z.sum() >= net.n:
            return
        stats = mixing_and_ratios(net)
        assert stats.cross_ties + stats.within1_ties + stats.within0_ties == net.edge_count

    def test_zero_cross_is_infinite(self):
        net = Network(4, [(0, 1), (2, 3)], [1, 1, 0, 0])
        assert math.isinf(mixing_and_ratios(net).homophily_R)

    def test_activity_ratio_by_construction(self):
        # infected 0,1 have degree 2; uninfected 2,3 have degree 1
        net = Network(4, [(0, 1), (0, 2), (1, 3)], [1, 1, 0, 0])
        assert mixing_and_ratios(net).activity_w == pytest.approx(2.0)

    def test_degenerate_groups_error(self):
        with pytest.raises(ValueError, match="degenerate"):
            mixing_and_ratios(Network(3, [(0, 1)], [1, 0, 0]))

    def test_balanced_mixing_near_one(self, rng):
        # dyad-independent graph with one shared density: R should sit near 1
        n = 200
        z = np.zeros(n, dtype=np.int8)
        z[:100] = 1
        vals = []
        for _ in range(30):
            iu, ju = np.triu_indices(n, k=1)
            keep = rng.random(iu.shape[0]) < 0.05
            net = Network(n, np.column_stack([iu[keep], ju[keep]]), z)
            vals.append(mixing_and_ratios(net).homophily_R)
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / np.sqrt(len(vals)))
        assert abs(mean - 1.0) < 3 * se + 1e-6


class TestSharedPartners:
    def test_triangle(self):
        ep = edgewise_shared_partners(triangle())
        assert ep[1] == 3 and ep.sum() == 3

    def test_path(self):
        ep = edgewise_shared_partners(Network(3, [(0, 1), (1, 2)], [0, 0, 0]))
        assert ep[0] == 2 and ep.sum() == 2

    def test_four_clique(self):
        net = Network(4, [(u, v) for u in range(4) for v in range(u + 1, 4)], [0] * 4)
        ep = edgewise_shared_partners(net)
        assert ep[2] == 6 and ep.sum() == 6

    @given(small_networks())
    def test_sums_to_edge_count(self, nz):
        net, _, _ = nz
        assert int(edgewise_shared_partners(net).sum()) == net.edge_count


class TestGwesp:
    def test_triangle_theta_zero(self):
        assert gwesp(triangle(), 0.0) == pytest.approx(3.0)

    def test_triangle_free_zero(self):
        net = Network(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [0, 0, 0, 0])
        for theta in (0.0, 0.5, 1.0, 2.0):
            assert gwesp(net, theta) == 0.0

    def test_four_clique_theta_one(self):
        net = Network(4, [(u, v) for u in range(4) for v in range(u + 1, 4)], [0] * 4)
        expected = math.e * (1.0 - (1.0 - math.exp(-1.0)) ** 2) * 6
        assert gwesp(net, 1.0) == pytest.approx(expected)

    def test_negative_theta_rejected(self):
        with pytest.raises(ValueError):
            gwesp(triangle(), -0.1)

    @given(small_networks())
    def test_theta_zero_identity(self, nz):
        net, _, _ = nz
        ep = edgewise_shared_partners(net)
        assert gwesp(net, 0.0) == pytest.approx(net.edge_count - ep[0])


class TestFileFormats:
    def test_round_trip(self, tmp_path, rng):
        edges = [(0, 1), (1, 2), (0, 3), (2, 4)]
        net = Network(5, edges, [1, 0, 1, 0, 0])
        save_network(net, tmp_path)
        back = load_network(tmp_path)
        assert back.n == net.n
        assert np.array_equal(back.edges, net.edges)
        assert np.array_equal(back.infection, net.infection)

    def _write(self, tmp_path, nodes, edges):
        (tmp_path / "nodes.csv").write_text("id,infected\n" + "".join(f"{i},{z}\n" for i, z in nodes))
        (tmp_path / "edges.csv").write_text("u,v\n" + "".join(f"{u},{v}\n" for u, v in edges))

    def test_rejects_duplicate_edge(self, tmp_path):
        self._write(tmp_path, [(0, 0), (1, 1)], [(0, 1), (1, 0)])
        with pytest.raises(ValueError, match="duplicate"):
            load_network(tmp_path)

    def test_rejects_self_loop(self, tmp_path):
        self._write(tmp_path, [(0, 0), (1, 1)], [(1, 1)])
        with pytest.raises(ValueError, match="self-loop"):
            load_network(tmp_path)

    def test_rejects_out_of_range(self, tmp_path):
        self._write(tmp_path, [(0, 0), (1, 1)], [(0, 7)])
        with pytest.raises(ValueError, match="out of range"):
            load_network(tmp_path)

    def test_rejects_gap_in_ids(self, tmp_path):
        self._write(tmp_path, [(0, 0), (2, 1)], [])
        with pytest.raises(ValueError, match="contiguous"):
            load_network(tmp_path)

    def test_rejects_bad_infected(self, tmp_path):
        self._write(tmp_path, [(0, 0), (1, 3)], [])
        with pytest.raises(ValueError):
            load_network(tmp_path)
