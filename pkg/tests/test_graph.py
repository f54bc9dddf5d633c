import numpy as np
import pytest

from dcex import (
    DirectedGraph,
    EdgeListParseError,
    GraphValidationError,
    load_edge_list,
    save_edge_list,
    subgraph_complement,
    symmetrize,
)

from helpers import directed_gnp


def write(tmp_path, text, name="g.edgelist"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadEdgeList:
    def test_basic_two_edges(self, tmp_path):
        g = load_edge_list(write(tmp_path, "a b\nb c\n"))
        assert g.n_nodes == 3
        assert g.edge_count == 2
        assert g.total_weight == 2.0
        assert g.labels == ("a", "b", "c")

    def test_duplicate_lines_sum_weights(self, tmp_path):
        g = load_edge_list(write(tmp_path, "a b 2\na b 3\n"))
        assert g.edge_count == 1
        assert g.edge_multiset() == {(0, 1): 5.0}

    def test_self_loop_rejected_naming_node(self, tmp_path):
        with pytest.raises(GraphValidationError, match="'a'"):
            load_edge_list(write(tmp_path, "a a\n"))

    def test_malformed_line_reports_line_number(self, tmp_path):
        with pytest.raises(EdgeListParseError, match=":2:"):
            load_edge_list(write(tmp_path, "a b\na b c d\n"))

    def test_negative_weight_rejected(self, tmp_path):
        with pytest.raises(GraphValidationError, match="negative"):
            load_edge_list(write(tmp_path, "a b -1\n"))

    def test_zero_weight_rejected(self, tmp_path):
        with pytest.raises(GraphValidationError):
            load_edge_list(write(tmp_path, "a b 0\n"))

    def test_bad_weight_token(self, tmp_path):
        with pytest.raises(EdgeListParseError, match="weight"):
            load_edge_list(write(tmp_path, "a b xx\n"))

    def test_comments_and_blanks_skipped(self, tmp_path):
        g = load_edge_list(write(tmp_path, "# header\n\na b 1.5\n  # indented\n"))
        assert g.edge_multiset() == {(0, 1): 1.5}

    def test_undirected_mode_stores_both_arcs(self, tmp_path):
        g = load_edge_list(write(tmp_path, "a b 2\n"), directed=False)
        assert g.edge_multiset() == {(0, 1): 2.0, (1, 0): 2.0}

    def test_undirected_reciprocal_lines_merge(self, tmp_path):
        g = load_edge_list(write(tmp_path, "a b\nb a\n"), directed=False)
        assert g.edge_multiset() == {(0, 1): 2.0, (1, 0): 2.0}

    def test_empty_file_gives_empty_graph(self, tmp_path):
        g = load_edge_list(write(tmp_path, "# nothing\n"))
        assert g.n_nodes == 0
        assert g.edge_count == 0

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_edge_list(tmp_path / "absent.edgelist")


class TestConstruction:
    def test_out_in_adjacency_describe_same_edges(self):
        g = directed_gnp(25, 0.2, seed=1, max_weight=3)
        from_out = {
            (u, v): w
            for u in range(g.n_nodes)
            for v, w in zip(g.out_nbrs[u], g.out_wts[u])
        }
        from_in = {
            (u, v): w
            for v in range(g.n_nodes)
            for u, w in zip(g.in_nbrs[v], g.in_wts[v])
        }
        assert from_out == from_in == g.edge_multiset()

    def test_degree_sums_match_total_weight(self):
        for seed in range(5):
            g = directed_gnp(30, 0.15, seed=seed, max_weight=4)
            assert sum(g.out_strength) == pytest.approx(g.total_weight)
            assert sum(g.in_strength) == pytest.approx(g.total_weight)

    def test_self_loop_rejected_by_constructor(self):
        with pytest.raises(GraphValidationError, match="self-loop"):
            DirectedGraph(3, [(1, 1, 1.0)])

    def test_out_of_range_edge_rejected(self):
        with pytest.raises(GraphValidationError, match="out of range"):
            DirectedGraph(2, [(0, 5, 1.0)])

    def test_duplicate_labels_rejected(self):
        with pytest.raises(GraphValidationError, match="unique"):
            DirectedGraph(2, [], labels=("x", "x"))


class TestSymmetrize:
    def test_single_edge(self):
        g = symmetrize(DirectedGraph(2, [(0, 1, 1.0)]))
        assert g.edge_multiset() == {(0, 1): 1.0, (1, 0): 1.0}

    def test_reciprocal_weights_sum(self):
        g = symmetrize(DirectedGraph(2, [(0, 1, 1.0), (1, 0, 2.0)]))
        assert g.edge_multiset() == {(0, 1): 3.0, (1, 0): 3.0}

    def test_empty_graph(self):
        g = symmetrize(DirectedGraph(0, []))
        assert g.n_nodes == 0
        assert g.edge_count == 0

    def test_idempotent_up_to_weight_doubling(self):
        for seed in range(4):
            g = directed_gnp(20, 0.2, seed=seed, max_weight=3)
            once = symmetrize(g)
            twice = symmetrize(once)
            m1 = once.edge_multiset()
            m2 = twice.edge_multiset()
            assert set(m1) == set(m2)
            for key, w in m1.items():
                assert m2[key] == pytest.approx(2.0 * w)

    def test_preserves_labels_and_node_count(self):
        g = DirectedGraph(4, [(0, 1, 1.0)], labels=("a", "b", "c", "d"))
        s = symmetrize(g)
        assert s.labels == g.labels
        assert s.n_nodes == 4


class TestSubgraphComplement:
    def test_remove_nothing_is_isomorphic_copy(self):
        g = directed_gnp(12, 0.3, seed=2)
        sub, kept = subgraph_complement(g, set())
        assert kept == list(range(12))
        assert sub.edge_multiset() == g.edge_multiset()

    def test_triangle_minus_one_node(self):
        g = DirectedGraph(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])
        sub, kept = subgraph_complement(g, {2})
        assert kept == [0, 1]
        assert sub.n_nodes == 2
        assert sub.edge_multiset() == {(0, 1): 1.0}

    def test_remove_all_nodes_is_valid_empty_graph(self):
        g = DirectedGraph(3, [(0, 1, 1.0)])
        sub, kept = subgraph_complement(g, {0, 1, 2})
        assert sub.n_nodes == 0
        assert kept == []

    def test_out_of_range_rejected(self):
        g = DirectedGraph(3, [(0, 1, 1.0)])
        with pytest.raises(GraphValidationError, match="out of range"):
            subgraph_complement(g, {7})

    def test_index_map_and_labels(self):
        g = DirectedGraph(
            4, [(0, 1, 1.0), (1, 3, 2.0), (3, 0, 1.0)], labels=("a", "b", "c", "d")
        )
        sub, kept = subgraph_complement(g, {2})
        assert kept == [0, 1, 3]
        assert sub.labels == ("a", "b", "d")
        assert sub.edge_multiset() == {(0, 1): 1.0, (1, 2): 2.0, (2, 0): 1.0}


class TestRoundTrip:
    def test_save_load_preserves_labeled_edge_multiset(self, tmp_path):
        for seed in range(4):
            g = directed_gnp(15, 0.25, seed=seed, max_weight=3)
            path = tmp_path / f"g{seed}.edgelist"
            save_edge_list(g, path)
            g2 = load_edge_list(path)
            original = {(str(s), str(d)): w for s, d, w in g.labeled_edges()}
            reloaded = {(s, d): w for s, d, w in g2.labeled_edges()}
            assert original == reloaded

    def test_float_weights_round_trip_exactly(self, tmp_path):
        g = DirectedGraph(3, [(0, 1, 0.1), (1, 2, 2.5)], labels=("x", "y", "z"))
        path = tmp_path / "w.edgelist"
        save_edge_list(g, path)
        g2 = load_edge_list(path)
        assert {(s, d): w for s, d, w in g2.labeled_edges()} == {
            ("x", "y"): 0.1,
            ("y", "z"): 2.5,
        }
