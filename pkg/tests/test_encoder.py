"""Graph-attention encoder: stochasticity, masking, equivariance, goldens."""

import json

import numpy as np
import pytest

from convalign import (
    ConfigError,
    HyperParams,
    ModelParams,
    attention_layer,
    build_graph,
    encode,
)
from convalign.core import AttentionLayerParams
from convalign.graph import ConversationGraph
from conftest import make_conversation


def _graph_from(adjacency, features):
    adjacency = np.asarray(adjacency, dtype=float)
    return ConversationGraph(
        node_features=np.asarray(features, dtype=float),
        adjacency=adjacency,
        edge_types={},
        n=adjacency.shape[0],
    )


def _random_setup(rng, n, d_u=4, d_s=3, layers=2, seed=5):
    conv = make_conversation("dlg", n, d_u, rng)
    params = ModelParams.materialize(d_u=d_u, d_s=d_s, layers=layers, seed=seed)
    hp = HyperParams(d_s=d_s, layers=layers)
    return build_graph(conv, params, hp), params


class TestAttentionLayer:
    def test_rows_sum_to_one_and_respect_support(self):
        rng = np.random.RandomState(21)
        for _ in range(20):
            graph, params = _random_setup(rng, n=int(rng.randint(1, 9)))
            h = graph.node_features
            for layer in params.encoder_e:
                h, attn = attention_layer(h, graph, layer)
                np.testing.assert_allclose(attn.sum(axis=1), 1.0, atol=1e-6)
                assert np.all(attn >= 0.0)
                assert np.all(attn[graph.adjacency == 0.0] == 0.0)

    def test_single_node(self):
        rng = np.random.RandomState(22)
        features = rng.uniform(-1, 1, (1, 7))
        graph = _graph_from([[1.0]], features)
        params = ModelParams.materialize(d_u=4, d_s=3, layers=1, seed=5)
        h_out, attn = attention_layer(features, graph, params.encoder_e[0])
        np.testing.assert_array_equal(attn, [[1.0]])
        np.testing.assert_allclose(h_out, features @ params.encoder_e[0].W.T, atol=1e-12)

    def test_zero_scoring_vector_gives_uniform_neighborhood_mean(self):
        # 3-node path graph, W = identity, a = 0: every neighbor gets equal
        # attention, so outputs are plain neighborhood means
        features = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 3.0]])
        graph = _graph_from([[1.0, 0.5, 0.0], [0.5, 1.0, 0.5], [0.0, 0.5, 1.0]], features)
        layer = AttentionLayerParams(W=np.eye(2), a=np.zeros(4))
        h_out, attn = attention_layer(features, graph, layer)
        expected_attn = np.array(
            [[0.5, 0.5, 0.0], [1 / 3, 1 / 3, 1 / 3], [0.0, 0.5, 0.5]]
        )
        np.testing.assert_allclose(attn, expected_attn, atol=1e-12)
        expected_h = np.array(
            [
                (features[0] + features[1]) / 2.0,
                features.mean(axis=0),
                (features[1] + features[2]) / 2.0,
            ]
        )
        np.testing.assert_allclose(h_out, expected_h, atol=1e-12)


class TestEncode:
    def test_one_layer_equals_single_attention_layer(self):
        rng = np.random.RandomState(23)
        graph, params = _random_setup(rng, n=5, layers=1)
        out = encode(graph, params, "E")
        h, attn = attention_layer(graph.node_features, graph, params.encoder_e[0])
        np.testing.assert_array_equal(out.H, h)
        np.testing.assert_array_equal(out.A_induced, attn)

    def test_spaces_differ(self):
        rng = np.random.RandomState(24)
        graph, params = _random_setup(rng, n=5)
        out_e = encode(graph, params, "E")
        out_c = encode(graph, params, "C")
        assert not np.array_equal(out_e.H, out_c.H)
        assert not np.array_equal(out_e.A_induced, out_c.A_induced)

    def test_induced_adjacency_is_final_layer_attention(self):
        rng = np.random.RandomState(25)
        graph, params = _random_setup(rng, n=6, layers=2)
        h = graph.node_features
        for layer in params.encoder_e:
            h, attn = attention_layer(h, graph, layer)
        out = encode(graph, params, "E")
        np.testing.assert_array_equal(out.A_induced, attn)
        np.testing.assert_array_equal(out.H, h)

    def test_deterministic(self):
        rng = np.random.RandomState(26)
        graph, params = _random_setup(rng, n=7)
        a = encode(graph, params, "E")
        b = encode(graph, params, "E")
        np.testing.assert_array_equal(a.H, b.H)
        np.testing.assert_array_equal(a.A_induced, b.A_induced)

    def test_permutation_equivariance(self):
        rng = np.random.RandomState(27)
        params = ModelParams.materialize(d_u=4, d_s=3, layers=2, seed=5)
        hp = HyperParams(d_s=3)
        for _ in range(25):
            n = int(rng.randint(2, 9))
            conv = make_conversation("dlg", n, 4, rng)
            graph = build_graph(conv, params, hp)
            perm = rng.permutation(n)
            permuted = _graph_from(
                graph.adjacency[np.ix_(perm, perm)], graph.node_features[perm]
            )
            out = encode(graph, params, "E")
            out_p = encode(permuted, params, "E")
            np.testing.assert_allclose(out_p.H, out.H[perm], rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(
                out_p.A_induced, out.A_induced[np.ix_(perm, perm)], rtol=1e-10, atol=1e-12
            )

    def test_layer_count_validation(self):
        rng = np.random.RandomState(28)
        graph, params = _random_setup(rng, n=3, layers=2)
        with pytest.raises(ConfigError):
            encode(graph, params, "E", num_layers=0)
        with pytest.raises(ConfigError):
            encode(graph, params, "E", num_layers=3)


class TestEncoderGolden:
    def test_matches_frozen_fixture(self, fixtures_dir, small_corpus):
        with open(fixtures_dir / "encoder_golden.json", encoding="utf-8") as fh:
            golden = json.load(fh)
        params = ModelParams.materialize(
            d_u=8, d_s=golden["d_s"], layers=golden["layers"], seed=golden["seed"]
        )
        hp = HyperParams(d_s=golden["d_s"], layers=golden["layers"])
        conv = next(
            c for c in small_corpus.conversations if c.conversation_id == golden["id"]
        )
        graph = build_graph(conv, params, hp)
        for space, keys in (("E", ("H_E", "A_E")), ("C", ("H_C", "A_C"))):
            out = encode(graph, params, space)
            np.testing.assert_allclose(out.H, golden[keys[0]], rtol=0, atol=1e-12)
            np.testing.assert_allclose(out.A_induced, golden[keys[1]], rtol=0, atol=1e-12)
