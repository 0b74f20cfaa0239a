"""Model contracts: dense-oracle equivalence, invariants, embeddings."""

import numpy as np
import pytest
from helpers import (
    dense_gat_forward,
    dense_gat_layer,
    dense_gat_resnet_forward,
    dense_gcn_forward,
    dense_mask,
    dense_norm_adjacency,
    np_elu,
    permute_dataset,
    random_dataset,
)

from amlgraph.autodiff import RngState, Tensor, elu, xavier_std
from amlgraph.data import build_graph, synthetic_graph
from amlgraph.errors import ParameterError, ShapeError
from amlgraph.models import (
    GatConfig,
    GatResNetConfig,
    GcnConfig,
    embed,
    forward,
    gat_forward,
    gat_layer,
    gat_resnet_forward,
    gcn_forward,
    init_params,
    model_kind,
    named_tensors,
)

ORACLE_TOL = dict(rtol=1e-10, atol=1e-12)


def tiny_config(kind, in_dim=166, hidden=6, heads=3, use_skip=True):
    if kind == "gcn":
        return GcnConfig(in_dim=in_dim, hidden=hidden)
    if kind == "gat":
        return GatConfig(in_dim=in_dim, hidden=hidden, heads=heads)
    return GatResNetConfig(in_dim=in_dim, hidden=hidden, heads=heads, use_skip=use_skip)


def make_case(seed, kind, n_max=14, **cfg_kw):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, n_max=n_max)
    graph = build_graph(ds)
    params = init_params(tiny_config(kind, **cfg_kw), RngState(seed))
    return ds, graph, params, Tensor(ds.features)


class TestInitParams:
    def test_deterministic(self):
        a = init_params(GatResNetConfig(), RngState(3))
        b = init_params(GatResNetConfig(), RngState(3))
        for (na, ta), (nb, tb) in zip(named_tensors(a).items(), named_tensors(b).items()):
            assert na == nb and np.array_equal(ta.data, tb.data)

    def test_paper_shapes(self):
        params = init_params(GatResNetConfig(), RngState(0))
        tensors = named_tensors(params)
        for h in range(1, 5):
            assert tensors[f"layer1.head{h}.W"].shape == (166, 100)
            assert tensors[f"layer1.head{h}.a_dst"].shape == (100, 1)
        assert tensors["layer2.head1.W"].shape == (400, 100)
        assert tensors["layer3.head1.W"].shape == (400, 2)
        assert tensors["skip.W"].shape == (166, 2)
        gat = named_tensors(init_params(GatConfig(), RngState(0)))
        assert gat["layer2.head8.W"].shape == (800, 2)

    def test_empirical_std(self):
        w = named_tensors(init_params(GatResNetConfig(), RngState(11)))["layer1.head1.W"]
        want = xavier_std(166, 100)
        assert abs(w.data.std() - want) / want < 0.05

    def test_all_grad_enabled(self):
        params = init_params(GatResNetConfig(), RngState(5))
        assert all(t.grad_enabled for t in named_tensors(params).values())

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            GcnConfig(hidden=0)
        with pytest.raises(ParameterError):
            GatConfig(heads=0)
        with pytest.raises(ParameterError):
            GatResNetConfig(dropout=1.0)


class TestGcnForward:
    def test_isolated_node_reduces_to_mlp(self):
        ds, graph, params, x = make_case(21, "gcn", n_max=3)
        # single node, no edges: A_hat is the 1x1 identity
        rng = np.random.default_rng(0)
        import amlgraph.data as data_mod

        tx = np.array([0], dtype=np.int64)
        one = data_mod.EllipticDataset(
            n_nodes=1, features=rng.standard_normal((1, 166)),
            time_step=np.array([1]), label=np.array([0]),
            edges=np.empty((0, 2), dtype=np.int64), tx_ids=tx, tx_id_index={0: 0},
        )
        g1 = build_graph(one)
        probs = gcn_forward(params, g1, Tensor(one.features)).data
        want = np_elu(one.features @ params.w1.data) @ params.w2.data
        want = np.exp(want - want.max()) / np.exp(want - want.max()).sum()
        assert np.allclose(probs, want[None] if want.ndim == 1 else want, **ORACLE_TOL)

    def test_rows_sum_to_one(self):
        ds, graph, params, x = make_case(22, "gcn")
        probs = gcn_forward(params, graph, x).data
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-12
        assert (probs >= 0).all()

    def test_matches_dense_oracle(self):
        for seed in range(5):
            ds, graph, params, x = make_case(100 + seed, "gcn")
            got = gcn_forward(params, graph, x).data
            a_norm = dense_norm_adjacency(ds.n_nodes, ds.edges)
            assert np.allclose(got, dense_gcn_forward(params, a_norm, ds.features), **ORACLE_TOL)

    def test_shape_errors(self):
        ds, graph, params, x = make_case(23, "gcn")
        with pytest.raises(ShapeError):
            gcn_forward(params, graph, Tensor(np.ones((ds.n_nodes, 7))))


class TestGatLayer:
    def test_self_loop_only_passes_projection_through(self):
        ds, graph, params, x = make_case(24, "gat", n_max=3)
        import amlgraph.data as data_mod

        one = data_mod.EllipticDataset(
            n_nodes=1, features=np.random.default_rng(1).standard_normal((1, 166)),
            time_step=np.array([1]), label=np.array([0]),
            edges=np.empty((0, 2), dtype=np.int64), tx_ids=np.array([0]), tx_id_index={0: 0},
        )
        g1 = build_graph(one)
        head = params.layers[0][0]
        out = gat_layer([head], g1, Tensor(one.features), concat=True, training=False,
                        rng=RngState(0))
        z = one.features @ head.W.data
        assert np.allclose(out.data, z, **ORACLE_TOL)

    def test_identical_neighbors_share_attention_equally(self):
        import amlgraph.data as data_mod

        feats = np.tile(np.linspace(-1.0, 1.0, 166), (3, 1))
        tx = np.arange(3, dtype=np.int64)
        ds = data_mod.EllipticDataset(
            n_nodes=3, features=feats, time_step=np.ones(3, dtype=np.int64),
            label=np.zeros(3, dtype=np.int64),
            edges=np.array([[1, 0], [2, 0]], dtype=np.int64),
            tx_ids=tx, tx_id_index={int(t): i for i, t in enumerate(tx)},
        )
        graph = build_graph(ds)
        params = init_params(tiny_config("gat"), RngState(7))
        head = params.layers[0][0]
        out = gat_layer([head], graph, Tensor(feats), concat=True, training=False,
                        rng=RngState(0))
        # all scores in row 0 tie, so attention is 1/3 each; with identical
        # projections the aggregate equals the projection itself
        z = feats @ head.W.data
        assert np.allclose(out.data[0], z[0], **ORACLE_TOL)

    def test_matches_dense_attention_oracle(self):
        for seed in range(5):
            ds, graph, params, x = make_case(200 + seed, "gat")
            got = gat_layer(params.layers[0], graph, x, concat=True, training=False,
                            rng=RngState(0))
            mask = dense_mask(ds.n_nodes, ds.edges)
            want = dense_gat_layer(params.layers[0], mask, ds.features, concat=True)
            assert np.allclose(got.data, want, **ORACLE_TOL)


class TestGatForward:
    def test_rows_sum_to_one(self):
        ds, graph, params, x = make_case(25, "gat")
        probs = gat_forward(params, graph, x).data
        assert probs.shape == (ds.n_nodes, 2)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-12

    def test_hidden_width_is_heads_times_hidden(self):
        ds, graph, params, x = make_case(26, "gat", hidden=5, heads=8)
        h = gat_layer(params.layers[0], graph, x, concat=True, training=False,
                      rng=RngState(0))
        assert h.cols == 40

    def test_matches_dense_oracle(self):
        for seed in range(4):
            ds, graph, params, x = make_case(300 + seed, "gat")
            got = gat_forward(params, graph, x).data
            want = dense_gat_forward(params, dense_mask(ds.n_nodes, ds.edges), ds.features)
            assert np.allclose(got, want, **ORACLE_TOL)


class TestGatResNetForward:
    def test_zero_skip_equals_no_skip_bitwise(self):
        ds, graph, params, x = make_case(27, "gat_resnet", use_skip=True)
        params.w_skip.data[:] = 0.0
        with_skip = gat_resnet_forward(params, graph, x).data
        cfg = GatResNetConfig(in_dim=166, hidden=6, heads=3, use_skip=False)
        no_skip = init_params(cfg, RngState(27))
        no_skip.layers = params.layers
        off = gat_resnet_forward(no_skip, graph, x).data
        assert np.array_equal(with_skip, off)

    def test_output_contract(self):
        ds, graph, params, x = make_case(28, "gat_resnet")
        probs = gat_resnet_forward(params, graph, x).data
        assert probs.shape == (ds.n_nodes, 2)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-12

    def test_matches_dense_oracle(self):
        for seed in range(4):
            ds, graph, params, x = make_case(400 + seed, "gat_resnet")
            got = gat_resnet_forward(params, graph, x).data
            want = dense_gat_resnet_forward(params, dense_mask(ds.n_nodes, ds.edges), ds.features)
            assert np.allclose(got, want, **ORACLE_TOL)


class TestEmbed:
    def test_width_is_heads_times_hidden(self):
        params = init_params(GatResNetConfig(), RngState(1))
        ds = synthetic_graph(4, 4, 1.0, 0.3, seed=2)
        graph = build_graph(ds)
        out = embed(params, graph, Tensor(ds.features))
        assert out.shape == (8, 400)

    def test_deterministic(self):
        ds, graph, params, x = make_case(29, "gat_resnet")
        a = embed(params, graph, x).data
        b = embed(params, graph, x).data
        assert np.array_equal(a, b)

    def test_equals_first_layer_of_forward(self):
        ds, graph, params, x = make_case(30, "gat_resnet")
        got = embed(params, graph, x).data
        l1 = elu(gat_layer(params.layers[0], graph, x, concat=True, training=False,
                           rng=RngState(0), attn_slope=params.config.attn_slope))
        assert np.array_equal(got, l1.data)

    def test_wrong_model_kind(self):
        ds, graph, params, x = make_case(31, "gcn")
        with pytest.raises(ParameterError):
            embed(params, graph, x)


class TestPermutationEquivariance:
    @pytest.mark.parametrize("kind", ["gcn", "gat", "gat_resnet"])
    def test_exact_equivariance(self, kind):
        rng = np.random.default_rng(55)
        for seed in range(6):
            ds, graph, params, x = make_case(500 + seed, kind)
            out = forward(params, graph, x).data
            perm = rng.permutation(ds.n_nodes)
            pds = permute_dataset(ds, perm)
            pgraph = build_graph(pds)
            pout = forward(params, pgraph, Tensor(pds.features)).data
            expected = np.empty_like(out)
            expected[perm] = out
            assert np.array_equal(pout, expected), f"{kind} seed {seed}"

    @pytest.mark.parametrize("kind", ["gcn", "gat", "gat_resnet"])
    def test_exact_equivariance_under_heavy_ties(self, kind):
        # ring graph: regular degrees make every normalization coefficient
        # equal, and integer-valued duplicated features maximize ties in
        # the canonical ordering keys
        import amlgraph.data as data_mod

        n = 12
        rng = np.random.default_rng(77)
        feats = np.zeros((n, 166))
        feats[:, :10] = rng.integers(-1, 2, (n, 10)).astype(float)
        feats[:, 0] = 1.0
        tx = np.arange(n, dtype=np.int64)
        ds = data_mod.EllipticDataset(
            n_nodes=n, features=feats, time_step=np.ones(n, dtype=np.int64),
            label=np.zeros(n, dtype=np.int64),
            edges=np.array([[i, (i + 1) % n] for i in range(n)], dtype=np.int64),
            tx_ids=tx, tx_id_index={int(t): i for i, t in enumerate(tx)},
        )
        graph = build_graph(ds)
        params = init_params(tiny_config(kind), RngState(13))
        out = forward(params, graph, Tensor(ds.features)).data
        for trial in range(4):
            perm = np.random.default_rng(trial).permutation(n)
            pds = permute_dataset(ds, perm)
            pout = forward(params, build_graph(pds), Tensor(pds.features)).data
            expected = np.empty_like(out)
            expected[perm] = out
            assert np.array_equal(pout, expected), f"{kind} trial {trial}"


def test_model_kind_dispatch():
    for kind in ("gcn", "gat", "gat_resnet"):
        ds, graph, params, x = make_case(32, kind, n_max=5)
        assert model_kind(params) == kind
        assert forward(params, graph, x).shape == (ds.n_nodes, 2)
