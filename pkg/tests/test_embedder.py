import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrangeable.backbone import build_Kkr, build_Rkr_path_augmented
from arrangeable.embedder import (
    EmbedConfig,
    ImageRestrictionSet,
    augment_G_prime,
    compute_image_restrictions,
    embed,
    verify_embedding,
)
from arrangeable.errors import EmbeddingFailure, PreconditionError
from arrangeable.graph import Graph, complete, empty, equitable_grid, path_power
from arrangeable.partition_h import HomomorphismMap
from arrangeable.regularity import ClusterPartition, build_host_partition, check_super_regular


def grid_map(f, X=None, shape=(2, 1)):
    f = np.asarray(f, dtype=np.int64)
    X = np.zeros(len(f), dtype=bool) if X is None else np.asarray(X, dtype=bool)
    return HomomorphismMap(f=f, X=X, target="grid", shape=shape,
                           class_sizes=np.bincount(f, minlength=int(np.prod(shape))))


def two_cluster_partition(n_side, R_edge=True, star=True):
    clusters = [np.arange(n_side), np.arange(n_side, 2 * n_side)]
    R = Graph.from_edges(2, [(0, 1)] if R_edge else [])
    Rs = Graph.from_edges(2, [(0, 1)] if star else [])
    return ClusterPartition(clusters, R, Rs, 0.1, 0.5)


def complete_bipartite(a, b):
    side = np.arange(a + b) < a
    return Graph(side[:, None] != side[None, :])


def random_host(n, p, seed):
    rng = np.random.default_rng(seed)
    adj = np.triu(rng.random((n, n)) < p, 1)
    return Graph(adj | adj.T)


def dense_partition(n=240, p=0.7, seed=0, eps=0.1, delta=0.5, k=2, r=2):
    G = random_host(n, p, seed)
    R = build_Rkr_path_augmented(k, r).graph
    K = build_Kkr(k, r).graph
    part = build_host_partition(G, equitable_grid(n, k, r).flat(), R, K, eps, delta, seed=seed)
    return G, part


# --------------------------------------------------------------------------
# image restrictions


def test_restrictions_on_complete_host():
    G = complete(40)
    part = two_cluster_partition(20)
    U = compute_image_restrictions(part, G, 0.5, 0.1)
    for Ui, Vi in zip(U.U, part.clusters):
        assert np.array_equal(Ui, Vi)


def test_vertex_without_edges_into_neighbour_cluster_is_excluded():
    adj = complete(40).adj.copy()
    adj[3, 20:] = adj[20:, 3] = False
    G = Graph(adj)
    U = compute_image_restrictions(two_cluster_partition(20), G, 0.5, 0.1)
    assert 3 not in U.U[0]
    assert len(U.U[0]) == 19 and len(U.U[1]) == 20


@pytest.mark.parametrize("seed", range(5))
def test_restriction_size_bound_on_random_partitions(seed):
    G, part = dense_partition(seed=seed)
    U = compute_image_restrictions(part, G, 0.5, 0.1)
    Delta_R = part.R.max_degree
    for Ui, Vi in zip(U.U, part.clusters):
        assert len(Ui) >= (1 - Delta_R * 0.1) * len(Vi)
        assert set(Ui.tolist()) <= set(Vi.tolist())


# --------------------------------------------------------------------------
# augmentation


def test_augment_is_identity_when_R_equals_spine():
    G, part = dense_partition(seed=1)
    part = ClusterPartition(part.clusters, part.R, part.R, part.eps, part.delta)
    Gp, report = augment_G_prime(G, part, 0.5, 0.1, seed=0)
    assert Gp == G and report["diff_edges"] == 0


def test_single_deficient_vertex_gets_exact_number_of_edges():
    n_side = 20
    G = complete_bipartite(n_side, n_side)
    adj = G.adj.copy()
    v = 2
    adj[v, n_side:] = adj[n_side:, v] = False
    G = Graph(adj)
    part = two_cluster_partition(n_side, star=False)
    Gp, report = augment_G_prime(G, part, 0.5, 0.1, seed=3)
    diff = np.argwhere(np.triu(G.adj ^ Gp.adj, 1))
    assert len(diff) == math.ceil(0.5 * n_side) == report["added_edges"]
    assert all(v in e for e in diff.tolist())
    others = {b if a == v else a for a, b in diff.tolist()}
    assert others <= set(range(n_side, 2 * n_side))


@pytest.mark.parametrize("seed", range(3))
def test_augment_repairs_five_percent_deficient_vertices(seed):
    eps, delta = 0.2, 0.5
    G, part = dense_partition(seed=seed, eps=eps, delta=delta)
    rng = np.random.default_rng(seed)
    adj = G.adj.copy()
    loose = [(int(i), int(j)) for i, j in part.R.edges if not part.R_star.has_edge(int(i), int(j))]
    for i, j in loose:
        Vi, Vj = part.clusters[i], part.clusters[j]
        bad = rng.choice(Vi, size=max(1, len(Vi) // 20), replace=False)
        adj[np.ix_(bad, Vj)] = False
        adj[np.ix_(Vj, bad)] = False
    G = Graph(adj)
    U = compute_image_restrictions(part, G, delta, eps)
    Gp, report = augment_G_prime(G, part, delta, eps, seed=seed, restrictions=U)
    assert report["min_degree_ok"] and report["added_edges"] > 0
    diff = G.adj ^ Gp.adj
    for i, j in part.R_star.edges:
        assert not diff[np.ix_(part.clusters[int(i)], part.clusters[int(j)])].any()
    for i, j in part.R.edges:
        assert not diff[np.ix_(U.U[int(i)], U.U[int(j)])].any()
    for i, j in loose:
        v = check_super_regular(Gp, part.clusters[i], part.clusters[j], eps, delta - eps, "codegree")
        assert v.super_regular


# --------------------------------------------------------------------------
# embedding


def test_embed_edgeless_guest():
    n_side = 15
    G = random_host(2 * n_side, 0.5, 0)
    part = two_cluster_partition(n_side)
    H = empty(2 * n_side)
    hm = grid_map(np.repeat([0, 1], n_side))
    emb = embed(H, hm, part, G, seed=0)
    assert sorted(emb.phi[:n_side].tolist()) == list(range(n_side))
    assert verify_embedding(H, G, emb.phi)[0]


def test_embed_perfect_matching_into_complete_bipartite():
    n_side = 25
    G = complete_bipartite(n_side, n_side)
    H = Graph.from_edges(2 * n_side, [(2 * i, 2 * i + 1) for i in range(n_side)])
    hm = grid_map(np.tile([0, 1], n_side))
    emb = embed(H, hm, two_cluster_partition(n_side), G, seed=1)
    assert emb.attempts == 1
    assert verify_embedding(H, G, emb.phi)[0]
    assert emb.audit["clusters_respected"]


def test_embed_respects_image_restrictions():
    n_side = 30
    adj = complete_bipartite(n_side, n_side).adj.copy()
    G = Graph(adj)
    part = two_cluster_partition(n_side)
    H = Graph.from_edges(2 * n_side, [(2 * i, 2 * i + 1) for i in range(n_side)])
    X = np.zeros(2 * n_side, dtype=bool)
    X[:6] = True
    U = ImageRestrictionSet([np.arange(10), np.arange(n_side, n_side + 10)], X)
    emb = embed(H, grid_map(np.tile([0, 1], n_side), X), part, G, restrictions=U, seed=2)
    assert all(emb.phi[x] in set(U.U[x % 2].tolist()) for x in range(6))
    assert emb.audit["restrictions_respected"]


def test_embed_square_path_on_dense_host():
    n = 240
    G, part = dense_partition(n=n, p=0.8, seed=4, k=2, r=3, eps=0.2, delta=0.5)
    H = path_power(n, 2)
    # vertex v sits in column v // (n/2) and row v mod 3; every edge is a K_2^3 edge
    # except the two crossing the cut, which join X vertices over an R-pair
    half = n // 2
    f = (np.arange(n) // half) * 3 + np.arange(n) % 3
    X = np.zeros(n, dtype=bool)
    X[half - 2:half + 2] = True
    sizes = np.bincount(f, minlength=6)
    clusters = []
    pool = list(np.concatenate(part.clusters))
    start = 0
    for s_ in sizes:
        clusters.append(np.sort(np.asarray(pool[start:start + s_])))
        start += s_
    part = ClusterPartition(clusters, part.R, part.R_star, 0.2, 0.5)
    hm = grid_map(f, X, shape=(2, 3))
    with pytest.warns(UserWarning, match="Delta"):
        emb = embed(H, hm, part, G, seed=0, delta=0.5)
    assert verify_embedding(H, G, emb.phi)[0]


def test_embed_failure_reports_attempts():
    n_side = 10
    G = empty(2 * n_side)
    H = Graph.from_edges(2 * n_side, [(2 * i, 2 * i + 1) for i in range(n_side)])
    with pytest.raises(EmbeddingFailure) as info:
        embed(H, grid_map(np.tile([0, 1], n_side)), two_cluster_partition(n_side), G, seed=0, restart_budget=3)
    assert len(info.value.report["attempts"]) == 3


def test_embed_rejects_edges_off_the_spine():
    n_side = 10
    G = complete_bipartite(n_side, n_side)
    H = Graph.from_edges(2 * n_side, [(0, 1)])
    part = two_cluster_partition(n_side, star=False)
    with pytest.raises(PreconditionError, match="X"):
        embed(H, grid_map(np.tile([0, 1], n_side)), part, G, seed=0)


def test_embed_is_deterministic_per_seed():
    n_side = 25
    G = random_host(2 * n_side, 0.7, 5)
    H = Graph.from_edges(2 * n_side, [(2 * i, 2 * i + 1) for i in range(n_side)])
    hm = grid_map(np.tile([0, 1], n_side))
    a = embed(H, hm, two_cluster_partition(n_side), G, seed=9, config=EmbedConfig(reserve=0.1))
    b = embed(H, hm, two_cluster_partition(n_side), G, seed=9, config=EmbedConfig(reserve=0.1))
    assert np.array_equal(a.phi, b.phi)


# --------------------------------------------------------------------------
# verification


def test_verify_identity_and_broken_swap():
    G = path_power(4, 1)
    assert verify_embedding(G, G, np.arange(4)) == (True, [])
    ok, viol = verify_embedding(G, G, np.array([1, 0, 2, 3]))
    assert not ok and viol == [("edge", 2, 3)]


def test_verify_collision_and_range():
    G = path_power(4, 1)
    ok, viol = verify_embedding(G, G, np.array([0, 1, 1, 3]))
    assert not ok and viol[0][0] == "collision"
    assert verify_embedding(G, G, np.array([0, 1, 2, 7]))[1][0][0] == "range"
    assert verify_embedding(G, G, np.array([0, 1, 2]))[1][0][0] == "length"


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 10).flatmap(lambda n: st.tuples(st.permutations(range(n)), st.integers(0, 2**31))))
def test_verify_matches_edge_by_edge_check(data):
    perm, seed = data
    n = len(perm)
    rng = np.random.default_rng(seed)
    H = random_host(n, 0.3, rng.integers(2**31))
    G = random_host(n, 0.6, rng.integers(2**31))
    phi = np.array(perm)
    expected = all(G.has_edge(phi[u], phi[v]) for u, v in H.edges)
    assert verify_embedding(H, G, phi)[0] == expected
