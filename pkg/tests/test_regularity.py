from fractions import Fraction

import numpy as np
import pytest

from arrangeable.backbone import build_Cmr, build_Kkr, build_Rkr_path_augmented
from arrangeable.errors import CapExceededError, PreconditionError
from arrangeable.graph import Graph, complete, equitable_grid, random_min_degree
from arrangeable.regularity import (
    build_host_partition,
    check_regular_matrix,
    check_regular_pair,
    check_super_regular,
    coloured_regular_partition,
    density,
    find_mono_cycle_power,
    is_cycle_power_copy,
)

from oracles import has_cycle_power_copy, is_regular, is_regular_enumerated


def bipartite(M) -> tuple[Graph, np.ndarray, np.ndarray]:
    M = np.asarray(M, dtype=bool)
    a, b = M.shape
    adj = np.zeros((a + b, a + b), dtype=bool)
    adj[:a, a:] = M
    adj[a:, :a] = M.T
    return Graph(adj), np.arange(a), np.arange(a, a + b)


def test_density_examples():
    G, A, B = bipartite(np.ones((3, 4)))
    assert density(G, A, B) == 1
    G, A, B = bipartite(np.zeros((3, 4)))
    assert density(G, A, B) == 0
    G, A, B = bipartite([[1, 0], [1, 0]])
    assert density(G, A, B) == Fraction(1, 2)
    with pytest.raises(PreconditionError):
        density(G, [0, 1], [1, 2])
    with pytest.raises(PreconditionError):
        density(G, [], [2])


@pytest.mark.parametrize("mode", ["exact", "codegree", "sampled"])
@pytest.mark.parametrize("eps", [0.05, 0.3, 0.9])
def test_complete_pair_is_regular(mode, eps):
    G, A, B = bipartite(np.ones((8, 9)))
    assert check_regular_pair(G, A, B, eps, mode, seed=0).regular
    assert check_super_regular(G, A, B, eps, 1.0, mode, seed=0).super_regular


def test_half_joined_pair_has_witness():
    M = np.zeros((8, 8), dtype=bool)
    M[:4] = True
    G, A, B = bipartite(M)
    v = check_regular_pair(G, A, B, 0.4, "exact")
    assert not v.regular
    A2, B2 = v.witness
    assert len(A2) >= 0.4 * 8 and len(B2) >= 0.4 * 8
    assert abs(density(G, A2, B2) - v.density) > Fraction(2, 5)
    assert not is_regular(M.astype(int).tolist(), 0.4)


def test_oracles_agree_on_small_pairs():
    rng = np.random.default_rng(7)
    for _ in range(40):
        a, b = rng.integers(1, 6, size=2)
        M = rng.random((a, b)) < rng.random()
        eps = float(rng.uniform(0.1, 0.8))
        assert is_regular(M.astype(int).tolist(), eps) == is_regular_enumerated(M, eps)


def test_exact_random_half_density_matches_brute_force():
    rng = np.random.default_rng(11)
    sampled_agree = 0
    for seed in range(20):
        M = rng.random((12, 12)) < 0.5
        truth = is_regular_enumerated(M, 0.45)
        G, A, B = bipartite(M)
        assert check_regular_pair(G, A, B, 0.45, "exact").regular == truth
        sampled_agree += check_regular_pair(G, A, B, 0.45, "sampled", seed=seed).regular == truth
    assert sampled_agree >= 19


def test_exact_witness_is_genuine():
    rng = np.random.default_rng(3)
    found = 0
    for _ in range(50):
        M = rng.random((10, 11)) < rng.random()
        eps = float(rng.uniform(0.2, 0.5))
        ok, wit, _ = check_regular_matrix(M, eps, "exact")
        if not ok:
            found += 1
            sub = M[np.ix_(wit[0], wit[1])]
            assert len(wit[0]) >= eps * 10 - 1e-9 and len(wit[1]) >= eps * 11 - 1e-9
            assert abs(sub.mean() - M.mean()) > eps
    assert found > 0


def test_exact_cap():
    with pytest.raises(CapExceededError):
        check_regular_matrix(np.ones((20, 20)), 0.3, "exact")


def test_isolated_vertex_breaks_super_regularity():
    M = np.ones((6, 6), dtype=bool)
    M[0] = False
    G, A, B = bipartite(M)
    for delta in (0.01, 0.5):
        assert not check_super_regular(G, A, B, 0.3, delta, "exact").min_degree_ok


def test_random_pair_super_regular_in_codegree_mode():
    passes = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        G, A, B = bipartite(rng.random((50, 50)) < 0.6)
        passes += check_super_regular(G, A, B, 0.2, 0.3, "codegree").super_regular
    assert passes >= 9


def test_host_partition_complete_graph():
    G = complete(40)
    R = build_Rkr_path_augmented(2, 2).graph
    K = build_Kkr(2, 2).graph
    part = build_host_partition(G, [10, 10, 10, 10], R, K, 0.2, 0.5, seed=0)
    assert part.swap_log == [] and part.certified
    assert sorted(np.concatenate(part.clusters).tolist()) == list(range(40))


def test_host_partition_random_dense_graph():
    R = build_Rkr_path_augmented(2, 2).graph
    K = build_Kkr(2, 2).graph
    targets = equitable_grid(400, 2, 2).flat()
    for seed in range(10):
        rng = np.random.default_rng(seed)
        adj = np.triu(rng.random((400, 400)) < 0.9, 1)
        G = Graph(adj | adj.T)
        part = build_host_partition(G, targets, R, K, 0.25, 0.5, seed=seed)
        assert part.certified and len(part.swap_log) <= 50
        assert part.sizes.tolist() == targets.tolist()


def test_host_partition_repairs_min_degree():
    G = random_min_degree(120, 0.7, seed=1)
    R = build_Rkr_path_augmented(2, 3).graph
    K = build_Kkr(2, 3).graph
    part = build_host_partition(G, equitable_grid(120, 2, 3).flat(), R, K, 0.3, 0.45, seed=2)
    for i, j in K.edges:
        assert part.verdicts[(int(i), int(j))].min_degree_ok


def test_host_partition_target_mismatch():
    R = build_Rkr_path_augmented(2, 2).graph
    K = build_Kkr(2, 2).graph
    with pytest.raises(PreconditionError):
        build_host_partition(complete(40), [10, 10, 10, 9], R, K, 0.2, 0.5)


def test_coloured_partition_all_red():
    cp = coloured_regular_partition(complete(60), 6, 0.25, seed=0)
    assert cp.reduced[np.triu_indices(6, 1)].all()
    assert (cp.colour[np.triu_indices(6, 1)] == 0).all()
    assert np.allclose(cp.red_density[np.triu_indices(6, 1)], 1)


def test_coloured_partition_random_colouring():
    good = 0
    k = 20
    for seed in range(10):
        rng = np.random.default_rng(seed)
        adj = np.triu(rng.random((600, 600)) < 0.5, 1)
        cp = coloured_regular_partition(Graph(adj | adj.T), k, 0.25, seed=seed)
        good += np.triu(cp.reduced, 1).sum() >= (1 - 0.25) * k * (k - 1) / 2
    assert good >= 9


def test_coloured_partition_cut_colouring():
    N = 120
    side = np.arange(N) < N // 2
    red = Graph(side[:, None] != side[None, :])
    cp = coloured_regular_partition(red, 4, 0.3, seed=1, mode="codegree")
    for i in range(4):
        for j in range(i + 1, 4):
            a = side[cp.clusters[i]].mean()
            b = side[cp.clusters[j]].mean()
            expected = a * (1 - b) + (1 - a) * b
            assert cp.red_density[i, j] == pytest.approx(expected)
            if cp.reduced[i, j]:
                assert cp.colour[i, j] == (0 if expected >= 0.5 else 1)


def test_mono_cycle_power_all_red():
    k = 10
    cmat = np.zeros((k, k), dtype=int)
    np.fill_diagonal(cmat, -1)
    for m in (5, 7, 10):
        colour, seq = find_mono_cycle_power(cmat, m, 2)
        assert colour == 0 and seq == list(range(m))


def test_mono_cycle_power_on_itself():
    m, r = 9, 2
    C = build_Cmr(m, r)
    cmat = np.where(C.adj, 0, 1)
    np.fill_diagonal(cmat, -1)
    colour, seq = find_mono_cycle_power(cmat, m, r, colour=0)
    assert sorted(seq) == list(range(m))
    assert is_cycle_power_copy(C.adj, seq, r)


def test_mono_cycle_power_matches_exhaustive_oracle():
    k, m, r = 20, 6, 2
    for seed in range(12):
        rng = np.random.default_rng(seed)
        p = rng.uniform(0.15, 0.5)
        red = np.triu(rng.random((k, k)) < p, 1)
        red = red | red.T
        cmat = np.where(red, 0, 1)
        np.fill_diagonal(cmat, -1)
        found = find_mono_cycle_power(cmat, m, r, colour=0)
        assert (found is not None) == has_cycle_power_copy(red, m, r)
        if found:
            assert is_cycle_power_copy(red, found[1], r)
