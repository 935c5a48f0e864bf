import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arrangeable.colouring import (
    apply_block_permutation,
    balance_colouring,
    build_blocks,
    colour_along_labelling,
    colour_report,
    even_out_check,
    is_balanced,
    is_balanced_bruteforce,
    is_zero_free_colouring,
    switch_colours,
)
from arrangeable.errors import ColouringError, PreconditionError
from arrangeable.graph import Graph, Labelling, complete, empty, is_proper_colouring, path_power, random_bandwidth

from oracles import is_balanced_intervals


def test_build_blocks_examples():
    b = build_blocks(100, 2, 1 / 40)
    assert b.count == 5 and b.sizes().tolist() == [20] * 5
    b = build_blocks(48, 2, 1 / 48)
    assert b.count == 6 and b.length == 8
    with pytest.raises(PreconditionError):
        build_blocks(10, 1, 1 / 100)


def test_zero_free_examples():
    blocks = build_blocks(48, 2, 1 / 48)  # six blocks of length 8
    sigma = np.tile([1, 2], 24)
    assert all(is_zero_free_colouring(sigma, blocks, ell) for ell in range(1, 8))
    two = sigma.copy()
    two[[0, 8]] = 0
    assert not is_zero_free_colouring(two, blocks, 2)
    spaced = sigma.copy()
    spaced[[0, 16]] = 0  # blocks 1 and 3
    assert is_zero_free_colouring(spaced, blocks, 2)
    assert not is_zero_free_colouring(spaced, blocks, 3)


def test_zero_free_respects_labelling():
    blocks = build_blocks(16, 2, 1 / 16)  # blocks of length 8
    sigma = np.tile([1, 2], 8)
    sigma[[0, 1]] = 0
    rev = Labelling(np.arange(16)[::-1])
    assert is_zero_free_colouring(sigma, blocks, 2, rev)
    sigma[15] = 0
    assert not is_zero_free_colouring(sigma, blocks, 2, rev)


def test_balanced_examples():
    for r in (2, 3, 4):
        assert is_balanced(np.tile(np.arange(1, r + 1), 10), r, 1)
    assert not is_balanced(np.ones(10, dtype=int), 2, 2)


def test_balanced_random_proper_colouring_of_square_path():
    H = path_power(60, 2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        # random proper 3-colouring: each vertex picks a colour avoiding its two predecessors
        sigma = np.zeros(60, dtype=int)
        for v in range(60):
            used = {sigma[u] for u in range(max(0, v - 2), v)}
            sigma[v] = rng.choice([c for c in (1, 2, 3) if c not in used])
        assert is_proper_colouring(H, sigma)
        for x in (1, 1.5, 2, 3):
            assert is_balanced(sigma, 3, x) == is_balanced_intervals(sigma.tolist(), 3, x)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4).flatmap(lambda r: st.tuples(
    st.just(r), st.lists(st.integers(0, r), min_size=1, max_size=40), st.sampled_from([0.5, 1, 1.5, 2, 3, 5]))))
def test_balance_verifiers_agree_with_oracle(data):
    r, tau, x = data
    expected = is_balanced_intervals(tau, r, x)
    assert is_balanced(tau, r, x) == expected
    assert is_balanced_bruteforce(tau, r, x) == expected


def test_even_out_examples():
    assert even_out_check([1, 2, 3], [3, 2, 1], 2)
    assert even_out_check([0, 2], [2, 0], 2)
    with pytest.raises(PreconditionError):
        even_out_check([3, 2, 1], [3, 2, 1], 2)
    with pytest.raises(PreconditionError):
        even_out_check([0, 5], [5, 0], 2)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6).flatmap(lambda r: st.tuples(
    st.integers(0, 30),
    st.lists(st.integers(0, 30), min_size=r, max_size=r),
    st.lists(st.integers(0, 30), min_size=r, max_size=r))))
def test_even_out_property(data):
    x, a, b = data
    c = sorted(min(v, min(a) + x) for v in a)
    cp = sorted((min(v, min(b) + x) for v in b), reverse=True)
    assert even_out_check(c, cp, x)


def _alternating_path(n):
    return path_power(n, 1), Labelling.identity(n), np.tile([1, 2], n // 2)


def test_switch_example_on_p20():
    H, L, sigma = _alternating_path(20)
    out = switch_colours(H, L, sigma, s=9, l=1, l_prime=2, beta=0.1)
    assert is_proper_colouring(H, out)
    window = np.arange(7, 12)  # 1-based vertices 8..12
    zeroed = window[sigma[window] == 1]
    assert (out[zeroed] == 0).all()
    assert (out == 0).sum() == len(zeroed)
    assert np.array_equal(out[:7], sigma[:7])
    beyond = np.arange(12, 20)
    assert np.array_equal(out[beyond], 3 - sigma[beyond])


def test_switch_with_equal_colours_only_zeroes():
    H, L, sigma = _alternating_path(20)
    out = switch_colours(H, L, sigma, s=9, l=1, l_prime=1, beta=0.1)
    diff = np.flatnonzero(out != sigma)
    assert (out[diff] == 0).all()
    assert set(diff.tolist()) <= set(range(7, 12))


def test_switch_rejects_zero_near_s():
    H, L, sigma = _alternating_path(20)
    sigma = sigma.copy()
    sigma[9] = 0
    with pytest.raises(ColouringError):
        switch_colours(H, L, sigma, s=9, l=1, l_prime=2, beta=0.1)


def test_block_permutation_identity_and_transposition():
    H, L, sigma = _alternating_path(48)
    blocks = build_blocks(48, 2, 1 / 24)  # length 16, w = 2
    same = apply_block_permutation(H, L, sigma, blocks, 1, [1, 2], 1 / 24)
    assert np.array_equal(same, sigma)
    out = apply_block_permutation(H, L, sigma, blocks, 1, [2, 1], 1 / 24)
    assert is_proper_colouring(H, out)
    assert np.array_equal(out[:16], sigma[:16])
    assert np.array_equal(out[32:], 3 - sigma[32:])
    zeros = np.flatnonzero(out == 0)
    assert len(zeros) > 0 and ((zeros >= 16) & (zeros < 32)).all()


def test_block_permutation_three_cycle():
    H = path_power(96, 2)
    L = Labelling.identity(96)
    sigma = np.tile([1, 2, 3], 32)
    beta = 2 / 96
    blocks = build_blocks(96, 3, beta)  # length 24
    perm = [2, 3, 1]
    out = apply_block_permutation(H, L, sigma, blocks, 1, perm, beta)
    assert is_proper_colouring(H, out)
    lut = np.array([0, 2, 3, 1])
    assert np.array_equal(out[48:], lut[sigma[48:]])
    assert np.array_equal(out[:24], sigma[:24])


def test_block_permutation_requires_zero_free_block():
    H, L, sigma = _alternating_path(48)
    sigma = sigma.copy()
    sigma[20] = 0
    blocks = build_blocks(48, 2, 1 / 24)
    with pytest.raises(ColouringError):
        apply_block_permutation(H, L, sigma, blocks, 1, [2, 1], 1 / 24)


def skewed_path_colouring(n, block_len, every):
    """Alternating 1,2 colouring where every ``every``-th block reads 1,0,1,0,..."""
    sigma = np.tile([1, 2], n // 2)
    for t in range(0, n // block_len, every):
        seg = slice(t * block_len, (t + 1) * block_len)
        sigma[seg] = np.where(np.arange(block_len) % 2 == 0, 1, 0)
        if (t + 1) * block_len < n and sigma[(t + 1) * block_len] == 1:
            sigma[(t + 1) * block_len - 1] = 2 if sigma[(t + 1) * block_len - 2] != 2 else 0
    return sigma


def test_balance_keeps_balanced_zero_free_input():
    H, L, sigma = _alternating_path(2400)
    out, rep = balance_colouring(H, L, sigma, 2, 10, 1 / 2400, return_report=True)
    assert np.count_nonzero(out != sigma) == np.count_nonzero(out == 0)
    assert rep.spread_trace[-1] <= 1


def test_balance_corrects_skewed_path_colouring():
    n, ell, beta = 2400, 10, 1 / 2400
    H = path_power(n, 1)
    L = Labelling.identity(n)
    blocks = build_blocks(n, 2, beta)
    sigma = skewed_path_colouring(n, blocks.length, 2 * ell)
    assert is_proper_colouring(H, sigma)
    assert is_zero_free_colouring(sigma, blocks, 2 * ell)
    before = colour_report(H, L, sigma, 2, beta, ell)
    out, rep = balance_colouring(H, L, sigma, 2, ell, beta, return_report=True)
    after = colour_report(H, L, out, 2, beta, ell)
    assert after["proper"] and after["zero_free"]
    assert is_balanced(out, 2, 6 * n / ell)
    counts = np.array(after["class_sizes"][1:])
    assert counts.max() - counts.min() < before["class_sizes"][1] - before["class_sizes"][2]


def test_balance_rejects_non_zero_free_input():
    H, L, sigma = _alternating_path(2400)
    sigma = sigma.copy()
    sigma[[0, 16]] = 0
    with pytest.raises(ColouringError):
        balance_colouring(H, L, sigma, 2, 10, 1 / 2400)


def test_balance_strict_beta_check():
    H, L, sigma = _alternating_path(2400)
    with pytest.raises(PreconditionError):
        balance_colouring(H, L, sigma, 2, 10, 1 / 1200)


def test_colour_along_labelling():
    H = random_bandwidth(200, 3, 0.6, seed=1)
    sigma = colour_along_labelling(H, Labelling.identity(200), 4)
    assert is_proper_colouring(H, sigma) and sigma.min() >= 1
    with pytest.raises(ColouringError):
        colour_along_labelling(complete(4), Labelling.identity(4), 3)
    assert colour_along_labelling(empty(3), Labelling.identity(3), 2).min() >= 1
