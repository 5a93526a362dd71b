import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ref_f
from psclf.channel import noise_variance
from psclf.polar_code import (PartitionSpec, PolarCode, bit_channel_means, construct_info_set,
                              encode, extract_message, insert_message, load_info_set,
                              polar_transform, save_info_set)


def kron_matrix(N):
    G = np.array([[1]], dtype=np.uint8)
    T = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    while G.shape[0] < N:
        G = np.kron(G, T)
    return G


def test_construct_trivial_cases():
    assert list(construct_info_set(2, 1, 0.0)) == [1]
    assert list(construct_info_set(2, 1, 5.0)) == [1]
    assert list(construct_info_set(8, 8, 2.0)) == list(range(8))


def test_construct_rejects_bad_sizes():
    with pytest.raises(ValueError):
        construct_info_set(8, 9, 2.0)
    with pytest.raises(ValueError):
        construct_info_set(8, 0, 2.0)
    with pytest.raises(ValueError):
        construct_info_set(12, 4, 2.0)


def test_construct_n8_matches_genie_sc_monte_carlo():
    # oracle: per-bit error rates of genie-aided SC on the all-zero codeword
    N, K = 8, 4
    info = construct_info_set(N, K, 2.0)
    assert list(info) == [3, 5, 6, 7]
    rng = np.random.default_rng(3)
    sigma2 = noise_variance(2.0, K / N)
    y = 1.0 + rng.normal(0, np.sqrt(sigma2), (200_000, N))
    llr = 2 * y / sigma2

    def leaves(a):
        if a.shape[1] == 1:
            return [a[:, 0]]
        h = a.shape[1] // 2
        lo, hi = a[:, :h], a[:, h:]
        return leaves(ref_f(lo, hi)) + leaves(hi + lo)

    err = np.array([(x < 0).mean() for x in leaves(llr)])
    assert sorted(np.argsort(err, kind="stable")[:K]) == [3, 5, 6, 7]


def test_bit_channel_means_polarise():
    m = bit_channel_means(1024, 2.0, 0.5)
    assert m.size == 1024
    assert m[0] < m[-1]
    assert np.all(np.isfinite(m))
    # total capacity proxy: the last channel carries the sum of all N copies
    assert m[-1] == pytest.approx(1024 * 2 / noise_variance(2.0, 0.5))


def test_encode_examples():
    code = PolarCode(2, 1, 0, np.array([1]))
    assert list(encode(np.array([0, 1]), code)) == [1, 1]
    assert list(polar_transform(np.zeros(16, dtype=np.uint8))) == [0] * 16


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.data())
def test_transform_matches_kronecker_matrix_and_is_involution(n, data):
    N = 1 << n
    bits = data.draw(st.lists(st.integers(0, 1), min_size=N, max_size=N))
    u = np.array(bits, dtype=np.uint8)
    x = polar_transform(u)
    if N <= 256:
        assert np.array_equal(x, (u.astype(int) @ kron_matrix(N)) % 2)
    assert np.array_equal(polar_transform(x), u)


def test_transform_batch():
    rng = np.random.default_rng(0)
    U = rng.integers(0, 2, (5, 64), dtype=np.uint8)
    X = polar_transform(U)
    for u, x in zip(U, X):
        assert np.array_equal(polar_transform(u), x)


def test_insert_extract():
    code = PolarCode(8, 4, 0, np.array([3, 5, 6, 7]))
    u = insert_message(np.array([1, 0, 1, 1]), code)
    assert list(u) == [0, 0, 0, 1, 0, 0, 1, 1]
    assert list(extract_message(u, code)) == [1, 0, 1, 1]
    full = PolarCode(8, 8, 0, np.arange(8))
    m = np.array([1, 0, 0, 1, 1, 1, 0, 1])
    assert np.array_equal(insert_message(m, full), m)
    with pytest.raises(ValueError):
        insert_message(np.zeros(3), code)


def test_code_validation():
    with pytest.raises(ValueError):
        PolarCode(8, 2, 1, np.array([5, 3, 7]))
    with pytest.raises(ValueError):
        PolarCode(8, 2, 0, np.array([3, 8]))
    with pytest.raises(ValueError):
        PolarCode(6, 2, 0, np.array([3, 5]))
    code = PolarCode.construct(64, 24, 8, 2.0)
    assert code.frozen_set.size + code.info_set.size == 64
    assert not code.frozen_mask[code.info_set].any()
    assert code.rate == 24 / 64


def test_info_set_file_round_trip(tmp_path, code128):
    path = tmp_path / "info.txt"
    save_info_set(path, code128)
    assert load_info_set(path) == code128
    path.write_text("garbage\n1\n")
    with pytest.raises(ValueError):
        load_info_set(path)


def test_partition_spec(code1024):
    spec = PartitionSpec(code1024, (410, 590, 708, 1023), (8, 8, 8, 8))
    assert sum(spec.s) == 544
    assert spec.S[-1] == 544
    assert spec.payload_lengths == tuple(s - 8 for s in spec.s)
    assert spec.bounds(0) == (0, 410)
    assert spec.bounds(1) == (411, 590)
    # every boundary counts the information indices at or below it
    for m, S in zip(spec.mu, spec.S):
        assert S == int((code1024.info_set <= m).sum())
    single = PartitionSpec.single(code1024)
    assert single.P == 1 and single.s == (544,)


@pytest.mark.parametrize("mu, crc", [
    ((410, 590, 708), (8, 8, 16)),          # does not end at N-1
    ((590, 410, 708, 1023), (8, 8, 8, 8)),  # not increasing
    ((410, 590, 708, 1023), (8, 8, 8, 7)),  # CRC total mismatch
    ((1, 590, 708, 1023), (8, 8, 8, 8)),    # empty first partition
])
def test_partition_spec_rejects(code1024, mu, crc):
    with pytest.raises(ValueError):
        PartitionSpec(code1024, mu, crc)
