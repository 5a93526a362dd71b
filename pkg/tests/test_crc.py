import numpy as np
import pytest

from psclf.crc import (DEFAULT_GENERATORS, CrcSpec, allocate_crc_structure, build_message,
                       crc_append, crc_check, crc_check_batch, crc_specs_for,
                       parse_crc_structure, partition_crc_flags)
from psclf.polar_code import PartitionSpec

LENGTHS = sorted(DEFAULT_GENERATORS)


def int_remainder(bits, length, poly):
    """Oracle: polynomial long division with Python integers."""
    g = (1 << length) | poly
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    v <<= length
    while v.bit_length() > length:
        v ^= g << (v.bit_length() - length - 1)
    return [(v >> k) & 1 for k in range(length - 1, -1, -1)]


@pytest.mark.parametrize("length", LENGTHS)
def test_append_matches_integer_division(length):
    spec = CrcSpec(length)
    rng = np.random.default_rng(length)
    for size in (1, 2, 7, 33, 100):
        payload = rng.integers(0, 2, size)
        out = crc_append(payload, spec)
        assert list(out[size:]) == int_remainder(payload, length, spec.poly)


def test_crc8_single_one_bit():
    # x^8 mod (x^8 + x^2 + x + 1) = x^2 + x + 1
    out = crc_append([1], CrcSpec(8))
    assert list(out) == [1, 0, 0, 0, 0, 0, 1, 1, 1]


@pytest.mark.parametrize("length", LENGTHS)
def test_zero_payload_and_round_trip(length):
    spec = CrcSpec(length)
    assert not crc_append(np.zeros(20, dtype=np.uint8), spec).any()
    assert crc_check(np.zeros(length + 5, dtype=np.uint8), spec)
    rng = np.random.default_rng(1)
    seg = crc_append(rng.integers(0, 2, 50), spec)
    assert crc_check(seg, spec)
    for k in range(seg.size):
        bad = seg.copy()
        bad[k] ^= 1
        assert not crc_check(bad, spec)


def test_check_rejects_short_segment():
    with pytest.raises(ValueError):
        crc_check(np.zeros(8, dtype=np.uint8), CrcSpec(8))


def test_spec_validation():
    with pytest.raises(ValueError):
        CrcSpec(5)
    with pytest.raises(ValueError):
        CrcSpec(4, 0x1F)
    assert list(CrcSpec(3).generator) == [1, 0, 1, 1]
    assert CrcSpec(6, 0x03).poly == 0x03


@pytest.mark.parametrize("length", LENGTHS)
def test_batch_agrees_with_scalar(length):
    spec = CrcSpec(length)
    rng = np.random.default_rng(5)
    good = np.array([crc_append(rng.integers(0, 2, 40), spec) for _ in range(20)])
    segs = good.copy()
    segs[::2, rng.integers(0, segs.shape[1])] ^= 1
    expect = [crc_check(s, spec) for s in segs]
    assert list(crc_check_batch(segs, spec)) == expect


@pytest.mark.parametrize("length", [3, 7, 8])
def test_false_positive_rate_is_two_to_minus_c(length):
    spec = CrcSpec(length)
    rng = np.random.default_rng(11)
    segs = rng.integers(0, 2, (200_000, 60), dtype=np.uint8)
    rate = crc_check_batch(segs, spec).mean()
    expect = 2.0 ** -length
    assert abs(rate - expect) < 5 * np.sqrt(expect / segs.shape[0])


def test_parse_structure():
    assert parse_crc_structure("7,7,7,11") == (7, 7, 7, 11)
    assert parse_crc_structure("32") == (32,)
    for bad in ("", "a,b", "7,-1"):
        with pytest.raises(ValueError):
            parse_crc_structure(bad)


def test_allocation_examples():
    assert allocate_crc_structure(32, 4, [0.09, 0.14, 0.21, 0.56], 7) == (7, 7, 7, 11)
    assert allocate_crc_structure(32, 4, [0.53, 0.23, 0.17, 0.07], 7) == (11, 7, 7, 7)
    assert allocate_crc_structure(32, 1, [1.0], 7) == (32,)
    assert allocate_crc_structure(32, 4, [0.25] * 4, 8) == (8, 8, 8, 8)
    # ties go to the last most error-prone partition
    assert allocate_crc_structure(32, 4, [0.25] * 4, 7) == (7, 7, 7, 11)


def test_allocation_errors():
    with pytest.raises(ValueError):
        allocate_crc_structure(20, 4, [0.25] * 4, 7)
    with pytest.raises(ValueError):
        allocate_crc_structure(32, 4, [0.2] * 4, 7)
    with pytest.raises(ValueError):
        allocate_crc_structure(32, 3, [0.25] * 4, 7)


def test_partitioned_message_layout(code1024):
    part = PartitionSpec(code1024, (410, 590, 708, 1023), (7, 7, 7, 11))
    specs = crc_specs_for(part)
    rng = np.random.default_rng(2)
    payload = rng.integers(0, 2, sum(part.payload_lengths), dtype=np.uint8)
    msg = build_message(payload, part, specs)
    assert msg.size == 544
    start = 0
    for p in range(4):
        seg = msg[part.message_slice(p)]
        k = part.payload_lengths[p]
        assert np.array_equal(seg[:k], payload[start:start + k])
        assert crc_check(seg, specs[p])
        start += k
    flags = [partition_crc_flags(msg[None, :], part, specs, p)[0] for p in range(4)]
    assert all(flags)
    bad = msg.copy()
    bad[part.message_slice(2).start] ^= 1
    assert [partition_crc_flags(bad[None, :], part, specs, p)[0] for p in range(4)] == \
        [True, True, False, True]
