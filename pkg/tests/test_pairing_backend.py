import random

import pytest
from py_ecc.bls.hash_to_curve import map_to_curve_G2
from py_ecc.optimized_bls12_381 import FQ2, curve_order

from conftest import OFF_SUBGROUP_G1
from errors import (
    InvalidAttributeToken,
    InvalidGroupElement,
    RandomnessUnavailable,
    UnsupportedSecurityLevel,
)
from pairing_backend import (
    G1_BYTES,
    G2_BYTES,
    GT_BYTES,
    G1Element,
    G2Element,
    Scalar,
    TargetElement,
    group_setup,
    hash_to_group,
    pair,
    random_nonzero_scalar,
    random_scalar,
    validate_attribute,
)


def test_group_setup_is_cached_and_typed(ctx):
    assert group_setup(128) is ctx
    assert ctx.group_id == "BLS12-381"
    assert ctx.order == curve_order
    assert ctx.g == (ctx.g1, ctx.g2)


def test_unsupported_security_level():
    with pytest.raises(UnsupportedSecurityLevel):
        group_setup(80)


def test_scalar_arithmetic():
    a = Scalar.of(7)
    assert (a * a.inverse()).value == 1
    assert (a - 9).value == curve_order - 2
    assert (-a + 7).is_zero()
    assert (Scalar.of(3) / 3).value == 1
    with pytest.raises(ZeroDivisionError):
        Scalar(0).inverse()


def test_scalar_encoding():
    assert Scalar.from_bytes(Scalar.of(5).to_bytes()) == Scalar.of(5)
    with pytest.raises(InvalidGroupElement):
        Scalar.from_bytes(curve_order.to_bytes(32, "big"))
    with pytest.raises(InvalidGroupElement):
        Scalar.from_bytes(b"\x01" * 31)


def test_bilinearity(ctx):
    a, b = Scalar.of(6), Scalar.of(35)
    assert pair(ctx.g1 ** a, ctx.g2 ** b) == ctx.gt ** (a * b)


def test_pair_argument_order(ctx):
    with pytest.raises(TypeError):
        pair(ctx.g2, ctx.g1)


def test_group_operations(ctx):
    x = ctx.g1 ** 5
    assert x * ctx.g1 == ctx.g1 ** 6
    assert x / x == ctx.g1 ** 0
    assert (ctx.g1 ** 0).is_identity()
    assert ctx.g1 ** curve_order == ctx.g1 ** 0
    with pytest.raises(TypeError):
        ctx.g1 * ctx.g2
    t = ctx.gt ** 3
    assert (t / t).is_identity()
    assert t * ctx.gt == ctx.gt ** 4


def test_encoding_sizes_and_round_trip(ctx):
    p, q, t = ctx.g1 ** 11, ctx.g2 ** 13, ctx.gt ** 17
    assert len(p.to_bytes()) == G1_BYTES
    assert len(q.to_bytes()) == G2_BYTES
    assert len(t.to_bytes()) == GT_BYTES
    assert G1Element.from_bytes(p.to_bytes()) == p
    assert G2Element.from_bytes(q.to_bytes()) == q
    assert TargetElement.from_bytes(t.to_bytes()) == t


def test_decoding_rejects_bad_input(ctx):
    with pytest.raises(InvalidGroupElement):
        G1Element.from_bytes(ctx.g1.to_bytes()[:-1])
    without_compression_flag = bytes([ctx.g1.to_bytes()[0] & 0x7F]) + ctx.g1.to_bytes()[1:]
    with pytest.raises(InvalidGroupElement):
        G1Element.from_bytes(without_compression_flag)
    with pytest.raises(InvalidGroupElement):
        TargetElement.from_bytes(bytes(GT_BYTES))
    with pytest.raises(InvalidGroupElement):
        TargetElement.from_bytes(b"\xff" * GT_BYTES)


def test_out_of_subgroup_points_rejected():
    with pytest.raises(InvalidGroupElement):
        G1Element.from_bytes(OFF_SUBGROUP_G1)
    # a curve point straight from the map, before cofactor clearing
    raw = G2Element(map_to_curve_G2(FQ2([3, 5])))
    assert not raw.in_subgroup()
    with pytest.raises(InvalidGroupElement):
        G2Element.from_bytes(raw.to_bytes())


def test_hash_to_group(ctx):
    h = hash_to_group(ctx, "doctor")
    assert h == hash_to_group(ctx, "doctor")
    assert h != hash_to_group(ctx, "nurse")
    assert h.in_subgroup()
    with pytest.raises(InvalidAttributeToken):
        hash_to_group(ctx, "not valid")


def test_random_scalars(ctx):
    zeros = iter([0, 0, 9])
    assert random_nonzero_scalar(ctx, lambda n: next(zeros)) == Scalar.of(9)
    assert 0 <= random_scalar(ctx).value < curve_order

    def broken(n):
        raise OSError("no entropy")

    with pytest.raises(RandomnessUnavailable):
        random_scalar(ctx, broken)


@pytest.mark.parametrize("seed", range(3))
def test_bilinearity_random_exponents(ctx, seed):
    rng = random.Random(seed)
    a, b = Scalar.of(rng.randrange(1, curve_order)), Scalar.of(rng.randrange(1, curve_order))
    assert pair(ctx.g1 ** a, ctx.g2 ** b) == ctx.gt ** (a * b)
    assert pair(ctx.g1 ** a, ctx.g2) == pair(ctx.g1, ctx.g2 ** a)


@pytest.mark.slow
def test_bilinearity_many_exponents(ctx):
    rng = random.Random(2024)
    for _ in range(25):
        a, b = rng.randrange(curve_order), rng.randrange(curve_order)
        assert pair(ctx.g1 ** a, ctx.g2 ** b) == ctx.gt ** (a * b)


def test_encoding_round_trip_random_elements(ctx):
    rng = random.Random(11)
    for _ in range(40):
        k = rng.randrange(curve_order)
        p, q = ctx.g1 ** k, ctx.g2 ** k
        assert G1Element.from_bytes(p.to_bytes()) == p
        assert G2Element.from_bytes(q.to_bytes()) == q
        assert Scalar.from_bytes(Scalar.of(k).to_bytes()) == Scalar.of(k)
    for _ in range(5):
        t = ctx.gt ** rng.randrange(curve_order)
        assert TargetElement.from_bytes(t.to_bytes()) == t


def test_random_scalars_in_range_and_distinct(ctx):
    draws = [random_scalar(ctx).value for _ in range(10_000)]
    assert all(0 <= d < curve_order for d in draws)
    assert len(set(draws)) == len(draws)


@pytest.mark.parametrize("word", ["and", "or", "of", "AND", "Or", "oF"])
def test_keywords_are_not_attributes(ctx, word):
    with pytest.raises(InvalidAttributeToken):
        validate_attribute(word)
    with pytest.raises(InvalidAttributeToken):
        hash_to_group(ctx, word)
    assert validate_attribute(word + "_x") == word + "_x"
