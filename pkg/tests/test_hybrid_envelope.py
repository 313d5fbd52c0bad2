import itertools
import random
from dataclasses import replace

import pytest

import config
from access_policy import parse_policy
from errors import (
    BadPadding,
    CorruptContainer,
    DekMismatch,
    IntegrityFailure,
    PolicyNotSatisfied,
    VersionUnsupported,
)
from hybrid_envelope import (
    ZERO_IV,
    CipherMode,
    Dek,
    FieldCiphertext,
    SealedPayload,
    WrappedDek,
    open_sealed,
    seal,
    sym_decrypt,
    sym_encrypt,
    unwrap_dek,
    wrap_dek,
)
from wire import ByteWriter


@pytest.fixture(scope="module")
def wrapped(pk):
    return wrap_dek(pk, parse_policy("analyst or admin"))


def test_wrap_unwrap(pk, key_for, wrapped):
    wrapped_dek, dek = wrapped
    assert len(dek.key_bytes) == 32
    assert wrapped_dek.dek_id == dek.dek_id
    assert wrapped_dek.bound_dek_digest == dek.digest
    assert unwrap_dek(pk, wrapped_dek, key_for("analyst")) == dek


def test_wrap_keeps_requested_dek_id(pk):
    existing = Dek.generate()
    wrapped_dek, dek = wrap_dek(pk, parse_policy("a"), dek=existing)
    assert dek.dek_id == existing.dek_id
    assert dek.key_bytes != existing.key_bytes


def test_unwrap_checks_digest(pk, key_for, wrapped):
    tampered = replace(wrapped[0], bound_dek_digest=bytes(32))
    with pytest.raises(IntegrityFailure):
        unwrap_dek(pk, tampered, key_for("admin"))


def test_unwrap_requires_policy(pk, key_for, wrapped):
    with pytest.raises(PolicyNotSatisfied):
        unwrap_dek(pk, wrapped[0], key_for("auditor"))


def test_wrapped_dek_container(wrapped):
    data = wrapped[0].to_bytes()
    assert data[:4] == b"CPWK"
    parsed = WrappedDek.from_bytes(data)
    assert parsed.to_bytes() == data
    assert parsed.abe_ct.tree == wrapped[0].abe_ct.tree
    with pytest.raises(CorruptContainer):
        WrappedDek.from_bytes(data[:-1])
    with pytest.raises(VersionUnsupported):
        WrappedDek.from_bytes(data[:4] + b"\x02" + data[5:])


def test_det_is_deterministic_and_rnd_is_not():
    dek = Dek.generate()
    assert sym_encrypt(dek, b"Alice", CipherMode.DET) == sym_encrypt(dek, b"Alice", CipherMode.DET)
    det = sym_encrypt(dek, b"Alice", CipherMode.DET)
    assert det.iv == ZERO_IV
    first, second = (sym_encrypt(dek, b"Alice", CipherMode.RND) for _ in range(2))
    assert first.body != second.body
    for fc in (det, first, second):
        assert sym_decrypt(dek, fc) == b"Alice"


def test_det_equality_leakage_over_corpus():
    dek = Dek.generate()
    rng = random.Random(9)
    values = [str(rng.randint(0, 300)).encode() for _ in range(1000)]
    bodies = [sym_encrypt(dek, v, CipherMode.DET).body for v in values]
    for (v1, b1), (v2, b2) in itertools.combinations(zip(values[:300], bodies[:300]), 2):
        assert (v1 == v2) == (b1 == b2)
    assert len(set(bodies)) == len(set(values))


def test_rnd_encryptions_are_pairwise_distinct():
    dek = Dek.generate()
    bodies = {sym_encrypt(dek, b"same value", CipherMode.RND).to_bytes() for _ in range(1000)}
    assert len(bodies) == 1000


def test_empty_plaintext_pads_to_one_block():
    dek = Dek.generate()
    fc = sym_encrypt(dek, b"", CipherMode.RND)
    assert len(fc.body) == 16
    assert sym_decrypt(dek, fc) == b""


def test_wrong_dek_is_detected():
    fc = sym_encrypt(Dek.generate(), b"secret", CipherMode.RND)
    with pytest.raises(DekMismatch):
        sym_decrypt(Dek.generate(), fc)


def test_flipped_bit_breaks_padding():
    dek = Dek.generate()
    fc = sym_encrypt(dek, b"x" * 20, CipherMode.RND)
    body = bytearray(fc.body)
    # the last byte of block one masks the final padding byte of block two
    body[15] ^= 0x80
    with pytest.raises(BadPadding):
        sym_decrypt(dek, replace(fc, body=bytes(body)))


def test_field_ciphertext_container():
    fc = sym_encrypt(Dek.generate(), b"4111111111111111", CipherMode.DET)
    data = fc.to_bytes()
    assert data[:4] == b"CPFC"
    assert FieldCiphertext.from_bytes(data) == fc
    with pytest.raises(CorruptContainer):
        FieldCiphertext.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(VersionUnsupported):
        FieldCiphertext.from_bytes(data[:4] + b"\x09" + data[5:])
    with pytest.raises(CorruptContainer):
        FieldCiphertext.from_bytes(data[:6] + b"\x01" + data[7:])  # DET with a nonzero IV
    with pytest.raises(CorruptContainer):
        FieldCiphertext.from_bytes(data[:-1])
    with pytest.raises(CorruptContainer):
        FieldCiphertext.from_bytes(data + b"\x00")


def test_seal_and_open(pk, key_for):
    payload = bytes(range(256)) * 40
    sealed = seal(pk, parse_policy("a and b"), payload)
    data = sealed.to_bytes()
    assert data[:4] == b"CPEF"
    parsed = SealedPayload.from_bytes(data)
    assert parsed.to_bytes() == data
    assert open_sealed(pk, parsed, key_for("a", "b")) == payload
    with pytest.raises(PolicyNotSatisfied):
        open_sealed(pk, parsed, key_for("a"))


def test_tampered_blinded_element_fails_integrity(ctx, pk, key_for, wrapped):
    wrapped_dek, _ = wrapped
    abe_ct = replace(wrapped_dek.abe_ct, c_tilde=wrapped_dek.abe_ct.c_tilde * ctx.gt)
    with pytest.raises(IntegrityFailure):
        unwrap_dek(pk, replace(wrapped_dek, abe_ct=abe_ct), key_for("admin"))


def test_wraps_under_one_tree_are_independent(pk):
    tree = parse_policy("analyst or admin")
    (first, first_dek), (second, second_dek) = wrap_dek(pk, tree), wrap_dek(pk, tree)
    assert first.abe_ct.c_tilde != second.abe_ct.c_tilde
    assert first.abe_ct.c != second.abe_ct.c
    assert first_dek.key_bytes != second_dek.key_bytes


@pytest.mark.parametrize("mode", [CipherMode.DET, CipherMode.RND])
def test_random_payloads_round_trip(wrapped, mode):
    _, dek = wrapped
    rng = random.Random(2024)
    for _ in range(1000):
        plaintext = rng.randbytes(rng.randrange(0, 96))
        assert sym_decrypt(dek, sym_encrypt(dek, plaintext, mode)) == plaintext


def test_randomized_iv_is_never_zero(wrapped):
    _, dek = wrapped
    ivs = [sym_encrypt(dek, b"same value", CipherMode.RND).iv for _ in range(500)]
    assert ZERO_IV not in ivs
    assert len(set(ivs)) == len(ivs)


def test_deeply_nested_policy_is_corrupt_container(wrapped):
    wrapped_dek, _ = wrapped
    data = wrapped_dek.to_bytes()
    policy = wrapped_dek.abe_ct.tree.to_text().encode()
    tail = data[4 + 1 + 16 + 2 + len(policy):]
    deep = "(" * 200 + "analyst" + ")" * 200
    forged = ByteWriter().raw(b"CPWK").u8(config.FORMAT_VERSION).raw(wrapped_dek.dek_id).text16(deep).raw(tail)
    with pytest.raises(CorruptContainer):
        WrappedDek.from_bytes(forged.getvalue())
