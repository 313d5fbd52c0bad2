"""
KEM/DEM envelope around the CP-ABE core.

The ABE layer encapsulates a random target-group element; HKDF-SHA256 with the
tag CPABE-DEM-V1 turns that element into a 32-byte data-encryption key (DEK).
Payloads are encrypted with AES-256-CBC and PKCS7 padding in one of two modes:

    DET  fixed all-zero IV, so equal plaintexts under one DEK give equal ciphertexts
    RND  fresh random IV per encryption

Wire formats (big-endian):

    FieldCiphertext  'CPFC' | ver u8 | mode u8 | iv[16] | dek_id[16] | len u32 | body
    WrappedDek       'CPWK' | ver u8 | dek_id[16] | policy (u16 len) |
                     count u16 | components (u16 len each) | digest[32]
    SealedPayload    'CPEF' | ver u8 | WrappedDek (u32 len) | FieldCiphertext (u32 len)

CBC without authentication is malleable and padding errors are observable;
the WrappedDek digest protects the key, not the payload.
"""

import hashlib
import os
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

from cryptography.hazmat.primitives import hashes, padding
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

import config
from access_policy import AccessTree, parse_policy
from cpabe_core import AbeCiphertext, LeafComponent, PrivateKey, PublicParams, decrypt, encrypt
from errors import (
    BadPadding,
    CorruptContainer,
    CpabeError,
    DekMismatch,
    IntegrityFailure,
    RandomnessUnavailable,
    VersionUnsupported,
)
from pairing_backend import (
    G1Element,
    G2Element,
    RandomSource,
    TargetElement,
    random_nonzero_scalar,
)
from wire import ByteReader, ByteWriter

KEY_BYTES = 32
BLOCK_BYTES = 16
DEK_ID_BYTES = 16
DIGEST_BYTES = 32
ZERO_IV = bytes(BLOCK_BYTES)

FIELD_MAGIC = b"CPFC"
WRAPPED_MAGIC = b"CPWK"
SEALED_MAGIC = b"CPEF"

IvSource = Callable[[int], bytes]


class CipherMode(Enum):
    DET = 0
    RND = 1


@dataclass(frozen=True)
class Dek:
    key_bytes: bytes = field(repr=False)
    dek_id: bytes

    def __post_init__(self):
        if len(self.key_bytes) != KEY_BYTES:
            raise ValueError(f"DEK must be {KEY_BYTES} bytes")
        if len(self.dek_id) != DEK_ID_BYTES:
            raise ValueError(f"dek_id must be {DEK_ID_BYTES} bytes")

    @classmethod
    def generate(cls) -> "Dek":
        """A free-standing random DEK (used by the symmetric-only baseline)."""
        return cls(key_bytes=_random_bytes(KEY_BYTES), dek_id=new_dek_id())

    @property
    def digest(self) -> bytes:
        return hashlib.sha256(self.key_bytes).digest()


def new_dek_id() -> bytes:
    return uuid.uuid4().bytes


def _random_bytes(size: int, source: Optional[IvSource] = None) -> bytes:
    try:
        return (source or os.urandom)(size)
    except (OSError, NotImplementedError) as exc:
        raise RandomnessUnavailable(f"entropy source failed: {exc}") from exc


def _check_header(reader: ByteReader, magic: bytes):
    reader.expect(magic)
    version = reader.u8()
    if version != config.FORMAT_VERSION:
        raise VersionUnsupported(f"{magic.decode()} version {version} is not supported")


# ---------------------------------------------------------------------------
# ABE ciphertext components

def ciphertext_components(ct: AbeCiphertext) -> List[bytes]:
    """C~, C, then (C_y, C_y') for each leaf left to right."""
    parts = [ct.c_tilde.to_bytes(), ct.c.to_bytes()]
    for leaf_id in ct.tree.leaves():
        leaf = ct.components[leaf_id]
        parts.extend([leaf.c_y.to_bytes(), leaf.c_y_prime.to_bytes()])
    return parts


def ciphertext_from_components(tree: AccessTree, parts: List[bytes]) -> AbeCiphertext:
    leaves = tree.leaves()
    if len(parts) != 2 + 2 * len(leaves):
        raise CorruptContainer(
            f"expected {2 + 2 * len(leaves)} ciphertext components, found {len(parts)}"
        )
    components = {
        leaf_id: LeafComponent(
            c_y=G1Element.from_bytes(parts[2 + 2 * i]),
            c_y_prime=G2Element.from_bytes(parts[3 + 2 * i]),
        )
        for i, leaf_id in enumerate(leaves)
    }
    return AbeCiphertext(
        tree=tree,
        c_tilde=TargetElement.from_bytes(parts[0]),
        c=G1Element.from_bytes(parts[1]),
        components=components,
    )


# ---------------------------------------------------------------------------
# key encapsulation

@dataclass(frozen=True)
class WrappedDek:
    abe_ct: AbeCiphertext
    bound_dek_digest: bytes
    dek_id: bytes

    def to_bytes(self) -> bytes:
        writer = ByteWriter().raw(WRAPPED_MAGIC).u8(config.FORMAT_VERSION).raw(self.dek_id)
        writer.text16(self.abe_ct.tree.to_text())
        parts = ciphertext_components(self.abe_ct)
        writer.u16(len(parts))
        for part in parts:
            writer.blob16(part)
        return writer.raw(self.bound_dek_digest).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "WrappedDek":
        reader = ByteReader(data)
        _check_header(reader, WRAPPED_MAGIC)
        dek_id = reader.raw(DEK_ID_BYTES)
        policy_text = reader.text16()
        try:
            tree = parse_policy(policy_text)
        except CpabeError as exc:
            raise CorruptContainer(f"unparseable policy in wrapped key: {exc}") from exc
        parts = [reader.blob16() for _ in range(reader.u16())]
        digest = reader.raw(DIGEST_BYTES)
        reader.expect_end()
        return cls(abe_ct=ciphertext_from_components(tree, parts), bound_dek_digest=digest, dek_id=dek_id)


def _derive_key(secret: TargetElement) -> bytes:
    hkdf = HKDF(algorithm=hashes.SHA256(), length=KEY_BYTES, salt=None, info=config.DEM_KDF_TAG)
    return hkdf.derive(secret.to_bytes())


def wrap_dek(
    pk: PublicParams,
    tree: AccessTree,
    dek: Optional[Dek] = None,
    rng: Optional[RandomSource] = None,
) -> Tuple[WrappedDek, Dek]:
    """Encapsulate a fresh DEK under ``tree``.

    The key bytes always come from the encapsulated element; a passed-in
    ``dek`` only lends its dek_id.
    """
    secret = pk.e_gg_alpha ** random_nonzero_scalar(pk.ctx, rng)
    derived = Dek(key_bytes=_derive_key(secret), dek_id=dek.dek_id if dek else new_dek_id())
    wrapped = WrappedDek(
        abe_ct=encrypt(pk, tree, secret, rng),
        bound_dek_digest=derived.digest,
        dek_id=derived.dek_id,
    )
    return wrapped, derived


def unwrap_dek(pk: PublicParams, wrapped: WrappedDek, sk: PrivateKey) -> Dek:
    secret = decrypt(pk, wrapped.abe_ct, sk)
    dek = Dek(key_bytes=_derive_key(secret), dek_id=wrapped.dek_id)
    if dek.digest != wrapped.bound_dek_digest:
        raise IntegrityFailure("unwrapped key does not match the bound digest")
    return dek


# ---------------------------------------------------------------------------
# symmetric layer

@dataclass(frozen=True)
class FieldCiphertext:
    mode: CipherMode
    iv: bytes
    body: bytes
    dek_id: bytes

    def to_bytes(self) -> bytes:
        return (
            ByteWriter()
            .raw(FIELD_MAGIC)
            .u8(config.FORMAT_VERSION)
            .u8(self.mode.value)
            .raw(self.iv)
            .raw(self.dek_id)
            .blob32(self.body)
            .getvalue()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "FieldCiphertext":
        reader = ByteReader(data)
        _check_header(reader, FIELD_MAGIC)
        try:
            mode = CipherMode(reader.u8())
        except ValueError as exc:
            raise CorruptContainer(f"unknown cipher mode: {exc}") from exc
        iv = reader.raw(BLOCK_BYTES)
        dek_id = reader.raw(DEK_ID_BYTES)
        body = reader.blob32()
        reader.expect_end()
        if not body or len(body) % BLOCK_BYTES:
            raise CorruptContainer("ciphertext body must be a positive multiple of 16 bytes")
        if mode is CipherMode.DET and iv != ZERO_IV:
            raise CorruptContainer("DET ciphertext must carry the zero IV")
        return cls(mode=mode, iv=iv, body=body, dek_id=dek_id)


def sym_encrypt(
    dek: Dek, plaintext: bytes, mode: CipherMode, iv_source: Optional[IvSource] = None
) -> FieldCiphertext:
    iv = ZERO_IV if mode is CipherMode.DET else _random_bytes(BLOCK_BYTES, iv_source)
    padder = padding.PKCS7(128).padder()
    padded = padder.update(plaintext) + padder.finalize()
    encryptor = Cipher(algorithms.AES(dek.key_bytes), modes.CBC(iv)).encryptor()
    body = encryptor.update(padded) + encryptor.finalize()
    return FieldCiphertext(mode=mode, iv=iv, body=body, dek_id=dek.dek_id)


def sym_decrypt(dek: Dek, fc: FieldCiphertext) -> bytes:
    if fc.dek_id != dek.dek_id:
        raise DekMismatch("ciphertext was produced under a different DEK")
    decryptor = Cipher(algorithms.AES(dek.key_bytes), modes.CBC(fc.iv)).decryptor()
    padded = decryptor.update(fc.body) + decryptor.finalize()
    unpadder = padding.PKCS7(128).unpadder()
    try:
        return unpadder.update(padded) + unpadder.finalize()
    except ValueError as exc:
        raise BadPadding("invalid padding: corrupt ciphertext or wrong key") from exc


# ---------------------------------------------------------------------------
# sealed payloads (files)

@dataclass(frozen=True)
class SealedPayload:
    wrapped: WrappedDek
    body: FieldCiphertext

    def to_bytes(self) -> bytes:
        return (
            ByteWriter()
            .raw(SEALED_MAGIC)
            .u8(config.FORMAT_VERSION)
            .blob32(self.wrapped.to_bytes())
            .blob32(self.body.to_bytes())
            .getvalue()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SealedPayload":
        reader = ByteReader(data)
        _check_header(reader, SEALED_MAGIC)
        wrapped = WrappedDek.from_bytes(reader.blob32())
        body = FieldCiphertext.from_bytes(reader.blob32())
        reader.expect_end()
        return cls(wrapped=wrapped, body=body)


def seal(
    pk: PublicParams,
    tree: AccessTree,
    payload: bytes,
    mode: CipherMode = CipherMode.RND,
    rng: Optional[RandomSource] = None,
) -> SealedPayload:
    wrapped, dek = wrap_dek(pk, tree, rng=rng)
    return SealedPayload(wrapped=wrapped, body=sym_encrypt(dek, payload, mode))


def open_sealed(pk: PublicParams, sealed: SealedPayload, sk: PrivateKey) -> bytes:
    return sym_decrypt(unwrap_dek(pk, sealed.wrapped, sk), sealed.body)
