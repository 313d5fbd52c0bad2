"""
Attribute Authority: bootstraps the system, holds the master key and issues
per-user private keys for subsets of the attribute universe.

Directory layout::

    authority/
        pk.bin        public parameters   (CPPK container)
        mk.bin        master key          (CPMK container, mode 0600)
        universe.txt  one attribute per line
        users.tsv     user_id, attributes, key_fingerprint

Issuance is single-writer: callers must serialize bootstrap and issue_user_key.
"""

import hashlib
import logging
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import pandas as pd

import config
from access_policy import AttributeSet
from cpabe_core import (
    AttributeComponent,
    MasterKey,
    PrivateKey,
    PublicParams,
    keygen,
    setup,
)
from errors import (
    CorruptContainer,
    DuplicateUser,
    InvalidUniverse,
    SetupMissing,
    StorageError,
    UnknownAttribute,
    UsageError,
    VersionUnsupported,
)
from pairing_backend import (
    G1Element,
    G2Element,
    GroupContext,
    RandomSource,
    Scalar,
    TargetElement,
    group_setup,
    validate_attribute,
)
from wire import ByteReader, ByteWriter

logger = logging.getLogger(__name__)

REGISTRY_COLUMNS = ["user_id", "attributes", "key_fingerprint"]


class KeyKind(Enum):
    PUBLIC = b"CPPK"
    MASTER = b"CPMK"
    PRIVATE = b"CPSK"


@dataclass(frozen=True)
class AttributeUniverse:
    attributes: Tuple[str, ...]

    def __post_init__(self):
        if not self.attributes:
            raise InvalidUniverse("the attribute universe must not be empty")
        for attribute in self.attributes:
            validate_attribute(attribute)
        if len(set(self.attributes)) != len(self.attributes):
            raise InvalidUniverse("the attribute universe contains duplicates")

    @classmethod
    def of(cls, attributes: Iterable[str]) -> "AttributeUniverse":
        return cls(tuple(attributes))

    @classmethod
    def parse(cls, text: str) -> "AttributeUniverse":
        return cls.of(item.strip() for item in text.split(",") if item.strip())

    def __contains__(self, attribute: str) -> bool:
        return attribute in self.attributes


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    attrs: AttributeSet
    key_fingerprint: str


@dataclass(frozen=True)
class KeyContainer:
    kind: KeyKind
    version: int
    payload: bytes

    def to_bytes(self) -> bytes:
        return ByteWriter().raw(self.kind.value).u8(self.version).raw(self.payload).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeyContainer":
        reader = ByteReader(data)
        magic = reader.raw(4)
        try:
            kind = KeyKind(magic)
        except ValueError as exc:
            raise CorruptContainer(f"unknown key container magic {magic!r}") from exc
        version = reader.u8()
        if version != config.FORMAT_VERSION:
            raise VersionUnsupported(f"key container version {version} is not supported")
        payload = reader.raw(reader.remaining)
        if not payload:
            raise CorruptContainer("empty key container payload")
        return cls(kind=kind, version=version, payload=payload)

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# key encodings

def _expect_kind(container: KeyContainer, kind: KeyKind):
    if container.kind is not kind:
        raise CorruptContainer(f"expected a {kind.name.lower()} key, found {container.kind.name.lower()}")


def encode_public(pk: PublicParams) -> KeyContainer:
    payload = (
        ByteWriter()
        .text16(pk.ctx.group_id)
        .blob16(pk.h.to_bytes())
        .blob16(pk.e_gg_alpha.to_bytes())
        .getvalue()
    )
    return KeyContainer(KeyKind.PUBLIC, config.FORMAT_VERSION, payload)


def decode_public(container: KeyContainer, ctx: Optional[GroupContext] = None) -> PublicParams:
    _expect_kind(container, KeyKind.PUBLIC)
    ctx = ctx or group_setup()
    reader = ByteReader(container.payload)
    group_id = reader.text16()
    if group_id != ctx.group_id:
        raise CorruptContainer(f"public key is for group {group_id!r}, not {ctx.group_id!r}")
    h = G1Element.from_bytes(reader.blob16())
    e_gg_alpha = TargetElement.from_bytes(reader.blob16())
    reader.expect_end()
    return PublicParams(ctx=ctx, h=h, e_gg_alpha=e_gg_alpha)


def encode_master(mk: MasterKey) -> KeyContainer:
    payload = ByteWriter().blob16(mk.beta.to_bytes()).blob16(mk.g_alpha.to_bytes()).getvalue()
    return KeyContainer(KeyKind.MASTER, config.FORMAT_VERSION, payload)


def decode_master(container: KeyContainer) -> MasterKey:
    _expect_kind(container, KeyKind.MASTER)
    reader = ByteReader(container.payload)
    beta = Scalar.from_bytes(reader.blob16())
    g_alpha = G2Element.from_bytes(reader.blob16())
    reader.expect_end()
    if beta.is_zero():
        raise CorruptContainer("master key beta is zero")
    return MasterKey(beta=beta, g_alpha=g_alpha)


def encode_private(sk: PrivateKey) -> KeyContainer:
    writer = ByteWriter()
    names = sk.attrs.sorted()
    writer.u16(len(names))
    for name in names:
        writer.text16(name)
    writer.blob16(sk.d.to_bytes())
    for name in names:
        component = sk.components[name]
        writer.blob16(component.d_j.to_bytes()).blob16(component.d_j_prime.to_bytes())
    return KeyContainer(KeyKind.PRIVATE, config.FORMAT_VERSION, writer.getvalue())


def decode_private(container: KeyContainer) -> PrivateKey:
    _expect_kind(container, KeyKind.PRIVATE)
    reader = ByteReader(container.payload)
    names = [reader.text16() for _ in range(reader.u16())]
    if not names or len(set(names)) != len(names):
        raise CorruptContainer("private key attribute list is empty or repeats")
    try:
        attrs = AttributeSet(names)
    except UsageError as exc:
        raise CorruptContainer(f"invalid attribute in private key: {exc}") from exc
    d = G2Element.from_bytes(reader.blob16())
    components = {
        name: AttributeComponent(
            d_j=G2Element.from_bytes(reader.blob16()),
            d_j_prime=G1Element.from_bytes(reader.blob16()),
        )
        for name in names
    }
    reader.expect_end()
    return PrivateKey(attrs=attrs, d=d, components=components)


def write_key_file(path, container: KeyContainer, secret: bool = False):
    """Write a container, refusing to overwrite; secret files get mode 0600."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600 if secret else 0o644)
        with os.fdopen(fd, "wb") as handle:
            handle.write(container.to_bytes())
    except FileExistsError as exc:
        raise StorageError(f"refusing to overwrite {path}") from exc
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


def read_key_file(path) -> KeyContainer:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    return KeyContainer.from_bytes(data)


def load_public_key(path, ctx: Optional[GroupContext] = None) -> PublicParams:
    return decode_public(read_key_file(path), ctx)


def load_private_key(path) -> PrivateKey:
    return decode_private(read_key_file(path))


# ---------------------------------------------------------------------------

class AttributeAuthority:
    """File-backed Attribute Authority"""

    def __init__(self, directory: str = config.AUTHORITY_DIR):
        self.directory = Path(directory)
        self.pk_path = self.directory / "pk.bin"
        self.mk_path = self.directory / "mk.bin"
        self.universe_path = self.directory / "universe.txt"
        self.users_path = self.directory / "users.tsv"

    def is_bootstrapped(self) -> bool:
        return self.pk_path.exists() and self.mk_path.exists()

    def bootstrap(
        self, universe: AttributeUniverse, ctx: Optional[GroupContext] = None, rng: Optional[RandomSource] = None
    ) -> Tuple[PublicParams, MasterKey]:
        """Run setup, publish pk and keep mk secret; refuses an already used directory."""
        if self.pk_path.exists() or self.mk_path.exists():
            raise StorageError(f"authority already bootstrapped in {self.directory}")
        pk, mk = setup(ctx or group_setup(), rng)
        write_key_file(self.mk_path, encode_master(mk), secret=True)
        write_key_file(self.pk_path, encode_public(pk))
        try:
            self.universe_path.write_text("\n".join(universe.attributes) + "\n", encoding="utf-8")
            pd.DataFrame(columns=REGISTRY_COLUMNS).to_csv(self.users_path, sep="\t", index=False)
        except OSError as exc:
            raise StorageError(f"cannot write authority metadata: {exc}") from exc
        logger.info("authority bootstrapped in %s with %d attributes", self.directory, len(universe.attributes))
        return pk, mk

    def _require_setup(self):
        if not self.is_bootstrapped():
            raise SetupMissing(f"no authority found in {self.directory}; run setup first")

    def public_key(self, ctx: Optional[GroupContext] = None) -> PublicParams:
        self._require_setup()
        return load_public_key(self.pk_path, ctx)

    def master_key(self) -> MasterKey:
        self._require_setup()
        return decode_master(read_key_file(self.mk_path))

    def universe(self) -> AttributeUniverse:
        self._require_setup()
        try:
            lines = self.universe_path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise StorageError(f"cannot read {self.universe_path}: {exc}") from exc
        return AttributeUniverse.of(line.strip() for line in lines if line.strip())

    def users(self) -> List[UserRecord]:
        self._require_setup()
        try:
            df = pd.read_csv(self.users_path, sep="\t", dtype=str, keep_default_na=False)
        except (OSError, pd.errors.ParserError) as exc:
            raise StorageError(f"cannot read {self.users_path}: {exc}") from exc
        return [
            UserRecord(row["user_id"], AttributeSet.parse(row["attributes"]), row["key_fingerprint"])
            for _, row in df.iterrows()
        ]

    def find_user(self, user_id: str) -> Optional[UserRecord]:
        for record in self.users():
            if record.user_id == user_id:
                return record
        return None

    def issue_user_key(
        self, user_id: str, attrs, rng: Optional[RandomSource] = None
    ) -> Tuple[UserRecord, KeyContainer]:
        attrs = AttributeSet(attrs)
        universe = self.universe()
        unknown = sorted(a for a in attrs if a not in universe)
        if unknown:
            raise UnknownAttribute(f"attributes not in the universe: {', '.join(unknown)}")
        if self.find_user(user_id) is not None:
            raise DuplicateUser(f"user {user_id!r} already holds a key")

        sk = keygen(self.master_key(), self.public_key(), attrs, rng)
        container = encode_private(sk)
        record = UserRecord(user_id=user_id, attrs=attrs, key_fingerprint=container.fingerprint)
        row = pd.DataFrame(
            [[record.user_id, ",".join(attrs.sorted()), record.key_fingerprint]], columns=REGISTRY_COLUMNS
        )
        try:
            row.to_csv(self.users_path, sep="\t", index=False, header=False, mode="a")
        except OSError as exc:
            raise StorageError(f"cannot update {self.users_path}: {exc}") from exc
        logger.info("issued key for %s with %d attributes", user_id, len(attrs))
        return record, container
