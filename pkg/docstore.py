"""
File-backed document collections with per-field encryption.

Each encrypted field owns one DEK, wrapped under the field's policy and kept in
the collection header. Encryption and decryption happen on the client side;
the store itself only ever compares ciphertext bytes.

Store file ``<name>.cpdb``: the first line is a JSON header, every further line
one document. Encrypted values are base64 CPFC containers, plaintext values are
stored as-is. JSON is written with sorted keys and fixed separators so a
persist/load cycle reproduces the file byte for byte.
"""

import base64
import binascii
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

import config
from access_policy import parse_policy
from cpabe_core import PrivateKey, PublicParams
from errors import (
    CorruptContainer,
    CorruptStore,
    CryptoError,
    DuplicateField,
    InvalidFieldValue,
    NotDeterministicField,
    StorageError,
    UnknownField,
    UsageError,
    VersionUnsupported,
)
from hybrid_envelope import (
    CipherMode,
    Dek,
    FieldCiphertext,
    WrappedDek,
    sym_decrypt,
    sym_encrypt,
    unwrap_dek,
    wrap_dek,
)

logger = logging.getLogger(__name__)

STORE_FORMAT = "CPDS"
STORE_SUFFIX = ".cpdb"


class StorageMode(Enum):
    DET = "DET"
    RND = "RND"
    PLAINTEXT = "plaintext"

    @property
    def encrypted(self) -> bool:
        return self is not StorageMode.PLAINTEXT

    @property
    def cipher_mode(self) -> CipherMode:
        if self is StorageMode.DET:
            return CipherMode.DET
        if self is StorageMode.RND:
            return CipherMode.RND
        raise ValueError("plaintext fields have no cipher mode")

    @classmethod
    def parse(cls, text: str) -> "StorageMode":
        for mode in cls:
            if mode.value.lower() == text.strip().lower():
                return mode
        raise InvalidFieldValue(f"unknown storage mode {text!r}; expected DET, RND or plaintext")


@dataclass(frozen=True)
class FieldConfig:
    field_name: str
    mode: StorageMode
    policy_text: Optional[str] = None
    wrapped_dek: Optional[WrappedDek] = None

    def __post_init__(self):
        if self.mode.encrypted and (self.policy_text is None or self.wrapped_dek is None):
            raise ValueError(f"encrypted field {self.field_name!r} needs a policy and a wrapped DEK")
        if not self.mode.encrypted and self.wrapped_dek is not None:
            raise ValueError(f"plaintext field {self.field_name!r} cannot carry a wrapped DEK")


@dataclass(frozen=True)
class StoredDocument:
    """A document as the server holds it: FieldCiphertext or plaintext string per field."""

    doc_id: int
    fields: Mapping[str, Union[FieldCiphertext, str]]


@dataclass(frozen=True)
class OpaqueField:
    """Marker for a field the reader's key cannot decrypt."""

    ciphertext: FieldCiphertext

    def __str__(self):
        return "<encrypted>"


@dataclass(frozen=True)
class ReadDocument:
    doc_id: int
    fields: Mapping[str, Union[str, OpaqueField]]

    def readable(self) -> Dict[str, str]:
        return {k: v for k, v in self.fields.items() if not isinstance(v, OpaqueField)}


@dataclass
class Collection:
    name: str
    fields: Tuple[FieldConfig, ...]
    documents: List[StoredDocument] = field(default_factory=list)
    path: Optional[Path] = None

    def field_config(self, field_name: str) -> FieldConfig:
        for cfg in self.fields:
            if cfg.field_name == field_name:
                return cfg
        raise UnknownField(f"collection {self.name!r} has no field {field_name!r}")

    @property
    def field_names(self) -> List[str]:
        return [f.field_name for f in self.fields]

    @property
    def next_doc_id(self) -> int:
        return self.documents[-1].doc_id + 1 if self.documents else 1

    def __len__(self):
        return len(self.documents)


# Field DEKs a key could unwrap; None marks a field whose policy the key fails
FieldKeys = Dict[str, Optional[Dek]]


def canonical_value(value) -> str:
    """Integers become canonical decimal strings; strings pass through."""
    if isinstance(value, bool):
        raise InvalidFieldValue("boolean field values are not supported")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    raise InvalidFieldValue(f"unsupported field value type {type(value).__name__}")


# ---------------------------------------------------------------------------
# store_io

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text) -> bytes:
    if not isinstance(text, str):
        raise CorruptStore("expected base64 text")
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError) as exc:
        raise CorruptStore(f"invalid base64 payload: {exc}") from exc


def _header_body(name: str, fields: Sequence[FieldConfig]) -> dict:
    return {
        "format": STORE_FORMAT,
        "version": config.FORMAT_VERSION,
        "name": name,
        "fields": [
            {
                "name": f.field_name,
                "mode": f.mode.value,
                "policy": f.policy_text,
                "wrapped_dek": _b64(f.wrapped_dek.to_bytes()) if f.wrapped_dek else None,
            }
            for f in fields
        ],
    }


def _header_line(coll: Collection) -> str:
    body = _header_body(coll.name, coll.fields)
    body["header_digest"] = hashlib.sha256(_dumps(body).encode("ascii")).hexdigest()
    return _dumps(body)


def _document_line(doc: StoredDocument) -> str:
    fields = {
        name: value.to_bytes() if isinstance(value, FieldCiphertext) else value
        for name, value in doc.fields.items()
    }
    return _dumps({
        "doc_id": doc.doc_id,
        "fields": {k: _b64(v) if isinstance(v, bytes) else v for k, v in fields.items()},
    })


def _parse_header(line: str) -> Tuple[str, Tuple[FieldConfig, ...]]:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptStore(f"unreadable store header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != STORE_FORMAT:
        raise CorruptStore("not a document store file")
    if header.get("version") != config.FORMAT_VERSION:
        raise VersionUnsupported(f"store version {header.get('version')} is not supported")
    digest = header.pop("header_digest", None)
    if digest != hashlib.sha256(_dumps(header).encode("ascii")).hexdigest():
        raise CorruptStore("store header digest mismatch")

    fields = []
    try:
        for entry in header["fields"]:
            mode = StorageMode(entry["mode"])
            wrapped = None
            if mode.encrypted:
                wrapped = WrappedDek.from_bytes(_unb64(entry["wrapped_dek"]))
                if wrapped.abe_ct.tree.to_text() != parse_policy(entry["policy"]).to_text():
                    raise CorruptStore(f"policy of field {entry['name']!r} does not match its wrapped DEK")
            fields.append(FieldConfig(entry["name"], mode, entry["policy"], wrapped))
        name = header["name"]
    except (KeyError, TypeError, ValueError, UsageError, CryptoError, CorruptContainer) as exc:
        raise CorruptStore(f"invalid field configuration: {exc}") from exc
    if len({f.field_name for f in fields}) != len(fields):
        raise CorruptStore("duplicate field in store header")
    return name, tuple(fields)


def _parse_document(line: str, coll: Collection) -> StoredDocument:
    try:
        record = json.loads(line)
        doc_id = record["doc_id"]
        raw_fields = record["fields"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise CorruptStore(f"unreadable document record: {exc}") from exc
    if not isinstance(doc_id, int) or isinstance(doc_id, bool) or doc_id != coll.next_doc_id:
        raise CorruptStore(f"doc_id {doc_id!r} out of sequence (expected {coll.next_doc_id})")
    if not isinstance(raw_fields, dict):
        raise CorruptStore(f"document {doc_id} has no field map")

    fields = {}
    for name, value in raw_fields.items():
        try:
            cfg = coll.field_config(name)
        except UnknownField as exc:
            raise CorruptStore(f"document {doc_id}: {exc}") from exc
        if not cfg.mode.encrypted:
            if not isinstance(value, str):
                raise CorruptStore(f"document {doc_id}: plaintext field {name!r} is not a string")
            fields[name] = value
            continue
        try:
            fc = FieldCiphertext.from_bytes(_unb64(value))
        except CorruptContainer as exc:
            raise CorruptStore(f"document {doc_id}, field {name!r}: {exc}") from exc
        if fc.mode is not cfg.mode.cipher_mode or fc.dek_id != cfg.wrapped_dek.dek_id:
            raise CorruptStore(f"document {doc_id}, field {name!r} was not written under the field DEK")
        fields[name] = fc
    return StoredDocument(doc_id=doc_id, fields=fields)


def load_collection(path) -> Collection:
    """Read a store file, validating the header digest, doc_id order and field ciphertexts."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except FileNotFoundError as exc:
        raise StorageError(f"no collection at {path}") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise CorruptStore(f"cannot read {path}: {exc}") from exc
    lines = text.split("\n")
    if not lines[0] or lines[-1] != "":
        raise CorruptStore(f"{path} is truncated or empty")
    name, fields = _parse_header(lines[0])
    coll = Collection(name=name, fields=fields, path=path)
    for line in lines[1:-1]:
        coll.documents.append(_parse_document(line, coll))
    return coll


def save_collection(coll: Collection, path=None) -> Path:
    path = Path(path or coll.path)
    lines = [_header_line(coll)] + [_document_line(doc) for doc in coll.documents]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
    coll.path = path
    return path


# ---------------------------------------------------------------------------

class DocumentStore:
    """Client-side view of a directory of encrypted collections"""

    def __init__(self, pk: PublicParams, store_dir: str = config.STORE_DIR):
        self.pk = pk
        self.store_dir = Path(store_dir)

    def collection_path(self, name: str) -> Path:
        return self.store_dir / f"{name}{STORE_SUFFIX}"

    def create_collection(self, name: str, configs: Iterable[Tuple[str, object, Optional[str]]]) -> Collection:
        """Create a collection from (field, mode, policy) triples, wrapping one DEK per encrypted field."""
        configs = list(configs)
        names = [c[0] for c in configs]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise DuplicateField(f"duplicate field names: {', '.join(duplicates)}")

        fields = []
        for field_name, mode, policy_text in configs:
            mode = mode if isinstance(mode, StorageMode) else StorageMode.parse(str(mode))
            if not mode.encrypted:
                fields.append(FieldConfig(field_name, mode))
                continue
            tree = parse_policy(policy_text or "")
            wrapped, _ = wrap_dek(self.pk, tree)
            fields.append(FieldConfig(field_name, mode, tree.to_text(), wrapped))

        coll = Collection(name=name, fields=tuple(fields))
        path = self.collection_path(name)
        try:
            self.store_dir.mkdir(parents=True, exist_ok=True)
            with open(path, "x", encoding="ascii") as handle:
                handle.write(_header_line(coll) + "\n")
        except FileExistsError as exc:
            raise StorageError(f"collection {name!r} already exists at {path}") from exc
        except OSError as exc:
            raise StorageError(f"cannot create {path}: {exc}") from exc
        coll.path = path
        logger.info("created collection %s with %d fields", name, len(fields))
        return coll

    def load_collection(self, name: str) -> Collection:
        return load_collection(self.collection_path(name))

    def field_keys(self, coll: Collection, sk: PrivateKey) -> FieldKeys:
        """Unwrap every encrypted field DEK the key's attributes allow."""
        keys: FieldKeys = {}
        for cfg in coll.fields:
            if not cfg.mode.encrypted:
                continue
            try:
                keys[cfg.field_name] = unwrap_dek(self.pk, cfg.wrapped_dek, sk)
            except CryptoError as exc:
                logger.debug("field %s stays opaque: %s", cfg.field_name, exc)
                keys[cfg.field_name] = None
        return keys

    def _writer_key(self, coll: Collection, field_name: str, sk: PrivateKey, keys: Optional[FieldKeys]) -> Dek:
        if keys is not None and keys.get(field_name) is not None:
            return keys[field_name]
        # raises PolicyNotSatisfied when the writer cannot open the field
        return unwrap_dek(self.pk, coll.field_config(field_name).wrapped_dek, sk)

    def _encrypt_document(
        self, coll: Collection, doc: Mapping[str, object], sk_writer: PrivateKey, keys: Optional[FieldKeys]
    ) -> Dict[str, Union[FieldCiphertext, str]]:
        fields = {}
        for field_name, value in doc.items():
            cfg = coll.field_config(field_name)
            text = canonical_value(value)
            if not cfg.mode.encrypted:
                fields[field_name] = text
                continue
            dek = self._writer_key(coll, field_name, sk_writer, keys)
            fields[field_name] = sym_encrypt(dek, text.encode("utf-8"), cfg.mode.cipher_mode)
        return fields

    def _append(self, coll: Collection, docs: List[StoredDocument]):
        try:
            with open(coll.path, "a", encoding="ascii") as handle:
                for doc in docs:
                    handle.write(_document_line(doc) + "\n")
        except OSError as exc:
            raise StorageError(f"cannot append to {coll.path}: {exc}") from exc
        coll.documents.extend(docs)

    def insert(
        self, coll: Collection, doc: Mapping[str, object], sk_writer: PrivateKey, keys: Optional[FieldKeys] = None
    ) -> int:
        """Encrypt and append one document; returns its doc_id."""
        stored = StoredDocument(coll.next_doc_id, self._encrypt_document(coll, doc, sk_writer, keys))
        self._append(coll, [stored])
        logger.debug("inserted document %d into %s", stored.doc_id, coll.name)
        return stored.doc_id

    def insert_many(self, coll: Collection, docs: Iterable[Mapping[str, object]], sk_writer: PrivateKey) -> List[int]:
        """Bulk insert unwrapping each field DEK once."""
        docs = list(docs)
        keys = {
            name: self._writer_key(coll, name, sk_writer, None)
            for name in {n for doc in docs for n in doc}
            if coll.field_config(name).mode.encrypted
        }
        stored = []
        for doc in docs:
            stored.append(StoredDocument(coll.next_doc_id + len(stored), self._encrypt_document(coll, doc, sk_writer, keys)))
        self._append(coll, stored)
        logger.info("inserted %d documents into %s", len(stored), coll.name)
        return [s.doc_id for s in stored]

    def insert_from_csv(self, coll: Collection, csv_path: str, sk_writer: PrivateKey) -> List[int]:
        """Load documents from a CSV file whose columns are field names"""
        if not os.path.exists(csv_path):
            raise StorageError(f"CSV file not found: {csv_path}")
        df = pd.read_csv(csv_path, dtype=str, keep_default_na=False)
        for column in df.columns:
            coll.field_config(column)
        return self.insert_many(coll, df.to_dict(orient="records"), sk_writer)

    def _decrypt_document(self, coll: Collection, doc: StoredDocument, keys: FieldKeys) -> ReadDocument:
        fields = {}
        for field_name, value in doc.fields.items():
            if isinstance(value, str):
                fields[field_name] = value
                continue
            dek = keys.get(field_name)
            if dek is None:
                fields[field_name] = OpaqueField(value)
                continue
            try:
                fields[field_name] = sym_decrypt(dek, value).decode("utf-8")
            except (CryptoError, UnicodeDecodeError) as exc:
                logger.warning("document %d field %s failed to decrypt: %s", doc.doc_id, field_name, exc)
                fields[field_name] = OpaqueField(value)
        return ReadDocument(doc_id=doc.doc_id, fields=fields)

    def find_all(self, coll: Collection, sk: PrivateKey, keys: Optional[FieldKeys] = None) -> List[ReadDocument]:
        """Q1: every document, decrypted as far as the key allows."""
        keys = self.field_keys(coll, sk) if keys is None else keys
        return [self._decrypt_document(coll, doc, keys) for doc in coll.documents]

    @staticmethod
    def match_token(coll: Collection, field_name: str, token: FieldCiphertext) -> List[StoredDocument]:
        """Server side of an equality query: byte comparison only, no keys involved."""
        token_bytes = token.to_bytes()
        return [
            doc for doc in coll.documents
            if isinstance(doc.fields.get(field_name), FieldCiphertext)
            and doc.fields[field_name].to_bytes() == token_bytes
        ]

    def find_eq(
        self, coll: Collection, field_name: str, value, sk: PrivateKey, keys: Optional[FieldKeys] = None
    ) -> List[ReadDocument]:
        """Q2: documents whose field equals value."""
        cfg = coll.field_config(field_name)
        text = canonical_value(value)
        if cfg.mode is StorageMode.RND:
            raise NotDeterministicField(f"field {field_name!r} is randomized; equality queries need DET")
        keys = self.field_keys(coll, sk) if keys is None else keys
        if cfg.mode is StorageMode.PLAINTEXT:
            matches = [doc for doc in coll.documents if doc.fields.get(field_name) == text]
        else:
            dek = keys.get(field_name) or self._writer_key(coll, field_name, sk, None)
            token = sym_encrypt(dek, text.encode("utf-8"), CipherMode.DET)
            matches = self.match_token(coll, field_name, token)
        return [self._decrypt_document(coll, doc, keys) for doc in matches]
