#!/usr/bin/env python3
"""
CP-ABE toolkit
Command-line entry point: authority, keys, file encryption, the encrypted
document store and the benchmark experiments.

Exit codes: 0 success, 2 usage error, 3 crypto/policy failure, 4 storage failure.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import config
from access_policy import AttributeSet, parse_policy
from authority import (
    AttributeAuthority,
    AttributeUniverse,
    load_private_key,
    load_public_key,
    write_key_file,
)
from bench_harness import EXPERIMENTS, BenchConfig, run_experiment
from data_generator import create_sample_data
from docstore import DocumentStore, OpaqueField, StorageMode
from errors import CpabeError, InvalidFieldValue, StorageError
from excel_export import ReportExporter
from hybrid_envelope import CipherMode, SealedPayload, open_sealed, seal

DEFAULT_PUB = os.path.join(config.AUTHORITY_DIR, "pk.bin")


def _int_list(text: str):
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc


def _write_bytes(path: str, data: bytes):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# authority and files

def cmd_setup(args) -> int:
    authority = AttributeAuthority(args.dir)
    authority.bootstrap(AttributeUniverse.parse(args.universe))
    print(f"Authority bootstrapped in {args.dir}")
    print(f"Public key: {authority.pk_path}")
    return 0


def cmd_keygen(args) -> int:
    authority = AttributeAuthority(args.dir)
    record, container = authority.issue_user_key(args.user, AttributeSet.parse(args.attrs))
    out = args.out or os.path.join(args.dir, "keys", f"{args.user}.key")
    write_key_file(out, container, secret=True)
    print(f"Issued key for {record.user_id} with attributes {', '.join(record.attrs.sorted())}")
    print(f"Key file: {out}")
    print(f"Fingerprint: {record.key_fingerprint}")
    return 0


def cmd_enc(args) -> int:
    pk = load_public_key(args.pub)
    tree = parse_policy(args.policy)
    mode = CipherMode.DET if args.det else CipherMode.RND
    sealed = seal(pk, tree, _read_bytes(args.input), mode)
    _write_bytes(args.out, sealed.to_bytes())
    print(f"Encrypted {args.input} under '{tree}' -> {args.out}")
    return 0


def cmd_dec(args) -> int:
    pk = load_public_key(args.pub)
    sk = load_private_key(args.key)
    sealed = SealedPayload.from_bytes(_read_bytes(args.input))
    _write_bytes(args.out, open_sealed(pk, sealed, sk))
    print(f"Decrypted {args.input} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# document store

def _parse_field_spec(text: str):
    """FIELD:MODE[:POLICY]"""
    parts = text.split(":", 2)
    if len(parts) < 2:
        raise InvalidFieldValue(f"field spec {text!r} must look like FIELD:MODE[:POLICY]")
    mode = StorageMode.parse(parts[1])
    policy = parts[2] if len(parts) == 3 else None
    return parts[0], mode, policy


def _print_documents(documents):
    for doc in documents:
        fields = {k: str(v) if isinstance(v, OpaqueField) else v for k, v in doc.fields.items()}
        print(json.dumps({"doc_id": doc.doc_id, "fields": fields}, sort_keys=True))
    print(f"{len(documents)} document(s)")


def cmd_store(args) -> int:
    store = DocumentStore(load_public_key(args.pub), args.store_dir)

    if args.store_command == "create":
        coll = store.create_collection(args.name, [_parse_field_spec(f) for f in args.field])
        print(f"Created collection {coll.name} at {coll.path}")
        for cfg in coll.fields:
            print(f"  {cfg.field_name}: {cfg.mode.value}" + (f" under '{cfg.policy_text}'" if cfg.policy_text else ""))
        return 0

    coll = store.load_collection(args.name)
    sk = load_private_key(args.key)

    if args.store_command == "insert":
        if args.csv:
            ids = store.insert_from_csv(coll, args.csv, sk)
        else:
            doc = {}
            for item in args.doc or []:
                name, sep, value = item.partition("=")
                if not sep:
                    raise InvalidFieldValue(f"document field {item!r} must look like FIELD=VALUE")
                doc[name] = value
            if not doc:
                raise InvalidFieldValue("nothing to insert: pass --doc FIELD=VALUE or --csv FILE")
            ids = [store.insert(coll, doc, sk)]
        print(f"Inserted {len(ids)} document(s): {', '.join(str(i) for i in ids)}")
    elif args.store_command == "find-all":
        _print_documents(store.find_all(coll, sk))
    else:
        _print_documents(store.find_eq(coll, args.field, args.value, sk))
    return 0


# ---------------------------------------------------------------------------
# benchmarks and data

def cmd_bench(args) -> int:
    cfg = BenchConfig(
        runs=args.runs,
        doc_count=args.doc_count,
        attr_range=args.attrs or list(config.BENCH_ATTR_RANGE),
        size_range_kb=args.sizes or list(config.BENCH_SIZE_RANGE_KB),
        seed=args.seed,
        output_path=args.csv,
        authority_dir=args.dir,
        warmup=args.warmup,
    )
    report = run_experiment(args.experiment, cfg)
    print(report.to_frame().drop(columns=["raw_ms"], errors="ignore").to_string(index=False))
    print(f"\nEnvironment: {report.environment}")
    if cfg.output_path:
        print(f"CSV written to {cfg.output_path}")
    if args.xlsx:
        print(f"Workbook written to {ReportExporter().export_workbook([report], args.xlsx)}")
    return 0


def cmd_data(args) -> int:
    create_sample_data(args.out_dir, args.seed, args.doc_count)
    return 0


def cmd_demo(args) -> int:
    from demo import run_demo

    return 0 if run_demo() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="CP-ABE toolkit and encrypted document store")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="logging level (default from CPABE_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="bootstrap the attribute authority")
    p.add_argument("--dir", default=config.AUTHORITY_DIR)
    p.add_argument("--universe", required=True, help="comma-separated attribute universe")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("keygen", help="issue a private key for a user")
    p.add_argument("--dir", default=config.AUTHORITY_DIR)
    p.add_argument("--user", required=True)
    p.add_argument("--attrs", required=True, help="comma-separated attributes")
    p.add_argument("--out", help="key file path (default DIR/keys/USER.key)")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("enc", help="encrypt a file under a policy")
    p.add_argument("--pub", default=DEFAULT_PUB)
    p.add_argument("--policy", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--det", action="store_true", help="deterministic payload encryption")
    p.set_defaults(func=cmd_enc)

    p = sub.add_parser("dec", help="decrypt a file with a private key")
    p.add_argument("--pub", default=DEFAULT_PUB)
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dec)

    p = sub.add_parser("store", help="encrypted document store")
    store_sub = p.add_subparsers(dest="store_command", required=True)
    for name in ("create", "insert", "find-all", "find-eq"):
        sp = store_sub.add_parser(name)
        sp.add_argument("--pub", default=DEFAULT_PUB)
        sp.add_argument("--store-dir", default=config.STORE_DIR)
        sp.add_argument("--name", required=True, help="collection name")
        if name == "create":
            sp.add_argument("--field", action="append", required=True, help="FIELD:MODE[:POLICY], repeatable")
        else:
            sp.add_argument("--key", required=True, help="private key file")
        if name == "insert":
            sp.add_argument("--doc", action="append", help="FIELD=VALUE, repeatable")
            sp.add_argument("--csv", help="bulk insert from a CSV file")
        if name == "find-eq":
            sp.add_argument("--field", required=True)
            sp.add_argument("--value", required=True)
        sp.set_defaults(func=cmd_store)

    p = sub.add_parser("bench", help="run a benchmark experiment")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--dir", default=config.AUTHORITY_DIR, help="authority directory")
    p.add_argument("--runs", type=int, default=config.BENCH_RUNS)
    p.add_argument("--warmup", type=int, default=config.BENCH_WARMUP)
    p.add_argument("--seed", type=int, default=config.BENCH_SEED)
    p.add_argument("--doc-count", type=int, default=config.BENCH_DOC_COUNT)
    p.add_argument("--attrs", type=_int_list, help="attribute counts, e.g. 5,10,15")
    p.add_argument("--sizes", type=_int_list, help="payload sizes in KB, e.g. 100,200")
    p.add_argument("--csv", help="CSV output path")
    p.add_argument("--xlsx", help="xlsx workbook output path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("data", help="write the seeded benchmark dataset to CSV")
    p.add_argument("--seed", type=int, default=config.BENCH_SEED)
    p.add_argument("--doc-count", type=int, default=config.BENCH_DOC_COUNT)
    p.add_argument("--out-dir", default=config.STORE_DIR)
    p.set_defaults(func=cmd_data)

    p = sub.add_parser("demo", help="scripted end-to-end walkthrough")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    """Main function"""
    args = build_parser().parse_args(argv)
    config.configure_logging(args.log_level)
    try:
        return args.func(args)
    except CpabeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
