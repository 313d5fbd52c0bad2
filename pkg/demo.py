#!/usr/bin/env python3
"""
Demo script for the CP-ABE toolkit
Bootstraps an authority, issues analyst and admin keys, builds the
name / salary / credit_card_number collection and runs Q1 and Q2.
"""

import sys
import tempfile
from pathlib import Path

import config
from access_policy import AttributeSet
from authority import AttributeAuthority, AttributeUniverse, decode_private
from bench_harness import QUERY_FIELDS
from data_generator import gen_dataset
from docstore import DocumentStore, OpaqueField
from errors import CpabeError

DEMO_DOC_COUNT = 12


def _show(documents, limit=4):
    for doc in documents[:limit]:
        fields = ", ".join(
            f"{k}={'<encrypted>' if isinstance(v, OpaqueField) else v}" for k, v in sorted(doc.fields.items())
        )
        print(f"      #{doc.doc_id}: {fields}")
    if len(documents) > limit:
        print(f"      ... {len(documents) - limit} more")


def run_demo(workdir: str = None) -> bool:
    """Run the end-to-end walkthrough in a scratch directory"""

    print("=" * 80)
    print("🔐 CP-ABE Encrypted Document Store - DEMO")
    print("=" * 80)
    print()

    with tempfile.TemporaryDirectory() as scratch:
        base = Path(workdir or scratch)
        try:
            print("1. Bootstrapping the attribute authority...")
            authority = AttributeAuthority(str(base / "authority"))
            pk, _ = authority.bootstrap(AttributeUniverse.of(["analyst", "admin", "auditor"]))
            print(f"   ✅ Public key published at {authority.pk_path}")
            print()

            print("2. Issuing user keys...")
            keys = {}
            for user, attrs in (("ana", ["analyst"]), ("root", ["admin"])):
                record, container = authority.issue_user_key(user, AttributeSet(attrs))
                keys[user] = decode_private(container)
                print(f"   ✅ {user}: {', '.join(record.attrs.sorted())} (fingerprint {record.key_fingerprint[:16]})")
            print()

            print("3. Creating the collection...")
            store = DocumentStore(pk, str(base / "data"))
            coll = store.create_collection("staff", QUERY_FIELDS)
            for cfg in coll.fields:
                print(f"   {cfg.field_name:<20} {cfg.mode.value:<4} policy '{cfg.policy_text}'")
            dataset = gen_dataset(config.BENCH_SEED, DEMO_DOC_COUNT)
            store.insert_many(coll, dataset, keys["root"])
            print(f"   ✅ Inserted {len(coll)} documents as root")
            print()

            print("4. Q1 - retrieve all")
            print("-" * 50)
            for user in ("root", "ana"):
                documents = store.find_all(coll, keys[user])
                print(f"   {user} reads {len(documents)} documents:")
                _show(documents)
            print()

            print("5. Q2 - name equals 'Alice'")
            print("-" * 50)
            matches = store.find_eq(coll, "name", "Alice", keys["ana"])
            print(f"   ana finds {len(matches)} document(s):")
            _show(matches)
            print()

            print("6. What the server sees")
            print("-" * 50)
            stored = [doc.fields["name"].to_bytes() for doc in coll.documents]
            alice = store.match_token(coll, "name", coll.documents[matches[0].doc_id - 1].fields["name"])
            print(f"   Distinct name ciphertexts: {len(set(stored))} for {len(stored)} documents")
            print(f"   Equal DET ciphertexts reveal {len(alice)} documents share one name value")
            salaries = {doc.fields["salary"].to_bytes() for doc in coll.documents}
            print(f"   Distinct salary ciphertexts: {len(salaries)} (RND hides equality)")
            print()

        except CpabeError as e:
            print(f"   ❌ Error: {e}")
            return False

    print("=" * 80)
    print("🎉 DEMO COMPLETED SUCCESSFULLY!")
    print("=" * 80)
    print()
    print("Next steps:")
    print("  python main.py setup --universe analyst,admin")
    print("  python main.py bench queries --runs 15 --csv exports/queries.csv")
    print("=" * 80)

    return True


if __name__ == "__main__":
    config.configure_logging()
    success = run_demo()
    sys.exit(0 if success else 1)
