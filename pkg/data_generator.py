import os
import random
from typing import Dict, List, Sequence

import pandas as pd

import config
from access_policy import AccessTree, parse_policy

DATASET_FIELDS = ["name", "salary", "credit_card_number"]

FIRST_NAMES = [
    "Alice", "John", "Jane", "Michael", "Sarah", "David", "Emily", "Robert",
    "Jessica", "William", "Ashley", "James", "Amanda", "Christopher", "Jennifer",
    "Daniel", "Lisa", "Matthew", "Nancy", "Anthony",
]


def gen_dataset(seed: int = config.BENCH_SEED, doc_count: int = config.BENCH_DOC_COUNT) -> List[Dict[str, str]]:
    """Generate the name / salary / credit_card_number documents used by the query benchmark"""
    if doc_count < 1:
        raise ValueError("doc_count must be at least 1")

    rng = random.Random(seed)
    alice_count = rng.randint(1, max(1, doc_count // 4))
    alice_slots = set(rng.sample(range(doc_count), alice_count))
    others = [n for n in FIRST_NAMES if n != "Alice"]

    documents = []
    for i in range(doc_count):
        documents.append({
            "name": "Alice" if i in alice_slots else rng.choice(others),
            "salary": str(rng.randint(10_000, 999_999)),
            "credit_card_number": str(rng.randint(4 * 10**15, 10**16 - 1)),
        })
    return documents


def gen_payload(size_kb: int, seed: int = config.BENCH_SEED) -> bytes:
    """Seeded pseudo-random payload of size_kb kibibytes"""
    return random.Random(seed).randbytes(size_kb * 1024)


def _random_policy(rng: random.Random, attributes: Sequence[str], depth: int, max_depth: int) -> str:
    if depth >= max_depth or rng.random() < 0.35:
        return rng.choice(attributes)
    width = rng.randint(2, 3)
    children = [f"({_random_policy(rng, attributes, depth + 1, max_depth)})" for _ in range(width)]
    threshold = rng.randint(1, width)
    if threshold == width:
        return " and ".join(children)
    if threshold == 1:
        return " or ".join(children)
    return f"{threshold} of ({', '.join(children)})"


def gen_policy_corpus(
    seed: int, count: int, attributes: Sequence[str], max_depth: int = 4
) -> List[AccessTree]:
    """Seeded random monotone access trees of depth at most max_depth"""
    rng = random.Random(seed)
    # depth counts edges below the root; the root itself sits at depth 1
    return [parse_policy(_random_policy(rng, attributes, 1, max_depth)) for _ in range(count)]


def create_sample_data(output_dir: str = config.STORE_DIR, seed: int = config.BENCH_SEED,
                       doc_count: int = config.BENCH_DOC_COUNT) -> str:
    """Write the seeded dataset to CSV"""
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, f"dataset_seed{seed}_{doc_count}.csv")
    pd.DataFrame(gen_dataset(seed, doc_count), columns=DATASET_FIELDS).to_csv(path, index=False)
    print(f"Generated {doc_count} documents -> {path}")
    return path


if __name__ == "__main__":
    create_sample_data()
