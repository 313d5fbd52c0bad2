"""
Benchmark experiments.

    queries    Q1 (retrieve all) and Q2 (name equals "Alice") against a plaintext
               store, a symmetric-only store and the CP-ABE hybrid store
    size       total sealed ciphertext bytes vs. policy attributes and payload size
    enc-time   sealing time vs. policy attributes and payload size
    dec-time   opening time vs. key attributes and payload size

Timings are wall-clock around the operation only; dataset generation, store
population and key generation happen before the clock starts. Every measured
row keeps its raw samples next to the mean and standard deviation.
"""

import logging
import platform
import tempfile
import time
from dataclasses import dataclass, field
from importlib import metadata
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from access_policy import and_policy
from authority import AttributeAuthority
from cpabe_core import MasterKey, PublicParams, keygen
from data_generator import gen_dataset, gen_payload
from docstore import DocumentStore, StorageMode
from errors import InvalidBenchConfig, UsageError
from hybrid_envelope import (
    CipherMode,
    Dek,
    FieldCiphertext,
    open_sealed,
    seal,
    sym_decrypt,
    sym_encrypt,
)

logger = logging.getLogger(__name__)

QUERY_FIELDS = [
    ("name", StorageMode.DET, "analyst or admin"),
    ("salary", StorageMode.RND, "admin"),
    ("credit_card_number", StorageMode.RND, "admin"),
]
QUERY_VALUE = ("name", "Alice")
VARIANTS = ("plaintext", "symmetric", "cpabe")
PHASES = ("encrypt", "decrypt")

SYMMETRIC_BASELINE = "AES-256-CBC/PKCS7, one key for all fields, DET name, RND others, client-side decryption"


def synthetic_attributes(count: int) -> List[str]:
    return [f"attr_{i}" for i in range(1, count + 1)]


@dataclass
class BenchConfig:
    runs: int = config.BENCH_RUNS
    doc_count: int = config.BENCH_DOC_COUNT
    attr_range: List[int] = field(default_factory=lambda: list(config.BENCH_ATTR_RANGE))
    size_range_kb: List[int] = field(default_factory=lambda: list(config.BENCH_SIZE_RANGE_KB))
    seed: int = config.BENCH_SEED
    output_path: Optional[str] = None
    authority_dir: str = config.AUTHORITY_DIR
    warmup: int = config.BENCH_WARMUP

    def __post_init__(self):
        if self.runs < 1:
            raise InvalidBenchConfig("runs must be at least 1")
        if self.warmup < 0:
            raise InvalidBenchConfig("warmup cannot be negative")
        if self.doc_count < 1:
            raise InvalidBenchConfig("doc_count must be at least 1")
        for label, values in (("attr_range", self.attr_range), ("size_range_kb", self.size_range_kb)):
            if not values:
                raise InvalidBenchConfig(f"{label} must not be empty")
            if any(v < 1 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
                raise InvalidBenchConfig(f"{label} must be positive and strictly ascending")


@dataclass
class BenchReport:
    experiment: str
    rows: List[Dict] = field(default_factory=list)
    environment: str = ""

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.rows)
        if "raw_ms" in df.columns:
            df["raw_ms"] = df["raw_ms"].map(lambda samples: ";".join(f"{s:.3f}" for s in samples))
        return df

    def write_csv(self, path: str) -> str:
        """Header row, comma separated, decimal point, no index column"""
        self.to_frame().to_csv(path, index=False)
        return path


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> LinearFit:
    """Least-squares line through (xs, ys) with its coefficient of determination"""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 2:
        raise ValueError("a linear fit needs at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0 else 1.0 - residual / total
    return LinearFit(float(slope), float(intercept), r_squared)


def describe_environment() -> str:
    def version(package: str) -> str:
        try:
            return metadata.version(package)
        except metadata.PackageNotFoundError:
            return "unknown"

    return (
        f"{platform.platform()}; {platform.processor() or platform.machine()}; "
        f"Python {platform.python_version()}; py_ecc {version('py_ecc')}; "
        f"cryptography {version('cryptography')}; symmetric baseline: {SYMMETRIC_BASELINE}"
    )


def _measure(op: Callable[[], object], runs: int, warmup: int) -> Tuple[float, float, List[float]]:
    for _ in range(warmup):
        op()
    samples = []
    for _ in range(runs):
        start = time.perf_counter()
        op()
        samples.append((time.perf_counter() - start) * 1000.0)
    std = float(np.std(samples, ddof=1)) if runs > 1 else 0.0
    return float(np.mean(samples)), std, samples


def _load_authority(cfg: BenchConfig) -> Tuple[PublicParams, MasterKey]:
    authority = AttributeAuthority(cfg.authority_dir)
    return authority.public_key(), authority.master_key()


# ---------------------------------------------------------------------------
# query benchmark

class PlaintextBaseline:
    """All fields in the clear"""

    def __init__(self, documents: List[Dict[str, str]]):
        self.documents = [dict(doc) for doc in documents]

    def find_all(self) -> List[Dict[str, str]]:
        return [dict(doc) for doc in self.documents]

    def find_eq(self, field_name: str, value: str) -> List[Dict[str, str]]:
        return [dict(doc) for doc in self.documents if doc.get(field_name) == value]


class SymmetricBaseline:
    """Every field under one AES key; name deterministic, the rest randomized"""

    def __init__(self, documents: List[Dict[str, str]], dek: Optional[Dek] = None):
        self.dek = dek or Dek.generate()
        self.documents = [
            {
                name: sym_encrypt(self.dek, value.encode("utf-8"), self._mode(name))
                for name, value in doc.items()
            }
            for doc in documents
        ]

    @staticmethod
    def _mode(field_name: str) -> CipherMode:
        return CipherMode.DET if field_name == QUERY_VALUE[0] else CipherMode.RND

    def _decrypt(self, doc: Dict[str, FieldCiphertext]) -> Dict[str, str]:
        return {name: sym_decrypt(self.dek, fc).decode("utf-8") for name, fc in doc.items()}

    def find_all(self) -> List[Dict[str, str]]:
        return [self._decrypt(doc) for doc in self.documents]

    def find_eq(self, field_name: str, value: str) -> List[Dict[str, str]]:
        token = sym_encrypt(self.dek, value.encode("utf-8"), CipherMode.DET).to_bytes()
        return [self._decrypt(doc) for doc in self.documents if doc[field_name].to_bytes() == token]


class CpabeVariant:
    """The hybrid store; each query unwraps the field DEKs it needs"""

    def __init__(self, store: DocumentStore, collection, sk):
        self.store = store
        self.collection = collection
        self.sk = sk

    def find_all(self):
        return self.store.find_all(self.collection, self.sk)

    def find_eq(self, field_name: str, value: str):
        return self.store.find_eq(self.collection, field_name, value, self.sk)


def bench_queries(cfg: BenchConfig) -> BenchReport:
    pk, mk = _load_authority(cfg)
    dataset = gen_dataset(cfg.seed, cfg.doc_count)
    admin = keygen(mk, pk, ["admin"])
    report = BenchReport("queries", environment=describe_environment())

    with tempfile.TemporaryDirectory() as store_dir:
        store = DocumentStore(pk, store_dir)
        collection = store.create_collection("bench", QUERY_FIELDS)
        store.insert_many(collection, dataset, admin)
        variants = {
            "plaintext": PlaintextBaseline(dataset),
            "symmetric": SymmetricBaseline(dataset),
            "cpabe": CpabeVariant(store, collection, admin),
        }
        for variant in VARIANTS:
            target = variants[variant]
            queries = {
                "Q1": target.find_all,
                "Q2": lambda: target.find_eq(*QUERY_VALUE),
            }
            for query, op in queries.items():
                mean, std, samples = _measure(op, cfg.runs, cfg.warmup)
                logger.info("%s %s: %.3f ms (std %.3f)", variant, query, mean, std)
                report.rows.append({
                    "experiment": "queries",
                    "variant": variant,
                    "query": query,
                    "doc_count": cfg.doc_count,
                    "runs": cfg.runs,
                    "mean_ms": mean,
                    "std_dev": std,
                    "reference_ms": config.REFERENCE_QUERY_MS[(variant, query)],
                    "raw_ms": samples,
                })
    return report


# ---------------------------------------------------------------------------
# scaling benchmarks

def _size_row(variant: str, attrs: int, plaintext_kb: int, size: int) -> Dict:
    return {
        "experiment": "size",
        "variant": variant,
        "attrs": attrs,
        "plaintext_kb": plaintext_kb,
        "ciphertext_bytes": size,
        "runs": 1,
        "std_dev": 0.0,
    }


def bench_size_scaling(cfg: BenchConfig) -> BenchReport:
    """Sealed size vs. attribute count at the largest payload, and vs. payload size at the extreme counts"""
    pk, _ = _load_authority(cfg)
    report = BenchReport("size", environment=describe_environment())
    largest = cfg.size_range_kb[-1]
    measured = set()

    def sealed_size(attrs: int, kb: int):
        if (attrs, kb) in measured:
            return
        measured.add((attrs, kb))
        payload = gen_payload(kb, cfg.seed)
        size = len(seal(pk, and_policy(synthetic_attributes(attrs)), payload).to_bytes())
        report.rows.append(_size_row("cpabe", attrs, kb, size))
        logger.info("size: %d attrs, %d KB -> %d bytes", attrs, kb, size)

    for attrs in cfg.attr_range:
        sealed_size(attrs, largest)
    for kb in cfg.size_range_kb:
        for attrs in sorted({cfg.attr_range[0], cfg.attr_range[-1]}):
            sealed_size(attrs, kb)
        aes = sym_encrypt(Dek.generate(), gen_payload(kb, cfg.seed), CipherMode.RND)
        report.rows.append(_size_row("aes", 0, kb, len(aes.to_bytes())))
    return report


def bench_time_scaling(cfg: BenchConfig, phase: str) -> BenchReport:
    """encrypt: vary policy attributes |A_C|; decrypt: vary key attributes |S| on a matching AND policy"""
    if phase not in PHASES:
        raise UsageError(f"phase must be one of {', '.join(PHASES)}")
    pk, mk = _load_authority(cfg)
    report = BenchReport(f"{phase}-time", environment=describe_environment())
    payloads = {kb: gen_payload(kb, cfg.seed) for kb in cfg.size_range_kb}

    def record(variant: str, attrs: int, kb: int, op: Callable[[], object]):
        mean, std, samples = _measure(op, cfg.runs, cfg.warmup)
        logger.info("%s %s: %d attrs, %d KB -> %.1f ms", phase, variant, attrs, kb, mean)
        report.rows.append({
            "experiment": report.experiment,
            "phase": phase,
            "variant": variant,
            "attrs": attrs,
            "plaintext_kb": kb,
            "runs": cfg.runs,
            "mean_ms": mean,
            "std_dev": std,
            "raw_ms": samples,
        })

    for attrs in cfg.attr_range:
        names = synthetic_attributes(attrs)
        tree = and_policy(names)
        sk = keygen(mk, pk, names) if phase == "decrypt" else None
        for kb, payload in payloads.items():
            if phase == "encrypt":
                record("cpabe", attrs, kb, lambda: seal(pk, tree, payload))
            else:
                sealed = seal(pk, tree, payload)
                record("cpabe", attrs, kb, lambda: open_sealed(pk, sealed, sk))

    dek = Dek.generate()
    for kb, payload in payloads.items():
        if phase == "encrypt":
            record("aes", 0, kb, lambda: sym_encrypt(dek, payload, CipherMode.RND))
        else:
            body = sym_encrypt(dek, payload, CipherMode.RND)
            record("aes", 0, kb, lambda: sym_decrypt(dek, body))
    return report


# ---------------------------------------------------------------------------
# summaries

def scaling_fits(report: BenchReport) -> List[Dict]:
    """Linear fits of every CP-ABE series: vs. attrs at each payload size, vs. payload size at each attr count"""
    df = pd.DataFrame(report.rows)
    if df.empty:
        return []
    df = df[df["variant"] == "cpabe"]
    metric = "ciphertext_bytes" if "ciphertext_bytes" in df.columns else "mean_ms"
    fits = []
    for x_axis, group_axis in (("attrs", "plaintext_kb"), ("plaintext_kb", "attrs")):
        for key, series in df.groupby(group_axis):
            if series[x_axis].nunique() < 2:
                continue
            fit = linear_fit(series[x_axis], series[metric])
            fits.append({
                "experiment": report.experiment,
                "metric": metric,
                "x": x_axis,
                group_axis: key,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
            })
    return fits


def attribute_overhead(report: BenchReport) -> List[Dict]:
    """Per-attribute ciphertext growth between the smallest and largest attr counts, per payload size"""
    df = pd.DataFrame(report.rows)
    df = df[df["variant"] == "cpabe"]
    low, high = df["attrs"].min(), df["attrs"].max()
    rows = []
    for kb, series in df.groupby("plaintext_kb"):
        sizes = dict(zip(series["attrs"], series["ciphertext_bytes"]))
        if low in sizes and high in sizes and high > low:
            rows.append({
                "plaintext_kb": kb,
                "bytes_per_attribute": (sizes[high] - sizes[low]) / (high - low),
            })
    return rows


def decrypt_encrypt_ratio(encrypt_report: BenchReport, decrypt_report: BenchReport) -> pd.DataFrame:
    """mean decrypt / mean encrypt at each shared (attrs, plaintext_kb) grid point"""
    keys = ["variant", "attrs", "plaintext_kb"]
    enc = pd.DataFrame(encrypt_report.rows)[keys + ["mean_ms"]]
    dec = pd.DataFrame(decrypt_report.rows)[keys + ["mean_ms"]]
    merged = enc.merge(dec, on=keys, suffixes=("_encrypt", "_decrypt"))
    merged["ratio"] = merged["mean_ms_decrypt"] / merged["mean_ms_encrypt"]
    return merged


EXPERIMENTS = {
    "queries": bench_queries,
    "size": bench_size_scaling,
    "enc-time": lambda cfg: bench_time_scaling(cfg, "encrypt"),
    "dec-time": lambda cfg: bench_time_scaling(cfg, "decrypt"),
}


def run_experiment(name: str, cfg: BenchConfig) -> BenchReport:
    """Run one experiment and, when cfg.output_path is set, write its CSV there."""
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; choose from {', '.join(sorted(EXPERIMENTS))}")
    report = EXPERIMENTS[name](cfg)
    if cfg.output_path:
        report.write_csv(cfg.output_path)
        logger.info("%s report written to %s", report.experiment, cfg.output_path)
    return report
