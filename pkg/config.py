import logging
import os

from dotenv import load_dotenv

load_dotenv()


def _int_list(raw: str):
    return [int(item) for item in raw.split(",") if item.strip()]


# Group Configuration
SECURITY_LEVEL = int(os.getenv("CPABE_SECURITY_LEVEL", "128"))

# Storage Configuration
AUTHORITY_DIR = os.getenv("CPABE_AUTHORITY_DIR", "authority")
STORE_DIR = os.getenv("CPABE_STORE_DIR", "data")
EXPORT_DIR = os.getenv("CPABE_EXPORT_DIR", "exports")

# Logging Configuration
LOG_LEVEL = os.getenv("CPABE_LOG_LEVEL", "WARNING")
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Exposes r and s to a registered callback; never enable outside tests
DEBUG_HOOKS = os.getenv("CPABE_DEBUG_HOOKS", "0") == "1"

# Protocol Constants
ATTRIBUTE_DST = b"CPABE-ATTR-V1"
DEM_KDF_TAG = b"CPABE-DEM-V1"
FORMAT_VERSION = 1

# Benchmark Configuration
BENCH_RUNS = int(os.getenv("BENCH_RUNS", "15"))
BENCH_WARMUP = int(os.getenv("BENCH_WARMUP", "3"))
BENCH_DOC_COUNT = int(os.getenv("BENCH_DOC_COUNT", "100"))
BENCH_SEED = int(os.getenv("BENCH_SEED", "42"))
BENCH_ATTR_RANGE = _int_list(os.getenv("BENCH_ATTR_RANGE", "5,10,15,20,25,30"))
BENCH_SIZE_RANGE_KB = _int_list(
    os.getenv("BENCH_SIZE_RANGE_KB", "100,200,300,400,500,600,700,800,900,1000")
)

# Average execution time of Q1 and Q2 reported for the original deployment (ms)
REFERENCE_QUERY_MS = {
    ("plaintext", "Q1"): 0.47,
    ("plaintext", "Q2"): 3.93,
    ("symmetric", "Q1"): 31.86,
    ("symmetric", "Q2"): 34.72,
    ("cpabe", "Q1"): 40.93,
    ("cpabe", "Q2"): 45.41,
}


def configure_logging(level: str = None):
    """Install the root handler once for CLI and demo runs"""
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)
