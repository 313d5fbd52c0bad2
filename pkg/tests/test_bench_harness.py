import pandas as pd
import pytest

from bench_harness import (
    BenchConfig,
    BenchReport,
    PlaintextBaseline,
    SymmetricBaseline,
    _measure,
    attribute_overhead,
    bench_queries,
    bench_size_scaling,
    bench_time_scaling,
    decrypt_encrypt_ratio,
    linear_fit,
    run_experiment,
    scaling_fits,
    synthetic_attributes,
)
from data_generator import gen_dataset
from errors import InvalidBenchConfig, SetupMissing, UsageError


def tiny_config(authority, **overrides):
    values = dict(
        runs=1, warmup=0, doc_count=8, attr_range=[1, 2, 3], size_range_kb=[1, 2], authority_dir=str(authority.directory)
    )
    values.update(overrides)
    return BenchConfig(**values)


def test_config_defaults():
    cfg = BenchConfig()
    assert cfg.runs == 15 and cfg.warmup == 3 and cfg.doc_count == 100
    assert cfg.attr_range == [5, 10, 15, 20, 25, 30]
    assert cfg.size_range_kb == list(range(100, 1001, 100))


@pytest.mark.parametrize(
    "overrides",
    [{"runs": 0}, {"warmup": -1}, {"doc_count": 0}, {"attr_range": []}, {"attr_range": [10, 5]}, {"size_range_kb": [0, 1]}],
)
def test_config_validation(overrides):
    with pytest.raises(InvalidBenchConfig):
        BenchConfig(**overrides)


def test_linear_fit():
    fit = linear_fit([1, 2, 3, 4], [3, 5, 7, 9])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert linear_fit([1, 2, 3], [4, 4, 4]).r_squared == 1.0
    assert linear_fit([1, 2, 3, 4], [1, 3, 2, 4]).r_squared < 0.99
    with pytest.raises(ValueError):
        linear_fit([1], [1])


def test_measure_keeps_raw_samples():
    calls = []
    mean, std, samples = _measure(lambda: calls.append(1), runs=5, warmup=2)
    assert len(calls) == 7
    assert len(samples) == 5
    assert mean >= 0 and std >= 0


def test_baselines_agree():
    docs = gen_dataset(7, 30)
    plain, sym = PlaintextBaseline(docs), SymmetricBaseline(docs)
    assert sym.find_all() == plain.find_all() == docs
    assert sym.find_eq("name", "Alice") == plain.find_eq("name", "Alice")
    assert len(plain.find_eq("name", "Alice")) >= 1
    assert sym.documents[0]["name"].iv == bytes(16)


def test_synthetic_attributes():
    assert synthetic_attributes(3) == ["attr_1", "attr_2", "attr_3"]


def test_missing_authority(tmp_path):
    cfg = BenchConfig(authority_dir=str(tmp_path / "none"))
    with pytest.raises(SetupMissing):
        bench_size_scaling(cfg)


def test_query_report_shape(authority):
    report = bench_queries(tiny_config(authority))
    assert len(report.rows) == 6
    assert {(r["variant"], r["query"]) for r in report.rows} == {
        (v, q) for v in ("plaintext", "symmetric", "cpabe") for q in ("Q1", "Q2")
    }
    row = report.rows[0]
    assert row["runs"] == 1 and len(row["raw_ms"]) == 1
    assert {r["reference_ms"] for r in report.rows} == {0.47, 3.93, 31.86, 34.72, 40.93, 45.41}
    assert "py_ecc" in report.environment


def test_size_scaling(authority):
    report = bench_size_scaling(tiny_config(authority))
    cpabe = [r for r in report.rows if r["variant"] == "cpabe"]
    aes = [r for r in report.rows if r["variant"] == "aes"]
    assert len({(r["attrs"], r["plaintext_kb"]) for r in cpabe}) == len(cpabe)
    at_largest = sorted((r["attrs"], r["ciphertext_bytes"]) for r in cpabe if r["plaintext_kb"] == 2)
    assert [a for a, _ in at_largest] == [1, 2, 3]
    sizes = [s for _, s in at_largest]
    assert sizes[0] < sizes[1] < sizes[2]
    # every extra attribute adds one leaf: two group elements plus their length prefixes
    assert sizes[2] - sizes[1] == sizes[1] - sizes[0]
    for a in aes:
        assert all(a["ciphertext_bytes"] < c["ciphertext_bytes"] for c in cpabe if c["plaintext_kb"] == a["plaintext_kb"])
    fits = scaling_fits(report)
    assert all(f["r_squared"] >= 0.99 for f in fits)
    overhead = attribute_overhead(report)
    assert len(overhead) == 2
    assert overhead[0]["bytes_per_attribute"] == overhead[1]["bytes_per_attribute"]


def test_time_scaling_shape(authority):
    cfg = tiny_config(authority, attr_range=[1, 2])
    encrypt = bench_time_scaling(cfg, "encrypt")
    decrypt = bench_time_scaling(cfg, "decrypt")
    for report, phase in ((encrypt, "encrypt"), (decrypt, "decrypt")):
        assert report.experiment == f"{phase}-time"
        assert len(report.rows) == 2 * 2 + 2
        assert all(r["phase"] == phase and r["runs"] == 1 for r in report.rows)
    ratio = decrypt_encrypt_ratio(encrypt, decrypt)
    assert len(ratio) == 6
    assert (ratio["ratio"] > 0).all()
    with pytest.raises(UsageError):
        bench_time_scaling(cfg, "sign")


def test_report_frame_flattens_samples():
    report = BenchReport("queries", rows=[{"variant": "plaintext", "mean_ms": 1.0, "raw_ms": [1.0, 2.5]}])
    df = report.to_frame()
    assert df.loc[0, "raw_ms"] == "1.000;2.500"


@pytest.mark.slow
def test_query_ordering(authority):
    report = bench_queries(tiny_config(authority, runs=15, warmup=3, doc_count=100))
    for query in ("Q1", "Q2"):
        rows = {r["variant"]: r for r in report.rows if r["query"] == query}
        plain, sym, abe = rows["plaintext"], rows["symmetric"], rows["cpabe"]
        assert plain["mean_ms"] + plain["std_dev"] < sym["mean_ms"] - sym["std_dev"]
        assert sym["mean_ms"] + sym["std_dev"] < abe["mean_ms"] - abe["std_dev"]


@pytest.mark.slow
def test_encryption_time_grows_with_attributes(authority):
    cfg = tiny_config(authority, runs=3, warmup=1, attr_range=[5, 30], size_range_kb=[100, 500])
    report = bench_time_scaling(cfg, "encrypt")
    rows = {(r["attrs"], r["plaintext_kb"]): r["mean_ms"] for r in report.rows if r["variant"] == "cpabe"}
    for kb in cfg.size_range_kb:
        assert rows[(30, kb)] > rows[(5, kb)]


@pytest.mark.slow
@pytest.mark.parametrize("phase", ["encrypt", "decrypt"])
def test_symmetric_time_grows_with_payload(authority, phase):
    cfg = tiny_config(authority, runs=5, warmup=1, attr_range=[1], size_range_kb=[100, 1000, 4000])
    report = bench_time_scaling(cfg, phase)
    means = [r["mean_ms"] for r in sorted(report.rows, key=lambda r: r["plaintext_kb"]) if r["variant"] == "aes"]
    assert means == sorted(means)


def test_run_experiment_writes_csv(authority, tmp_path):
    out = tmp_path / "size.csv"
    report = run_experiment("size", tiny_config(authority, output_path=str(out)))
    written = pd.read_csv(out)
    assert len(written) == len(report.rows)
    assert set(written["experiment"]) == {"size"}


def test_run_experiment_without_output_path(authority, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    run_experiment("size", tiny_config(authority))
    assert list(tmp_path.iterdir()) == []


def test_run_experiment_unknown_name(authority):
    with pytest.raises(UsageError):
        run_experiment("throughput", tiny_config(authority))
