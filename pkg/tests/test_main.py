import json

import pytest

from main import main


@pytest.fixture
def cli_authority(tmp_path):
    directory = tmp_path / "authority"
    assert main(["setup", "--dir", str(directory), "--universe", "analyst,admin,auditor"]) == 0
    return directory


def _keygen(directory, user, attrs):
    assert main(["keygen", "--dir", str(directory), "--user", user, "--attrs", attrs]) == 0
    return directory / "keys" / f"{user}.key"


def test_setup_refuses_second_run(cli_authority, capsys):
    assert main(["setup", "--dir", str(cli_authority), "--universe", "x"]) == 4
    assert "error:" in capsys.readouterr().err


def test_keygen_writes_key_file(cli_authority, capsys):
    key = _keygen(cli_authority, "ana", "analyst")
    assert key.exists()
    out = capsys.readouterr().out
    assert "Issued key for ana with attributes analyst" in out
    assert main(["keygen", "--dir", str(cli_authority), "--user", "eve", "--attrs", "janitor"]) == 2


def test_encrypt_and_decrypt_file(cli_authority, tmp_path):
    pub = str(cli_authority / "pk.bin")
    plain = tmp_path / "report.txt"
    plain.write_bytes(b"quarterly numbers\n" * 50)
    sealed = tmp_path / "report.cpef"
    restored = tmp_path / "restored.txt"

    assert main(["enc", "--pub", pub, "--policy", "admin or (analyst and auditor)", "--in", str(plain), "--out", str(sealed)]) == 0
    admin = _keygen(cli_authority, "root", "admin")
    analyst = _keygen(cli_authority, "ana", "analyst")

    assert main(["dec", "--pub", pub, "--key", str(admin), "--in", str(sealed), "--out", str(restored)]) == 0
    assert restored.read_bytes() == plain.read_bytes()
    assert main(["dec", "--pub", pub, "--key", str(analyst), "--in", str(sealed), "--out", str(tmp_path / "no.txt")]) == 3


def test_usage_and_storage_exit_codes(cli_authority, tmp_path):
    pub = str(cli_authority / "pk.bin")
    plain = tmp_path / "in.txt"
    plain.write_bytes(b"x")
    assert main(["enc", "--pub", pub, "--policy", "admin and", "--in", str(plain), "--out", str(tmp_path / "o")]) == 2
    deep = "(" * 1000 + "admin" + ")" * 1000
    assert main(["enc", "--pub", pub, "--policy", deep, "--in", str(plain), "--out", str(tmp_path / "o")]) == 2
    assert main(["enc", "--pub", pub, "--policy", "admin or OR", "--in", str(plain), "--out", str(tmp_path / "o")]) == 2
    assert main(["enc", "--pub", str(tmp_path / "missing.bin"), "--policy", "admin", "--in", str(plain), "--out", str(tmp_path / "o")]) == 4
    assert main(["bench", "size", "--dir", str(tmp_path / "nowhere")]) == 4


def test_store_commands(cli_authority, tmp_path, capsys):
    pub = str(cli_authority / "pk.bin")
    store_dir = str(tmp_path / "store")
    common = ["--pub", pub, "--store-dir", store_dir, "--name", "staff"]
    admin = str(_keygen(cli_authority, "root", "admin"))
    analyst = str(_keygen(cli_authority, "ana", "analyst"))

    assert main(["store", "create", *common, "--field", "name:DET:analyst or admin", "--field", "salary:RND:admin"]) == 0
    for name, salary in (("Alice", "52000"), ("Bob", "61000"), ("Alice", "70500")):
        assert main(["store", "insert", *common, "--key", admin, "--doc", f"name={name}", "--doc", f"salary={salary}"]) == 0
    capsys.readouterr()

    assert main(["store", "find-eq", *common, "--key", analyst, "--field", "name", "--value", "Alice"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "2 document(s)"
    found = [json.loads(line) for line in lines[:-1]]
    assert [doc["doc_id"] for doc in found] == [1, 3]
    assert found[0]["fields"] == {"name": "Alice", "salary": "<encrypted>"}

    assert main(["store", "find-eq", *common, "--key", admin, "--field", "salary", "--value", "52000"]) == 2
    assert main(["store", "insert", *common, "--key", admin]) == 2
    assert main(["store", "insert", *common, "--key", analyst, "--doc", "salary=1"]) == 3


def test_data_command(tmp_path, capsys):
    assert main(["data", "--seed", "3", "--doc-count", "12", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "dataset_seed3_12.csv").exists()
    assert "Generated 12 documents" in capsys.readouterr().out


def test_bench_size_writes_csv(cli_authority, tmp_path):
    out = tmp_path / "size.csv"
    argv = ["bench", "size", "--dir", str(cli_authority), "--attrs", "1,2", "--sizes", "1", "--csv", str(out)]
    assert main(argv) == 0
    assert out.read_text().splitlines()[0].startswith("experiment,variant,attrs")
