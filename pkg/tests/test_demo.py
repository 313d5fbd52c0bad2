from demo import run_demo


def test_demo_runs_end_to_end(tmp_path, capsys):
    assert run_demo(str(tmp_path)) is True
    out = capsys.readouterr().out
    assert "DEMO COMPLETED SUCCESSFULLY" in out
    assert "salary=<encrypted>" in out
    assert (tmp_path / "authority" / "pk.bin").exists()
    assert (tmp_path / "data" / "staff.cpdb").exists()
