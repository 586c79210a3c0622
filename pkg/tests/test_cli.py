import os


from fr3chan.cli import main


def run(*argv):
    return main(list(argv))


def test_table(capsys):
    assert run("table") == 0
    out = capsys.readouterr().out
    assert out.startswith("scenario,band,vis") and out.count("\n") == 19


def test_table_validate(capsys):
    assert run("table", "--validate") == 0
    assert "suspect_cell,SMA-B15-NLOS" in capsys.readouterr().out


def test_roundtrip_exit_codes(tmp_path):
    assert run("roundtrip", "--scenario", "uma", "--band", "7", "--los") == 0
    assert run("roundtrip", "--scenario", "umi", "--band", "7", "--n", "300", "--tol", "0",
               "--out", str(tmp_path / "d.csv")) == 1
    assert "fail" in (tmp_path / "d.csv").read_text()


def test_missing_class_generate(tmp_path, capsys):
    assert run("generate", "--scenario", "uma", "--band", "8", "--los",
               "--out", str(tmp_path / "r.csv")) == 2


def _all_outputs(d):
    args = ["--scenario", "sma", "--band", "8", "--nlos", "--seed", "5"]
    assert run("generate", *args, "--n", "120", "--out", str(d / "rec.csv")) == 0
    assert run("estimate", str(d / "rec.csv"), "--scenario", "sma", "--out", str(d / "rep.csv")) == 0
    assert run("plotdata", str(d / "rec.csv"), "--out-dir", str(d / "plots")) == 0
    assert run("coverage", *args, "--extent-m", "200", "--resolution-m", "20",
               "--out", str(d / "grid.csv")) == 0
    assert run("roundtrip", *args, "--n", "200", "--out", str(d / "diff.csv")) in (0, 1)


def test_cli_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    _all_outputs(a)
    _all_outputs(b)
    files = [os.path.relpath(os.path.join(r, f), a) for r, _, fs in os.walk(a) for f in fs]
    assert len(files) > 120
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    assert (a / "rep.csv").read_text().startswith("field,value")
