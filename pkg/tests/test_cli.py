import json

import pytest

import skewharm.cli as cli
from skewharm.config import RunConfig


def run_main(args):
    return cli.main(args)


def test_missing_subcommand_exits_2():
    assert run_main([]) == 2


def test_eps_and_eps_list_are_exclusive(capsys):
    rc = run_main(["scan", "--f", "const", "--eps", "0.1",
                   "--eps-list", "0.1,0.2"])
    assert rc == 2
    assert "mutually exclusive" in capsys.readouterr().err


def test_scan_csv_schema_and_header(tmp_path):
    out = tmp_path / "scan.csv"
    rc = run_main(["scan", "--f", "const", "--eps", "2^-4",
                   "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# artifact_version:") for l in header)
    assert "# command: scan" in header
    assert '# eps: ["2^-4"]' in header
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "eps,lambda,kappa,tag,flag"
    assert len(body) > 10
    kappas = [float(l.split(",")[2]) for l in body[1:]]
    assert all(0.0 < k <= 1.0 + 1e-4 for k in kappas)


def test_psi_constant_is_one(tmp_path):
    out = tmp_path / "psi.csv"
    rc = run_main(["psi", "--f", "const", "--eps", "2^-4", "--out", str(out)])
    assert rc == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "eps,psi,lam_argmax,flag"
    eps, psi, lam, flag = body[1].split(",")
    assert abs(float(psi) - 1.0) < 1e-4
    assert flag == ""


def test_json_report_schema(tmp_path):
    out = tmp_path / "scan.json"
    rc = run_main(["scan", "--f", "const", "--eps", "2^-4",
                   "--format", "json", "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert sorted(doc) == ["config", "diagnostics", "results"]
    assert doc["config"]["command"] == "scan"
    assert doc["diagnostics"]["failures"] == []
    row = doc["results"][0]["rows"][0]
    # numbers are decimal strings with 17 significant digits
    assert isinstance(row["kappa"], str)
    assert float(row["kappa"]) > 0
    assert "%.17g" % float(row["kappa"]) == row["kappa"]


def test_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "scan.csv"
    args = ["scan", "--f", "const", "--eps-list", "2^-3,2^-4",
            "--jobs", "2", "--out", str(out)]
    assert run_main(args) == 0
    first = out.read_bytes()
    assert run_main(args) == 0
    assert out.read_bytes() == first


def test_data_rows_identical_across_jobs(tmp_path):
    texts = {}
    for jobs in ("1", "3"):
        out = tmp_path / ("scan%s.csv" % jobs)
        rc = run_main(["scan", "--f", "const", "--eps-list", "2^-3,2^-4,2^-5",
                       "--jobs", jobs, "--out", str(out)])
        assert rc == 0
        texts[jobs] = [l for l in out.read_text().splitlines()
                       if not l.startswith("#")]
    assert texts["1"] == texts["3"]


def test_decay_csv_columns(tmp_path):
    out = tmp_path / "decay.csv"
    rc = run_main(["decay", "--f", "x2", "--eps", "0.1", "--T", "0.5",
                   "--out", str(out)])
    assert rc == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "t,norm_sq,phi"
    t0 = [float(v) for v in body[1].split(",")]
    tN = [float(v) for v in body[-1].split(",")]
    assert t0[0] == 0.0 and t0[1] == 1.0
    assert tN[1] < 1.0 and tN[2] < t0[2]


def test_domain_envelope_nonnegative(tmp_path):
    out = tmp_path / "dom.csv"
    rc = run_main(["domain", "--f", "const", "--eps", "2^-4",
                   "--out", str(out)])
    assert rc == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert body[0] == "lambda,x"
    xs = [float(l.split(",")[1]) for l in body[1:]]
    assert all(x >= 0.0 for x in xs)
    assert max(xs) > 0.4


def test_per_eps_files_for_decay(tmp_path):
    out = tmp_path / "d.csv"
    rc = run_main(["decay", "--f", "x2", "--eps-list", "0.1,0.05",
                   "--T", "0.3", "--out", str(out)])
    assert rc == 0
    made = sorted(f.name for f in tmp_path.iterdir())
    assert made == ["d_0.05.csv", "d_0.1.csv"]


def test_failing_job_does_not_abort_siblings(tmp_path, capsys, monkeypatch):
    real = cli._job

    def sabotaged(cfg, p, eps_text):
        if eps_text == "2^-5":
            raise RuntimeError("boom")
        return real(cfg, p, eps_text)

    monkeypatch.setattr(cli, "_job", sabotaged)
    out = tmp_path / "scan.csv"
    cfg = RunConfig(command="scan", f="const", eps=("2^-4", "2^-5"),
                    out=str(out), jobs=2)
    rc = cli.run(cfg)
    assert rc == 1
    err = capsys.readouterr().err
    assert "boom" in err and "2^-5" in err
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(body) > 5  # the healthy job still produced rows


def test_invariant_problem_sets_exit_code(tmp_path, capsys, monkeypatch):
    real = cli._job

    def tainted(cfg, p, eps_text):
        rows, diag, problems = real(cfg, p, eps_text)
        problems.append("synthetic problem for the exit-code path")
        return rows, diag, problems

    monkeypatch.setattr(cli, "_job", tainted)
    cfg = RunConfig(command="psi", f="const", eps=("2^-4",),
                    out=str(tmp_path / "p.csv"))
    assert cli.run(cfg) == 1
    assert "synthetic problem" in capsys.readouterr().err


def test_sigma_fit_embeds_fit_comments(tmp_path):
    out = tmp_path / "sig.csv"
    rc = run_main(["sigma-fit", "--f", "x2", "--n", "1",
                   "--eps-list", "0.5,0.25,0.1,2^-6,2^-8",
                   "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert "# fit_exponent:" in text
    body = [l for l in text.splitlines() if not l.startswith("#")]
    assert body[0] == "eps,sigma"
    sigmas = [float(l.split(",")[1]) for l in body[1:]]
    assert all(s >= 1.0 - 1e-4 for s in sigmas)
    # rows follow the eps-list order, and sigma grows as eps shrinks
    assert sigmas == sorted(sigmas)
