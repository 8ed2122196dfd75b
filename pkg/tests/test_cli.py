import csv
import io
import json
import math

import pytest

from mdlearn import cli, ingest
from mdlearn.stats import correlate, p_value_two_tailed, pearson_r

SYMBOL_RATIO = math.log2(200) / math.log2(100_000)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    if capsys is None:
        return code
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def report(tmp_path, data_dir):
    p = tmp_path / "report.csv"
    assert run(["learnability", "--constructions", data_dir / "constructions.json", "--out", p]) == 0
    return p


def test_learnability_symbol_scaling(tmp_path, data_dir):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    src = data_dir / "constructions.json"
    assert run(["learnability", "--constructions", src, "--out", a, "--symbols", 100000]) == 0
    assert run(["learnability", "--constructions", src, "--out", b, "--symbols", 200]) == 0
    big, small = read_csv(a), read_csv(b)
    assert len(big) == 17
    for x, y in zip(big, small):
        assert x["construction_id"] == y["construction_id"]
        nb, ns = float(x["N_years"]), float(y["N_years"])
        assert math.isfinite(nb)
        assert ns / nb == pytest.approx(SYMBOL_RATIO, abs=0.01)


def test_learnability_to_stdout(capsys, data_dir):
    code, out, _ = run(["learnability", "--constructions", data_dir / "constructions.json"], capsys)
    assert code == 0
    assert out.splitlines()[0] == ",".join(ingest.REPORT_COLUMNS)
    assert len(out.splitlines()) == 18


def test_empty_constructions_exit_2(tmp_path, capsys):
    p = tmp_path / "empty.json"
    p.write_text("")
    code, _, err = run(["learnability", "--constructions", p, "--out", tmp_path / "r.csv"], capsys)
    assert code == 2
    assert "error" in err and "empty" in err


def test_zero_savings_is_inf(tmp_path):
    spec = {
        "id": "flat", "n_new_symbols": 2,
        "contexts": [
            {"id": "c1", "options": [{"form": "a", "allowed": True, "count": 5},
                                     {"form": "b", "allowed": True, "count": 5}]},
        ],
        "diagnostic": {"context": "c1", "form": "a"},
    }
    src = tmp_path / "c.json"
    src.write_text(json.dumps([spec]))
    out = tmp_path / "r.csv"
    assert run(["learnability", "--constructions", src, "--out", out]) == 0
    (row,) = read_csv(out)
    assert row["N_years"] == "inf" and row["O_needed"] == "inf" and row["learnability"] == "-inf"


def test_correlate_linear(tmp_path):
    rep = tmp_path / "r.csv"
    rows = []
    for i in range(5):
        rows.append([f"c{i}", "10", "0.1", "100", "1", ingest.fmt(10.0 ** (i * 0.5)),
                     ingest.fmt(-i * 0.5), ingest.fmt((i * 7) % 5)])
    ingest._write_csv(rep, ingest.REPORT_COLUMNS, rows)
    jud = tmp_path / "j.csv"
    jud.write_text("construction_id,mean_grammatical,mean_ungrammatical,n\n"
                   + "".join(f"c{i},1,{4 - 0.5 * i},20\n" for i in range(5)))
    out = tmp_path / "c.csv"
    assert run(["correlate", "--report", rep, "--judgments", jud, "--out", out]) == 0
    learn = read_csv(out)[0]
    assert learn["variable"] == "learnability" and float(learn["r"]) == 1.0 and learn["p"] == "0"


def test_correlate_fixture_matches_oracle(tmp_path, data_dir, report, monkeypatch):
    captured = []
    real = ingest.write_correlations

    def spy(path, reports):
        reports = list(reports)
        captured.extend(reports)
        real(path, reports)

    monkeypatch.setattr(ingest, "write_correlations", spy)
    out = tmp_path / "c.csv"
    assert run(["correlate", "--report", report, "--judgments", data_dir / "judgments.csv", "--out", out]) == 0

    results = {r.construction_id: r for r in ingest.load_report(report)}
    judged = {j.construction_id: j for j in ingest.load_judgments(data_dir / "judgments.csv")}
    ids = sorted(results)
    ys = [judged[c].mean_ungrammatical - judged[c].mean_grammatical for c in ids]
    written = read_csv(out)
    for rep, row, attr in zip(captured, written, ("learnability", "entrenchment")):
        r = pearson_r([getattr(results[c], attr) for c in ids], ys)
        p = p_value_two_tailed(r, 17)
        assert rep.variable == attr and rep.n == 17
        assert rep.r == pytest.approx(r, abs=1e-9)
        assert rep.p == pytest.approx(p, abs=1e-9)
        # the file carries the same numbers at its declared precision
        assert float(row["r"]) == pytest.approx(r, rel=5e-6)
        assert float(row["p"]) == pytest.approx(p, rel=5e-6)


def test_correlate_missing_row_warns(tmp_path, data_dir, report, capsys):
    lines = (data_dir / "judgments.csv").read_text().splitlines(keepends=True)
    kept = [ln for ln in lines if not ln.startswith("shout,")]
    assert len(kept) == len(lines) - 1
    jud = tmp_path / "j.csv"
    jud.write_text("".join(kept))
    out = tmp_path / "c.csv"
    code, _, err = run(["correlate", "--report", report, "--judgments", jud, "--out", out], capsys)
    assert code == 0
    assert all(row["n"] == "16" for row in read_csv(out))
    assert "warning" in err and "shout" in err


def test_correlate_insufficient_exit_2(tmp_path, data_dir, report, capsys):
    jud = tmp_path / "j.csv"
    jud.write_text("construction_id,mean_grammatical,mean_ungrammatical,n\nshout,1,3,9\npour,1,2,9\n")
    code, _, err = run(["correlate", "--report", report, "--judgments", jud], capsys)
    assert code == 2 and "insufficient" in err


def single_family(tmp_path):
    p = tmp_path / "one.json"
    p.write_text(json.dumps({
        "elements": ["a", "b"], "true_index": 1,
        "hypotheses": [{"masses": {"a": "1/3", "b": "2/3"}, "schedule": {"kind": "geometric", "rate": "1/2"}}],
    }))
    return p


def summary_fields(out):
    line = out.strip().splitlines()[-1]
    return dict(kv.split("=") for kv in line.split())


def test_identify_single_hypothesis(tmp_path, capsys):
    code, out, _ = run(["identify", "--family", single_family(tmp_path), "--seeds", 20,
                        "--samples", 50, "--out", tmp_path / "tr"], capsys)
    assert code == 0
    s = summary_fields(out)
    assert s["converged"] == "20" and s["fraction"] == "1.0000" and s["median_convergence_step"] == "1"
    rows = read_csv(tmp_path / "tr" / "trace_seed0.csv")
    assert len(rows) == 50 and all(r["guess"] == "1" and r["eliminated"] == "" for r in rows)


def test_identify_three_family(data_dir, capsys):
    code, out, _ = run(["identify", "--family", data_dir / "family_three.json", "--seeds", 200], capsys)
    assert code == 0
    s = summary_fields(out)
    assert s["runs"] == "200" and s["true_index"] == "3"
    assert int(s["converged"]) >= 198 and int(s["exhausted"]) == 0


def test_identify_is_deterministic(tmp_path, data_dir, capsys):
    outs = []
    for d in ("x", "y"):
        run(["identify", "--family", data_dir / "family_three.json", "--seed", 41, "--seeds", 2,
             "--out", tmp_path / d], capsys)
        outs.append(capsys.readouterr())
    for name in ("trace_seed41.csv", "trace_seed42.csv"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    assert outs[0] == outs[1]


def test_identify_invalid_family_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"elements": ["a"], "true_index": 1,
                             "hypotheses": [{"masses": {"a": 0.5}}]}))
    code, _, err = run(["identify", "--family", p], capsys)
    assert code == 2 and "rational" in err


def test_identify_exact_schedules(tmp_path, capsys):
    p = tmp_path / "fam.json"
    p.write_text(json.dumps({
        "elements": ["a", "b"], "true_index": 2,
        "hypotheses": [
            {"masses": {"a": "1/10", "b": "9/10"}, "schedule": {"kind": "exact"}},
            {"masses": {"a": "9/10", "b": "1/10"}, "schedule": {"kind": "exact"}},
        ],
    }))
    code, out, _ = run(["identify", "--family", p, "--seeds", 5], capsys)
    assert code == 0
    assert summary_fields(out)["converged"] == "5"


def test_summary_counts_exhausted_runs(data_dir):
    from mdlearn.identification import IdentificationConfig, run_identification

    fam = ingest.load_family(data_dir / "family_three.json")
    traces = [run_identification(fam, IdentificationConfig(n_max=200, seed=s)) for s in range(3)]
    s = dict(kv.split("=") for kv in cli._summary(traces, [7], 3).split())
    assert s["runs"] == "4" and s["exhausted"] == "1" and s["fraction"] == "0.7500"


def three_row_report(tmp_path):
    rep = tmp_path / "r.csv"
    ingest._write_csv(rep, ingest.REPORT_COLUMNS, [
        ["b", "10", "0.1", "100", "10", "10", "-1", "1"],
        ["a", "10", "0", "inf", "5", "inf", "-inf", "0.69897"],
        ["c", "10", "0.5", "20", "20", "1", "0", "1.30103"],
    ])
    return rep


def test_plot_data_bars(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["plot-data", "--report", three_row_report(tmp_path), "--out", out]) == 0
    rows = read_csv(out)
    assert [(r["figure"], r["label"], r["y"]) for r in rows] == [
        ("years", "c", "1"), ("years", "b", "10"), ("years", "a", "inf")]


def test_plot_data_scatter_and_svg(tmp_path, data_dir, report, capsys):
    out, svg = tmp_path / "p.csv", tmp_path / "p.svg"
    code, _, err = run(["plot-data", "--report", report, "--judgments", data_dir / "judgments.csv",
                        "--out", out, "--svg", svg], capsys)
    assert code == 0 and err == ""
    rows = read_csv(out)
    learn = [r for r in rows if r["figure"] == "learnability"]
    assert len(learn) == 17 and len([r for r in rows if r["figure"] == "entrenchment"]) == 17
    years = [float(r["y"]) for r in rows if r["figure"] == "years"]
    assert years == sorted(years)
    assert svg.read_text().count('class="marker"') == len(learn)


def test_plot_data_svg_skips_unlearnable(tmp_path, capsys):
    jud = tmp_path / "j.csv"
    jud.write_text("construction_id,mean_grammatical,mean_ungrammatical,n\na,1,4,9\nb,1,3,9\nc,1,1.5,9\n")
    svg = tmp_path / "p.svg"
    code, out, err = run(["plot-data", "--report", three_row_report(tmp_path), "--judgments", jud,
                          "--svg", svg], capsys)
    assert code == 0 and "a: non-finite" in err
    assert svg.read_text().count('class="marker"') == 2
    assert out.count("\nlearnability,") == 2


@pytest.mark.parametrize("argv", [
    ["plot-data", "--report", "/nonexistent/r.csv"],
    ["learnability"],
    ["learnability", "--constructions", "x.json", "--symbols", "1"],
    ["identify", "--family", "f.json", "--delta", "1.5"],
    ["frobnicate"],
])
def test_input_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_internal_error_exit_1(monkeypatch, tmp_path, data_dir, capsys):
    def boom(*a, **k):
        raise RuntimeError("bug")

    monkeypatch.setattr(cli, "evaluate", boom)
    code, _, err = run(["learnability", "--constructions", data_dir / "constructions.json",
                        "--out", tmp_path / "r.csv"], capsys)
    assert code == 1 and "internal error" in err


def test_help_cites_defaults(capsys):
    assert cli.main(["learnability", "--help"]) == 0
    out = capsys.readouterr().out
    assert "100000" in out and "385000000" in out and "not an empirical estimate" in out
