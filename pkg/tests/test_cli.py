import csv
import json

import pytest

from qexpander.expanders.cli import EXIT_BAD_INPUT, EXIT_FAILED, EXIT_OK, run


def run_report(tmp_path, *argv):
    out = tmp_path / "report.json"
    status = run(["--out", str(out), *argv])
    return status, json.loads(out.read_text(encoding="utf-8")) if out.exists() else None


def test_graph_analyze(tmp_path, petersen_file):
    status, report = run_report(tmp_path, "graph", "analyze", petersen_file)
    assert status == EXIT_OK
    assert report["passed"]
    assert report["results"]["lambda2"] == pytest.approx(1.0)
    assert report["results"]["cheeger"]["expansion"] == pytest.approx(1.0)


def test_graph_lift_then_channel_analyze(tmp_path, petersen_file):
    channel = tmp_path / "petersen.json"
    status, report = run_report(tmp_path, "--budget", "2", "graph", "lift", petersen_file, "--channel-out", str(channel))
    assert status == EXIT_OK
    assert report["results"]["kraus_rank"] == 3
    assert report["results"]["hq"]["lower"] == 0.0
    assert set(report["checks"]) >= {"cp", "tp", "unital", "undirected", "degree", "choi_projection", "quantum_adjacency"}

    status, report = run_report(tmp_path, "--budget", "2", "channel", "analyze", str(channel))
    assert status == EXIT_OK
    assert not report["results"]["validation"]["connected"]
    assert report["checks"]["fixed_points_equal_commutant"]


def test_group_irreps_export(tmp_path, s4_file):
    export = tmp_path / "irreps.json"
    status, report = run_report(tmp_path, "group", "irreps", s4_file, "--export", str(export))
    assert status == EXIT_OK
    assert report["results"]["dimensions"] == [1, 1, 2, 3, 3]
    assert len(json.loads(export.read_text(encoding="utf-8"))) == 5


def test_harrow(tmp_path, s4_file):
    status, report = run_report(tmp_path, "--budget", "2", "harrow", s4_file, "--set", "transpositions")
    assert status == EXIT_OK
    results = report["results"]
    assert results["cayley_lambda2"] == pytest.approx(2.0)
    assert results["cayley_bound"] == pytest.approx(1 / 3)
    assert results["kazhdan_eps"] ** 2 == pytest.approx(4 / 3)
    assert max(row["certificate"]["lambda2"] for row in results["irreps"] if "certificate" in row) == pytest.approx(1 / 3)


def test_bicrossed(tmp_path, s4_file):
    status, report = run_report(tmp_path, "bicrossed", s4_file, "(1,2,3,4)", "(1,2,3);(1,2)", "--state", "tr")
    assert status == EXIT_OK
    assert sorted(report["results"]["orbit_sizes"]) == [1, 3]
    assert len(report["results"]["orbit"]) == 3
    assert report["checks"]["mixed_unitary"]
    assert report["checks"]["composition_contraction"]


def test_bicrossed_rejects_overlapping_factors(tmp_path, s4_file):
    status, _ = run_report(tmp_path, "bicrossed", s4_file, "(1,2,3,4)", "(1,3)(2,4)")
    assert status == EXIT_BAD_INPUT


def test_dual_cayley_with_csv(tmp_path, s3_file):
    spectrum_path = tmp_path / "spectrum.csv"
    status, report = run_report(tmp_path, "--csv", str(spectrum_path), "dual-cayley", s3_file, "--irreps", "dim:2")
    assert status == EXIT_OK
    assert report["results"]["spectrum"] == pytest.approx([4, 0, 0, 0, -2, -2], abs=1e-9)
    assert report["results"]["eps"] ** 2 == pytest.approx(2.0)
    assert report["checks"]["convolution"]
    with open(spectrum_path, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 7


@pytest.mark.parametrize("mode", [[], ["--dual"]])
def test_schreier(tmp_path, s3_file, mode):
    status, report = run_report(tmp_path, "schreier", s3_file, "--subgroup", "all", *mode)
    assert status == EXIT_OK
    assert len(report["results"]["subgroups"]) == 6
    assert report["checks"]["schreier_certificates"]


def test_certify(tmp_path):
    status, report = run_report(tmp_path, "certify", "--eps", "0", "--dimHE", "5")
    assert status == EXIT_OK
    assert report["results"]["certificate"]["lambda2_bound"] == pytest.approx(1.0)

    status, report = run_report(tmp_path, "certify", "--eps", "2", "--dimHE", "1", "--lambda2", "0.5")
    assert status == EXIT_FAILED
    assert report["checks"] == {"spectral gap bound": False}
    assert report["results"]["violation"]["rhs"] == pytest.approx(-1.0)


def test_missing_file(tmp_path):
    status, report = run_report(tmp_path, "graph", "analyze", str(tmp_path / "missing.txt"))
    assert status == EXIT_BAD_INPUT
    assert report is None


def test_unknown_command():
    with pytest.raises(SystemExit):
        run(["frobnicate"])


def test_schreier_writes_weighted_adjacency_csv(tmp_path, s3_file):
    table = tmp_path / "schreier.csv"
    status, _ = run_report(tmp_path, "--csv", str(table), "schreier", s3_file, "--subgroup", "(1,2)")
    assert status == EXIT_OK
    with open(table, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["subgroup", "row", "col", "weight"]
    assert {row[0] for row in rows[1:]} == {"0"}
    weights = {}
    for _, row, _, weight in rows[1:]:
        weights[row] = weights.get(row, 0) + int(weight)
    assert weights == {"0": 3, "1": 3, "2": 3}


def test_schreier_with_symmetric_closure(tmp_path, s4_file):
    status, report = run_report(tmp_path, "schreier", s4_file, "--subgroup", "(1,2)", "--set", "sym:(1,2,3,4);(1,2)")
    assert status == EXIT_OK
    assert len(report["results"]["generating_set"]) == 3
    assert report["checks"]["schreier_certificates"]


def test_csv_without_table_writes_nothing(tmp_path):
    table = tmp_path / "nothing.csv"
    status, _ = run_report(tmp_path, "--csv", str(table), "certify", "--eps", "0", "--dimHE", "5")
    assert status == EXIT_OK
    assert not table.exists()


def test_dual_cayley_reports_connectivity(tmp_path, s3_file):
    status, report = run_report(tmp_path, "dual-cayley", s3_file, "--irreps", "dim:2")
    assert status == EXIT_OK
    assert report["results"]["connected"] is True

    status, report = run_report(tmp_path, "dual-cayley", s3_file, "--irreps", "1")
    assert status == EXIT_OK
    assert report["results"]["connected"] is False
    assert report["results"]["eps"] is None
    assert all("certificate" not in row for row in report["results"]["restricted"])


DETERMINISM_CASES = [
    ["graph", "analyze", "{petersen_file}"],
    ["--budget", "5", "graph", "lift", "{petersen_file}"],
    ["group", "irreps", "{s4_file}"],
    ["--budget", "5", "harrow", "{s4_file}"],
    ["bicrossed", "{s4_file}", "(1,2,3,4)", "(1,2,3);(1,2)"],
    ["dual-cayley", "{s3_file}", "--irreps", "dim:2"],
    ["schreier", "{s3_file}", "--subgroup", "all"],
    ["schreier", "{s3_file}", "--subgroup", "all", "--dual"],
    ["certify", "--eps", "1", "--dimHE", "2"],
]


@pytest.mark.parametrize("argv", DETERMINISM_CASES, ids=lambda argv: " ".join(a for a in argv if not a.startswith("{")))
def test_reports_are_byte_identical_apart_from_wall_time(request, capsys, argv):
    files = {name: request.getfixturevalue(name) for name in ("petersen_file", "s3_file", "s4_file")}
    arguments = [a.format(**files) for a in argv]
    outputs = []
    for _ in range(2):
        assert run(arguments) == EXIT_OK
        outputs.append([line for line in capsys.readouterr().out.splitlines() if '"wall_time"' not in line])
    assert outputs[0] == outputs[1]
