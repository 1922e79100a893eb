"""CLI behaviour: outputs, formats, exit codes, determinism, figures."""

import json
import math

import pytest

from qgends.cli import RunConfig, main, run


@pytest.fixture
def tree_spec(tmp_path):
    doc = {"variant": "RadialTree", "name": "binary-quarter",
           "b": {"kind": "constant", "c": 2},
           "ell": {"kind": "geometric", "a": 1, "r": "1/4"}}
    path = tmp_path / "tree.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def interval_spec(tmp_path):
    doc = {"variant": "FiniteGraph", "edges": [["a", "b", math.pi]]}
    path = tmp_path / "interval.json"
    path.write_text(json.dumps(doc))
    return str(path)


def run_main(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_json_report(self, tree_spec, capsys):
        code, out, _ = run_main(["analyze", tree_spec], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["gaffney_status"] == "not-closed"
        assert any(t["citation"] == "Theorem 3.10(ii)" for t in doc["rule_trace"])

    def test_every_verdict_has_citation(self, tree_spec, capsys):
        _, out, _ = run_main(["analyze", tree_spec], capsys)
        doc = json.loads(out)
        assert doc["rule_trace"]
        assert all(t["citation"] for t in doc["rule_trace"])

    def test_table_format(self, tree_spec, capsys):
        code, out, _ = run_main(["analyze", tree_spec, "--format", "table"], capsys)
        assert code == 0
        assert "gaffney status" in out

    def test_malformed_spec_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"variant": "RadialTree", "b": {"kind": "constant", "c": 1},'
                       ' "ell": {"kind": "constant", "c": 1}}')
        code, _, err = run_main(["analyze", str(bad)], capsys)
        assert code == 2
        assert json.loads(err)["error"] == "InvariantError"

    def test_unreadable_file_exits_2(self, tmp_path, capsys):
        code, _, err = run_main(["analyze", str(tmp_path / "missing.json")], capsys)
        assert code == 2
        assert "error" in json.loads(err)


class TestSpectrum:
    def test_interval_dirichlet(self, interval_spec, capsys):
        code, out, _ = run_main(["spectrum", interval_spec, "--bc", "dirichlet",
                                 "--kmax", "3.5", "--depth", "1"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "index,k,lambda,multiplicity"
        lams = [float(line.split(",")[2]) for line in lines[1:]]
        assert lams == pytest.approx([1.0, 4.0, 9.0], abs=1e-9)

    def test_plot_written(self, interval_spec, tmp_path, capsys):
        figure = tmp_path / "ladder.png"
        code, _, _ = run_main(["spectrum", interval_spec, "--bc", "dirichlet",
                               "--kmax", "3.5", "--depth", "1",
                               "--plot", str(figure)], capsys)
        assert code == 0
        assert figure.stat().st_size > 0


class TestWitness:
    def test_csv_and_determinism(self, tree_spec, capsys):
        argv = ["witness", tree_spec, "--lambda", "-1", "--levels", "4"]
        code1, out1, _ = run_main(argv, capsys)
        code2, out2, _ = run_main(argv, capsys)
        assert code1 == code2 == 0
        assert out1 == out2
        header = out1.splitlines()[0].split(",")
        assert header[:4] == ["level", "lambda", "sup_norm", "boundary_residual"]

    def test_figure_alongside_csv(self, tree_spec, tmp_path, capsys):
        csv_path = tmp_path / "witness.csv"
        figure = tmp_path / "witness.png"
        code, out, _ = run_main(["witness", tree_spec, "--levels", "3",
                                 "-o", str(csv_path), "--plot", str(figure)], capsys)
        assert code == 0
        assert out == ""
        assert csv_path.read_text().startswith("level,")
        assert figure.stat().st_size > 0

    def test_numeric_failure_exit_4(self, tmp_path, capsys):
        doc = {"variant": "RadialTree",
               "b": {"kind": "constant", "c": 2},
               "ell": {"kind": "geometric", "a": 1, "r": "1/2"}}
        path = tmp_path / "divergent.json"
        path.write_text(json.dumps(doc))
        code, _, err = run_main(["witness", str(path)], capsys)
        assert code == 4
        assert json.loads(err)["error"] == "NoQualifyingSequence"


class TestTreeKernels:
    def test_rows_and_weight_export(self, tree_spec, tmp_path, capsys):
        weight_path = tmp_path / "weight.json"
        code, out, _ = run_main(["tree-kernels", tree_spec, "--count", "3",
                                 "--weight-json", str(weight_path)], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "n,end_value,energy,multiplicity"
        first = lines[1].split(",")
        assert float(first[1]) == pytest.approx(4.0 / 7.0, abs=1e-12)
        assert first[2] == "4/7"
        assert first[3] == "1"
        weight = json.loads(weight_path.read_text())
        assert weight["values"][:3] == [2, 4, 8]

    def test_wrong_family_exits_3(self, interval_spec, capsys):
        code, _, err = run_main(["tree-kernels", interval_spec], capsys)
        assert code == 3
        assert json.loads(err)["error"] == "UnsupportedFamily"


class TestComponentsAndEnds:
    def test_component_counts(self, tree_spec, capsys):
        code, out, _ = run_main(["components", tree_spec, "--radius", "5"], capsys)
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()[1:]]
        assert [int(c) for _, c in rows] == [2, 4, 8, 16, 32]

    def test_ends_report(self, tree_spec, capsys):
        code, out, _ = run_main(["ends", tree_spec], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["total"] == "uncountable"
        assert doc["has_nonfree_finite_volume"] is True

    def test_ends_dump_components(self, tree_spec, capsys):
        code, out, _ = run_main(["ends", tree_spec, "--dump-components", "4",
                                 "--format", "csv"], capsys)
        assert code == 0
        assert out.splitlines()[0] == "radius,components"


class TestRunConfig:
    def test_programmatic_run(self, tree_spec, tmp_path):
        out_path = tmp_path / "report.json"
        config = RunConfig(command="analyze", spec_path=tree_spec,
                           output_format="json", output=str(out_path))
        assert run(config) == 0
        doc = json.loads(out_path.read_text())
        assert doc["spec"] == "binary-quarter"

    def test_table_output_format(self, tree_spec, capsys):
        config = RunConfig(command="components", spec_path=tree_spec,
                           output_format="table", radius=3)
        assert run(config) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].split() == ["radius", "components"]


class TestRemainingPlots:
    def test_components_plot(self, tree_spec, tmp_path, capsys):
        figure = tmp_path / "components.png"
        code, _, _ = run_main(["components", tree_spec, "--radius", "4",
                               "--plot", str(figure)], capsys)
        assert code == 0 and figure.stat().st_size > 0

    def test_kernels_plot(self, tree_spec, tmp_path, capsys):
        figure = tmp_path / "kernels.png"
        code, _, _ = run_main(["tree-kernels", tree_spec, "--count", "4",
                               "--plot", str(figure)], capsys)
        assert code == 0 and figure.stat().st_size > 0

    def test_ends_dump_components_plot(self, tree_spec, tmp_path, capsys):
        figure = tmp_path / "dump.png"
        code, _, _ = run_main(["ends", tree_spec, "--dump-components", "4",
                               "--format", "csv", "--plot", str(figure)], capsys)
        assert code == 0 and figure.stat().st_size > 0


def test_kernel_plot_rejected_for_infinite_volume(tmp_path, capsys):
    doc = {"variant": "RadialTree", "b": {"kind": "constant", "c": 2},
           "ell": {"kind": "constant", "c": 1}}
    spec = tmp_path / "unit-tree.json"
    spec.write_text(json.dumps(doc))
    figure = tmp_path / "kernels.png"
    code, _, err = run_main(["tree-kernels", str(spec), "--plot", str(figure)],
                            capsys)
    assert code == 4
    assert not figure.exists()
