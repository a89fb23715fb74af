"""
Tests for the command-line interface
"""
import csv
import io
import json

import pytest

from src.models import Alpha, CoherenceKind, ProbabilityVector
from src.models.records import MEASURE_COLUMNS, TrialRecord, ViolationReport
from src.services import checks
from src.services.channels import dephasing_channel
from src.storage import save_witness


def _rows(output: str):
    return list(csv.DictReader(io.StringIO(output)))


@pytest.fixture
def plus_file(write_state, plus_state):
    return write_state(plus_state, "plus.json")


@pytest.fixture
def diagonal_file(write_state):
    return write_state(ProbabilityVector([0.6, 0.4]).embed(), "diag.json")


class TestCompute:
    """Test the compute command"""

    def test_maximally_coherent_qubit(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["compute", plus_file, "--kind", "tsallis", "--alpha", "2"])

        assert result.exit_code == 0, result.output
        rows = _rows(result.output)
        assert list(rows[0]) == MEASURE_COLUMNS
        assert float(rows[0]["value"]) == pytest.approx(0.4142135, abs=1e-7)

    def test_default_rows(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["compute", plus_file])

        rows = _rows(result.output)
        assert [(row["measure"], float(row["alpha"])) for row in rows] == [
            ("tsallis", 0.5), ("tsallis", 1.0), ("tsallis", 2.0),
            ("rastegin", 0.5), ("rastegin", 1.0), ("rastegin", 2.0),
        ]

    def test_incoherent_state_is_zero(self, cli, runner, diagonal_file):
        result = runner.invoke(cli, ["compute", diagonal_file, "--kind", "tsallis", "--kind", "l1"])

        assert result.exit_code == 0
        assert all(abs(float(row["value"])) <= 1e-12 for row in _rows(result.output))

    def test_bits(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["compute", plus_file, "--kind", "tsallis", "--alpha", "1", "--units", "bits"])

        row = _rows(result.output)[0]
        assert float(row["value"]) == pytest.approx(1.0)
        assert row["units"] == "bits"

    def test_bits_leave_l1_alone(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["compute", plus_file, "--kind", "l1", "--units", "bits"])

        row = _rows(result.output)[0]
        assert float(row["value"]) == pytest.approx(1.0)
        assert row["units"] == "dimensionless"
        assert row["alpha"] == ""

    def test_json_matches_csv(self, cli, runner, plus_file):
        as_csv = _rows(runner.invoke(cli, ["compute", plus_file]).output)
        as_json = json.loads(runner.invoke(cli, ["compute", plus_file, "--format", "json"]).output)

        assert as_json["kind"] == "compute"
        assert [row["value"] for row in as_json["rows"]] == [float(row["value"]) for row in as_csv]

    def test_emit_delta(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["compute", plus_file, "--kind", "tsallis", "--alpha", "0.5", "--emit-delta"])

        delta = [float(p) for p in _rows(result.output)[0]["delta"].split(";")]
        assert delta == pytest.approx([0.5, 0.5])

    def test_out_file(self, cli, runner, plus_file, tmp_path):
        out = tmp_path / "rows.csv"
        result = runner.invoke(cli, ["compute", plus_file, "--out", str(out)])

        assert result.exit_code == 0
        assert len(_rows(out.read_text())) == 6

    def test_invalid_state_file(self, cli, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 2, "entries": [[1, 0], [0, 0], [0, 0], [1, 0]]}))

        result = runner.invoke(cli, ["compute", str(path)])

        assert result.exit_code == 2
        assert "trace" in result.output

    def test_invalid_alpha(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["compute", plus_file, "--alpha", "2.5"])

        assert result.exit_code == 2


class TestSweep:
    """Test the sweep command"""

    def test_rows_match_reference_on_maximal_state(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["sweep", plus_file, "--alpha-range", "0.5:2.0:0.5"])

        assert result.exit_code == 0, result.output
        rows = _rows(result.output)
        assert sorted({float(row["alpha"]) for row in rows}) == [0.5, 1.0, 1.5, 2.0]
        for row in rows:
            assert float(row["value"]) == pytest.approx(float(row["reference"]), abs=1e-10)

    def test_adds_alpha_one(self, cli, runner, plus_file):
        result = runner.invoke(cli, ["sweep", plus_file, "--alpha-range", "0.3:1.5:0.4"])

        alphas = [float(row["alpha"]) for row in _rows(result.output)]
        assert 1.0 in alphas
        assert alphas == sorted(alphas)

    @pytest.mark.parametrize("grid", ["0.5:2.0:0", "1.5:0.5:0.1", "a:b:c", "0.5:2.0"])
    def test_bad_range(self, cli, runner, plus_file, grid):
        result = runner.invoke(cli, ["sweep", plus_file, "--alpha-range", grid])

        assert result.exit_code == 2


class TestVerify:
    """Test the verify command"""

    def test_small_run_passes(self, cli, runner):
        result = runner.invoke(cli, ["verify", "--dim", "2", "--trials", "2", "--seed", "7"])

        assert result.exit_code == 0, result.output
        assert "Verdict: PASS" in result.output

    def test_deterministic_records(self, cli, runner, tmp_path):
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            runner.invoke(cli, ["verify", "--dim", "2", "--trials", "1", "--alpha", "0.5", "--out", str(out)])
            outputs.append(out.read_text())

        assert outputs[0] == outputs[1]
        assert outputs[0].splitlines()[0].startswith("check_name,dim,alpha")

    def test_config_file(self, cli, runner, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text(json.dumps({"dims": [2], "alphas": [1.5], "trials_per_cell": 1}))
        out = tmp_path / "records.json"

        result = runner.invoke(cli, ["verify", "--config", str(path), "--format", "json", "--out", str(out)])

        assert result.exit_code == 0, result.output
        rows = json.loads(out.read_text())["rows"]
        assert {row["dim"] for row in rows} == {2}
        assert {row["alpha"] for row in rows if row["check_name"] == "lemma1"} == {1.5}

    def test_malformed_config(self, cli, runner, tmp_path):
        path = tmp_path / "suite.json"
        path.write_text(json.dumps({"dims": [2], "trials": 1}))

        result = runner.invoke(cli, ["verify", "--config", str(path)])

        assert result.exit_code == 2

    def test_bad_tolerance(self, cli, runner):
        result = runner.invoke(cli, ["verify", "--tol", "-1"])

        assert result.exit_code == 2

    def test_failure_writes_witness(self, mocker, cli, runner, tmp_path):
        """A failing strong-monotonicity record exits 1 and replays into witness files"""
        real = checks.check_strong_monotonicity

        def failing(kind, rho, channel, alpha=None, tolerance=1e-9, p_min=1e-12):
            record = real(kind, rho, channel, alpha, tolerance, p_min)
            return TrialRecord.evaluate(record.check_name, record.lhs, record.rhs + 1.0, -1.0, tolerance,
                                        dim=record.dim, alpha=record.alpha, kind=record.kind)

        mocker.patch("src.services.checks.check_strong_monotonicity", side_effect=failing)
        witness = tmp_path / "witness"

        result = runner.invoke(cli, [
            "verify", "--dim", "2", "--trials", "1", "--alpha", "1.5", "--witness-dir", str(witness),
        ])

        assert result.exit_code == 1
        assert "Verdict: FAIL" in result.output
        assert (witness / "state.json").exists()
        assert (witness / "channel.json").exists()


class TestVerifyReplay:
    """Test verify --replay on stored witnesses"""

    def test_rastegin_witness_fails(self, cli, runner, tmp_path, qutrit_witness):
        stored = save_witness(tmp_path / "found", qutrit_witness)
        rewritten = tmp_path / "rewritten"

        result = runner.invoke(cli, ["verify", "--replay", str(stored), "--witness-dir", str(rewritten)])

        assert result.exit_code == 1
        assert "Verdict: FAIL" in result.output
        assert "Witness found:  yes" in result.output
        meta = json.loads((rewritten / "witness.json").read_text())
        assert meta["gap"] == pytest.approx(qutrit_witness.gap, rel=1e-9)

        computed = runner.invoke(cli, [
            "compute", str(rewritten / "state.json"), "--kind", "rastegin", "--alpha", repr(meta["alpha"]),
        ])
        assert computed.exit_code == 0
        assert float(_rows(computed.output)[0]["value"]) == pytest.approx(meta["c_before"], rel=1e-9)

    def test_failure_record_in_json_output(self, cli, runner, tmp_path, qutrit_witness):
        stored = save_witness(tmp_path / "found", qutrit_witness)
        out = tmp_path / "records.json"

        result = runner.invoke(cli, ["verify", "--replay", str(stored), "--format", "json", "--out", str(out)])

        assert result.exit_code == 1
        rows = json.loads(out.read_text())["rows"]
        assert [row["check_name"] for row in rows] == ["strong_monotonicity"]
        assert rows[0]["passed"] is False
        assert rows[0]["trial"] == qutrit_witness.trial

    def test_tsallis_dephasing_passes(self, cli, runner, tmp_path, plus_state):
        report = ViolationReport(
            found=True, kind=CoherenceKind.TSALLIS, alpha=Alpha(2.0), state=plus_state,
            channel=dephasing_channel(2), gap=-1.0,
        )
        stored = save_witness(tmp_path / "control", report)

        result = runner.invoke(cli, ["verify", "--replay", str(stored)])

        assert result.exit_code == 0
        assert "Verdict: PASS" in result.output

    def test_directory_without_witness(self, cli, runner, tmp_path):
        result = runner.invoke(cli, ["verify", "--replay", str(tmp_path)])

        assert result.exit_code == 2


class TestSearchViolation:
    """Test the search-violation command"""

    def test_tsallis_exhausts(self, cli, runner, tmp_path):
        result = runner.invoke(cli, [
            "search-violation", "--kind", "tsallis", "--trials", "20", "--refine-steps", "5",
            "--out", str(tmp_path / "witness"),
        ])

        assert result.exit_code == 3
        assert "Witness found:  no" in result.output
        assert not (tmp_path / "witness").exists()

    def test_rejects_small_dimension(self, cli, runner):
        result = runner.invoke(cli, ["search-violation", "--dim", "1"])

        assert result.exit_code == 2

    def test_qutrit_witness_replays_through_compute(self, cli, runner, tmp_path):
        witness = tmp_path / "witness"
        result = runner.invoke(cli, [
            "search-violation", "--dim", "3", "--seed", "20240601", "--trials", "1000",
            "--refine-steps", "200", "--out", str(witness),
        ])

        assert result.exit_code == 0
        assert "Witness found:  yes" in result.output
        meta = json.loads((witness / "witness.json").read_text())
        assert meta["found"] is True
        assert meta["gap"] > 1e-6

        computed = runner.invoke(cli, [
            "compute", str(witness / "state.json"), "--kind", "rastegin", "--alpha", repr(meta["alpha"]),
        ])
        assert computed.exit_code == 0
        assert float(_rows(computed.output)[0]["value"]) == pytest.approx(meta["c_before"], rel=1e-9)


class TestOracleCompare:
    """Test the oracle-compare command"""

    def test_small_run(self, cli, runner):
        result = runner.invoke(cli, ["oracle-compare", "--dim", "2", "--states", "2", "--alpha", "0.5", "--alpha", "2"])

        assert result.exit_code == 0, result.output
        rows = _rows(result.output)
        assert len(rows) == 4
        assert all(float(row["abs_diff"]) <= 2e-3 for row in rows)

    def test_no_states(self, cli, runner):
        result = runner.invoke(cli, ["oracle-compare", "--states", "0"])

        assert result.exit_code == 0
        assert result.output.strip() == ",".join(MEASURE_COLUMNS)

    def test_unsupported_dimension(self, cli, runner):
        result = runner.invoke(cli, ["oracle-compare", "--dim", "4"])

        assert result.exit_code == 2

    def test_alpha_one_rejected(self, cli, runner):
        result = runner.invoke(cli, ["oracle-compare", "--alpha", "1"])

        assert result.exit_code == 2

    def test_tight_bound_fails(self, cli, runner):
        result = runner.invoke(cli, [
            "oracle-compare", "--states", "1", "--alpha", "0.5", "--resolution", "1e-2", "--bound", "0",
        ])

        assert result.exit_code == 1
        assert "out of bound" in result.output


class TestCli:
    """Test the command group"""

    def test_version(self, cli, runner):
        result = runner.invoke(cli, ["--version"])

        assert result.exit_code == 0
        assert "1.0.0" in result.output

    def test_help_lists_commands(self, cli, runner):
        result = runner.invoke(cli, ["--help"])

        for name in ("compute", "sweep", "verify", "search-violation", "oracle-compare"):
            assert name in result.output
