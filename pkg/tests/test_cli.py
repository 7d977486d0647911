import json

import numpy as np
import pytest

from dcjac.cli import main
from util import ABS_DOC


@pytest.fixture
def abs_problem(tmp_path):
    path = tmp_path / "abs.json"
    path.write_text(json.dumps(ABS_DOC))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestJac:
    def test_default_min_convention(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["jac", "-p", abs_problem, "-x", "0", "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["xi"] == [[-1.0]]
        assert payload["gamma_count"] == 1
        assert payload["y_bar"] == [-1.0]

    def test_max_convention(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["jac", "-p", abs_problem, "-x", "0", "--convention", "max", "--json"])
        assert code == 0
        assert json.loads(out)["xi"] == [[1.0]]

    def test_selection_chains_reported(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["jac", "-p", abs_problem, "-x", "0", "--json"])
        comp = json.loads(out)["selection"]["components"][0]
        assert comp["g_active"] == [0, 1]
        assert comp["g_chain"] == [[0, 1], [1]]
        assert comp["chosen_g"] == 1

    def test_schema_error_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"n": 1}')
        code, _, err = run(capsys, ["jac", "-p", str(bad), "-x", "0"])
        assert code == 2
        assert "missing required key" in err

    def test_missing_file_exits_2(self, capsys):
        code, _, _ = run(capsys, ["jac", "-p", "/nonexistent.json", "-x", "0"])
        assert code == 2

    def test_expression_error_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "syntax.json"
        bad.write_text(json.dumps({"n": 1, "m": 1, "components": [{"g": ["x1 +"]}]}))
        code, _, err = run(capsys, ["jac", "-p", str(bad), "-x", "0"])
        assert code == 2
        assert "offset" in err

    def test_domain_error_exits_3(self, capsys, tmp_path):
        prob = tmp_path / "log.json"
        prob.write_text(json.dumps({"n": 1, "m": 1, "components": [{"g": ["log(x1)"]}]}))
        code, _, err = run(capsys, ["jac", "-p", str(prob), "-x", "-1"])
        assert code == 3
        assert "log" in err

    def test_no_problem_source_exits_2(self, capsys):
        code, _, err = run(capsys, ["jac", "-x", "0"])
        assert code == 2
        assert "no problem" in err


class TestVerify:
    def test_abs_passes_with_hull(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["verify", "-p", abs_problem, "-x", "0", "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True
        hull = payload["checks"]["hull_membership"]
        assert hull["member"] is True
        assert hull["profiles_found"] == 2
        for name in ("witness_validity", "cone_linearity", "limit_inclusion"):
            assert payload["checks"][name]["status"] == "pass"

    def test_random_affine_instance(self, capsys):
        code, out, _ = run(
            capsys,
            ["verify", "--random", "n=3,m=2,pieces=4,seed=7", "-x", "0,0,0", "--json"],
        )
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_curved_instance_skips_hull(self, capsys, tmp_path):
        prob = tmp_path / "curved.json"
        prob.write_text(
            json.dumps({"n": 1, "m": 1, "components": [{"g": ["sin(x1)", "x1 - 1"]}]})
        )
        code, out, _ = run(capsys, ["verify", "-p", str(prob), "-x", "0.2", "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["checks"]["hull_membership"] == {
            "status": "skipped",
            "reason": "non-affine",
        }
        assert payload["passed"] is True

    def test_broken_tolerance_fails_with_exit_1(self, capsys, tmp_path):
        # an absurd tie tolerance merges non-coinciding gradients; the
        # verifiers catch the broken selection
        prob = tmp_path / "tie.json"
        prob.write_text(json.dumps({"n": 1, "m": 1, "components": [{"g": ["x1", "0.5*x1"]}]}))
        code, out, _ = run(
            capsys, ["verify", "-p", str(prob), "-x", "0", "--tol-tie", "1.0", "--json"]
        )
        assert code == 1
        payload = json.loads(out)
        assert payload["passed"] is False
        assert payload["checks"]["cone_linearity"]["status"] == "fail"

    def test_point_dimension_mismatch_is_error(self, capsys, abs_problem):
        code = main(["verify", "-p", abs_problem, "-x", "0,0"])
        assert code != 0


class TestNewton:
    def test_converges_exit_0(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["newton", "-p", abs_problem, "--x0", "1", "--json"])
        assert code == 0
        lines = out.strip().splitlines()
        summary = json.loads(lines[-1])
        assert summary["status"] == "converged"
        assert abs(summary["solution"][0]) <= 1e-10
        assert all(json.loads(line)["iter"] == k for k, line in enumerate(lines[:-1]))

    def test_singular_exit_4(self, capsys, tmp_path):
        prob = tmp_path / "flat.json"
        prob.write_text(json.dumps({"n": 1, "m": 1, "components": [{"g": ["1"]}]}))
        code, out, _ = run(capsys, ["newton", "-p", str(prob), "--json"])
        assert code == 4

    def test_not_converged_exit_5(self, capsys, tmp_path):
        prob = tmp_path / "cubic.json"
        prob.write_text(json.dumps({"n": 1, "m": 1, "components": [{"g": ["x1^3"]}]}))
        code, out, _ = run(
            capsys, ["newton", "-p", str(prob), "--x0", "1", "--max-iters", "5", "--json"]
        )
        assert code == 5
        assert json.loads(out.strip().splitlines()[-1])["status"] == "max_iters"

    def test_ncp_from_csv(self, capsys, tmp_path):
        m_csv = tmp_path / "M.csv"
        q_csv = tmp_path / "q.csv"
        m_csv.write_text("2,1\n1,2\n")
        q_csv.write_text("-3,-3\n")
        code, out, _ = run(
            capsys, ["newton", "--ncp", str(m_csv), str(q_csv), "--x0", "0,0", "--json"]
        )
        assert code == 0
        summary = json.loads(out.strip().splitlines()[-1])
        assert summary["status"] == "converged"
        assert summary["complementarity_residual"] <= 1e-8
        np.testing.assert_allclose(summary["solution"], [1.0, 1.0], atol=1e-10)


class TestDD:
    def test_abs_direction_slopes(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["dd", "-p", abs_problem, "-x", "0", "-y", "1", "--json"])
        assert code == 0
        payload = json.loads(out)
        assert payload["dd"] == [1.0]
        assert abs(payload["finite_diff"][0] - 1.0) <= 1e-6

    def test_text_mode(self, capsys, abs_problem):
        code, out, _ = run(capsys, ["dd", "-p", abs_problem, "-x", "0", "-y", "-2"])
        assert code == 0
        assert "dd = [2.0]" in out


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ["jac", "--random", "n=3,m=2,pieces=4,seed=7", "-x", "0,0,0", "--json"],
            ["verify", "--random", "n=3,m=2,pieces=4,seed=7", "-x", "0,0,0", "--json"],
            ["verify", "--random", "n=4,m=3,pieces=5,seed=11", "-x", "0,0,0,0", "--json"],
        ],
    )
    def test_repeated_runs_byte_identical(self, capsys, argv):
        code1, out1, _ = run(capsys, argv)
        code2, out2, _ = run(capsys, argv)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_newton_trace_byte_identical(self, capsys, abs_problem):
        argv = ["newton", "-p", abs_problem, "--x0", "1", "--json"]
        _, out1, _ = run(capsys, argv)
        _, out2, _ = run(capsys, argv)
        assert out1 == out2
