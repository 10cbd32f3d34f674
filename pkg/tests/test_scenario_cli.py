import copy
import json

import pytest

from clmech.cli import main
from clmech.corpus import CORPUS_DICTS, bundled_corpus, corpus_scenario
from clmech.scenario import Scenario, ScenarioError

BASE = {
    "schema_version": 1,
    "name": "osc",
    "lagrangian": "0.5*m*qd^2 - 0.5*k*q^2",
    "omega0": 1.0,
    "dim": 1,
    "params": {"m": 1.0, "k": 1.0},
    "initial": {"q": [1.0], "qd": [0.0]},
    "integrator": {"h": 0.01, "t_start": 0.0, "t_end": 1.0},
    "checks": ["noether"],
}


def variant(**changes):
    raw = copy.deepcopy(BASE)
    raw.update(changes)
    return raw


class TestSchema:
    def test_valid_dict_loads(self):
        sc = Scenario.from_dict(BASE)
        assert sc.name == "osc"
        assert sc.h == 0.01
        assert sc.checks == ("noether",)

    def test_round_trip(self):
        sc = Scenario.from_dict(BASE)
        assert Scenario.from_dict(sc.to_dict()) == sc

    def test_corpus_round_trips(self):
        for sc in bundled_corpus():
            assert Scenario.from_dict(sc.to_dict()) == sc

    @pytest.mark.parametrize(
        "mutate,needle",
        [
            (lambda r: r.update(extra=1), "extra"),
            (lambda r: r.pop("omega0"), "omega0"),
            (lambda r: r["integrator"].update(tol=1e-6), "integrator.tol"),
            (lambda r: r["integrator"].pop("h"), "integrator.h"),
            (lambda r: r["initial"].update(v=[0.0]), "initial"),
            (lambda r: r.update(schema_version=2), "schema_version"),
        ],
    )
    def test_unknown_or_missing_fields_are_named(self, mutate, needle):
        raw = copy.deepcopy(BASE)
        mutate(raw)
        with pytest.raises(ScenarioError) as err:
            Scenario.from_dict(raw)
        assert needle in str(err.value)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda r: r.update(omega0=True),
            lambda r: r.update(omega0="1.0"),
            lambda r: r.update(omega0=0.0),
            lambda r: r.update(dim=0),
            lambda r: r["integrator"].update(h=-0.1),
            lambda r: r["integrator"].update(t_end=0.0),
            lambda r: r["initial"].update(q=[1.0, 2.0]),
            lambda r: r["params"].update(m=True),
        ],
    )
    def test_bad_values_rejected(self, mutate):
        raw = copy.deepcopy(BASE)
        mutate(raw)
        with pytest.raises(ScenarioError):
            Scenario.from_dict(raw)

    def test_unknown_check_name(self):
        with pytest.raises(ScenarioError):
            Scenario.from_dict(variant(checks=["vibes"]))

    def test_duplicate_check_name(self):
        with pytest.raises(ScenarioError):
            Scenario.from_dict(variant(checks=["noether", "noether"]))

    def test_expression_symbols_validated(self):
        with pytest.raises(ScenarioError):
            Scenario.from_dict(variant(lagrangian="0.5*mass*qd^2"))

    def test_expression_syntax_validated(self):
        with pytest.raises(ScenarioError):
            Scenario.from_dict(variant(lagrangian="0.5*qd^"))

    def test_momentum_initial_form(self):
        sc = Scenario.from_dict(variant(initial={"q": [1.0], "p": [0.5]}))
        assert sc.initial_p == (0.5,)
        assert sc.initial_qd is None

    def test_momentum_and_velocity_exclusive(self):
        with pytest.raises(ScenarioError):
            Scenario.from_dict(variant(initial={"q": [1.0], "qd": [0.0], "p": [0.5]}))

    def test_load_reports_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ScenarioError):
            Scenario.load(path)

    def test_corpus_names(self):
        assert len(CORPUS_DICTS) == 8
        assert corpus_scenario("free_particle").name == "free_particle"
        with pytest.raises(KeyError):
            corpus_scenario("absent")


@pytest.fixture
def scenario_file(tmp_path):
    def write(raw, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(raw), encoding="utf-8")
        return str(path)

    return write


class TestCliSimulate:
    def test_csv_to_stdout(self, scenario_file, capsys):
        assert main(["simulate", scenario_file(BASE)]) == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "t,q_1,qd_1,p_1,el_residual"
        assert len(lines) == 102

    def test_output_file_and_determinism(self, scenario_file, tmp_path):
        src = scenario_file(BASE)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", src, "-o", str(a)]) == 0
        assert main(["simulate", src, "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_momentum_initial_runs_phase_integration(self, scenario_file, capsys):
        raw = variant(initial={"q": [1.0], "p": [0.0]})
        assert main(["simulate", scenario_file(raw)]) == 0
        first = capsys.readouterr().out.splitlines()[1].split(",")
        assert float(first[3]) == 0.0  # p column starts at the given momentum

    def test_schema_error_exits_1(self, scenario_file, capsys):
        code = main(["simulate", scenario_file(variant(extra=1))])
        assert code == 1
        assert "extra" in capsys.readouterr().err

    def test_runtime_error_exits_2(self, scenario_file, capsys):
        raw = variant(lagrangian="0.5*i*(m*qd^2 - k*q^2)")  # degenerate, no closure
        assert main(["simulate", scenario_file(raw)]) == 2
        assert "closure" in capsys.readouterr().err.lower()


class TestCliDerive:
    def test_reports_structure(self, scenario_file, capsys):
        assert main(["derive", scenario_file(BASE)]) == 0
        out = capsys.readouterr().out
        assert "classification: regular" in out
        assert "momentum[0]:" in out

    def test_reports_closure_consistency(self, scenario_file, capsys):
        raw = variant(
            lagrangian="0.5*i*(m*qd^2 - k*q^2) + 0.5*i*l0*qd^2",
            params={"m": 1.0, "k": 1.0, "l0": 0.1},
            closure_mass=[-1.1],
        )
        assert main(["derive", scenario_file(raw)]) == 0
        out = capsys.readouterr().out
        assert "classification: degenerate" in out
        assert "closure-consistency: 0.09" in out
        assert "warning:" in out


class TestCliCheck:
    def test_single_suite_passes(self, scenario_file, capsys):
        assert main(["check", "noether", scenario_file(BASE)]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[-1].startswith("RESULT pass max_residual=")

    def test_all_runs_declared_suites(self, scenario_file, capsys):
        raw = variant(checks=["noether", "geometry"])
        assert main(["check", "all", scenario_file(raw)]) == 0
        out = capsys.readouterr().out
        assert "## suite noether" in out
        assert "## suite geometry" in out
        assert "## suite variation" not in out

    def test_detector_failure_exits_3(self, scenario_file, capsys):
        # a horizon this short cannot accumulate the drift the detector demands
        raw = copy.deepcopy(BASE)
        raw["integrator"] = {"h": 1e-4, "t_start": 0.0, "t_end": 1e-3}
        assert main(["check", "noether", scenario_file(raw)]) == 3
        assert "RESULT fail" in capsys.readouterr().out.splitlines()[-1]

    def test_report_file_matches_stdout(self, scenario_file, capsys, tmp_path):
        out_file = tmp_path / "report.txt"
        assert main(["check", "noether", scenario_file(BASE), "-o", str(out_file)]) == 0
        assert out_file.read_text(encoding="utf-8") == capsys.readouterr().out

    def test_seed_is_reported(self, scenario_file, capsys):
        assert main(["check", "geometry", scenario_file(BASE), "--seed", "0x123"]) == 0
        assert "# seed: 0x123" in capsys.readouterr().out

    def test_reports_are_deterministic(self, scenario_file, capsys):
        src = scenario_file(BASE)
        main(["check", "all", src])
        first = capsys.readouterr().out
        main(["check", "all", src])
        assert capsys.readouterr().out == first
