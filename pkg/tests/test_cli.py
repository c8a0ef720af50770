import csv
import json
import math

import pytest

from unexciting.cli import main
from unexciting.profiles import (load_profile, make_constant, make_sech2, make_square_well, make_step, make_tanh_step,
                                 save_profile)


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, prof in [("const", make_constant(1.0)), ("jump", make_step(1.0, 16.0)),
                       ("soft", make_tanh_step(1.0, 4.0, 0.0, 0.5)), ("bump", make_sech2(1.0, 3.0, 1.0)),
                       ("well", make_square_well(3.0, math.pi / 2))]:
        paths[name] = tmp_path / f"{name}.json"
        save_profile(prof, paths[name])
    return paths


def run(tmp_path, capsys, *argv):
    out = tmp_path / "out"
    out.mkdir(exist_ok=True)
    code = main(["--out-dir", str(out), *argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err, out


class TestAnalyze:
    def test_constant(self, tmp_path, capsys, files):
        code, text, _, _ = run(tmp_path, capsys, "analyze", str(files["const"]))
        rep = json.loads(text)
        assert code == 0 and rep["occupation"] < 1e-20 and rep["degenerate"]

    def test_sudden_jump(self, tmp_path, capsys, files):
        code, text, _, out = run(tmp_path, capsys, "analyze", str(files["jump"]))
        rep = json.loads(text)
        assert code == 0 and abs(rep["occupation"] - 0.5625) < 1e-8
        assert rep["tolerances"]["verify_tol"] == 1e-6
        assert (out / "mode.csv").exists() and (out / "rho.csv").exists()

    def test_soft_step_lists_extrema(self, tmp_path, capsys, files):
        _, text, _, _ = run(tmp_path, capsys, "analyze", "--no-series", str(files["soft"]))
        rep = json.loads(text)
        assert rep["delta"] > 0 and len(rep["extrema"]) >= 3
        assert rep["extrema"][0]["t"] == pytest.approx(7.785879586158152, abs=1e-8)

    def test_csv_format(self, tmp_path, capsys, files):
        code, text, _, _ = run(tmp_path, capsys, "--format", "csv", "analyze", "--no-series", str(files["jump"]))
        rows = dict(csv.reader(text.splitlines()))
        assert code == 0 and abs(float(rows["occupation"]) - 0.5625) < 1e-8

    def test_deterministic(self, tmp_path, capsys, files):
        run(tmp_path, capsys, "analyze", str(files["soft"]))
        first = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
        run(tmp_path, capsys, "analyze", str(files["soft"]))
        second = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
        assert first == second

    def test_missing_file_exit_2(self, tmp_path, capsys):
        code, _, err, _ = run(tmp_path, capsys, "analyze", str(tmp_path / "nope.json"))
        assert code == 2 and err

    def test_malformed_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"segments": 3}')
        assert run(tmp_path, capsys, "analyze", str(bad))[0] == 2

    def test_potential_rejected(self, tmp_path, capsys, files):
        assert run(tmp_path, capsys, "analyze", str(files["well"]))[0] == 2

    def test_wronskian_failure_exit_3(self, tmp_path, capsys, files):
        assert run(tmp_path, capsys, "--rtol", "1e-3", "analyze", str(files["soft"]))[0] == 3


class TestDesign:
    def write(self, tmp_path, spec):
        p = tmp_path / "rho.json"
        p.write_text(json.dumps(spec))
        return p

    def test_omega_ramp(self, tmp_path, capsys):
        spec = self.write(tmp_path, {"kind": "omega_ramp", "omega_minus": 1.0, "omega_plus": 2.0, "tau": 2.0})
        code, text, err, out = run(tmp_path, capsys, "design", str(spec))
        rep = json.loads(text)
        assert code == 0 and rep["unexciting"] and not err
        prof = load_profile(out / "design_profile.json")
        assert prof.omega_in_sq == pytest.approx(1.0) and prof.omega_out_sq == pytest.approx(4.0)

    def test_constant(self, tmp_path, capsys):
        spec = self.write(tmp_path, {"kind": "constant", "rho": 0.5})
        code, text, _, _ = run(tmp_path, capsys, "design", str(spec))
        rep = json.loads(text)
        assert code == 0 and rep["omega_in_sq"] == rep["omega_out_sq"] == pytest.approx(16.0)

    def test_rough_junction_warns(self, tmp_path, capsys):
        spec = self.write(tmp_path, {"kind": "poly", "tau": 1.0, "coefficients": [1.0, 0.1]})
        code, _, err, out = run(tmp_path, capsys, "design", str(spec))
        assert code == 0 and "jumps" in err
        assert (out / "design_profile.json").exists()

    def test_unknown_kind(self, tmp_path, capsys):
        assert run(tmp_path, capsys, "design", str(self.write(tmp_path, {"kind": "spline"})))[0] == 2


class TestComplete:
    def test_symmetric(self, tmp_path, capsys, files):
        code, text, _, out = run(tmp_path, capsys, "complete", str(files["soft"]), "--extremum", "1")
        rep = json.loads(text)
        assert code == 0 and rep["occupation"] < 1e-6
        assert load_profile(out / "complete_profile.json").omega_out_sq == 1.0

    def test_general(self, tmp_path, capsys, files):
        code, text, _, _ = run(tmp_path, capsys, "complete", str(files["soft"]), "--target-omega", "3")
        rep = json.loads(text)
        assert code == 0 and rep["occupation"] < 1e-6 and rep["omega_out_sq"] == pytest.approx(9.0)

    def test_pass_through(self, tmp_path, capsys):
        spec = tmp_path / "rho.json"
        spec.write_text(json.dumps({"kind": "omega_ramp", "omega_minus": 1.0, "omega_plus": 2.0, "tau": 2.0}))
        run(tmp_path, capsys, "design", str(spec), "--out", str(tmp_path / "sta.json"))
        code, text, err, _ = run(tmp_path, capsys, "complete", str(tmp_path / "sta.json"))
        assert code == 0 and "notice" in err and json.loads(text)["passed_through"]

    def test_bad_index(self, tmp_path, capsys, files):
        assert run(tmp_path, capsys, "complete", str(files["soft"]), "--extremum", "-1")[0] == 2


class TestScatter:
    def test_single_energy(self, tmp_path, capsys, files):
        code, text, _, out = run(tmp_path, capsys, "scatter", "--potential", str(files["well"]), "--energy", "6")
        rep = json.loads(text)
        assert code == 0 and rep["results"][0]["T"] >= 1 - 1e-8
        header = (out / "scatter.csv").read_text().splitlines()[0]
        assert header == "E,R,T,r_re,r_im,t_re,t_im"

    def test_resonance_table(self, tmp_path, capsys, files):
        code, text, _, _ = run(tmp_path, capsys, "scatter", "--potential", str(files["well"]),
                               "--scan", "0.5:14:60", "--resonances")
        rep = json.loads(text)
        assert code == 0
        assert rep["resonances"]["energies"] == pytest.approx([1.0, 6.0, 13.0], abs=1e-6)

    def test_frequency_profile_is_dualized(self, tmp_path, capsys, files):
        code, text, _, _ = run(tmp_path, capsys, "scatter", "--potential", str(files["bump"]), "--scan", "0.5:2:3")
        rep = json.loads(text)
        assert code == 0 and rep["count"] == 3 and rep["max_unitarity_defect"] < 1e-8

    def test_bad_scan(self, tmp_path, capsys, files):
        assert run(tmp_path, capsys, "scatter", "--potential", str(files["well"]), "--scan", "3:1")[0] == 2


class TestSynth:
    def test_two_solitons(self, tmp_path, capsys):
        code, text, _, out = run(tmp_path, capsys, "synth", "--kappas", "2,1", "--verify", "0.5,1,3")
        rep = json.loads(text)
        assert code == 0 and rep["verify"]["unexciting"]
        assert rep["peak_omega_sq"] == pytest.approx(7.0, rel=1e-6)
        assert rep["readback_max_error"] < 1e-9
        assert (out / "synth_omega_sq.csv").exists()

    def test_unsorted_kappas(self, tmp_path, capsys):
        assert run(tmp_path, capsys, "synth", "--kappas", "1,2")[0] == 2


class TestSqueeze:
    def test_vacuum_return(self, tmp_path, capsys):
        code, text, _, _ = run(tmp_path, capsys, "squeeze", "--r", "1", "--omega", "2",
                               "--tau", repr(2 * math.pi / 2 * 5))
        assert code == 0 and json.loads(text)["residual_squeeze"] < 1e-10

    def test_fock_table(self, tmp_path, capsys):
        code, text, _, out = run(tmp_path, capsys, "squeeze", "--r", "0.5", "--omega", "1", "--tau", "1",
                                 "--n-max", "50")
        fock = json.loads(text)["fock"]
        assert code == 0 and 1 - 1e-8 <= fock["norm"] <= 1 + 1e-15
        assert fock["mean_occupation"] == pytest.approx(math.sinh(0.5) ** 2, abs=1e-6)
        assert len((out / "fock_amplitudes.csv").read_text().splitlines()) == 52

    def test_negative_r(self, tmp_path, capsys):
        assert run(tmp_path, capsys, "squeeze", "--r", "-1", "--omega", "1", "--tau", "1")[0] == 2


class TestVerifyDuality:
    def test_pass(self, tmp_path, capsys, files):
        code, text, _, _ = run(tmp_path, capsys, "verify-duality", str(files["bump"]), str(files["const"]))
        assert code == 0 and json.loads(text)["all_pass"]

    def test_tight_tolerance_fails(self, tmp_path, capsys, files):
        code, text, err, _ = run(tmp_path, capsys, "--tol", "1e-30", "verify-duality", str(files["bump"]))
        assert code == 3 and not json.loads(text)["all_pass"] and "error" in err

    def test_unequal_plateaus(self, tmp_path, capsys, files):
        assert run(tmp_path, capsys, "verify-duality", str(files["jump"]))[0] == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0 and capsys.readouterr().out.strip()
