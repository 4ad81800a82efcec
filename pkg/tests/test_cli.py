import io
import json
import subprocess
import sys

import pytest

from starsep.cli import main
from starsep.errors import ManifestError, MissingLeadingPotential
from starsep.manifest import CP1, EXAMPLES, FLAT, parse_manifest

PHASE_CP1 = """\
[chart]
m = 1
mode = phase
order = 3

[potentials]
phase[-1] = "log(1+z1*w1)"

[verify]
checks = associativity, roundtrip, kappa
"""


def write(tmp_path, text, name="chart.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_example_manifests_parse():
    flat = parse_manifest(FLAT)
    assert (flat.m, flat.mode, flat.order, flat.potentials) == (1, "classifying", 3, {-1: "z1*w1"})
    cp1 = parse_manifest(CP1)
    assert cp1.potentials == {-1: "log(1+z1*w1)", 0: "-log(1+z1*w1)"}
    assert cp1.tau == (-1,)


def test_missing_leading_potential():
    with pytest.raises(MissingLeadingPotential):
        parse_manifest("[chart]\nm = 1\n[potentials]\nphi[0] = \"z1*w1\"\n")


@pytest.mark.parametrize("text, line, column", [
    ("[chart]\nm = one\n", 2, 5),
    ("[chart]\ncolour = red\n", 2, 1),
    ("[charts]\n", 1, 1),
    ("[chart]\nm = 1\nm = 2\n", 3, 1),
    ("[chart]\norder = 0\n", 2, 9),
    ("[chart]\nmode = wick\n", 2, 8),
    ("[potentials]\nphi[-1] = \"z1 +* w1\"\n", 2, 16),
    ("[potentials]\nphi[-1] = z1*w1\nphase[0] = z1\n", 3, 1),
    ("[potentials]\nphi[-1] = \"z1*w1 + f1\"\n", 2, 12),
    ("[potentials]\nphi[-1] = z1*w1\n[verify]\nchecks = involution\n", 4, 10),
    ("[potentials]\nphi[-1] = z1*w1\n[verify]\nchecks = bogus\n", 4, 10),
    ("[potentials]\nphi[-1] = z1*w1\n[reparam]\ntau = 0, 1\n", 4, 7),
    ("m = 1\n", 1, 1),
    ("[chart]\njust text\n", 2, 1),
])
def test_manifest_errors_have_positions(text, line, column):
    with pytest.raises(ManifestError) as info:
        parse_manifest(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_manifest_comments_and_quotes():
    m = parse_manifest('# head\n[chart]\norder = 2  # low\n[potentials]\nphi[-1] = "z1*w1"  # flat\n')
    assert m.order == 2 and m.potentials[-1] == "z1*w1"


def test_example_command(capsys):
    assert main(["example", "cp1"]) == 0
    assert capsys.readouterr().out == EXAMPLES["cp1"]


def test_run_flat_example(tmp_path, capsys):
    path = write(tmp_path, FLAT)
    assert main(["run", path]) == 0
    out = capsys.readouterr().out
    assert "internal order: star product to nu^4, dual potential to nu^3" in out
    assert "C_2 : (1/2) * [dzbar1^2](f) * [dz1^2](g)" in out
    assert "summary: 13/13 checks passed" in out
    assert "condition T phase form = -phase form : True" in out


def test_verify_uses_default_checks(tmp_path, capsys):
    path = write(tmp_path, "[chart]\nm = 1\n[potentials]\nphi[-1] = \"z1*w1\"\n")
    assert main(["verify", path]) == 0
    out = capsys.readouterr().out
    assert "PASS associativity" in out and "PASS roundtrip" in out
    assert "== star product ==" not in out


def test_phase_mode_recovers_classifying_form(tmp_path, capsys):
    assert main(["run", write(tmp_path, PHASE_CP1)]) == 0
    section = capsys.readouterr().out.split("== classifying form ==\n")[1].split("\n\n")[0]
    assert section.splitlines() == [
        "nu^-1 : [1,1] (1)/(z1^2*w1^2 + 2*z1*w1 + 1)",
        "nu^0 : [1,1] (-1)/(z1^2*w1^2 + 2*z1*w1 + 1)",
        "nu^1 : [1,1] 0",
        "nu^2 : [1,1] 0",
        "nu^3 : [1,1] 0",
    ]


def test_failing_check_exit_code(tmp_path, capsys):
    text = FLAT.replace("tau = -1", "tau = -1, 0, 1")
    assert main(["verify", write(tmp_path, text)]) == 1
    out = capsys.readouterr().out
    assert "FAIL involution: tau = -1*nu^1 + 1*nu^3 is not a proper involution to order 3" in out
    assert "PASS transport" in out


def test_manifest_error_exit_code(tmp_path, capsys):
    assert main(["run", write(tmp_path, "[chart]\nm = 0\n")]) == 2
    assert "line 2, column 5" in capsys.readouterr().err


def test_stage_error_exit_code(tmp_path, capsys):
    assert main(["run", write(tmp_path, "[potentials]\nphi[-1] = \"z1 + w1\"\n")]) == 2
    assert "error in stage 'geometry': DegenerateMetric" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.ini")]) == 2
    assert "cannot read manifest" in capsys.readouterr().err


def test_reports_are_deterministic(tmp_path, capsys):
    path = write(tmp_path, CP1)
    outputs = []
    for _ in range(2):
        assert main(["run", path, "--machine"]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    machine = json.loads(outputs[0].split("== machine ==\n")[1])
    assert [c["status"] for c in machine["checks"]] == ["PASS"] * 13


def test_order_override_and_report_file(tmp_path, capsys):
    path = write(tmp_path, FLAT)
    target = tmp_path / "out.txt"
    assert main(["verify", path, "--order", "2", "--report", str(target)]) == 0
    stdout = capsys.readouterr().out
    assert f"report written to {target}" in stdout
    text = target.read_text()
    assert "order: 2" in text and "PASS associativity: to order 2" in text
    assert main(["verify", path, "--order", "0"]) == 2


def test_manifest_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(FLAT))
    assert main(["verify", "-"]) == 0
    assert "summary: 13/13 checks passed" in capsys.readouterr().out


@pytest.mark.slow
def test_console_entry_point(tmp_path):
    path = write(tmp_path, FLAT)
    proc = subprocess.run([sys.executable, "-m", "starsep.cli", "verify", path], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.count("PASS") == 13
