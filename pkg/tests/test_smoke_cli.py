import json
import pathlib
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def cli(*args, module="src_cli.testbed"):
    # run from the project root so `-m src_cli...` resolves without an install
    return subprocess.run([sys.executable, "-m", module, *map(str, args)],
                          cwd=ROOT, capture_output=True, text=True)


def test_presets_listing():
    r = cli("presets", "--porcelain")
    assert r.returncode == 0
    names = [line.split("=", 1)[1] for line in r.stdout.splitlines()]
    assert len(names) == 13 and "fig2a-dos" in names


def test_validate_reports_violations():
    ok = cli("validate", ROOT / "config" / "dos_small.yaml")
    assert ok.returncode == 0 and "[ok]" in ok.stdout

    bad = cli("validate", ROOT / "config" / "broken.yaml", "--porcelain")
    assert bad.returncode == 2
    found = {line.split()[0].split("=", 1)[1] for line in bad.stdout.splitlines()}
    assert {"SubnetOverlap", "PlacementOnStorage", "ToolMismatch", "SelfAttack",
            "NonPositiveDuration", "TapOnStoragePlane"} <= found


def test_run_audit_flows_round_trip(tmp_path):
    out = tmp_path / "dos"
    r = cli("run", "--scenario", ROOT / "config" / "dos_small.yaml", "--out", out, "--porcelain")
    assert r.returncode == 0, r.stderr
    fields = dict(kv.split("=", 1) for kv in r.stdout.split())
    assert fields["ok"] == "True" and fields["mismatches"] == "0"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["audit"]["passed"] is True

    assert cli("audit", out).returncode == 0
    r = cli("flows", out)
    assert r.returncode == 0 and (out / "flows.csv").exists()

    r = cli(out, "--summary", tmp_path / "summary", module="src_cli.analyze")
    assert r.returncode == 0 and (tmp_path / "summary" / "dos_labels.csv").exists()
    r = cli(out, "--out", tmp_path / "figures", module="src_cli.figures")
    assert r.returncode == 0 and (tmp_path / "figures" / "timeline_dos.png").exists()

    # tampering is caught
    pcap = next((out / "nodes" / "wn3").glob("*_in_0.pcap"))
    pcap.write_bytes(pcap.read_bytes()[:-3])
    r = cli("audit", out)
    assert r.returncode == 3 and "[fail]" in r.stdout


def test_run_rejects_bad_input(tmp_path):
    assert cli("run", "--preset", "no-such-preset", "--out", tmp_path).returncode == 2
    assert cli("run", "--scenario", ROOT / "config" / "broken.yaml", "--out", tmp_path).returncode == 2
    assert cli("run", "--scenario", tmp_path / "missing.yaml", "--out", tmp_path).returncode == 1
    assert cli("audit", tmp_path / "nowhere").returncode == 1


def _edited_dos_small(tmp_path, old, new):
    text = (ROOT / "config" / "dos_small.yaml").read_text()
    assert old in text
    path = tmp_path / "edited.yaml"
    path.write_text(text.replace(old, new, 1))
    return path


def test_named_port_is_an_invalid_param(tmp_path):
    path = _edited_dos_small(tmp_path, "params: {rate_pps: 200}", "params: {rate_pps: 200, dport: http}")
    r = cli("validate", path, "--porcelain")
    assert r.returncode == 2 and "Traceback" not in r.stderr
    assert "code=InvalidParam" in r.stdout

    r = cli("run", "--scenario", path, "--out", tmp_path / "out")
    assert r.returncode == 2 and "Traceback" not in r.stderr


def test_scalar_ports_field_is_a_scenario_error(tmp_path):
    path = _edited_dos_small(tmp_path, "node: wn3}", "node: wn3, ports: 80}")
    r = cli("validate", path)
    assert r.returncode == 2 and "Traceback" not in r.stderr
    assert "pods[0].ports" in r.stdout
