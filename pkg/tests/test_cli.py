import json
import subprocess
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from arithqsm.cli import main

from conftest import DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def broken(tmp_path):
    p = tmp_path / "broken.field"
    p.write_text("{not json")
    return p


# ---------------------------------------------------------------------------
# golden exit-code matrix

GOLDEN = [
    (["zeta", "q.field", "--limit", "5"], 0),
    (["zeta", "k8_48.field", "--limit", "50", "--mask", "strict"], 3),
    (["zeta", "q.field", "--limit", "0"], 2),
    (["zeta", "q.field", "--limit", "1000001"], 2),
    (["zeta", "missing.field"], 2),
    (["equiv", "k8_3.field", "k8_48.field", "--limit", "5000"], 0),
    (["equiv", "k8_3.field", "k8_48.field", "--limit", "5000", "--exclude", "3"], 0),
    (["equiv", "gauss.field", "m2.field", "--limit", "100"], 1),
    (["equiv", "k8_3.field", "k8_48.field", "--limit", "100", "--mask", "strict"], 3),
    (["twist", "gauss.field", "-d", "5", "--limit", "500"], 0),
    (["twist", "gauss.field", "-d", "-4", "--limit", "500"], 2),
    (["twist", "gauss.field", "-d", "12", "--limit", "500"], 0),
    (["twist", "gauss.field", "-d", "20", "--limit", "500"], 2),
    (["twist", "k8_3.field", "k8_48.field", "-d", "-7", "--limit", "2000"], 0),
    (["twist", "k8_3.field", "k8_18.field", "-d", "5", "--limit", "2000"], 1),
    (["gassmann", "fano.group", "--h1", "points", "--h2", "lines"], 0),
    (["gassmann", "order32.group", "--h1", "k8_3", "--h2", "k8_48"], 0),
    (["gassmann", "fano.group", "--h1", "points", "--h2", "nope"], 2),
    (["classgroup", "-d", "-23", "--limit", "10"], 0),
    (["classgroup", "-d", "-12"], 2),
    (["classgroup", "-d", "5"], 2),
    (["qsm", "gauss.field", "--limit", "1000"], 0),
    (["qsm", "q.field", "--limit", "1000", "-d", "-4", "--gamma", "3"], 0),
    (["qsm", "gauss.field", "--beta", "1.0"], 2),
    (["qsm", "gauss.field", "--beta", "51"], 2),
    (["count", "k8_3.field", "k8_48.field", "-m", "5", "--limit", "2000"], 0),
    (["count", "gauss.field", "m2.field", "-m", "4", "--limit", "50"], 1),
    (["psi", "k8_3.field", "k8_48.field", "--limit", "500"], 0),
    (["psi", "gauss.field", "m2.field", "--limit", "100"], 1),
    (["fetch", "not-a-label"], 5),
    (["bogus"], 2),
]


@pytest.mark.parametrize("argv,code", GOLDEN, ids=[" ".join(a) for a, _ in GOLDEN])
def test_exit_code_matrix(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code, (out, err)
    if code in (0, 1) and argv[0] not in ("zeta", "fetch"):
        assert out.splitlines()[0].startswith("PASS" if code == 0 else "FAIL")


def test_broken_field_file(capsys, broken):
    code, _, err = run(capsys, "zeta", broken)
    assert code == 2 and err.startswith("error:")


def test_zeta_output(capsys):
    code, out, _ = run(capsys, "zeta", "gauss.field", "--limit", "10")
    assert code == 0
    rows = out.splitlines()[2:]
    assert [r.split(",")[1] for r in rows] == ["1", "1", "0", "1", "2", "0", "0", "1", "1", "2"]
    code, out, _ = run(capsys, "zeta", "q.field", "--limit", "5")
    assert [r.split(",")[1] for r in out.splitlines()[2:]] == ["1"] * 5


def test_gassmann_report(capsys):
    code, out, _ = run(capsys, "gassmann", "fano.group", "--h1", "points", "--h2", "lines")
    assert code == 0
    assert "conjugate,false" in out


def test_files_by_path(capsys):
    code, _, _ = run(capsys, "equiv", DATA / "gauss.field", DATA / "gauss.field", "--limit", "50")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["zeta", "k8_3.field", "--limit", "20000"],
        ["equiv", "k8_3.field", "k8_48.field", "--limit", "3000"],
        ["classgroup", "-d", "-84", "--limit", "200", "--characters"],
    ],
)
def test_threads_byte_identical(capsys, argv):
    _, a, _ = run(capsys, *argv, "--threads", "1")
    _, b, _ = run(capsys, *argv, "--threads", "4")
    assert a == b and a


def test_output_file_and_pretty(capsys, tmp_path):
    target = tmp_path / "z.csv"
    code, out, _ = run(capsys, "zeta", "gauss.field", "--limit", "10", "--output", target)
    assert code == 0 and out == ""
    assert target.read_text().splitlines()[1] == "n,a_n"
    code, out, _ = run(capsys, "count", "k8_3.field", "k8_48.field", "-m", "4", "--limit", "300", "--pretty")
    assert code == 0 and "," not in out.splitlines()[-1]


def test_console_script_subprocess():
    r = subprocess.run([sys.executable, "-m", "arithqsm.cli", "zeta", "q.field", "--limit", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.splitlines()[-1] == "3,1"


# ---------------------------------------------------------------------------
# fetch against a local stub


class Stub(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_GET(self):
        if "2.0.4.1" in self.path:
            body = json.dumps({"data": [{"label": "2.0.4.1", "coeffs": [1, 0, 1]}]}).encode()
            self.send_response(200)
        elif "9.9.9.9" in self.path:
            body = json.dumps({"data": []}).encode()
            self.send_response(200)
        elif "3.3.3.3" in self.path:
            body = b"<html>oops"
            self.send_response(200)
        else:
            body = b"not found"
            self.send_response(404)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def stub(monkeypatch):
    srv = HTTPServer(("127.0.0.1", 0), Stub)
    t = threading.Thread(target=srv.serve_forever, daemon=True)
    t.start()
    monkeypatch.setenv("ARITHQSM_DB_ENDPOINT", f"http://127.0.0.1:{srv.server_port}/api?label={{label}}")
    yield srv
    srv.shutdown()
    srv.server_close()


def test_fetch_success(capsys, stub, tmp_path):
    target = tmp_path / "f.field"
    code, out, _ = run(capsys, "fetch", "2.0.4.1", "--output", target)
    assert code == 0 and "127.0.0.1" in out
    obj = json.loads(target.read_text())
    assert obj["poly"] == [1, 0, 1] and len(obj["poly"]) - 1 == 2
    code, out, _ = run(capsys, "zeta", target, "--limit", "10")
    assert code == 0


@pytest.mark.parametrize("label,code", [("2.0.7.7", 5), ("9.9.9.9", 5), ("3.3.3.3", 4), ("bad label", 5)])
def test_fetch_errors_leave_no_file(capsys, stub, tmp_path, label, code):
    target = tmp_path / "f.field"
    got, _, _ = run(capsys, "fetch", label, "--output", target)
    assert got == code
    assert list(tmp_path.iterdir()) == []


def test_fetch_unreachable(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("ARITHQSM_DB_ENDPOINT", "http://127.0.0.1:9/api?label={label}")
    target = tmp_path / "f.field"
    code, _, err = run(capsys, "fetch", "2.0.4.1", "--output", target)
    assert code == 4 and "cannot reach" in err
    assert list(tmp_path.iterdir()) == []
