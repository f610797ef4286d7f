import io
import random
import socket
import subprocess
import sys
import time

import pytest

from mvpir import bench
from mvpir.cli import main
from mvpir.family import load_family, save_family


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_family(tmp_path, capsys):
    out = tmp_path / "f.txt"
    code, stdout, _ = run(capsys, "gen-family", "--primes", "2,3", "--k", "4", "--n", "6",
                          "--seed", "1", "--out", str(out))
    assert code == 0
    assert "S = {1, 3, 4}" in stdout
    assert "n=6 k=4 |S|=3" in stdout
    assert load_family(out).n == 6


def test_gen_family_n1(tmp_path, capsys):
    code, _, _ = run(capsys, "gen-family", "--k", "3", "--n", "1", "--out", str(tmp_path / "f"))
    assert code == 0


def test_gen_family_capacity(tmp_path, capsys):
    code, _, err = run(capsys, "gen-family", "--k", "2", "--n", "50", "--out", str(tmp_path / "f"))
    assert code == 2
    assert "largest family found has n=" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["gen-family", "--k", "x"])
    assert info.value.code == 1


def test_encode_and_audit(tmp_path, capsys, fam6_small):
    fam = tmp_path / "f.txt"
    save_family(fam6_small, fam)
    db = tmp_path / "db.bin"
    code, _, _ = run(capsys, "encode", "--family", str(fam), "--symbols", "1,0,1", "--out", str(db))
    assert code == 0 and db.read_bytes() == bytes([1, 0, 1])
    code, _, _ = run(capsys, "encode", "--family", str(fam), "--symbols", "1,2", "--out", str(db))
    assert code == 1
    code, out, _ = run(capsys, "audit", "--family", str(fam))
    assert code == 0 and "private" in out


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "--variants", "baseline-cubic", "--n-list", "")
    assert code == 0 and out == "variant,n,k,q,bytes_total,wall_ms\n"
    argv = ["bench", "--variants", "baseline-cubic,mv-2server", "--n-list", "4,8",
            "--k", "4", "--no-timing"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    rows = first.splitlines()[1:]
    mv = [r.split(",") for r in rows if r.startswith("mv-2server")]
    assert len(mv) == 2 and mv[0][4] == mv[1][4] == str(2 * 4 + 2 * 5 * 6)


def test_bench_baseline_bytes():
    rows = bench.run_bench(["baseline-cubic"], [56, 455], timing=False)
    assert [r.bytes_total for r in rows] == [2 * (8 + 9), 2 * (15 + 16)]
    buf = io.StringIO()
    bench.write_csv(rows, buf)
    assert buf.getvalue().splitlines()[1] == "baseline-cubic,56,8,2,34,0.000"


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert "det(M) = 3γ^5 + 4γ^4 + 3γ^3 + 2γ" in out
    assert "FAIL" not in out


def test_selftest_corrupted_family(tmp_path, capsys, fam6):
    fam = tmp_path / "f.txt"
    lines = fam6.to_text().splitlines()
    lines[2] = "u " + " ".join(["1"] * fam6.k)
    fam.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "selftest", "--family", str(fam))
    assert code == 4
    assert "FAIL IntegrityError" in out


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_and_get_subprocess(tmp_path, fam6):
    fam = tmp_path / "f.txt"
    save_family(fam6, fam)
    rng = random.Random(0)
    bits = [rng.randrange(2) for _ in range(fam6.n)]
    db = tmp_path / "db.bin"
    db.write_bytes(bytes(bits))
    ports = [free_port(), free_port()]
    procs = [subprocess.Popen([sys.executable, "-m", "mvpir", "serve", "--family", str(fam),
                               "--db", str(db), "--port", str(p)],
                              stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
             for p in ports]
    try:
        servers = ",".join(f"127.0.0.1:{p}" for p in ports)
        for _ in range(50):
            got = subprocess.run([sys.executable, "-m", "mvpir", "get", "--family", str(fam),
                                  "--servers", servers, "--index", "5"],
                                 capture_output=True, text=True)
            if got.returncode != 3:
                break
            time.sleep(0.2)
        assert got.returncode == 0, got.stderr
        assert f'"symbol": {bits[5]}' in got.stdout
        bad = subprocess.run([sys.executable, "-m", "mvpir", "get", "--family", str(fam),
                              "--variant", "mv-2server-order2", "--servers", servers,
                              "--index", "0"], capture_output=True, text=True)
        assert bad.returncode == 3
    finally:
        for p in procs:
            p.terminate()
            p.wait()
