import csv
import io
import json
import math
import subprocess
import sys

import pytest

from msrec.cli import main
from msrec import Origin, load_instance
from msrec.baselines import brute_force
from .conftest import rel_err


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def instance_file(tmp_path, capsys):
    path = tmp_path / "inst.txt"
    code, out, _ = run_cli(capsys, "gen", "--n", "6", "--seed", "9", "--out", str(path))
    assert code == 0
    return path


class TestGen:
    def test_deterministic_output(self, tmp_path, capsys):
        p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
        code1, out1, _ = run_cli(capsys, "gen", "--n", "8", "--seed", "3", "--out", str(p1))
        code2, out2, _ = run_cli(capsys, "gen", "--n", "8", "--seed", "3", "--out", str(p2))
        assert code1 == code2 == 0
        assert p1.read_bytes() == p2.read_bytes()
        assert json.loads(out1)["n"] == 8

    def test_bad_n(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "gen", "--n", "65", "--seed", "1", "--out", str(tmp_path / "x.txt")
        )
        assert code == 4
        assert err.startswith("error: invariant:")


class TestPrecompute:
    def test_writes_store_and_stats(self, instance_file, tmp_path, capsys):
        store_path = tmp_path / "store.txt"
        code, out, _ = run_cli(
            capsys, "precompute", "--instance", str(instance_file),
            "--store", str(store_path), "--l-max", "6",
        )
        assert code == 0
        stats = json.loads(out)
        assert stats["work_bound"] == 6 + 6 * 5 * 2 ** 4
        assert stats["total_enumerated"] == stats["work_bound"]
        assert store_path.exists()
        sizes = {length: s["kept_ip"] for length, s in stats["levels"].items()}
        assert sizes["3"] == math.comb(6, 3) * 3

    def test_deterministic_store(self, instance_file, tmp_path, capsys):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for path in (a, b):
            code, _, _ = run_cli(
                capsys, "precompute", "--instance", str(instance_file),
                "--store", str(path), "--l-max", "4",
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_batch_flag(self, instance_file, tmp_path, capsys):
        store_path = tmp_path / "store.txt"
        code, out, _ = run_cli(
            capsys, "precompute", "--instance", str(instance_file),
            "--store", str(store_path), "--l-max", "5", "--batch",
        )
        assert code == 0
        stats = json.loads(out)
        assert stats["kind"] == "ip_plus_batch"
        for s in stats["levels"].values():
            assert s["kept_batch"] <= s["kept_ip"]

    def test_invalid_l_max(self, instance_file, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "precompute", "--instance", str(instance_file),
            "--store", str(tmp_path / "s.txt"), "--l-max", "9",
        )
        assert code == 4
        assert "invariant" in err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run_cli(
            capsys, "precompute", "--instance", str(tmp_path / "nope.txt"),
            "--store", str(tmp_path / "s.txt"), "--l-max", "2",
        )
        assert code == 3


class TestQuery:
    @pytest.fixture()
    def store_file(self, instance_file, tmp_path, capsys):
        store_path = tmp_path / "store.txt"
        code, _, _ = run_cli(
            capsys, "precompute", "--instance", str(instance_file),
            "--store", str(store_path), "--l-max", "6",
        )
        assert code == 0
        return store_path

    def test_matches_brute_force(self, instance_file, store_file, capsys):
        code, out, _ = run_cli(
            capsys, "query", "--instance", str(instance_file),
            "--store", str(store_file), "--origin", "0.5,0.5",
            "--l-min", "1", "--l-max", "6",
        )
        assert code == 0
        got = json.loads(out)
        inst = load_instance(instance_file)
        want = brute_force(inst, Origin.from_xy(0.5, 0.5, inst), 1, 6)
        assert rel_err(got["cost"], want.cost) <= 1e-12

    def test_point_origin(self, instance_file, store_file, capsys):
        code, out, _ = run_cli(
            capsys, "query", "--instance", str(instance_file),
            "--store", str(store_file), "--origin", "2",
            "--l-min", "2", "--l-max", "3",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["count"] == len(payload["routes"]) >= 1

    def test_destination_filter(self, instance_file, store_file, capsys):
        code, out, _ = run_cli(
            capsys, "query", "--instance", str(instance_file),
            "--store", str(store_file), "--origin", "1",
            "--l-min", "2", "--l-max", "4", "--dest", "3",
        )
        assert code == 0
        for route in json.loads(out)["routes"]:
            assert route["points"][-1] == 3

    def test_bad_origin(self, instance_file, store_file, capsys):
        code, _, err = run_cli(
            capsys, "query", "--instance", str(instance_file),
            "--store", str(store_file), "--origin", "nine",
            "--l-min", "1", "--l-max", "2",
        )
        assert code == 4

    def test_missing_level(self, instance_file, tmp_path, capsys):
        store_path = tmp_path / "small.txt"
        run_cli(
            capsys, "precompute", "--instance", str(instance_file),
            "--store", str(store_path), "--l-max", "2",
        )
        code, _, err = run_cli(
            capsys, "query", "--instance", str(instance_file),
            "--store", str(store_path), "--origin", "0",
            "--l-min", "1", "--l-max", "4",
        )
        assert code == 4
        assert "level" in err

    def test_usage_error_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["query", "--origin", "1"])
        assert exc.value.code == 2


class TestVerify:
    def test_small_sweep_passes(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--n", "5", "--seeds", "2", "--trials", "4",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["mismatches"] == 0
        assert payload["checks"] > 0
        assert payload["worst_rel_error"] <= 1e-12

    def test_deterministic(self, capsys):
        results = []
        for _ in range(2):
            code, out, _ = run_cli(
                capsys, "verify", "--n", "4", "--seeds", "1", "--trials", "3",
            )
            assert code == 0
            results.append(out)
        assert results[0] == results[1]


class TestReport:
    def test_csv_shape_and_ratios(self, capsys, tmp_path):
        inst_path = tmp_path / "i.txt"
        run_cli(capsys, "gen", "--n", "6", "--seed", "11", "--out", str(inst_path))
        code, out, _ = run_cli(
            capsys, "report", "--instance", str(inst_path), "--l-max", "6",
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        by_algo = {}
        for row in rows:
            by_algo.setdefault(row["algorithm"], []).append(row)
        assert set(by_algo) == {"IP", "IBP", "LCP", "BFS-enum"}
        for row in by_algo["IP"]:
            length = int(row["length"])
            want_total = math.perm(6, length)
            assert int(row["enumerated"]) == want_total
            if length >= 3:
                want_ratio = 1.0 - 1.0 / math.factorial(length - 1)
                assert rel_err(float(row["ratio"]), want_ratio) <= 1e-12
        for row in by_algo["BFS-enum"]:
            assert row["enumerated"] == row["surviving"]
            assert float(row["ratio"]) == 0.0
        for ibp, ip in zip(by_algo["IBP"], by_algo["IP"]):
            assert int(ibp["surviving"]) <= int(ip["surviving"])
        lcp_full = [r for r in by_algo["LCP"] if int(r["length"]) == 6]
        assert float(lcp_full[0]["ratio"]) == 0.0


class TestEntryPoint:
    def test_console_script_runs(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "msrec.cli", "gen", "--n", "4", "--seed", "1",
             "--out", str(tmp_path / "i.txt")],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert json.loads(out.stdout)["n"] == 4
