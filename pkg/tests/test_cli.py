import json
import math
import subprocess
import sys

import pytest

from discrete_hausdorff.cli import main
from discrete_hausdorff.generators import SetSpec
from discrete_hausdorff.measure import MeasureReport
from discrete_hausdorff.sweep import (
    COLUMNS,
    ConfigError,
    SweepConfig,
    parse_delta_rule,
    rows_from_csv,
    rows_from_json,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    sweep_slopes,
)

LOG23 = math.log(2) / math.log(3)


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def cantor6(tmp_path):
    return write(tmp_path, "cantor6.json", {"id": "c6", "variant": "cantor", "lambda": "1/3", "stage": 6})


@pytest.fixture
def full(tmp_path):
    return write(tmp_path, "full.json", {"id": "full", "variant": "full"})


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


class TestDeltaRule:
    def test_forms(self):
        assert parse_delta_rule("n^-3/4")(10**4) == pytest.approx(1e-3)
        assert parse_delta_rule("n^-0.5")(100) == pytest.approx(0.1)

    @pytest.mark.parametrize("rule", ["n^2", "delta", "n^0"])
    def test_rejects(self, rule):
        with pytest.raises(ConfigError):
            parse_delta_rule(rule)


class TestSweep:
    def config(self, **kw):
        base = dict(spec=SetSpec.cantor("1/3", 6, id="c6"), scales=[3**14], s_values=[LOG23])
        base.update(kw)
        return SweepConfig(**base)

    def test_values_grow_as_delta_shrinks(self):
        rows = run_sweep(self.config(deltas=[3.0**-k for k in range(8, 12)]))
        assert [r.delta for r in rows] == sorted(r.delta for r in rows)
        values = [r.value for r in rows]
        assert values == sorted(values, reverse=True)
        (slope,) = sweep_slopes(rows).values()
        assert abs(slope - (LOG23 - 1)) <= 0.02

    def test_skipped_cell(self):
        rows = run_sweep(self.config(scales=[10, 3**8], deltas=[0.01]))
        assert rows[0].status == "skipped:grid_too_coarse" and rows[0].value is None
        assert rows[1].status == "ok"

    def test_empty_set_all_zero(self):
        rows = run_sweep(self.config(spec=SetSpec.empty(), scales=[100, 1000], deltas=[0.1, 0.01], s_values=[0.5, 1.0]))
        assert len(rows) == 8
        assert all(r.value == 0.0 and r.status == "ok" for r in rows)

    def test_delta_rule(self):
        rows = run_sweep(self.config(scales=[10**4, 10**6], delta_rule="n^-3/4"))
        assert [r.delta for r in rows] == pytest.approx([1e-3, 10**-4.5])

    def test_config_errors(self):
        with pytest.raises(ConfigError):
            self.config()
        with pytest.raises(ConfigError):
            self.config(deltas=[0.1], delta_rule="n^-1/2")
        with pytest.raises(ConfigError):
            self.config(deltas=[0.1], scales=[])
        with pytest.raises(ConfigError):
            self.config(deltas=[0.1], format="xml")

    def test_round_trip(self):
        rows = run_sweep(self.config(scales=[10, 3**10], deltas=[0.01, 0.003], s_values=[0.3, LOG23]))
        assert rows_from_csv(rows_to_csv(rows)) == rows
        assert rows_from_json(rows_to_json(rows)) == rows

    def test_csv_header(self):
        text = rows_to_csv([MeasureReport("x", 10, 0.1, 0.5, 4, "discrete_h", 0.25, 3)])
        assert text.splitlines()[0] == ",".join(COLUMNS)
        assert text.splitlines()[1] == "x,10,0.10000000000000001,0.5,4,discrete_h,0.25,3,ok"


class TestCommands:
    def test_measure_full(self, capsys, full):
        out = run_json(capsys, ["measure", "--spec", full, "--n", "1000", "--delta", "0.01", "--s", "1"])
        assert out["value"] == pytest.approx(1001 / 1000, rel=1e-15)
        assert out["kind"] == "discrete_h" and out["halo"] == 32

    def test_measure_classical(self, capsys, tmp_path):
        spec = write(tmp_path, "q.json", {"id": "q", "variant": "interval_union", "intervals": [[0, 0.25]]})
        out = run_json(capsys, ["measure", "--spec", spec, "--n", "100", "--delta", "0.5", "--s", "0.5", "--kind", "classical_cover"])
        assert out["value"] == pytest.approx(0.5)

    def test_measure_csv_to_file(self, capsys, full, tmp_path):
        dest = tmp_path / "out.csv"
        assert main(["measure", "--spec", full, "--n", "100", "--delta", "0.1", "--s", "0.5", "--format", "csv", "--out", str(dest)]) == 0
        assert capsys.readouterr().out == ""
        (row,) = rows_from_csv(dest.read_text())
        assert row.spec_id == "full" and row.n == 100

    def test_sweep_deterministic(self, capsys, cantor6):
        argv = ["sweep", "--spec", cantor6, "--n", str(3**14), "--s", str(LOG23)]
        argv += [x for k in range(8, 12) for x in ("--delta", repr(3.0**-k))]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first
        assert len(rows_from_csv(first)) == 4

    def test_sweep_config_with_override(self, capsys, tmp_path, cantor6):
        cfg = write(tmp_path, "sweep.json", {"spec": "cantor6.json", "scales": [3**10], "deltas": [0.01], "s_values": [0.5], "format": "csv"})
        rows = run_json(capsys, ["sweep", "--config", cfg, "--format", "json"])
        assert len(rows) == 1 and rows[0]["spec_id"] == "c6"

    def test_dimension(self, capsys, full):
        out = run_json(capsys, ["dimension", "--spec", full])
        assert abs(out["dimension"] - 1) <= 0.02
        assert out["reference"] is None and len(out["schedule"]) == 4

    def test_compare(self, capsys, tmp_path):
        spec = write(tmp_path, "half.json", {"id": "half", "variant": "interval_union", "intervals": [[0, 0.5]]})
        out = run_json(capsys, ["compare", "--spec", spec, "--n", "100000"])
        assert abs(out["counting_estimate"] - 1) <= 0.02
        assert abs(out["box_count_estimate"] - 1) <= 0.02
        assert out["reference"] == 1.0

    def test_lebesgue(self, capsys, tmp_path):
        spec = write(tmp_path, "half.json", {"id": "half", "variant": "interval_union", "intervals": [[0, 0.5]]})
        out = run_json(capsys, ["lebesgue", "--spec", spec, "--n", "10000"])
        assert out["halo"] == 100
        assert out["lower"] == pytest.approx(4901 / 10001) and out["upper"] == pytest.approx(5101 / 10001)


class TestExitCodes:
    def test_missing_spec(self, tmp_path):
        assert main(["measure", "--spec", str(tmp_path / "nope.json"), "--n", "10", "--delta", "0.1", "--s", "1"]) == 2

    def test_malformed_spec(self, tmp_path):
        spec = write(tmp_path, "bad.json", {"variant": "cantor", "lambda": 2, "stage": 1})
        assert main(["measure", "--spec", spec, "--n", "10", "--delta", "0.1", "--s", "1"]) == 2

    def test_bad_s(self, full):
        assert main(["measure", "--spec", full, "--n", "10", "--delta", "0.1", "--s", "1.5"]) == 2

    def test_missing_delta(self, full):
        assert main(["measure", "--spec", full, "--n", "10", "--s", "1"]) == 2

    def test_too_coarse(self, full):
        assert main(["measure", "--spec", full, "--n", "10", "--delta", "0.01", "--s", "1"]) == 3

    def test_no_bracket(self, tmp_path):
        spec = write(tmp_path, "r.json", {"id": "r", "variant": "point_family", "kind": "reciprocals", "count": 2})
        argv = ["dimension", "--spec", spec, "--halo-rule", "fixed:5"]
        for n, d, st in ((10**4, 0.1, 2), (2 * 10**4, 0.05, 50), (4 * 10**4, 0.025, 1000)):
            argv += ["--n", str(n), "--delta", str(d), "--stage", str(st)]
        assert main(argv) == 4

    def test_sweep_skips_instead_of_failing(self, capsys, full):
        assert main(["sweep", "--spec", full, "--n", "10", "--n", "1000", "--delta", "0.01", "--s", "1"]) == 0
        rows = rows_from_csv(capsys.readouterr().out)
        assert [r.status for r in rows] == ["skipped:grid_too_coarse", "ok"]


def test_console_script(full):
    proc = subprocess.run(
        [sys.executable, "-m", "discrete_hausdorff", "measure", "--spec", full, "--n", "100", "--delta", "0.1", "--s", "1", "-v"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["value"] == pytest.approx(1.01)
