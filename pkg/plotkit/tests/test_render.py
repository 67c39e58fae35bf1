import json
import shutil
from pathlib import Path

import pytest

from plotkit import MissingColumnError
from plotkit.cli import main
from plotkit.render import KINDS, render

GOLDEN = Path(__file__).parent / "golden"

CASES = [
    ("trajectories", GOLDEN / "run" / "log.csv", "u0_true_x"),
    ("frame-convergence", GOLDEN / "run" / "log.csv", "u0_est_x"),
    ("velocities", GOLDEN / "run" / "log.csv", "u0_true_vx"),
    ("anees", GOLDEN / "anees" / "anees.csv", "anees_pos"),
    ("comparison", GOLDEN / "sweep" / "summary.csv", "mean_dnb_steady"),
]


class TestRenderKinds:
    @pytest.mark.parametrize("kind,csv_path,probe", CASES, ids=[k for k, _, _ in CASES])
    def test_golden_render(self, kind, csv_path, probe, tmp_path):
        out = render(kind, [csv_path], tmp_path / f"{kind}.png")
        assert out.exists() and out.stat().st_size > 0

    def test_all_kinds_covered(self):
        assert sorted(k for k, _, _ in CASES) == KINDS

    @pytest.mark.parametrize("kind,csv_path,probe", CASES, ids=[k for k, _, _ in CASES])
    def test_plotted_columns_exist_in_schema(self, kind, csv_path, probe, tmp_path):
        """Rendering must fail loudly if a plotted column leaves the schema."""
        schema_path = csv_path.parent / "schema.json"
        payload = json.loads(schema_path.read_text())
        cols = payload["files"][csv_path.name]["columns"]
        kept = [c for c in cols if c["name"] != probe]
        assert len(kept) == len(cols) - 1, f"{probe} should be in the golden schema"
        stripped = tmp_path / "schema.json"
        payload["files"][csv_path.name] = {"columns": kept}
        stripped.write_text(json.dumps(payload))
        clone = tmp_path / csv_path.name
        shutil.copy(csv_path, clone)
        with pytest.raises(MissingColumnError):
            render(kind, [clone], tmp_path / "x.png", schema=stripped)


class TestCli:
    def test_cli_renders_file(self, tmp_path):
        out = tmp_path / "fig.png"
        code = main(["trajectories", "--in", str(GOLDEN / "run" / "log.csv"), "--out", str(out)])
        assert code == 0
        assert out.exists() and out.stat().st_size > 0

    def test_explicit_schema_flag(self, tmp_path):
        out = tmp_path / "fig.png"
        code = main(
            [
                "anees",
                "--in", str(GOLDEN / "anees" / "anees.csv"),
                "--schema", str(GOLDEN / "anees" / "schema.json"),
                "--out", str(out),
            ]
        )
        assert code == 0

    def test_missing_column_is_named(self, tmp_path, capsys):
        # a log without the anees columns cannot feed the anees plot
        code = main(
            [
                "anees",
                "--in", str(GOLDEN / "run" / "log.csv"),
                "--out", str(tmp_path / "x.png"),
            ]
        )
        assert code == 2
        assert "anees_pos" in capsys.readouterr().err

    def test_empty_csv_rejected(self, tmp_path, capsys):
        empty = tmp_path / "log.csv"
        empty.write_text("t,u0_true_x,u0_true_y\n")
        schema = tmp_path / "schema.json"
        schema.write_text(json.dumps({"files": {"log.csv": {"columns": [
            {"name": "t"}, {"name": "u0_true_x"}, {"name": "u0_true_y"}]}}}))
        code = main(["trajectories", "--in", str(empty), "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "no data rows" in capsys.readouterr().err

    def test_unlisted_file_rejected(self, tmp_path, capsys):
        clone = tmp_path / "renamed.csv"
        shutil.copy(GOLDEN / "run" / "log.csv", clone)
        shutil.copy(GOLDEN / "run" / "schema.json", tmp_path / "schema.json")
        code = main(["trajectories", "--in", str(clone), "--out", str(tmp_path / "x.png")])
        assert code == 2
