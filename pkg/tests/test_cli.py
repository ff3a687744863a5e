import csv
import json
import math

import pytest

from trocap.cli import main
from trocap.entropy import binary_entropy


def write_spec(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


PHI_SPEC = {"kind": "phi_alpha", "params": {"alpha": 0.5}, "seed": 0}
DEPHASING_Q1 = {
    "kind": "schur_multiplier",
    "params": {"group": {"kind": "cyclic", "order": 2}, "phi": [1.0, 1.0]},
    "seed": 0,
}
BLOCKS_SPEC = {"kind": "partial_trace_sum", "params": {"blocks": [[2, 2], [3, 1]]}, "seed": 0}
# amplitude damping: the dilation range is not triple-product closed
GAMMA = 0.5
AMP_DAMP = {
    "kind": "kraus",
    "params": {
        "kraus": [
            [[1.0, 0.0], [0.0, math.sqrt(1 - GAMMA)]],
            [[0.0, math.sqrt(GAMMA)], [0.0, 0.0]],
        ]
    },
    "seed": 0,
}


class TestBounds:
    def test_phi_alpha_table(self, tmp_path, capsys):
        spec = write_spec(tmp_path, PHI_SPEC)
        assert main(["bounds", spec, "--restarts", "8"]) == 0
        out = capsys.readouterr().out
        target = 1.0 - binary_entropy(0.75)
        row = next(l for l in out.splitlines() if l.startswith("Q "))
        lower, upper = float(row.split()[1]), float(row.split()[2])
        assert lower == pytest.approx(target, abs=1e-3)
        assert upper == pytest.approx(target, abs=1e-9)

    def test_noiseless_dephasing(self, tmp_path, capsys):
        spec = write_spec(tmp_path, DEPHASING_Q1)
        assert main(["bounds", spec, "--restarts", "8"]) == 0
        out = capsys.readouterr().out
        row = next(l for l in out.splitlines() if l.startswith("Q "))
        lower, upper = float(row.split()[1]), float(row.split()[2])
        assert lower == pytest.approx(1.0, abs=1e-6)
        assert upper == pytest.approx(1.0, abs=1e-9)

    def test_csv_output_deterministic(self, tmp_path, capsys):
        spec = write_spec(tmp_path, PHI_SPEC)
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["bounds", spec, "--restarts", "4", "--csv", str(out1)]) == 0
        assert main(["bounds", spec, "--restarts", "4", "--csv", str(out2)]) == 0
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()

    def test_malformed_kind(self, tmp_path, capsys):
        spec = write_spec(tmp_path, {"kind": "bogus", "params": {}})
        assert main(["bounds", spec]) == 2

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["bounds", str(path)]) == 2

    def test_invalid_symbol_exit_code(self, tmp_path, capsys):
        doc = dict(PHI_SPEC)
        doc["symbol"] = [[2.0, 0, 0, 0], [0, 2.0, 0, 0], [0, 0, 0.0, 0], [0, 0, 0, 0.0]]
        spec = write_spec(tmp_path, doc)
        assert main(["bounds", spec]) == 3

    def test_kraus_without_symbol_uses_identity(self, tmp_path, capsys):
        # valid upper bounds from the smallest triple-product-closed space
        spec = write_spec(tmp_path, AMP_DAMP)
        assert main(["bounds", spec, "--restarts", "4"]) == 0
        out = capsys.readouterr().out
        row = next(l for l in out.splitlines() if l.startswith("Q "))
        assert float(row.split()[2]) == pytest.approx(1.0, abs=1e-9)

    def test_neg_cb_entry_when_formula_applies(self, tmp_path, capsys):
        doc = {
            "kind": "schur_multiplier",
            "params": {"group": {"kind": "cyclic", "order": 2}, "phi": [1.0, 0.7]},
            "seed": 0,
        }
        spec = write_spec(tmp_path, doc)
        assert main(["bounds", spec, "--restarts", "4"]) == 0
        out = capsys.readouterr().out
        row = next(l for l in out.splitlines() if l.startswith("neg_S_cb"))
        assert float(row.split()[1]) == pytest.approx(
            1.0 - binary_entropy(0.85), abs=1e-9
        )

    def test_kraus_with_symbol_bounds_the_modified_channel(self, tmp_path, capsys):
        q = 0.6
        doc = {
            "kind": "kraus",
            "params": {"kraus": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]]},
            "symbol": [[1.0, q], [q, 1.0]],
            "seed": 0,
        }
        spec = write_spec(tmp_path, doc)
        assert main(["bounds", spec, "--restarts", "8"]) == 0
        out = capsys.readouterr().out
        row = next(l for l in out.splitlines() if l.startswith("Q "))
        target = 1.0 - binary_entropy((1.0 + q) / 2.0)
        assert float(row.split()[1]) == pytest.approx(target, abs=1e-3)
        assert float(row.split()[2]) == pytest.approx(target, abs=1e-9)

    def test_threads_match_serial(self, tmp_path, capsys):
        spec = write_spec(tmp_path, PHI_SPEC)
        assert main(["bounds", spec, "--restarts", "4", "--threads", "1"]) == 0
        serial = capsys.readouterr().out
        assert main(["bounds", spec, "--restarts", "4", "--threads", "4"]) == 0
        threaded = capsys.readouterr().out
        assert serial == threaded


class TestVerify:
    def test_dephasing_suite_passes(self, tmp_path, capsys):
        doc = {
            "kind": "schur_multiplier",
            "params": {"group": {"kind": "cyclic", "order": 2}, "phi": [1.0, 0.4]},
            "seed": 0,
        }
        spec = write_spec(tmp_path, doc)
        assert main(["verify", spec, "--suite", "local_comparison", "--samples", "25"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["passed"] is True
        assert payload[0]["samples"] == 25

    def test_identity_symbol_tight(self, tmp_path, capsys):
        spec = write_spec(tmp_path, DEPHASING_Q1)
        doc = json.loads(open(spec).read())
        doc["symbol"] = [[1.0, 0.0], [0.0, 1.0]]
        spec = write_spec(tmp_path, doc, "ident.json")
        assert main(["verify", spec, "--suite", "local_comparison", "--samples", "10"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert abs(payload[0]["worst_slack"]) <= 1e-10

    def test_missing_symbol_is_parse_error(self, tmp_path, capsys):
        spec = write_spec(tmp_path, BLOCKS_SPEC)
        assert main(["verify", spec, "--suite", "local_comparison"]) == 2

    def test_report_file_written(self, tmp_path, capsys):
        spec = write_spec(tmp_path, PHI_SPEC)
        out = tmp_path / "report.json"
        code = main(
            ["verify", spec, "--suite", "tensor_symbol", "--samples", "5", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload[0]["check"] == "tensor_symbol"


class TestRegion:
    def test_blocks_csv(self, tmp_path):
        spec = write_spec(tmp_path, BLOCKS_SPEC)
        out = tmp_path / "region.csv"
        code = main(
            [
                "region",
                spec,
                "--lambda-grid",
                "0:1:0.5",
                "--mu-grid",
                "0:1:0.5",
                "--csv",
                str(out),
            ]
        )
        assert code == 0
        rows = list(csv.DictReader(open(out)))
        # 3x3 grid, six constraints per point
        assert len(rows) == 9 * 6
        base = [r for r in rows if r["lambda"] == "0" and r["mu"] == "0"]
        c2q = next(r for r in base if r["constraint"] == "C+2Q")
        # distribution (4/13, 9/13) puts the entanglement-assisted value here
        assert float(c2q["rhs"]) == pytest.approx(math.log2(13.0), abs=1e-9)

    def test_single_block_constant_rows(self, tmp_path):
        spec = write_spec(tmp_path, {"kind": "partial_trace_sum", "params": {"blocks": [[3, 2]]}})
        out = tmp_path / "region.csv"
        assert main(["region", spec, "--csv", str(out)]) == 0
        rows = list(csv.DictReader(open(out)))
        qe = {r["rhs"] for r in rows if r["constraint"] == "Q+E"}
        assert qe == {f"{math.log2(3.0):.12g}"}

    def test_non_tro_exits_3(self, tmp_path, capsys):
        spec = write_spec(tmp_path, AMP_DAMP)
        out = tmp_path / "region.csv"
        assert main(["region", spec, "--csv", str(out)]) == 3


class TestDescribe:
    def test_phi_alpha(self, tmp_path, capsys):
        spec = write_spec(tmp_path, PHI_SPEC)
        assert main(["describe", spec]) == 0
        out = capsys.readouterr().out
        assert "dim_in: 4  dim_out: 3  dim_env: 4" in out
        assert "TRO: True" in out
        assert "(1, 2, 1)" in out

    def test_amplitude_damping_not_tro(self, tmp_path, capsys):
        spec = write_spec(tmp_path, AMP_DAMP)
        assert main(["describe", spec]) == 0
        out = capsys.readouterr().out
        assert "TRO: False" in out
        assert "witness" in out


class TestSeeds:
    def test_env_seed_used(self, tmp_path, capsys, monkeypatch):
        doc = {"kind": "phi_alpha", "params": {"alpha": 0.3}}
        spec = write_spec(tmp_path, doc)
        monkeypatch.setenv("TROCAP_SEED", "11")
        assert main(["verify", spec, "--suite", "local_comparison", "--samples", "5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["seed"] == 11

    def test_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        doc = {"kind": "phi_alpha", "params": {"alpha": 0.3}}
        spec = write_spec(tmp_path, doc)
        monkeypatch.setenv("TROCAP_SEED", "11")
        code = main(
            ["verify", spec, "--suite", "local_comparison", "--samples", "5", "--seed", "4"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["seed"] == 4
