import json
from fractions import Fraction

import numpy as np
import pytest

from torusdisc import (
    DensityImage,
    SweepRow,
    builtin_map,
    map_from_doc,
    map_to_doc,
    parse_config,
    property_frequency,
    render_density_pgm,
    rows_to_csv,
    run_sweep,
)
from torusdisc.cli import main
from torusdisc.errors import ConfigError, DomainError, UnknownNameError
from torusdisc.measures import FLOOR
from torusdisc.sweep import CACHE_ENV, CSV_HEADER

F2_DOC = {
    "compose": [
        {"shear_y": {"terms": [
            {"kind": "cos", "coef": 1 / 259, "freq": 227, "var": "x"},
            {"kind": "sin", "coef": 1 / 271, "freq": 253, "var": "x"},
        ]}},
        {"shear_x": {"terms": [
            {"kind": "cos", "coef": 1 / 287, "freq": 241, "var": "y"},
            {"kind": "sin", "coef": 1 / 263, "freq": 217, "var": "y"},
        ]}},
        {"shear_y": {"terms": [
            {"kind": "cos", "coef": 1 / 259, "freq": 227, "var": "x"},
            {"kind": "sin", "coef": 1 / 271, "freq": 253, "var": "x"},
        ]}},
        {"linear": [[1, 1], [1, 2]]},
    ]
}


def base_config(tmp_path, **overrides):
    doc = {
        "map": "identity",
        "schedule": [4, 8],
        "out": str(tmp_path / "out"),
    }
    doc.update(overrides)
    return doc


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_accepts_dict_text_and_file(tmp_path):
    doc = base_config(tmp_path)
    from_dict = parse_config(doc)
    from_text = parse_config(json.dumps(doc))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    from_file = parse_config(path)
    for cfg in (from_dict, from_text, from_file):
        assert cfg.schedule == [4, 8]
        assert cfg.map_doc == "identity"
        assert cfg.analyses["stats"] and not cfg.analyses["measure"]
        assert cfg.px == 128 and cfg.seed == 0


def test_parse_config_schedule_forms(tmp_path):
    cfg = parse_config(base_config(tmp_path, schedule={"base": 8, "multipliers": [1, 2, 4]}))
    assert cfg.schedule == [8, 16, 32]


def test_parse_config_error_paths(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config({"schedule": [4]})
    assert exc.value.path == "map"
    with pytest.raises(ConfigError) as exc:
        parse_config(base_config(tmp_path, schedule=[8, 4]))
    assert exc.value.path == "schedule"
    with pytest.raises(ConfigError) as exc:
        parse_config(base_config(tmp_path, analyses={"bogus": True}))
    assert exc.value.path == "analyses.bogus"
    with pytest.raises(ConfigError) as exc:
        parse_config(base_config(tmp_path, map={"compose": [{"shear_y": {"terms": [
            {"kind": "exp", "coef": 1, "freq": 2, "var": "x"}]}}]}))
    assert exc.value.path == "map.compose[0].shear_y.terms[0].kind"
    with pytest.raises(ConfigError) as exc:
        parse_config(base_config(tmp_path, budgets={"max_bytes": 0}))
    assert exc.value.path == "budgets.max_bytes"


def test_inline_map_doc_matches_builtin():
    assert map_from_doc(F2_DOC) == builtin_map("f2")


@pytest.mark.parametrize("name", ["identity", "anosov", "f1", "f3", "f4"])
def test_map_doc_roundtrip(name):
    f = builtin_map(name)
    assert map_from_doc(map_to_doc(f)) == f


# ---------------------------------------------------------------------------
# sweeps


def run(tmp_path, monkeypatch, **overrides):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "cache"))
    cfg = parse_config(base_config(tmp_path, **overrides))
    rows = run_sweep(cfg, write_figures=False)
    return cfg, rows


def test_run_sweep_identity(tmp_path, monkeypatch):
    cfg, rows = run(tmp_path, monkeypatch)
    assert [r.status for r in rows] == ["ok", "ok"]
    csv = (tmp_path / "out" / "rows.csv").read_text()
    lines = csv.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("4,16,16,16,1,16,0,1,0.0625,")
    assert lines[1].endswith(",ok")
    assert (tmp_path / "out" / "diagnostics.json").exists()


def test_run_sweep_density_artifacts(tmp_path, monkeypatch):
    cfg, rows = run(
        tmp_path, monkeypatch,
        map="f1", schedule=[8, 16], px=8, analyses={"measure": True},
    )
    out = tmp_path / "out"
    pgms = sorted(out.glob("density_*.pgm"))
    ppms = sorted(out.glob("density_*.ppm"))
    assert len(pgms) == 2 and len(ppms) == 2
    data = pgms[0].read_bytes()
    assert data.startswith(b"P5\n8 8\n255\n")
    assert len(data) == len(b"P5\n8 8\n255\n") + 64
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["8"]["density_px"] == 8


def test_run_sweep_capacity_skip(tmp_path, monkeypatch):
    cfg, rows = run(tmp_path, monkeypatch, budgets={"max_bytes": 1})
    assert [r.status for r in rows] == ["skipped-capacity"] * 2
    assert all(r.card_omega is None for r in rows)
    line = (tmp_path / "out" / "rows.csv").read_text().strip().split("\n")[1]
    assert line == "4,16,,,,,,,,0,skipped-capacity"


def test_run_sweep_timeout_skip(tmp_path, monkeypatch):
    cfg, rows = run(
        tmp_path, monkeypatch,
        map="f1", schedule=[64, 2048], budgets={"max_seconds": 0.001},
    )
    assert rows[0].status == "ok"
    assert rows[1].status == "skipped-timeout"


def test_run_sweep_rerun_is_byte_identical(tmp_path, monkeypatch):
    cfg, _ = run(tmp_path, monkeypatch, map="f2", schedule=[8, 16])
    first = (tmp_path / "out" / "rows.csv").read_bytes()
    run_sweep(cfg, write_figures=False)
    assert (tmp_path / "out" / "rows.csv").read_bytes() == first


def test_run_sweep_cache_hit_skips_recompute(tmp_path, monkeypatch):
    cfg, rows = run(tmp_path, monkeypatch, map="f1", schedule=[8])
    import torusdisc.sweep as sweep_mod

    def boom(*a, **kw):
        raise AssertionError("row should come from the cache")

    monkeypatch.setattr(sweep_mod, "_compute_row", boom)
    again = run_sweep(cfg, write_figures=False)
    assert again[0] == rows[0]


def test_run_sweep_figures(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "cache"))
    cfg = parse_config(base_config(tmp_path, map="anosov", schedule=[4, 8, 16]))
    run_sweep(cfg, write_figures=True)
    out = tmp_path / "out"
    assert (out / "sweep_stats.png").stat().st_size > 0
    assert (out / "recurrence_rate.png").stat().st_size > 0


# ---------------------------------------------------------------------------
# frequency diagnostics


def fake_row(k, image_card, num_cycles, card_omega):
    return SweepRow(
        k=k, q=k * k, card_omega=card_omega, num_cycles=num_cycles,
        max_cycle_len=1, image_card=image_card, stabilization_time=0,
        recurrence_rate=1.0, max_atom=Fraction(1), runtime_ms=1, status="ok",
    )


def test_property_frequency_running_average():
    rows = [
        fake_row(2, image_card=4, num_cycles=1, card_omega=4),
        fake_row(3, image_card=8, num_cycles=2, card_omega=8),
        fake_row(4, image_card=16, num_cycles=1, card_omega=16),
    ]
    assert property_frequency(rows, "is_permutation") == [(1, 1.0), (2, 0.5), (3, 2 / 3)]
    assert property_frequency(rows, "is_cyclic_permutation") == [
        (1, 1.0), (2, 0.5), (3, 2 / 3)
    ]
    assert property_frequency(rows, "omega_below(10)") == [(1, 1.0), (2, 1.0), (3, 2 / 3)]
    assert property_frequency(rows, "cycles_at_least(2)") == [(1, 0.0), (2, 0.5), (3, 1 / 3)]


def test_property_frequency_errors():
    with pytest.raises(UnknownNameError):
        property_frequency([], "no_such_predicate")
    with pytest.raises(DomainError):
        property_frequency([], "omega_below")


# ---------------------------------------------------------------------------
# image golden values


def test_pgm_uniform_golden(tmp_path):
    # every pixel carries mass 1/16384; the gray ramp puts that at byte 136
    values = np.full((128, 128), np.log10(1 / 16384))
    img = DensityImage(px=128, values=values)
    path = tmp_path / "uniform.pgm"
    n = render_density_pgm(img, path)
    data = path.read_bytes()
    assert n == len(data)
    assert data[:15] == b"P5\n128 128\n255\n"
    assert set(data[15:]) == {136}


def test_pgm_three_atom_golden(tmp_path):
    values = np.full((4, 4), FLOOR)
    for pix in ((0, 0), (1, 2), (3, 3)):
        values[pix] = np.log10(1 / 3)
    img = DensityImage(px=4, values=values)
    path = tmp_path / "atoms.pgm"
    render_density_pgm(img, path)
    payload = path.read_bytes()[len(b"P5\n4 4\n255\n"):]
    grid = np.frombuffer(payload, dtype=np.uint8).reshape(4, 4)
    assert grid[0, 0] == grid[1, 2] == grid[3, 3] == 241
    assert (grid == 0).sum() == 13


def test_ppm_header_and_size(tmp_path):
    img = DensityImage(px=4, values=np.full((4, 4), FLOOR))
    from torusdisc import render_density_ppm

    path = tmp_path / "x.ppm"
    render_density_ppm(img, path)
    data = path.read_bytes()
    assert data.startswith(b"P6\n4 4\n255\n")
    assert len(data) == len(b"P6\n4 4\n255\n") + 48
    # the floor maps to pure blue
    assert data[-3:] == bytes([0, 0, 255])


# ---------------------------------------------------------------------------
# command line


def test_cli_analyze(capsys):
    assert main(["analyze", "--map", "anosov", "--k", "8"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["q"] == 64 and out["image_card"] == 64


def test_cli_unknown_map_fails_cleanly(capsys):
    assert main(["analyze", "--map", "nope", "--k", "8"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_sweep(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "cache"))
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(base_config(tmp_path, schedule=[4, 8])))
    assert main(["sweep", "--config", str(cfg_path)]) == 0
    assert "k=4 status=ok" in capsys.readouterr().out
    assert (tmp_path / "out" / "rows.csv").exists()


def test_cli_measure_and_render(tmp_path, capsys):
    npz = tmp_path / "density.npz"
    assert main(["measure", "--map", "f1", "--k", "16", "--px", "16",
                 "--out", str(npz)]) == 0
    pgm = tmp_path / "density.pgm"
    assert main(["render", "--in", str(npz), "--out", str(pgm)]) == 0
    assert pgm.read_bytes().startswith(b"P5\n16 16\n255\n")


def test_cli_lax(capsys):
    assert main(["lax", "--map", "anosov", "--k", "16", "--eps", "0.5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["is_cyclic"] is True
    assert out["matching_d_n"] == 0.0


def test_cli_shadow(capsys):
    assert main(["shadow", "--map", "identity", "--k", "32", "--delta", "0.1",
                 "--horizon", "10", "--samples", "50"]) == 0
    assert "shadow_fraction = 1.000000" in capsys.readouterr().out
