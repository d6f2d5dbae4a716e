"""SVG emission and aggregate table formatting."""

import csv
import json
import xml.etree.ElementTree as ET

import pytest

from prune_lab.data import gen_synthetic
from prune_lab.harness import RunConfig, train_run
from prune_lab.nn import LrSchedule
from prune_lab.report import emit_tables, format_mean_std, format_relative_budget
from prune_lab.schedule import ScheduleKind, ScheduleSpec
from prune_lab.svg import SvgError, render_run_svg, render_schedule_svg


def parse_svg(path):
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    return root


def polyline_point_counts(root):
    ns = "{http://www.w3.org/2000/svg}"
    counts = []
    for el in root.iter(f"{ns}polyline"):
        pts = el.attrib["points"].split()
        # legend swatches are drawn as short lines, polylines are curves
        counts.append(len(pts))
    return counts


class TestScheduleSvg:
    def test_four_default_schedules(self, tmp_path):
        specs = [
            ScheduleSpec(kind, s_i=0.0, s_f=0.9)
            for kind in (ScheduleKind.ONE_CYCLE, ScheduleKind.ONE_SHOT,
                         ScheduleKind.ITERATIVE, ScheduleKind.AGP)
        ]
        out = tmp_path / "four.svg"
        render_schedule_svg(specs, 101, out)
        root = parse_svg(out)
        counts = polyline_point_counts(root)
        assert counts.count(101) == 4  # one polyline per spec, resolution vertices

    def test_beta_variation_curves(self, tmp_path):
        specs = [
            ScheduleSpec(ScheduleKind.ONE_CYCLE, s_f=0.9, alpha=14, beta=b)
            for b in (3, 5, 7)
        ]
        out = tmp_path / "beta.svg"
        render_schedule_svg(specs, 60, out)
        assert polyline_point_counts(parse_svg(out)).count(60) == 3

    def test_constant_schedule_horizontal(self, tmp_path):
        out = tmp_path / "flat.svg"
        render_schedule_svg([ScheduleSpec(ScheduleKind.AGP, s_i=0.4, s_f=0.4)], 20, out)
        root = parse_svg(out)
        ns = "{http://www.w3.org/2000/svg}"
        curve = [el for el in root.iter(f"{ns}polyline")
                 if len(el.attrib["points"].split()) == 20][0]
        ys = {p.split(",")[1] for p in curve.attrib["points"].split()}
        assert len(ys) == 1

    def test_empty_specs(self, tmp_path):
        with pytest.raises(SvgError):
            render_schedule_svg([], 10, tmp_path / "x.svg")


@pytest.fixture(scope="module")
def tiny_results():
    ds = gen_synthetic("moons", 80, 0.1, seed=2)
    cfg = RunConfig(ds, (2, 6, 2), ScheduleSpec(ScheduleKind.ONE_CYCLE, s_f=0.8),
                    epochs=4, batch_size=16, lr=LrSchedule(lr_max=0.05))
    return [train_run(cfg), train_run(RunConfig(ds, (2, 6, 2), cfg.schedule, epochs=4,
                                                batch_size=16, lr=cfg.lr, seed=1))]


class TestRunSvg:
    def test_sparsity_overlay(self, tmp_path, tiny_results):
        out = tmp_path / "sp.svg"
        render_run_svg(tiny_results[:1], "sparsity", out)
        root = parse_svg(out)
        assert polyline_point_counts(root).count(4) == 2  # target + actual

    def test_accuracy_with_mean_band(self, tmp_path, tiny_results):
        out = tmp_path / "acc.svg"
        render_run_svg(tiny_results, "accuracy", out)
        root = parse_svg(out)
        assert polyline_point_counts(root).count(4) == 3  # 2 runs + mean

    def test_lr_curve(self, tmp_path, tiny_results):
        out = tmp_path / "lr.svg"
        render_run_svg(tiny_results[:1], "lr", out)
        parse_svg(out)

    def test_empty_results(self, tmp_path):
        with pytest.raises(SvgError):
            render_run_svg([], "accuracy", tmp_path / "x.svg")


class TestFormatting:
    def test_mean_std_rounding(self):
        assert format_mean_std(93.456, 0.137) == "93.46 ± 0.14"

    def test_half_away_from_zero(self):
        assert format_mean_std(92.005, 0.125) == "92.01 ± 0.13"

    def test_relative_budget(self):
        assert format_relative_budget(1.0) == "1.00x"
        assert format_relative_budget(None) == ">max"


class TestEmitTables:
    def test_bench_csv_and_json(self, tmp_path):
        aggregates = [
            {"schedule": "one_cycle", "sparsity": 0.95, "mean_acc": 93.456,
             "std_acc": 0.137, "n_seeds": 3, "failed_seeds": []},
        ]
        csv_path, json_path = emit_tables(aggregates, tmp_path, "bench")
        rows = list(csv.reader(csv_path.open()))
        assert rows[0] == ["schedule", "sparsity", "accuracy", "n_seeds"]
        assert rows[1] == ["one_cycle", "0.95", "93.46 ± 0.14", "3"]
        payload = json.loads(json_path.read_text())
        assert payload[0]["mean_acc"] == 93.456

    def test_budget_one_cycle_row(self, tmp_path):
        aggregates = [
            {"schedule": "one_cycle", "budget_epochs": 60, "budget_steps": 1500,
             "relative_budget": 1.0, "reached": True},
            {"schedule": "iterative", "budget_epochs": None, "budget_steps": None,
             "relative_budget": None, "reached": False},
        ]
        csv_path, _ = emit_tables(aggregates, tmp_path, "budget")
        rows = list(csv.reader(csv_path.open()))
        assert rows[1][-1] == "1.00x"
        assert rows[2][-1] == ">max"

    def test_empty_sweep_header_only(self, tmp_path):
        csv_path, json_path = emit_tables([], tmp_path, "sweep")
        rows = list(csv.reader(csv_path.open()))
        assert len(rows) == 1
        assert json.loads(json_path.read_text()) == []

    def test_csv_round_trip(self, tmp_path):
        aggregates = [
            {"schedule": "agp", "sparsity": 0.9, "mean_acc": 88.8,
             "std_acc": 1.25, "n_seeds": 5, "failed_seeds": [2]},
        ]
        csv_path, _ = emit_tables(aggregates, tmp_path, "bench")
        rows = list(csv.reader(csv_path.open()))
        assert rows[1] == ["agp", "0.9", "88.80 ± 1.25", "5"]
