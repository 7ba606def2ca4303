import json
import os

import pandas as pd
import pytest

from sobolev_ext.config import Config
from sobolev_ext.errors import ConfigError
from sobolev_ext.geometry.domains import lshape
from sobolev_ext.geometry.factory import root_for
from sobolev_ext.geometry.whitney import whitney_decompose
from sobolev_ext.lib.extend import run_extend
from sobolev_ext.lib.glue import expected_verdict, run_glue
from sobolev_ext.lib.solve import load_problem, run_counterexample, run_solve
from sobolev_ext.lib.whitney import cover_frame, run_whitney
from sobolev_ext.utils.grid_dump import read_grid_dump


def out(name):
    return os.path.join(Config.out_dir, name)


def read_runs():
    return pd.read_csv(out("runs.csv"))


def test_run_whitney():
    report = run_whitney("lshape", j_max=5, probe=True)
    assert report["pass"]
    assert report["domain"]["kind"] == "L-shape"
    assert report["epsilon_delta"]["epsilon"] > 0
    cover = pd.read_csv(out("whitney_cover.csv"))
    assert list(cover.columns[:4]) == ["level", "i0", "i1", "side"]
    assert {"x0", "x1", "y0", "y1"} <= set(cover.columns)
    levels = pd.read_csv(out("whitney_levels.csv"))
    assert levels["count"].sum() == len(cover)
    assert read_runs()["command"].tolist() == ["whitney"]
    partition = pd.read_csv(out("whitney_partition.csv"))
    assert {"level", "side", "d1", "d2"} <= set(partition.columns)
    assert set(report["partition_spread"]) == {"d1", "d2"}


def test_cover_frame_has_a_row_per_cube():
    oracle = lshape()
    cover = whitney_decompose(oracle, root_for(oracle), 5)
    frame = cover_frame(cover)
    assert len(frame) == len(cover)
    assert frame.groupby("level").size().to_dict() == cover.level_counts()


def test_run_extend_by_zero():
    report = run_extend(domain="square", operator="zero", field="bump:0.5,0.5,0.2", grids="16,32")
    assert report["pass"]
    assert report["operator"] == "zero"
    dump = read_grid_dump(report["grid_dump"])
    assert dump.dims == (32, 32)
    assert len(pd.read_csv(out("extend_zero_norms.csv"))) == 2


def test_run_extend_jones():
    report = run_extend(domain="square", operator="jones", field="sine", grids="32,64", j_max=6,
                        dump=False)
    assert report["pass"], [c for c in report["checks"] if not c["pass"]]
    assert len(report["checks"]) == 3
    assert report["plan"]["small_cubes"] > 0
    assert "grid_dump" not in report
    with open(out("extend_jones.json")) as f:
        assert json.load(f)["schema"] == "sobolev-ext/report"


def test_run_extend_rejects_bad_options():
    with pytest.raises(ConfigError):
        run_extend(operator="reflect")
    with pytest.raises(ConfigError):
        run_extend(expect="flat")
    with pytest.raises(ConfigError):
        run_extend(p=1.0, grids="16,32")
    with pytest.raises(ConfigError):
        run_extend(grids="32,16")


def test_expected_glue_verdicts():
    assert expected_verdict("smooth", 2) == "matched"
    assert expected_verdict("kink", 1) == "matched"
    assert expected_verdict("kink", 2) == "mismatched"
    assert expected_verdict("jump", 1) == "mismatched"


@pytest.mark.parametrize("pair,criterion", [("smooth", "pass"), ("jump", "fail")])
def test_run_glue(pair, criterion):
    report = run_glue(pair, k=1, grids="16,32,64")
    assert report["pass"]
    assert report["criterion"] == criterion
    table = pd.read_csv(out(f"glue_{pair}_norms.csv"))
    assert "growth" in table.columns


def test_run_glue_rejects_an_unknown_expectation():
    with pytest.raises(ConfigError):
        run_glue("smooth", expect="maybe", grids="16,32")


def test_run_solve_rejects_incompatible_data():
    report = run_solve(case="neumann-constant", grids="8")
    assert report["pass"]
    assert report["checks"][0]["measured"]["compatibility"] == [pytest.approx(1.0)]
    assert os.path.isfile(out("solve_neumann-constant.json"))


def test_run_solve_manufactured():
    report = run_solve(case="sine-dirichlet", grids="8,16,32")
    assert report["pass"], [c for c in report["checks"] if not c["pass"]]
    table = pd.read_csv(out("solve_sine-dirichlet_convergence.csv"))
    assert table["grid"].tolist() == [8, 16, 32]


def test_run_solve_problem_mapping():
    problem = {"name": "poisson", "domain": "square", "dirichlet": "all", "f": 1.0}
    report = run_solve(grids="8,16", problem=problem)
    assert report["pass"]
    assert report["problem"] == "poisson"
    assert read_grid_dump(out("solve_16.grid")).dims == (17, 17)


def test_named_problems_come_from_the_data_directory():
    os.makedirs(os.path.join(Config.data_dir, "problems"))
    with open(os.path.join(Config.data_dir, "problems", "unit.yaml"), "w") as f:
        f.write("name: unit\ndomain: square\ndirichlet: all\nf: 1.0\n")
    assert load_problem("unit")["name"] == "unit"
    with pytest.raises(ConfigError):
        load_problem("missing")


def test_run_counterexample_parses_lists():
    report = run_counterexample("meyers", mu=0.5, grids="8,16", levels="10,12", solve=False)
    assert report["pass"]
    assert report["case"] == "meyers"
    assert report["threshold"] == pytest.approx(4.0)
    assert os.path.isfile(out("counterexample_meyers_shell_scans.csv"))
