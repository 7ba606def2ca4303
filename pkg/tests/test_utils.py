import csv
import json
import os

import numpy as np
import pytest

from sobolev_ext.config import (
    Config, check_exponents, check_grid_ladder, config_keys, parse_number_list, process_config,
)
from sobolev_ext.errors import ConfigError, NotRegular
from sobolev_ext.funcspace.fields import polynomial_field, sample_grid
from sobolev_ext.utils.csv_logger import CSVLogger
from sobolev_ext.utils.data import (
    get_available_domain_names, get_named_config, init_data_dir, read_lattice_csv, read_yaml_config,
    resolve_domain,
)
from sobolev_ext.utils.grid_dump import read_grid_dump, write_grid_dump
from sobolev_ext.utils.lru_cache import LRUCache
from sobolev_ext.utils.report import (
    SCHEMA, error_record, failed_checks, json_safe, make_check, make_report, read_report,
    validate_report, write_report,
)
from sobolev_ext.utils.sample_evenly import sample_evenly_indices


def test_parse_number_list():
    assert parse_number_list("1, 2,3", int) == [1, 2, 3]
    assert parse_number_list((2, 4.5)) == [2.0, 4.5]
    assert parse_number_list(3, int) == [3]
    assert parse_number_list(None) == []


def test_grid_ladder_and_exponents():
    check_grid_ladder([8, 16, 32])
    with pytest.raises(ConfigError):
        check_grid_ladder([16, 16])
    with pytest.raises(ConfigError):
        check_grid_ladder([])
    with pytest.raises(ConfigError):
        check_exponents([2.0, 1.0])


def test_process_config(monkeypatch):
    monkeypatch.setattr(Config, "p_values", "2,4")
    monkeypatch.setattr(Config, "grids", "16,32")
    process_config()
    assert Config.p_values == [2.0, 4.0]
    assert Config.grids == [16, 32]
    assert os.path.isabs(Config.out_dir)
    monkeypatch.setattr(Config, "j_max", 1)
    with pytest.raises(ConfigError) as info:
        process_config()
    assert info.value.details["key"] == "j_max"
    assert "cg_tol" in config_keys()


def test_report_schema():
    checks = [make_check("a", 1.0, 2.0, True), make_check("b", 3.0, 2.0, False)]
    report = make_report("whitney", checks, cubes=10)
    assert report["schema"] == SCHEMA
    assert report["schema_version"] == 1
    assert not report["pass"]
    assert "created_at" not in report
    assert [c["claim"] for c in failed_checks(report)] == ["b"]
    assert make_report("whitney", checks[:1])["pass"]


def test_report_validation():
    with pytest.raises(ConfigError):
        validate_report({"schema": "other"})
    with pytest.raises(ConfigError):
        validate_report(make_report("x", [{"claim": "a", "pass": True}]))
    with pytest.raises(ConfigError):
        validate_report({**make_report("x", []), "schema_version": 2})


def test_report_json_is_strict(tmp_path):
    report = make_report("glue", [make_check("finite", float("inf"), None, False)],
                         values=np.array([1.0, np.nan]))
    path = write_report(report, str(tmp_path))
    with open(path) as f:
        data = json.load(f)
    assert data["checks"][0]["measured"] == "inf"
    assert data["values"] == [1.0, "nan"]
    assert read_report(path)["command"] == "glue"
    assert json_safe({"k": np.int64(3), "b": np.bool_(True)}) == {"k": 3, "b": True}


def test_error_record():
    record = error_record(NotRegular("too dense", {"constant": 32.0}))
    assert record["schema"] == SCHEMA
    assert record["error"] == "NotRegular"
    assert record["details"] == {"constant": 32.0}
    assert NotRegular().exit_code == 2
    assert ConfigError().exit_code == 3


def test_grid_dump(tmp_path):
    field = sample_grid(polynomial_field({(1, 0): 1.0, (0, 1): 2.0}, 2), (0.0, -1.0), (1.0, 0.5), 0.25)
    path = write_grid_dump(str(tmp_path / "u.grid"), field)
    back = read_grid_dump(path)
    assert back.dims == field.dims
    assert back.h == field.h
    np.testing.assert_array_equal(back.origin, field.origin)
    np.testing.assert_array_equal(back.values, field.values)

    bad = tmp_path / "bad.grid"
    bad.write_text("GRID 2 0.5 0 0 2 2 1\n1 2 3\n")
    with pytest.raises(ConfigError):
        read_grid_dump(str(bad))
    bad.write_text("MESH\n")
    with pytest.raises(ConfigError):
        read_grid_dump(str(bad))


def test_csv_logger_keeps_the_first_header(tmp_path):
    logger = CSVLogger(tmp_path)
    assert logger.log({"command": "whitney", "pass": True}) == 1
    assert logger.log({"pass": False, "command": "glue", "extra": 1}) == 2
    with open(logger.path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows == [["command", "pass"], ["whitney", "True"], ["glue", "False"]]


def test_yaml_and_named_configs(tmp_path):
    assert read_yaml_config(None) is None
    assert read_yaml_config(str(tmp_path / "missing.yaml")) is None
    domains = os.path.join(Config.data_dir, "domains")
    os.makedirs(domains)
    with open(os.path.join(domains, "wide.yaml"), "w") as f:
        f.write("kind: rectangle\nupper: [2.0, 1.0]\n")
    assert get_available_domain_names() == ["wide"]
    assert get_named_config("domains", "wide")["kind"] == "rectangle"
    assert get_named_config("domains", "../wide") is None
    assert resolve_domain("wide")["upper"] == [2.0, 1.0]
    assert resolve_domain("koch:3") == "koch:3"
    assert resolve_domain("lshape") == "lshape"

    listed = tmp_path / "list.yaml"
    listed.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        read_yaml_config(str(listed))


def test_init_data_dir_copies_sample_domains():
    init_data_dir()
    assert "lshape" in get_available_domain_names()


def test_read_lattice_csv(tmp_path):
    path = tmp_path / "u.csv"
    rows = ["x0,x1,u"] + [f"{x},{y},{x + 2 * y}" for x in (0.25, 0.75) for y in (0.25, 0.75)]
    path.write_text("\n".join(rows) + "\n")
    field = read_lattice_csv(str(path))
    assert field.h == 0.5
    assert field.dims == (2, 2)
    np.testing.assert_allclose(field.origin, [0.0, 0.0])
    assert field.values[1, 0] == pytest.approx(0.75 + 0.5)

    path.write_text("x0,x1,u\n0,0,1\n0,1,1\n1,0,1\n")
    with pytest.raises(ConfigError):
        read_lattice_csv(str(path))
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_lattice_csv(str(path))


def test_lru_cache():
    cache = LRUCache(capacity=2)
    cache.set("a", 1)
    cache.set("b", 2)
    assert cache.get("a") == 1
    cache.set("c", 3)
    assert cache.get("b") is None
    assert cache.get_or_build("d", lambda: 4) == 4
    assert len(cache) == 2
    assert cache.hits == 1 and cache.misses == 2


def test_sample_evenly_indices():
    assert sample_evenly_indices(5, 10).tolist() == [0, 1, 2, 3, 4]
    picked = sample_evenly_indices(1000, 10)
    assert picked.tolist() == list(range(0, 1000, 100))
