import json
import os

import pytest

import app
from sobolev_ext.config import Config
from sobolev_ext.errors import ConfigError, NotRegular
from sobolev_ext.utils.report import make_check, make_report


@pytest.fixture
def config_file(tmp_path):
    def write(text):
        path = tmp_path / "run.yaml"
        path.write_text(text)
        return str(path)
    return write


def run_command(command, params=None):
    with pytest.raises(SystemExit) as info:
        app.run(command, params or {}, None, None, None, None, None, None)
    return info.value.code


def test_setup_splits_command_and_config_keys(monkeypatch, config_file):
    monkeypatch.setattr(Config, "j_max", Config.j_max)
    path = config_file("j_max: 5\ngrids: 8,16\ndomain: lshape\n")
    params = app.setup(config=path, command_keys=["domain"])
    assert params == {"domain": "lshape"}
    assert Config.j_max == 5
    assert Config.grids == [8, 16]
    assert os.path.isfile(os.path.join(Config.data_dir, "domains", "lshape.yaml"))


def test_setup_rejects_unknown_keys(config_file):
    with pytest.raises(ConfigError) as info:
        app.setup(config=config_file("learning_rate: 3e-4\n"))
    assert info.value.details["key"] == "learning_rate"
    with pytest.raises(ConfigError):
        app.setup(config=os.path.join(Config.out_dir, "missing.yaml"))


def test_exit_codes(capsys):
    passing = make_report("whitney", [make_check("ok", 1, 1, True)])
    failing = make_report("whitney", [make_check("bad", 2, 1, False)])
    assert run_command(lambda: passing) == 0
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1]) == \
        {"command": "whitney", "pass": True}
    assert run_command(lambda: failing) == 2


def test_errors_write_a_record():
    def irregular():
        raise NotRegular("too dense", {"constant": 32.0})

    def bad_value():
        raise ValueError("not a number")

    assert run_command(irregular) == 2
    with open(os.path.join(Config.out_dir, "error.json")) as f:
        record = json.load(f)
    assert record["error"] == "NotRegular"
    assert record["details"]["constant"] == 32.0

    assert run_command(bad_value) == 3
    with open(os.path.join(Config.out_dir, "error.json")) as f:
        assert json.load(f)["error"] == "ConfigError"


def test_command_parameters_come_from_the_config(config_file):
    seen = {}

    def command(domain="square", j_max=None):
        seen.update(domain=domain, j_max=j_max)
        return make_report("whitney", [])

    path = config_file("domain: lshape\n")
    with pytest.raises(SystemExit) as info:
        app.run(command, {"domain": "square", "j_max": 3}, path, None, None, None, None, None)
    assert info.value.code == 0
    assert seen == {"domain": "lshape", "j_max": 3}
