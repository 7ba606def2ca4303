import datetime
import json
import math
import os
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from ..config import Config
from ..errors import ConfigError, SobolevExtError
from ..globals import Global

SCHEMA = "sobolev-ext/report"
SCHEMA_VERSION = 1

CHECK_KEYS = ("claim", "measured", "tolerance", "pass")


def make_check(claim: str, measured: Any, tolerance: Any, passed: bool) -> Dict[str, Any]:
    return {"claim": claim, "measured": measured, "tolerance": tolerance, "pass": bool(passed)}


def make_report(command: str, checks: Sequence[Dict[str, Any]],
                **extra: Any) -> Dict[str, Any]:
    report = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "checks": list(checks),
        "pass": all(check["pass"] for check in checks),
        "seed": Config.seed,
        **extra,
    }
    if not Config.deterministic:
        report["created_at"] = datetime.datetime.now().isoformat(timespec="seconds")
        report["version"] = Global.version
    return report


def validate_report(report: Dict[str, Any]) -> Dict[str, Any]:
    if report.get("schema") != SCHEMA:
        raise ConfigError(f"Unknown report schema {report.get('schema')!r}", {"key": "schema"})
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"Unsupported schema_version {report.get('schema_version')!r}",
                          {"key": "schema_version"})
    if not isinstance(report.get("command"), str):
        raise ConfigError("Report has no command", {"key": "command"})
    checks = report.get("checks")
    if not isinstance(checks, list):
        raise ConfigError("Report checks must be a list", {"key": "checks"})
    for i, check in enumerate(checks):
        missing = [key for key in CHECK_KEYS if key not in check]
        if missing:
            raise ConfigError(f"Check {i} is missing {', '.join(missing)}",
                              {"key": "checks", "index": i, "missing": missing})
        if not isinstance(check["pass"], bool):
            raise ConfigError(f"Check {i} has a non-boolean pass", {"key": "checks", "index": i})
    return report


def json_safe(value: Any) -> Any:
    """Plain JSON types; non-finite floats become strings so the output stays strict JSON."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return json_safe(value.to_dict(orient="list"))
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if value is None or isinstance(value, str):
        return value
    return str(value)


def write_json(path: str, data: Dict[str, Any]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        json.dump(json_safe(data), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_report(report: Dict[str, Any], out_dir: Union[str, None] = None,
                 name: Union[str, None] = None) -> str:
    validate_report(report)
    out_dir = out_dir or Config.out_dir
    return write_json(os.path.join(out_dir, f"{name or report['command']}.json"), report)


def read_report(path: str) -> Dict[str, Any]:
    with open(path, "r") as f:
        return validate_report(json.load(f))


def error_record(error: SobolevExtError) -> Dict[str, Any]:
    return {"schema": SCHEMA, "schema_version": SCHEMA_VERSION, **error.to_record()}


def failed_checks(report: Dict[str, Any]) -> List[Dict[str, Any]]:
    return [check for check in report["checks"] if not check["pass"]]
