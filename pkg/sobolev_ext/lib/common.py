import os
from typing import Any, Dict, Union

import pandas as pd

from ..config import Config
from ..utils.csv_logger import CSVLogger
from ..utils.report import write_report


def out_path(*parts: str) -> str:
    path = os.path.join(Config.out_dir, *parts)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    return path


def write_table(frame: pd.DataFrame, name: str) -> str:
    path = out_path(f"{name}.csv")
    frame.to_csv(path, index=False, float_format="%.12g")
    print(f"Wrote {path}")
    return path


def finish(report: Dict[str, Any], tables: Union[Dict[str, pd.DataFrame], None] = None,
           name: Union[str, None] = None) -> Dict[str, Any]:
    """Writes the tables and the validated JSON report, and appends the run to runs.csv."""
    name = name or report["command"]
    for key, frame in (tables or {}).items():
        write_table(frame, f"{name}_{key}")
    path = write_report(report, Config.out_dir, name)
    print(f"Wrote {path}")
    CSVLogger(Config.out_dir).log({
        "command": report["command"],
        "name": name,
        "pass": report["pass"],
        "checks": len(report["checks"]),
        "failed": sum(1 for c in report["checks"] if not c["pass"]),
        "seed": Config.seed,
        "timestamp": "",
    })
    return report
