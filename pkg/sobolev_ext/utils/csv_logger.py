import csv
import datetime
import os
import secrets
import shutil
from pathlib import Path
from typing import Any, Dict, List, Union

from ..config import Config


class CSVLogger:
    """
    Appends one row per command run to a CSV file, writing the header the
    first time. Columns are fixed by the first row logged to a new file.
    """

    def __init__(self, log_dir: Union[str, Path, None] = None, filename: str = "runs.csv"):
        self.log_dir = Path(log_dir or Config.out_dir)
        self.filename = filename

    @property
    def path(self) -> Path:
        return self.log_dir / self.filename

    def log(self, row: Dict[str, Any]) -> int:
        os.makedirs(self.log_dir, exist_ok=True)
        log_filepath = self.path
        is_new = not log_filepath.exists()
        if is_new:
            headers = list(row.keys())
        else:
            with open(log_filepath, "r", newline="", encoding="utf-8") as csvfile:
                headers = next(csv.reader(csvfile), list(row.keys()))
        if not Config.deterministic and "timestamp" in headers and not row.get("timestamp"):
            row = {**row, "timestamp": datetime.datetime.now().isoformat(timespec="seconds")}
        values: List[Any] = [row.get(key, "") for key in headers]

        try:
            with open(log_filepath, "a", newline="", encoding="utf-8") as csvfile:
                writer = csv.writer(csvfile)
                if is_new:
                    writer.writerow(headers)
                writer.writerow(values)
        except OSError:
            # Some mounted filesystems refuse append mode
            random_hex = secrets.token_hex(16)
            tmp_log_filepath = Path(str(log_filepath) + f".tmp_{random_hex}")
            if not is_new:
                shutil.copyfile(log_filepath, tmp_log_filepath)
            with open(tmp_log_filepath, "a", newline="", encoding="utf-8") as csvfile:
                writer = csv.writer(csvfile)
                if is_new:
                    writer.writerow(headers)
                writer.writerow(values)
            os.replace(tmp_log_filepath, log_filepath)

        with open(log_filepath, "r", encoding="utf-8") as csvfile:
            line_count = len([None for _ in csv.reader(csvfile)]) - 1
        return line_count
