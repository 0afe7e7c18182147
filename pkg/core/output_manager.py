import os
import sys
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import pandas as pd

from core.exact_linear import fstr
from utils.logger import logger


@dataclass
class Verdict:
    """A derived statement together with the result it relies on."""
    statement: str
    value: object
    citation: str

    def record(self) -> Dict[str, object]:
        return {"statement": self.statement, "value": self.value, "citation": self.citation}


@dataclass
class Report:
    command: str
    invocation: List[str]
    version: str
    ring: Optional[Dict[str, object]] = None
    tables: Dict[str, List[Dict[str, object]]] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)
    extras: Dict[str, object] = field(default_factory=dict)

    def add_table(self, name: str, rows: List[Dict[str, object]]) -> None:
        self.tables[name] = rows

    def cite(self, statement: str, value, citation: str) -> None:
        self.verdicts.append(Verdict(statement, value, citation))


def _plain(value):
    """JSON-ready copy with Fractions as exact strings."""
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else fstr(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if hasattr(value, "item"):
        return value.item()
    return str(value)


class OutputManager:
    """
    Renders reports to stdout as text tables or structured JSON.

    Args:
        output_format: "text" or "json".
        output_dir: when set, also writes <command>.json and one CSV per table there.
        stream: destination for the rendered report (stdout by default).
    """

    def __init__(self, output_format: str = "text", output_dir: Optional[str] = None, stream=None):
        self.output_format = output_format
        self.output_dir = output_dir
        self._stream = stream

    @property
    def stream(self):
        return self._stream if self._stream is not None else sys.stdout

    def payload(self, report: Report) -> Dict[str, object]:
        return _plain({
            "command": report.command,
            "invocation": report.invocation,
            "version": report.version,
            "ring": report.ring,
            "tables": report.tables,
            "verdicts": [v.record() for v in report.verdicts],
            **({"extras": report.extras} if report.extras else {}),
        })

    def render_json(self, report: Report) -> str:
        return json.dumps(self.payload(report), indent=2, sort_keys=True, ensure_ascii=False)

    def _frame(self, rows: List[Dict[str, object]]) -> pd.DataFrame:
        frame = pd.DataFrame(_plain(rows))
        return frame.fillna("")

    def render_text(self, report: Report) -> str:
        lines = [f"{report.command} (version {report.version})"]
        if report.ring:
            lines.append("ring: " + ", ".join(f"{k}={_plain(v)}" for k, v in report.ring.items()))
        for name, rows in report.tables.items():
            lines.append("")
            lines.append(f"[{name}]")
            lines.append(self._frame(rows).to_string(index=False) if rows else "(empty)")
        if report.verdicts:
            lines.append("")
            lines.append("[verdicts]")
            for v in report.verdicts:
                lines.append(f"{v.statement}: {_plain(v.value)}  [{v.citation}]")
        for name, value in report.extras.items():
            lines.append("")
            lines.append(f"[{name}]")
            lines.append(json.dumps(_plain(value), indent=2, sort_keys=True, ensure_ascii=False))
        return "\n".join(lines)

    def emit(self, report: Report) -> None:
        text = self.render_json(report) if self.output_format == "json" else self.render_text(report)
        self.stream.write(text + "\n")
        if self.output_dir:
            self.write_files(report)

    def write_files(self, report: Report) -> List[str]:
        os.makedirs(self.output_dir, exist_ok=True)
        written = []
        path = os.path.join(self.output_dir, f"{report.command}.json")
        with open(path, "w") as f:
            f.write(self.render_json(report) + "\n")
        written.append(path)
        for name, rows in report.tables.items():
            if not rows:
                continue
            path = os.path.join(self.output_dir, f"{report.command}_{name}.csv")
            self._frame(rows).to_csv(path, index=False)
            written.append(path)
        logger.success(f"Wrote {len(written)} files to {self.output_dir}")
        return written
