"""Run reports with a human text rendering and a JSON machine rendering.

A report is a config echo, a list of named tables (columns plus records), and
free-form notes. The machine form round-trips exactly through
:func:`parse_machine`, and is byte-stable for identical inputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

Cell = Any  # str | int | float | bool | None


@dataclass
class Section:
    name: str
    columns: list[str]
    records: list[list[Cell]] = field(default_factory=list)

    def add(self, *cells: Cell) -> None:
        if len(cells) != len(self.columns):
            raise ValueError(f"section {self.name}: expected {len(self.columns)} cells, got {len(cells)}")
        self.records.append(list(cells))


@dataclass
class RunReport:
    command: str
    config: dict[str, Cell]
    sections: list[Section] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    verdict: str = "ok"

    def section(self, name: str, columns: Sequence[str]) -> Section:
        sec = Section(name, list(columns))
        self.sections.append(sec)
        return sec

    def get(self, name: str) -> Section:
        for sec in self.sections:
            if sec.name == name:
                return sec
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "sections": [{"name": s.name, "columns": s.columns, "records": s.records} for s in self.sections],
            "notes": self.notes,
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, data: dict) -> RunReport:
        return cls(
            data["command"],
            dict(data["config"]),
            [Section(s["name"], list(s["columns"]), [list(r) for r in s["records"]]) for s in data["sections"]],
            list(data["notes"]),
            data["verdict"],
        )


def render_machine(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def parse_machine(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def _cell(value: Cell) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render_text(report: RunReport) -> str:
    out = [f"qwalk {report.command}"]
    out += [f"  {k}: {_cell(v)}" for k, v in report.config.items()]
    for sec in report.sections:
        out.append("")
        out.append(f"[{sec.name}]")
        if not sec.records:
            out.append("  (none)")
            continue
        cells = [[_cell(c) for c in rec] for rec in sec.records]
        widths = [max(len(col), *(len(r[i]) for r in cells)) for i, col in enumerate(sec.columns)]
        out.append("  " + "  ".join(c.ljust(w) for c, w in zip(sec.columns, widths)).rstrip())
        for r in cells:
            out.append("  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    if report.notes:
        out.append("")
        out += report.notes
    out.append("")
    out.append(f"verdict: {report.verdict}")
    return "\n".join(out) + "\n"


def render(report: RunReport, fmt: str = "text") -> str:
    if fmt == "machine":
        return render_machine(report)
    if fmt == "text":
        return render_text(report)
    raise ValueError(f"unknown report format {fmt!r}")
