"""Analysis reports: stable text rendering and a schema-validated JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__

STATUS_PROVED = "proved"
STATUS_REFUTED = "refuted"
STATUS_UNKNOWN = "unknown"
STATUS_TRIVIAL = "trivial"

_OK_STATUSES = (STATUS_PROVED, STATUS_TRIVIAL)


@dataclass
class ClauseEntry:
    clause_id: int
    line: int
    col: int
    source: str
    vc: str
    classification: str
    status: str
    states: int = 0
    micros: int = 0
    detail: str = ""


@dataclass
class AnalysisReport:
    mode: str
    entries: list = field(default_factory=list)
    version: str = __version__

    def summary(self) -> dict:
        proved = sum(1 for e in self.entries if e.status in _OK_STATUSES)
        refuted = sum(1 for e in self.entries if e.status == STATUS_REFUTED)
        unknown = sum(1 for e in self.entries if e.status == STATUS_UNKNOWN)
        return {"total": len(self.entries), "proved": proved,
                "refuted": refuted, "unknown": unknown}

    def all_verified(self) -> bool:
        return all(e.status in _OK_STATUSES for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "mode": self.mode,
            "summary": self.summary(),
            "clauses": [
                {
                    "id": e.clause_id,
                    "span": {"line": e.line, "col": e.col},
                    "vc": e.vc,
                    "class": e.classification,
                    "status": e.status,
                    "states": e.states,
                    "micros": e.micros,
                }
                for e in sorted(self.entries, key=lambda e: e.clause_id)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False, sort_keys=True)

    def to_text(self, show_detail: bool = False) -> str:
        lines = [f"collection analysis ({self.mode} mode)"]
        for e in sorted(self.entries, key=lambda e: e.clause_id):
            lines.append(f"  clause {e.clause_id} @ {e.line}:{e.col}  "
                         f"[{e.status.upper()}]  {e.source}")
            lines.append(f"    vc: {e.vc}")
            if e.states:
                lines.append(f"    states: {e.states}")
            if show_detail and e.detail:
                for ln in e.detail.splitlines():
                    lines.append(f"    | {ln}")
        s = self.summary()
        lines.append(f"summary: {s['total']} clause(s), {s['proved']} proved, "
                     f"{s['refuted']} refuted, {s['unknown']} unknown")
        return "\n".join(lines)


JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "mode", "summary", "clauses"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "string"},
        "mode": {"type": "string", "enum": ["multiset", "set", "dlist"]},
        "summary": {
            "type": "object",
            "required": ["total", "proved", "refuted", "unknown"],
            "additionalProperties": False,
            "properties": {
                "total": {"type": "integer", "minimum": 0},
                "proved": {"type": "integer", "minimum": 0},
                "refuted": {"type": "integer", "minimum": 0},
                "unknown": {"type": "integer", "minimum": 0},
            },
        },
        "clauses": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "span", "vc", "class", "status",
                             "states", "micros"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "span": {
                        "type": "object",
                        "required": ["line", "col"],
                        "additionalProperties": False,
                        "properties": {
                            "line": {"type": "integer", "minimum": 0},
                            "col": {"type": "integer", "minimum": 0},
                        },
                    },
                    "vc": {"type": "string"},
                    "class": {"type": "string",
                              "enum": ["multiset", "set", "dlist", "trivial"]},
                    "status": {"type": "string",
                               "enum": ["proved", "refuted", "unknown",
                                        "trivial"]},
                    "states": {"type": "integer", "minimum": 0},
                    "micros": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}
