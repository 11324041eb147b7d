"""Plain-text and JSON summary tables for the pipeline artifacts."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

STATS_DP = 5
CENTRALITY_DP = 4
PERCENT_DP = 2
DEFAULT_SECTIONS = ("stats", "centrality", "portfolio")


def fixed(value: float, dp: int) -> str:
    s = f"{value:.{dp}f}"
    return "0." + "0" * dp if s.startswith("-") and float(s) == 0 else s


@dataclass
class SummaryDocument:
    sections: dict = field(default_factory=dict)  # name -> {"title", "columns", "rows"}
    notices: list = field(default_factory=list)

    def to_text(self) -> str:
        out = []
        for name, sec in self.sections.items():
            out.append(sec["title"])
            out.append(_table(sec["columns"], sec["rows"]))
            for line in sec.get("footer", []):
                out.append(line)
            out.append("")
        for note in self.notices:
            out.append(f"[omitted] {note}")
        return "\n".join(out).rstrip("\n") + "\n"

    def to_json(self) -> str:
        return json.dumps({"sections": self.sections, "notices": self.notices}, sort_keys=True, indent=1) + "\n"


def _table(columns, rows) -> str:
    widths = [max(len(str(c)), *(len(str(r[k])) for r in rows)) if rows else len(str(c)) for k, c in enumerate(columns)]
    line = "  ".join(str(c).rjust(w) for c, w in zip(columns, widths))
    body = ["  ".join(str(v).rjust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join([line, "-" * len(line), *body])


def stats_section(doc: dict) -> dict:
    rows = [
        [
            fixed(r["theta"], 2),
            str(r["isolated_count"]),
            fixed(r["average_degree"], STATS_DP),
            fixed(r["diameter"], STATS_DP),
            fixed(r["density"], STATS_DP),
            fixed(r["average_clustering"], STATS_DP),
            fixed(r["average_path_length"], STATS_DP),
        ]
        for r in doc["rows"]
    ]
    return {
        "title": f"Network parameters by threshold (path metric: {doc['rows'][0]['mode'] if doc['rows'] else '-'})",
        "columns": ["Threshold", "Isolated vertex", "Average degree", "Network diameter",
                    "Graph density", "Average clustering coefficient", "Average path length"],
        "rows": rows,
    }


def centrality_section(rows: list, k: int = 8) -> dict:
    """Top-``k`` vertices by betweenness; ``rows`` holds (ticker, b, b_n)."""
    top = sorted(rows, key=lambda r: (-r[1], r[0]))[:k]
    return {
        "title": f"Top {len(top)} vertices by betweenness centrality",
        "columns": ["Ticker", "B", "B_N"],
        "rows": [[t, fixed(b, 2), fixed(bn, CENTRALITY_DP)] for t, b, bn in top],
    }


def portfolio_section(rows: list, meta: dict) -> dict:
    """``rows`` holds (ticker, es, weight) in fractions; rendered as percentages."""
    total = sum(w for _, _, w in rows)
    footer = [f"Status: {meta.get('status', '?')}"]
    if meta.get("objective") is not None:
        footer.append(f"Objective ES: {fixed(100 * meta['objective'], PERCENT_DP)}%")
    if meta.get("achieved_return") is not None:
        footer.append(f"Achieved return: {fixed(100 * meta['achieved_return'], PERCENT_DP)}%")
    return {
        "title": "Optimal portfolio with minimum expected shortfall",
        "columns": ["Ticker", "ES (%)", "Weight (%)"],
        "rows": [[t, fixed(100 * e, PERCENT_DP), fixed(100 * w, PERCENT_DP)] for t, e, w in rows]
        + [["Total", "", fixed(100 * total, PERCENT_DP)]],
        "footer": footer,
    }


def backtest_section(rows: list) -> dict:
    return {
        "title": "Backtest by interval",
        "columns": ["Start", "End", "Book", "Return (%)", "Daily risk (%)"],
        "rows": [[s, e, b, fixed(100 * r, PERCENT_DP), fixed(100 * k, PERCENT_DP)] for s, e, b, r, k in rows],
    }


def render_summary(artifacts: dict, sections=DEFAULT_SECTIONS, top_k: int = 8) -> SummaryDocument:
    """Render whichever sections have their artifacts present.

    ``artifacts`` maps artifact names to parsed content: ``stats`` (stats.json
    document), ``centrality`` (rows of ticker, b, b_n), ``portfolio`` (rows of
    ticker, es, weight), ``portfolio_meta`` (summary dict) and ``backtest``
    (rows of start, end, book, return, risk). The backtest section is added
    whenever its artifact is present.
    """
    doc = SummaryDocument()
    wanted = list(sections)
    if "backtest" in artifacts and "backtest" not in wanted:
        wanted.append("backtest")
    for name in wanted:
        if artifacts.get(name) is None:
            doc.notices.append(f"{name}: artifact not available")
            continue
        if name == "stats":
            doc.sections[name] = stats_section(artifacts[name])
        elif name == "centrality":
            doc.sections[name] = centrality_section(artifacts[name], top_k)
        elif name == "portfolio":
            doc.sections[name] = portfolio_section(artifacts[name], artifacts.get("portfolio_meta", {}))
        elif name == "backtest":
            doc.sections[name] = backtest_section(artifacts[name])
    return doc


def load_artifacts(out_dir) -> dict:
    """Parse the pipeline's files in ``out_dir`` into :func:`render_summary` input."""
    out = Path(out_dir)
    arts: dict = {}
    if (out / "stats.json").exists():
        arts["stats"] = json.loads((out / "stats.json").read_text())
    if (out / "centrality.csv").exists():
        arts["centrality"] = [
            (r["ticker"], float(r["b"]), float(r["b_n"]))
            for r in csv.DictReader(io.StringIO((out / "centrality.csv").read_text()))
        ]
    if (out / "portfolio.csv").exists():
        arts["portfolio"] = [
            (r["ticker"], float(r["es"]), float(r["weight"]))
            for r in csv.DictReader(io.StringIO((out / "portfolio.csv").read_text()))
        ]
        if (out / "portfolio.json").exists():
            arts["portfolio_meta"] = json.loads((out / "portfolio.json").read_text())
    if (out / "backtest.csv").exists():
        arts["backtest"] = [
            (r["interval_start"], r["interval_end"], r["book"], float(r["return"]), float(r["risk"]))
            for r in csv.DictReader(io.StringIO((out / "backtest.csv").read_text()))
        ]
    return arts
