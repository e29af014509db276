"""Macro analysis: fold a campaign's verdicts into a configuration ×
(mode, label) count table and render it as CSV or standalone HTML.

Inconclusive is a column of its own rather than a sixth per-config label:
inconclusiveness belongs to the vote, so a config appears there when the
test's vote collapsed while this config did produce a result. Crash and
timeout labels keep their own columns even on inconclusive tests, which
is what makes every row sum to the number of active tests.
"""

from __future__ import annotations

import csv
import html
import io
from collections import Counter
from dataclasses import dataclass, field

from .errors import MissingVerdicts
from .modes import MODE_ORDER, TestMode
from .oracle import TestVerdict, verdict_from_json
from .store import Repository

LABEL_ORDER = ("Correct", "WrongCode", "CompilerCrash", "RuntimeCrash",
               "Timeout", "Inconclusive")


@dataclass
class SummaryTable:
    campaign_id: str
    config_uids: tuple[str, ...]          # row order (uid-lexicographic)
    modes: tuple[str, ...]                # column groups, declaration order
    labels: tuple[str, ...] = LABEL_ORDER
    cells: dict = field(default_factory=dict)        # (config, mode, label) -> int
    cell_tests: dict = field(default_factory=dict)   # same key -> tuple of test uids
    row_totals: dict = field(default_factory=dict)   # config -> int
    col_totals: dict = field(default_factory=dict)   # (mode, label) -> int

    def cell(self, config_uid: str, mode: str, label: str) -> int:
        return self.cells.get((config_uid, mode, label), 0)

    def tests_in_cell(self, config_uid: str, mode: str, label: str) -> tuple[str, ...]:
        return self.cell_tests.get((config_uid, mode, label), ())

    def columns(self) -> list[tuple[str, str]]:
        return [(m, l) for m in self.modes for l in self.labels]


def summarize(repo: Repository, campaign_id: str,
              verdicts: dict[str, TestVerdict] | None = None) -> SummaryTable:
    """Count verdict labels per (config, mode). Verdicts are loaded from
    the repository unless supplied; every active test of the campaign must
    be covered."""
    meta = repo.get_meta("campaign", campaign_id)
    if verdicts is None:
        verdicts = {uid: verdict_from_json(doc)
                    for uid, doc in repo.load_verdicts(campaign_id).items()}

    test_modes: dict[str, str] = {}
    for uid in meta["test_uids"]:
        tm = repo.get_meta("test", uid)
        if not tm.get("invalidation"):
            test_modes[uid] = tm["mode"]

    missing = sorted(uid for uid in test_modes if uid not in verdicts)
    if missing:
        raise MissingVerdicts(
            f"campaign {campaign_id} has {len(missing)} active tests without "
            f"verdicts (first: {missing[0]}); classify it first")

    config_uids = tuple(sorted(meta["config_uids"]))
    row_set = set(config_uids)
    modes = tuple(m.value for m in MODE_ORDER if m.value in set(test_modes.values()))

    counts: Counter = Counter()
    members: dict = {}
    for uid in sorted(test_modes):
        verdict = verdicts[uid]
        mode = test_modes[uid]
        labeled = list(verdict.per_config.items())
        labeled += [(c, "Inconclusive") for c in verdict.no_vote_configs]
        for config, label in labeled:
            if config not in row_set:
                continue
            key = (config, mode, label)
            counts[key] += 1
            members.setdefault(key, []).append(uid)

    table = SummaryTable(campaign_id=campaign_id, config_uids=config_uids, modes=modes)
    table.cells = dict(counts)
    table.cell_tests = {k: tuple(v) for k, v in members.items()}
    table.row_totals = {
        c: sum(counts[(c, m, l)] for m in modes for l in LABEL_ORDER
               if (c, m, l) in counts)
        for c in config_uids
    }
    table.col_totals = {
        (m, l): sum(counts[(c, m, l)] for c in config_uids if (c, m, l) in counts)
        for m in modes for l in LABEL_ORDER
    }
    return table


def _selected_labels(table: SummaryTable, view: dict | None) -> tuple[str, ...]:
    if not view:
        return table.labels
    picked = tuple(col.split(".", 1)[1] for col in view.get("columns", ())
                   if col.startswith("label."))
    return picked or table.labels


def render(table: SummaryTable, format: str = "csv",
           view: dict | None = None) -> bytes:
    """Deterministic document for a table; a view narrows the label
    columns via its label.* key-paths."""
    if format == "csv":
        return _render_csv(table, _selected_labels(table, view))
    if format == "html":
        return _render_html(table, _selected_labels(table, view))
    raise ValueError(f"unknown render format: {format!r}")


def _render_csv(table: SummaryTable, labels: tuple[str, ...]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["config"]
                    + [f"{m}.{l}" for m in table.modes for l in labels]
                    + ["total"])
    for config in table.config_uids:
        row = [config]
        row += [table.cell(config, m, l) for m in table.modes for l in labels]
        row.append(sum(table.cell(config, m, l) for m in table.modes for l in labels))
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def parse_summary_csv(data: bytes) -> dict[tuple[str, str, str], int]:
    """Inverse of the CSV renderer: (config, mode, label) -> count."""
    rows = list(csv.reader(io.StringIO(data.decode("utf-8"))))
    header = rows[0]
    out: dict[tuple[str, str, str], int] = {}
    for row in rows[1:]:
        config = row[0]
        for name, value in zip(header[1:-1], row[1:-1]):
            mode, label = name.split(".", 1)
            out[(config, mode, label)] = int(value)
    return out


_HTML_STYLE = (
    "body{font-family:sans-serif;margin:2em}"
    "table{border-collapse:collapse}"
    "th,td{border:1px solid #999;padding:4px 10px;text-align:right}"
    "th{background:#eee}"
    "td.zero{color:#bbb}"
    "caption{font-weight:bold;margin-bottom:.5em}"
)


def _render_html(table: SummaryTable, labels: tuple[str, ...]) -> bytes:
    cols = [(m, l) for m in table.modes for l in labels]
    parts = [
        "<!DOCTYPE html>",
        "<html><head><meta charset=\"utf-8\">",
        f"<title>campaign {html.escape(table.campaign_id)}</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head><body>",
        f"<table><caption>campaign {html.escape(table.campaign_id)}</caption>",
        "<tr><th>config</th>"
        + "".join(f"<th>{html.escape(m)}.{html.escape(l)}</th>" for m, l in cols)
        + "<th>total</th></tr>",
    ]
    for config in table.config_uids:
        cells = []
        for m, l in cols:
            n = table.cell(config, m, l)
            uids = " ".join(table.tests_in_cell(config, m, l))
            klass = " class=\"zero\"" if n == 0 else ""
            cells.append(f"<td{klass} data-test-uids=\"{html.escape(uids)}\">{n}</td>")
        total = sum(table.cell(config, m, l) for m, l in cols)
        parts.append(f"<tr><th>{html.escape(config)}</th>{''.join(cells)}"
                     f"<td>{total}</td></tr>")
    totals = [sum(table.cell(c, m, l) for c in table.config_uids) for m, l in cols]
    parts.append("<tr><th>total</th>"
                 + "".join(f"<td>{n}</td>" for n in totals)
                 + f"<td>{sum(totals)}</td></tr>")
    parts.append("</table></body></html>")
    return ("\n".join(parts) + "\n").encode("utf-8")
