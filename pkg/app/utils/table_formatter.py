# app/utils/table_formatter.py - Tables laid out like the published Tables 1-4
import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence

import pandas as pd

from app.core.core_types import PAIR_LABELS
from app.schemas.reports import DistributionCounts, FactsReport, TallyTable
from app.services.realm_matrix_service import FunctionalRelation, RealmMatrixR94

FLOAT_FORMAT = "%.6f"


def facts_frame(report: FactsReport) -> pd.DataFrame:
    rows = [
        {"pair": t.pair, "n": t.n, "rr": t.rr, "rg": t.rg, "gr": t.gr, "gg": t.gg,
         "same_fraction": t.same_fraction}
        for t in report.pairs
    ]
    return pd.DataFrame(rows, columns=["pair", "n", "rr", "rg", "gr", "gg", "same_fraction"])


def tally_frame(t: TallyTable) -> pd.DataFrame:
    """Header row of pair labels, one row of -1 counts."""
    return pd.DataFrame([t.counts], columns=list(PAIR_LABELS))


def realm_frame(m: RealmMatrixR94) -> pd.DataFrame:
    """Instruction sets, their G9 entries at each pair, and the data vector label."""
    rows = []
    for col in m.columns:
        row: Dict[str, Any] = {"instruction_sets": " ".join(s.label for s in col.sources)}
        row.update({label: f"{v:+d}" for label, v in zip(PAIR_LABELS, col.entries)})
        row["data_vector"] = col.label
        rows.append(row)
    return pd.DataFrame(rows, columns=["instruction_sets", *PAIR_LABELS, "data_vector"])


def relations_frame(relations: Sequence[FunctionalRelation]) -> pd.DataFrame:
    rows = []
    for r in relations:
        row = {"relation": r.label, "setting_pairs": "&".join(r.setting_pair_names), "maps": r.arrow}
        for (a, b), col in sorted(r.lookup.items()):
            row[f"({a:+d} {b:+d})"] = col.label
        rows.append(row)
    return pd.DataFrame(rows)


def fractions_frame(fractions: Sequence[Fraction], exact: bool = False) -> pd.DataFrame:
    """One row of per-pair same-outcome fractions (Table 2 layout)."""
    values = [str(f) if exact else f"{float(f):.2f}" for f in fractions]
    return pd.DataFrame([values], columns=list(PAIR_LABELS))


def distribution_frame(distributions: Mapping[str, DistributionCounts]) -> pd.DataFrame:
    """G9-1..G9-4 rows by relation columns (Table 4 layout)."""
    data = {label: list(d.as_tuple()) for label, d in distributions.items()}
    frame = pd.DataFrame(data, index=["G9-1", "G9-2", "G9-3", "G9-4"])
    frame.index.name = "data_vector"
    return frame.reset_index()


def trials_frame(records: Sequence[Any]) -> pd.DataFrame:
    """One row per device trial: trial_index, pair, outcome."""
    return pd.DataFrame([r.to_dict() for r in records], columns=["trial_index", "pair", "outcome"])


def records_frame(records: Sequence[Mapping[str, Any]], columns: Optional[List[str]] = None) -> pd.DataFrame:
    return pd.DataFrame(list(records), columns=columns)


def render(frame: pd.DataFrame, fmt: str, header: Optional[Mapping[str, Any]] = None) -> str:
    """Render as csv, json or text; header items become '# key: value' lines (csv/text) or a 'meta' object (json)."""
    header = dict(header or {})
    if fmt == "json":
        payload = {"meta": header, "rows": json.loads(frame.to_json(orient="records"))}
        return json.dumps(payload, indent=2) + "\n"
    lines = [f"# {key}: {value}" for key, value in header.items()]
    if fmt == "csv":
        body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    elif fmt == "text":
        body = frame.to_string(index=False, float_format=lambda v: FLOAT_FORMAT % v) + "\n"
    else:
        raise ValueError(f"Unknown output format {fmt!r}; expected csv, json or text")
    return "\n".join(lines + [body]) if lines else body


def markdown_block(title: str, frame: pd.DataFrame, caption: Optional[str] = None) -> str:
    parts = [f"## {title}", "", "```", frame.to_string(index=False, float_format=lambda v: FLOAT_FORMAT % v), "```"]
    if caption:
        parts += ["", caption]
    return "\n".join(parts) + "\n"
