"""Run reports as JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

CSV_COLUMNS = ("protocol", "n", "k/d/t", "seed", "epr_charged", "bound", "fidelity", "pass")
_PARAM_KEYS = ("k", "d", "t")


def _as_dict(r) -> dict[str, Any]:
    return r.to_dict() if hasattr(r, "to_dict") else dict(r)


def row_passes(r: Mapping[str, Any]) -> bool:
    """A row passes only if the run passed and its charge is within the bound."""
    return bool(r.get("pass")) and r["epr_charged"] <= r["bound"]


def build_report(results: Iterable) -> dict[str, Any]:
    runs = sorted((_as_dict(r) for r in results), key=lambda d: (d["protocol"], d["seed"]))
    for r in runs:
        r["pass"] = row_passes(r)
    fids = [r["fidelity"] for r in runs]
    summary = {
        "runs": len(runs),
        "passed": sum(r["pass"] for r in runs),
        "failed": sum(not r["pass"] for r in runs),
        "max_epr_charged": max((r["epr_charged"] for r in runs), default=0),
        "min_fidelity": min(fids, default=None),
        "protocols": sorted({r["protocol"] for r in runs}),
    }
    return {"runs": runs, "summary": summary}


def to_csv(report: Mapping[str, Any]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report["runs"]:
        param = next((r[k] for k in _PARAM_KEYS if k in r), "")
        w.writerow([r["protocol"], r["n"], param, r["seed"], r["epr_charged"], r["bound"],
                    repr(float(r["fidelity"])), str(r["pass"]).lower()])
    return buf.getvalue()


def emit_report(results: Iterable, out: str | Path, stem: str = "report") -> tuple[Path, Path]:
    """Write ``<stem>.json`` and ``<stem>.csv`` under directory ``out``."""
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        report = build_report(results)
        jpath, cpath = out / f"{stem}.json", out / f"{stem}.csv"
        jpath.write_text(json.dumps(report, indent=1, sort_keys=True, default=_json_default) + "\n")
        cpath.write_text(to_csv(report))
    except OSError as exc:
        raise OSError(f"cannot write report under {out}: {exc}") from exc
    return jpath, cpath


def _json_default(o):
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")
