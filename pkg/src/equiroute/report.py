"""Strategy comparison tables and their file formats."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Mapping

from .equity import MODES
from .sim import COMPLETED, RunResults


def _delta(a: float | None, b: float | None) -> dict:
    if a is None or b is None:
        return {"abs": None, "pct": None}
    return {"abs": a - b, "pct": None if b == 0 else 100.0 * (a - b) / b}


def deltas(strategies: Mapping[str, dict]) -> dict:
    """Pairwise differences ``a - b`` for every ordered strategy pair."""
    out = {}
    names = list(strategies)
    for a in names:
        for b in names:
            if a == b:
                continue
            sa, sb = strategies[a], strategies[b]
            entry = {"fleet_dte": _delta(sa["fleet_dte"], sb["fleet_dte"]), "per_mode": {}}
            for mode in MODES:
                ma, mb = sa["per_mode"].get(mode), sb["per_mode"].get(mode)
                if ma and mb:
                    entry["per_mode"][mode] = {
                        "mean_travel_min": _delta(ma["mean_travel_min"], mb["mean_travel_min"]),
                        "mean_cost_usd": _delta(ma["mean_cost_usd"], mb["mean_cost_usd"]),
                    }
            out[f"{a}-{b}"] = entry
    return out


def comparison_report(results: Mapping[str, RunResults], meta: dict) -> dict:
    strategies = {name: r.summary() for name, r in results.items()}
    return {"meta": meta, "strategies": strategies, "deltas": deltas(strategies)}


def dtx_by_mode_csv(results: Mapping[str, RunResults]) -> str:
    """Long table of per-vehicle DTX, one row per vehicle and strategy."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["strategy", "mode", "id", "dtx", "travel_min"])
    for name, r in results.items():
        for rec in r.records:
            if rec.status == COMPLETED:
                w.writerow([name, rec.mode, rec.id, rec.dtx, rec.travel])
    return buf.getvalue()


def trip_time_by_mode_csv(results: Mapping[str, RunResults]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["strategy", "mode", "n", "mean_travel_min", "mean_cost_usd", "mean_dtx"])
    for name, r in results.items():
        for mode, row in r.mode_means().items():
            w.writerow([name, mode, row["n"], row["mean_travel_min"], row["mean_cost_usd"], row["mean_dtx"]])
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_json(path: Path, doc) -> None:
    write_text(path, json.dumps(doc, indent=2) + "\n")
