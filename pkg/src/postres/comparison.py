"""Embedded subset of published phase-shifter figures of merit."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from importlib import resources

_FILE = "shifters.csv"


@dataclass(frozen=True)
class ShifterRecord:
    """One published design. Negative ``avg_loss_db`` means net gain (active designs).

    ``resolution_deg`` and ``p1db_dbm`` are bounds for the post-resonance row
    (< 0.3 deg, > 15 dBm). Missing values are ``None``.
    """

    technology: str
    type: str
    technique: str
    area_mm2: float
    elements_per_mm2: int | None
    f_low_ghz: float
    f_high_ghz: float
    avg_loss_db: float
    dc_power_mw: float
    range_deg: float
    resolution_deg: float
    p1db_dbm: float | None
    year: str

    def as_dict(self) -> dict:
        return asdict(self)


COLUMNS = tuple(ShifterRecord.__dataclass_fields__)


def _opt(x: str, cast):
    return cast(x) if x.strip() else None


def load_table(kind: str | None = None) -> list[ShifterRecord]:
    """All embedded rows in file order, optionally only ``active`` or ``passive`` ones."""
    if kind is not None and kind not in ("active", "passive"):
        raise ValueError(f"type filter must be 'active' or 'passive', got {kind!r}")
    text = resources.files("postres.data").joinpath(_FILE).read_text()
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rec = ShifterRecord(
            technology=r["technology"],
            type=r["type"],
            technique=r["technique"],
            area_mm2=float(r["area_mm2"]),
            elements_per_mm2=_opt(r["elements_per_mm2"], int),
            f_low_ghz=float(r["f_low_ghz"]),
            f_high_ghz=float(r["f_high_ghz"]),
            avg_loss_db=float(r["avg_loss_db"]),
            dc_power_mw=float(r["dc_power_mw"]),
            range_deg=float(r["range_deg"]),
            resolution_deg=float(r["resolution_deg"]),
            p1db_dbm=_opt(r["p1db_dbm"], float),
            year=r["year"],
        )
        if kind is None or rec.type == kind:
            rows.append(rec)
    return rows


def this_work() -> ShifterRecord:
    (row,) = [r for r in load_table() if r.technique == "post-resonance"]
    return row


def format_table(rows: list[ShifterRecord]) -> str:
    """Fixed-width text rendering with one line per design."""
    head = ("technology", "type", "technique", "mm2", "el/mm2", "GHz", "loss dB", "mW", "range", "res")
    body = [
        (
            r.technology,
            r.type,
            r.technique,
            f"{r.area_mm2:g}",
            "-" if r.elements_per_mm2 is None else str(r.elements_per_mm2),
            f"{r.f_low_ghz:g}-{r.f_high_ghz:g}",
            f"{r.avg_loss_db:g}",
            f"{r.dc_power_mw:g}",
            f"{r.range_deg:g}",
            f"{r.resolution_deg:g}",
        )
        for r in rows
    ]
    widths = [max(len(x[i]) for x in [head, *body]) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head, *body]]
    return "\n".join(lines) + "\n"
