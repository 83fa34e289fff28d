"""Flight log records, CSV persistence, KML export, and wind/altitude lag
analysis."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sensors import GpsOrigin, gps_read

LOG_HEADER = "t_s,duty_pct,wind_mps,line_m,alt_m,tension_N,mode,seq"

MIN_LAG_SAMPLES = 60
DEFAULT_MAX_LAG_S = 30.0


class LogError(ValueError):
    pass


@dataclass(frozen=True)
class FlightLogRecord:
    t: float
    duty: float
    wind: float
    line_out: float
    altitude: float
    tension: float
    mode: str
    seq: int


def write_log(records, path) -> None:
    """CSV with full float precision (repr round-trips exactly)."""
    lines = [LOG_HEADER]
    for r in records:
        lines.append(f"{r.t!r},{r.duty!r},{r.wind!r},{r.line_out!r},"
                     f"{r.altitude!r},{r.tension!r},{r.mode},{r.seq}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_log(path) -> list[FlightLogRecord]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0] != LOG_HEADER:
        raise LogError("line 1: bad or missing header")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise LogError(f"line {lineno}: expected 8 fields, got {len(parts)}")
        try:
            records.append(FlightLogRecord(
                t=float(parts[0]), duty=float(parts[1]), wind=float(parts[2]),
                line_out=float(parts[3]), altitude=float(parts[4]),
                tension=float(parts[5]), mode=parts[6], seq=int(parts[7]),
            ))
        except ValueError as exc:
            raise LogError(f"line {lineno}: {exc}") from exc
    return records


def positions_from_log(records, origin: GpsOrigin):
    """Reconstruct (lat, lon, alt) samples from line length and altitude,
    assuming a taut tether along the origin bearing."""
    points = []
    for r in records:
        x = math.sqrt(max(0.0, r.line_out**2 - r.altitude**2))
        lat, lon, alt = gps_read(x, r.altitude, origin)
        points.append((lat, lon, alt))
    return points


def kml_from_positions(points) -> str:
    """Single line-string placemark at absolute altitude; consecutive
    duplicate points are collapsed."""
    coords = []
    last = None
    for lat, lon, alt in points:
        entry = f"{lon:.7f},{lat:.7f},{alt:.2f}"
        if entry != last:
            coords.append(entry)
            last = entry
    body = "\n".join("          " + c for c in coords)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<kml xmlns="http://www.opengis.net/kml/2.2">\n'
        "  <Document>\n"
        "    <Placemark>\n"
        "      <name>flight path</name>\n"
        "      <LineString>\n"
        "        <altitudeMode>absolute</altitudeMode>\n"
        "        <coordinates>\n"
        f"{body}\n"
        "        </coordinates>\n"
        "      </LineString>\n"
        "    </Placemark>\n"
        "  </Document>\n"
        "</kml>\n"
    )


def export_kml(records, origin: GpsOrigin) -> str:
    if not records:
        raise LogError("log is empty")
    return kml_from_positions(positions_from_log(records, origin))


def analyze_lag(records, max_lag_s: float = DEFAULT_MAX_LAG_S) -> float:
    """Lag (seconds) at which the normalized cross-correlation between the
    wind and altitude series peaks, searched over [0, max_lag_s]. Requires
    a transient in both series."""
    if len(records) < MIN_LAG_SAMPLES:
        raise LogError(f"log too short (<{MIN_LAG_SAMPLES} samples)")
    period = records[1].t - records[0].t
    if period <= 0:
        raise LogError("records not time-ordered")
    w = np.array([r.wind for r in records])
    a = np.array([r.altitude for r in records])
    w = w - w.mean()
    a = a - a.mean()
    sw, sa = w.std(), a.std()
    if sw == 0.0 or sa == 0.0:
        raise LogError("no transient (constant series)")
    n = len(w)
    max_k = min(n - 2, int(round(max_lag_s / period)))
    best_k, best_c = 0, -math.inf
    for k in range(max_k + 1):
        c = float(np.dot(w[:n - k], a[k:])) / ((n - k) * sw * sa)
        if c > best_c:
            best_c, best_k = c, k
    return best_k * period
