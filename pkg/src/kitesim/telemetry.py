"""Framed wire protocol between flight unit and ground unit, with a lossy
channel simulator and a resynchronizing stream parser.

Frame layout (little-endian multi-byte fields):

    offset  size  field
    0       2     sync 0xA5 0x5A
    2       1     version (currently 1)
    3       1     frame type (1 telemetry, 2 command, 3 ack)
    4       2     sequence counter, wraps at 2^16 per sender
    6       4     timestamp, ms
    10      1     payload length
    11      n     payload
    11+n    2     CRC-16/CCITT-FALSE over bytes 2 .. 10+n

Telemetry payload (36 bytes): wind_x, wind_y u16 cm/s; pressure u32 Pa;
baro_alt i32 cm; lat, lon i32 degrees*1e7; gps_alt i32 cm; accel x/y/z
i16 milli-g; gyro x/y/z i16 0.1 deg/s. Command payload (3 bytes): mode u8,
duty i16 centi-percent. The integer quantization IS the system's
measurement resolution.
"""
from __future__ import annotations

import random
import struct
from collections import deque
from dataclasses import dataclass
from enum import IntEnum

from .sensors import SensorReading

SYNC = b"\xa5\x5a"
PROTOCOL_VERSION = 1
HEADER_LEN = 11
CRC_LEN = 2
MAX_PAYLOAD = 255

_STANDARD_GRAVITY = 9.80665  # IMU milli-g convention


class FrameType(IntEnum):
    TELEMETRY = 1
    COMMAND = 2
    ACK = 3


_VALID_TYPES = frozenset(int(t) for t in FrameType)

MODE_CODES = {"IDLE": 0, "TAKEOFF": 1, "RELEASE_TO_STATION": 2,
              "WIND_HOLD": 3, "MANUAL": 4}
MODE_NAMES = {v: k for k, v in MODE_CODES.items()}


def _build_crc_table(poly=0x1021):
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly) if crc & 0x8000 else (crc << 1)
        table.append(crc & 0xFFFF)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def crc16_ccitt(data: bytes, crc: int = 0xFFFF) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no
    final xor. crc16_ccitt(b"123456789") == 0x29B1."""
    table = _CRC_TABLE
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ table[((crc >> 8) ^ b) & 0xFF]
    return crc


@dataclass(frozen=True)
class TelemetryFrame:
    frame_type: FrameType
    seq: int
    timestamp_ms: int
    payload: bytes = b""
    version: int = PROTOCOL_VERSION


_HEADER = struct.Struct("<BBHIB")
_CRC = struct.Struct("<H")


def encode_frame(frame: TelemetryFrame) -> bytes:
    if len(frame.payload) > MAX_PAYLOAD:
        raise ValueError("payload too large")
    body = _HEADER.pack(frame.version, int(frame.frame_type),
                        frame.seq & 0xFFFF, frame.timestamp_ms & 0xFFFFFFFF,
                        len(frame.payload)) + frame.payload
    return SYNC + body + _CRC.pack(crc16_ccitt(body))


class StreamParser:
    """Incremental frame extractor. Feed raw bytes in any chunking; valid
    frames come out in order, corruption is counted, never raised."""

    def __init__(self):
        self._buf = bytearray()
        self.dropped_bytes = 0
        self.bad_frames = 0
        self.frames_ok = 0

    def feed(self, data: bytes) -> list[TelemetryFrame]:
        buf = self._buf
        buf += data
        out = []
        while True:
            i = buf.find(SYNC)
            if i < 0:
                # a trailing 0xA5 may be half a sync pair
                keep = 1 if buf and buf[-1] == SYNC[0] else 0
                self.dropped_bytes += len(buf) - keep
                del buf[:len(buf) - keep]
                break
            if i:
                self.dropped_bytes += i
                del buf[:i]
            if len(buf) < HEADER_LEN:
                break
            version, ftype, seq, ts, plen = _HEADER.unpack_from(buf, 2)
            total = HEADER_LEN + plen + CRC_LEN
            if len(buf) < total:
                break
            body = bytes(buf[2:HEADER_LEN + plen])
            crc_got = buf[total - 2] | (buf[total - 1] << 8)
            if (version == PROTOCOL_VERSION and ftype in _VALID_TYPES
                    and crc16_ccitt(body) == crc_got):
                out.append(TelemetryFrame(FrameType(ftype), seq, ts,
                                          bytes(buf[HEADER_LEN:HEADER_LEN + plen])))
                self.frames_ok += 1
                del buf[:total]
            else:
                # discard this sync pair and rescan
                self.bad_frames += 1
                self.dropped_bytes += 2
                del buf[:2]
        return out

    def diagnostics(self) -> dict:
        return {"dropped_bytes": self.dropped_bytes,
                "bad_frames": self.bad_frames,
                "frames_ok": self.frames_ok}


def parse_stream(data: bytes, parser: StreamParser | None = None):
    """Functional wrapper: returns (frames, diagnostics, parser)."""
    if parser is None:
        parser = StreamParser()
    frames = parser.feed(data)
    return frames, parser.diagnostics(), parser


class Channel:
    """Seeded Bernoulli-loss, fixed-latency, in-order frame channel."""

    def __init__(self, loss_prob: float = 0.0, latency: float = 0.0,
                 seed: int = 0):
        if not 0.0 <= loss_prob <= 1.0:
            raise ValueError("loss_prob must be within [0, 1]")
        self.loss_prob = loss_prob
        self.latency = latency
        self._rng = random.Random(seed)
        self._queue = deque()
        self.sent = 0
        self.lost = 0

    def send(self, frame: TelemetryFrame, t: float) -> None:
        self.sent += 1
        if self.loss_prob > 0.0 and self._rng.random() < self.loss_prob:
            self.lost += 1
            return
        self._queue.append((t + self.latency, frame))

    def poll(self, t: float) -> list[TelemetryFrame]:
        out = []
        q = self._queue
        while q and q[0][0] <= t + 1e-12:
            out.append(q.popleft()[1])
        return out


# --- payload codecs ---------------------------------------------------------

_TELEMETRY = struct.Struct("<HHIiiiihhhhhh")
_COMMAND = struct.Struct("<Bh")

TELEMETRY_PAYLOAD_LEN = _TELEMETRY.size  # 36
COMMAND_PAYLOAD_LEN = _COMMAND.size      # 3


def _u16(v):
    return min(max(int(round(v)), 0), 0xFFFF)


def _u32(v):
    return min(max(int(round(v)), 0), 0xFFFFFFFF)


def _i16(v):
    return min(max(int(round(v)), -32768), 32767)


def _i32(v):
    return min(max(int(round(v)), -(1 << 31)), (1 << 31) - 1)


def pack_telemetry(r: SensorReading) -> bytes:
    g = _STANDARD_GRAVITY
    return _TELEMETRY.pack(
        _u16(r.wind_x * 100.0), _u16(r.wind_y * 100.0),
        _u32(r.pressure),
        _i32(r.baro_alt * 100.0),
        _i32(r.lat * 1e7), _i32(r.lon * 1e7),
        _i32(r.gps_alt * 100.0),
        _i16(r.accel[0] / g * 1000.0), _i16(r.accel[1] / g * 1000.0),
        _i16(r.accel[2] / g * 1000.0),
        _i16(r.gyro[0] * 10.0), _i16(r.gyro[1] * 10.0), _i16(r.gyro[2] * 10.0),
    )


def unpack_telemetry(payload: bytes, t: float = 0.0) -> SensorReading:
    if len(payload) != TELEMETRY_PAYLOAD_LEN:
        raise ValueError("telemetry payload must be 36 bytes")
    (wx, wy, pressure, baro, lat, lon, gps,
     ax, ay, az, gx, gy, gz) = _TELEMETRY.unpack(payload)
    g = _STANDARD_GRAVITY
    return SensorReading(
        t=t,
        wind_x=wx / 100.0, wind_y=wy / 100.0,
        pressure=float(pressure),
        baro_alt=baro / 100.0,
        lat=lat / 1e7, lon=lon / 1e7,
        gps_alt=gps / 100.0,
        accel=(ax * g / 1000.0, ay * g / 1000.0, az * g / 1000.0),
        gyro=(gx / 10.0, gy / 10.0, gz / 10.0),
    )


def pack_command(mode_code: int, duty_pct: float) -> bytes:
    return _COMMAND.pack(mode_code & 0xFF, _i16(duty_pct * 100.0))


def unpack_command(payload: bytes):
    if len(payload) != COMMAND_PAYLOAD_LEN:
        raise ValueError("command payload must be 3 bytes")
    mode_code, duty_centi = _COMMAND.unpack(payload)
    return mode_code, duty_centi / 100.0
