"""Energy arithmetic for signing on battery-powered sensing devices.

One sample interval T of the modeled device consists of: one sensor running
continuously, one 1 ms active read by the microcontroller, one signature
over the reading, and power-save idling otherwise.  Energies come from
E = V * I * t per component:

    E_sig    = V_active * I_active * sign_time
    E_sensor = V_sensor * I_sensor * T
    E_read   = V_active * I_active * read_time
    E_idle   = V_idle   * I_idle   * T      (sign/read times are negligible
                                             against T; idle draw is charged
                                             for the whole interval)

``scenario_fraction`` reports E_sig as a fraction of the interval total,
the quantity that decides whether signing or sensing dominates the battery.

Built-in profiles describe an ATmega2560-class device (5 V / 20 mA active,
10 µA power save), a pulse sensor sampled every 10 s and a pressure sensor
sampled every 10 min; built-in scheme costs are reference signing times
measured on that device class at 16 MHz.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import ParameterError

CSV_HEADER = "scheme,scenario,sign_mJ,sensor_mJ,read_mJ,idle_mJ,fraction_pct"


@dataclass(frozen=True)
class DeviceProfile:
    """Electrical profile of the signing microcontroller."""

    active_voltage: float
    active_current: float
    idle_voltage: float
    idle_current: float
    read_time: float

    def __post_init__(self) -> None:
        _require_positive(self, "active_voltage", "active_current", "idle_voltage",
                          "idle_current", "read_time")


@dataclass(frozen=True)
class SensorProfile:
    """A continuously powered sensor sampled once per interval."""

    name: str
    voltage: float
    current: float
    sample_interval: float

    def __post_init__(self) -> None:
        _require_positive(self, "voltage", "current", "sample_interval")


@dataclass(frozen=True)
class SchemeCost:
    """A signature scheme reduced to its signing time on the device."""

    name: str
    sign_time: float

    def __post_init__(self) -> None:
        _require_positive(self, "sign_time")


def _require_positive(obj, *fields: str) -> None:
    for name in fields:
        if getattr(obj, name) <= 0:
            raise ParameterError(f"{type(obj).__name__}.{name} must be positive")


ATMEGA2560 = DeviceProfile(
    active_voltage=5.0,
    active_current=0.020,
    idle_voltage=5.0,
    idle_current=10e-6,
    read_time=0.001,
)

PULSE_SENSOR = SensorProfile(name="pulse", voltage=3.0, current=4.5e-3, sample_interval=10.0)
PRESSURE_SENSOR = SensorProfile(name="pressure", voltage=2.5, current=5e-6, sample_interval=600.0)

# Reference signing times (seconds) on the 8-bit AVR device class at 16 MHz.
AVR_SCHEME_COSTS = (
    SchemeCost("ECDSA", 79185664 / 16e6),
    SchemeCost("BPV-ECDSA", 23519232 / 16e6),
    SchemeCost("Ed25519", 34342230 / 16e6),
    SchemeCost("SchnorrQ", 5174800 / 16e6),
    SchemeCost("ESEM", 616896 / 16e6),
)

DEFAULT_SENSORS = (PULSE_SENSOR, PRESSURE_SENSOR)


def sign_energy(profile: DeviceProfile, t: float) -> float:
    """Joules consumed signing for t seconds at active draw."""
    if t < 0:
        raise ParameterError("signing time must be >= 0")
    return profile.active_voltage * profile.active_current * t


@dataclass(frozen=True)
class ScenarioRow:
    """One scheme under one sensor scenario, energies in joules per interval."""

    scheme: str
    scenario: str
    sign_j: float
    sensor_j: float
    read_j: float
    idle_j: float

    @property
    def fraction(self) -> float:
        return self.sign_j / (self.sign_j + self.sensor_j + self.read_j + self.idle_j)


def scenario_breakdown(
    device: DeviceProfile, sensor: SensorProfile, scheme: SchemeCost
) -> ScenarioRow:
    interval = sensor.sample_interval
    return ScenarioRow(
        scheme=scheme.name,
        scenario=sensor.name,
        sign_j=sign_energy(device, scheme.sign_time),
        sensor_j=sensor.voltage * sensor.current * interval,
        read_j=device.active_voltage * device.active_current * device.read_time,
        idle_j=device.idle_voltage * device.idle_current * interval,
    )


def scenario_fraction(
    device: DeviceProfile, sensor: SensorProfile, scheme: SchemeCost
) -> float:
    """Signing's share of the per-interval energy budget, in [0, 1)."""
    return scenario_breakdown(device, sensor, scheme).fraction


def build_rows(
    device: DeviceProfile = ATMEGA2560,
    sensors: Sequence[SensorProfile] = DEFAULT_SENSORS,
    schemes: Sequence[SchemeCost] = AVR_SCHEME_COSTS,
) -> List[ScenarioRow]:
    return [
        scenario_breakdown(device, sensor, scheme)
        for sensor in sensors
        for scheme in schemes
    ]


def emit_report(rows: Iterable[ScenarioRow]) -> bytes:
    """Render rows as CSV (stable column order, millijoules, percent)."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(
            f"{row.scheme},{row.scenario},"
            f"{row.sign_j * 1e3:.4f},{row.sensor_j * 1e3:.4f},"
            f"{row.read_j * 1e3:.4f},{row.idle_j * 1e3:.4f},"
            f"{row.fraction * 100:.4f}\n"
        )
    return out.getvalue().encode()


# ── key=value profile files ──────────────────────────────────────────────


def parse_profile(text: str) -> Dict[str, str]:
    """Parse a simple ``key = value`` file (# comments, blank lines ok)."""
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ParameterError(f"profile line {lineno}: expected key=value, got {raw!r}")
        values[key.strip()] = value.strip()
    return values


def _floats(values: Dict[str, str], *names: str) -> Tuple[float, ...]:
    out = []
    for name in names:
        if name not in values:
            raise ParameterError(f"profile missing required key {name!r}")
        try:
            out.append(float(values[name]))
        except ValueError:
            raise ParameterError(f"profile key {name!r} is not a number") from None
    return tuple(out)


def device_profile_from_text(text: str) -> DeviceProfile:
    values = parse_profile(text)
    av, ac, iv, ic, rt = _floats(
        values, "active_voltage", "active_current", "idle_voltage", "idle_current", "read_time"
    )
    return DeviceProfile(av, ac, iv, ic, rt)


def sensor_profile_from_text(text: str, default_name: str = "sensor") -> SensorProfile:
    values = parse_profile(text)
    v, c, t = _floats(values, "voltage", "current", "sample_interval")
    return SensorProfile(values.get("name", default_name), v, c, t)


def scheme_cost_from_text(text: str, default_name: str = "scheme") -> SchemeCost:
    values = parse_profile(text)
    (t,) = _floats(values, "sign_time")
    return SchemeCost(values.get("name", default_name), t)
