import pytest

from esem import energymodel as em
from esem.errors import ParameterError


def _cost(name):
    return next(c for c in em.AVR_SCHEME_COSTS if c.name == name)


def test_sign_energy_reference_values():
    # E = V * I * t at 5 V / 20 mA
    ecdsa = em.sign_energy(em.ATMEGA2560, _cost("ECDSA").sign_time)
    assert abs(ecdsa - 0.49491) / 0.49491 < 0.02
    esem = em.sign_energy(em.ATMEGA2560, _cost("ESEM").sign_time)
    assert abs(esem - 0.00385) / 0.00385 < 0.02


def test_sign_energy_edge_cases():
    assert em.sign_energy(em.ATMEGA2560, 0.0) == 0.0
    with pytest.raises(ParameterError):
        em.sign_energy(em.ATMEGA2560, -1.0)


def test_sign_energy_linear_in_time_and_current():
    base = em.sign_energy(em.ATMEGA2560, 2.0)
    assert em.sign_energy(em.ATMEGA2560, 4.0) == pytest.approx(2 * base)
    doubled = em.DeviceProfile(
        active_voltage=5.0,
        active_current=0.040,
        idle_voltage=5.0,
        idle_current=10e-6,
        read_time=0.001,
    )
    assert em.sign_energy(doubled, 2.0) == pytest.approx(2 * base)


def test_scenario_fractions_reproduce_quoted_figures():
    cases = [
        ("ESEM", em.PULSE_SENSOR, 2.76, 0.05),
        ("SchnorrQ", em.PULSE_SENSOR, 19.29, 0.15),
        ("ESEM", em.PRESSURE_SENSOR, 9.29, 0.05),
        ("SchnorrQ", em.PRESSURE_SENSOR, 46.24, 0.05),
        ("Ed25519", em.PRESSURE_SENSOR, 85.09, 0.05),
    ]
    for scheme_name, sensor, expected_pct, tol_pp in cases:
        pct = 100 * em.scenario_fraction(em.ATMEGA2560, sensor, _cost(scheme_name))
        assert abs(pct - expected_pct) <= tol_pp, (scheme_name, sensor.name, pct)


def test_scenario_breakdown_components():
    row = em.scenario_breakdown(em.ATMEGA2560, em.PRESSURE_SENSOR, _cost("ESEM"))
    assert row.sensor_j == pytest.approx(2.5 * 5e-6 * 600)
    assert row.read_j == pytest.approx(5.0 * 0.020 * 0.001)
    assert row.idle_j == pytest.approx(5.0 * 10e-6 * 600)
    assert 0 < row.fraction < 1


def test_fraction_monotone_in_sign_time(rng):
    # strictly increasing in signing time
    for _ in range(100):
        t1, t2 = sorted(rng.uniform(1e-4, 10.0) for _ in range(2))
        if t1 == t2:
            continue
        f1 = em.scenario_fraction(em.ATMEGA2560, em.PULSE_SENSOR, em.SchemeCost("a", t1))
        f2 = em.scenario_fraction(em.ATMEGA2560, em.PULSE_SENSOR, em.SchemeCost("b", t2))
        assert f1 < f2


def test_fraction_monotone_in_sensor_power(rng):
    for _ in range(100):
        i1, i2 = sorted(rng.uniform(1e-6, 1e-2) for _ in range(2))
        if i1 == i2:
            continue
        s1 = em.SensorProfile("s1", 3.0, i1, 10.0)
        s2 = em.SensorProfile("s2", 3.0, i2, 10.0)
        cost = em.SchemeCost("x", 0.05)
        assert em.scenario_fraction(em.ATMEGA2560, s1, cost) > em.scenario_fraction(
            em.ATMEGA2560, s2, cost
        )


# ── report output ────────────────────────────────────────────────────────


def test_report_header_is_byte_exact():
    blob = em.emit_report([])
    assert blob == b"scheme,scenario,sign_mJ,sensor_mJ,read_mJ,idle_mJ,fraction_pct\n"


def test_report_contains_reference_row():
    blob = em.emit_report(em.build_rows()).decode()
    lines = blob.strip().split("\n")
    assert lines[0] == em.CSV_HEADER
    row = next(l for l in lines if l.startswith("ESEM,pressure"))
    fields = row.split(",")
    assert abs(float(fields[-1]) - 9.29) <= 0.05
    assert abs(float(fields[2]) - 3.85) <= 0.08  # sign_mJ column


def test_report_row_count():
    rows = em.build_rows()
    assert len(rows) == len(em.AVR_SCHEME_COSTS) * len(em.DEFAULT_SENSORS)
    blob = em.emit_report(rows).decode()
    assert len(blob.strip().split("\n")) == 1 + len(rows)


# ── profile files ────────────────────────────────────────────────────────


DEVICE_TEXT = """
# device under test
active_voltage = 5.0
active_current = 0.020
idle_voltage = 5.0
idle_current = 0.00001
read_time = 0.001
"""


def test_profile_parsing_round_trip():
    device = em.device_profile_from_text(DEVICE_TEXT)
    assert device == em.ATMEGA2560

    sensor = em.sensor_profile_from_text(
        "name=pulse\nvoltage=3\ncurrent=0.0045\nsample_interval=10\n"
    )
    assert sensor == em.PULSE_SENSOR

    cost = em.scheme_cost_from_text("name = Fast\nsign_time = 0.012\n")
    assert cost == em.SchemeCost("Fast", 0.012)


def test_profile_parsing_errors():
    with pytest.raises(ParameterError):
        em.parse_profile("not a key value line")
    with pytest.raises(ParameterError):
        em.device_profile_from_text("active_voltage=5.0\n")  # missing keys
    with pytest.raises(ParameterError):
        em.sensor_profile_from_text("voltage=abc\ncurrent=1\nsample_interval=1")
    with pytest.raises(ParameterError):
        em.sensor_profile_from_text("voltage=-3\ncurrent=1\nsample_interval=1")


def test_profile_validation():
    with pytest.raises(ParameterError):
        em.SchemeCost("bad", 0.0)
    with pytest.raises(ParameterError):
        em.SensorProfile("bad", 3.0, 0.0045, -1.0)
